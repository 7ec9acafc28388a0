use std::path::Path;
use std::process::Command;

fn ohmtrace(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ohmtrace")).args(args).output().expect("binary runs")
}

fn body(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect()
}

#[test]
fn path_identity_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("identity.csv");
    let o = ohmtrace(&[
        "crossing-identity",
        "--family",
        "birth-death",
        "--param",
        "ratio=1",
        "--depths",
        "2",
        "--trials",
        "5000",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("# claim: "));
    assert!(text.contains("# outcome: passed"));
    assert!(text.contains("row,depth,a,b,conductance"));
}

#[test]
fn csv_goes_to_stdout_without_out() {
    let o = ohmtrace(&["ball-witness", "--depths", "6", "--param", "m=0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().any(|l| l == "k,ball_size,conductance,exceeds_m"));
}

#[test]
fn configuration_errors_exit_3() {
    for args in [
        &["level-cut-trend", "--tgrid", "0.5,1.5"][..],
        &["level-cut-trend", "--depths", "6,5"][..],
        &["no-such-experiment"][..],
        &["crossing-identity", "--family", "moebius"][..],
        &["crossing-identity", "--trials", "0"][..],
        &["crossing-identity", "--bogus-flag"][..],
    ] {
        assert_eq!(ohmtrace(args).status.code(), Some(3), "{args:?}");
    }
}

#[test]
fn soft_failure_exits_4_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("witness.csv");
    let o = ohmtrace(&["ball-witness", "--depths", "5", "--param", "m=100", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(std::fs::read_to_string(&out).unwrap().contains("MNotReached"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# small trend run\nfamily = tree\ndepths = 4..6\ntgrid = 0.5\nseed = 3\n").unwrap();
    let out = dir.path().join("trend.csv");
    let o = ohmtrace(&[
        "level-cut-trend",
        "--config",
        cfg.to_str().unwrap(),
        "--depths",
        "4,5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("# depths=4,5"));
    assert!(text.contains("# seed=3"));
}

#[test]
fn sequential_and_parallel_bodies_match() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let common = ["trace-recurrence", "--trials", "3", "--param", "radius=5", "--seed", "11"];
    let mut seq = common.to_vec();
    seq.extend(["--sequential", "--out", a.to_str().unwrap()]);
    let mut par = common.to_vec();
    par.extend(["--out", b.to_str().unwrap()]);
    assert_ne!(ohmtrace(&seq).status.code(), Some(3));
    assert_ne!(ohmtrace(&par).status.code(), Some(3));
    assert_eq!(body(&a), body(&b));
    assert!(body(&a).lines().count() > 3);
}

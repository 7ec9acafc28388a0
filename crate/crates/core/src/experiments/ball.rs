use crate::harmonic::effective_conductance;
use crate::network::VertexId;

use super::identity::collapse_at_depth;
use super::{config_err, num, ExperimentConfig, ExperimentError, ExperimentReport, Outcome};

/// Grows balls `B_k` around the root inside the collapse at the outer depth
/// (the last configured depth) until `C(B_k, z) > m`.
pub(super) fn run(config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    let m: f64 = config.param("m", 5.0)?;
    if !(m >= 0.0 && m.is_finite()) {
        return Err(config_err("m must be a non-negative number"));
    }
    let family = config.build_family()?;
    let outer = *config.depths.last().expect("validated");
    let ball = collapse_at_depth(&family, outer)?;
    // sites come in BFS order, so every B_k is a prefix
    let dist: Vec<u64> = ball.sites.iter().map(|s| family.distance(s)).collect();

    let mut report = ExperimentReport::new(config, &["k", "ball_size", "conductance", "exceeds_m"]);
    report.note(format!("m={m} outer_depth={outer} interior_vertices={}", ball.interior_count()));
    let mut witness = None;
    for k in 0..outer as u64 - 1 {
        let size = dist.partition_point(|&d| d <= k);
        let set: Vec<VertexId> = (0..size).map(VertexId::from_index).collect();
        let c = effective_conductance(&ball.network, &set, ball.sink)?;
        let exceeds = c > m;
        report.push(vec![k.to_string(), size.to_string(), num(c), exceeds.to_string()]);
        if exceeds {
            witness = Some(k);
            break;
        }
    }
    match witness {
        Some(k) => report.note(format!("witness k={k}")),
        None => report.record(Outcome::SoftFailure(format!(
            "MNotReached: no ball inside outer depth {outer} has conductance above {m}"
        ))),
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{run as run_experiment, ExperimentKind};

    fn config(m: &str, depth: u32) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(ExperimentKind::BallWitness);
        c.set("param", &format!("m={m}")).unwrap();
        c.depths = vec![depth];
        c
    }

    #[test]
    fn zero_threshold_is_met_at_the_root() {
        let r = run_experiment(&config("0", 6)).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.cell(0, "k"), Some("0"));
        assert_eq!(r.outcome, Outcome::Passed);
    }

    #[test]
    fn binary_tree_ball_conductances() {
        // C(B_k, z) at outer depth n is 2^k / (1 - 2^(k-n))
        let r = run_experiment(&config("1000", 8)).unwrap();
        assert_eq!(r.rows.len(), 7);
        for k in 0..7 {
            let got: f64 = r.cell(k, "conductance").unwrap().parse().unwrap();
            let want = 2f64.powi(k as i32) / (1.0 - 2f64.powi(k as i32 - 8));
            assert!((got - want).abs() < 1e-9 * want, "k={k}: {got} vs {want}");
        }
        assert!(matches!(r.outcome, Outcome::SoftFailure(_)));
    }
}

use crate::network::{CollapsedBall, Exhaustion, Family};
use crate::walk::{expected_crossings_analytic, monte_carlo_expected_crossings, relative_gap, WalkError, DEFAULT_CAP};

use super::{config_err, num, ExperimentConfig, ExperimentError, ExperimentReport, Outcome};

/// Fraction of edges that must land within 4 standard errors.
pub const WITHIN_4SE_TARGET: f64 = 0.95;

/// Depth-`n` collapse: the sink stands for the sphere at distance `n`.
pub(crate) fn collapse_at_depth(family: &Family, depth: u32) -> Result<CollapsedBall, ExperimentError> {
    if depth < 2 {
        return Err(config_err(format!("depth {depth} leaves no interior edges; use depth >= 2")));
    }
    Ok(Exhaustion::new(*family, depth - 1).collapse_boundary()?)
}

/// Seed for depth index `i`, so different depths use unrelated streams.
fn depth_seed(seed: u64, i: usize) -> u64 {
    seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

pub(super) fn run(config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    let family = config.build_family()?;
    let cap: usize = config.param("cap", DEFAULT_CAP)?;
    let mut report = ExperimentReport::new(
        config,
        &[
            "row",
            "depth",
            "a",
            "b",
            "conductance",
            "en_green",
            "en_voltage",
            "formula_gap",
            "mc_mean",
            "mc_se",
            "z_score",
            "within_4se",
        ],
    );
    for (i, &depth) in config.depths.iter().enumerate() {
        let ball = collapse_at_depth(&family, depth)?;
        let (net, o, z) = (&ball.network, ball.network.root(), ball.sink);
        let analytic = match expected_crossings_analytic(net, o, z) {
            Ok(a) => a,
            Err(WalkError::FormulaMismatch { a, b, via_green, via_voltage, gap }) => {
                report.record(Outcome::Violation(format!(
                    "depth {depth}: edge ({a},{b}) Green route {via_green} vs voltage route {via_voltage} (gap {gap:e})"
                )));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let mc = if config.trials >= 2 {
            Some(monte_carlo_expected_crossings(
                net,
                o,
                z,
                config.trials,
                depth_seed(config.seed, i),
                cap,
                config.execution,
            )?)
        } else {
            None
        };

        let mut max_z: f64 = 0.0;
        let mut within = 0usize;
        for (k, e) in net.edges().iter().enumerate() {
            let (g, v) = (analytic.via_green[k], analytic.via_voltage[k]);
            let gap = relative_gap(g, v);
            let mut row = vec![
                "edge".into(),
                depth.to_string(),
                e.a.to_string(),
                e.b.to_string(),
                num(e.conductance),
                num(g),
                num(v),
                num(gap),
            ];
            match &mc {
                Some(mc) => {
                    let s = mc.edges[k];
                    let zs = z_score(s.mean, s.std_error, v);
                    max_z = max_z.max(zs.abs());
                    let ok = zs.abs() <= 4.0;
                    within += ok as usize;
                    row.extend([num(s.mean), num(s.std_error), num(zs), ok.to_string()]);
                }
                None => row.extend(["".into(), "".into(), "".into(), "".into()]),
            }
            report.push(row);
        }

        let m = net.edge_count();
        let total: f64 = analytic.via_voltage.iter().sum();
        let mut summary = vec![
            "summary".into(),
            depth.to_string(),
            "".into(),
            "".into(),
            "".into(),
            num(analytic.via_green.iter().sum()),
            num(total),
            num(analytic.max_relative_gap),
        ];
        match &mc {
            Some(mc) => {
                let fraction = within as f64 / m as f64;
                summary.extend([num(mc.edges.iter().map(|s| s.mean).sum()), "".into(), num(max_z), num(fraction)]);
                report.note(format!(
                    "depth {depth}: alpha={} edges={m} mean_steps={} unabsorbed={}",
                    analytic.alpha, mc.mean_steps, mc.unabsorbed
                ));
                if mc.unabsorbed > 0 {
                    report.record(Outcome::SoftFailure(format!(
                        "depth {depth}: {} walks hit the step cap",
                        mc.unabsorbed
                    )));
                }
                if fraction < WITHIN_4SE_TARGET {
                    report.record(Outcome::SoftFailure(format!("depth {depth}: only {within}/{m} edges within 4 SE")));
                }
            }
            None => summary.extend(["".into(), "".into(), "".into(), "".into()]),
        }
        report.push(summary);
    }
    Ok(report)
}

/// `(mean - expected) / se`, with `se = 0` read as exact agreement or an
/// infinite deviation.
fn z_score(mean: f64, se: f64, expected: f64) -> f64 {
    if se > 0.0 {
        (mean - expected) / se
    } else if (mean - expected).abs() <= 1e-12 * expected.abs().max(1.0) {
        0.0
    } else {
        f64::INFINITY.copysign(mean - expected)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{run as run_experiment, ExperimentKind};

    fn path_config(trials: usize) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(ExperimentKind::CrossingIdentity);
        c.family = "birth-death".into();
        c.set("param", "ratio=1").unwrap();
        c.depths = vec![2];
        c.trials = trials;
        c
    }

    #[test]
    fn path_instance() {
        let r = run_experiment(&path_config(20_000)).unwrap();
        assert_eq!(r.rows.len(), 3);
        let value = |i: usize| r.cell(i, "en_voltage").unwrap().parse::<f64>().unwrap();
        assert!((value(0) - 3.0).abs() < 1e-12);
        assert!((value(1) - 1.0).abs() < 1e-12);
        assert_eq!(r.cell(2, "row"), Some("summary"));
        assert_eq!(r.outcome, Outcome::Passed);
    }

    #[test]
    fn single_trial_skips_monte_carlo() {
        let r = run_experiment(&path_config(1)).unwrap();
        assert_eq!(r.cell(0, "mc_mean"), Some(""));
    }

    #[test]
    fn depth_one_is_rejected() {
        let mut c = path_config(2);
        c.depths = vec![1];
        assert!(matches!(run_experiment(&c), Err(ExperimentError::Config(_))));
    }

    #[test]
    fn z_scores() {
        assert_eq!(z_score(3.0, 0.0, 3.0), 0.0);
        assert_eq!(z_score(4.0, 0.0, 3.0), f64::INFINITY);
        assert_eq!(z_score(4.0, 0.5, 3.0), 2.0);
    }
}

use rand::Rng;

use crate::exec::map_indexed;
use crate::harmonic::{effective_conductance, solve_voltage, superlevel_set};
use crate::network::VertexId;
use crate::random::random_connected_network;
use crate::walk::RngSeed;

use super::{config_err, num, ExperimentConfig, ExperimentError, ExperimentReport, Outcome};

/// Absolute slack below which an inequality counts as violated.
pub const SLACK_TOLERANCE: f64 = 1e-9;

struct Row {
    network: usize,
    form: &'static str,
    level: f64,
    set_size: usize,
    lhs: f64,
    rhs: f64,
}

pub(super) fn run(config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    let networks: usize = config.param("networks", 50)?;
    let size: usize = config.param("size", 10)?;
    let density: f64 = config.param("density", 0.3)?;
    let cmin: f64 = config.param("cmin", 0.5)?;
    let cmax: f64 = config.param("cmax", 2.0)?;
    let subsets: usize = config.param("subsets", 5)?;
    if size < 2 {
        return Err(config_err("size must be at least 2"));
    }
    if !(cmin > 0.0 && cmax >= cmin && cmax.is_finite()) {
        return Err(config_err("need 0 < cmin <= cmax"));
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(config_err("density must lie in [0, 1]"));
    }

    let results = map_indexed(config.execution, networks, |i| -> Result<Vec<Row>, ExperimentError> {
        let mut rng = RngSeed::new(config.seed, i as u64).rng();
        let net = random_connected_network(&mut rng, size, density, cmin, cmax);
        let (a, z) = (VertexId(0), VertexId::from_index(size - 1));
        let v = solve_voltage(&net, &[a], z)?;
        let c = effective_conductance(&net, &[a], z)?;
        let mut rows = Vec::new();
        for &t in &config.t_grid {
            let at = superlevel_set(&v, t)?;
            rows.push(Row {
                network: i,
                form: "level",
                level: t,
                set_size: at.len(),
                lhs: effective_conductance(&net, &at, z)?,
                rhs: c / t,
            });
        }
        // A = {a} first, where the bound holds with equality
        for s in 0..=subsets {
            let mut set = vec![a];
            if s > 0 {
                set.extend((1..size - 1).map(VertexId::from_index).filter(|_| rng.random_bool(0.5)));
            }
            let min_v = set.iter().map(|&x| v[x]).fold(f64::INFINITY, f64::min);
            rows.push(Row {
                network: i,
                form: "subset",
                level: min_v,
                set_size: set.len(),
                lhs: effective_conductance(&net, &set, z)?,
                rhs: c / min_v,
            });
        }
        Ok(rows)
    });

    let mut report = ExperimentReport::new(config, &["network", "form", "level", "set_size", "lhs", "rhs", "slack"]);
    report.note(format!(
        "random networks: count={networks} size={size} density={density} conductance=[{cmin},{cmax}] subsets={subsets}; a=0, z=size-1"
    ));
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for rows in results {
        for r in rows? {
            let slack = r.rhs - r.lhs;
            worst = worst.min(slack);
            if slack < -SLACK_TOLERANCE {
                violations += 1;
            }
            report.push(vec![
                r.network.to_string(),
                r.form.into(),
                num(r.level),
                r.set_size.to_string(),
                num(r.lhs),
                num(r.rhs),
                num(slack),
            ]);
        }
    }
    report.note(format!("min slack {worst}; violations {violations}"));
    if violations > 0 {
        report.record(Outcome::Violation(format!("{violations} rows with slack below -{SLACK_TOLERANCE:e}")));
    }
    Ok(report)
}

use crate::exec::map_indexed;
use crate::harmonic::{effective_conductance, level_cut};
use crate::walk::expected_crossings_analytic;

use super::identity::collapse_at_depth;
use super::{num, ExperimentConfig, ExperimentError, ExperimentReport, Outcome};

/// Allowed excess of the last `E[N]` conductance over 2.
pub const EN_SLACK: f64 = 0.05;
/// Allowed relative excess of the last original conductance over `1/(alpha t)`.
pub const ORIGINAL_SLACK: f64 = 0.05;
/// Relative tolerance of the monotonicity check.
const MONOTONE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy)]
struct Cell {
    depth: u32,
    alpha: f64,
    below: usize,
    boundary: usize,
    c_en: f64,
    c_orig: f64,
    t: f64,
}

fn depth_cells(config: &ExperimentConfig, depth: u32) -> Result<Vec<Cell>, ExperimentError> {
    let family = config.build_family()?;
    let ball = collapse_at_depth(&family, depth)?;
    let net = &ball.network;
    let ec = expected_crossings_analytic(net, net.root(), ball.sink)?;
    let mut cells = Vec::with_capacity(config.t_grid.len());
    for &t in &config.t_grid {
        let cut = level_cut(net, &ec.voltage, t)?;
        let gt = &cut.subnetwork;
        let gt_en = gt.reweighted(|_, e| ec.via_voltage[net.edge_index(e.a, e.b).expect("G_t is a subnetwork")])?;
        cells.push(Cell {
            depth,
            alpha: ec.alpha,
            below: cut.below.len(),
            boundary: cut.boundary.len(),
            c_en: effective_conductance(&gt_en, &cut.boundary, ball.sink)?,
            c_orig: effective_conductance(gt, &cut.boundary, ball.sink)?,
            t,
        });
    }
    Ok(cells)
}

pub(super) fn run(config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    let per_depth = map_indexed(config.execution, config.depths.len(), |i| depth_cells(config, config.depths[i]));
    let per_depth: Vec<Vec<Cell>> = per_depth.into_iter().collect::<Result<_, _>>()?;

    let mut report = ExperimentReport::new(
        config,
        &[
            "row",
            "t",
            "depth",
            "alpha",
            "below_size",
            "boundary_size",
            "c_expected_crossings",
            "c_original",
            "inv_alpha_t",
            "nonincreasing",
            "en_tail_ok",
            "orig_tail_ok",
        ],
    );
    report.note(format!(
        "checks: c_expected_crossings nonincreasing in depth (rel tol {MONOTONE_TOLERANCE:e}); last value <= 2 + {EN_SLACK}; last c_original <= (1 + {ORIGINAL_SLACK}) / (alpha t)"
    ));
    for (j, &t) in config.t_grid.iter().enumerate() {
        let seq: Vec<Cell> = per_depth.iter().map(|cells| cells[j]).collect();
        for c in &seq {
            report.push(vec![
                "depth".into(),
                num(t),
                c.depth.to_string(),
                num(c.alpha),
                c.below.to_string(),
                c.boundary.to_string(),
                num(c.c_en),
                num(c.c_orig),
                num(1.0 / (c.alpha * c.t)),
                "".into(),
                "".into(),
                "".into(),
            ]);
        }
        let monotone = seq.windows(2).all(|w| w[1].c_en <= w[0].c_en * (1.0 + MONOTONE_TOLERANCE));
        let last = *seq.last().expect("depths are non-empty");
        let bound = 1.0 / (last.alpha * t);
        let en_ok = last.c_en <= 2.0 + EN_SLACK;
        let orig_ok = last.c_orig <= (1.0 + ORIGINAL_SLACK) * bound;
        report.push(vec![
            "summary".into(),
            num(t),
            last.depth.to_string(),
            num(last.alpha),
            last.below.to_string(),
            last.boundary.to_string(),
            num(last.c_en),
            num(last.c_orig),
            num(bound),
            monotone.to_string(),
            en_ok.to_string(),
            orig_ok.to_string(),
        ]);
        if !monotone {
            report.record(Outcome::Violation(format!("t={t}: E[N] conductance increases with depth")));
        }
        if !en_ok {
            report.record(Outcome::SoftFailure(format!(
                "t={t}: E[N] conductance {} at depth {} exceeds 2 + {EN_SLACK}",
                last.c_en, last.depth
            )));
        }
        if !orig_ok {
            report.record(Outcome::SoftFailure(format!(
                "t={t}: original conductance {} at depth {} exceeds (1 + {ORIGINAL_SLACK}) / (alpha t) = {}",
                last.c_orig,
                last.depth,
                (1.0 + ORIGINAL_SLACK) * bound
            )));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{run as run_experiment, ExperimentKind};

    #[test]
    fn shallow_binary_tree_trend() {
        let mut c = ExperimentConfig::new(ExperimentKind::LevelCutTrend);
        c.depths = (4..=9).collect();
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.rows.len(), 3 * 7);
        let summaries: Vec<usize> = (0..r.rows.len()).filter(|&i| r.cell(i, "row") == Some("summary")).collect();
        assert_eq!(summaries.len(), 3);
        for i in summaries {
            assert_eq!(r.cell(i, "nonincreasing"), Some("true"));
        }
    }
}

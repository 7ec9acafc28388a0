use std::collections::HashMap;
use std::path::PathBuf;

use rand::seq::index::sample;

use crate::exec::map_indexed;
use crate::harmonic::{effective_resistance, effective_resistances_from};
use crate::network::{save_network, Exhaustion, Family, Network, Site, VertexId};
use crate::walk::{
    crossing_counts, crossing_counts_prefix, resistance_profile_with, run_on_family, run_on_tree, trace_network,
    RngSeed, TraceMode, WalkPath,
};

use super::stats::{kendall_tau, quantile};
use super::{config_err, num, ExperimentConfig, ExperimentError, ExperimentReport, Outcome};

/// Largest ball built for the Rayleigh comparison.
pub const BALL_LIMIT: u128 = 2_000_000;
/// Relative tolerance for the resistance comparisons.
const COMPARE_TOLERANCE: f64 = 1e-9;
/// Traces with at most this many edges compare every vertex against the
/// ball; larger ones use a sample.
pub const RAYLEIGH_EXACT_EDGES: usize = 10_000;
/// Stream offset for the vertex sample, away from the walk streams.
const SAMPLE_STREAM: u64 = 1 << 32;

/// `1, 2, 4, ..` up to `n`, then `n` itself if it is not a power of two.
fn doubling(from: usize, n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut k = from.max(1);
    while k <= n {
        out.push(k);
        k *= 2;
    }
    if out.last() != Some(&n) && n >= from {
        out.push(n);
    }
    out
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of sites within `radius`, or an upper estimate.
fn ball_size(family: &Family, radius: u64) -> u128 {
    let r = radius as u128;
    match *family {
        // sum over the number k of nonzero coordinates
        Family::Lattice { dim } => {
            (0..=dim as u128).map(|k| (1u128 << k) * binomial(dim as u128, k) * binomial(r, k)).sum()
        }
        Family::Tree { branching } => {
            let b = branching as u128;
            let mut total: u128 = 0;
            let mut level: u128 = 1;
            for _ in 0..=radius {
                total = total.saturating_add(level);
                level = level.saturating_mul(b);
            }
            total
        }
        Family::Wedge { .. } => (2 * r + 1).pow(3),
        Family::BirthDeath(_) => r + 1,
    }
}

struct Checkpoint {
    n: usize,
    r_indicator: f64,
    r_counts: f64,
    exact: bool,
    vertices: usize,
    edges: usize,
}

struct WalkSummary {
    checkpoints: Vec<Checkpoint>,
    tau: Option<f64>,
    /// `(pairs compared, min R_trace / R_ball)`.
    rayleigh: Option<(usize, f64)>,
    exited: bool,
    indicator_ge_counts: bool,
}

struct Comparator {
    ball: Network,
    index: HashMap<Site, VertexId>,
}

struct WalkSettings {
    radius: u64,
    cap: usize,
    sample_size: usize,
    dump: Option<PathBuf>,
}

fn recurrence_walk(
    config: &ExperimentConfig,
    family: &Family,
    comparator: Option<&Comparator>,
    w: usize,
    settings: &WalkSettings,
) -> Result<WalkSummary, ExperimentError> {
    let mut rng = RngSeed::new(config.seed, w as u64).rng();
    let WalkSettings { radius, cap, sample_size, ref dump } = *settings;
    let fw = run_on_family(family, family.origin(), radius, cap, &mut rng);
    let (path, sites) = fw.indexed();
    let n = path.steps();
    let marks = doubling(1, n);
    let ind = resistance_profile_with(&path, &marks, TraceMode::Indicator)?;
    let cnt = resistance_profile_with(&path, &marks, TraceMode::Counts)?;

    let mut checkpoints = Vec::with_capacity(marks.len());
    let mut ordered = true;
    for (a, b) in ind.entries.iter().zip(&cnt.entries) {
        let mut r_ind = a.resistance;
        // evaluating the indicator trace at the counts maximiser makes the
        // comparison sound even when the maxima are heuristic
        if b.argmax != path.start() {
            let trace = trace_network(&crossing_counts_prefix(&path, b.n), path.start(), TraceMode::Indicator)?;
            r_ind = r_ind.max(effective_resistance(&trace, path.start(), b.argmax)?);
        }
        if r_ind < b.resistance * (1.0 - COMPARE_TOLERANCE) {
            ordered = false;
        }
        checkpoints.push(Checkpoint {
            n: a.n,
            r_indicator: r_ind,
            r_counts: b.resistance,
            exact: a.exact && b.exact,
            vertices: a.trace_vertices,
            edges: a.trace_edges,
        });
    }
    let xs: Vec<f64> = checkpoints.iter().map(|c| c.n as f64).collect();
    let ys: Vec<f64> = checkpoints.iter().map(|c| c.r_indicator).collect();
    let tau = kendall_tau(&xs, &ys);

    let counts = crossing_counts(&path);
    let rayleigh = match comparator {
        Some(cmp) if !counts.is_empty() => {
            let trace = trace_network(&counts, path.start(), TraceMode::Indicator)?;
            let live: Vec<VertexId> = trace.vertices().filter(|&x| x != path.start() && trace.degree(x) > 0).collect();
            let mut srng = RngSeed::new(config.seed, SAMPLE_STREAM + w as u64).rng();
            let mut targets: Vec<VertexId> = if trace.edge_count() <= RAYLEIGH_EXACT_EDGES {
                live.clone()
            } else {
                sample(&mut srng, live.len(), sample_size.min(live.len())).into_iter().map(|i| live[i]).collect()
            };
            let far = ind.entries.last().map(|e| e.argmax).unwrap_or(path.start());
            if far != path.start() && !targets.contains(&far) {
                targets.push(far);
            }
            targets.sort_unstable();
            let on_trace = effective_resistances_from(&trace, path.start(), &targets)?;
            let mapped: Vec<VertexId> = targets.iter().map(|x| cmp.index[&sites[x.index()]]).collect();
            let on_ball = effective_resistances_from(&cmp.ball, cmp.index[&sites[0]], &mapped)?;
            let ratio = on_trace.iter().zip(&on_ball).map(|(t, b)| t / b).fold(f64::INFINITY, f64::min);
            Some((targets.len(), ratio))
        }
        _ => None,
    };

    if let Some(dir) = dump {
        if !counts.is_empty() {
            let trace = trace_network(&counts, path.start(), TraceMode::Counts)?;
            save_network(&trace, dir.join(format!("walk{w}_trace.txt")))?;
        }
        std::fs::write(dir.join(format!("walk{w}_profile.csv")), ind.to_csv())?;
    }

    Ok(WalkSummary { checkpoints, tau, rayleigh, exited: fw.exited(), indicator_ge_counts: ordered })
}

pub(super) fn run_recurrence(config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    let family = config.build_family()?;
    let radius: u64 = config.param("radius", 30)?;
    let cap: usize = config.param("steps", 10_000_000)?;
    let sample_size: usize = config.param("sample", 64)?;
    if radius == 0 {
        return Err(config_err("radius must be at least 1"));
    }
    let dump: Option<PathBuf> = config.params.get("dump_dir").map(PathBuf::from);
    if let Some(d) = &dump {
        std::fs::create_dir_all(d)?;
    }

    let comparator = if ball_size(&family, radius) <= BALL_LIMIT {
        let (ball, sites) = Exhaustion::new(family, radius as u32).ball_network()?;
        let index = sites.iter().enumerate().map(|(i, s)| (*s, VertexId::from_index(i))).collect();
        Some(Comparator { ball, index })
    } else {
        None
    };

    let settings = WalkSettings { radius, cap, sample_size, dump };
    let walks = map_indexed(config.execution, config.trials, |w| {
        recurrence_walk(config, &family, comparator.as_ref(), w, &settings)
    });

    let mut report = ExperimentReport::new(
        config,
        &[
            "row",
            "walk",
            "n",
            "r_indicator",
            "r_counts",
            "exact",
            "trace_vertices",
            "trace_edges",
            "kendall_tau",
            "rayleigh_pairs",
            "rayleigh_min_ratio",
            "exited",
            "indicator_ge_counts",
        ],
    );
    report.note(format!(
        "window radius={radius} step cap={cap} rayleigh: every trace vertex up to {RAYLEIGH_EXACT_EDGES} trace edges, else a sample of {sample_size}"
    ));
    match &comparator {
        Some(c) => report.note(format!("rayleigh comparator: induced ball, {} vertices", c.ball.vertex_count())),
        None => report.note("rayleigh comparator: skipped, ball too large"),
    }
    for (w, summary) in walks.into_iter().enumerate() {
        let s = summary?;
        for c in &s.checkpoints {
            report.push(vec![
                "checkpoint".into(),
                w.to_string(),
                c.n.to_string(),
                num(c.r_indicator),
                num(c.r_counts),
                c.exact.to_string(),
                c.vertices.to_string(),
                c.edges.to_string(),
                "".into(),
                "".into(),
                "".into(),
                "".into(),
                "".into(),
            ]);
        }
        let last = s.checkpoints.last();
        let (pairs, ratio) = match s.rayleigh {
            Some((p, r)) => (p.to_string(), num(r)),
            None => ("".into(), "".into()),
        };
        report.push(vec![
            "summary".into(),
            w.to_string(),
            last.map(|c| c.n.to_string()).unwrap_or_default(),
            last.map(|c| num(c.r_indicator)).unwrap_or_default(),
            last.map(|c| num(c.r_counts)).unwrap_or_default(),
            s.checkpoints.iter().all(|c| c.exact).to_string(),
            last.map(|c| c.vertices.to_string()).unwrap_or_default(),
            last.map(|c| c.edges.to_string()).unwrap_or_default(),
            s.tau.map(num).unwrap_or_default(),
            pairs,
            ratio,
            s.exited.to_string(),
            s.indicator_ge_counts.to_string(),
        ]);
        if !s.indicator_ge_counts {
            report.record(Outcome::Violation(format!("walk {w}: indicator trace resistance below counts trace")));
        }
        if let Some((_, r)) = s.rayleigh {
            if r < 1.0 - COMPARE_TOLERANCE {
                report.record(Outcome::Violation(format!(
                    "walk {w}: trace resistance below ball resistance (ratio {r})"
                )));
            }
        }
        if !s.tau.is_some_and(|t| t > 0.0) {
            report.record(Outcome::SoftFailure(format!("walk {w}: no upward trend in R(n)")));
        }
    }
    Ok(report)
}

fn growth_walk(config: &ExperimentConfig, family: &Family, w: usize, steps: usize) -> WalkPath {
    let mut rng = RngSeed::new(config.seed, w as u64).rng();
    match *family {
        Family::Tree { branching } => run_on_tree(branching, steps, &mut rng).0,
        _ => run_on_family(family, family.origin(), u64::MAX, steps, &mut rng).indexed().0,
    }
}

pub(super) fn run_growth(config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    let family = config.build_family()?;
    let steps: usize = config.param("steps", 1 << 16)?;
    let min_exp: u32 = config.param("min_exp", 6)?;
    if min_exp >= usize::BITS || (1usize << min_exp) > steps {
        return Err(config_err("need 2^min_exp <= steps"));
    }
    let marks = doubling(1 << min_exp, steps);
    let profiles = map_indexed(config.execution, config.trials, |w| {
        let path = growth_walk(config, &family, w, steps);
        resistance_profile_with(&path, &marks, TraceMode::Indicator)
    });

    let mut report = ExperimentReport::new(config, &["row", "walk", "n", "r", "r_over_log2n", "r_over_logn", "exact"]);
    report.note("EXPLORATORY: no threshold is asserted; log is the natural logarithm");
    let ratio = |r: f64, n: usize, p: i32| {
        let l = (n as f64).ln();
        if l > 0.0 {
            num(r / l.powi(p))
        } else {
            String::new()
        }
    };
    let mut table: Vec<Vec<f64>> = vec![Vec::new(); marks.len()];
    for (w, p) in profiles.into_iter().enumerate() {
        for (j, e) in p?.entries.iter().enumerate() {
            table[j].push(e.resistance);
            report.push(vec![
                "checkpoint".into(),
                w.to_string(),
                e.n.to_string(),
                num(e.resistance),
                ratio(e.resistance, e.n, 2),
                ratio(e.resistance, e.n, 1),
                e.exact.to_string(),
            ]);
        }
    }
    for q in [0.1, 0.5, 0.9] {
        for (j, &n) in marks.iter().enumerate() {
            let r = quantile(&table[j], q).unwrap_or(f64::NAN);
            report.push(vec![
                format!("q{q}"),
                "".into(),
                n.to_string(),
                num(r),
                ratio(r, n, 2),
                ratio(r, n, 1),
                "".into(),
            ]);
        }
    }
    Ok(report)
}

//! `R(n)`: the largest effective resistance between the start and another
//! vertex of the trace of the first `n` steps.

use std::fmt::Write as _;

use crate::harmonic::{solve_voltage, LaplacianSystem, SolverOptions};
use crate::network::{Network, VertexId};

use super::{crossing_counts_prefix, trace_network, TraceMode, WalkError, WalkPath};

/// Traces with at most this many vertices get the exact maximum.
pub const EXACT_VERTEX_LIMIT: usize = 2000;
/// Candidates checked exactly in heuristic mode.
pub const HEURISTIC_CANDIDATES: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaxResistance {
    pub resistance: f64,
    pub argmax: VertexId,
    /// False when only the heuristic candidate set was searched.
    pub exact: bool,
}

/// Maximum of `R(root, x)` over the vertices `x` of `net`.
///
/// Up to [`EXACT_VERTEX_LIMIT`] vertices every candidate is solved. Beyond
/// that, the hop-farthest vertex is used as a provisional sink, and the
/// [`HEURISTIC_CANDIDATES`] vertices of lowest voltage are solved exactly.
pub fn max_resistance_from_root(net: &Network) -> Result<MaxResistance, WalkError> {
    let root = net.root();
    let live: Vec<VertexId> = net.vertices().filter(|&x| x != root && net.degree(x) > 0).collect();
    let (candidates, exact) = if live.len() < EXACT_VERTEX_LIMIT {
        (live, true)
    } else {
        let hops = net.hop_distances(root);
        let far = *live.iter().max_by_key(|x| (hops[x.index()], std::cmp::Reverse(x.0))).unwrap();
        let v = solve_voltage(net, &[root], far)?;
        let mut order = live;
        order.sort_by(|a, b| v[*a].total_cmp(&v[*b]).then(a.cmp(b)));
        order.truncate(HEURISTIC_CANDIDATES);
        (order, false)
    };
    let sys = LaplacianSystem::new(net, &[root], SolverOptions::default())?;
    let mut best = MaxResistance { resistance: 0.0, argmax: root, exact };
    for x in candidates {
        let u = sys.solve(net, &[0.0], &[(x, 1.0)])?;
        let r = u[x.index()];
        if r > best.resistance {
            best.resistance = r;
            best.argmax = x;
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileEntry {
    pub n: usize,
    pub resistance: f64,
    pub exact: bool,
    pub argmax: VertexId,
    pub trace_vertices: usize,
    pub trace_edges: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResistanceProfile {
    pub entries: Vec<ProfileEntry>,
}

impl ResistanceProfile {
    /// CSV with columns `n,R,exact_mode`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,R,exact_mode\n");
        for e in &self.entries {
            let _ = writeln!(s, "{},{},{}", e.n, e.resistance, e.exact);
        }
        s
    }
}

/// `R(n)` on the unit-conductance trace at each checkpoint.
pub fn resistance_profile(path: &WalkPath, checkpoints: &[usize]) -> Result<ResistanceProfile, WalkError> {
    resistance_profile_with(path, checkpoints, TraceMode::Indicator)
}

/// As [`resistance_profile`], with a choice of trace weights.
pub fn resistance_profile_with(
    path: &WalkPath,
    checkpoints: &[usize],
    mode: TraceMode,
) -> Result<ResistanceProfile, WalkError> {
    let steps = path.steps();
    if let Some(w) = checkpoints.windows(2).find(|w| w[0] >= w[1]) {
        return Err(WalkError::BadCheckpoints { steps, detail: format!("{} then {}", w[0], w[1]) });
    }
    if let Some(&last) = checkpoints.last() {
        if last > steps {
            return Err(WalkError::BadCheckpoints { steps, detail: format!("{last} > {steps}") });
        }
    }
    let mut entries = Vec::with_capacity(checkpoints.len());
    for &n in checkpoints {
        let counts = crossing_counts_prefix(path, n);
        if counts.is_empty() {
            entries.push(ProfileEntry {
                n,
                resistance: 0.0,
                exact: true,
                argmax: path.start(),
                trace_vertices: 1,
                trace_edges: 0,
            });
            continue;
        }
        let trace = trace_network(&counts, path.start(), mode)?;
        let best = max_resistance_from_root(&trace)?;
        entries.push(ProfileEntry {
            n,
            resistance: best.resistance,
            exact: best.exact,
            argmax: best.argmax,
            trace_vertices: trace.vertices().filter(|&x| trace.degree(x) > 0).count(),
            trace_edges: trace.edge_count(),
        });
    }
    Ok(ResistanceProfile { entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(ids: &[u32]) -> WalkPath {
        WalkPath { vertices: ids.iter().map(|&i| VertexId(i)).collect(), absorbed: false }
    }

    #[test]
    fn ray_has_linear_profile() {
        let ray: Vec<u32> = (0..=50).collect();
        let p = resistance_profile(&path(&ray), &[1, 2, 10, 50]).unwrap();
        let r: Vec<f64> = p.entries.iter().map(|e| e.resistance).collect();
        for (got, want) in r.iter().zip([1.0, 2.0, 10.0, 50.0]) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
        assert!(p.entries.iter().all(|e| e.exact));
        assert_eq!(p.entries[3].argmax, VertexId(50));
    }

    #[test]
    fn back_and_forth_is_one_edge() {
        let p = resistance_profile(&path(&[0, 1, 0, 1]), &[3]).unwrap();
        assert!((p.entries[0].resistance - 1.0).abs() < 1e-12);
        let counts = resistance_profile_with(&path(&[0, 1, 0, 1]), &[3], TraceMode::Counts).unwrap();
        assert!((counts.entries[0].resistance - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_checkpoint_and_bad_checkpoints() {
        let p = resistance_profile(&path(&[0, 1, 2]), &[0, 2]).unwrap();
        assert_eq!(p.entries[0].resistance, 0.0);
        let csv = p.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[..2], ["n,R,exact_mode", "0,0,true"]);
        let last: Vec<&str> = lines[2].split(',').collect();
        assert_eq!((last[0], last[2]), ("2", "true"));
        assert!((last[1].parse::<f64>().unwrap() - 2.0).abs() < 1e-12);
        assert!(resistance_profile(&path(&[0, 1, 2]), &[2, 1]).is_err());
        assert!(resistance_profile(&path(&[0, 1, 2]), &[3]).is_err());
    }

    #[test]
    fn heuristic_mode_on_a_long_ray_finds_the_tip() {
        let n = EXACT_VERTEX_LIMIT as u32 + 500;
        let ray: Vec<u32> = (0..=n).collect();
        let p = resistance_profile(&path(&ray), &[n as usize]).unwrap();
        let e = p.entries[0];
        assert!(!e.exact);
        assert_eq!(e.argmax, VertexId(n));
        assert!((e.resistance - n as f64).abs() < 1e-6 * n as f64);
    }
}

//! Exact electrical computations on finite networks.
//!
//! Voltages are unique solutions of discrete Dirichlet problems: value 1 on a
//! source set `A`, 0 at a sink `z`, harmonic elsewhere. Everything else here
//! (effective conductance, Green functions, unit current flows, level cuts)
//! is read off one or two such solves.

mod solver;

pub use solver::{LaplacianSystem, SolverOptions};

use std::ops::Index;

use thiserror::Error;

use crate::network::{Network, NetworkError, VertexId};

#[derive(Debug, Error)]
pub enum HarmonicError {
    #[error("vertex {0} cannot reach the boundary; the system is singular")]
    SingularSystem(VertexId),
    #[error("solver stopped at relative residual {residual:e} after {iterations} iterations")]
    ToleranceNotReached { residual: f64, iterations: usize },
    #[error("sparse factorization failed: {0}")]
    Factorization(String),
    #[error("source set is empty")]
    EmptySources,
    #[error("sink {0} is also a source")]
    SinkInSources(VertexId),
    #[error("expected {expected} vertex values, got {found}")]
    MissingValue { expected: usize, found: usize },
    #[error("flow on ({0}, {1}), which is not an edge")]
    FlowOffEdge(VertexId, VertexId),
    #[error("cutset {0} does not separate the root from the sink")]
    NotACutset(usize),
    #[error("edge ({0}, {1}) appears in more than one cutset")]
    OverlappingCutsets(VertexId, VertexId),
    #[error("threshold {0} is outside (0, 1)")]
    TOutOfRange(f64),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Voltage with value 1 on the sources and 0 at the sink.
#[derive(Clone, Debug, PartialEq)]
pub struct VoltageField {
    values: Vec<f64>,
    sources: Vec<VertexId>,
    sink: VertexId,
}

impl VoltageField {
    /// Wraps externally computed values (one per vertex label).
    pub fn from_values(values: Vec<f64>, sources: Vec<VertexId>, sink: VertexId) -> VoltageField {
        VoltageField { values, sources, sink }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: VertexId) -> f64 {
        self.values[x.index()]
    }

    pub fn sources(&self) -> &[VertexId] {
        &self.sources
    }

    pub fn sink(&self) -> VertexId {
        self.sink
    }

    /// Largest `|Σ_y c(x,y)(v(x) - v(y))|` over vertices off the boundary.
    pub fn max_harmonic_defect(&self, net: &Network) -> f64 {
        let mut boundary = vec![false; net.vertex_count()];
        for &s in &self.sources {
            boundary[s.index()] = true;
        }
        boundary[self.sink.index()] = true;
        net.vertices()
            .filter(|x| !boundary[x.index()])
            .map(|x| net.neighbors(x).map(|(y, c)| c * (self.get(x) - self.get(y))).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }
}

impl Index<VertexId> for VoltageField {
    type Output = f64;

    fn index(&self, x: VertexId) -> &f64 {
        &self.values[x.index()]
    }
}

fn check_terminals(net: &Network, sources: &[VertexId], sink: VertexId) -> Result<(), HarmonicError> {
    if sources.is_empty() {
        return Err(HarmonicError::EmptySources);
    }
    net.check_vertex(sink)?;
    for &s in sources {
        net.check_vertex(s)?;
        if s == sink {
            return Err(HarmonicError::SinkInSources(sink));
        }
    }
    Ok(())
}

fn dedup(sources: &[VertexId]) -> Vec<VertexId> {
    let mut s = sources.to_vec();
    s.sort_unstable();
    s.dedup();
    s
}

pub fn solve_voltage(net: &Network, sources: &[VertexId], sink: VertexId) -> Result<VoltageField, HarmonicError> {
    solve_voltage_with(net, sources, sink, SolverOptions::default())
}

/// Solves the Dirichlet problem `v = 1` on `sources`, `v(sink) = 0`,
/// harmonic elsewhere. Holding every source at 1 is the same as identifying
/// the sources to one vertex: edges inside the source set carry no current.
pub fn solve_voltage_with(
    net: &Network,
    sources: &[VertexId],
    sink: VertexId,
    opts: SolverOptions,
) -> Result<VoltageField, HarmonicError> {
    check_terminals(net, sources, sink)?;
    let sources = dedup(sources);
    let mut fixed = sources.clone();
    fixed.push(sink);
    let mut vals = vec![1.0; sources.len()];
    vals.push(0.0);
    let sys = LaplacianSystem::new(net, &fixed, opts)?;
    let values = sys.solve(net, &vals, &[])?;
    Ok(VoltageField { values, sources, sink })
}

/// Current leaving the source set: `Σ_{x∈A, y∉A} c(x,y)[v(x) - v(y)]`.
pub fn current_out(net: &Network, v: &VoltageField) -> f64 {
    let mut in_a = vec![false; net.vertex_count()];
    for &s in v.sources() {
        in_a[s.index()] = true;
    }
    let mut total = 0.0;
    for &x in v.sources() {
        for (y, c) in net.neighbors(x) {
            if !in_a[y.index()] {
                total += c * (v[x] - v[y]);
            }
        }
    }
    total
}

/// Effective conductance between the set `sources` and `sink`.
pub fn effective_conductance(net: &Network, sources: &[VertexId], sink: VertexId) -> Result<f64, HarmonicError> {
    let v = solve_voltage(net, sources, sink)?;
    Ok(current_out(net, &v))
}

pub fn effective_resistance(net: &Network, a: VertexId, z: VertexId) -> Result<f64, HarmonicError> {
    Ok(1.0 / effective_conductance(net, &[a], z)?)
}

/// Resistances `R(o, x)` for every `x` in `targets`, from one factorization
/// of the Laplacian grounded at `o`.
pub fn effective_resistances_from(net: &Network, o: VertexId, targets: &[VertexId]) -> Result<Vec<f64>, HarmonicError> {
    net.check_vertex(o)?;
    let sys = LaplacianSystem::new(net, &[o], SolverOptions::default())?;
    targets
        .iter()
        .map(|&x| {
            net.check_vertex(x)?;
            if x == o {
                return Ok(0.0);
            }
            let u = sys.solve(net, &[0.0], &[(x, 1.0)])?;
            Ok(u[x.index()])
        })
        .collect()
}

/// Summary of the root-to-sink problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarmonicReport {
    pub effective_conductance: f64,
    pub effective_resistance: f64,
    /// Effective resistance from root to sink, which is also `G(o,o)/π(o)`.
    pub alpha: f64,
    /// Expected visits to the root before absorption, `alpha * π(o)`.
    pub green_root: f64,
}

pub fn harmonic_report(net: &Network, sink: VertexId) -> Result<HarmonicReport, HarmonicError> {
    let c = effective_conductance(net, &[net.root()], sink)?;
    let alpha = 1.0 / c;
    Ok(HarmonicReport {
        effective_conductance: c,
        effective_resistance: alpha,
        alpha,
        green_root: alpha * net.pi(net.root()),
    })
}

/// `G(o, ·)` for the walk from `o` killed on hitting `z`, via
/// `G(o, x) = π(x) v(x) G(o, o) / π(o)` with `G(o, o) = α π(o)`.
pub fn green_function(net: &Network, o: VertexId, z: VertexId) -> Result<Vec<f64>, HarmonicError> {
    let v = solve_voltage(net, &[o], z)?;
    let alpha = 1.0 / current_out(net, &v);
    Ok(net.vertices().map(|x| if x == z { 0.0 } else { alpha * net.pi(x) * v[x] }).collect())
}

/// `G(o, ·)` from a unit point source at `o` with `z` grounded: the potential
/// `g = L⁻¹ e_o` satisfies `G(o, x) = π(x) g(x)`. This is a different linear
/// system from the voltage solve and serves as a cross-check.
pub fn green_by_point_source(net: &Network, o: VertexId, z: VertexId) -> Result<Vec<f64>, HarmonicError> {
    check_terminals(net, &[o], z)?;
    let sys = LaplacianSystem::new(net, &[z], SolverOptions::default())?;
    let g = sys.solve(net, &[0.0], &[(o, 1.0)])?;
    Ok(net.vertices().map(|x| net.pi(x) * g[x.index()]).collect())
}

/// Expected number of steps before absorption at `z`, `Σ_x G(o, x)`.
pub fn expected_absorption_time(net: &Network, o: VertexId, z: VertexId) -> Result<f64, HarmonicError> {
    Ok(green_by_point_source(net, o, z)?.iter().sum())
}

fn check_len(net: &Network, f: &[f64]) -> Result<(), HarmonicError> {
    if f.len() != net.vertex_count() {
        return Err(HarmonicError::MissingValue { expected: net.vertex_count(), found: f.len() });
    }
    Ok(())
}

/// `(1/2) Σ_{x≠y} c(x,y)[F(x) - F(y)]²`, i.e. one term per edge.
pub fn dirichlet_energy(net: &Network, f: &[f64]) -> Result<f64, HarmonicError> {
    check_len(net, f)?;
    Ok(net
        .edges()
        .iter()
        .map(|e| {
            let d = f[e.a.index()] - f[e.b.index()];
            e.conductance * d * d
        })
        .sum())
}

/// Antisymmetric edge flow. One value per edge, stored in the edge's
/// canonical orientation `a → b`, so `θ(b, a) = -θ(a, b)` holds exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct CurrentFlow {
    values: Vec<f64>,
}

impl CurrentFlow {
    pub fn zero(net: &Network) -> CurrentFlow {
        CurrentFlow { values: vec![0.0; net.edge_count()] }
    }

    /// Builds a flow from directed values; each `(x, y, θ)` adds `θ` to
    /// `θ(x, y)` (and `-θ` to `θ(y, x)`).
    pub fn from_pairs<I>(net: &Network, pairs: I) -> Result<CurrentFlow, HarmonicError>
    where
        I: IntoIterator<Item = (VertexId, VertexId, f64)>,
    {
        let mut flow = CurrentFlow::zero(net);
        for (x, y, val) in pairs {
            let k = net.edge_index(x, y).ok_or(HarmonicError::FlowOffEdge(x, y))?;
            if net.edges()[k].a == x {
                flow.values[k] += val;
            } else {
                flow.values[k] -= val;
            }
        }
        Ok(flow)
    }

    /// Flow values in canonical edge order.
    pub fn edge_values(&self) -> &[f64] {
        &self.values
    }

    /// `θ(x, y)`; zero when `{x, y}` is not an edge.
    pub fn get(&self, net: &Network, x: VertexId, y: VertexId) -> f64 {
        match net.edge_index(x, y) {
            Some(k) if net.edges()[k].a == x => self.values[k],
            Some(k) => -self.values[k],
            None => 0.0,
        }
    }

    fn check(&self, net: &Network) -> Result<(), HarmonicError> {
        if self.values.len() != net.edge_count() {
            return Err(HarmonicError::MissingValue { expected: net.edge_count(), found: self.values.len() });
        }
        Ok(())
    }
}

/// Unit current from the sources of `v` to its sink:
/// `i(x, y) = c(x, y)[v(x) - v(y)] / C_eff`.
pub fn unit_current(net: &Network, v: &VoltageField) -> CurrentFlow {
    let strength = current_out(net, v);
    CurrentFlow { values: net.edges().iter().map(|e| e.conductance * (v[e.a] - v[e.b]) / strength).collect() }
}

/// `(1/2) Σ_{x≠y} θ(x,y)² / c(x,y)`.
pub fn flow_energy(net: &Network, flow: &CurrentFlow) -> Result<f64, HarmonicError> {
    flow.check(net)?;
    Ok(net.edges().iter().zip(&flow.values).map(|(e, t)| t * t / e.conductance).sum())
}

/// Net flow out of `x`, `Σ_y θ(x, y)`.
pub fn divergence(net: &Network, flow: &CurrentFlow, x: VertexId) -> Result<f64, HarmonicError> {
    flow.check(net)?;
    net.check_vertex(x)?;
    Ok(net.incident(x).map(|(_, _, k)| if net.edges()[k].a == x { flow.values[k] } else { -flow.values[k] }).sum())
}

/// `Σ_{x≠y} θ(x, y)[F(x) - F(y)]` over ordered pairs.
pub fn flow_pairing(net: &Network, flow: &CurrentFlow, f: &[f64]) -> Result<f64, HarmonicError> {
    flow.check(net)?;
    check_len(net, f)?;
    Ok(2.0 * net.edges().iter().zip(&flow.values).map(|(e, t)| t * (f[e.a.index()] - f[e.b.index()])).sum::<f64>())
}

/// Nash-Williams lower bound `Σ_k (Σ_{e∈Π_k} c(e))⁻¹` on the resistance
/// between the root and `sink`. Cutsets must be pairwise edge-disjoint and
/// each must separate the root from the sink.
pub fn nash_williams_bound(
    net: &Network,
    sink: VertexId,
    cutsets: &[Vec<(VertexId, VertexId)>],
) -> Result<f64, HarmonicError> {
    net.check_vertex(sink)?;
    let mut used = vec![false; net.edge_count()];
    let mut bound = 0.0;
    for (k, cut) in cutsets.iter().enumerate() {
        let mut idx = Vec::with_capacity(cut.len());
        for &(x, y) in cut {
            let e = net.edge_index(x, y).ok_or(HarmonicError::FlowOffEdge(x, y))?;
            if used[e] {
                return Err(HarmonicError::OverlappingCutsets(x, y));
            }
            used[e] = true;
            idx.push(e);
        }
        if !net.separates(&idx, net.root(), sink) {
            return Err(HarmonicError::NotACutset(k));
        }
        let total: f64 = idx.iter().map(|&e| net.edges()[e].conductance).sum();
        bound += 1.0 / total;
    }
    Ok(bound)
}

fn check_t(t: f64) -> Result<(), HarmonicError> {
    if t > 0.0 && t < 1.0 {
        Ok(())
    } else {
        Err(HarmonicError::TOutOfRange(t))
    }
}

/// Voltages within this distance of a level `t` are treated as lying on it,
/// so that solver round-off cannot create or remove a straddling edge.
pub const LEVEL_TOLERANCE: f64 = 1e-12;

/// `A_t = {x : v(x) >= t}`, up to [`LEVEL_TOLERANCE`].
pub fn superlevel_set(v: &VoltageField, t: f64) -> Result<Vec<VertexId>, HarmonicError> {
    check_t(t)?;
    Ok(v.values
        .iter()
        .enumerate()
        .filter(|(_, &x)| x >= t - LEVEL_TOLERANCE)
        .map(|(i, _)| VertexId::from_index(i))
        .collect())
}

/// The cut of a network along the level `t` of a voltage.
#[derive(Clone, Debug)]
pub struct LevelCut {
    pub t: f64,
    /// `V_t = {x : v(x) < t}` (non-isolated vertices only).
    pub below: Vec<VertexId>,
    /// `W_t`: vertices outside `V_t` with a neighbour in `V_t`.
    pub boundary: Vec<VertexId>,
    /// `G_t`, the subnetwork induced on `V_t ∪ W_t`, rooted at the sink.
    pub subnetwork: Network,
}

pub fn level_cut(net: &Network, v: &VoltageField, t: f64) -> Result<LevelCut, HarmonicError> {
    check_t(t)?;
    check_len(net, v.values())?;
    let below_mask: Vec<bool> = net.vertices().map(|x| net.degree(x) > 0 && v[x] < t - LEVEL_TOLERANCE).collect();
    let below: Vec<VertexId> = net.vertices().filter(|x| below_mask[x.index()]).collect();
    let boundary: Vec<VertexId> = net
        .vertices()
        .filter(|&x| !below_mask[x.index()] && net.neighbors(x).any(|(y, _)| below_mask[y.index()]))
        .collect();
    let mut keep = below_mask.clone();
    for &w in &boundary {
        keep[w.index()] = true;
    }
    let subnetwork = net.induced(v.sink(), |x| keep[x.index()])?;
    Ok(LevelCut { t, below, boundary, subnetwork })
}

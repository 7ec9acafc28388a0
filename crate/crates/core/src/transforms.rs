//! Network surgeries driven by a voltage: splitting edges at a voltage
//! level, raising straddling conductances, the Doob transform `c v(x) v(y)`,
//! and vertex deletion.
//!
//! An edge *straddles* level `t` when `v(x) > t > v(y)` strictly; edges with
//! an endpoint at `t` (within [`LEVEL_TOLERANCE`]) are left alone.

use thiserror::Error;

use crate::harmonic::{HarmonicError, VoltageField, LEVEL_TOLERANCE};
use crate::network::{Edge, Network, NetworkError, VertexId};

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("edge ({x}, {y}) with voltages {vx} and {vy} does not straddle {t}")]
    NotStraddling { x: VertexId, y: VertexId, vx: f64, vy: f64, t: f64 },
    #[error("({0}, {1}) is not an edge")]
    NoSuchEdge(VertexId, VertexId),
    #[error("threshold {0} is outside (0, 1)")]
    TOutOfRange(f64),
    #[error("threshold equals the lower voltage {0}; the reweighting factor is undefined")]
    DivisionByZeroVoltageGap(f64),
    #[error("every edge vanished under the transform")]
    AllEdgesVanished,
    #[error("the root {0} is in the deleted set")]
    RootDeleted(VertexId),
    #[error("the root {0} has no edges left")]
    RootIsolated(VertexId),
    #[error("edge sets differ off the excluded set at ({0}, {1})")]
    EdgeSetMismatch(VertexId, VertexId),
    #[error("voltage has {found} values for {expected} vertices")]
    VoltageLength { expected: usize, found: usize },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Harmonic(#[from] HarmonicError),
}

/// One edge split at a voltage level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubdivisionRecord {
    /// Endpoint with the higher voltage.
    pub x: VertexId,
    /// Endpoint with the lower voltage.
    pub y: VertexId,
    pub w: VertexId,
    pub r_xw: f64,
    pub r_wy: f64,
    pub t: f64,
}

fn check_t(t: f64) -> Result<(), TransformError> {
    if t > 0.0 && t < 1.0 {
        Ok(())
    } else {
        Err(TransformError::TOutOfRange(t))
    }
}

fn check_voltage(net: &Network, v: &VoltageField) -> Result<(), TransformError> {
    if v.values().len() != net.vertex_count() {
        return Err(TransformError::VoltageLength { expected: net.vertex_count(), found: v.values().len() });
    }
    Ok(())
}

/// Orients an edge high-to-low and checks the strict straddle.
fn oriented(v: &VoltageField, x: VertexId, y: VertexId, t: f64) -> Result<(VertexId, VertexId), TransformError> {
    let (hi, lo) = if v[x] >= v[y] { (x, y) } else { (y, x) };
    if v[hi] > t + LEVEL_TOLERANCE && t - LEVEL_TOLERANCE > v[lo] {
        Ok((hi, lo))
    } else {
        Err(TransformError::NotStraddling { x, y, vx: v[x], vy: v[y], t })
    }
}

fn split_resistances(r: f64, vx: f64, vy: f64, t: f64) -> (f64, f64) {
    let gap = vx - vy;
    ((vx - t) / gap * r, (t - vy) / gap * r)
}

/// Splits the straddling edge `{x, y}` with a new vertex `w` (the next free
/// label) so that the harmonic extension has `v(w) = t`:
/// `r(x,w) = (v(x) - t)/(v(x) - v(y)) r(x,y)` and
/// `r(w,y) = (t - v(y))/(v(x) - v(y)) r(x,y)`.
pub fn subdivide_edge(
    net: &Network,
    x: VertexId,
    y: VertexId,
    v: &VoltageField,
    t: f64,
) -> Result<(Network, SubdivisionRecord), TransformError> {
    check_voltage(net, v)?;
    let k = net.edge_index(x, y).ok_or(TransformError::NoSuchEdge(x, y))?;
    let (hi, lo) = oriented(v, x, y, t)?;
    let r = net.edges()[k].resistance();
    let (r_xw, r_wy) = split_resistances(r, v[hi], v[lo], t);
    let w = VertexId::from_index(net.vertex_count());
    let mut edges: Vec<Edge> = net.edges().iter().enumerate().filter(|(j, _)| *j != k).map(|(_, e)| *e).collect();
    edges.push(Edge { a: hi, b: w, conductance: 1.0 / r_xw });
    edges.push(Edge { a: lo, b: w, conductance: 1.0 / r_wy });
    let split = Network::root_component(edges, net.root(), net.vertex_count() + 1)?;
    Ok((split, SubdivisionRecord { x: hi, y: lo, w, r_xw, r_wy, t }))
}

/// Result of splitting every straddling edge at one level.
#[derive(Clone, Debug)]
pub struct LevelSubdivision {
    pub network: Network,
    /// Voltage extended to the new vertices (value `t` there).
    pub voltage: VoltageField,
    pub records: Vec<SubdivisionRecord>,
    /// New vertices plus original vertices at exactly `t` that border `{v < t}`.
    pub level_set: Vec<VertexId>,
    pub t: f64,
}

impl LevelSubdivision {
    /// `{x : v(x) >= t}` among the vertices that still carry edges.
    pub fn superlevel(&self) -> Vec<VertexId> {
        self.network
            .vertices()
            .filter(|&x| self.network.degree(x) > 0 && self.voltage[x] >= self.t - LEVEL_TOLERANCE)
            .collect()
    }
}

/// Splits every strictly straddling edge at level `t`.
pub fn subdivide_level(net: &Network, v: &VoltageField, t: f64) -> Result<LevelSubdivision, TransformError> {
    check_t(t)?;
    check_voltage(net, v)?;
    let n = net.vertex_count();
    let mut edges = Vec::with_capacity(net.edge_count());
    let mut records = Vec::new();
    let mut values = v.values().to_vec();
    for e in net.edges() {
        match oriented(v, e.a, e.b, t) {
            Ok((hi, lo)) => {
                let (r_xw, r_wy) = split_resistances(e.resistance(), v[hi], v[lo], t);
                let w = VertexId::from_index(n + records.len());
                edges.push(Edge { a: hi, b: w, conductance: 1.0 / r_xw });
                edges.push(Edge { a: lo, b: w, conductance: 1.0 / r_wy });
                values.push(t);
                records.push(SubdivisionRecord { x: hi, y: lo, w, r_xw, r_wy, t });
            }
            Err(_) => edges.push(*e),
        }
    }
    let network = Network::root_component(edges, net.root(), n + records.len())?;
    let mut level_set: Vec<VertexId> = records.iter().map(|r| r.w).collect();
    level_set.extend(
        net.vertices().filter(|&x| {
            (v[x] - t).abs() <= LEVEL_TOLERANCE && net.neighbors(x).any(|(y, _)| v[y] < t - LEVEL_TOLERANCE)
        }),
    );
    level_set.sort_unstable();
    let voltage = VoltageField::from_values(values, v.sources().to_vec(), v.sink());
    Ok(LevelSubdivision { network, voltage, records, level_set, t })
}

/// New conductance for an edge with `v(x) >= t > v(y)`:
/// `c (v(x) - v(y)) / (t - v(y))`, which is at least `c`.
pub fn reweight_edge(c: f64, vx: f64, vy: f64, t: f64) -> Result<f64, TransformError> {
    if t == vy {
        return Err(TransformError::DivisionByZeroVoltageGap(vy));
    }
    if !(vx >= t && t > vy) {
        return Err(TransformError::NotStraddling { x: VertexId(0), y: VertexId(0), vx, vy, t });
    }
    Ok(c * (vx - vy) / (t - vy))
}

/// Raises the conductance of every strictly straddling edge with
/// [`reweight_edge`]; other edges keep theirs.
pub fn raise_straddling_conductances(net: &Network, v: &VoltageField, t: f64) -> Result<Network, TransformError> {
    check_t(t)?;
    check_voltage(net, v)?;
    let mut err = None;
    let out = net.reweighted(|_, e| match oriented(v, e.a, e.b, t) {
        Ok((hi, lo)) => reweight_edge(e.conductance, v[hi], v[lo], t).unwrap_or_else(|x| {
            err.get_or_insert(x);
            e.conductance
        }),
        Err(_) => e.conductance,
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// `c'(x, y) = c(x, y) v(x) v(y)`. Edges where the product vanishes are
/// dropped, together with whatever they disconnect from the root.
///
/// The transform is applied at every vertex including the root, so the
/// walk it induces at the root is the plain `c'` walk.
pub fn doob_transform(net: &Network, v: &VoltageField) -> Result<Network, TransformError> {
    check_voltage(net, v)?;
    if net.edges().iter().all(|e| v[e.a] * v[e.b] <= 0.0) {
        return Err(TransformError::AllEdgesVanished);
    }
    net.reweighted(|_, e| e.conductance * v[e.a] * v[e.b]).map_err(|e| match e {
        NetworkError::RootIsolated(r) => TransformError::RootIsolated(VertexId(r)),
        other => other.into(),
    })
}

/// Subnetwork induced on the complement of `removed`, restricted to the
/// root's component.
pub fn delete_vertices(net: &Network, removed: &[VertexId]) -> Result<Network, TransformError> {
    let mut gone = vec![false; net.vertex_count()];
    for &x in removed {
        net.check_vertex(x)?;
        gone[x.index()] = true;
    }
    if gone[net.root().index()] {
        return Err(TransformError::RootDeleted(net.root()));
    }
    net.induced(net.root(), |x| !gone[x.index()]).map_err(|e| match e {
        NetworkError::RootIsolated(r) => TransformError::RootIsolated(VertexId(r)),
        other => other.into(),
    })
}

/// Smallest and largest `c_b / c_a` over edges with no endpoint in
/// `excluded`. The two networks must have the same such edges. With no
/// common edges the result is `(1, 1)`.
pub fn bounded_factor_check(a: &Network, b: &Network, excluded: &[VertexId]) -> Result<(f64, f64), TransformError> {
    let n = a.vertex_count().max(b.vertex_count());
    let mut out = vec![false; n];
    for &x in excluded {
        if x.index() < n {
            out[x.index()] = true;
        }
    }
    let kept = |net: &Network| -> Vec<crate::network::Edge> {
        net.edges().iter().filter(|e| !out[e.a.index()] && !out[e.b.index()]).copied().collect()
    };
    let (ea, eb) = (kept(a), kept(b));
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..ea.len().max(eb.len()) {
        match (ea.get(k), eb.get(k)) {
            (Some(x), Some(y)) if x.a == y.a && x.b == y.b => {
                let r = y.conductance / x.conductance;
                lo = lo.min(r);
                hi = hi.max(r);
            }
            (Some(x), Some(y)) => {
                let (p, q) = if (x.a, x.b) < (y.a, y.b) { (x.a, x.b) } else { (y.a, y.b) };
                return Err(TransformError::EdgeSetMismatch(p, q));
            }
            (Some(e), None) | (None, Some(e)) => return Err(TransformError::EdgeSetMismatch(e.a, e.b)),
            (None, None) => unreachable!(),
        }
    }
    if ea.is_empty() {
        return Ok((1.0, 1.0));
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::{effective_conductance, solve_voltage, superlevel_set};

    fn v(i: u32) -> VertexId {
        VertexId(i)
    }

    fn path3() -> Network {
        Network::build_finite([(v(0), v(1), 1.0), (v(1), v(2), 1.0)], v(0)).unwrap()
    }

    fn field(values: &[f64], sink: u32) -> VoltageField {
        VoltageField::from_values(values.to_vec(), vec![v(0)], v(sink))
    }

    #[test]
    fn single_subdivision_splits_resistance() {
        let net = Network::build_finite([(v(0), v(1), 1.0)], v(0)).unwrap();
        let (split, rec) = subdivide_edge(&net, v(0), v(1), &field(&[0.8, 0.2], 1), 0.5).unwrap();
        assert!((rec.r_xw - 0.5).abs() < 1e-12 && (rec.r_wy - 0.5).abs() < 1e-12);
        assert_eq!(rec.w, v(2));
        assert_eq!(split.edge_count(), 2);
        // reversed orientation is accepted
        let (_, rec2) = subdivide_edge(&net, v(1), v(0), &field(&[0.8, 0.2], 1), 0.5).unwrap();
        assert_eq!(rec, rec2);
    }

    #[test]
    fn boundary_threshold_is_not_straddling() {
        let net = Network::build_finite([(v(0), v(1), 1.0)], v(0)).unwrap();
        let err = subdivide_edge(&net, v(0), v(1), &field(&[0.9, 0.1], 1), 0.1).unwrap_err();
        assert!(matches!(err, TransformError::NotStraddling { .. }));
    }

    #[test]
    fn path_level_subdivision_resolves_to_t() {
        let net = path3();
        let volt = solve_voltage(&net, &[v(0)], v(2)).unwrap();
        let sub = subdivide_level(&net, &volt, 0.25).unwrap();
        assert_eq!(sub.records.len(), 1);
        let w = sub.records[0].w;
        assert_eq!((sub.records[0].x, sub.records[0].y), (v(1), v(2)));
        let again = solve_voltage(&sub.network, &[v(0)], v(2)).unwrap();
        assert!((again[w] - 0.25).abs() < 1e-12);
        for x in net.vertices() {
            assert!((again[x] - volt[x]).abs() < 1e-12);
        }
        assert_eq!(sub.level_set, vec![w]);
    }

    #[test]
    fn level_at_existing_voltage_changes_nothing() {
        let net = path3();
        let volt = solve_voltage(&net, &[v(0)], v(2)).unwrap();
        let sub = subdivide_level(&net, &volt, 0.5).unwrap();
        assert!(sub.records.is_empty());
        assert_eq!(sub.network, net);
        assert_eq!(sub.level_set, vec![v(1)]);
    }

    #[test]
    fn superlevel_conductance_scales_by_one_over_t() {
        let net = Network::build_finite(
            [(v(0), v(1), 1.0), (v(1), v(2), 2.0), (v(0), v(3), 0.5), (v(3), v(2), 1.0), (v(1), v(3), 3.0)],
            v(0),
        )
        .unwrap();
        let volt = solve_voltage(&net, &[v(0)], v(2)).unwrap();
        let c = effective_conductance(&net, &[v(0)], v(2)).unwrap();
        for t in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let sub = subdivide_level(&net, &volt, t).unwrap();
            let a = sub.superlevel();
            let ca = effective_conductance(&sub.network, &a, v(2)).unwrap();
            assert!((ca * t - c).abs() < 1e-9 * c, "t={t}: {ca} vs {c}");
            assert!(superlevel_set(&volt, t).unwrap().iter().all(|x| a.contains(x)));
        }
    }

    #[test]
    fn reweight_example_and_identity() {
        assert!((reweight_edge(1.0, 0.8, 0.2, 0.5).unwrap() - 2.0).abs() < 1e-12);
        assert!(matches!(reweight_edge(1.0, 0.8, 0.2, 0.2), Err(TransformError::DivisionByZeroVoltageGap(_))));
        let net = path3();
        let volt = solve_voltage(&net, &[v(0)], v(2)).unwrap();
        assert_eq!(raise_straddling_conductances(&net, &volt, 0.5).unwrap(), net);
        let raised = raise_straddling_conductances(&net, &volt, 0.25).unwrap();
        assert!((raised.conductance(v(1), v(2)).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(raised.conductance(v(0), v(1)), Some(1.0));
    }

    #[test]
    fn doob_on_the_path() {
        let net = path3();
        let d = doob_transform(&net, &field(&[1.0, 0.5, 0.0], 2)).unwrap();
        assert_eq!(d.edge_count(), 1);
        assert!((d.conductance(v(0), v(1)).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(doob_transform(&net, &field(&[1.0, 1.0, 1.0], 2)).unwrap(), net);
        let dead = Network::build_finite([(v(0), v(1), 1.0)], v(0)).unwrap();
        assert!(matches!(doob_transform(&dead, &field(&[1.0, 0.0], 1)), Err(TransformError::AllEdgesVanished)));
    }

    #[test]
    fn doob_transition_ratios_on_a_star() {
        // centre 1 joined to 0, 2, 3
        let net = Network::build_finite([(v(0), v(1), 1.0), (v(1), v(2), 2.0), (v(1), v(3), 3.0)], v(0)).unwrap();
        let h = field(&[1.0, 0.5, 0.25, 0.0], 3);
        let d = doob_transform(&net, &h).unwrap();
        let x = v(1);
        let norm: f64 = [0, 2, 3].iter().map(|&y| net.transition(x, v(y)) * h[v(y)]).sum::<f64>();
        for y in [0, 2] {
            let want = net.transition(x, v(y)) * h[v(y)] / norm;
            assert!((d.transition(x, v(y)) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn deletion() {
        let net = path3();
        assert_eq!(delete_vertices(&net, &[]).unwrap(), net);
        let cut = delete_vertices(&net, &[v(2)]).unwrap();
        assert_eq!(cut.edge_count(), 1);
        assert!(matches!(delete_vertices(&net, &[v(0)]), Err(TransformError::RootDeleted(_))));
        assert!(matches!(delete_vertices(&net, &[v(1)]), Err(TransformError::RootIsolated(_))));
    }

    #[test]
    fn factor_check() {
        let net = path3();
        assert_eq!(bounded_factor_check(&net, &net, &[]).unwrap(), (1.0, 1.0));
        let h = field(&[1.0, 0.5, 0.0], 2);
        let d = doob_transform(&net, &h).unwrap();
        assert!(matches!(bounded_factor_check(&net, &d, &[]), Err(TransformError::EdgeSetMismatch(..))));
        let (lo, hi) = bounded_factor_check(&net, &d, &[v(2)]).unwrap();
        assert!(lo >= 0.25 && hi <= 1.0);
    }
}

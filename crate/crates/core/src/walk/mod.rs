//! Network random walks and the traces they leave.

mod crossings;
mod profile;

pub(crate) use crossings::relative_gap;
pub use crossings::{
    expected_crossings_analytic, monte_carlo_expected_crossings, CrossingStats, ExpectedCrossings, MonteCarloCrossings,
    DEFAULT_CAP, FORMULA_TOLERANCE,
};
pub use profile::{
    max_resistance_from_root, resistance_profile, resistance_profile_with, MaxResistance, ProfileEntry,
    ResistanceProfile, EXACT_VERTEX_LIMIT, HEURISTIC_CANDIDATES,
};

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::harmonic::HarmonicError;
use crate::network::{Edge, Family, Network, NetworkError, Site, VertexId};

#[derive(Debug, Error)]
pub enum WalkError {
    #[error("vertex {0} has no neighbours")]
    IsolatedVertex(VertexId),
    #[error("trace has no edges")]
    EmptyTrace,
    #[error("need at least 2 trials, got {0}")]
    TooFewTrials(usize),
    #[error("checkpoints must be increasing and at most {steps}: {detail}")]
    BadCheckpoints { steps: usize, detail: String },
    #[error("crossing formulas disagree on edge ({a}, {b}): {via_green} vs {via_voltage} (relative gap {gap:e})")]
    FormulaMismatch { a: VertexId, b: VertexId, via_green: f64, via_voltage: f64, gap: f64 },
    #[error(transparent)]
    Harmonic(#[from] HarmonicError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Seed plus stream index. The pair fully determines a generator; trials in
/// a batch use their own index as the stream so that results do not depend
/// on scheduling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(seed: u64, stream: u64) -> RngSeed {
        RngSeed { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Inverts the cumulative sum of `weights` at a uniform point.
fn pick<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (k, w) in weights.iter().enumerate() {
        acc += w;
        last = k;
        if u < acc {
            return k;
        }
    }
    last
}

/// One step from `x`: neighbour `y` with probability `c(x, y) / π(x)`.
pub fn step<R: Rng + ?Sized>(net: &Network, x: VertexId, rng: &mut R) -> Result<VertexId, WalkError> {
    if net.degree(x) == 0 {
        return Err(WalkError::IsolatedVertex(x));
    }
    let (ys, cs, _) = net.row(x);
    Ok(ys[pick(cs, rng)])
}

/// Edge-level step used by the Monte Carlo loops: returns the neighbour and
/// the index of the traversed edge.
#[inline]
pub(crate) fn step_edge<R: Rng + ?Sized>(net: &Network, x: VertexId, rng: &mut R) -> (VertexId, usize) {
    let (ys, cs, es) = net.row(x);
    let k = pick(cs, rng);
    (ys[k], es[k])
}

/// Visited vertices `X_0, X_1, ..`, with `X_0` the start.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkPath {
    pub vertices: Vec<VertexId>,
    /// True iff the walk stopped by hitting its absorbing vertex.
    pub absorbed: bool,
}

impl WalkPath {
    pub fn steps(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn start(&self) -> VertexId {
        self.vertices[0]
    }
}

/// Runs from `o` until hitting `z` or taking `cap` steps.
pub fn run_until_absorbed<R: Rng + ?Sized>(
    net: &Network,
    o: VertexId,
    z: VertexId,
    cap: usize,
    rng: &mut R,
) -> Result<WalkPath, WalkError> {
    let mut vertices = vec![o];
    let mut x = o;
    while x != z && vertices.len() <= cap {
        x = step(net, x, rng)?;
        vertices.push(x);
    }
    Ok(WalkPath { absorbed: x == z, vertices })
}

/// Walk simulated on a family's neighbour rule. Steps that leave the window
/// are not part of `sites`; the first outside site is kept in `exit`.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyWalk {
    pub sites: Vec<Site>,
    pub exit: Option<Site>,
}

impl FamilyWalk {
    pub fn exited(&self) -> bool {
        self.exit.is_some()
    }

    pub fn steps(&self) -> usize {
        self.sites.len() - 1
    }

    /// Relabels sites by order of first visit (start = `VertexId(0)`).
    pub fn indexed(&self) -> (WalkPath, Vec<Site>) {
        let mut label: HashMap<Site, VertexId> = HashMap::new();
        let mut table = Vec::new();
        let vertices = self
            .sites
            .iter()
            .map(|s| {
                *label.entry(*s).or_insert_with(|| {
                    table.push(*s);
                    VertexId::from_index(table.len() - 1)
                })
            })
            .collect();
        (WalkPath { vertices, absorbed: false }, table)
    }
}

/// Runs on the lazily generated family from `o` until the first step to a
/// site at distance greater than `exit_radius` from the origin, or until
/// `cap` steps.
pub fn run_on_family<R: Rng + ?Sized>(
    family: &Family,
    o: Site,
    exit_radius: u64,
    cap: usize,
    rng: &mut R,
) -> FamilyWalk {
    let mut sites = vec![o];
    let mut x = o;
    let mut exit = None;
    let mut weights = Vec::new();
    for _ in 0..cap {
        let nb = family.neighbors(&x);
        weights.clear();
        weights.extend(nb.iter().map(|(_, c)| *c));
        let k = pick(&weights, rng);
        let y = nb[k].0;
        if family.distance(&y) > exit_radius {
            exit = Some(y);
            break;
        }
        sites.push(y);
        x = y;
    }
    FamilyWalk { sites, exit }
}

/// Undirected traversal counts `N(x, y)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CrossingCounts {
    counts: BTreeMap<(VertexId, VertexId), u64>,
}

impl CrossingCounts {
    pub fn get(&self, x: VertexId, y: VertexId) -> u64 {
        self.counts.get(&(x.min(y), x.max(y))).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    /// `((min, max), N)` in ascending edge order.
    pub fn iter(&self) -> impl Iterator<Item = ((VertexId, VertexId), u64)> + '_ {
        self.counts.iter().map(|(&k, &n)| (k, n))
    }
}

pub fn crossing_counts(path: &WalkPath) -> CrossingCounts {
    crossing_counts_prefix(path, path.steps())
}

/// Counts over the first `steps` steps only.
pub fn crossing_counts_prefix(path: &WalkPath, steps: usize) -> CrossingCounts {
    let mut counts = BTreeMap::new();
    for w in path.vertices[..=steps.min(path.steps())].windows(2) {
        let key = (w[0].min(w[1]), w[0].max(w[1]));
        *counts.entry(key).or_insert(0) += 1;
    }
    CrossingCounts { counts }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceMode {
    /// Conductance `N(e)`.
    Counts,
    /// Conductance `1` on every crossed edge.
    Indicator,
}

/// The trace as a network rooted at `root`.
pub fn trace_network(counts: &CrossingCounts, root: VertexId, mode: TraceMode) -> Result<Network, WalkError> {
    if counts.is_empty() {
        return Err(WalkError::EmptyTrace);
    }
    let edges = counts.iter().map(|((a, b), n)| Edge {
        a,
        b,
        conductance: match mode {
            TraceMode::Counts => n as f64,
            TraceMode::Indicator => 1.0,
        },
    });
    let max = counts.iter().map(|((_, b), _)| b.index() + 1).max().unwrap_or(0);
    Ok(Network::root_component(edges, root, max)?)
}

/// Walk on the rooted tree with `branching` children per vertex and unit
/// conductances, for `steps` steps from the root. Vertices are labelled by
/// first visit, so arbitrarily deep excursions are representable. Also
/// returns the depth of every label.
pub fn run_on_tree<R: Rng + ?Sized>(branching: u32, steps: usize, rng: &mut R) -> (WalkPath, Vec<u32>) {
    assert!(branching >= 2, "branching must be at least 2");
    let b = branching as usize;
    let mut parent: Vec<Option<VertexId>> = vec![None];
    let mut depth = vec![0u32];
    let mut child: HashMap<(VertexId, usize), VertexId> = HashMap::new();
    let mut vertices = Vec::with_capacity(steps + 1);
    let mut x = VertexId(0);
    vertices.push(x);
    for _ in 0..steps {
        // the root has b neighbours, everyone else b + 1 with the parent last
        let k = rng.random_range(0..if x.0 == 0 { b } else { b + 1 });
        x = if k == b {
            parent[x.index()].unwrap()
        } else {
            *child.entry((x, k)).or_insert_with(|| {
                parent.push(Some(x));
                depth.push(depth[x.index()] + 1);
                VertexId::from_index(parent.len() - 1)
            })
        };
        vertices.push(x);
    }
    (WalkPath { vertices, absorbed: false }, depth)
}

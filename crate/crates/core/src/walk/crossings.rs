//! Expected edge crossings of the walk from `o` killed at `z`.
//!
//! Two analytic routes are computed independently:
//!
//! * from the Green function, `E[N(x,y)] = G(o,x) p(x,y) + G(o,y) p(y,x)`,
//!   with `G(o, ·)` taken from a point-source solve;
//! * from the voltage, `E[N(x,y)] = α c(x,y) [v(x) + v(y)]`.
//!
//! They agree by reversibility, so a disagreement means a solver problem.

use crate::exec::{map_indexed, Execution};
use crate::harmonic::{current_out, green_by_point_source, solve_voltage, VoltageField};
use crate::network::{Network, VertexId};

use super::{step_edge, RngSeed, WalkError};

/// Relative agreement required between the two analytic routes.
pub const FORMULA_TOLERANCE: f64 = 1e-9;

/// Default step cap for a single walk.
pub const DEFAULT_CAP: usize = 10_000_000;

#[derive(Clone, Debug)]
pub struct ExpectedCrossings {
    /// Green-function route, one value per edge in canonical order.
    pub via_green: Vec<f64>,
    /// Voltage route, same order.
    pub via_voltage: Vec<f64>,
    /// Effective resistance from `o` to `z`.
    pub alpha: f64,
    pub voltage: VoltageField,
    pub max_relative_gap: f64,
}

impl ExpectedCrossings {
    pub fn values(&self) -> &[f64] {
        &self.via_voltage
    }
}

pub(crate) fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Computes `E[N]` on every edge both ways and fails with
/// [`WalkError::FormulaMismatch`] if they differ by more than
/// [`FORMULA_TOLERANCE`] relative on any edge.
pub fn expected_crossings_analytic(net: &Network, o: VertexId, z: VertexId) -> Result<ExpectedCrossings, WalkError> {
    let voltage = solve_voltage(net, &[o], z)?;
    let alpha = 1.0 / current_out(net, &voltage);
    let green = green_by_point_source(net, o, z)?;
    let pi: Vec<f64> = net.vertices().map(|x| net.pi(x)).collect();

    let mut via_green = Vec::with_capacity(net.edge_count());
    let mut via_voltage = Vec::with_capacity(net.edge_count());
    let mut max_gap: f64 = 0.0;
    for e in net.edges() {
        let (a, b, c) = (e.a, e.b, e.conductance);
        let g = |x: VertexId| if x == z { 0.0 } else { green[x.index()] };
        let from_green = g(a) * c / pi[a.index()] + g(b) * c / pi[b.index()];
        let from_voltage = alpha * c * (voltage[a] + voltage[b]);
        let gap = relative_gap(from_green, from_voltage);
        if gap > FORMULA_TOLERANCE {
            return Err(WalkError::FormulaMismatch { a, b, via_green: from_green, via_voltage: from_voltage, gap });
        }
        max_gap = max_gap.max(gap);
        via_green.push(from_green);
        via_voltage.push(from_voltage);
    }
    Ok(ExpectedCrossings { via_green, via_voltage, alpha, voltage, max_relative_gap: max_gap })
}

/// Sample statistics of one edge over all trials.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossingStats {
    /// Mean of `N(e)`.
    pub mean: f64,
    pub std_error: f64,
    /// Mean of the signed count (crossings `a → b` minus `b → a`).
    pub signed_mean: f64,
    pub signed_std_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonteCarloCrossings {
    /// One entry per edge in canonical order.
    pub edges: Vec<CrossingStats>,
    pub trials: usize,
    /// Walks that hit the step cap before `z`.
    pub unabsorbed: usize,
    pub mean_steps: f64,
}

/// Integer accumulators, so that merging is exact and order-free.
#[derive(Clone)]
struct Tally {
    sum: Vec<u64>,
    sumsq: Vec<u128>,
    signed: Vec<i64>,
    signed_sq: Vec<u128>,
    unabsorbed: usize,
    steps: u128,
}

impl Tally {
    fn new(m: usize) -> Tally {
        Tally { sum: vec![0; m], sumsq: vec![0; m], signed: vec![0; m], signed_sq: vec![0; m], unabsorbed: 0, steps: 0 }
    }

    fn merge(&mut self, other: &Tally) {
        for k in 0..self.sum.len() {
            self.sum[k] += other.sum[k];
            self.sumsq[k] += other.sumsq[k];
            self.signed[k] += other.signed[k];
            self.signed_sq[k] += other.signed_sq[k];
        }
        self.unabsorbed += other.unabsorbed;
        self.steps += other.steps;
    }
}

const BATCH: usize = 512;
const BATCHES_IN_FLIGHT: usize = 64;

fn run_batch(net: &Network, o: VertexId, z: VertexId, cap: usize, seed: u64, trials: std::ops::Range<usize>) -> Tally {
    let m = net.edge_count();
    let mut tally = Tally::new(m);
    let mut count = vec![0u64; m];
    let mut signed = vec![0i64; m];
    let mut touched = Vec::new();
    for t in trials {
        let mut rng = RngSeed::new(seed, t as u64).rng();
        let mut x = o;
        let mut steps = 0usize;
        while x != z && steps < cap {
            let (y, e) = step_edge(net, x, &mut rng);
            if count[e] == 0 {
                touched.push(e);
            }
            count[e] += 1;
            signed[e] += if net.edges()[e].a == x { 1 } else { -1 };
            x = y;
            steps += 1;
        }
        if x != z {
            tally.unabsorbed += 1;
        }
        tally.steps += steps as u128;
        for &e in &touched {
            let n = count[e];
            let s = signed[e];
            tally.sum[e] += n;
            tally.sumsq[e] += (n as u128) * (n as u128);
            tally.signed[e] += s;
            tally.signed_sq[e] += (s.unsigned_abs() as u128).pow(2);
            count[e] = 0;
            signed[e] = 0;
        }
        touched.clear();
    }
    tally
}

fn mean_and_se(sum: i128, sumsq: u128, n: usize) -> (f64, f64) {
    let nn = n as i128;
    let mean = sum as f64 / n as f64;
    // (n Σx² - (Σx)²) / (n (n-1)), exact in integers up to the final division
    let centered = (nn * sumsq as i128 - sum * sum).max(0);
    let var = centered as f64 / (n as f64 * (n - 1) as f64);
    (mean, (var / n as f64).sqrt())
}

/// Per-edge sample mean and standard error of `N` over `trials` independent
/// walks from `o` absorbed at `z`. Trial `t` uses stream `t` of `seed`, so the
/// result is identical under any execution mode.
pub fn monte_carlo_expected_crossings(
    net: &Network,
    o: VertexId,
    z: VertexId,
    trials: usize,
    seed: u64,
    cap: usize,
    exec: Execution,
) -> Result<MonteCarloCrossings, WalkError> {
    if trials < 2 {
        return Err(WalkError::TooFewTrials(trials));
    }
    net.check_vertex(o)?;
    net.check_vertex(z)?;
    if net.degree(o) == 0 {
        return Err(WalkError::IsolatedVertex(o));
    }
    let batches = trials.div_ceil(BATCH);
    let mut total = Tally::new(net.edge_count());
    let mut next = 0;
    while next < batches {
        let group = BATCHES_IN_FLIGHT.min(batches - next);
        let tallies = map_indexed(exec, group, |g| {
            let b = next + g;
            run_batch(net, o, z, cap, seed, b * BATCH..((b + 1) * BATCH).min(trials))
        });
        for t in &tallies {
            total.merge(t);
        }
        next += group;
    }
    let edges = (0..net.edge_count())
        .map(|k| {
            let (mean, std_error) = mean_and_se(total.sum[k] as i128, total.sumsq[k], trials);
            let (signed_mean, signed_std_error) = mean_and_se(total.signed[k] as i128, total.signed_sq[k], trials);
            CrossingStats { mean, std_error, signed_mean, signed_std_error }
        })
        .collect();
    Ok(MonteCarloCrossings {
        edges,
        trials,
        unabsorbed: total.unabsorbed,
        mean_steps: total.steps as f64 / trials as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: u32) -> VertexId {
        VertexId(i)
    }

    fn path3() -> Network {
        Network::build_finite([(v(0), v(1), 1.0), (v(1), v(2), 1.0)], v(0)).unwrap()
    }

    #[test]
    fn path_expected_crossings() {
        let ec = expected_crossings_analytic(&path3(), v(0), v(2)).unwrap();
        assert!((ec.via_voltage[0] - 3.0).abs() < 1e-12);
        assert!((ec.via_voltage[1] - 1.0).abs() < 1e-12);
        assert!((ec.via_green[0] - 3.0).abs() < 1e-12);
        assert!((ec.alpha - 2.0).abs() < 1e-12);
        for (e, n) in path3().edges().iter().zip(ec.values()) {
            assert!(*n <= 2.0 * ec.alpha * e.conductance + 1e-12);
        }
    }

    #[test]
    fn two_trials_is_enough_to_run() {
        let mc =
            monte_carlo_expected_crossings(&path3(), v(0), v(2), 2, 5, DEFAULT_CAP, Execution::Sequential).unwrap();
        assert_eq!(mc.trials, 2);
        assert!(mc.edges[0].mean >= 1.0);
        assert!(matches!(
            monte_carlo_expected_crossings(&path3(), v(0), v(2), 1, 5, DEFAULT_CAP, Execution::Sequential),
            Err(WalkError::TooFewTrials(1))
        ));
    }

    #[test]
    fn identical_seed_identical_output() {
        let run = |exec| monte_carlo_expected_crossings(&path3(), v(0), v(2), 5000, 99, DEFAULT_CAP, exec).unwrap();
        let a = run(Execution::Sequential);
        let b = run(Execution::Sequential);
        let c = run(Execution::Parallel);
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn capped_walks_are_reported() {
        let mc = monte_carlo_expected_crossings(&path3(), v(0), v(2), 100, 1, 1, Execution::Sequential).unwrap();
        assert_eq!(mc.unabsorbed, 100);
        assert_eq!(mc.mean_steps, 1.0);
    }
}

//! Dense brute-force oracles and random-network strategies shared by the
//! integration tests. Nothing here calls the crate's solver.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use ohmtrace::{Network, VertexId};
use proptest::prelude::*;

pub fn v(i: u32) -> VertexId {
    VertexId(i)
}

pub fn path3() -> Network {
    Network::build_finite([(v(0), v(1), 1.0), (v(1), v(2), 1.0)], v(0)).unwrap()
}

/// Square a(0) - b(1) - z(2) - c(3) - a.
pub fn square() -> Network {
    Network::build_finite([(v(0), v(1), 1.0), (v(1), v(2), 1.0), (v(2), v(3), 1.0), (v(3), v(0), 1.0)], v(0)).unwrap()
}

pub fn laplacian(net: &Network) -> DMatrix<f64> {
    let n = net.vertex_count();
    let mut l = DMatrix::zeros(n, n);
    for e in net.edges() {
        let (a, b, c) = (e.a.index(), e.b.index(), e.conductance);
        l[(a, a)] += c;
        l[(b, b)] += c;
        l[(a, b)] -= c;
        l[(b, a)] -= c;
    }
    l
}

/// Voltage equal to 1 on `sources` and 0 at `z`, harmonic elsewhere, from
/// a dense LU solve of the reduced Laplacian.
pub fn oracle_voltage(net: &Network, sources: &[VertexId], z: VertexId) -> Vec<f64> {
    let n = net.vertex_count();
    let l = laplacian(net);
    let fixed = |i: usize| i == z.index() || sources.iter().any(|s| s.index() == i);
    let free: Vec<usize> = (0..n).filter(|&i| !fixed(i) && net.degree(VertexId::from_index(i)) > 0).collect();
    let mut values = vec![0.0; n];
    for s in sources {
        values[s.index()] = 1.0;
    }
    if free.is_empty() {
        return values;
    }
    let m = free.len();
    let a = DMatrix::from_fn(m, m, |i, j| l[(free[i], free[j])]);
    let rhs = DVector::from_fn(m, |i, _| -sources.iter().map(|s| l[(free[i], s.index())]).sum::<f64>());
    let x = a.lu().solve(&rhs).expect("reduced Laplacian is nonsingular");
    for (k, &i) in free.iter().enumerate() {
        values[i] = x[k];
    }
    values
}

/// Effective conductance as the current leaving the sources.
pub fn oracle_conductance(net: &Network, sources: &[VertexId], z: VertexId) -> f64 {
    let volt = oracle_voltage(net, sources, z);
    let mut current = 0.0;
    for e in net.edges() {
        let (a, b) = (e.a.index(), e.b.index());
        let (sa, sb) = (sources.contains(&e.a), sources.contains(&e.b));
        if sa && !sb {
            current += e.conductance * (volt[a] - volt[b]);
        } else if sb && !sa {
            current += e.conductance * (volt[b] - volt[a]);
        }
    }
    current
}

/// `R(a, z) = (e_a - e_z)^T L^+ (e_a - e_z)` with the Moore-Penrose
/// pseudo-inverse, restricted to the root component.
pub fn oracle_resistance_pinv(net: &Network, a: VertexId, z: VertexId) -> f64 {
    let live: Vec<usize> = (0..net.vertex_count()).filter(|&i| net.degree(VertexId::from_index(i)) > 0).collect();
    let full = laplacian(net);
    let m = live.len();
    let l = DMatrix::from_fn(m, m, |i, j| full[(live[i], live[j])]);
    let pinv = l.pseudo_inverse(1e-12).unwrap();
    let ia = live.iter().position(|&i| i == a.index()).unwrap();
    let iz = live.iter().position(|&i| i == z.index()).unwrap();
    pinv[(ia, ia)] + pinv[(iz, iz)] - 2.0 * pinv[(ia, iz)]
}

/// Fundamental matrix `(I - Q)^{-1}` of the chain killed at `z`, indexed by
/// the live non-`z` vertices (returned alongside).
pub fn fundamental_matrix(net: &Network, z: VertexId) -> (DMatrix<f64>, Vec<usize>) {
    let states: Vec<usize> =
        (0..net.vertex_count()).filter(|&i| i != z.index() && net.degree(VertexId::from_index(i)) > 0).collect();
    let m = states.len();
    let mut q = DMatrix::zeros(m, m);
    for (i, &x) in states.iter().enumerate() {
        let x = VertexId::from_index(x);
        let pi: f64 = net.neighbors(x).map(|(_, c)| c).sum();
        for (y, c) in net.neighbors(x) {
            if let Some(j) = states.iter().position(|&s| s == y.index()) {
                q[(i, j)] = c / pi;
            }
        }
    }
    let fund = (DMatrix::identity(m, m) - q).try_inverse().expect("absorbing chain");
    (fund, states)
}

/// `G(o, x)` for every vertex label (0 at `z` and at isolated labels).
pub fn oracle_green(net: &Network, o: VertexId, z: VertexId) -> Vec<f64> {
    let (fund, states) = fundamental_matrix(net, z);
    let io = states.iter().position(|&s| s == o.index()).unwrap();
    let mut g = vec![0.0; net.vertex_count()];
    for (j, &x) in states.iter().enumerate() {
        g[x] = fund[(io, j)];
    }
    g
}

/// `E[N(x, y)]` per canonical edge from the absorbing-chain oracle.
pub fn oracle_expected_crossings(net: &Network, o: VertexId, z: VertexId) -> Vec<f64> {
    let g = oracle_green(net, o, z);
    let pi = |x: VertexId| net.neighbors(x).map(|(_, c)| c).sum::<f64>();
    net.edges()
        .iter()
        .map(|e| g[e.a.index()] * e.conductance / pi(e.a) + g[e.b.index()] * e.conductance / pi(e.b))
        .collect()
}

pub fn oracle_expected_steps(net: &Network, o: VertexId, z: VertexId) -> f64 {
    oracle_green(net, o, z).iter().sum()
}

/// Proptest settings for integration tests, which have no source file for
/// failure persistence to anchor to.
pub fn cases(n: u32) -> ProptestConfig {
    ProptestConfig { cases: n, failure_persistence: None, ..ProptestConfig::default() }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

/// Random connected network on 2..=max_n vertices rooted at 0, with
/// conductances in [0.1, 10].
pub fn arb_network(max_n: usize) -> impl Strategy<Value = Network> {
    (2usize..=max_n)
        .prop_flat_map(|n| {
            let pairs = n * (n - 1) / 2;
            (
                Just(n),
                prop::collection::vec(any::<prop::sample::Index>(), n - 1),
                prop::collection::vec(0.1f64..10.0, n - 1),
                prop::collection::vec(prop::option::weighted(0.3, 0.1f64..10.0), pairs),
            )
        })
        .prop_map(|(n, parents, tree_c, extra)| {
            let mut present = vec![vec![false; n]; n];
            let mut edges = Vec::new();
            for k in 1..n {
                let p = parents[k - 1].index(k);
                present[p][k] = true;
                edges.push((v(p as u32), v(k as u32), tree_c[k - 1]));
            }
            let mut idx = 0;
            for a in 0..n {
                for b in a + 1..n {
                    if let Some(c) = extra[idx] {
                        if !present[a][b] {
                            edges.push((v(a as u32), v(b as u32), c));
                        }
                    }
                    idx += 1;
                }
            }
            Network::build_finite(edges, v(0)).unwrap()
        })
}

/// A random network with the sink fixed at the last label.
pub fn sink_of(net: &Network) -> VertexId {
    VertexId::from_index(net.vertex_count() - 1)
}

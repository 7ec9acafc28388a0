//! Random connected test networks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::network::{Network, VertexId};

/// A connected network on `n >= 2` vertices rooted at 0: a uniform random
/// recursive tree plus each remaining pair independently with probability
/// `density`. Conductances are uniform on `[cmin, cmax]`.
pub fn random_connected_network<R: Rng + ?Sized>(rng: &mut R, n: usize, density: f64, cmin: f64, cmax: f64) -> Network {
    assert!(n >= 2, "need at least two vertices");
    assert!(cmin > 0.0 && cmax >= cmin, "bad conductance range");
    let mut order: Vec<u32> = (1..n as u32).collect();
    order.shuffle(rng);
    order.insert(0, 0);
    let conductance = |rng: &mut R| if cmax > cmin { rng.random_range(cmin..=cmax) } else { cmin };
    let mut present = vec![false; n * n];
    let mut edges = Vec::new();
    for k in 1..n {
        let x = order[k];
        let y = order[rng.random_range(0..k)];
        present[x as usize * n + y as usize] = true;
        present[y as usize * n + x as usize] = true;
        edges.push((VertexId(x), VertexId(y), conductance(rng)));
    }
    for x in 0..n {
        for y in x + 1..n {
            if !present[x * n + y] && rng.random_bool(density.clamp(0.0, 1.0)) {
                edges.push((VertexId(x as u32), VertexId(y as u32), conductance(rng)));
            }
        }
    }
    Network::build_finite(edges, VertexId(0)).expect("spanning tree keeps the network connected")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn connected_with_requested_size() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for n in 2..15 {
            let net = random_connected_network(&mut rng, n, 0.3, 0.5, 2.0);
            assert_eq!(net.vertex_count(), n);
            assert!(net.root_component_mask().iter().all(|&b| b));
            assert!(net.edges().iter().all(|e| (0.5..=2.0).contains(&e.conductance)));
        }
    }
}

use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};

use super::{Edge, Family, Network, NetworkError, Site, VertexId};

/// Graph-distance ball of radius `radius` around the family origin. Balls
/// increase with the radius and exhaust the family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exhaustion {
    pub family: Family,
    pub radius: u32,
}

/// A finite ball with everything outside it identified to one sink.
#[derive(Clone, Debug)]
pub struct CollapsedBall {
    pub network: Network,
    pub sink: VertexId,
    /// `sites[i]` is the family vertex labelled `VertexId(i)`; the sink has
    /// no site.
    pub sites: Vec<Site>,
}

impl CollapsedBall {
    pub fn interior_count(&self) -> usize {
        self.sites.len()
    }

    pub fn vertex_of(&self, site: &Site) -> Option<VertexId> {
        // Sites are in BFS order, not sorted; linear scan is fine for the
        // occasional lookup.
        self.sites.iter().position(|s| s == site).map(VertexId::from_index)
    }
}

struct Ball {
    sites: Vec<Site>,
    index: HashMap<Site, usize>,
}

impl Exhaustion {
    pub fn new(family: Family, radius: u32) -> Exhaustion {
        Exhaustion { family, radius }
    }

    /// Sites within the radius in BFS order (root first, neighbours in
    /// canonical order).
    fn ball(&self) -> Ball {
        let origin = self.family.origin();
        let mut sites = vec![origin];
        let mut index = HashMap::from([(origin, 0usize)]);
        let mut depth = vec![0u32];
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            if depth[i] == self.radius {
                continue;
            }
            for (n, _) in self.family.neighbors(&sites[i]) {
                if let Entry::Vacant(slot) = index.entry(n) {
                    slot.insert(sites.len());
                    sites.push(n);
                    depth.push(depth[i] + 1);
                    queue.push_back(sites.len() - 1);
                }
            }
        }
        Ball { sites, index }
    }

    /// The ball with the outside identified to a sink `z`: every edge from a
    /// ball vertex to a vertex outside becomes an edge to `z`, with parallel
    /// edges summed. Labels follow BFS order and `z` comes last.
    pub fn collapse_boundary(&self) -> Result<CollapsedBall, NetworkError> {
        if self.radius == 0 {
            return Err(NetworkError::EmptyInterior(0));
        }
        let ball = self.ball();
        let z = VertexId::from_index(ball.sites.len());
        let mut edges = Vec::new();
        for (i, s) in ball.sites.iter().enumerate() {
            let mut to_sink = 0.0;
            for (n, c) in self.family.neighbors(s) {
                match ball.index.get(&n) {
                    Some(&j) if i < j => {
                        edges.push(Edge { a: VertexId::from_index(i), b: VertexId::from_index(j), conductance: c })
                    }
                    Some(_) => {}
                    None => to_sink += c,
                }
            }
            if to_sink > 0.0 {
                edges.push(Edge { a: VertexId::from_index(i), b: z, conductance: to_sink });
            }
        }
        let network = Network::root_component(edges, VertexId(0), ball.sites.len() + 1)?;
        Ok(CollapsedBall { network, sink: z, sites: ball.sites })
    }

    /// The ball as an induced subnetwork (no sink), with its sites.
    pub fn ball_network(&self) -> Result<(Network, Vec<Site>), NetworkError> {
        if self.radius == 0 {
            return Err(NetworkError::EmptyInterior(0));
        }
        let ball = self.ball();
        let mut edges = Vec::new();
        for (i, s) in ball.sites.iter().enumerate() {
            for (n, c) in self.family.neighbors(s) {
                if let Some(&j) = ball.index.get(&n) {
                    if i < j {
                        edges.push(Edge { a: VertexId::from_index(i), b: VertexId::from_index(j), conductance: c });
                    }
                }
            }
        }
        let network = Network::root_component(edges, VertexId(0), ball.sites.len())?;
        Ok((network, ball.sites))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::BirthDeathRule;

    #[test]
    fn binary_tree_radius_one_is_a_star_into_the_sink() {
        let c = Exhaustion::new(Family::tree(2).unwrap(), 1).collapse_boundary().unwrap();
        let net = &c.network;
        assert_eq!(net.vertex_count(), 4);
        assert_eq!(c.sink, VertexId(3));
        assert_eq!(net.conductance(VertexId(0), VertexId(1)), Some(1.0));
        assert_eq!(net.conductance(VertexId(0), VertexId(2)), Some(1.0));
        assert_eq!(net.conductance(VertexId(1), c.sink), Some(2.0));
        assert_eq!(net.conductance(VertexId(2), c.sink), Some(2.0));
        assert_eq!(net.degree(c.sink), 2);
    }

    #[test]
    fn integer_line_radius_two() {
        let c = Exhaustion::new(Family::lattice(1).unwrap(), 2).collapse_boundary().unwrap();
        let net = &c.network;
        assert_eq!(net.vertex_count(), 6);
        assert_eq!(net.edge_count(), 6);
        let at = |x: i64| c.vertex_of(&Site([x, 0, 0, 0])).unwrap();
        for x in -2..2 {
            assert_eq!(net.conductance(at(x), at(x + 1)), Some(1.0));
        }
        assert_eq!(net.conductance(at(-2), c.sink), Some(1.0));
        assert_eq!(net.conductance(at(2), c.sink), Some(1.0));
        assert_eq!(net.degree(c.sink), 2);
    }

    #[test]
    fn geometric_chain_radius_three() {
        let f = Family::birth_death(BirthDeathRule::Geometric { ratio: 2.0 }).unwrap();
        let c = Exhaustion::new(f, 3).collapse_boundary().unwrap();
        let net = &c.network;
        for k in 0..3u32 {
            assert_eq!(net.conductance(VertexId(k), VertexId(k + 1)), Some(2f64.powi(k as i32)));
        }
        assert_eq!(net.conductance(VertexId(3), c.sink), Some(8.0));
        assert_eq!(net.edge_count(), 4);
    }

    #[test]
    fn radius_zero_has_no_interior() {
        let err = Exhaustion::new(Family::tree(2).unwrap(), 0).collapse_boundary().unwrap_err();
        assert!(matches!(err, NetworkError::EmptyInterior(0)));
    }
}

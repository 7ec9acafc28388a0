mod common;

use std::collections::{HashSet, VecDeque};

use common::{arb_network, cases};
use ohmtrace::network::{parse_network, write_network, BirthDeathRule, Exhaustion};
use ohmtrace::{Family, Site, VertexId};
use proptest::prelude::*;

fn families() -> Vec<Family> {
    vec![
        Family::lattice(1).unwrap(),
        Family::lattice(2).unwrap(),
        Family::lattice(3).unwrap(),
        Family::tree(2).unwrap(),
        Family::tree(3).unwrap(),
        Family::wedge(1.0 / 3.0).unwrap(),
        Family::birth_death(BirthDeathRule::Geometric { ratio: 2.0 }).unwrap(),
        Family::birth_death(BirthDeathRule::Power { exponent: 2.0 }).unwrap(),
    ]
}

/// First `count` sites of the family in BFS order.
fn first_sites(family: &Family, count: usize) -> Vec<Site> {
    let mut seen = HashSet::from([family.origin()]);
    let mut queue = VecDeque::from([family.origin()]);
    let mut out = Vec::new();
    while let Some(s) = queue.pop_front() {
        out.push(s);
        if out.len() == count {
            break;
        }
        for (n, _) in family.neighbors(&s) {
            if seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    out
}

#[test]
fn family_neighbour_relation_is_symmetric() {
    for family in families() {
        for s in first_sites(&family, 100) {
            for (n, c) in family.neighbors(&s) {
                assert!(c > 0.0, "{}: non-positive conductance", family.name());
                let back: Vec<f64> =
                    family.neighbors(&n).into_iter().filter(|(m, _)| *m == s).map(|(_, c)| c).collect();
                assert_eq!(back, vec![c], "{}: {s:?} -> {n:?}", family.name());
                assert!(family.distance(&n).abs_diff(family.distance(&s)) <= 1);
            }
        }
    }
}

#[test]
fn collapse_preserves_interior_weights() {
    for family in families() {
        let ball = Exhaustion::new(family, 4).collapse_boundary().unwrap();
        let net = &ball.network;
        for (i, s) in ball.sites.iter().enumerate() {
            let want: f64 = family.neighbors(s).iter().map(|(_, c)| c).sum();
            let got = net.pi(VertexId::from_index(i));
            assert!((got - want).abs() <= 1e-12 * want, "{}: pi at {s:?}", family.name());
            assert!(family.distance(s) <= 4);
        }
        // the sink receives exactly the conductance leaving the ball
        let leaving: f64 = ball
            .sites
            .iter()
            .flat_map(|s| family.neighbors(s))
            .filter(|(n, _)| family.distance(n) > 4)
            .map(|(_, c)| c)
            .sum();
        assert!((net.pi(ball.sink) - leaving).abs() <= 1e-12 * leaving);
    }
}

#[test]
fn balls_are_nested() {
    for family in families() {
        let small = Exhaustion::new(family, 3).collapse_boundary().unwrap();
        let large = Exhaustion::new(family, 5).collapse_boundary().unwrap();
        let large_sites: HashSet<Site> = large.sites.iter().copied().collect();
        assert!(small.sites.iter().all(|s| large_sites.contains(s)));
        assert!(small.sites.len() < large.sites.len());
    }
}

proptest! {
    #![proptest_config(cases(100))]

    #[test]
    fn handshake(net in arb_network(12)) {
        let pi_total: f64 = net.vertices().map(|x| net.pi(x)).sum();
        let c_total: f64 = net.edges().iter().map(|e| e.conductance).sum();
        prop_assert!((pi_total - 2.0 * c_total).abs() <= 1e-12 * pi_total);
        for x in net.vertices() {
            let row: f64 = net.neighbors(x).map(|(y, _)| net.transition(x, y)).sum();
            prop_assert!((row - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn edge_list_round_trip(net in arb_network(12)) {
        let text = write_network(&net);
        let back = parse_network(&text).unwrap();
        prop_assert_eq!(back, net);
    }
}

use std::fmt;

use super::NetworkError;

/// A vertex of an infinite family. Coordinates are family-specific:
/// lattice points use the first `dim` slots, tree vertices are
/// `[depth, index]`, wedge points `[x, y, z]`, and chain states `[k]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site(pub [i64; 4]);

impl Site {
    pub const ORIGIN: Site = Site([0; 4]);
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.0;
        write!(f, "({a},{b},{c},{d})")
    }
}

/// Conductance rule `c(k, k+1) = c_k` of a birth-and-death chain on ℕ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BirthDeathRule {
    /// `c_k = ratio^k`; transient iff `ratio > 1`.
    Geometric { ratio: f64 },
    /// `c_k = (k + 1)^exponent`; transient iff `exponent > 1`.
    Power { exponent: f64 },
}

impl BirthDeathRule {
    pub fn conductance(&self, k: i64) -> f64 {
        match *self {
            BirthDeathRule::Geometric { ratio } => ratio.powi(k as i32),
            BirthDeathRule::Power { exponent } => ((k + 1) as f64).powf(exponent),
        }
    }
}

/// Infinite, locally finite network given by a neighbour rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    /// ℤ^dim with unit conductances, `1 <= dim <= 4`.
    Lattice {
        dim: usize,
    },
    /// Rooted tree in which every vertex has `branching` children; unit
    /// conductances. The root has degree `branching`.
    Tree {
        branching: u32,
    },
    /// `{(x, y, z) ∈ ℤ³ : x >= 0, |z| <= ceil(x^exponent)}` with unit
    /// conductances.
    Wedge {
        exponent: f64,
    },
    BirthDeath(BirthDeathRule),
}

impl Family {
    pub fn lattice(dim: usize) -> Result<Family, NetworkError> {
        if (1..=4).contains(&dim) {
            Ok(Family::Lattice { dim })
        } else {
            Err(NetworkError::InvalidFamily(format!("lattice dimension {dim} not in 1..=4")))
        }
    }

    pub fn tree(branching: u32) -> Result<Family, NetworkError> {
        if branching >= 2 {
            Ok(Family::Tree { branching })
        } else {
            Err(NetworkError::InvalidFamily(format!("tree branching {branching} < 2")))
        }
    }

    /// Wedge with profile `ceil(x^exponent)`. The default transient choice is
    /// `exponent = 1/3`.
    pub fn wedge(exponent: f64) -> Result<Family, NetworkError> {
        if exponent.is_finite() && exponent > 0.0 {
            Ok(Family::Wedge { exponent })
        } else {
            Err(NetworkError::InvalidFamily(format!("wedge exponent {exponent} must be positive")))
        }
    }

    pub fn birth_death(rule: BirthDeathRule) -> Result<Family, NetworkError> {
        let ok = match rule {
            BirthDeathRule::Geometric { ratio } => ratio.is_finite() && ratio > 0.0,
            BirthDeathRule::Power { exponent } => exponent.is_finite(),
        };
        if ok {
            Ok(Family::BirthDeath(rule))
        } else {
            Err(NetworkError::InvalidFamily(format!("bad birth-death rule {rule:?}")))
        }
    }

    pub fn name(&self) -> String {
        match self {
            Family::Lattice { dim } => format!("lattice(d={dim})"),
            Family::Tree { branching } => format!("tree(b={branching})"),
            Family::Wedge { exponent } => format!("wedge(exponent={exponent})"),
            Family::BirthDeath(BirthDeathRule::Geometric { ratio }) => {
                format!("birth-death(geometric ratio={ratio})")
            }
            Family::BirthDeath(BirthDeathRule::Power { exponent }) => {
                format!("birth-death(power exponent={exponent})")
            }
        }
    }

    pub fn origin(&self) -> Site {
        Site::ORIGIN
    }

    pub fn contains(&self, s: &Site) -> bool {
        let c = s.0;
        match *self {
            Family::Lattice { dim } => c[dim..].iter().all(|&x| x == 0),
            Family::Tree { branching } => {
                c[2] == 0
                    && c[3] == 0
                    && c[0] >= 0
                    && c[1] >= 0
                    && (branching as i64).checked_pow(c[0] as u32).is_some_and(|width| c[1] < width)
            }
            Family::Wedge { exponent } => c[3] == 0 && c[0] >= 0 && c[2].abs() <= wedge_profile(exponent, c[0]),
            Family::BirthDeath(_) => c[0] >= 0 && c[1..].iter().all(|&x| x == 0),
        }
    }

    /// Neighbours of `s` with conductances, sorted by site.
    ///
    /// Panics if a tree index overflows `i64` (depth beyond ~62 / log2 b).
    pub fn neighbors(&self, s: &Site) -> Vec<(Site, f64)> {
        let c = s.0;
        let mut out = Vec::new();
        match *self {
            Family::Lattice { dim } => {
                for axis in 0..dim {
                    for delta in [-1, 1] {
                        let mut n = c;
                        n[axis] += delta;
                        out.push((Site(n), 1.0));
                    }
                }
            }
            Family::Tree { branching } => {
                let b = branching as i64;
                if c[0] > 0 {
                    out.push((Site([c[0] - 1, c[1] / b, 0, 0]), 1.0));
                }
                let first = c[1].checked_mul(b).expect("tree index overflow");
                for k in 0..b {
                    out.push((Site([c[0] + 1, first + k, 0, 0]), 1.0));
                }
            }
            Family::Wedge { .. } => {
                for axis in 0..3 {
                    for delta in [-1, 1] {
                        let mut n = c;
                        n[axis] += delta;
                        let n = Site(n);
                        if self.contains(&n) {
                            out.push((n, 1.0));
                        }
                    }
                }
            }
            Family::BirthDeath(rule) => {
                let k = c[0];
                if k > 0 {
                    out.push((Site([k - 1, 0, 0, 0]), rule.conductance(k - 1)));
                }
                out.push((Site([k + 1, 0, 0, 0]), rule.conductance(k)));
            }
        }
        out.sort_by_key(|a| a.0);
        out
    }

    /// Graph distance from the origin.
    pub fn distance(&self, s: &Site) -> u64 {
        let c = s.0;
        match *self {
            Family::Lattice { .. } => c.iter().map(|x| x.unsigned_abs()).sum(),
            Family::Tree { .. } | Family::BirthDeath(_) => c[0] as u64,
            Family::Wedge { exponent } => {
                // y moves freely; in the (x, z) half-plane the walk must reach
                // a column tall enough for |z| before stepping up to it.
                let h = c[2].abs();
                let reach = wedge_min_column(exponent, h);
                let xz = if c[0] >= reach { c[0] + h } else { reach + (reach - c[0]) + h };
                c[1].unsigned_abs() + xz as u64
            }
        }
    }
}

/// `ceil(x^exponent)`, computed so that exact powers are not pushed up by
/// rounding noise.
pub(crate) fn wedge_profile(exponent: f64, x: i64) -> i64 {
    if x <= 0 {
        return 0;
    }
    let y = (x as f64).powf(exponent);
    let mut h = y.ceil();
    if h >= 1.0 {
        let below = (h - 1.0).powf(1.0 / exponent);
        if below >= x as f64 * (1.0 - 1e-12) {
            h -= 1.0;
        }
    }
    h as i64
}

/// Smallest `x >= 0` with `wedge_profile(x) >= h`.
fn wedge_min_column(exponent: f64, h: i64) -> i64 {
    if h <= 0 {
        return 0;
    }
    let mut x = ((h - 1) as f64).powf(1.0 / exponent).floor().max(0.0) as i64;
    while x > 0 && wedge_profile(exponent, x - 1) >= h {
        x -= 1;
    }
    while wedge_profile(exponent, x) < h {
        x += 1;
    }
    x
}

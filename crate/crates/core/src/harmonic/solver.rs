//! Reduced-Laplacian linear systems.
//!
//! Fixing values on a boundary set leaves the Laplacian restricted to the
//! remaining vertices, which is symmetric positive definite as long as every
//! unknown can reach the boundary. Small and medium systems are factored once
//! (sparse Cholesky with fill-reducing ordering) and reused for any number of
//! right-hand sides; very large ones fall back to Jacobi-preconditioned CG.

use std::collections::VecDeque;
use std::sync::Once;

use faer::sparse::{SparseColMat, Triplet};
use faer::{prelude::Solve, Mat, Side};

use super::HarmonicError;
use crate::network::{Network, VertexId};

const NOT_UNKNOWN: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Systems with at most this many unknowns are factored directly.
    pub direct_limit: usize,
    /// Required relative residual `|b - Ax| / |b|`.
    pub tolerance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { direct_limit: 4_000_000, tolerance: 1e-10 }
    }
}

enum Backend {
    Direct(faer::sparse::linalg::solvers::Llt<usize, f64>),
    Iterative { inv_diag: Vec<f64>, max_iter: usize },
}

/// Laplacian of a network with a fixed boundary, ready to solve.
pub struct LaplacianSystem {
    unknown_of: Vec<u32>,
    unknowns: Vec<VertexId>,
    fixed: Vec<VertexId>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    backend: Backend,
    tolerance: f64,
}

fn sequential_faer() {
    static INIT: Once = Once::new();
    INIT.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

impl LaplacianSystem {
    /// Prepares the system whose unknowns are all non-isolated vertices
    /// outside `fixed`.
    pub fn new(net: &Network, fixed: &[VertexId], opts: SolverOptions) -> Result<LaplacianSystem, HarmonicError> {
        let n = net.vertex_count();
        let mut is_fixed = vec![false; n];
        for &f in fixed {
            net.check_vertex(f)?;
            is_fixed[f.index()] = true;
        }
        let mut unknown_of = vec![NOT_UNKNOWN; n];
        let mut unknowns = Vec::new();
        for x in net.vertices() {
            if !is_fixed[x.index()] && net.degree(x) > 0 {
                unknown_of[x.index()] = unknowns.len() as u32;
                unknowns.push(x);
            }
        }

        // Every unknown must be connected to the boundary, otherwise the
        // restricted Laplacian is singular.
        let mut reached = vec![false; n];
        let mut queue: VecDeque<VertexId> = fixed.iter().copied().collect();
        for &f in fixed {
            reached[f.index()] = true;
        }
        while let Some(x) = queue.pop_front() {
            for (y, _) in net.neighbors(x) {
                if !reached[y.index()] {
                    reached[y.index()] = true;
                    queue.push_back(y);
                }
            }
        }
        if let Some(&x) = unknowns.iter().find(|x| !reached[x.index()]) {
            return Err(HarmonicError::SingularSystem(x));
        }

        let m = unknowns.len();
        let mut row_ptr = Vec::with_capacity(m + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for &x in &unknowns {
            let i = unknown_of[x.index()];
            let mut diag = 0.0;
            let mut placed_diag = false;
            for (y, c) in net.neighbors(x) {
                diag += c;
                let j = unknown_of[y.index()];
                if j == NOT_UNKNOWN {
                    continue;
                }
                if j > i && !placed_diag {
                    cols.push(i);
                    vals.push(0.0);
                    placed_diag = true;
                }
                cols.push(j);
                vals.push(-c);
            }
            if !placed_diag {
                cols.push(i);
                vals.push(0.0);
            }
            let start = *row_ptr.last().unwrap();
            let k = start + cols[start..].iter().position(|&c| c == i).unwrap();
            vals[k] = diag;
            row_ptr.push(cols.len());
        }

        let backend = if m <= opts.direct_limit {
            sequential_faer();
            let mut triplets = Vec::with_capacity(cols.len() / 2 + m);
            for r in 0..m {
                for k in row_ptr[r]..row_ptr[r + 1] {
                    let c = cols[k] as usize;
                    if c <= r {
                        triplets.push(Triplet::new(r, c, vals[k]));
                    }
                }
            }
            let mat = SparseColMat::<usize, f64>::try_new_from_triplets(m, m, &triplets)
                .map_err(|e| HarmonicError::Factorization(format!("{e:?}")))?;
            let llt = mat.sp_cholesky(Side::Lower).map_err(|e| HarmonicError::Factorization(format!("{e:?}")))?;
            Backend::Direct(llt)
        } else {
            let inv_diag = (0..m)
                .map(|r| {
                    let k = (row_ptr[r]..row_ptr[r + 1]).find(|&k| cols[k] as usize == r).unwrap();
                    1.0 / vals[k]
                })
                .collect();
            Backend::Iterative { inv_diag, max_iter: 10 * n.max(1) }
        };

        Ok(LaplacianSystem {
            unknown_of,
            unknowns,
            fixed: fixed.to_vec(),
            row_ptr,
            cols,
            vals,
            backend,
            tolerance: opts.tolerance,
        })
    }

    pub fn unknown_count(&self) -> usize {
        self.unknowns.len()
    }

    pub fn is_direct(&self) -> bool {
        matches!(self.backend, Backend::Direct(_))
    }

    /// Solves `L u = injection` on the unknowns with `u = fixed_values` on the
    /// boundary (values aligned with the `fixed` slice given to `new`).
    /// Returns `u` on all vertices; isolated vertices get 0.
    pub fn solve(
        &self,
        net: &Network,
        fixed_values: &[f64],
        injection: &[(VertexId, f64)],
    ) -> Result<Vec<f64>, HarmonicError> {
        assert_eq!(fixed_values.len(), self.fixed.len());
        let mut u = vec![0.0; net.vertex_count()];
        for (&f, &val) in self.fixed.iter().zip(fixed_values) {
            u[f.index()] = val;
        }
        let m = self.unknowns.len();
        let mut rhs = vec![0.0; m];
        for (&f, &val) in self.fixed.iter().zip(fixed_values) {
            if val == 0.0 {
                continue;
            }
            for (y, c) in net.neighbors(f) {
                let j = self.unknown_of[y.index()];
                if j != NOT_UNKNOWN {
                    rhs[j as usize] += c * val;
                }
            }
        }
        for &(x, amount) in injection {
            let j = self.unknown_of[x.index()];
            if j != NOT_UNKNOWN {
                rhs[j as usize] += amount;
            }
        }
        let x = self.solve_reduced(&rhs)?;
        for (k, &v) in self.unknowns.iter().enumerate() {
            u[v.index()] = x[k];
        }
        Ok(u)
    }

    fn matvec(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.vals[k] * x[self.cols[k] as usize];
            }
            *o = s;
        }
    }

    fn residual(&self, b: &[f64], x: &[f64]) -> Vec<f64> {
        let mut ax = vec![0.0; b.len()];
        self.matvec(x, &mut ax);
        b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect()
    }

    fn solve_reduced(&self, b: &[f64]) -> Result<Vec<f64>, HarmonicError> {
        let m = b.len();
        let bnorm = norm(b);
        if m == 0 || bnorm == 0.0 {
            return Ok(vec![0.0; m]);
        }
        match &self.backend {
            Backend::Direct(llt) => {
                let apply = |rhs: &[f64]| -> Vec<f64> {
                    let sol = llt.solve(Mat::<f64>::from_fn(m, 1, |i, _| rhs[i]));
                    (0..m).map(|i| sol[(i, 0)]).collect()
                };
                let mut x = apply(b);
                let mut rel = f64::INFINITY;
                // A couple of refinement sweeps recover digits lost to
                // conditioning on long, thin networks.
                for _ in 0..4 {
                    let r = self.residual(b, &x);
                    rel = norm(&r) / bnorm;
                    if rel <= self.tolerance * 1e-2 {
                        break;
                    }
                    let dx = apply(&r);
                    for (xi, di) in x.iter_mut().zip(dx) {
                        *xi += di;
                    }
                }
                if rel > self.tolerance {
                    let r = self.residual(b, &x);
                    rel = norm(&r) / bnorm;
                }
                if rel > self.tolerance {
                    return Err(HarmonicError::ToleranceNotReached { residual: rel, iterations: 0 });
                }
                Ok(x)
            }
            Backend::Iterative { inv_diag, max_iter } => pcg(self, b, inv_diag, *max_iter, self.tolerance),
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradients from a zero start.
fn pcg(
    sys: &LaplacianSystem,
    b: &[f64],
    inv_diag: &[f64],
    max_iter: usize,
    tol: f64,
) -> Result<Vec<f64>, HarmonicError> {
    let m = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; m];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(a, d)| a * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; m];
    let mut rz = dot(&r, &z);
    for it in 0..max_iter {
        sys.matvec(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..m {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm(&r) <= tol * bnorm {
            // recompute the true residual to guard against drift
            let rel = norm(&sys.residual(b, &x)) / bnorm;
            if rel <= tol {
                return Ok(x);
            }
            r = sys.residual(b, &x);
        }
        for i in 0..m {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..m {
            p[i] = z[i] + beta * p[i];
        }
        if it + 1 == max_iter {
            break;
        }
    }
    Err(HarmonicError::ToleranceNotReached { residual: norm(&sys.residual(b, &x)) / bnorm, iterations: max_iter })
}

use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;

use super::sparse::{CsrMatrix, SolveStats};
use crate::{Error, Result};

/// Sparse LU with fill-reducing ordering, plus iterative refinement on solve.
pub struct SparseLu {
    lu: Lu<usize, Complex64>,
}

impl SparseLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.n();
        let mut triplets = Vec::with_capacity(a.nnz());
        for i in 0..n {
            for (j, v) in a.row(i) {
                triplets.push(Triplet::new(i, j, v));
            }
        }
        let mat = SparseColMat::<usize, Complex64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| Error::InvalidGrid(format!("sparse assembly: {e:?}")))?;
        let lu = mat
            .sp_lu()
            .map_err(|_| Error::SingularStencil { node: 0 })?;
        Ok(Self { lu })
    }

    fn apply(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let mut col = Mat::<Complex64>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        self.lu.solve_in_place(col.as_mut());
        (0..rhs.len()).map(|i| col[(i, 0)]).collect()
    }

    /// Solve `a x = b`, refining until the relative residual drops below `tol`
    /// (at most three refinement steps).
    pub fn solve(&self, a: &CsrMatrix, b: &[Complex64], tol: f64) -> Result<(Vec<Complex64>, SolveStats)> {
        let bnorm = norm(b);
        if bnorm == 0.0 {
            return Ok((vec![Complex64::new(0.0, 0.0); b.len()], SolveStats { iterations: 0, residual: 0.0, restarts: 0 }));
        }
        let mut x = self.apply(b);
        let mut r = vec![Complex64::new(0.0, 0.0); b.len()];
        let mut rel = f64::INFINITY;
        for step in 0..=3 {
            a.matvec(&x, &mut r);
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri = bi - *ri;
            }
            rel = norm(&r) / bnorm;
            if !rel.is_finite() {
                return Err(Error::NonFinite("direct solve"));
            }
            if rel <= tol || step == 3 {
                if rel > tol.max(1e-8) {
                    break;
                }
                return Ok((x, SolveStats { iterations: step, residual: rel, restarts: 0 }));
            }
            let dx = self.apply(&r);
            for (xi, d) in x.iter_mut().zip(dx) {
                *xi += d;
            }
        }
        Err(Error::NoConvergence { iterations: 3, residual: rel })
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

//! Compressed sparse rows, ILU(0) and preconditioned BiCGStab for complex systems.
//!
//! All reductions run sequentially in index order, so a solve is bitwise
//! reproducible for identical inputs.

use num_complex::Complex64;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl CsrMatrix {
    /// Build from per-row `(column, value)` lists; duplicate columns are summed,
    /// explicit zeros are kept so the pattern is predictable.
    pub fn from_rows(rows: Vec<Vec<(usize, Complex64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                assert!(c < n, "column {c} out of range");
                if last == Some(c) {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[span.clone()].binary_search(&j) {
            Ok(pos) => self.values[span.start + pos],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut acc = Complex64::new(0.0, 0.0);
            for k in lo..hi {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    pub fn mul(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.n];
        self.matvec(x, &mut y);
        y
    }

    /// Largest `|A_ij - A_ji|` over the stored pattern.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).norm());
            }
        }
        worst
    }
}

/// Incomplete LU factorization with the sparsity pattern of the matrix.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    lu: CsrMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let mut lu = a.clone();
        let n = lu.n;
        let mut diag = vec![usize::MAX; n];
        for (i, d) in diag.iter_mut().enumerate() {
            for k in lu.row_ptr[i]..lu.row_ptr[i + 1] {
                if lu.col_idx[k] == i {
                    *d = k;
                }
            }
            if *d == usize::MAX {
                return Err(Error::SingularStencil { node: i });
            }
        }
        // position lookup for the current row
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            let (lo, hi) = (lu.row_ptr[i], lu.row_ptr[i + 1]);
            for k in lo..hi {
                pos[lu.col_idx[k]] = k;
            }
            for kk in lo..hi {
                let col = lu.col_idx[kk];
                if col >= i {
                    break;
                }
                let pivot = lu.values[diag[col]];
                if pivot.norm() == 0.0 {
                    return Err(Error::SingularStencil { node: col });
                }
                let factor = lu.values[kk] / pivot;
                lu.values[kk] = factor;
                for m in diag[col] + 1..lu.row_ptr[col + 1] {
                    let target = pos[lu.col_idx[m]];
                    if target != usize::MAX {
                        let update = factor * lu.values[m];
                        lu.values[target] -= update;
                    }
                }
            }
            for k in lo..hi {
                pos[lu.col_idx[k]] = usize::MAX;
            }
            if lu.values[diag[i]].norm() == 0.0 {
                return Err(Error::SingularStencil { node: i });
            }
        }
        Ok(Self { lu, diag })
    }

    /// `z = (LU)^{-1} r`.
    pub fn apply(&self, r: &[Complex64], z: &mut [Complex64]) {
        let lu = &self.lu;
        for i in 0..lu.n {
            let mut acc = r[i];
            for k in lu.row_ptr[i]..self.diag[i] {
                acc -= lu.values[k] * z[lu.col_idx[k]];
            }
            z[i] = acc;
        }
        for i in (0..lu.n).rev() {
            let mut acc = z[i];
            for k in self.diag[i] + 1..lu.row_ptr[i + 1] {
                acc -= lu.values[k] * z[lu.col_idx[k]];
            }
            z[i] = acc / lu.values[self.diag[i]];
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Target `||b - A x|| / ||b||`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub method: SolveMethod,
}

/// Linear solver backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMethod {
    /// Sparse LU with iterative refinement.
    #[default]
    Direct,
    /// ILU(0)-preconditioned BiCGStab.
    Krylov,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 20_000,
            method: SolveMethod::Direct,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
    pub restarts: usize,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        acc += x.conj() * y;
    }
    acc
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn residual(a: &CsrMatrix, x: &[Complex64], b: &[Complex64], r: &mut [Complex64]) {
    a.matvec(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
}

/// Right-preconditioned BiCGStab. On breakdown the recurrence is restarted
/// from the current iterate once; a second breakdown is an error.
pub fn bicgstab(
    a: &CsrMatrix,
    precond: &Ilu0,
    b: &[Complex64],
    x0: Option<&[Complex64]>,
    opts: &SolveOptions,
) -> Result<(Vec<Complex64>, SolveStats)> {
    let n = a.n();
    let zero = Complex64::new(0.0, 0.0);
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok((
            vec![zero; n],
            SolveStats {
                iterations: 0,
                residual: 0.0,
                restarts: 0,
            },
        ));
    }
    let mut x = match x0 {
        Some(x0) => x0.to_vec(),
        None => vec![zero; n],
    };
    let mut r = vec![zero; n];
    residual(a, &x, b, &mut r);
    let mut rel = norm(&r) / b_norm;
    if rel <= opts.tolerance {
        return Ok((
            x,
            SolveStats {
                iterations: 0,
                residual: rel,
                restarts: 0,
            },
        ));
    }

    let mut r_hat = r.clone();
    let mut p = vec![zero; n];
    let mut v = vec![zero; n];
    let mut p_hat = vec![zero; n];
    let mut s_hat = vec![zero; n];
    let mut t = vec![zero; n];
    let mut rho = Complex64::new(1.0, 0.0);
    let mut alpha = Complex64::new(1.0, 0.0);
    let mut omega = Complex64::new(1.0, 0.0);
    let mut restarts = 0;
    let tiny = 1e-300;

    let mut iteration = 0;
    while iteration < opts.max_iterations {
        iteration += 1;
        let rho_new = dot(&r_hat, &r);
        let breakdown = rho_new.norm() <= tiny * b_norm * b_norm || omega.norm() == 0.0;
        if breakdown {
            if restarts >= 1 {
                return Err(Error::Breakdown { iteration });
            }
            restarts += 1;
            residual(a, &x, b, &mut r);
            r_hat.copy_from_slice(&r);
            p.iter_mut().for_each(|c| *c = zero);
            v.iter_mut().for_each(|c| *c = zero);
            rho = Complex64::new(1.0, 0.0);
            alpha = rho;
            omega = rho;
            continue;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        precond.apply(&p, &mut p_hat);
        a.matvec(&p_hat, &mut v);
        let denom = dot(&r_hat, &v);
        if denom.norm() <= tiny {
            omega = zero;
            continue;
        }
        alpha = rho / denom;
        // r now holds s = r - alpha v
        for i in 0..n {
            r[i] -= alpha * v[i];
        }
        if norm(&r) / b_norm <= opts.tolerance {
            for i in 0..n {
                x[i] += alpha * p_hat[i];
            }
        } else {
            precond.apply(&r, &mut s_hat);
            a.matvec(&s_hat, &mut t);
            let tt = dot(&t, &t);
            omega = if tt.norm() == 0.0 { zero } else { dot(&t, &r) / tt };
            for i in 0..n {
                x[i] += alpha * p_hat[i] + omega * s_hat[i];
                r[i] -= omega * t[i];
            }
        }
        rel = norm(&r) / b_norm;
        if rel <= opts.tolerance {
            // confirm against the true residual; keep iterating if the recurrence drifted
            residual(a, &x, b, &mut r);
            rel = norm(&r) / b_norm;
            if rel <= opts.tolerance {
                return Ok((
                    x,
                    SolveStats {
                        iterations: iteration,
                        residual: rel,
                        restarts,
                    },
                ));
            }
            r_hat.copy_from_slice(&r);
            p.iter_mut().for_each(|c| *c = zero);
            v.iter_mut().for_each(|c| *c = zero);
            rho = Complex64::new(1.0, 0.0);
            alpha = rho;
            omega = rho;
        }
    }
    residual(a, &x, b, &mut r);
    Err(Error::NoConvergence {
        iterations: opts.max_iterations,
        residual: norm(&r) / b_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tridiag(n: usize, shift: Complex64) -> CsrMatrix {
        let rows = (0..n)
            .map(|i| {
                let mut row = vec![(i, c(2.0, 0.0) + shift)];
                if i > 0 {
                    row.push((i - 1, c(-1.0, 0.0)));
                }
                if i + 1 < n {
                    row.push((i + 1, c(-1.0, 0.0)));
                }
                row
            })
            .collect();
        CsrMatrix::from_rows(rows)
    }

    #[test]
    fn ilu_is_exact_for_tridiagonal() {
        let a = tridiag(50, c(0.0, 0.3));
        let ilu = Ilu0::factor(&a).unwrap();
        let b: Vec<_> = (0..50).map(|i| c(i as f64, -1.0)).collect();
        let mut z = vec![c(0.0, 0.0); 50];
        ilu.apply(&b, &mut z);
        let back = a.mul(&z);
        for (u, v) in back.iter().zip(&b) {
            assert!((u - v).norm() < 1e-10);
        }
    }

    #[test]
    fn bicgstab_converges_and_handles_zero_rhs() {
        // 2D Laplacian-like system via two coupled chains
        let n: usize = 400;
        let rows = (0..n)
            .map(|i| {
                let mut row = vec![(i, c(4.0, 0.1))];
                for j in [i.wrapping_sub(1), i + 1, i.wrapping_sub(20), i + 20] {
                    if j < n {
                        row.push((j, c(-1.0, 0.0)));
                    }
                }
                row
            })
            .collect();
        let a = CsrMatrix::from_rows(rows);
        let ilu = Ilu0::factor(&a).unwrap();
        let b: Vec<_> = (0..n).map(|i| c((i as f64).sin(), 0.5)).collect();
        let (x, stats) = bicgstab(&a, &ilu, &b, None, &SolveOptions::default()).unwrap();
        assert!(stats.residual <= 1e-10);
        let mut r = vec![c(0.0, 0.0); n];
        residual(&a, &x, &b, &mut r);
        assert!(norm(&r) / norm(&b) <= 1e-10);

        let zero = vec![c(0.0, 0.0); n];
        let (x, stats) = bicgstab(&a, &ilu, &zero, None, &SolveOptions::default()).unwrap();
        assert!(x.iter().all(|v| v.norm() == 0.0));
        assert_eq!(stats.iterations, 0);

        // determinism
        let (x1, _) = bicgstab(&a, &ilu, &b, None, &SolveOptions::default()).unwrap();
        let (x2, _) = bicgstab(&a, &ilu, &b, None, &SolveOptions::default()).unwrap();
        assert!(x1.iter().zip(&x2).all(|(p, q)| p.re.to_bits() == q.re.to_bits()
            && p.im.to_bits() == q.im.to_bits()));
    }

    #[test]
    fn reports_non_convergence() {
        let a = tridiag(200, c(0.0, 0.0));
        let id = Ilu0::factor(&CsrMatrix::from_rows(
            (0..200).map(|i| vec![(i, c(1.0, 0.0))]).collect(),
        ))
        .unwrap();
        let b = vec![c(1.0, 0.0); 200];
        let opts = SolveOptions {
            tolerance: 1e-14,
            max_iterations: 3,
            method: SolveMethod::Krylov,
        };
        assert!(matches!(
            bicgstab(&a, &id, &b, None, &opts),
            Err(Error::NoConvergence { iterations: 3, .. })
        ));
    }

    #[test]
    fn missing_diagonal_is_singular() {
        let a = CsrMatrix::from_rows(vec![vec![(1, c(1.0, 0.0))], vec![(0, c(1.0, 0.0))]]);
        assert!(matches!(Ilu0::factor(&a), Err(Error::SingularStencil { node: 0 })));
    }

    #[test]
    fn duplicates_are_summed() {
        let a = CsrMatrix::from_rows(vec![vec![(0, c(1.0, 0.0)), (0, c(2.0, 0.0))]]);
        assert_eq!(a.get(0, 0), c(3.0, 0.0));
        assert_eq!(a.nnz(), 1);
    }
}

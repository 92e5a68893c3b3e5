use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::{Grid, GridField};
use super::direct::SparseLu;
use super::sparse::{bicgstab, CsrMatrix, Ilu0, SolveMethod, SolveOptions, SolveStats};
use crate::problem_model::{validate_coefficients, CoefficientField, Matrix2, SampleLattice, SourceTerm, SpectralShift};
use crate::{norm2, Error, Result};

/// Treatment of the outer ring of grid nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BoundaryClosure {
    /// `u = g` on the boundary (`g = 0` unless boundary data is supplied).
    DirichletZero,
    /// `du/dr - (ik - 1/(2r)) u = g`, the first-order outgoing condition with
    /// the curvature term of a `|x|^{-1/2}` wave.
    RobinRadiation { k: f64 },
}

impl BoundaryClosure {
    pub fn robin(k: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidShift(format!("robin-radiation closure needs k > 0, got {k}")));
        }
        Ok(Self::RobinRadiation { k })
    }

    /// Impedance `beta(r) = ik - 1/(2r)` of the Robin closure.
    pub fn robin_impedance(k: f64, r: f64) -> Complex64 {
        Complex64::new(-0.5 / r, k)
    }
}

/// The discrete operator with its boundary rows.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    matrix: CsrMatrix,
    grid: Grid,
    shift: SpectralShift,
    closure: BoundaryClosure,
    boundary: Vec<usize>,
    /// Interior-row couplings to Dirichlet nodes, moved to the right-hand side:
    /// `(row, position in boundary list, coefficient)`.
    dirichlet_couplings: Vec<(usize, usize, Complex64)>,
    options: SolveOptions,
}

/// Edge-midpoint coefficient samples.
struct EdgeCoefficients {
    /// `east[j * (n-1) + i]` = `a(x_i + h/2, y_j)`
    east: Vec<Matrix2>,
    /// `north[j * n + i]` = `a(x_i, y_j + h/2)`
    north: Vec<Matrix2>,
    n: usize,
}

impl EdgeCoefficients {
    fn sample(a: &CoefficientField, grid: &Grid) -> Self {
        let n = grid.n();
        let h = grid.h();
        let mut east = Vec::with_capacity((n - 1) * n);
        for j in 0..n {
            for i in 0..n - 1 {
                east.push(a.eval([grid.coord(i) + 0.5 * h, grid.coord(j)]));
            }
        }
        let mut north = Vec::with_capacity(n * (n - 1));
        for j in 0..n - 1 {
            for i in 0..n {
                north.push(a.eval([grid.coord(i), grid.coord(j) + 0.5 * h]));
            }
        }
        Self { east, north, n }
    }

    /// Coefficient on the edge from `(i, j)` to `(i+1, j)`.
    #[inline]
    fn e(&self, i: usize, j: usize) -> &Matrix2 {
        &self.east[j * (self.n - 1) + i]
    }

    /// Coefficient on the edge from `(i, j)` to `(i, j+1)`.
    #[inline]
    fn n(&self, i: usize, j: usize) -> &Matrix2 {
        &self.north[j * self.n + i]
    }
}

/// Stencil entries of `-div(a grad u)` at interior node `(i, j)`, as
/// `(di, dj, weight)` offsets. Fluxes live on edge midpoints; the
/// off-diagonal coefficient multiplies a centered transverse difference.
fn interior_stencil(edges: &EdgeCoefficients, i: usize, j: usize, h: f64) -> [(isize, isize, f64); 9] {
    let ae = edges.e(i, j);
    let aw = edges.e(i - 1, j);
    let an = edges.n(i, j);
    let as_ = edges.n(i, j - 1);
    let c = 1.0 / (h * h);
    let q = 0.25 * c;
    [
        (0, 0, c * (ae[0][0] + aw[0][0] + an[1][1] + as_[1][1])),
        (1, 0, -c * ae[0][0] - q * an[1][0] + q * as_[1][0]),
        (-1, 0, -c * aw[0][0] + q * an[1][0] - q * as_[1][0]),
        (0, 1, -c * an[1][1] - q * ae[0][1] + q * aw[0][1]),
        (0, -1, -c * as_[1][1] + q * ae[0][1] - q * aw[0][1]),
        (1, 1, -q * ae[0][1] - q * an[1][0]),
        (1, -1, q * ae[0][1] + q * as_[1][0]),
        (-1, 1, q * aw[0][1] + q * an[1][0]),
        (-1, -1, -q * aw[0][1] - q * as_[1][0]),
    ]
}

/// One-sided (second-order) or centered first-derivative weights along one axis.
fn derivative_weights(i: usize, n: usize, h: f64) -> Vec<(usize, f64)> {
    let s = 0.5 / h;
    if i == 0 {
        vec![(0, -3.0 * s), (1, 4.0 * s), (2, -s)]
    } else if i == n - 1 {
        vec![(n - 1, 3.0 * s), (n - 2, -4.0 * s), (n - 3, s)]
    } else {
        vec![(i + 1, s), (i - 1, -s)]
    }
}

/// Assemble `L + sigma` with the chosen closure on the grid.
pub fn assemble(
    a: &CoefficientField,
    shift: SpectralShift,
    grid: &Grid,
    closure: BoundaryClosure,
) -> Result<LinearSystem> {
    let radius = a.perturbation_radius();
    if grid.half_width() < 4.0 * radius {
        return Err(Error::InvalidGrid(format!(
            "half width {} must be at least 4R = {}",
            grid.half_width(),
            4.0 * radius
        )));
    }
    if let BoundaryClosure::RobinRadiation { k } = closure {
        BoundaryClosure::robin(k)?;
    }
    match validate_coefficients(a, &SampleLattice::default_for(a)) {
        Ok(_) => {}
        Err(Error::Ellipticity { .. }) => {
            return Err(Error::SingularStencil {
                node: grid.index(grid.n() / 2, grid.n() / 2),
            })
        }
        Err(e) => return Err(e),
    }

    let n = grid.n();
    let h = grid.h();
    let sigma = shift.sigma();
    let edges = EdgeCoefficients::sample(a, grid);
    let boundary = grid.boundary_nodes();
    let mut boundary_pos = vec![usize::MAX; grid.len()];
    for (pos, &idx) in boundary.iter().enumerate() {
        boundary_pos[idx] = pos;
    }

    let dirichlet = matches!(closure, BoundaryClosure::DirichletZero);
    let mut dirichlet_couplings = Vec::new();
    let mut rows: Vec<Vec<(usize, Complex64)>> = Vec::with_capacity(grid.len());
    for idx in 0..grid.len() {
        let (i, j) = grid.ij(idx);
        let mut row = Vec::with_capacity(9);
        if grid.is_boundary(i, j) {
            match closure {
                BoundaryClosure::DirichletZero => row.push((idx, Complex64::new(1.0, 0.0))),
                BoundaryClosure::RobinRadiation { k } => {
                    let p = grid.node(idx);
                    let r = norm2(p);
                    let (cx, cy) = (p[0] / r, p[1] / r);
                    for (ii, w) in derivative_weights(i, n, h) {
                        row.push((grid.index(ii, j), Complex64::new(cx * w, 0.0)));
                    }
                    for (jj, w) in derivative_weights(j, n, h) {
                        row.push((grid.index(i, jj), Complex64::new(cy * w, 0.0)));
                    }
                    row.push((idx, -BoundaryClosure::robin_impedance(k, r)));
                }
            }
        } else {
            for (di, dj, w) in interior_stencil(&edges, i, j, h) {
                let ni = (i as isize + di) as usize;
                let nj = (j as isize + dj) as usize;
                let nb = grid.index(ni, nj);
                let mut value = Complex64::new(w, 0.0);
                if di == 0 && dj == 0 {
                    value += sigma;
                }
                if dirichlet && boundary_pos[nb] != usize::MAX {
                    if w != 0.0 {
                        dirichlet_couplings.push((idx, boundary_pos[nb], value));
                    }
                    continue;
                }
                if w != 0.0 || (di == 0 && dj == 0) {
                    row.push((nb, value));
                }
            }
        }
        rows.push(row);
    }

    Ok(LinearSystem {
        matrix: CsrMatrix::from_rows(rows),
        grid: *grid,
        shift,
        closure,
        boundary,
        dirichlet_couplings,
        options: SolveOptions::default(),
    })
}

enum Factorization {
    Lu(SparseLu),
    Ilu(Ilu0),
}

/// An assembled system with its factorization (LU or ILU(0) preconditioner).
pub struct FactoredSystem<'a> {
    system: &'a LinearSystem,
    factors: Factorization,
}

impl FactoredSystem<'_> {
    /// `x0` is a warm start for the Krylov backend and ignored by the direct one.
    pub fn solve(
        &self,
        rhs: &[Complex64],
        x0: Option<&[Complex64]>,
    ) -> Result<(Vec<Complex64>, SolveStats)> {
        let opts = &self.system.options;
        match &self.factors {
            Factorization::Lu(lu) => lu.solve(&self.system.matrix, rhs, opts.tolerance),
            Factorization::Ilu(ilu) => bicgstab(&self.system.matrix, ilu, rhs, x0, opts),
        }
    }
}

impl LinearSystem {
    pub fn matrix(&self) -> &crate::fd_solver::sparse::CsrMatrix {
        &self.matrix
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn shift(&self) -> SpectralShift {
        self.shift
    }

    pub fn closure(&self) -> BoundaryClosure {
        self.closure
    }

    /// Boundary nodes in the order boundary data is expected.
    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary
    }

    pub fn with_options(mut self, options: SolveOptions) -> Self {
        self.options = options;
        self
    }

    pub fn factor(&self) -> Result<FactoredSystem<'_>> {
        Ok(FactoredSystem {
            system: self,
            factors: match self.options.method {
                SolveMethod::Direct => Factorization::Lu(SparseLu::factor(&self.matrix)?),
                SolveMethod::Krylov => Factorization::Ilu(Ilu0::factor(&self.matrix)?),
            },
        })
    }

    /// Right-hand side: `f` at interior nodes and `boundary_data` (default zero)
    /// on the boundary rows.
    pub fn rhs(&self, f: &SourceTerm, boundary_data: Option<&[Complex64]>) -> Vec<Complex64> {
        let values: Vec<Complex64> = (0..self.grid.len())
            .map(|idx| f.eval(self.grid.node(idx)))
            .collect();
        self.rhs_from_samples(&values, boundary_data)
    }

    /// Same as [`LinearSystem::rhs`] from node samples of `f`.
    pub fn rhs_from_samples(
        &self,
        f_nodes: &[Complex64],
        boundary_data: Option<&[Complex64]>,
    ) -> Vec<Complex64> {
        let zero = Complex64::new(0.0, 0.0);
        let mut rhs = f_nodes.to_vec();
        for &b in &self.boundary {
            rhs[b] = zero;
        }
        if let Some(data) = boundary_data {
            assert_eq!(data.len(), self.boundary.len(), "one datum per boundary node");
            for (&b, &g) in self.boundary.iter().zip(data) {
                rhs[b] = g;
            }
            for &(row, pos, w) in &self.dirichlet_couplings {
                rhs[row] -= w * data[pos];
            }
        }
        rhs
    }

    /// `(L_h + sigma) u` at every interior node (zero on the boundary ring),
    /// including couplings to boundary values.
    pub fn apply_interior(&self, u: &GridField) -> Vec<Complex64> {
        let mut out = self.matrix.mul(u.data());
        for &(row, pos, w) in &self.dirichlet_couplings {
            out[row] += w * u.data()[self.boundary[pos]];
        }
        for &b in &self.boundary {
            out[b] = Complex64::new(0.0, 0.0);
        }
        out
    }
}

/// Terms of the summed interior equations: `inward_flux + absorption = source`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxBalance {
    /// `-h * sum` of the outward edge fluxes `(a grad u) . n` across the
    /// boundary of the interior node box.
    pub inward_flux: Complex64,
    /// `sigma h^2 sum u` over interior nodes.
    pub absorption: Complex64,
    /// `h^2 sum f` over interior nodes.
    pub source: Complex64,
}

/// Flux bookkeeping computed directly from edge fluxes, independent of the
/// assembled matrix.
pub fn discrete_flux_balance(
    a: &CoefficientField,
    shift: SpectralShift,
    u: &GridField,
    f: &SourceTerm,
) -> FluxBalance {
    let grid = u.grid();
    let n = grid.n();
    let h = grid.h();
    let at = |i: usize, j: usize| u.at(i, j);
    // x-flux on the edge (i, j)-(i+1, j); y-flux on (i, j)-(i, j+1)
    let flux_x = |i: usize, j: usize| {
        let m = a.eval([grid.coord(i) + 0.5 * h, grid.coord(j)]);
        let dx = (at(i + 1, j) - at(i, j)) / h;
        let dy = (at(i, j + 1) + at(i + 1, j + 1) - at(i, j - 1) - at(i + 1, j - 1)) / (4.0 * h);
        dx * m[0][0] + dy * m[0][1]
    };
    let flux_y = |i: usize, j: usize| {
        let m = a.eval([grid.coord(i), grid.coord(j) + 0.5 * h]);
        let dy = (at(i, j + 1) - at(i, j)) / h;
        let dx = (at(i + 1, j) + at(i + 1, j + 1) - at(i - 1, j) - at(i - 1, j + 1)) / (4.0 * h);
        dy * m[1][1] + dx * m[1][0]
    };
    let mut outward = Complex64::new(0.0, 0.0);
    for j in 1..n - 1 {
        outward += flux_x(n - 2, j) - flux_x(0, j);
    }
    for i in 1..n - 1 {
        outward += flux_y(i, n - 2) - flux_y(i, 0);
    }
    let mut sum_u = Complex64::new(0.0, 0.0);
    let mut sum_f = Complex64::new(0.0, 0.0);
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            sum_u += at(i, j);
            sum_f += f.eval([grid.coord(i), grid.coord(j)]);
        }
    }
    FluxBalance {
        inward_flux: -outward * h,
        absorption: shift.sigma() * sum_u * (h * h),
        source: sum_f * (h * h),
    }
}

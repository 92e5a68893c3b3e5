//! Stand-alone verification suites shared by the kernels study, `selftest`
//! and the acceptance tests.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::report::{Check, Table, Target};
use crate::exterior_representation::{solve_matched, MatchedOptions};
use crate::fd_solver::{assemble, conv_oracle, BoundaryClosure, Grid, GridField};
use crate::problem_model::{CoefficientField, Problem, SourceTerm, SpectralShift, IDENTITY};
use crate::special_functions::{
    alpha, hankel1_01_asymptotic, hankel1_01_series, j0y0_j1y1, log_green, log_green_normal_deriv,
    regularized_green, SERIES_CROSSOVER,
};
use crate::{norm2, Point2, Result};

/// `J0 Y1 - J1 Y0 = -2/(pi x)` at 100 log-spaced points of `[0.1, 100]`.
pub fn wronskian() -> Result<Check> {
    let mut worst: f64 = 0.0;
    for q in 0..100 {
        let x = 0.1 * 1000f64.powf(q as f64 / 99.0);
        let (j0, y0, j1, y1) = j0y0_j1y1(x)?;
        let exact = -2.0 / (PI * x);
        worst = worst.max(((j0 * y1 - j1 * y0) - exact).abs() / exact.abs());
    }
    Ok(Check::new("wronskian", worst, Target::at_most(1e-9)))
}

/// Series and asymptotic branches on `12 <= Re z <= 14`, `Im z in {0, 0.25, 0.5}`.
pub fn branch_overlap() -> Result<Check> {
    let mut worst: f64 = 0.0;
    for q in 0..=16 {
        let re = SERIES_CROSSOVER + 2.0 * q as f64 / 16.0;
        for im in [0.0, 0.25, 0.5] {
            let z = Complex64::new(re, im);
            let (s0, s1) = hankel1_01_series(z)?;
            let (a0, a1) = hankel1_01_asymptotic(z)?;
            worst = worst
                .max((s0 - a0).norm() / a0.norm())
                .max((s1 - a1).norm() / a1.norm());
        }
    }
    Ok(Check::new("branch-overlap", worst, Target::at_most(1e-9)))
}

/// `sup |x| |g0(x, y) - (1/2pi) ln(1/|x|)|` over `|x| in [10, 1000]`, `|y| <= 1`.
/// The exact supremum is `-10 ln(0.9) / (2 pi) = 0.1677`, at `|x| = 10`, `|y| = 1`.
pub fn log_far_field() -> Result<Check> {
    let mut worst: f64 = 0.0;
    for q in 0..40 {
        let r = 10.0 * 100f64.powf(q as f64 / 39.0);
        for t in 0..16 {
            let th = 2.0 * PI * t as f64 / 16.0;
            let x = [r * th.cos(), r * th.sin()];
            let base = -(r.ln()) / (2.0 * PI);
            for rho in [0.0, 0.25, 0.5, 1.0] {
                for s in 0..8 {
                    let ph = 2.0 * PI * s as f64 / 8.0;
                    let y = [rho * ph.cos(), rho * ph.sin()];
                    worst = worst.max(r * (log_green(x, y)? - base).abs());
                }
            }
        }
    }
    Ok(Check::new("log-far-field", worst, Target::at_most(0.17)))
}

/// Normal derivative of `g0` against central differences and its `1/(2 pi |x-s|)` bound.
pub fn log_normal_derivative() -> Result<Check> {
    let mut worst: f64 = 0.0;
    let d = 1e-5;
    for q in 0..32 {
        let t = 2.0 * PI * q as f64 / 32.0;
        let s = [1.3 * t.cos(), 1.3 * t.sin()];
        let normal = [t.cos(), t.sin()];
        for x in [[0.0, 2.0], [3.0, -1.0], [-0.2, 0.1]] {
            let exact = log_green_normal_deriv(x, s, normal)?;
            let plus = log_green(x, [s[0] + d * normal[0], s[1] + d * normal[1]])?;
            let minus = log_green(x, [s[0] - d * normal[0], s[1] - d * normal[1]])?;
            let fd = (plus - minus) / (2.0 * d);
            let dist = (x[0] - s[0]).hypot(x[1] - s[1]);
            worst = worst.max((fd - exact).abs() / (1.0 / (2.0 * PI * dist)));
            if exact.abs() > (1.0 + 1e-12) / (2.0 * PI * dist) {
                worst = f64::INFINITY;
            }
        }
    }
    Ok(Check::new("log-normal-derivative", worst, Target::at_most(1e-6)))
}

/// `sup_{0.5 <= r <= 2} |g_eps - alpha(eps) - g0|` for one `eps`.
pub fn resolvent_residual(eps: f64) -> Result<f64> {
    let a = alpha(eps)?;
    let mut worst: f64 = 0.0;
    for q in 0..=60 {
        let r = 0.5 * 4f64.powf(q as f64 / 60.0);
        let x = [r, 0.0];
        let g = regularized_green(x, [0.0, 0.0], eps)?;
        worst = worst.max((g - a - log_green(x, [0.0, 0.0])?).norm());
    }
    Ok(worst)
}

/// Residual of the resolvent expansion against a rate `rate(eps)`: the constant
/// is fitted at the first (largest) `eps`, and every `eps` must satisfy
/// `residual <= 2 C rate(eps)`. The check value is `max_j ratio_j / C`.
pub fn resolvent_expansion(eps: &[f64]) -> Result<(Check, Check, Table)> {
    let mut table = Table::new(
        "resolvent",
        &["eps", "residual", "ratio_eps2_log", "ratio_eps_log"],
    );
    let mut sq = Vec::new();
    let mut lin = Vec::new();
    for &e in eps {
        let res = resolvent_residual(e)?;
        let l = (1.0 / e).ln();
        sq.push(res / (e * e * l));
        lin.push(res / (e * l));
        table.push(vec![e, res, res / (e * e * l), res / (e * l)]);
    }
    let spread = |r: &[f64]| r.iter().map(|v| v / r[0]).fold(0.0, f64::max);
    let main = Check::new("resolvent-eps2-log", spread(&sq), Target::at_most(2.0))
        .with_detail("residual / (eps^2 ln(1/eps)), constant fitted at the largest eps");
    let companion = Check::new("resolvent-eps-log", spread(&lin), Target::at_most(2.0))
        .with_detail("same protocol with rate eps ln(1/eps)");
    Ok((main, companion, table))
}

/// Coefficients for the manufactured-solution test: a rotated, anisotropic
/// matrix with a C3 profile `(1 - r^2)^4` on the unit disk.
pub fn manufactured_coefficients() -> CoefficientField {
    let (s, c) = (PI / 5.0).sin_cos();
    CoefficientField::from_fn(1.0, 8.0, move |x| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        if r2 >= 1.0 {
            return IDENTITY;
        }
        let psi = (1.0 - r2).powi(4);
        let (l1, l2) = (1.0 + 2.0 * psi, 1.0 + 0.5 * psi);
        let a12 = c * s * (l1 - l2);
        [[c * c * l1 + s * s * l2, a12], [a12, s * s * l1 + c * c * l2]]
    })
}

/// `u*(x) = (1 - |x|^2/4)^4 (1 + 0.3 x1 + 0.2 x1 x2)` on `|x| < 2`, and its gradient.
pub fn manufactured_solution(x: Point2) -> (f64, [f64; 2]) {
    let s = (x[0] * x[0] + x[1] * x[1]) / 4.0;
    if s >= 1.0 {
        return (0.0, [0.0, 0.0]);
    }
    let phi = (1.0 - s).powi(4);
    let dphi = -2.0 * (1.0 - s).powi(3); // times x
    let p = 1.0 + 0.3 * x[0] + 0.2 * x[0] * x[1];
    let dp = [0.3 + 0.2 * x[1], 0.2 * x[0]];
    (
        phi * p,
        [dphi * x[0] * p + phi * dp[0], dphi * x[1] * p + phi * dp[1]],
    )
}

/// `-div(a grad u*) + sigma u*`, the divergence by central differences of the
/// analytic flux with step `1e-5`.
pub fn manufactured_source(a: &CoefficientField, sigma: Complex64) -> SourceTerm {
    let a = a.clone();
    let flux = move |x: Point2| {
        let m = a.eval(x);
        let (_, g) = manufactured_solution(x);
        [m[0][0] * g[0] + m[0][1] * g[1], m[1][0] * g[0] + m[1][1] * g[1]]
    };
    SourceTerm::from_fn(2.0, move |x| {
        let d = 1e-5;
        let div = (flux([x[0] + d, x[1]])[0] - flux([x[0] - d, x[1]])[0]
            + flux([x[0], x[1] + d])[1]
            - flux([x[0], x[1] - d])[1])
            / (2.0 * d);
        -div + sigma * manufactured_solution(x).0
    })
}

/// Max-norm error of the discrete solution against `u*` at `L = 4`, per `n`.
pub fn manufactured_errors(shift: SpectralShift, sizes: &[usize]) -> Result<Vec<f64>> {
    let a = manufactured_coefficients();
    let f = manufactured_source(&a, shift.sigma());
    let closure = if shift.is_helmholtz() {
        BoundaryClosure::robin(shift.k)?
    } else {
        BoundaryClosure::DirichletZero
    };
    sizes
        .iter()
        .map(|&n| {
            let grid = Grid::new(4.0, n)?;
            let system = assemble(&a, shift, &grid, closure)?;
            let u = crate::fd_solver::solve(&system, &f, &grid)?;
            Ok(u.data()
                .iter()
                .enumerate()
                .map(|(idx, v)| (v - manufactured_solution(grid.node(idx)).0).norm())
                .fold(0.0, f64::max))
        })
        .collect()
}

/// Smallest error ratio over successive halvings `n = 65, 129, 257`.
pub fn solver_order(shift: SpectralShift) -> Result<(Check, Vec<f64>)> {
    let errors = manufactured_errors(shift, &[65, 129, 257])?;
    let worst = errors
        .windows(2)
        .map(|w| w[0] / w[1])
        .fold(f64::INFINITY, f64::min);
    Ok((
        Check::new(format!("solver-order {}", shift.label()), worst, Target::at_least(3.5))
            .with_detail(format!("max errors {errors:?}")),
        errors,
    ))
}

/// Nodes of `grid` with `|x| <= radius`, every `stride`-th node per axis.
pub fn disk_nodes(grid: &Grid, radius: f64, stride: usize) -> Vec<Point2> {
    let n = grid.n();
    let c = n / 2;
    let mut out = Vec::new();
    for j in (0..n).filter(|j| (*j as isize - c as isize).rem_euclid(stride as isize) == 0) {
        for i in (0..n).filter(|i| (*i as isize - c as isize).rem_euclid(stride as isize) == 0) {
            let p = [grid.coord(i), grid.coord(j)];
            if norm2(p) <= radius {
                out.push(p);
            }
        }
    }
    out
}

/// Relative max-norm discrepancy between `field` and the convolution oracle
/// at `points`.
pub fn oracle_discrepancy(
    field: &GridField,
    problem: &Problem,
    shift: SpectralShift,
    points: &[Point2],
    quadrature_step: f64,
) -> Result<f64> {
    let oracle = conv_oracle(&problem.coefficients, &problem.source, shift, points, quadrature_step)?;
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for (p, o) in points.iter().zip(&oracle) {
        let v = field
            .interpolate(*p)
            .ok_or(crate::Error::InvalidWindow("oracle point outside grid".into()))?;
        num = num.max((v - o).norm());
        den = den.max(o.norm());
    }
    Ok(if den > 0.0 { num / den } else { num })
}

/// Matched FD solve of an identity-coefficient problem against the oracle on `B_{2R}`.
pub fn oracle_equivalence(
    problem: &Problem,
    shift: SpectralShift,
    grid: &Grid,
    quadrature_step: f64,
    tolerance: f64,
) -> Result<Check> {
    let sol = solve_matched(&problem.coefficients, &problem.source, shift, grid, &MatchedOptions::default())?;
    let radius = 2.0 * problem.coefficients.perturbation_radius();
    let stride = ((radius / 24.0) / grid.h()).floor().max(1.0) as usize;
    let points = disk_nodes(grid, radius, stride);
    let rel = oracle_discrepancy(&sol.field, problem, shift, &points, quadrature_step)?;
    Ok(Check::new(
        format!("oracle {} {} n={}", problem.name, shift.label(), grid.n()),
        rel,
        Target::at_most(tolerance),
    ))
}

/// Successive differences `|u_{eps/4}(0) - u_eps(0)|` from the oracle for `f`.
pub fn origin_blowup(f: &SourceTerm, eps: &[f64], quadrature_step: f64) -> Result<Vec<f64>> {
    let a = CoefficientField::identity(f.support_radius().max(1.0));
    let values = eps
        .iter()
        .map(|&e| {
            conv_oracle(&a, f, SpectralShift::zero_energy(e)?, &[[0.0, 0.0]], quadrature_step)
                .map(|v| v[0])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(values.windows(2).map(|w| (w[1] - w[0]).norm()).collect())
}

/// The whole kernel suite in a stable order.
pub fn kernel_suite() -> Result<(Vec<Check>, Vec<Table>)> {
    let (main, companion, table) = resolvent_expansion(&[1e-2, 1e-3, 1e-4, 1e-5])?;
    Ok((
        vec![
            wronskian()?,
            branch_overlap()?,
            log_far_field()?,
            log_normal_derivative()?,
            main,
            companion,
        ],
        vec![table],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manufactured_gradient_is_consistent() {
        let d = 1e-6;
        for x in [[0.3, -0.7], [1.2, 0.9], [-1.5, 0.2]] {
            let (_, g) = manufactured_solution(x);
            let dx = (manufactured_solution([x[0] + d, x[1]]).0 - manufactured_solution([x[0] - d, x[1]]).0) / (2.0 * d);
            let dy = (manufactured_solution([x[0], x[1] + d]).0 - manufactured_solution([x[0], x[1] - d]).0) / (2.0 * d);
            assert!((g[0] - dx).abs() < 1e-8 && (g[1] - dy).abs() < 1e-8);
        }
    }

    #[test]
    fn disk_nodes_include_origin() {
        let grid = Grid::new(8.0, 129).unwrap();
        let pts = disk_nodes(&grid, 2.0, 2);
        assert!(pts.contains(&[0.0, 0.0]));
        assert!(pts.iter().all(|p| norm2(*p) <= 2.0));
    }
}

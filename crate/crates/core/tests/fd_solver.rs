use num_complex::Complex64;

use lap2d::exterior_representation::{solve_matched, MatchedOptions};
use lap2d::fd_solver::{
    assemble, conv_oracle, discrete_flux_balance, solve, BoundaryClosure, Grid, GridField,
};
use lap2d::harness::checks::{disk_nodes, oracle_discrepancy, solver_order};
use lap2d::problem_model::{builtin_problem, CoefficientField, SourceTerm, SpectralShift};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn stencil_is_exact_on_quadratics() {
    let grid = Grid::new(4.0, 65).unwrap();
    let a = CoefficientField::identity(1.0);
    let sys = assemble(&a, SpectralShift::zero_energy_limit(), &grid, BoundaryClosure::DirichletZero).unwrap();
    let u = GridField::from_fn(grid, |x| c(x[0] * x[0]));
    let lu = sys.apply_interior(&u);
    for j in 1..grid.n() - 1 {
        for i in 1..grid.n() - 1 {
            let v = lu[grid.index(i, j)];
            assert!((v - c(-2.0)).norm() < 1e-10, "({i},{j}) {v}");
        }
    }
}

#[test]
fn anisotropic_stencil_on_mixed_quadratic() {
    // a = [[2, 0.5], [0.5, 1]] on the unit disk, u = xy: -div(a grad u) = -2 a12 = -1 at the origin
    let grid = Grid::new(4.0, 65).unwrap();
    let a = CoefficientField::from_fn(1.0, 100.0, |x| {
        if lap2d::norm2(x) < 1.0 {
            [[2.0, 0.5], [0.5, 1.0]]
        } else {
            [[1.0, 0.0], [0.0, 1.0]]
        }
    });
    let sys = assemble(&a, SpectralShift::zero_energy_limit(), &grid, BoundaryClosure::DirichletZero).unwrap();
    let u = GridField::from_fn(grid, |x| c(x[0] * x[1]));
    let lu = sys.apply_interior(&u);
    let idx = grid.index(32, 32);
    assert!((lu[idx] - c(-1.0)).norm() < 1e-10, "{}", lu[idx]);
}

#[test]
fn identity_dirichlet_matrix_is_symmetric() {
    let grid = Grid::new(4.0, 65).unwrap();
    let p = builtin_problem("bump-dipole").unwrap();
    let sys = assemble(&p.coefficients, SpectralShift::zero_energy(0.1).unwrap(), &grid, BoundaryClosure::DirichletZero)
        .unwrap();
    assert!(sys.matrix().asymmetry() < 1e-12, "{}", sys.matrix().asymmetry());
}

#[test]
fn symmetric_source_gives_symmetric_field() {
    // identity-monopole is radial: u(x, y) = u(y, x) = u(-x, y)
    let grid = Grid::new(4.0, 65).unwrap();
    let p = builtin_problem("identity-monopole").unwrap();
    let sys = assemble(&p.coefficients, SpectralShift::zero_energy(0.05).unwrap(), &grid, BoundaryClosure::DirichletZero)
        .unwrap();
    let u = solve(&sys, &p.source, &grid).unwrap();
    let n = grid.n();
    for j in 0..n {
        for i in 0..n {
            assert!((u.at(i, j) - u.at(j, i)).norm() < 1e-10);
            assert!((u.at(i, j) - u.at(n - 1 - i, j)).norm() < 1e-10);
        }
    }
}

#[test]
fn manufactured_solution_converges_at_second_order() {
    for shift in [SpectralShift::zero_energy(0.01).unwrap(), SpectralShift::helmholtz(1.0, 0.01).unwrap()] {
        let (check, errors) = solver_order(shift).unwrap();
        assert!(check.passed, "{} {errors:?}", check.line());
    }
}

#[test]
fn discrete_flux_balances_source_and_absorption() {
    let grid = Grid::new(4.0, 129).unwrap();
    let p = builtin_problem("anisotropic-dipole").unwrap();
    let shift = SpectralShift::zero_energy(0.05).unwrap();
    let sys = assemble(&p.coefficients, shift, &grid, BoundaryClosure::DirichletZero).unwrap();
    let u = solve(&sys, &p.source, &grid).unwrap();
    let b = discrete_flux_balance(&p.coefficients, shift, &u, &p.source);
    let residual = b.inward_flux + b.absorption - b.source;
    assert!(residual.norm() < 1e-8 * b.absorption.norm().max(1.0), "{b:?}");
}

#[test]
fn zero_source_gives_zero_field() {
    let grid = Grid::new(4.0, 65).unwrap();
    let p = builtin_problem("bump-dipole").unwrap();
    for shift in [SpectralShift::zero_energy(0.01).unwrap(), SpectralShift::helmholtz_limit(1.0).unwrap()] {
        let u = solve_matched(&p.coefficients, &SourceTerm::zero(), shift, &grid, &MatchedOptions::default())
            .unwrap()
            .field;
        assert!(u.data().iter().all(|z| z.norm() == 0.0));
    }
}

#[test]
fn oracle_is_linear() {
    let a = CoefficientField::identity(1.0);
    // equal support radii, so all three quadratures use the same cells
    let f = SourceTerm::bump([0.3, 0.0], 0.3, 1.0);
    let g = SourceTerm::bump([0.0, -0.3], 0.3, 2.0);
    let shift = SpectralShift::helmholtz(1.0, 0.01).unwrap();
    let pts = [[0.5, 0.5], [2.0, -1.0], [0.0, 0.0]];
    let s = Complex64::new(2.0, -1.0);
    let combo = f.scaled(s).plus(&g);
    let lhs = conv_oracle(&a, &combo, shift, &pts, 0.02).unwrap();
    let uf = conv_oracle(&a, &f, shift, &pts, 0.02).unwrap();
    let ug = conv_oracle(&a, &g, shift, &pts, 0.02).unwrap();
    for j in 0..pts.len() {
        let rhs = s * uf[j] + ug[j];
        assert!((lhs[j] - rhs).norm() < 1e-9 * rhs.norm().max(1.0));
    }
}

#[test]
fn oracle_is_translation_invariant() {
    let a = CoefficientField::identity(2.0);
    let f = SourceTerm::bump([0.0, 0.0], 0.5, 1.0);
    let d = [0.25, -0.5];
    let shifted = f.translated(d);
    let shift = SpectralShift::zero_energy(0.01).unwrap();
    let pts = [[1.5, 0.25], [-2.0, 1.0]];
    let moved: Vec<_> = pts.iter().map(|p| [p[0] + d[0], p[1] + d[1]]).collect();
    let u = conv_oracle(&a, &f, shift, &pts, 0.01).unwrap();
    let v = conv_oracle(&a, &shifted, shift, &moved, 0.01).unwrap();
    // the quadrature cells do not move with the source, so agreement is at quadrature accuracy
    for (x, y) in u.iter().zip(&v) {
        assert!((x - y).norm() < 1e-6 * x.norm(), "{x} {y}");
    }
}

#[test]
fn oracle_self_converges() {
    let a = CoefficientField::identity(1.0);
    let f = SourceTerm::bump([0.0, 0.0], 0.5, 1.0);
    let shift = SpectralShift::helmholtz(1.0, 0.01).unwrap();
    let pts = [[0.0, 0.0], [1.5, 0.5]];
    let coarse = conv_oracle(&a, &f, shift, &pts, 0.02).unwrap();
    let fine = conv_oracle(&a, &f, shift, &pts, 0.01).unwrap();
    for (x, y) in coarse.iter().zip(&fine) {
        assert!((x - y).norm() < 1e-3 * y.norm(), "{x} {y}");
    }
}

#[test]
fn fd_matches_oracle_at_eps_one_hundredth() {
    let grid = Grid::new(8.0, 257).unwrap();
    let p = builtin_problem("identity-dipole").unwrap();
    for shift in [SpectralShift::zero_energy(0.01).unwrap(), SpectralShift::helmholtz(1.0, 0.01).unwrap()] {
        let u = solve_matched(&p.coefficients, &p.source, shift, &grid, &MatchedOptions::default())
            .unwrap()
            .field;
        let pts = disk_nodes(&grid, 2.0, 4);
        let rel = oracle_discrepancy(&u, &p, shift, &pts, 0.01).unwrap();
        assert!(rel < 0.01, "{} {rel}", shift.label());
    }
}

#[test]
fn solver_rejects_grid_below_four_radii() {
    let grid = Grid::new(3.0, 65).unwrap();
    let a = CoefficientField::identity(1.0);
    assert!(assemble(&a, SpectralShift::zero_energy(0.1).unwrap(), &grid, BoundaryClosure::DirichletZero).is_err());
}

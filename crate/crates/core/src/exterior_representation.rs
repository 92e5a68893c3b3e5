//! Cauchy data on circles, flux functionals and the exterior representation
//! `u(x) = -int_{S} [K(x,s) u_N(s) - K_N(x,s) u(s)] ds` for `|x|` outside the
//! circle, with `K` the free-space kernel of the shift and `N` the outward
//! normal.
//!
//! [`solve_matched`] closes the truncated problem with boundary data taken
//! from this representation of the current iterate, so the discrete solution
//! approximates the free-space one instead of the one pinned to the square.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::fd_solver::{assemble, BoundaryClosure, Grid, GridField, SolveStats};
use crate::problem_model::{CoefficientField, SourceTerm, SpectralShift};
use crate::special_functions::Kernel;
use crate::{norm2, Error, Point2, Result};

/// Samples per circle used when the caller does not choose.
pub const DEFAULT_TRACE_SAMPLES: usize = 256;

/// Values and outward normal derivatives of a field at `m` equally spaced
/// angles on a circle centered at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    radius: f64,
    values: Vec<Complex64>,
    normal_derivs: Vec<Complex64>,
}

/// `int_{S} u_N ds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxValue {
    pub value: Complex64,
}

impl BoundaryTrace {
    pub fn new(radius: f64, values: Vec<Complex64>, normal_derivs: Vec<Complex64>) -> Result<Self> {
        let m = values.len();
        if m < 64 || m % 2 != 0 {
            return Err(Error::InvalidTrace(format!("need an even sample count >= 64, got {m}")));
        }
        if normal_derivs.len() != m {
            return Err(Error::InvalidTrace(format!(
                "{m} values but {} normal derivatives",
                normal_derivs.len()
            )));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidTrace(format!("radius must be positive, got {radius}")));
        }
        if values.iter().chain(&normal_derivs).any(|z| !z.is_finite()) {
            return Err(Error::NonFinite("boundary trace"));
        }
        Ok(Self {
            radius,
            values,
            normal_derivs,
        })
    }

    /// Trace of an analytic field given its value and outward radial derivative.
    pub fn from_fn(
        radius: f64,
        m: usize,
        u: impl Fn(Point2) -> Complex64,
        u_n: impl Fn(Point2) -> Complex64,
    ) -> Result<Self> {
        let pts: Vec<Point2> = (0..m).map(|j| circle_point(radius, m, j)).collect();
        Self::new(
            radius,
            pts.iter().map(|&p| u(p)).collect(),
            pts.iter().map(|&p| u_n(p)).collect(),
        )
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..self.m()).map(|j| angle(self.m(), j)).collect()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn normal_derivs(&self) -> &[Complex64] {
        &self.normal_derivs
    }

    /// Quadrature weight `radius * 2 pi / m` of each sample.
    pub fn weight(&self) -> f64 {
        self.radius * 2.0 * PI / self.m() as f64
    }

    /// CSV with a `# radius=..., m=...` line and columns
    /// `angle,u_re,u_im,uN_re,uN_im`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# radius={}, m={}", self.radius, self.m())?;
        writeln!(w, "angle,u_re,u_im,uN_re,uN_im")?;
        for (j, (u, un)) in self.values.iter().zip(&self.normal_derivs).enumerate() {
            writeln!(w, "{},{},{},{},{}", angle(self.m(), j), u.re, u.im, un.re, un.im)?;
        }
        Ok(())
    }
}

fn angle(m: usize, j: usize) -> f64 {
    2.0 * PI * j as f64 / m as f64
}

fn circle_point(radius: f64, m: usize, j: usize) -> Point2 {
    let t = angle(m, j);
    [radius * t.cos(), radius * t.sin()]
}

/// Trace radius clear of the coefficient transition: `R + max(4h, 0.1 R)`.
pub fn default_trace_radius(perturbation_radius: f64, h: f64) -> f64 {
    perturbation_radius + (4.0 * h).max(0.1 * perturbation_radius)
}

/// Sample `field` on the circle of `radius`: bicubic values and a 4-point
/// one-sided outward difference (step `h/3`) for the normal derivative.
pub fn trace_on_circle(field: &GridField, radius: f64, m: usize) -> Result<BoundaryTrace> {
    let grid = field.grid();
    let h = grid.h();
    let too_large = || Error::RadiusTooLarge {
        radius,
        half_width: grid.half_width(),
        h,
    };
    if !(radius > 0.0) || radius + 2.0 * h > grid.half_width() {
        return Err(too_large());
    }
    if !field.is_finite() {
        return Err(Error::NonFinite("field passed to trace_on_circle"));
    }
    let delta = h / 3.0;
    const W: [f64; 4] = [-11.0 / 6.0, 3.0, -1.5, 1.0 / 3.0];
    let mut values = Vec::with_capacity(m);
    let mut normal_derivs = Vec::with_capacity(m);
    for j in 0..m {
        let t = angle(m, j);
        let dir = [t.cos(), t.sin()];
        let mut samples = [Complex64::new(0.0, 0.0); 4];
        for (q, s) in samples.iter_mut().enumerate() {
            let r = radius + q as f64 * delta;
            *s = field
                .interpolate([r * dir[0], r * dir[1]])
                .ok_or_else(too_large)?;
        }
        values.push(samples[0]);
        normal_derivs.push(samples.iter().zip(W).map(|(s, w)| s * w).sum::<Complex64>() / delta);
    }
    BoundaryTrace::new(radius, values, normal_derivs)
}

/// Periodic trapezoid rule for `int_{S} u_N ds`.
pub fn flux(trace: &BoundaryTrace) -> FluxValue {
    let sum: Complex64 = trace.normal_derivs.iter().sum();
    FluxValue {
        value: sum * trace.weight(),
    }
}

/// Flux through each circle of `radii`.
pub fn flux_conservation(field: &GridField, radii: &[f64]) -> Result<Vec<FluxValue>> {
    radii
        .iter()
        .map(|&r| trace_on_circle(field, r, DEFAULT_TRACE_SAMPLES).map(|t| flux(&t)))
        .collect()
}

/// Representation of the exterior field at `x`, `|x| > trace.radius()`.
pub fn exterior_eval(trace: &BoundaryTrace, x: Point2, shift: SpectralShift) -> Result<Complex64> {
    let kernel = shift.kernel()?;
    exterior_eval_with(trace, x, kernel, false).map(|(u, _)| u)
}

/// [`exterior_eval`] at many points.
pub fn exterior_eval_many(
    trace: &BoundaryTrace,
    points: &[Point2],
    shift: SpectralShift,
) -> Result<Vec<Complex64>> {
    let kernel = shift.kernel()?;
    points
        .par_iter()
        .map(|&x| exterior_eval_with(trace, x, kernel, false).map(|(u, _)| u))
        .collect()
}

/// Value and, when `with_gradient`, the gradient of the representation.
fn exterior_eval_with(
    trace: &BoundaryTrace,
    x: Point2,
    kernel: Kernel,
    with_gradient: bool,
) -> Result<(Complex64, [Complex64; 2])> {
    let r = norm2(x);
    if !(r > trace.radius) {
        return Err(Error::PointInside {
            r,
            radius: trace.radius,
        });
    }
    let m = trace.m();
    let zero = Complex64::new(0.0, 0.0);
    let (mut u, mut gx, mut gy) = (zero, zero, zero);
    for j in 0..m {
        let t = angle(m, j);
        let normal = [t.cos(), t.sin()];
        let s = [trace.radius * normal[0], trace.radius * normal[1]];
        let k = kernel.sample(x, s, normal)?;
        let (v, vn) = (trace.values[j], trace.normal_derivs[j]);
        u += k.value * vn - k.normal_deriv * v;
        if with_gradient {
            gx += k.grad_x[0] * vn - k.normal_deriv_grad_x[0] * v;
            gy += k.grad_x[1] * vn - k.normal_deriv_grad_x[1] * v;
        }
    }
    let w = -trace.weight();
    Ok((u * w, [gx * w, gy * w]))
}

/// `int_{S_r} |dw/dr - i k w|^2 ds` for each `r` in `radii`.
pub fn radiation_residual(field: &GridField, k: f64, radii: &[f64]) -> Result<Vec<f64>> {
    if !(k > 0.0) {
        return Err(Error::InvalidShift(format!("radiation residual needs k > 0, got {k}")));
    }
    let ik = Complex64::new(0.0, k);
    radii
        .iter()
        .map(|&r| {
            let t = trace_on_circle(field, r, DEFAULT_TRACE_SAMPLES)?;
            let sum: f64 = t
                .values
                .iter()
                .zip(&t.normal_derivs)
                .map(|(u, un)| (un - ik * u).norm_sqr())
                .sum();
            Ok(sum * t.weight())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedOptions {
    pub trace_samples: usize,
    /// Stop when the boundary data changes by less than this, relative.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for MatchedOptions {
    fn default() -> Self {
        Self {
            trace_samples: DEFAULT_TRACE_SAMPLES,
            tolerance: 1e-7,
            max_iterations: 12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MatchedSolution {
    pub field: GridField,
    pub trace_radius: f64,
    pub closure: BoundaryClosure,
    /// Linear solves performed.
    pub outer_iterations: usize,
    /// Relative change of the boundary data in the last iteration.
    pub boundary_change: f64,
    pub last_solve: SolveStats,
}

/// Closure used by [`solve_matched`]: Robin for the Helmholtz shifts (a pure
/// Dirichlet square can sit on an interior eigenvalue), Dirichlet otherwise.
pub fn matched_closure(shift: SpectralShift) -> Result<BoundaryClosure> {
    if shift.is_helmholtz() {
        BoundaryClosure::robin(shift.k)
    } else {
        Ok(BoundaryClosure::DirichletZero)
    }
}

/// Solve `(L + sigma) u = f` on `grid` with boundary data from the exterior
/// representation of the previous iterate, starting from zero data.
pub fn solve_matched(
    a: &CoefficientField,
    f: &SourceTerm,
    shift: SpectralShift,
    grid: &Grid,
    opts: &MatchedOptions,
) -> Result<MatchedSolution> {
    let closure = matched_closure(shift)?;
    let system = assemble(a, shift, grid, closure)?;
    let factors = system.factor()?;
    let kernel = shift.kernel()?;
    let radius = default_trace_radius(a.perturbation_radius().max(f.support_radius()), grid.h());
    let f_nodes = crate::fd_solver::sample_source(f, grid);
    let nodes: Vec<Point2> = system.boundary_nodes().iter().map(|&b| grid.node(b)).collect();

    let mut data = vec![Complex64::new(0.0, 0.0); nodes.len()];
    let mut change = f64::INFINITY;
    for iteration in 1..=opts.max_iterations {
        let rhs = system.rhs_from_samples(&f_nodes, Some(&data));
        let (u, stats) = factors.solve(&rhs, None)?;
        let field = GridField::new(*grid, u);
        if !field.is_finite() {
            return Err(Error::NonFinite("matched solve"));
        }
        if change <= opts.tolerance {
            return Ok(MatchedSolution {
                field,
                trace_radius: radius,
                closure,
                outer_iterations: iteration,
                boundary_change: change,
                last_solve: stats,
            });
        }
        let trace = trace_on_circle(&field, radius, opts.trace_samples)?;
        let next = boundary_data(&trace, &nodes, kernel, closure)?;
        let norm: f64 = next.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let diff: f64 = next
            .iter()
            .zip(&data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        change = if norm > 0.0 { diff / norm } else { 0.0 };
        data = next;
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iterations,
        residual: change,
    })
}

/// Dirichlet values or Robin data `du/dr - beta u` of the representation at `nodes`.
fn boundary_data(
    trace: &BoundaryTrace,
    nodes: &[Point2],
    kernel: Kernel,
    closure: BoundaryClosure,
) -> Result<Vec<Complex64>> {
    nodes
        .par_iter()
        .map(|&x| match closure {
            BoundaryClosure::DirichletZero => exterior_eval_with(trace, x, kernel, false).map(|(u, _)| u),
            BoundaryClosure::RobinRadiation { k } => {
                let (u, g) = exterior_eval_with(trace, x, kernel, true)?;
                let r = norm2(x);
                let du_dr = (g[0] * x[0] + g[1] * x[1]) / r;
                Ok(du_dr - BoundaryClosure::robin_impedance(k, r) * u)
            }
        })
        .collect()
}

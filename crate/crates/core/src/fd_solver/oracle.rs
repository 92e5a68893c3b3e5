use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::problem_model::{CoefficientField, SourceTerm, SpectralShift};
use crate::special_functions::{hankel1_1, Kernel};
use crate::{Error, Point2, Result};

/// `int_{|y| < rho} K(0, y) dy` for the kernel `K`.
pub fn disk_integral(kernel: Kernel, rho: f64) -> Result<Complex64> {
    Ok(match kernel {
        Kernel::Laplace => Complex64::new(-0.5 * rho * rho * rho.ln() + 0.25 * rho * rho, 0.0),
        Kernel::Helmholtz(k) => {
            // (i/4) int_0^rho H0(kr) 2 pi r dr = (i pi rho / (2k)) H1(k rho) - 1/k^2
            let k = k.value();
            let h1 = hankel1_1(k * rho)?;
            Complex64::i() * PI * rho / (2.0 * k) * h1 - (k * k).inv()
        }
    })
}

/// Constant-coefficient solution `u(x) = int g(x, y) f(y) dy` by midpoint
/// quadrature over the support square of `f`, with the kernel of `shift`.
///
/// A quadrature cell whose center coincides with an evaluation point
/// contributes `f` times the kernel integral over the equal-area disk.
pub fn conv_oracle(
    a: &CoefficientField,
    f: &SourceTerm,
    shift: SpectralShift,
    eval_points: &[Point2],
    quadrature_step: f64,
) -> Result<Vec<Complex64>> {
    if !a.is_identity() {
        return Err(Error::OracleMisuse);
    }
    let kernel = shift.kernel()?;
    let (nodes, h) = f.quadrature_nodes(quadrature_step);
    let mut samples = Vec::new();
    for &y in &nodes {
        for &x in &nodes {
            let v = f.eval([x, y]);
            if v.norm() != 0.0 {
                samples.push(([x, y], v * (h * h)));
            }
        }
    }
    let self_cell = disk_integral(kernel, h / PI.sqrt())? / (h * h);
    let coincide = 1e-12 * h;
    eval_points
        .par_iter()
        .map(|&p| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(y, w) in &samples {
                let d = (p[0] - y[0]).hypot(p[1] - y[1]);
                if d <= coincide {
                    acc += w * self_cell;
                } else {
                    acc += w * kernel.value(p, y)?;
                }
            }
            Ok(acc)
        })
        .collect()
}

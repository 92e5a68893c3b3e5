use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bessel::{hankel1_01, EULER_GAMMA};
use crate::{Error, Point2, Result};

const INV_2PI: f64 = 1.0 / (2.0 * PI);

/// Wave number of a kernel. Always nonzero with `Im k >= 0`, the branch on
/// which `(i/4) H0(k r)` is the outgoing (or square-integrable) solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveNumber(Complex64);

impl WaveNumber {
    pub fn new(value: Complex64) -> Result<Self> {
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::InvalidWaveNumber(format!("{value} is not finite")));
        }
        if value.norm() == 0.0 {
            return Err(Error::InvalidWaveNumber("k must be nonzero".into()));
        }
        if value.im < 0.0 {
            return Err(Error::InvalidWaveNumber(format!(
                "{value} has negative imaginary part"
            )));
        }
        Ok(Self(value))
    }

    pub fn real(k: f64) -> Result<Self> {
        Self::new(Complex64::new(k, 0.0))
    }

    /// The root of `k^2 = k2` with `Im k >= 0`.
    pub fn from_square(k2: Complex64) -> Result<Self> {
        let mut k = k2.sqrt();
        if k.im < 0.0 || (k.im == 0.0 && k.re < 0.0) {
            k = -k;
        }
        Self::new(k)
    }

    pub fn value(self) -> Complex64 {
        self.0
    }
}

/// `k_eps = sqrt(eps) e^{3 pi i/4}`: the root of `k^2 = -i eps` in the upper half-plane.
pub fn regularized_wave_number(eps: f64) -> Result<WaveNumber> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::NonPositiveEps(eps));
    }
    WaveNumber::new(Complex64::from_polar(eps.sqrt(), 0.75 * PI))
}

fn separation(x: Point2, y: Point2) -> Result<(Point2, f64)> {
    let d = [x[0] - y[0], x[1] - y[1]];
    let r = d[0].hypot(d[1]);
    if r == 0.0 {
        return Err(Error::CoincidentPoints { x: x[0], y: x[1] });
    }
    Ok((d, r))
}

/// `(1/2pi) ln(1/|x - y|)`.
pub fn log_green(x: Point2, y: Point2) -> Result<f64> {
    let (_, r) = separation(x, y)?;
    Ok(-INV_2PI * r.ln())
}

/// Derivative of `log_green(x, .)` at `s` in the direction `normal`.
pub fn log_green_normal_deriv(x: Point2, s: Point2, normal: Point2) -> Result<f64> {
    let (d, r) = separation(x, s)?;
    Ok(INV_2PI * (d[0] * normal[0] + d[1] * normal[1]) / (r * r))
}

/// `(i/4) H0(k |x - y|)`.
pub fn helmholtz_green(x: Point2, y: Point2, k: WaveNumber) -> Result<Complex64> {
    let (_, r) = separation(x, y)?;
    let (h0, _) = hankel1_01(k.value() * r)?;
    Ok(Complex64::i() * 0.25 * h0)
}

/// Resolvent kernel of `-Laplacian + i eps`.
pub fn regularized_green(x: Point2, y: Point2, eps: f64) -> Result<Complex64> {
    helmholtz_green(x, y, regularized_wave_number(eps)?)
}

/// `alpha(eps) = -(1/2pi)(ln(k_eps/2) + gamma) + i/4`, the additive constant
/// for which `g_eps - alpha(eps)` tends to `g0` on compact sets away from the diagonal.
pub fn alpha(eps: f64) -> Result<Complex64> {
    let k = regularized_wave_number(eps)?.value();
    Ok(-((k * 0.5).ln() + EULER_GAMMA) * INV_2PI + Complex64::i() * 0.25)
}

/// A free-space kernel together with the derivatives needed by the
/// single/double-layer representation and by Robin boundary data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Kernel {
    Laplace,
    Helmholtz(WaveNumber),
}

/// Kernel data at a pair `(x, s)` with a unit vector `normal` attached to `s`.
#[derive(Debug, Clone, Copy)]
pub struct KernelSample {
    pub value: Complex64,
    /// Gradient of the value with respect to `x`.
    pub grad_x: [Complex64; 2],
    /// Derivative with respect to `s` along `normal`.
    pub normal_deriv: Complex64,
    /// Gradient of `normal_deriv` with respect to `x`.
    pub normal_deriv_grad_x: [Complex64; 2],
}

impl Kernel {
    pub fn value(&self, x: Point2, y: Point2) -> Result<Complex64> {
        match *self {
            Kernel::Laplace => log_green(x, y).map(Complex64::from),
            Kernel::Helmholtz(k) => helmholtz_green(x, y, k),
        }
    }

    pub fn sample(&self, x: Point2, s: Point2, normal: Point2) -> Result<KernelSample> {
        let (d, r) = separation(x, s)?;
        let dn = d[0] * normal[0] + d[1] * normal[1];
        let sample = match *self {
            Kernel::Laplace => {
                let r2 = r * r;
                let g = INV_2PI / r2;
                let c = |v: f64| Complex64::new(v, 0.0);
                KernelSample {
                    value: c(-INV_2PI * r.ln()),
                    grad_x: [c(-g * d[0]), c(-g * d[1])],
                    normal_deriv: c(g * dn),
                    normal_deriv_grad_x: [
                        c(g * (normal[0] - 2.0 * d[0] * dn / r2)),
                        c(g * (normal[1] - 2.0 * d[1] * dn / r2)),
                    ],
                }
            }
            Kernel::Helmholtz(k) => {
                let k = k.value();
                let z = k * r;
                let (h0, h1) = hankel1_01(z)?;
                let quarter_i = Complex64::i() * 0.25;
                // phi(r) = (i/4) k H1(kr) / r, normal_deriv = phi (d . N)
                let phi = quarter_i * k * h1 / r;
                let h1_prime = h0 - h1 / z;
                let phi_prime = quarter_i * k * (k * h1_prime / r - h1 / (r * r));
                KernelSample {
                    value: quarter_i * h0,
                    grad_x: [-phi * d[0], -phi * d[1]],
                    normal_deriv: phi * dn,
                    normal_deriv_grad_x: [
                        phi_prime * (d[0] / r) * dn + phi * normal[0],
                        phi_prime * (d[1] / r) * dn + phi * normal[1],
                    ],
                }
            }
        };
        Ok(sample)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn log_green_values() {
        assert_eq!(log_green([0.0, 0.0], [1.0, 0.0]).unwrap(), 0.0);
        assert!((log_green([0.0, 0.0], [E, 0.0]).unwrap() + INV_2PI).abs() < 1e-15);
        let v = log_green([3.0, 4.0], [0.0, 0.0]).unwrap();
        assert!((v + 0.256_149_999_363_388_06).abs() < 1e-12);
        assert!(matches!(
            log_green([1.0, 2.0], [1.0, 2.0]),
            Err(Error::CoincidentPoints { .. })
        ));
    }

    #[test]
    fn log_green_normal_derivative() {
        let v = log_green_normal_deriv([2.0, 0.0], [1.0, 0.0], [1.0, 0.0]).unwrap();
        assert!((v - INV_2PI).abs() < 1e-15);

        // finite-difference oracle
        let (x, s, n) = ([0.0, 2.0], [1.0, 0.0], [0.0, 1.0]);
        let h = 1e-5;
        let fd = (log_green(x, [s[0], s[1] + h]).unwrap() - log_green(x, [s[0], s[1] - h]).unwrap())
            / (2.0 * h);
        let v = log_green_normal_deriv(x, s, n).unwrap();
        assert!((v - fd).abs() / v.abs() < 1e-8);

        // perpendicular normal
        let v = log_green_normal_deriv([3.0, 1.0], [1.0, 1.0], [0.0, 1.0]).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn wave_number_branch() {
        let k = regularized_wave_number(0.04).unwrap().value();
        assert!(k.im > 0.0);
        assert!((k * k + Complex64::new(0.0, 0.04)).norm() < 1e-15);
        assert!(regularized_wave_number(0.0).is_err());
        assert!(regularized_wave_number(-1.0).is_err());
        assert!(WaveNumber::new(Complex64::new(1.0, -0.1)).is_err());
        let k = WaveNumber::from_square(Complex64::new(1.0, 0.1)).unwrap().value();
        assert!(k.im > 0.0 && k.re > 0.0);
    }

    #[test]
    fn helmholtz_symmetric_and_decaying() {
        let k = WaveNumber::new(Complex64::new(1.0, 0.3)).unwrap();
        let (x, y) = ([0.3, -1.2], [2.5, 0.7]);
        assert_eq!(
            helmholtz_green(x, y, k).unwrap(),
            helmholtz_green(y, x, k).unwrap()
        );
        // |G| <= C e^{-Im(k) r / 2} for r >= 10/|k|
        for &r in &[10.0, 30.0, 100.0, 300.0] {
            let g = helmholtz_green([r, 0.0], [0.0, 0.0], k).unwrap();
            assert!(g.norm() <= (-0.3 * r / 2.0).exp());
        }
    }

    #[test]
    fn regularized_green_tail_is_negligible() {
        let eps = 1e-2;
        let g = regularized_green([0.0, 0.0], [1000.0, 0.0], eps).unwrap();
        assert!(g.norm() < 1e-12);
        assert!(regularized_green([0.0, 0.0], [1.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn alpha_asymptotics() {
        for &eps in &[1e-4, 1e-8, 1e-12] {
            let a = alpha(eps).unwrap();
            let lead = (1.0 / eps).ln() / (4.0 * PI);
            // Re alpha = ln(1/eps)/(4pi) + (ln 2 - gamma)/(2pi)
            assert!((a.re - lead - (2f64.ln() - EULER_GAMMA) * INV_2PI).abs() < 1e-12);
            assert!((a.im + 0.125).abs() < 1e-15);
        }
        let mut prev = alpha(1.0).unwrap().re;
        for j in 1..40 {
            let cur = alpha(0.5f64.powi(j)).unwrap().re;
            assert!(cur > prev);
            prev = cur;
        }
        assert!(alpha(0.0).is_err());
    }

    #[test]
    fn regularized_minus_alpha_tends_to_log_kernel() {
        // at |x - y| = 1, g0 = 0
        let mut prev = f64::INFINITY;
        for &eps in &[1e-2, 1e-3, 1e-4, 1e-5, 1e-6] {
            let diff = regularized_green([0.0, 0.0], [1.0, 0.0], eps).unwrap() - alpha(eps).unwrap();
            assert!(diff.norm() < prev);
            prev = diff.norm();
        }
        assert!(prev < 1e-5);
    }

    fn fd_grad(kernel: Kernel, x: Point2, y: Point2) -> [Complex64; 2] {
        let h = 1e-5;
        let f = |p: Point2| kernel.value(p, y).unwrap();
        [
            (f([x[0] + h, x[1]]) - f([x[0] - h, x[1]])) / (2.0 * h),
            (f([x[0], x[1] + h]) - f([x[0], x[1] - h])) / (2.0 * h),
        ]
    }

    #[test]
    fn kernel_sample_derivatives_match_finite_differences() {
        let kernels = [
            Kernel::Laplace,
            Kernel::Helmholtz(WaveNumber::real(1.3).unwrap()),
            Kernel::Helmholtz(regularized_wave_number(0.2).unwrap()),
        ];
        let (x, s) = ([2.1, -0.7], [0.6, 0.8]);
        let n = [0.6, 0.8];
        let h = 1e-5;
        for kernel in kernels {
            let smp = kernel.sample(x, s, n).unwrap();
            let g = fd_grad(kernel, x, s);
            for i in 0..2 {
                assert!((smp.grad_x[i] - g[i]).norm() < 1e-8, "{kernel:?}");
            }
            // d/ds along n equals -(grad_x . n) for a translation-invariant kernel
            let dn = -(g[0] * n[0] + g[1] * n[1]);
            assert!((smp.normal_deriv - dn).norm() < 1e-8);
            let nd = |p: Point2| kernel.sample(p, s, n).unwrap().normal_deriv;
            let gx = (nd([x[0] + h, x[1]]) - nd([x[0] - h, x[1]])) / (2.0 * h);
            let gy = (nd([x[0], x[1] + h]) - nd([x[0], x[1] - h])) / (2.0 * h);
            assert!((smp.normal_deriv_grad_x[0] - gx).norm() < 1e-7);
            assert!((smp.normal_deriv_grad_x[1] - gy).norm() < 1e-7);
        }
    }
}

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::{Error, Result};

/// Euler-Mascheroni constant to 20 significant digits.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;

/// Radius in `|z|` at which evaluation switches from the ascending series to
/// the large-argument Hankel expansion.
pub const SERIES_CROSSOVER: f64 = 12.0;

const SERIES_MAX_TERMS: usize = 200;
const ASYMPTOTIC_MAX_TERMS: usize = 40;

fn check_argument(z: Complex64) -> Result<()> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::NonFinite("hankel argument"));
    }
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::ZeroArgument);
    }
    if z.im < 0.0 {
        return Err(Error::LowerHalfPlane { re: z.re, im: z.im });
    }
    Ok(())
}

fn check_finite(pair: (Complex64, Complex64)) -> Result<(Complex64, Complex64)> {
    let ok = |c: Complex64| c.re.is_finite() && c.im.is_finite();
    if ok(pair.0) && ok(pair.1) {
        Ok(pair)
    } else {
        Err(Error::NonFinite("hankel evaluation"))
    }
}

/// `(H0(z), H1(z))` of the first kind, `Im z >= 0`, `z != 0`.
pub fn hankel1_01(z: Complex64) -> Result<(Complex64, Complex64)> {
    check_argument(z)?;
    let pair = if z.norm() <= SERIES_CROSSOVER {
        series_pair(z)
    } else {
        asymptotic_pair(z)
    };
    check_finite(pair)
}

pub fn hankel1_0(z: Complex64) -> Result<Complex64> {
    hankel1_01(z).map(|(h0, _)| h0)
}

pub fn hankel1_1(z: Complex64) -> Result<Complex64> {
    hankel1_01(z).map(|(_, h1)| h1)
}

/// Ascending-series branch, regardless of `|z|`. Exposed for branch-overlap checks.
pub fn hankel1_01_series(z: Complex64) -> Result<(Complex64, Complex64)> {
    check_argument(z)?;
    check_finite(series_pair(z))
}

/// Large-argument branch, regardless of `|z|`. Exposed for branch-overlap checks.
pub fn hankel1_01_asymptotic(z: Complex64) -> Result<(Complex64, Complex64)> {
    check_argument(z)?;
    check_finite(asymptotic_pair(z))
}

/// `(J0, Y0, J1, Y1)` at a positive real argument.
pub fn j0y0_j1y1(x: f64) -> Result<(f64, f64, f64, f64)> {
    if !(x > 0.0) {
        return Err(Error::ZeroArgument);
    }
    let (h0, h1) = hankel1_01(Complex64::new(x, 0.0))?;
    Ok((h0.re, h0.im, h1.re, h1.im))
}

/// Power series for J0, J1, Y0, Y1 combined into H0 = J0 + iY0, H1 = J1 + iY1.
///
/// With q = z^2/4:
///   J0 = sum (-q)^m / (m!)^2
///   J1 = (z/2) sum (-q)^m / (m! (m+1)!)
///   Y0 = (2/pi) [ (ln(z/2) + gamma) J0 - sum_{m>=1} H_m (-q)^m / (m!)^2 ]
///   Y1 = (2/pi) (ln(z/2) + gamma) J1 - 2/(pi z)
///        - (1/pi)(z/2) sum (H_m + H_{m+1}) (-q)^m / (m! (m+1)!)
/// where H_m is the m-th harmonic number.
fn series_pair(z: Complex64) -> (Complex64, Complex64) {
    let half = z * 0.5;
    let neg_q = -(half * half);

    let mut t0 = Complex64::new(1.0, 0.0); // (-q)^m / (m!)^2
    let mut t1 = Complex64::new(1.0, 0.0); // (-q)^m / (m! (m+1)!)
    let mut j0 = t0;
    let mut j1_sum = t1;
    let mut y0_sum = Complex64::new(0.0, 0.0);
    let mut y1_sum = t1; // H_0 + H_1 = 1
    let mut harmonic = 0.0; // H_m

    for m in 1..SERIES_MAX_TERMS {
        let mf = m as f64;
        t0 = t0 * neg_q / (mf * mf);
        t1 = t1 * neg_q / (mf * (mf + 1.0));
        harmonic += 1.0 / mf;
        let harmonic_next = harmonic + 1.0 / (mf + 1.0);

        j0 += t0;
        j1_sum += t1;
        y0_sum += t0 * harmonic;
        y1_sum += t1 * (harmonic + harmonic_next);

        let scale = j0.norm() + j1_sum.norm() + y0_sum.norm() + y1_sum.norm();
        if mf * mf > neg_q.norm() && t0.norm() * harmonic_next <= 1e-18 * scale {
            break;
        }
    }

    let log_term = (half).ln() + EULER_GAMMA;
    let j1 = half * j1_sum;
    let y0 = (log_term * j0 - y0_sum) * (2.0 / PI);
    let y1 = log_term * j1 * (2.0 / PI) - (z * PI).inv() * 2.0 - half * y1_sum / PI;

    let i = Complex64::i();
    (j0 + i * y0, j1 + i * y1)
}

/// Hankel large-argument expansion
///   H_nu(z) ~ sqrt(2/(pi z)) e^{i(z - nu pi/2 - pi/4)} sum_k i^k a_k(nu) / z^k,
///   a_k(nu) = prod_{j<=k} (4 nu^2 - (2j-1)^2) / (8 j),
/// truncated at the smallest term.
fn asymptotic_pair(z: Complex64) -> (Complex64, Complex64) {
    let prefactor = (Complex64::new(2.0 / PI, 0.0) / z).sqrt();
    let h0 = prefactor * (Complex64::i() * (z - FRAC_PI_4)).exp() * asymptotic_sum(z, 0.0);
    let h1 = prefactor * (Complex64::i() * (z - 3.0 * FRAC_PI_4)).exp() * asymptotic_sum(z, 4.0);
    (h0, h1)
}

fn asymptotic_sum(z: Complex64, mu: f64) -> Complex64 {
    let i_over_z = Complex64::i() / z;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut last = f64::INFINITY;
    for k in 1..=ASYMPTOTIC_MAX_TERMS {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = term * i_over_z * ((mu - odd * odd) / (8.0 * kf));
        let size = next.norm();
        if size >= last {
            break;
        }
        sum += next;
        term = next;
        last = size;
        if size <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_zero_and_lower_half_plane() {
        assert!(matches!(hankel1_0(c(0.0, 0.0)), Err(Error::ZeroArgument)));
        assert!(matches!(
            hankel1_1(c(1.0, -0.5)),
            Err(Error::LowerHalfPlane { .. })
        ));
        assert!(hankel1_0(c(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn values_at_one() {
        let (j0, y0, j1, y1) = j0y0_j1y1(1.0).unwrap();
        assert!((j0 - 0.765_197_686_557_966_6).abs() < 1e-13);
        assert!((y0 - 0.088_256_964_215_676_96).abs() < 1e-13);
        assert!((j1 - 0.440_050_585_744_933_5).abs() < 1e-13);
        assert!((y1 + 0.781_212_821_300_288_7).abs() < 1e-13);
    }

    #[test]
    fn small_argument_limit() {
        // (i/4) H0(z) + (1/2pi)(ln(z/2) + gamma) - i/4 -> 0
        for &r in &[1e-2, 1e-4, 1e-6] {
            for &arg in &[0.0, 0.7, 2.3] {
                let z = Complex64::from_polar(r, arg);
                let h0 = hankel1_0(z).unwrap();
                let resid = Complex64::i() * 0.25 * h0
                    + ((z * 0.5).ln() + EULER_GAMMA) / (2.0 * PI)
                    - Complex64::i() * 0.25;
                assert!(resid.norm() < 2.0 * r * r * (1.0 + r.ln().abs()), "r={r} {resid}");
            }
        }
    }

    #[test]
    fn large_argument_leading_term() {
        let x = 50.0;
        let h0 = hankel1_0(c(x, 0.0)).unwrap();
        let lead = (2.0 / (PI * x)).sqrt() * Complex64::i().scale(x - FRAC_PI_4).exp();
        // the first correction term has relative size 1/(8x)
        let rel = (h0 - lead).norm() / lead.norm();
        assert!((rel - 1.0 / (8.0 * x)).abs() < 1e-5, "{rel}");
        let x = 200.0;
        let h0 = hankel1_0(c(x, 0.0)).unwrap();
        let lead = (2.0 / (PI * x)).sqrt() * Complex64::i().scale(x - FRAC_PI_4).exp();
        assert!((h0 - lead).norm() / lead.norm() < 1e-3);
    }

    #[test]
    fn branches_agree_on_overlap_annulus() {
        for step in 0..=40 {
            let r = 12.0 + 0.05 * step as f64;
            for &im in &[0.0, 0.25, 0.5] {
                let z = c((r * r - im * im).sqrt(), im);
                let (s0, s1) = hankel1_01_series(z).unwrap();
                let (a0, a1) = hankel1_01_asymptotic(z).unwrap();
                assert!((s0 - a0).norm() / a0.norm() < 1e-9, "H0 at {z}");
                assert!((s1 - a1).norm() / a1.norm() < 1e-9, "H1 at {z}");
            }
        }
    }

    #[test]
    fn decays_in_upper_half_plane() {
        let z = c(3.0, 30.0);
        let h0 = hankel1_0(z).unwrap();
        assert!(h0.norm() < 1e-12);
        let far = hankel1_0(c(0.0, 2000.0)).unwrap();
        assert_eq!(far.norm(), 0.0);
    }
}

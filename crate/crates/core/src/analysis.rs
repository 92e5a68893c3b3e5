//! Weighted norms, power-law decay fits and convergence ladders.
//!
//! Norms of fields on the plane are taken over the computational square.

use serde::{Deserialize, Serialize};

use crate::fd_solver::GridField;
use crate::{norm2, Error, Point2, Result};

/// Log-log fits with an RMS residual above this are not power laws.
pub const LOG_RESIDUAL_THRESHOLD: f64 = 5e-3;
/// Fitted exponents below this are treated as non-decaying.
pub const MIN_DECAY_EXPONENT: f64 = 0.05;
/// Rays used by decay fits unless the caller chooses otherwise.
pub const DEFAULT_DIRECTIONS: usize = 16;
const RADIAL_SAMPLES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedNorms {
    /// `max (1 + |x|) |u|`.
    pub sup_weighted: f64,
    /// `max (1 + |x|^{1/2}) |u|`.
    pub sup_weighted_half: f64,
    /// `(int |u|^2 / (1 + |x|^b) dx)^{1/2}`.
    pub l2_minus_b: f64,
    pub b: f64,
}

fn check_b(b: f64) -> Result<()> {
    if b > 1.0 && b.is_finite() {
        Ok(())
    } else {
        Err(Error::WeightExponent(b))
    }
}

/// All three norms over the grid nodes; the integral uses the node rule `h^2 sum`.
pub fn compute_norms(field: &GridField, b: f64) -> Result<WeightedNorms> {
    check_b(b)?;
    let grid = field.grid();
    let mut out = WeightedNorms {
        sup_weighted: 0.0,
        sup_weighted_half: 0.0,
        l2_minus_b: 0.0,
        b,
    };
    let mut acc = 0.0;
    for (idx, u) in field.data().iter().enumerate() {
        let r = norm2(grid.node(idx));
        let a = u.norm();
        out.sup_weighted = out.sup_weighted.max((1.0 + r) * a);
        out.sup_weighted_half = out.sup_weighted_half.max((1.0 + r.sqrt()) * a);
        acc += a * a / (1.0 + r.powf(b));
    }
    out.l2_minus_b = (acc * grid.h() * grid.h()).sqrt();
    Ok(out)
}

/// Fitted law `|u| ~ prefactor * |x|^{-exponent}` on `fit_window`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub fit_window: (f64, f64),
    /// RMS residual of the log-log least-squares line.
    pub residual: f64,
    /// Residual or exponent says the field is not a decaying power law
    /// (e.g. `ln(1/|x|)`).
    pub logarithmic: bool,
}

/// Decay fit of a grid field; see [`fit_decay_fn`].
pub fn fit_decay(field: &GridField, window: (f64, f64), directions: usize) -> Result<DecayFit> {
    let grid = field.grid();
    let limit = grid.half_width() - 2.0 * grid.h();
    if window.1 > limit {
        return Err(Error::InvalidWindow(format!(
            "window end {} beyond usable half width {limit}",
            window.1
        )));
    }
    let mut missing = false;
    let fit = fit_decay_fn(
        |p| {
            field.interpolate(p).map(|z| z.norm()).unwrap_or_else(|| {
                missing = true;
                f64::NAN
            })
        },
        window,
        directions,
    );
    if missing {
        return Err(Error::InvalidWindow("window leaves the grid".into()));
    }
    fit
}

/// `(r, m(r))` where `m(r)` is the RMS of `|u|` over `directions` equally
/// spaced rays, at 32 geometrically spaced radii of `window`.
pub fn radial_profile(
    mut abs_u: impl FnMut(Point2) -> f64,
    window: (f64, f64),
    directions: usize,
) -> Result<Vec<(f64, f64)>> {
    let (r0, r1) = window;
    if !(r0 > 0.0 && r1 > r0 && r1.is_finite()) {
        return Err(Error::InvalidWindow(format!("need 0 < r0 < r1, got [{r0}, {r1}]")));
    }
    if directions == 0 {
        return Err(Error::InvalidWindow("at least one direction".into()));
    }
    (0..RADIAL_SAMPLES)
        .map(|q| {
            let r = r0 * (r1 / r0).powf(q as f64 / (RADIAL_SAMPLES - 1) as f64);
            let mut acc = 0.0;
            for d in 0..directions {
                // offset by half a step so no ray lies on a grid axis
                let t = 2.0 * std::f64::consts::PI * (d as f64 + 0.5) / directions as f64;
                let v = abs_u([r * t.cos(), r * t.sin()]);
                acc += v * v;
            }
            let rms = (acc / directions as f64).sqrt();
            if !rms.is_finite() {
                return Err(Error::NonFinite("decay fit samples"));
            }
            Ok((r, rms))
        })
        .collect()
}

/// Least-squares slope of `ln m(r)` against `ln r` for the profile of
/// [`radial_profile`]. Averaging before taking logs keeps nodal lines of the
/// field (e.g. the axis of a dipole) out of the fit.
pub fn fit_decay_fn(
    abs_u: impl FnMut(Point2) -> f64,
    window: (f64, f64),
    directions: usize,
) -> Result<DecayFit> {
    fit_profile(&radial_profile(abs_u, window, directions)?, window)
}

/// Log-log least squares on `(r, m)` samples.
pub fn fit_profile(profile: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    if profile.len() < 2 {
        return Err(Error::InvalidWindow("need at least two samples".into()));
    }
    if profile.iter().any(|&(_, m)| m <= 0.0) {
        return Err(Error::VanishingField);
    }
    let xs: Vec<f64> = profile.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = profile.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let exponent = -slope;
    Ok(DecayFit {
        exponent,
        prefactor: intercept.exp(),
        fit_window: window,
        residual,
        logarithmic: residual > LOG_RESIDUAL_THRESHOLD || exponent < MIN_DECAY_EXPONENT,
    })
}

/// The norm a ladder measures successive differences in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NormKind {
    /// `max (1 + |x|) |d|` over nodes with `|x| <= radius`.
    Weighted { radius: f64 },
    /// `max (1 + |x|^{1/2}) |d|` over nodes with `|x| <= radius`.
    WeightedHalf { radius: f64 },
    /// `(int |d|^2 / (1 + |x|^b))^{1/2}` over the square.
    MinusB { b: f64 },
    /// `max |x|^{1/2} |d|` over nodes with `inner <= |x| <= outer`.
    HalfAnnulus { inner: f64, outer: f64 },
    /// `|d(point)|`, interpolated.
    PointValue { point: Point2 },
}

impl NormKind {
    pub fn eval(&self, field: &GridField) -> Result<f64> {
        let grid = field.grid();
        let sup = |weight: &dyn Fn(f64) -> Option<f64>| {
            field
                .data()
                .iter()
                .enumerate()
                .filter_map(|(idx, u)| weight(norm2(grid.node(idx))).map(|w| w * u.norm()))
                .fold(0.0, f64::max)
        };
        Ok(match *self {
            NormKind::Weighted { radius } => sup(&|r| (r <= radius).then(|| 1.0 + r)),
            NormKind::WeightedHalf { radius } => sup(&|r| (r <= radius).then(|| 1.0 + r.sqrt())),
            NormKind::MinusB { b } => compute_norms(field, b)?.l2_minus_b,
            NormKind::HalfAnnulus { inner, outer } => {
                sup(&|r| (r >= inner && r <= outer).then(|| r.sqrt()))
            }
            NormKind::PointValue { point } => field
                .interpolate(point)
                .ok_or_else(|| Error::InvalidWindow(format!("point {point:?} outside the grid")))?
                .norm(),
        })
    }

    pub fn label(&self) -> String {
        match *self {
            NormKind::Weighted { radius } => format!("sup (1+|x|)|.| on |x|<={radius}"),
            NormKind::WeightedHalf { radius } => format!("sup (1+|x|^1/2)|.| on |x|<={radius}"),
            NormKind::MinusB { b } => format!("L2 weight 1/(1+|x|^{b})"),
            NormKind::HalfAnnulus { inner, outer } => {
                format!("sup |x|^1/2|.| on {inner}<=|x|<={outer}")
            }
            NormKind::PointValue { point } => format!("|.| at ({}, {})", point[0], point[1]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceLadder {
    pub parameters: Vec<f64>,
    /// `norm(field[j+1] - field[j])`.
    pub pairwise_norm_diffs: Vec<f64>,
    pub norm_kind: NormKind,
    pub tolerance: f64,
    /// Differences nonincreasing and the last one below `tolerance`.
    pub cauchy: bool,
}

pub fn ladder(
    fields: &[GridField],
    params: &[f64],
    norm_kind: NormKind,
    tolerance: f64,
) -> Result<ConvergenceLadder> {
    if fields.len() < 3 {
        return Err(Error::InvalidLadder(format!("need at least 3 fields, got {}", fields.len())));
    }
    if params.len() != fields.len() {
        return Err(Error::InvalidLadder(format!(
            "{} parameters for {} fields",
            params.len(),
            fields.len()
        )));
    }
    if params.windows(2).any(|w| !(w[1] < w[0])) || params.iter().any(|&p| !(p > 0.0)) {
        return Err(Error::InvalidLadder(format!(
            "parameters must be positive and strictly decreasing: {params:?}"
        )));
    }
    let diffs = fields
        .windows(2)
        .map(|w| norm_kind.eval(&w[1].sub(&w[0])?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ConvergenceLadder {
        parameters: params.to_vec(),
        cauchy: cauchy_verdict(&diffs, tolerance),
        pairwise_norm_diffs: diffs,
        norm_kind,
        tolerance,
    })
}

/// Nonincreasing differences ending below `tolerance`.
pub fn cauchy_verdict(diffs: &[f64], tolerance: f64) -> bool {
    diffs.windows(2).all(|w| w[1] <= w[0]) && diffs.last().is_some_and(|&d| d < tolerance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd_solver::Grid;
    use num_complex::Complex64;

    fn field(f: impl Fn(Point2) -> f64) -> GridField {
        GridField::from_fn(Grid::new(16.0, 129).unwrap(), |p| Complex64::new(f(p), 0.0))
    }

    #[test]
    fn zero_field_norms() {
        let n = compute_norms(&field(|_| 0.0), 2.0).unwrap();
        assert_eq!((n.sup_weighted, n.sup_weighted_half, n.l2_minus_b), (0.0, 0.0, 0.0));
    }

    #[test]
    fn weight_cancels() {
        let n = compute_norms(&field(|p| 1.0 / (1.0 + norm2(p))), 2.0).unwrap();
        assert!((n.sup_weighted - 1.0).abs() < 1e-15);
    }

    #[test]
    fn b_must_exceed_one() {
        assert!(matches!(
            compute_norms(&field(|_| 1.0), 1.0),
            Err(Error::WeightExponent(_))
        ));
    }

    #[test]
    fn minus_b_decreases_in_b() {
        let f = field(|p| {
            let r = norm2(p);
            if (1.0..=16.0).contains(&r) {
                -r.ln() / (2.0 * std::f64::consts::PI)
            } else {
                0.0
            }
        });
        let vals: Vec<f64> = [1.5, 2.0, 3.0, 4.0]
            .iter()
            .map(|&b| compute_norms(&f, b).unwrap().l2_minus_b)
            .collect();
        assert!(vals.iter().all(|v| v.is_finite() && *v > 0.0));
        assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
    }

    #[test]
    fn exact_power_laws() {
        for p in [0.5, 1.0, 2.0] {
            let fit = fit_decay_fn(|x| 3.0 * norm2(x).powf(-p), (4.0, 16.0), 16).unwrap();
            assert!((fit.exponent - p).abs() < 1e-10);
            assert!((fit.prefactor - 3.0).abs() < 1e-9);
            assert!(fit.residual < 1e-10);
            assert!(!fit.logarithmic);
        }
    }

    #[test]
    fn inverse_r_on_grid() {
        let f = field(|p| 1.0 / norm2(p).max(1e-3));
        let fit = fit_decay(&f, (2.0, 8.0), 16).unwrap();
        assert!((fit.exponent - 1.0).abs() < 1e-3, "{fit:?}");
    }

    #[test]
    fn hankel_decay() {
        let k = crate::special_functions::WaveNumber::real(2.0).unwrap();
        let fit = fit_decay_fn(
            |x| crate::special_functions::helmholtz_green(x, [0.0, 0.0], k).unwrap().norm(),
            (10.0, 40.0),
            16,
        )
        .unwrap();
        assert!((fit.exponent - 0.5).abs() < 0.02);
    }

    #[test]
    fn logarithm_is_flagged() {
        let fit = fit_decay_fn(|x| norm2(x).ln(), (10.0, 40.0), 16).unwrap();
        assert!(fit.logarithmic, "{fit:?}");
        let fit = fit_decay_fn(|x| norm2(x).ln(), (4.0, 16.0), 16).unwrap();
        assert!(fit.logarithmic);
    }

    #[test]
    fn vanishing_field_errors() {
        assert!(matches!(
            fit_decay_fn(|_| 0.0, (4.0, 16.0), 16),
            Err(Error::VanishingField)
        ));
    }

    #[test]
    fn ladder_identical_fields() {
        let f = field(|p| p[0]);
        let l = ladder(
            &[f.clone(), f.clone(), f],
            &[1.0, 0.5, 0.25],
            NormKind::Weighted { radius: 8.0 },
            1e-3,
        )
        .unwrap();
        assert_eq!(l.pairwise_norm_diffs, vec![0.0, 0.0]);
        assert!(l.cauchy);
    }

    #[test]
    fn ladder_preconditions() {
        let f = field(|_| 1.0);
        let kind = NormKind::MinusB { b: 2.0 };
        assert!(ladder(&[f.clone(), f.clone()], &[1.0, 0.5], kind, 1.0).is_err());
        assert!(ladder(&[f.clone(), f.clone(), f.clone()], &[1.0, 1.0, 0.5], kind, 1.0).is_err());
        let other = GridField::zeros(Grid::new(16.0, 65).unwrap());
        assert!(matches!(
            ladder(&[f.clone(), f, other], &[1.0, 0.5, 0.25], kind, 1.0),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn cauchy_requires_decrease() {
        assert!(cauchy_verdict(&[1e-2, 1e-3, 1e-4], 1e-3));
        assert!(!cauchy_verdict(&[1e-4, 1e-3, 1e-4], 1e-3));
        assert!(!cauchy_verdict(&[1e-2, 1e-2, 1e-2], 1e-3));
    }
}

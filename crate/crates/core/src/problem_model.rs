//! Coefficient fields, sources and spectral shifts, with the admissibility
//! checks for symmetric, uniformly elliptic coefficients that equal the
//! identity outside a disk.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::special_functions::{regularized_wave_number, Kernel, WaveNumber};
use crate::{norm2, Error, Point2, Result};

/// Row-major 2x2 real matrix.
pub type Matrix2 = [[f64; 2]; 2];

pub const IDENTITY: Matrix2 = [[1.0, 0.0], [0.0, 1.0]];

/// Symmetric coefficient matrix field `a(x)`, equal to the identity for
/// `|x| > perturbation_radius`.
#[derive(Clone)]
pub struct CoefficientField {
    entries: Arc<dyn Fn(Point2) -> Matrix2 + Send + Sync>,
    perturbation_radius: f64,
    lipschitz_hint: f64,
    is_identity: bool,
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientField")
            .field("perturbation_radius", &self.perturbation_radius)
            .field("lipschitz_hint", &self.lipschitz_hint)
            .field("is_identity", &self.is_identity)
            .finish()
    }
}

impl CoefficientField {
    pub fn identity(perturbation_radius: f64) -> Self {
        Self {
            entries: Arc::new(|_| IDENTITY),
            perturbation_radius,
            lipschitz_hint: 0.0,
            is_identity: true,
        }
    }

    pub fn from_fn(
        perturbation_radius: f64,
        lipschitz_hint: f64,
        entries: impl Fn(Point2) -> Matrix2 + Send + Sync + 'static,
    ) -> Self {
        Self {
            entries: Arc::new(entries),
            perturbation_radius,
            lipschitz_hint,
            is_identity: false,
        }
    }

    /// `a(x) = s(x) I` for a scalar field `s`.
    pub fn scalar(
        perturbation_radius: f64,
        lipschitz_hint: f64,
        s: impl Fn(Point2) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::from_fn(perturbation_radius, lipschitz_hint, move |x| {
            let v = s(x);
            [[v, 0.0], [0.0, v]]
        })
    }

    #[inline]
    pub fn eval(&self, x: Point2) -> Matrix2 {
        (self.entries)(x)
    }

    pub fn perturbation_radius(&self) -> f64 {
        self.perturbation_radius
    }

    pub fn lipschitz_hint(&self) -> f64 {
        self.lipschitz_hint
    }

    /// True only for fields constructed as the identity.
    pub fn is_identity(&self) -> bool {
        self.is_identity
    }
}

/// Compactly supported right-hand side `f`, complex valued.
#[derive(Clone)]
pub struct SourceTerm {
    values: Arc<dyn Fn(Point2) -> Complex64 + Send + Sync>,
    support_radius: f64,
}

impl fmt::Debug for SourceTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SourceTerm")
            .field("support_radius", &self.support_radius)
            .finish()
    }
}

/// `(1 - |x - c|^2 / rho^2)^2` scaled to carry `mass`; its integral over the
/// disk is `pi rho^2 / 3` before scaling.
fn bump_value(x: Point2, center: Point2, radius: f64, mass: f64) -> f64 {
    let dx = x[0] - center[0];
    let dy = x[1] - center[1];
    let t = (dx * dx + dy * dy) / (radius * radius);
    if t >= 1.0 {
        0.0
    } else {
        let w = 1.0 - t;
        mass * 3.0 / (PI * radius * radius) * w * w
    }
}

impl SourceTerm {
    /// A source supported in the closed disk of radius `support_radius`
    /// about the origin. Values outside the disk are forced to zero.
    pub fn from_fn(
        support_radius: f64,
        values: impl Fn(Point2) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            values: Arc::new(move |x| {
                if norm2(x) > support_radius {
                    Complex64::new(0.0, 0.0)
                } else {
                    values(x)
                }
            }),
            support_radius,
        }
    }

    pub fn zero() -> Self {
        Self::from_fn(0.0, |_| Complex64::new(0.0, 0.0))
    }

    /// Polynomial bump of total integral `mass` on the disk `|x - center| < radius`.
    pub fn bump(center: Point2, radius: f64, mass: f64) -> Self {
        let support = norm2(center) + radius;
        Self::from_fn(support, move |x| {
            Complex64::new(bump_value(x, center, radius, mass), 0.0)
        })
    }

    /// Pointwise sum; the support radius is the larger of the two.
    pub fn plus(&self, other: &SourceTerm) -> Self {
        let (a, b) = (self.values.clone(), other.values.clone());
        Self {
            values: Arc::new(move |x| a(x) + b(x)),
            support_radius: self.support_radius.max(other.support_radius),
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let a = self.values.clone();
        Self {
            values: Arc::new(move |x| c * a(x)),
            support_radius: self.support_radius,
        }
    }

    /// `x -> f(x - shift)`.
    pub fn translated(&self, shift: Point2) -> Self {
        let a = self.values.clone();
        Self {
            values: Arc::new(move |x| a([x[0] - shift[0], x[1] - shift[1]])),
            support_radius: self.support_radius + norm2(shift),
        }
    }

    #[inline]
    pub fn eval(&self, x: Point2) -> Complex64 {
        (self.values)(x)
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// Midpoint-rule cells covering the support square `[-rho, rho]^2`:
    /// returns `(cell centers along one axis, cell width)`.
    pub fn quadrature_nodes(&self, quadrature_step: f64) -> (Vec<f64>, f64) {
        let rho = self.support_radius;
        if rho == 0.0 {
            return (Vec::new(), quadrature_step);
        }
        let cells = (2.0 * rho / quadrature_step).ceil().max(1.0) as usize;
        let h = 2.0 * rho / cells as f64;
        let nodes = (0..cells).map(|i| -rho + h * (i as f64 + 0.5)).collect();
        (nodes, h)
    }

    /// `(int |f|^2 (1 + |x|^b) dx)^{1/2}` by midpoint quadrature.
    pub fn weighted_l2_norm(&self, b: f64, quadrature_step: f64) -> f64 {
        let (nodes, h) = self.quadrature_nodes(quadrature_step);
        let mut acc = 0.0;
        for &y in &nodes {
            for &x in &nodes {
                let v = self.eval([x, y]).norm_sqr();
                if v != 0.0 {
                    acc += v * (1.0 + norm2([x, y]).powf(b));
                }
            }
        }
        (acc * h * h).sqrt()
    }

    /// `||f||_{L2(B_R)}`.
    pub fn l2_norm(&self, quadrature_step: f64) -> f64 {
        let (nodes, h) = self.quadrature_nodes(quadrature_step);
        let acc: f64 = nodes
            .iter()
            .flat_map(|&y| nodes.iter().map(move |&x| [x, y]))
            .map(|p| self.eval(p).norm_sqr())
            .sum();
        (acc * h * h).sqrt()
    }
}

/// Tensor-product midpoint quadrature of `f` over its support square.
pub fn source_mean(f: &SourceTerm, quadrature_step: f64) -> Result<Complex64> {
    if !(quadrature_step > 0.0) {
        return Err(Error::Config(format!(
            "quadrature step must be positive, got {quadrature_step}"
        )));
    }
    let (nodes, h) = f.quadrature_nodes(quadrature_step);
    let mut acc = Complex64::new(0.0, 0.0);
    for &y in &nodes {
        for &x in &nodes {
            acc += f.eval([x, y]);
        }
    }
    let mean = acc * (h * h);
    if !mean.re.is_finite() || !mean.im.is_finite() {
        return Err(Error::NonFinite("source evaluation"));
    }
    Ok(mean)
}

/// Regular sampling lattice `n x n` over `[-half_width, half_width]^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleLattice {
    pub half_width: f64,
    pub n: usize,
}

impl SampleLattice {
    /// The default 201 x 201 lattice over `[-R-1, R+1]^2`.
    pub fn default_for(a: &CoefficientField) -> Self {
        Self {
            half_width: a.perturbation_radius() + 1.0,
            n: 201,
        }
    }

    pub fn points(&self) -> impl Iterator<Item = Point2> + '_ {
        let step = if self.n > 1 {
            2.0 * self.half_width / (self.n - 1) as f64
        } else {
            0.0
        };
        let offset = if self.n > 1 { -self.half_width } else { 0.0 };
        (0..self.n).flat_map(move |j| {
            (0..self.n).map(move |i| [offset + step * i as f64, offset + step * j as f64])
        })
    }
}

/// Eigenvalues `(min, max)` of the symmetric part of a 2x2 matrix.
pub fn symmetric_eigenvalues(m: &Matrix2) -> (f64, f64) {
    let off = 0.5 * (m[0][1] + m[1][0]);
    let mean = 0.5 * (m[0][0] + m[1][1]);
    let half_gap = (0.5 * (m[0][0] - m[1][1])).hypot(off);
    (mean - half_gap, mean + half_gap)
}

const SYMMETRY_TOL: f64 = 1e-12;
const TAIL_TOL: f64 = 1e-12;

/// Check symmetry, ellipticity and the identity tail on a lattice; returns
/// the extreme eigenvalues `(a0, a1)` seen on it.
pub fn validate_coefficients(a: &CoefficientField, lattice: &SampleLattice) -> Result<(f64, f64)> {
    if lattice.n == 0 {
        return Err(Error::InvalidGrid("empty sample lattice".into()));
    }
    let radius = a.perturbation_radius();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for x in lattice.points() {
        let m = a.eval(x);
        let gap = (m[0][1] - m[1][0]).abs();
        if !(gap <= SYMMETRY_TOL) {
            return Err(Error::Asymmetry { x: x[0], y: x[1], gap });
        }
        let (e0, e1) = symmetric_eigenvalues(&m);
        if !(e0 > 0.0) {
            return Err(Error::Ellipticity {
                x: x[0],
                y: x[1],
                eig: e0,
            });
        }
        if norm2(x) > radius {
            let dev = (m[0][0] - 1.0)
                .abs()
                .max((m[1][1] - 1.0).abs())
                .max(m[0][1].abs())
                .max(m[1][0].abs());
            if !(dev < TAIL_TOL) {
                return Err(Error::NonIdentityTail {
                    x: x[0],
                    y: x[1],
                    gap: dev,
                });
            }
        }
        lo = lo.min(e0);
        hi = hi.max(e1);
    }
    Ok((lo, hi))
}

/// Which regularized or limiting problem is being posed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftKind {
    /// `L u + i eps u = f`, `eps > 0`.
    ZeroEnergyRegularized,
    /// `L w - k^2 w - i eps w = f`, `eps > 0`, `k > 0`.
    HelmholtzRegularized,
    /// `L w - k^2 w = f` with the outgoing radiation condition, `k > 0`.
    HelmholtzLimit,
    /// `L u = f` with decay at infinity.
    ZeroEnergyLimit,
}

/// Spectral shift `sigma` added to `L`: `i eps` for the zero-energy problems,
/// `-k^2 - i eps` for the Helmholtz ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralShift {
    pub kind: ShiftKind,
    pub eps: f64,
    pub k: f64,
}

impl SpectralShift {
    pub fn zero_energy(eps: f64) -> Result<Self> {
        Self::new(ShiftKind::ZeroEnergyRegularized, eps, 0.0)
    }

    pub fn helmholtz(k: f64, eps: f64) -> Result<Self> {
        Self::new(ShiftKind::HelmholtzRegularized, eps, k)
    }

    pub fn helmholtz_limit(k: f64) -> Result<Self> {
        Self::new(ShiftKind::HelmholtzLimit, 0.0, k)
    }

    pub fn zero_energy_limit() -> Self {
        Self {
            kind: ShiftKind::ZeroEnergyLimit,
            eps: 0.0,
            k: 0.0,
        }
    }

    pub fn new(kind: ShiftKind, eps: f64, k: f64) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidShift(format!("{kind:?}: {msg} (eps={eps}, k={k})")));
        if !eps.is_finite() || !k.is_finite() {
            return bad("parameters must be finite");
        }
        match kind {
            ShiftKind::ZeroEnergyRegularized if !(eps > 0.0 && k == 0.0) => {
                return bad("requires eps > 0 and k = 0")
            }
            ShiftKind::HelmholtzRegularized if !(eps > 0.0 && k > 0.0) => {
                return bad("requires eps > 0 and k > 0")
            }
            ShiftKind::HelmholtzLimit if !(eps == 0.0 && k > 0.0) => {
                return bad("requires eps = 0 and k > 0")
            }
            ShiftKind::ZeroEnergyLimit if !(eps == 0.0 && k == 0.0) => {
                return bad("requires eps = 0 and k = 0")
            }
            _ => {}
        }
        Ok(Self { kind, eps, k })
    }

    /// The diagonal shift `sigma` of `L + sigma`.
    pub fn sigma(&self) -> Complex64 {
        match self.kind {
            ShiftKind::ZeroEnergyRegularized => Complex64::new(0.0, self.eps),
            ShiftKind::ZeroEnergyLimit => Complex64::new(0.0, 0.0),
            ShiftKind::HelmholtzRegularized | ShiftKind::HelmholtzLimit => {
                Complex64::new(-self.k * self.k, -self.eps)
            }
        }
    }

    pub fn is_helmholtz(&self) -> bool {
        matches!(
            self.kind,
            ShiftKind::HelmholtzRegularized | ShiftKind::HelmholtzLimit
        )
    }

    /// Free-space kernel of `-Laplacian + sigma`.
    pub fn kernel(&self) -> Result<Kernel> {
        Ok(match self.kind {
            ShiftKind::ZeroEnergyLimit => Kernel::Laplace,
            ShiftKind::ZeroEnergyRegularized => Kernel::Helmholtz(regularized_wave_number(self.eps)?),
            ShiftKind::HelmholtzRegularized | ShiftKind::HelmholtzLimit => {
                Kernel::Helmholtz(WaveNumber::from_square(-self.sigma())?)
            }
        })
    }

    pub fn label(&self) -> String {
        match self.kind {
            ShiftKind::ZeroEnergyRegularized => format!("eps={:e}", self.eps),
            ShiftKind::ZeroEnergyLimit => "eps=0".to_string(),
            ShiftKind::HelmholtzRegularized => format!("k={},eps={:e}", self.k, self.eps),
            ShiftKind::HelmholtzLimit => format!("k={},eps=0", self.k),
        }
    }
}

/// A named problem from the built-in catalog.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: &'static str,
    pub description: &'static str,
    pub coefficients: CoefficientField,
    pub source: SourceTerm,
}

pub const PROBLEM_NAMES: [&str; 4] = [
    "identity-dipole",
    "identity-monopole",
    "bump-dipole",
    "anisotropic-dipole",
];

/// Perturbation radius shared by every catalog problem.
pub const CATALOG_RADIUS: f64 = 1.0;

/// Cubic smoothstep cutoff: 1 for `r <= inner`, 0 for `r >= outer`, C1 in between.
fn cutoff(r: f64, inner: f64, outer: f64) -> f64 {
    if r <= inner {
        1.0
    } else if r >= outer {
        0.0
    } else {
        let t = (r - inner) / (outer - inner);
        1.0 - t * t * (3.0 - 2.0 * t)
    }
}

fn dipole_source() -> SourceTerm {
    SourceTerm::bump([0.4, 0.0], 0.5, 1.0).plus(&SourceTerm::bump([-0.4, 0.0], 0.5, -1.0))
}

fn bump_coefficients() -> CoefficientField {
    // 1 + 2 e^{-|x|^2} cut off smoothly between r = 0.5 and r = R
    CoefficientField::scalar(CATALOG_RADIUS, 4.0, |x| {
        let r = norm2(x);
        1.0 + 2.0 * (-r * r).exp() * cutoff(r, 0.5, CATALOG_RADIUS)
    })
}

fn anisotropic_coefficients() -> CoefficientField {
    // Q diag(1 + 1.5 psi, 1 + 0.5 psi) Q^T, psi = (1 - r^2)^2 on r < R, Q a rotation by pi/6
    let (s, c) = (PI / 6.0).sin_cos();
    CoefficientField::from_fn(CATALOG_RADIUS, 3.0, move |x| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        if r2 >= CATALOG_RADIUS * CATALOG_RADIUS {
            return IDENTITY;
        }
        let w = 1.0 - r2;
        let psi = w * w;
        let (l1, l2) = (1.0 + 1.5 * psi, 1.0 + 0.5 * psi);
        let a11 = c * c * l1 + s * s * l2;
        let a22 = s * s * l1 + c * c * l2;
        let a12 = c * s * (l1 - l2);
        [[a11, a12], [a12, a22]]
    })
}

/// Look up a catalog problem by its stable name.
pub fn builtin_problem(name: &str) -> Result<Problem> {
    let problem = match name {
        "identity-dipole" => Problem {
            name: "identity-dipole",
            description: "a = I; unit bumps of opposite sign at (+-0.4, 0), radius 0.5; int f = 0",
            coefficients: CoefficientField::identity(CATALOG_RADIUS),
            source: dipole_source(),
        },
        "identity-monopole" => Problem {
            name: "identity-monopole",
            description: "a = I; unit-mass bump at the origin, radius 0.5; int f = 1",
            coefficients: CoefficientField::identity(CATALOG_RADIUS),
            source: SourceTerm::bump([0.0, 0.0], 0.5, 1.0),
        },
        "bump-dipole" => Problem {
            name: "bump-dipole",
            description: "a = (1 + 2 exp(-|x|^2) cutoff) I on B_1; dipole source; int f = 0",
            coefficients: bump_coefficients(),
            source: dipole_source(),
        },
        "anisotropic-dipole" => Problem {
            name: "anisotropic-dipole",
            description: "a = rotated diag(1 + 1.5 psi, 1 + 0.5 psi) on B_1; dipole source; int f = 0",
            coefficients: anisotropic_coefficients(),
            source: dipole_source(),
        },
        other => return Err(Error::UnknownProblem(other.to_string())),
    };
    Ok(problem)
}

/// The whole catalog in a stable order.
pub fn builtin_problems() -> Vec<Problem> {
    PROBLEM_NAMES
        .iter()
        .map(|n| builtin_problem(n).expect("catalog names are valid"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_validates_to_one() {
        let a = CoefficientField::identity(1.0);
        let (a0, a1) = validate_coefficients(&a, &SampleLattice::default_for(&a)).unwrap();
        assert_eq!((a0, a1), (1.0, 1.0));
    }

    #[test]
    fn bump_coefficient_range() {
        let a = bump_coefficients();
        let (a0, a1) = validate_coefficients(&a, &SampleLattice::default_for(&a)).unwrap();
        assert!((a0 - 1.0).abs() < 1e-12);
        // the lattice contains the origin
        assert!((a1 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_matrix_rejected() {
        let a = CoefficientField::from_fn(1.0, 0.0, |x| {
            if norm2(x) < 1.0 {
                [[1.0, 1.0], [1.0, 1.0]]
            } else {
                IDENTITY
            }
        });
        let err = validate_coefficients(&a, &SampleLattice::default_for(&a)).unwrap_err();
        assert!(matches!(err, Error::Ellipticity { .. }));
    }

    #[test]
    fn asymmetric_and_tail_violations_rejected() {
        let a = CoefficientField::from_fn(1.0, 0.0, |_| [[1.0, 0.1], [0.0, 1.0]]);
        assert!(matches!(
            validate_coefficients(&a, &SampleLattice::default_for(&a)),
            Err(Error::Asymmetry { .. })
        ));
        let a = CoefficientField::scalar(1.0, 0.0, |x| 1.0 + 0.1 * (-norm2(x)).exp());
        assert!(matches!(
            validate_coefficients(&a, &SampleLattice::default_for(&a)),
            Err(Error::NonIdentityTail { .. })
        ));
        let a = CoefficientField::identity(1.0);
        assert!(validate_coefficients(&a, &SampleLattice { half_width: 1.0, n: 0 }).is_err());
    }

    #[test]
    fn validation_is_deterministic() {
        let a = anisotropic_coefficients();
        let lattice = SampleLattice::default_for(&a);
        let first = validate_coefficients(&a, &lattice).unwrap();
        let second = validate_coefficients(&a, &lattice).unwrap();
        assert_eq!(first.0.to_bits(), second.0.to_bits());
        assert_eq!(first.1.to_bits(), second.1.to_bits());
    }

    #[test]
    fn source_means() {
        let dipole = dipole_source();
        assert!(source_mean(&dipole, 0.01).unwrap().norm() < 1e-12);
        assert_eq!(source_mean(&SourceTerm::zero(), 0.1).unwrap(), Complex64::new(0.0, 0.0));
        let unit = SourceTerm::bump([0.0, 0.0], 0.5, 1.0);
        let mut prev_err = f64::INFINITY;
        for &h in &[0.125, 0.0625, 0.03125, 0.015625] {
            let err = (source_mean(&unit, h).unwrap() - 1.0).norm();
            assert!(prev_err / err >= 3.5, "h={h} err={err} prev={prev_err}");
            prev_err = err;
        }
        assert!(source_mean(&unit, 0.0).is_err());
    }

    #[test]
    fn catalog_invariants() {
        for p in builtin_problems() {
            let a = &p.coefficients;
            assert!(p.source.support_radius() <= a.perturbation_radius(), "{}", p.name);
            let lattice = SampleLattice::default_for(a);
            validate_coefficients(a, &lattice).unwrap();
            for x in lattice.points().filter(|x| norm2(*x) > a.perturbation_radius()) {
                let m = a.eval(x);
                let dev = (m[0][0] - 1.0).abs().max((m[1][1] - 1.0).abs()).max(m[0][1].abs());
                assert!(dev < 1e-12);
            }
        }
        let m = source_mean(&builtin_problem("identity-monopole").unwrap().source, 0.01).unwrap();
        assert!((m - 1.0).norm() < 1e-4);
        assert!(matches!(builtin_problem("nope"), Err(Error::UnknownProblem(_))));
    }

    #[test]
    fn shift_invariants() {
        assert!(SpectralShift::zero_energy(0.0).is_err());
        assert!(SpectralShift::helmholtz(0.0, 0.1).is_err());
        assert!(SpectralShift::helmholtz_limit(-1.0).is_err());
        assert!(SpectralShift::new(ShiftKind::HelmholtzLimit, 0.1, 1.0).is_err());
        let s = SpectralShift::helmholtz(2.0, 0.5).unwrap();
        assert_eq!(s.sigma(), Complex64::new(-4.0, -0.5));
        let s = SpectralShift::zero_energy(0.25).unwrap();
        assert_eq!(s.sigma(), Complex64::new(0.0, 0.25));
        match s.kernel().unwrap() {
            Kernel::Helmholtz(k) => {
                let k = k.value();
                assert!(k.im > 0.0);
                assert!((k * k - Complex64::new(0.0, -0.25)).norm() < 1e-15);
            }
            Kernel::Laplace => panic!("expected a Helmholtz kernel"),
        }
        assert_eq!(SpectralShift::zero_energy_limit().kernel().unwrap(), Kernel::Laplace);
    }
}

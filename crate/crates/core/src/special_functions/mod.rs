//! Bessel functions of orders 0 and 1 for complex argument and the
//! free-space kernels built on them.
//!
//! Kernels:
//!
//! - Laplace: `g0(x, y) = (1/2pi) ln(1/|x - y|)`, with `-Laplacian g0 = delta`.
//! - Helmholtz: `G(x, y, k) = (i/4) H0(k |x - y|)`, with `(Laplacian + k^2) G = -delta`.
//! - Resolvent of `-Laplacian + i eps`: `G` evaluated at `k_eps = sqrt(eps) e^{3 pi i / 4}`.
//!
//! Everything here is a pure function; nothing caches or allocates shared state.

mod bessel;
mod kernels;

pub use bessel::{
    hankel1_0, hankel1_01, hankel1_1, hankel1_01_asymptotic, hankel1_01_series, j0y0_j1y1,
    EULER_GAMMA, SERIES_CROSSOVER,
};
pub use kernels::{
    alpha, helmholtz_green, log_green, log_green_normal_deriv, regularized_green,
    regularized_wave_number, Kernel, KernelSample, WaveNumber,
};

/// Complex scalar used for every field and kernel value.
pub type ComplexScalar = num_complex::Complex64;

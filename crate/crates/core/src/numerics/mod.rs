//! Shared numerical kernels: low-degree polynomial roots, adaptive
//! quadrature with endpoint singularities, stable Poisson-kernel sums and a
//! banded linear solver.

pub mod banded;
pub mod poisson;
pub mod quad;
pub mod roots;

pub use banded::BandedMatrix;
pub use poisson::{ln_factorial, ln_poisson_kernel, poisson_sum, PoissonSeries};
pub use quad::{integrate, Estimate, Integrand, Quadrature};
pub use roots::{real_roots, ComplexPair, PolyRoots};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("polynomial has no non-zero coefficient")]
    ZeroPolynomial,
    #[error("quadrature did not converge on [{a}, {b}]: estimate {value:e} with error {error:e} after {panels} panels")]
    NonConvergent {
        a: f64,
        b: f64,
        value: f64,
        error: f64,
        panels: usize,
    },
    #[error("integrand is not finite at x = {x}")]
    NonFinite { x: f64 },
    #[error("matrix is singular at pivot {index}")]
    Singular { index: usize },
}

/// Evaluates `c[0] + c[1] x + c[2] x^2 + ...` by Horner's rule.
pub fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Error-free transformation `a + b = s + e`.
#[inline]
pub(crate) fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Error-free transformation `a * b = p + e`.
#[inline]
pub(crate) fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Dot product accumulated in double-double arithmetic.
pub(crate) fn dot_compensated(pairs: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    let (mut hi, mut lo) = (0.0_f64, 0.0_f64);
    for (a, b) in pairs {
        let (p, pe) = two_prod(a, b);
        let (s, se) = two_sum(hi, p);
        hi = s;
        lo += pe + se;
    }
    hi + lo
}

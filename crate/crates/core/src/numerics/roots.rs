//! Real roots of polynomials of degree at most three.
//!
//! Closed forms are used when the discriminant is well separated from zero.
//! Close to a multiple root the closed forms lose half of the significant
//! digits, so the roots are taken from the eigenvalues of the companion
//! matrix instead. Every real root is polished by Newton steps on the
//! original coefficients.

use super::{horner, NumericsError};
use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

/// Relative size of the discriminant below which the closed forms are
/// abandoned.
const DISCRIMINANT_REL_TOL: f64 = 1e-12;

/// Smallest leading coefficient still treated as non-zero.
const LEADING_COEFF_FLOOR: f64 = 1e-300;

/// One member of a complex-conjugate root pair, `re ± i·im` with `im > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexPair {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PolyRoots {
    /// Real roots in ascending order, repeated according to multiplicity.
    pub real: Vec<f64>,
    /// Complex-conjugate pairs. These are never listed in `real`.
    pub complex: Vec<ComplexPair>,
}

impl PolyRoots {
    pub fn is_all_real(&self) -> bool {
        self.complex.is_empty()
    }

    fn sorted(mut self) -> Self {
        self.real.sort_by(f64::total_cmp);
        self
    }
}

/// Roots of `coeffs[0] + coeffs[1] x + ... ` for a polynomial of degree at
/// most three. Trailing coefficients with magnitude below `1e-300` are
/// dropped before the degree is determined.
pub fn real_roots(coeffs: &[f64]) -> Result<PolyRoots, NumericsError> {
    let degree = coeffs
        .iter()
        .rposition(|c| c.abs() > LEADING_COEFF_FLOOR)
        .ok_or(NumericsError::ZeroPolynomial)?;
    assert!(degree <= 3, "real_roots supports degree <= 3, got {degree}");
    let c = &coeffs[..=degree];
    let roots = match degree {
        0 => PolyRoots::default(),
        1 => PolyRoots {
            real: vec![-c[0] / c[1]],
            complex: vec![],
        },
        2 => quadratic(c[0], c[1], c[2]),
        _ => cubic(c[0], c[1], c[2], c[3]),
    };
    let mut roots = roots;
    for x in roots.real.iter_mut() {
        *x = polish(c, *x);
    }
    Ok(roots.sorted())
}

fn quadratic(c0: f64, c1: f64, c2: f64) -> PolyRoots {
    let disc = c1 * c1 - 4.0 * c2 * c0;
    let scale = c1 * c1 + 4.0 * (c2 * c0).abs();
    if disc.abs() <= DISCRIMINANT_REL_TOL * scale {
        let x = -c1 / (2.0 * c2);
        return PolyRoots {
            real: vec![x, x],
            complex: vec![],
        };
    }
    if disc > 0.0 {
        let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
        // c1 == 0 gives signum 1.0, so q != 0 whenever disc > 0
        let r1 = q / c2;
        let r2 = if q != 0.0 { c0 / q } else { -r1 };
        PolyRoots {
            real: vec![r1, r2],
            complex: vec![],
        }
    } else {
        let re = -c1 / (2.0 * c2);
        let im = (-disc).sqrt() / (2.0 * c2.abs());
        PolyRoots {
            real: vec![],
            complex: vec![ComplexPair { re, im }],
        }
    }
}

fn cubic(c0: f64, c1: f64, c2: f64, c3: f64) -> PolyRoots {
    // monic x^3 + a x^2 + b x + c
    let a = c2 / c3;
    let b = c1 / c3;
    let c = c0 / c3;
    // depressed t^3 + p t + q with x = t - a/3
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;

    let d4 = 4.0 * p * p * p + 27.0 * q * q;
    let d_scale = 4.0 * (p * p * p).abs() + 27.0 * q * q;
    if d_scale == 0.0 {
        // triple root
        return PolyRoots {
            real: vec![-shift; 3],
            complex: vec![],
        };
    }
    if d4.abs() <= DISCRIMINANT_REL_TOL * d_scale {
        return companion(a, b, c);
    }

    if d4 < 0.0 {
        // three distinct real roots, trigonometric form (p < 0 here)
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = ((3.0 * q) / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let two_pi_3 = 2.0 * std::f64::consts::PI / 3.0;
        let real = (0..3)
            .map(|k| m * (theta - two_pi_3 * k as f64).cos() - shift)
            .collect();
        PolyRoots {
            real,
            complex: vec![],
        }
    } else {
        let half_q = 0.5 * q;
        let sq = (half_q * half_q + p * p * p / 27.0).sqrt();
        let s = if half_q >= 0.0 { 1.0 } else { -1.0 };
        let u = (-half_q - s * sq).cbrt();
        let v = if u != 0.0 { -p / (3.0 * u) } else { 0.0 };
        let t = u + v;
        let re = -0.5 * t - shift;
        let im = (0.5 * 3f64.sqrt() * (u - v)).abs();
        PolyRoots {
            real: vec![t - shift],
            complex: vec![ComplexPair { re, im }],
        }
    }
}

/// Roots of the monic cubic from companion-matrix eigenvalues.
fn companion(a: f64, b: f64, c: f64) -> PolyRoots {
    let m = Matrix3::new(0.0, 0.0, -c, 1.0, 0.0, -b, 0.0, 1.0, -a);
    let eig = m.complex_eigenvalues();
    let mut real = Vec::new();
    let mut complex = Vec::new();
    for z in eig.iter() {
        // near a multiple root the eigenvalues split by O(sqrt(eps))
        if z.im.abs() <= 1e-7 * z.re.abs().max(1.0) {
            real.push(z.re);
        } else if z.im > 0.0 {
            complex.push(ComplexPair { re: z.re, im: z.im });
        }
    }
    PolyRoots { real, complex }
}

fn polish(c: &[f64], mut x: f64) -> f64 {
    let deriv: Vec<f64> = c
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &ck)| k as f64 * ck)
        .collect();
    let mut fx = horner(c, x);
    for _ in 0..4 {
        let dfx = horner(&deriv, x);
        if dfx == 0.0 || fx == 0.0 {
            break;
        }
        let cand = x - fx / dfx;
        let fc = horner(c, cand);
        if fc.abs() < fx.abs() {
            x = cand;
            fx = fc;
        } else {
            break;
        }
    }
    x
}

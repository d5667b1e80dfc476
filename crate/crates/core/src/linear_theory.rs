//! Linear-theory observables: classical intracavity intensity, linearized
//! Mandel parameter, threshold and self-quenching pumps.

use crate::error::{Error, Result};
use crate::params::ReducedParams;
use serde::Serialize;

/// `I0 = (I_s/2)[(r − 1) − (r + 1)²/c]`. Non-positive outside the lasing
/// window.
pub fn classical_intensity(r: f64, i_s: f64, c: f64) -> f64 {
    0.5 * i_s * gain_margin(r, c)
}

fn gain_margin(r: f64, c: f64) -> f64 {
    (r - 1.0) - (r + 1.0) * (r + 1.0) / c
}

/// Linearized Mandel parameter. Fails where the classical intensity is not
/// positive.
pub fn mandel_lin(r: f64, c: f64) -> Result<f64> {
    let d = gain_margin(r, c);
    if !(d > 0.0) {
        return Err(Error::Regime(format!(
            "linear Mandel parameter needs a positive classical intensity (r = {r}, c = {c})"
        )));
    }
    Ok(mandel_lin_unchecked(r, c))
}

/// The same formula evaluated anywhere, for drawing the divergences at the
/// window edges.
pub fn mandel_lin_unchecked(r: f64, c: f64) -> f64 {
    let rp = r + 1.0;
    let num = 2.0 * c * c - c * (r - 5.0) * rp + 3.0 * rp * rp * rp;
    num / (2.0 * c * c * gain_margin(r, c))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub r_th: f64,
    pub r_m: f64,
    pub r_q: f64,
    /// Classical intensity at `r_m`.
    pub i_m: f64,
}

impl Thresholds {
    pub fn contains(&self, r: f64) -> bool {
        r > self.r_th && r < self.r_q
    }
}

pub fn thresholds(c: f64, i_s: f64) -> Result<Thresholds> {
    if !(c > 8.0) {
        return Err(Error::Regime(format!("no lasing window for c = {c} <= 8")));
    }
    let r_m = 0.5 * c - 1.0;
    let half_width = 0.5 * c * (1.0 - 8.0 / c).sqrt();
    // product of the roots is 1 + c, which gives r_th without cancellation
    let r_q = r_m + half_width;
    Ok(Thresholds {
        r_th: (1.0 + c) / r_q,
        r_m,
        r_q,
        i_m: i_s * (c / 8.0 - 1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearTheoryResult {
    pub i0: f64,
    /// `None` outside the lasing window.
    pub qf_lin: Option<f64>,
    /// `None` for `c <= 8`.
    pub thresholds: Option<Thresholds>,
    pub valid: bool,
}

impl LinearTheoryResult {
    pub fn variance(&self) -> Option<f64> {
        self.qf_lin.map(|q| 1.0 + self.i0 * (2.0 + q))
    }
}

pub fn linear_theory(params: &ReducedParams) -> LinearTheoryResult {
    let (r, i_s, c) = (params.r(), params.i_s(), params.c());
    let th = thresholds(c, i_s).ok();
    let valid = th.is_some_and(|t| t.contains(r));
    let i0 = classical_intensity(r, i_s, c);
    LinearTheoryResult {
        i0,
        qf_lin: if valid { mandel_lin(r, c).ok() } else { None },
        thresholds: th,
        valid: valid && i0 > 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn table_intensities() {
        assert!((classical_intensity(20.0, 95.95, 100.0) - 700.0).abs() < 0.5);
        assert!((classical_intensity(200.0, 8.83, 1000.0) - 700.0).abs() < 1.0);
    }

    #[test]
    fn unit_pump_at_huge_cooperativity() {
        let i = classical_intensity(1.0, 3.0, 1e8);
        assert!(i < 0.0 && i.abs() < 1e-5 * 3.0);
    }

    #[test]
    fn table_mandel_values() {
        assert!((mandel_lin(20.0, 100.0).unwrap() - 0.056).abs() < 1e-3);
        assert!((mandel_lin(200.0, 1000.0).unwrap() + 0.040).abs() < 1e-3);
    }

    #[test]
    fn mandel_limit_at_fifth_of_cooperativity() {
        let c = 1e8;
        assert!((mandel_lin(c / 5.0, c).unwrap() + 0.05).abs() < 1e-3);
    }

    #[test]
    fn mandel_outside_window_is_an_error() {
        assert!(matches!(mandel_lin(0.5, 20.0), Err(Error::Regime(_))));
        assert!(mandel_lin_unchecked(0.5, 20.0).is_finite());
    }

    #[test]
    fn thresholds_at_c20() {
        let t = thresholds(20.0, 40.0).unwrap();
        assert_eq!(t.r_m, 9.0);
        assert_relative_eq!(t.r_th, 9.0 - 10.0 * 0.6f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(t.r_q, 9.0 + 10.0 * 0.6f64.sqrt(), max_relative = 1e-14);
        assert!((t.r_th - 1.2540).abs() < 1e-4);
        assert!((t.r_q - 16.746).abs() < 1e-3);
        assert_eq!(t.i_m, 60.0);
    }

    #[test]
    fn thresholds_are_zeros_of_intensity() {
        let t = thresholds(100.0, 3.0).unwrap();
        for r in [t.r_th, t.r_q] {
            assert!(classical_intensity(r, 3.0, 100.0).abs() <= 1e-9 * t.i_m);
        }
        assert_relative_eq!(classical_intensity(t.r_m, 3.0, 100.0), t.i_m, max_relative = 1e-14);
    }

    #[test]
    fn degenerate_window() {
        assert!(thresholds(8.0, 1.0).is_err());
        let t = thresholds(8.0 + 1e-9, 1.0).unwrap();
        assert!(t.r_q - t.r_th < 1e-3);
        assert!(t.r_th < t.r_m && t.r_m < t.r_q);
    }

    #[test]
    fn result_validity_flag() {
        let p = ReducedParams::new(9.0, 40.0, 20.0).unwrap();
        let lin = linear_theory(&p);
        assert!(lin.valid && lin.qf_lin.is_some());
        assert_eq!(lin.i0, 60.0);
        let below = linear_theory(&p.with_r(1.0).unwrap());
        assert!(!below.valid && below.qf_lin.is_none() && below.i0 < 0.0);
        let weak = linear_theory(&ReducedParams::new(3.0, 1.0, 4.0).unwrap());
        assert!(weak.thresholds.is_none() && !weak.valid);
        assert_eq!(
            linear_theory(&ReducedParams::new(20.0, 95.95, 100.0).unwrap()).variance().map(|v| v.round()),
            Some(1440.0)
        );
    }

    #[test]
    fn gaussian_variance_with_zero_mandel() {
        let lin = LinearTheoryResult {
            i0: 100.0,
            qf_lin: Some(0.0),
            thresholds: None,
            valid: true,
        };
        assert_eq!(lin.variance(), Some(201.0));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn positive_exactly_inside_window(lc in -1.0f64..5.0, lr in -3.0f64..5.0) {
                let (c, r) = (10f64.powf(lc), 10f64.powf(lr));
                let inside = thresholds(c, 1.0).map(|t| t.contains(r)).unwrap_or(false);
                let i0 = classical_intensity(r, 1.0, c);
                // skip points within rounding of an edge
                prop_assume!(i0.abs() > 1e-9 * (r + 1.0) * (r + 1.0) / c);
                prop_assert_eq!(i0 > 0.0, inside);
            }

            #[test]
            fn concave_with_peak_at_r_m(lc in 1.0f64..5.0, u in 0.0f64..1.0, v in 0.0f64..1.0) {
                let c = 10f64.powf(lc);
                let t = thresholds(c, 2.0).unwrap();
                let (a, b) = (t.r_th + u * (t.r_q - t.r_th), t.r_th + v * (t.r_q - t.r_th));
                let mid = classical_intensity(0.5 * (a + b), 2.0, c);
                let chord = 0.5 * (classical_intensity(a, 2.0, c) + classical_intensity(b, 2.0, c));
                prop_assert!(mid >= chord - 1e-9 * t.i_m);
                prop_assert!(classical_intensity(a, 2.0, c) <= t.i_m * (1.0 + 1e-12));
                prop_assert!(t.r_th < t.r_m && t.r_m < t.r_q);
            }

            #[test]
            fn diverges_at_window_edges(lc in 1.0f64..5.0) {
                let c = 10f64.powf(lc);
                let t = thresholds(c, 1.0).unwrap();
                let lo = mandel_lin(t.r_th * (1.0 + 1e-6), c).unwrap();
                let hi = mandel_lin(t.r_q * (1.0 - 1e-6), c).unwrap();
                prop_assert!(lo.abs() > 1e3 && hi.abs() > 1e3);
            }
        }
    }

    #[test]
    fn approaches_minus_five_hundredths_from_above() {
        let mut prev = f64::INFINITY;
        for k in 0..12 {
            let c = 200.0 * 4f64.powi(k);
            let q = mandel_lin(c / 5.0, c).unwrap();
            assert!(q < prev && q > -0.05);
            prev = q;
        }
    }
}

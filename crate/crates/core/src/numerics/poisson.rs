//! Poisson kernel `K_n(I) = e^{-I} I^n / n!` and series built from it.
//!
//! The kernel is evaluated with Loader's saddle-point form
//! `ln K_n(I) = -stirlerr(n) - bd0(n, I) - ½ ln(2πn)`, which keeps full
//! relative accuracy for `n` and `I` in the thousands where the naive
//! `I^n / n!` overflows.
//!
//! Derivatives follow from `d/dI K_n = K_{n-1} - K_n`: differentiating
//! `Σ c_n K_n` once maps the coefficients to the forward differences
//! `c_{n+1} - c_n`.

use std::f64::consts::PI;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_406;

/// `ln n!` exactly rounded for small `n`, Stirling with the error series
/// otherwise.
pub fn ln_factorial(n: usize) -> f64 {
    if n <= 22 {
        // 22! is the largest factorial exactly representable
        let mut f = 1.0f64;
        for k in 2..=n {
            f *= k as f64;
        }
        f.ln()
    } else {
        let x = n as f64;
        (x + 0.5) * x.ln() - x + HALF_LN_2PI + stirlerr(n)
    }
}

/// `ln n! - [(n + ½) ln n - n + ½ ln 2π]` for `n >= 1`.
fn stirlerr(n: usize) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    debug_assert!(n >= 1);
    let x = n as f64;
    if n <= 15 {
        return ln_factorial(n) - ((x + 0.5) * x.ln() - x + HALF_LN_2PI);
    }
    let x2 = 1.0 / (x * x);
    (S0 - (S1 - (S2 - (S3 - S4 * x2) * x2) * x2) * x2) / x
}

/// Deviance term `x ln(x/m) + m - x`, accurate when `x ≈ m`.
fn bd0(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

/// `ln(e^{-I} I^n / n!)`, returning `-inf` where the kernel vanishes.
pub fn ln_poisson_kernel(n: usize, intensity: f64) -> f64 {
    debug_assert!(intensity >= 0.0);
    if n == 0 {
        return -intensity;
    }
    if intensity == 0.0 {
        return f64::NEG_INFINITY;
    }
    let x = n as f64;
    -stirlerr(n) - bd0(x, intensity) - 0.5 * (2.0 * PI * x).ln()
}

/// `Σ_n c_n d^k/dI^k [e^{-I} I^n / n!]`.
pub fn poisson_sum(coeffs: &[f64], intensity: f64, order: usize) -> f64 {
    let diffs = forward_differences(coeffs, order);
    kernel_sum(&diffs, intensity)
}

fn forward_differences(coeffs: &[f64], order: usize) -> Vec<f64> {
    let mut c = coeffs.to_vec();
    for _ in 0..order {
        for n in 0..c.len() {
            let next = c.get(n + 1).copied().unwrap_or(0.0);
            c[n] = next - c[n];
        }
    }
    c
}

fn kernel_sum(coeffs: &[f64], intensity: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0.0)
        .map(|(n, &c)| {
            let lk = ln_poisson_kernel(n, intensity);
            if lk == f64::NEG_INFINITY {
                0.0
            } else {
                c * lk.exp()
            }
        })
        .sum()
}

/// A Poisson series `Σ p_n K_n(I)` with the difference tables for its
/// first five derivatives precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonSeries {
    tables: Vec<Vec<f64>>,
}

impl PoissonSeries {
    pub const MAX_ORDER: usize = 5;

    pub fn new(coeffs: &[f64]) -> Self {
        let mut tables = Vec::with_capacity(Self::MAX_ORDER + 1);
        tables.push(coeffs.to_vec());
        for k in 1..=Self::MAX_ORDER {
            tables.push(forward_differences(&tables[k - 1], 1));
        }
        Self { tables }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.tables[0]
    }

    pub fn value(&self, intensity: f64) -> f64 {
        kernel_sum(&self.tables[0], intensity)
    }

    pub fn derivative(&self, order: usize, intensity: f64) -> f64 {
        assert!(order <= Self::MAX_ORDER, "derivative order {order} > 5");
        kernel_sum(&self.tables[order], intensity)
    }

    /// Values of the series and its derivatives of order `0..=5` at one point.
    pub fn derivatives(&self, intensity: f64) -> [f64; 6] {
        // the kernel is shared by all orders
        let kernel: Vec<f64> = (0..self.tables[0].len())
            .map(|n| {
                let lk = ln_poisson_kernel(n, intensity);
                if lk == f64::NEG_INFINITY {
                    0.0
                } else {
                    lk.exp()
                }
            })
            .collect();
        let mut out = [0.0; 6];
        for (k, table) in self.tables.iter().enumerate() {
            out[k] = table.iter().zip(&kernel).map(|(c, w)| c * w).sum();
        }
        out
    }
}

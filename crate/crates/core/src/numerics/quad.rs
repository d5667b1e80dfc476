//! Globally adaptive quadrature.
//!
//! Regular panels use the 7-point Gauss / 15-point Kronrod pair. A panel
//! that touches a flagged singular point is integrated with the
//! tanh-sinh rule, whose nodes cluster double-exponentially at the panel
//! ends. Nodes next to a singular point are handed to the integrand as an
//! offset from that point so that distances far below the resolution of
//! the absolute coordinate are still represented exactly.

use super::{two_sum, NumericsError};

/// A function that can be integrated by [`Quadrature`].
pub trait Integrand {
    fn eval(&self, x: f64) -> f64;

    /// Value at `anchor + offset`. Called only for nodes next to a flagged
    /// singular point `anchor`; `offset` can be much smaller than the ulp of
    /// `anchor`. Integrands that are singular at `anchor` should override
    /// this to evaluate in terms of the offset directly.
    fn eval_offset(&self, anchor: f64, offset: f64) -> f64 {
        self.eval(anchor + offset)
    }
}

impl<F: Fn(f64) -> f64 + ?Sized> Integrand for F {
    fn eval(&self, x: f64) -> f64 {
        self(x)
    }
}

/// Adapter for integrands written in terms of `(anchor, offset)`.
/// `eval(x)` is forwarded as `(x, 0.0)`.
pub struct OffsetFn<F>(pub F);

impl<F: Fn(f64, f64) -> f64> Integrand for OffsetFn<F> {
    fn eval(&self, x: f64) -> f64 {
        (self.0)(x, 0.0)
    }

    fn eval_offset(&self, anchor: f64, offset: f64) -> f64 {
        (self.0)(anchor, offset)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
    /// Points where the integrand may have an integrable singularity.
    /// Points outside the integration range are ignored.
    pub singular_points: Vec<f64>,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_panels: 4000,
            singular_points: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

/// Integrates `f` over `[a, b]` with the default tolerances. `b` may be
/// `f64::INFINITY`.
pub fn integrate<F: Integrand + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    singular_points: &[f64],
) -> Result<Estimate, NumericsError> {
    Quadrature {
        singular_points: singular_points.to_vec(),
        ..Quadrature::default()
    }
    .integrate(f, a, b)
}

impl Quadrature {
    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn singular_at(mut self, points: &[f64]) -> Self {
        self.singular_points.extend_from_slice(points);
        self
    }

    pub fn integrate<F: Integrand + ?Sized>(
        &self,
        f: &F,
        a: f64,
        b: f64,
    ) -> Result<Estimate, NumericsError> {
        assert!(a <= b, "integration bounds must be ordered: [{a}, {b}]");
        if a == b {
            return Ok(Estimate {
                value: 0.0,
                error: 0.0,
                panels: 0,
            });
        }
        if b.is_infinite() {
            let mapped = SemiInfinite { f, a };
            let singular: Vec<f64> = self
                .singular_points
                .iter()
                .filter(|&&s| s > a)
                .map(|&s| (s - a) / (1.0 + (s - a)))
                .collect();
            return self.adapt(&mapped, 0.0, 1.0, &singular, a, b);
        }
        self.adapt(f, a, b, &self.singular_points, a, b)
    }

    fn adapt<F: Integrand + ?Sized>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        singular: &[f64],
        report_a: f64,
        report_b: f64,
    ) -> Result<Estimate, NumericsError> {
        let is_singular = |x: f64| singular.contains(&x);
        let mut breaks: Vec<f64> = singular
            .iter()
            .copied()
            .filter(|&s| s > a && s < b)
            .collect();
        breaks.push(a);
        breaks.push(b);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();

        let mut panels = Vec::with_capacity(64);
        for w in breaks.windows(2) {
            panels.push(Panel::evaluate(f, w[0], w[1], is_singular(w[0]), is_singular(w[1]))?);
        }

        loop {
            let (value, error) = totals(&panels);
            if error <= self.abs_tol.max(self.rel_tol * value.abs()) {
                return Ok(Estimate {
                    value,
                    error,
                    panels: panels.len(),
                });
            }
            let worst = panels
                .iter()
                .enumerate()
                .filter(|(_, p)| p.splittable())
                .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
                .map(|(i, _)| i);
            let Some(worst) = worst.filter(|_| panels.len() < self.max_panels) else {
                return Err(NumericsError::NonConvergent {
                    a: report_a,
                    b: report_b,
                    value,
                    error,
                    panels: panels.len(),
                });
            };
            let p = panels.swap_remove(worst);
            let mid = 0.5 * (p.a + p.b);
            panels.push(Panel::evaluate(f, p.a, mid, p.left_singular, false)?);
            panels.push(Panel::evaluate(f, mid, p.b, false, p.right_singular)?);
        }
    }
}

fn totals(panels: &[Panel]) -> (f64, f64) {
    let (mut hi, mut lo) = (0.0, 0.0);
    let mut err = 0.0;
    for p in panels {
        let (s, e) = two_sum(hi, p.value);
        hi = s;
        lo += e;
        err += p.error;
    }
    (hi + lo, err)
}

/// `∫_a^∞ f(x) dx = ∫_0^1 f(a + t/(1-t)) / (1-t)^2 dt`
struct SemiInfinite<'a, F: ?Sized> {
    f: &'a F,
    a: f64,
}

impl<F: Integrand + ?Sized> Integrand for SemiInfinite<'_, F> {
    fn eval(&self, t: f64) -> f64 {
        if t >= 1.0 {
            return 0.0;
        }
        let om = 1.0 - t;
        let v = self.f.eval(self.a + t / om);
        if v == 0.0 {
            0.0
        } else {
            v / (om * om)
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    left_singular: bool,
    right_singular: bool,
    value: f64,
    error: f64,
}

impl Panel {
    fn evaluate<F: Integrand + ?Sized>(
        f: &F,
        a: f64,
        b: f64,
        left_singular: bool,
        right_singular: bool,
    ) -> Result<Self, NumericsError> {
        let (value, error) = if left_singular || right_singular {
            tanh_sinh(f, a, b, left_singular, right_singular)?
        } else {
            gauss_kronrod_15(f, a, b)?
        };
        Ok(Self {
            a,
            b,
            left_singular,
            right_singular,
            value,
            error,
        })
    }

    fn splittable(&self) -> bool {
        let mid = 0.5 * (self.a + self.b);
        mid > self.a && mid < self.b
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn finite(x: f64, v: f64) -> Result<f64, NumericsError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(NumericsError::NonFinite { x })
    }
}

fn gauss_kronrod_15<F: Integrand + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
) -> Result<(f64, f64), NumericsError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = finite(center, f.eval(center))?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv = [(0.0, 0.0); 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = finite(center - dx, f.eval(center - dx))?;
        let f2 = finite(center + dx, f.eval(center + dx))?;
        fv[j] = (f1, f2);
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv[j].0 - mean).abs() + (fv[j].1 - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((value, err))
}

const TANH_SINH_LEVELS: usize = 7;
const TANH_SINH_T_MAX: f64 = 6.5;

/// Tanh-sinh rule on `[a, b]`. The error estimate is the difference
/// between the last two step halvings.
fn tanh_sinh<F: Integrand + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    left_singular: bool,
    right_singular: bool,
) -> Result<(f64, f64), NumericsError> {
    let half = 0.5 * (b - a);
    let half_pi = std::f64::consts::FRAC_PI_2;

    // contribution of node t (weight including h excluded)
    let node = |t: f64| -> Result<Option<f64>, NumericsError> {
        let u = half_pi * t.sinh();
        let cu = u.cosh();
        let w = half_pi * t.cosh() / (cu * cu);
        if !w.is_finite() || w == 0.0 {
            return Ok(None);
        }
        // distances from a and b, both computed without cancellation
        let da = 2.0 * half / (1.0 + (-2.0 * u).exp());
        let db = 2.0 * half / (1.0 + (2.0 * u).exp());
        if (t < 0.0 && da == 0.0) || (t > 0.0 && db == 0.0) {
            return Ok(None);
        }
        let (x, v) = if t <= 0.0 {
            if left_singular {
                (a + da, f.eval_offset(a, da))
            } else {
                (a + da, f.eval(a + da))
            }
        } else if right_singular {
            (b - db, f.eval_offset(b, -db))
        } else {
            (b - db, f.eval(b - db))
        };
        if !v.is_finite() {
            // a node that collapsed onto the singular point
            let collapsed = (t < 0.0 && a + da == a) || (t > 0.0 && b - db == b);
            return if collapsed {
                Ok(None)
            } else {
                Err(NumericsError::NonFinite { x })
            };
        }
        Ok(Some(w * v))
    };

    // sum over t = k*h for k of given parity, walking outwards until the
    // terms vanish or the node range is exhausted
    let sweep = |h: f64, start: usize, step: usize| -> Result<f64, NumericsError> {
        let mut acc = 0.0;
        for dir in [-1.0, 1.0] {
            let mut k = start;
            loop {
                let t = dir * k as f64 * h;
                if t.abs() > TANH_SINH_T_MAX {
                    break;
                }
                if t == 0.0 && dir > 0.0 {
                    k += step;
                    continue;
                }
                match node(t)? {
                    Some(c) => acc += c,
                    None => break,
                }
                k += step;
            }
        }
        Ok(acc)
    };

    let mut h = 1.0;
    let mut sum = sweep(h, 0, 1)?;
    let mut prev = sum * h * half;
    let mut err = f64::INFINITY;
    for _ in 0..TANH_SINH_LEVELS {
        h *= 0.5;
        // odd multiples of the new step: t = h, 3h, 5h, ...
        sum += sweep(h, 1, 2)?;
        let cur = sum * h * half;
        err = (cur - prev).abs();
        prev = cur;
        if err <= 1e-15 * cur.abs() {
            break;
        }
    }
    Ok((prev, err.max(4.0 * f64::EPSILON * prev.abs())))
}

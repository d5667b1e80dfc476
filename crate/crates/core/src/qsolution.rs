//! Asymptotic phase-averaged Husimi profiles and their photon statistics.
//!
//! Three analytic forms are provided:
//!
//! * generating: `Q0 = N0 (1 − I/I_-4)^e1 |1 − I/I_+4|^e2 exp(−(b52/b42) I)`,
//!   the zeroth-order solution for strong coupling `c·I_s ≫ 1`;
//! * thermal: `Q1 = N0 e^{I/a}`, valid far below threshold;
//! * gaussian: `N0 exp(−(I − I0)²/2σ²)` with `σ² = 1 + I0(2 + Qf_lin)`.
//!
//! Profiles are evaluated in the log domain: the exponents of the
//! generating form reach several hundred. Moments use the measure
//! `π∫…dI`, under which `π∫Q dI = 1` and `π∫I Q dI = ⟨n⟩ + 1`.

use crate::coeffs::{analyze, CoeffTable, PolySet, RootCatalog, ThermalRoot};
use crate::error::{Error, Result};
use crate::linear_theory::{linear_theory, LinearTheoryResult};
use crate::numerics::{Integrand, PoissonSeries, Quadrature};
use crate::params::ReducedParams;
use serde::Serialize;
use std::f64::consts::PI;

/// Relative level below which the profile is treated as negligible when
/// placing the upper cutoff.
const CUTOFF_LEVEL: f64 = 1e-14;
/// Largest tail mass beyond the cutoff, relative to the total.
const TAIL_MASS: f64 = 1e-10;
const GRID_POINTS: usize = 401;
/// `c·I_s` below which the generating solution is flagged.
const WEAK_COUPLING: f64 = 50.0;
/// `I_s` below which the gaussian form is flagged.
const BAD_CAVITY: f64 = 10.0;
/// Default sub-threshold switch `r < θ·r_th`.
pub const DEFAULT_THETA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Generating,
    Thermal,
    Gaussian,
    Oracle,
}

impl ProfileKind {
    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::Generating => "generating",
            ProfileKind::Thermal => "thermal",
            ProfileKind::Gaussian => "gaussian",
            ProfileKind::Oracle => "oracle",
        }
    }
}

impl std::fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "warning", rename_all = "snake_case")]
pub enum ProfileWarning {
    /// `c·I_s` is too small for the first-order reduction to be accurate.
    WeakCoupling { coupling_strength: f64 },
    /// `I_s` is too small for the gaussian approximation.
    BadCavity { i_s: f64 },
}

/// Exponents and roots of the generating solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeneratingShape {
    pub i_minus4: f64,
    pub i_plus4: f64,
    pub i_minus5: f64,
    pub i_plus5: f64,
    pub e1: f64,
    pub e2: f64,
    /// `b52 / b42`.
    pub rate: f64,
}

impl GeneratingShape {
    pub fn new(table: &CoeffTable, roots: &RootCatalog) -> Result<Self> {
        if !(table.b42 > 0.0) {
            return Err(Error::Regime(format!("b42 = {} is not positive", table.b42)));
        }
        let missing = |what: &str| Error::Regime(format!("{what} has no real root pair"));
        let (m4, p4) = roots
            .i_minus4()
            .zip(roots.i_plus4())
            .ok_or_else(|| missing("f1"))?;
        let (m5, p5) = roots
            .i_minus5()
            .zip(roots.i_plus5())
            .ok_or_else(|| missing("f0"))?;
        if !(m4 < 0.0) {
            return Err(Error::Regime(format!("I_-4 = {m4} is not negative")));
        }
        if m4 == p4 {
            return Err(Error::Regime("f1 has a double root".into()));
        }
        let rate = table.b52 / table.b42;
        let e1 = -rate * (m4 - m5) * (m4 - p5) / (m4 - p4);
        let e2 = rate * (p4 - m5) * (p4 - p5) / (m4 - p4);
        if p4 > 0.0 && e2 <= -1.0 {
            return Err(Error::Regime(format!(
                "exponent e2 = {e2} <= -1 at I_+4 = {p4}: profile is not normalizable"
            )));
        }
        Ok(Self {
            i_minus4: m4,
            i_plus4: p4,
            i_minus5: m5,
            i_plus5: p5,
            e1,
            e2,
            rate,
        })
    }

    fn ln_value_parts(&self, i: f64, ln_abs_second: f64) -> f64 {
        let second = if self.e2 == 0.0 { 0.0 } else { self.e2 * ln_abs_second };
        self.e1 * (-i / self.i_minus4).ln_1p() + second - self.rate * i
    }

    pub fn ln_value(&self, i: f64) -> f64 {
        self.ln_value_parts(i, (1.0 - i / self.i_plus4).abs().ln())
    }

    /// `d ln Q0 / dI`.
    pub fn ln_derivative(&self, i: f64) -> f64 {
        self.e1 / (i - self.i_minus4) + self.e2 / (i - self.i_plus4) - self.rate
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum Shape {
    Generating(GeneratingShape),
    Thermal { a: f64 },
    Gaussian { center: f64, sigma2: f64 },
    /// `Q = Σ p_n K_n(I) / π` from Fock populations.
    Oracle {
        #[serde(skip)]
        series: PoissonSeries,
        cutoff: usize,
    },
}

impl Shape {
    /// Logarithm of the profile without its normalization constant.
    fn ln_value(&self, i: f64) -> f64 {
        match self {
            Shape::Generating(g) => g.ln_value(i),
            Shape::Thermal { a } => i / a,
            Shape::Gaussian { center, sigma2 } => -(i - center) * (i - center) / (2.0 * sigma2),
            Shape::Oracle { series, .. } => (series.value(i) / PI).ln(),
        }
    }

    fn ln_value_offset(&self, anchor: f64, offset: f64) -> f64 {
        match self {
            Shape::Generating(g) if anchor == g.i_plus4 => {
                g.ln_value_parts(anchor + offset, (offset / g.i_plus4).abs().ln())
            }
            _ => self.ln_value(anchor + offset),
        }
    }

    /// Points in `[0, ∞)` where the profile may be singular or has a cusp.
    fn singular_points(&self) -> Vec<f64> {
        match self {
            Shape::Generating(g) if g.i_plus4 > 0.0 && g.e2 != 0.0 => vec![g.i_plus4],
            _ => vec![],
        }
    }

    /// Candidates for the maximum, and a point beyond which the profile
    /// decreases monotonically.
    fn landmarks(&self) -> (Vec<f64>, f64) {
        match self {
            Shape::Generating(g) => {
                let crit: Vec<f64> = [0.0, g.i_minus5, g.i_plus5]
                    .into_iter()
                    .filter(|&x| x >= 0.0 && x != g.i_plus4)
                    .collect();
                let beyond = crit.iter().copied().fold(g.i_plus4.max(0.0), f64::max);
                (crit, beyond)
            }
            Shape::Thermal { .. } => (vec![0.0], 0.0),
            Shape::Gaussian { center, .. } => {
                let c = center.max(0.0);
                (vec![c], c)
            }
            Shape::Oracle { cutoff, .. } => {
                let n = *cutoff as f64;
                ((0..=*cutoff).map(|k| k as f64).collect(), n)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub i: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QProfile {
    pub kind: ProfileKind,
    pub params: ReducedParams,
    pub shape: Shape,
    /// `ln N0`.
    pub ln_norm: f64,
    pub i_max: f64,
    pub grid: Vec<GridPoint>,
    pub normalized: bool,
    pub warnings: Vec<ProfileWarning>,
}

fn quadrature() -> Quadrature {
    Quadrature {
        abs_tol: 1e-14,
        rel_tol: 1e-12,
        max_panels: 20_000,
        singular_points: vec![],
    }
}

impl QProfile {
    /// Builds an unnormalized profile scaled to order one at its maximum,
    /// with the cutoff placed and the grid sampled.
    pub fn build(
        kind: ProfileKind,
        params: ReducedParams,
        shape: Shape,
        warnings: Vec<ProfileWarning>,
    ) -> Result<Self> {
        let (candidates, beyond) = shape.landmarks();
        let peak = candidates
            .iter()
            .map(|&x| shape.ln_value(x))
            .filter(|v| v.is_finite())
            .fold(f64::NEG_INFINITY, f64::max);
        if !peak.is_finite() {
            return Err(Error::Domain("profile vanishes at every landmark".into()));
        }
        let mut profile = Self {
            kind,
            params,
            shape,
            ln_norm: -peak,
            i_max: beyond,
            grid: vec![],
            normalized: false,
            warnings,
        };
        profile.place_cutoff(beyond)?;
        profile.resample();
        Ok(profile)
    }

    fn place_cutoff(&mut self, beyond: f64) -> Result<()> {
        let level = CUTOFF_LEVEL.ln();
        let mut h = (0.05 * beyond).max(1.0);
        let mut steps = 0;
        while self.ln_value(beyond + h) > level {
            h *= 2.0;
            steps += 1;
            if steps > 200 || !(beyond + h).is_finite() {
                return Err(Error::Integration(crate::numerics::NumericsError::NonConvergent {
                    a: 0.0,
                    b: beyond + h,
                    value: f64::INFINITY,
                    error: f64::INFINITY,
                    panels: 0,
                }));
            }
        }
        self.i_max = beyond + h;
        // grow geometrically until the remaining tail is negligible
        for _ in 0..60 {
            let mass = self.integrate_power(0.0, 0)?;
            let tail = quadrature()
                .integrate(&Weighted::new(self, 0.0, 0), self.i_max, f64::INFINITY)
                .map_err(Error::Integration)?
                .value;
            if tail < TAIL_MASS * mass {
                return Ok(());
            }
            h *= 1.5;
            self.i_max = beyond + h;
        }
        Err(Error::Integration(crate::numerics::NumericsError::NonConvergent {
            a: self.i_max,
            b: f64::INFINITY,
            value: f64::NAN,
            error: f64::NAN,
            panels: 0,
        }))
    }

    pub(crate) fn resample(&mut self) {
        let step = self.i_max / (GRID_POINTS - 1) as f64;
        self.grid = (0..GRID_POINTS)
            .map(|k| k as f64 * step)
            .filter_map(|i| {
                let q = self.value(i);
                (q.is_finite() && q >= 0.0).then_some(GridPoint { i, q })
            })
            .collect();
    }

    /// `ln Q(I)`.
    pub fn ln_value(&self, i: f64) -> f64 {
        self.ln_norm + self.shape.ln_value(i)
    }

    /// `Q(I)`, with the modulus convention past `I_+4`.
    pub fn value(&self, i: f64) -> f64 {
        match &self.shape {
            Shape::Oracle { series, .. } => series.value(i) / PI * self.ln_norm.exp(),
            _ => self.ln_value(i).exp(),
        }
    }

    fn value_offset(&self, anchor: f64, offset: f64) -> f64 {
        (self.ln_norm + self.shape.ln_value_offset(anchor, offset)).exp()
    }

    /// Normalization constant `N0` of the analytic form.
    pub fn norm_constant(&self) -> f64 {
        self.ln_norm.exp()
    }

    pub fn singular_points(&self) -> Vec<f64> {
        self.shape
            .singular_points()
            .into_iter()
            .filter(|&s| s > 0.0 && s < self.i_max)
            .collect()
    }

    /// `∫_0^{I_max} (I − center)^power Q(I) dI`.
    pub fn integrate_power(&self, center: f64, power: i32) -> Result<f64> {
        quadrature()
            .singular_at(&self.singular_points())
            .integrate(&Weighted::new(self, center, power), 0.0, self.i_max)
            .map(|e| e.value)
            .map_err(Error::Integration)
    }

    /// `π∫Q dI`.
    pub fn mass(&self) -> Result<f64> {
        Ok(PI * self.integrate_power(0.0, 0)?)
    }
}

impl Integrand for QProfile {
    fn eval(&self, x: f64) -> f64 {
        self.value(x)
    }

    fn eval_offset(&self, anchor: f64, offset: f64) -> f64 {
        self.value_offset(anchor, offset)
    }
}

struct Weighted<'a> {
    profile: &'a QProfile,
    center: f64,
    power: i32,
}

impl<'a> Weighted<'a> {
    fn new(profile: &'a QProfile, center: f64, power: i32) -> Self {
        Self {
            profile,
            center,
            power,
        }
    }

    fn weight(&self, x: f64) -> f64 {
        if self.power == 0 {
            1.0
        } else {
            (x - self.center).powi(self.power)
        }
    }
}

impl Integrand for Weighted<'_> {
    fn eval(&self, x: f64) -> f64 {
        self.weight(x) * self.profile.value(x)
    }

    fn eval_offset(&self, anchor: f64, offset: f64) -> f64 {
        self.weight(anchor + offset) * self.profile.value_offset(anchor, offset)
    }
}

/// Rescales the profile so that `π∫Q dI = 1`.
pub fn normalize(mut profile: QProfile) -> Result<QProfile> {
    let mass = profile.mass()?;
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::Domain(format!("profile mass {mass} is not positive")));
    }
    profile.ln_norm -= mass.ln();
    profile.normalized = true;
    profile.resample();
    Ok(profile)
}

pub fn q_generating(params: &ReducedParams, roots: &RootCatalog, table: &CoeffTable) -> Result<QProfile> {
    let shape = GeneratingShape::new(table, roots)?;
    let mut warnings = vec![];
    if params.coupling_strength() < WEAK_COUPLING {
        warnings.push(ProfileWarning::WeakCoupling {
            coupling_strength: params.coupling_strength(),
        });
    }
    normalize(QProfile::build(
        ProfileKind::Generating,
        *params,
        Shape::Generating(shape),
        warnings,
    )?)
}

pub fn q_thermal(params: &ReducedParams, root: ThermalRoot) -> Result<QProfile> {
    thermal_profile(params, root.a)
}

/// Thermal profile for an explicit decay constant `a`.
pub fn thermal_profile(params: &ReducedParams, a: f64) -> Result<QProfile> {
    if !(a < 0.0) {
        return Err(Error::RootSelection(format!("thermal constant a = {a} is not negative")));
    }
    let mut p = QProfile::build(ProfileKind::Thermal, *params, Shape::Thermal { a }, vec![])?;
    // N0 = −1/(πa) exactly
    p.ln_norm = -(-PI * a).ln();
    p.normalized = true;
    p.resample();
    Ok(p)
}

pub fn q_gaussian(params: &ReducedParams, lin: &LinearTheoryResult) -> Result<QProfile> {
    let (Some(sigma2), true) = (lin.variance(), lin.valid) else {
        return Err(Error::Regime("linear theory is outside its lasing window".into()));
    };
    let mut warnings = vec![];
    if params.i_s() < BAD_CAVITY {
        warnings.push(ProfileWarning::BadCavity { i_s: params.i_s() });
    }
    normalize(QProfile::build(
        ProfileKind::Gaussian,
        *params,
        Shape::Gaussian {
            center: lin.i0,
            sigma2,
        },
        warnings,
    )?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldMoments {
    pub mean_photon: f64,
    /// `π∫I Q dI = ⟨a a†⟩`.
    pub mean_i_q: f64,
    /// `π∫I² Q dI = ⟨a² a†²⟩`.
    pub second_moment_i_q: f64,
    /// `None` when the state is too close to vacuum.
    pub mandel_qf: Option<f64>,
}

impl FieldMoments {
    /// From the antinormal moments `m1 = π∫I Q` and the variance of `I`
    /// under `Q`.
    pub fn from_antinormal(m1: f64, var_i: f64) -> Self {
        let mandel_qf = (m1 > 1.0 + 1e-12).then(|| (var_i - m1) / (m1 - 1.0) - 1.0);
        Self {
            mean_photon: m1 - 1.0,
            mean_i_q: m1,
            second_moment_i_q: var_i + m1 * m1,
            mandel_qf,
        }
    }
}

pub fn moments(profile: &QProfile) -> Result<FieldMoments> {
    let m0 = profile.integrate_power(0.0, 0)?;
    let m1 = profile.integrate_power(0.0, 1)? / m0;
    let var = profile.integrate_power(m1, 2)? / m0;
    Ok(FieldMoments::from_antinormal(m1, var))
}

/// Thermal below `θ·r_th`, generating otherwise. Without a lasing window
/// (`c <= 8`) the thermal form is always chosen.
pub fn select_solution(params: &ReducedParams, theta: f64) -> ProfileKind {
    match linear_theory(params).thresholds {
        Some(t) if params.r() >= theta * t.r_th => ProfileKind::Generating,
        _ => ProfileKind::Thermal,
    }
}

/// The asymptotic profile chosen by [`select_solution`].
pub fn asymptotic_profile(params: &ReducedParams, theta: f64) -> Result<QProfile> {
    let (table, _, roots) = analyze(params)?;
    match select_solution(params, theta) {
        ProfileKind::Thermal => q_thermal(params, roots.thermal_root()?),
        _ => q_generating(params, &roots, &table),
    }
}

/// Relative residual of `f1 Q0' + f0 Q0 = 0` at `I`, from the analytic log
/// derivative.
pub fn generating_residual(shape: &GeneratingShape, polys: &PolySet, i: f64) -> f64 {
    let lhs = polys.eval(1, i) * shape.ln_derivative(i);
    let rhs = polys.eval(0, i);
    (lhs + rhs).abs() / (lhs.abs() + rhs.abs())
}

//! Rate constants and the two dimensionless parameterizations.
//!
//! `(r, I_s, c)` is the user-facing triple:
//! `r = Γ/γ`, `I_s = γ/κ`, `c = 4g²/(γκ)`.
//! The coefficient table is written in `ω = Γ/2g`, `η = γ/2g`, `τ = κ/2g`.
//! The two are related by `r = ω/η`, `I_s = η/τ`, `c = 1/(ητ)`.

use crate::error::{require_positive, Result};
use serde::{Deserialize, Serialize};

/// Rates of the master equation: pump `Γ`, atomic decay `γ`, cavity decay
/// `κ` and coupling `g`, all in the same inverse time unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSet {
    pub pump_rate: f64,
    pub decay_rate: f64,
    pub cavity_rate: f64,
    pub coupling: f64,
}

impl RateSet {
    pub fn new(pump_rate: f64, decay_rate: f64, cavity_rate: f64, coupling: f64) -> Result<Self> {
        let rates = Self {
            pump_rate,
            decay_rate,
            cavity_rate,
            coupling,
        };
        rates.validate()?;
        Ok(rates)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("pump rate", self.pump_rate)?;
        require_positive("decay rate", self.decay_rate)?;
        require_positive("cavity rate", self.cavity_rate)?;
        require_positive("coupling", self.coupling)
    }

    pub fn total(&self) -> f64 {
        self.pump_rate + self.decay_rate + self.cavity_rate + self.coupling
    }
}

/// Both dimensionless parameter sets of one physical point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedParams {
    r: f64,
    i_s: f64,
    c: f64,
    omega: f64,
    eta: f64,
    tau: f64,
}

impl ReducedParams {
    /// From the pump `r`, saturation intensity `I_s` and cooperativity `c`.
    pub fn new(r: f64, i_s: f64, c: f64) -> Result<Self> {
        require_positive("r", r)?;
        require_positive("I_s", i_s)?;
        require_positive("c", c)?;
        let tau = 1.0 / (c * i_s).sqrt();
        let eta = i_s * tau;
        Ok(Self {
            r,
            i_s,
            c,
            omega: r * eta,
            eta,
            tau,
        })
    }

    /// From the scaled variables `ω`, `η`, `τ`.
    pub fn from_scaled(omega: f64, eta: f64, tau: f64) -> Result<Self> {
        require_positive("omega", omega)?;
        require_positive("eta", eta)?;
        require_positive("tau", tau)?;
        Ok(Self {
            r: omega / eta,
            i_s: eta / tau,
            c: 1.0 / (eta * tau),
            omega,
            eta,
            tau,
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn i_s(&self) -> f64 {
        self.i_s
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `c · I_s = (g/κ)²·4`, large in the classical regime.
    pub fn coupling_strength(&self) -> f64 {
        self.c * self.i_s
    }

    /// Same point with a different pump.
    pub fn with_r(&self, r: f64) -> Result<Self> {
        Self::new(r, self.i_s, self.c)
    }
}

pub fn reduce(rates: &RateSet) -> Result<ReducedParams> {
    rates.validate()?;
    let RateSet {
        pump_rate: big_gamma,
        decay_rate: gamma,
        cavity_rate: kappa,
        coupling: g,
    } = *rates;
    let two_g = 2.0 * g;
    Ok(ReducedParams {
        r: big_gamma / gamma,
        i_s: gamma / kappa,
        c: 4.0 * g * g / (gamma * kappa),
        omega: big_gamma / two_g,
        eta: gamma / two_g,
        tau: kappa / two_g,
    })
}

/// Rates with `κ = kappa_scale` reproducing `(r, I_s, c)`. Every observable
/// is dimensionless, so the choice of `kappa_scale` only fixes the time unit.
pub fn from_dimensionless(r: f64, i_s: f64, c: f64, kappa_scale: f64) -> Result<RateSet> {
    require_positive("r", r)?;
    require_positive("I_s", i_s)?;
    require_positive("c", c)?;
    require_positive("kappa scale", kappa_scale)?;
    let kappa = kappa_scale;
    let gamma = i_s * kappa;
    RateSet::new(r * gamma, gamma, kappa, (c * gamma * kappa).sqrt() / 2.0)
}

impl From<ReducedParams> for RateSet {
    fn from(p: ReducedParams) -> Self {
        from_dimensionless(p.r, p.i_s, p.c, 1.0).expect("ReducedParams are positive")
    }
}

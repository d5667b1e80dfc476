use crate::numerics::NumericsError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Domain(String),
    #[error("outside the validity regime: {0}")]
    Regime(String),
    #[error("degenerate coefficient table: {0}")]
    Degenerate(&'static str),
    #[error("root selection failed: {0}")]
    RootSelection(String),
    #[error("integration failed: {0}")]
    Integration(NumericsError),
    #[error("Fock cutoff {cutoff} too small: tail mass {tail_mass:e}")]
    CutoffTooSmall { cutoff: usize, tail_mass: f64 },
    #[error("numerical failure: {0}")]
    Numerical(NumericsError),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {v}")))
    }
}

impl Error {
    /// Short stable identifier, used as a reason code in tabular output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Regime(_) => "regime",
            Error::Degenerate(_) => "degenerate",
            Error::RootSelection(_) => "root_selection",
            Error::Integration(_) => "integration",
            Error::CutoffTooSmall { .. } => "cutoff_too_small",
            Error::Numerical(_) => "numerical",
        }
    }
}

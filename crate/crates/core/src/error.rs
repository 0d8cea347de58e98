use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("double-well regime (e_l = {e_l} < e_j = {e_j}); closed-form path requires e_l >= e_j")]
    DoubleWell { e_j: f64, e_l: f64 },

    #[error("degenerate potential: quadratic and quartic coefficients are both zero")]
    DegeneratePotential,

    #[error("operation requires the sweet spot phi_diff = pi, got {phi_diff}")]
    NotSweetSpot { phi_diff: f64 },

    #[error("level index {index} out of range ({available} levels available)")]
    LevelOutOfRange { index: usize, available: usize },

    #[error("state {level} leaks to the grid boundary (|psi| = {amplitude:e}); widen the phase grid")]
    BoundaryLeakage { level: usize, amplitude: f64 },

    #[error("charge cutoff too small: population {population:e} at the basis edge")]
    CutoffTooSmall { population: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("no sign change found for {what} in [{lo:e}, {hi:e}]")]
    NoSignChange { what: &'static str, lo: f64, hi: f64 },

    #[error("dephasing envelope evaluated outside its domain: t = {t:e} s, limit = {limit:e} s")]
    EnvelopeDomain { t: f64, limit: f64 },

    #[error("zero anharmonicity: harmonic mode cannot be operated as a qubit")]
    ZeroAnharmonicity,

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True when the error stems from rejected inputs rather than a numerical failure.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::InvalidParameter { .. }
            | Error::DoubleWell { .. }
            | Error::DegeneratePotential
            | Error::NotSweetSpot { .. }
            | Error::LevelOutOfRange { .. }
            | Error::ZeroAnharmonicity
            | Error::EnvelopeDomain { .. } => true,
            Error::Stage { source, .. } => source.is_validation(),
            _ => false,
        }
    }

    pub(crate) fn at_stage(self, stage: &'static str) -> Error {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// Innermost error, unwrapping stage context.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

pub(crate) fn ensure_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and >= 0",
        })
    }
}

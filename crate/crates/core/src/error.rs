use thiserror::Error;

use crate::decomposition::ChannelKind;

pub type Result<T> = std::result::Result<T, Error>;

/// Which reservoir an error or diagnostic refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Hot,
    Cold,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Hot => f.write_str("hot"),
            Side::Cold => f.write_str("cold"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {what} has {found} entries, expected {expected}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("density matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("density matrix trace is {trace}, expected 1")]
    Trace { trace: f64 },
    #[error("density matrix is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPositive { eigenvalue: f64 },
    #[error("reservoir is not stationary: ||[H, rho]|| = {norm:e} exceeds {tol:e}")]
    NotStationary { norm: f64, tol: f64 },
    #[error("temperature must be positive, got {0}")]
    Temperature(f64),
    #[error("effective temperature undefined for {kind:?} channel ({hi}, {lo})")]
    TemperatureUndefined { kind: ChannelKind, hi: usize, lo: usize },
    #[error("{side} reservoir is a work reservoir: population inversion on channel ({hi}, {lo})")]
    WorkReservoir { side: Side, hi: usize, lo: usize },
    #[error("{side} reservoir has no channel eligible for the extremal search")]
    NoEligibleChannel { side: Side },
    #[error("tuple ({m}, {n}, {p}, {q}) references level out of range")]
    IndexOutOfRange { m: usize, n: usize, p: usize, q: usize },
    #[error("tuple ({m}, {n}, {p}, {q}) is not canonical: requires E_hot[m] > E_hot[n]")]
    NotCanonical { m: usize, n: usize, p: usize, q: usize },
    #[error("generalized bound is not applicable: {0}")]
    NotApplicable(String),
    #[error("saturating engine: {0}")]
    Construction(String),
    #[error("quadrature did not converge: estimates {coarse:e} and {fine:e}")]
    Convergence { coarse: f64, fine: f64 },
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

impl Error {
    /// Stable upper-case name of the failed check.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension { .. } => "DIMENSION",
            Error::Invalid { .. } => "INVALID",
            Error::NotHermitian { .. } => "NOT_HERMITIAN",
            Error::Trace { .. } => "TRACE",
            Error::NotPositive { .. } => "NOT_POSITIVE",
            Error::NotStationary { .. } => "NOT_STATIONARY",
            Error::Temperature(_) => "TEMPERATURE",
            Error::TemperatureUndefined { .. } => "TEMPERATURE_UNDEFINED",
            Error::WorkReservoir { .. } => "WORK_RESERVOIR",
            Error::NoEligibleChannel { .. } => "NO_ELIGIBLE_CHANNEL",
            Error::IndexOutOfRange { .. } => "INDEX_OUT_OF_RANGE",
            Error::NotCanonical { .. } => "NOT_CANONICAL",
            Error::NotApplicable(_) => "NOT_APPLICABLE",
            Error::Construction(_) => "CONSTRUCTION",
            Error::Convergence { .. } => "CONVERGENCE",
            Error::Consistency(_) => "CONSISTENCY",
        }
    }

    /// Field named by input errors, if any.
    pub fn field(&self) -> Option<&'static str> {
        match self {
            Error::Dimension { what, .. } => Some(what),
            Error::Invalid { field, .. } => Some(field),
            _ => None,
        }
    }
}

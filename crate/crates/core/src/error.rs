//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument fell outside the domain of a special function or operation.
    #[error("domain error in {function}: {message}")]
    Domain {
        function: &'static str,
        message: String,
    },

    /// Exact enumeration was requested beyond the configured cap.
    #[error("enumeration cap exceeded: mass {requested} > cap {cap}")]
    EnumerationCap { requested: u64, cap: u64 },

    /// The chemical potential does not exceed `mu*`, so some occupation
    /// probabilities would be >= 1 and the product measure does not exist.
    #[error("chemical potential {mu} must exceed mu* = {mu_star}")]
    ChemicalPotentialTooLow { mu: f64, mu_star: f64 },

    /// Per-monomer energies diverge to -infinity; no grand canonical measure
    /// exists for any chemical potential.
    #[error("grand canonical measures do not exist: per-monomer energy is unbounded below")]
    NoGrandCanonicalMeasure,

    /// A series value was requested where the defining sum diverges.
    #[error("series does not converge: {reason}")]
    NonConvergent { reason: String },

    /// The scaled size distribution is non-integrable at x = 0 in this regime.
    #[error("scaled size distribution diverges at x = 0 in this regime")]
    DivergentAtZero,

    /// No chemical potential reaches the requested expected mass.
    #[error("target mass {target} is unreachable: expected mass stays bounded")]
    TargetUnreachable { target: f64 },

    /// Conditioned sampling gave up before collecting the requested draws.
    #[error("rejection sampling budget exhausted after {attempts} attempts")]
    RejectionBudget { attempts: u64 },

    /// A configuration value failed validation.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Condensation analysis needs at least one state attaining the ground
    /// state energy at finite part size.
    #[error("no condensate state: ground state is not attained at any finite part size")]
    NoCondensateState,

    /// Statistics were requested over an empty sample set.
    #[error("empty sample set")]
    EmptySampleSet,

    /// The evaluation grid does not cover the requested range.
    #[error("grid does not cover the requested range [{y}, {x_max}]")]
    GridCoverage { y: f64, x_max: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

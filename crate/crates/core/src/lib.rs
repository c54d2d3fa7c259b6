//! Grand-canonical Gibbs ensembles of integer partitions.
//!
//! Partitions are weighted by `exp(−βH(p) − μ·Mon(p))` with the separable
//! Hamiltonian `H(p) = Σ E_k p_k`; occupation numbers are then independent
//! geometric variables with weights `θ_k = exp(−βE_k − μk)`. The set
//! partition (Bell) variant replaces them with Poisson variables of rate
//! `θ_k/k!`. This crate provides:
//!
//! - exact combinatorics of partitions (enumeration, partition numbers);
//! - energy models `E_k = u(ln k)` with ground-state and regime analysis;
//! - certified truncated series for the grand potential, expected mass,
//!   and the moments of the scaled size distribution `F_μ`;
//! - closed-form limit shapes with their Young-diagram cell scalings;
//! - reproducible samplers for the quantum, classical, and canonical
//!   ensembles;
//! - a verification lab measuring empirical shapes, condensation, and the
//!   critical-temperature Poisson process.

// `!(x > 0.0)` is used throughout as a NaN-rejecting domain guard; the
// positive-form comparison would silently accept NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod energy;
pub mod error;
pub mod lab;
pub mod partition;
pub mod rng;
pub mod sampler;
pub mod shape;
pub mod special;
pub mod stats;

pub use analytics::{
    canonical_sum, expected_monomers, expected_scaled_f, log_grand_potential, mu_for_target_mass,
    variance_monomers, variance_scaled_f, KahanSum, SeriesValue,
};
pub use energy::{EnergyKind, EnergyModel, GroundState, RegimeRow, RegimeTag, Scenario, TailKind};
pub use error::{Error, Result};
pub use lab::{
    bell_step_report, condensation_report, convergence_study, critical_process_report,
    deviation_report, empirical_scaled_f, solve_nu, BellStepReport, CondensationReport,
    ConvergenceReport, CriticalProcessReport, DeviationReport, EmpiricalShape, Grid,
    ReferenceCurve,
};
pub use partition::{
    enumerate_partitions, enumerate_partitions_with_cap, hardy_ramanujan_estimate,
    hardy_ramanujan_ratio, partition_number, Partition, SizeDistribution,
    DEFAULT_ENUMERATION_CAP,
};
pub use sampler::{
    canonical_distribution, sample, truncation_index, CanonicalStrategy, EnsembleKind,
    SampleRun, SamplerConfig,
};
pub use shape::{limit_shape, LimitShape, ShapeOutcome};

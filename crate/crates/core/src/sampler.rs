//! Random partition samplers for the grand canonical ensembles (geometric
//! marginals for integer partitions, Poisson marginals for set partitions)
//! and the canonical ensemble obtained by conditioning on the total mass.
//!
//! All draws are reproducible: replica `i` consumes stream `(seed, i)` and
//! nothing else, so results are independent of how replicas are scheduled.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::analytics::{self, KahanSum};
use crate::energy::{EnergyModel, Scenario};
use crate::error::{Error, Result};
use crate::partition::{enumerate_partitions_with_cap, Partition, DEFAULT_ENUMERATION_CAP};
use crate::rng::ReplicaRng;

/// Which measure to draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EnsembleKind {
    /// Geometric occupation numbers (integer partitions).
    QuantumGrandCanonical,
    /// Poisson occupation numbers (set partitions).
    ClassicalGrandCanonical,
    /// Conditioned on total mass `M`.
    Canonical { mass: u64 },
}

/// How conditioned draws are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CanonicalStrategy {
    /// Enumeration for small masses, rejection otherwise.
    Auto,
    /// Exact enumeration with Boltzmann weights (requires `mass <= cap`).
    Enumeration,
    /// Rejection from the tuned grand canonical ensemble.
    Rejection,
}

/// Full sampler configuration.
#[derive(Debug, Clone, Serialize)]
pub struct SamplerConfig {
    pub model: EnergyModel,
    pub mu: f64,
    pub ensemble: EnsembleKind,
    pub truncation_tol: f64,
    pub seed: u64,
    pub replicas: u64,
    pub canonical_strategy: CanonicalStrategy,
    /// Attempt budget for rejection-conditioned sampling.
    pub max_rejection_attempts: u64,
}

impl SamplerConfig {
    pub fn new(model: EnergyModel, mu: f64, ensemble: EnsembleKind) -> Self {
        Self {
            model,
            mu,
            ensemble,
            truncation_tol: 1e-9,
            seed: 0,
            replicas: 1,
            canonical_strategy: CanonicalStrategy::Auto,
            max_rejection_attempts: 10_000_000,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_replicas(mut self, replicas: u64) -> Self {
        self.replicas = replicas;
        self
    }

    pub fn with_truncation_tol(mut self, tol: f64) -> Self {
        self.truncation_tol = tol;
        self
    }

    pub fn with_strategy(mut self, strategy: CanonicalStrategy) -> Self {
        self.canonical_strategy = strategy;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.truncation_tol > 0.0) {
            return Err(Error::InvalidConfig("truncation_tol must be > 0".into()));
        }
        if self.replicas == 0 {
            return Err(Error::InvalidConfig("replicas must be >= 1".into()));
        }
        match self.ensemble {
            EnsembleKind::QuantumGrandCanonical => {
                let ground = self.model.ground_state();
                if ground.scenario() == Scenario::S1 && self.model.beta() > 0.0 {
                    return Err(Error::NoGrandCanonicalMeasure);
                }
                if !(self.mu > ground.mu_star) {
                    return Err(Error::ChemicalPotentialTooLow {
                        mu: self.mu,
                        mu_star: ground.mu_star,
                    });
                }
            }
            EnsembleKind::ClassicalGrandCanonical => {
                classical_summability(&self.model)?;
            }
            EnsembleKind::Canonical { .. } => {}
        }
        Ok(())
    }
}

/// Poisson rates are summable unless negative energies overpower the
/// factorial, which needs super-linear decay of `E_k` to `-∞`.
fn classical_summability(model: &EnergyModel) -> Result<()> {
    if model.beta() == 0.0 {
        return Ok(());
    }
    if let crate::energy::EnergyKind::Table {
        tail: crate::energy::TailKind::Power { coeff, exponent },
        ..
    } = model.kind()
    {
        if *coeff < 0.0 && *exponent > 1.0 {
            return Err(Error::NonConvergent {
                reason: "Poisson rates diverge: energies sink faster than -k ln k".into(),
            });
        }
    }
    Ok(())
}

/// Smallest tested truncation index `K` with a certified bound
/// `Σ_{k>K} θ_k <= tol` (quantum) or `Σ_{k>K} α_k <= tol` (classical).
pub fn truncation_index(model: &EnergyModel, mu: f64, tol: f64, ensemble: EnsembleKind) -> Result<u64> {
    match ensemble {
        EnsembleKind::QuantumGrandCanonical | EnsembleKind::Canonical { .. } => {
            quantum_truncation(model, mu, tol)
        }
        EnsembleKind::ClassicalGrandCanonical => classical_truncation(model, mu, tol),
    }
}

fn quantum_tail_bound(model: &EnergyModel, mu: f64, big_k: u64) -> f64 {
    let decay = mu + model.beta() * model.eps_lower_bound_beyond(big_k);
    if !(decay > 0.0) {
        return f64::INFINITY;
    }
    let r = (-decay).exp();
    ((big_k as f64 + 1.0) * r.ln()).exp() / (1.0 - r)
}

fn quantum_truncation(model: &EnergyModel, mu: f64, tol: f64) -> Result<u64> {
    const K_MAX: u64 = 2_000_000_000;
    let mut k = 8u64;
    while quantum_tail_bound(model, mu, k) > tol {
        if k >= K_MAX {
            return Err(Error::NonConvergent {
                reason: "occupation tail does not certify".into(),
            });
        }
        k *= 2;
    }
    // Binary search the smallest K that certifies.
    let mut lo = 1u64;
    let mut hi = k;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if quantum_tail_bound(model, mu, mid) <= tol {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

fn classical_truncation(model: &EnergyModel, mu: f64, tol: f64) -> Result<u64> {
    classical_summability(model)?;
    // Successive-ratio bound: α_{k+1}/α_k = e^{−βΔE−μ}/(k+1) <= e^{βD−μ}/(k+1),
    // where D bounds single-step energy drops. Once the ratio is <= 1/2 the
    // tail is dominated by 2·α_{K+1}.
    let drop = model.energy_drop_bound();
    if drop == f64::INFINITY {
        return Err(Error::NonConvergent {
            reason: "no usable bound on energy drops".into(),
        });
    }
    let ratio_num = (model.beta() * drop - mu).exp();
    let k_half = (2.0 * ratio_num).ceil().max(8.0) as u64;
    let mut k = k_half;
    loop {
        let alpha_next = model.alpha(mu, k + 1);
        if 2.0 * alpha_next <= tol {
            return Ok(k);
        }
        k = k.saturating_add(k_half.max(16));
        if k > 100_000_000 {
            return Err(Error::NonConvergent {
                reason: "Poisson-rate tail does not certify".into(),
            });
        }
    }
}

/// Precomputed per-`k` data shared by every replica of one configuration.
struct QuantumPlan {
    /// `ln θ_k` for k = 1..=K.
    log_thetas: Vec<f64>,
    /// Sparse plan: prefix sums `W_i = Σ_{j<=i} −ln(1−θ_j)` over kept states.
    sparse: Option<SparsePlan>,
}

struct SparsePlan {
    /// Part sizes with nonzero weight, ascending.
    ks: Vec<u64>,
    /// `ln θ` aligned with `ks`.
    log_thetas: Vec<f64>,
    /// Inclusive prefix sums of `−ln(1−θ)`.
    prefix: Vec<f64>,
}

/// When the expected number of occupied states is far below the truncation
/// index, skip-sampling over the occupancy indicators is much cheaper than
/// drawing every geometric. The cutover is config-deterministic.
const SPARSE_CUTOVER: u64 = 4096;

fn quantum_plan(model: &EnergyModel, mu: f64, tol: f64) -> Result<QuantumPlan> {
    let big_k = quantum_truncation(model, mu, tol)?;
    let mut log_thetas = Vec::with_capacity(big_k as usize);
    for k in 1..=big_k {
        let lt = model.log_theta(mu, k);
        if lt >= 0.0 {
            return Err(Error::ChemicalPotentialTooLow {
                mu,
                mu_star: model.ground_state().mu_star,
            });
        }
        log_thetas.push(lt);
    }
    let sparse = if big_k >= SPARSE_CUTOVER {
        let mut ks = Vec::new();
        let mut lts = Vec::new();
        let mut prefix = Vec::new();
        let mut acc = KahanSum::new();
        for (i, &lt) in log_thetas.iter().enumerate() {
            if lt == f64::NEG_INFINITY {
                continue;
            }
            let theta = lt.exp();
            // −ln(1−θ) via ln1p for precision at both ends.
            let w = -(-theta).ln_1p();
            acc.add(w);
            ks.push(i as u64 + 1);
            lts.push(lt);
            prefix.push(acc.value());
        }
        Some(SparsePlan {
            ks,
            log_thetas: lts,
            prefix,
        })
    } else {
        None
    };
    Ok(QuantumPlan {
        log_thetas,
        sparse,
    })
}

fn sample_quantum_with_plan(plan: &QuantumPlan, rng: &mut ReplicaRng) -> Partition {
    let mut parts: BTreeMap<u64, u64> = BTreeMap::new();
    if let Some(sparse) = &plan.sparse {
        // Skip-sample the set of occupied states, then the conditional
        // geometric magnitude (>= 1) at each occupied state.
        let total = *sparse.prefix.last().unwrap_or(&0.0);
        let mut position = 0.0_f64;
        let mut idx = 0usize;
        loop {
            position += rng.exponential();
            if position >= total {
                break;
            }
            // First index with prefix >= position.
            let next = match sparse.prefix[idx..]
                .binary_search_by(|w| w.partial_cmp(&position).expect("finite prefix"))
            {
                Ok(i) | Err(i) => idx + i,
            };
            if next >= sparse.ks.len() {
                break;
            }
            let lt = sparse.log_thetas[next];
            let extra = rng.geometric_from_log_theta(lt);
            parts.insert(sparse.ks[next], 1 + extra);
            position = sparse.prefix[next];
            idx = next + 1;
            if idx >= sparse.ks.len() {
                break;
            }
        }
    } else {
        for (i, &lt) in plan.log_thetas.iter().enumerate() {
            if lt == f64::NEG_INFINITY {
                continue;
            }
            let count = rng.geometric_from_log_theta(lt);
            if count > 0 {
                parts.insert(i as u64 + 1, count);
            }
        }
    }
    Partition::from_multiplicities(parts).expect("sampled parts are positive")
}

struct ClassicalPlan {
    alphas: Vec<f64>, // α_k for k = 1..=K
}

fn classical_plan(model: &EnergyModel, mu: f64, tol: f64) -> Result<ClassicalPlan> {
    let big_k = classical_truncation(model, mu, tol)?;
    let alphas = (1..=big_k).map(|k| model.alpha(mu, k)).collect();
    Ok(ClassicalPlan { alphas })
}

fn sample_classical_with_plan(plan: &ClassicalPlan, rng: &mut ReplicaRng) -> Partition {
    let mut parts: BTreeMap<u64, u64> = BTreeMap::new();
    for (i, &alpha) in plan.alphas.iter().enumerate() {
        if alpha == 0.0 {
            continue;
        }
        let count = rng.poisson(alpha);
        if count > 0 {
            parts.insert(i as u64 + 1, count);
        }
    }
    Partition::from_multiplicities(parts).expect("sampled parts are positive")
}

/// Outcome of a sampling run.
#[derive(Debug, Clone)]
pub struct SampleRun {
    pub partitions: Vec<Partition>,
    /// Acceptance rate of rejection-conditioned sampling (1.0 otherwise).
    pub acceptance_rate: f64,
}

/// Draws one partition per replica, in replica order.
pub fn sample(config: &SamplerConfig) -> Result<SampleRun> {
    config.validate()?;
    match config.ensemble {
        EnsembleKind::QuantumGrandCanonical => {
            let plan = quantum_plan(&config.model, config.mu, config.truncation_tol)?;
            let partitions: Vec<Partition> = (0..config.replicas)
                .into_par_iter()
                .map(|replica| {
                    let mut rng = ReplicaRng::new(config.seed, replica);
                    sample_quantum_with_plan(&plan, &mut rng)
                })
                .collect();
            Ok(SampleRun {
                partitions,
                acceptance_rate: 1.0,
            })
        }
        EnsembleKind::ClassicalGrandCanonical => {
            let plan = classical_plan(&config.model, config.mu, config.truncation_tol)?;
            let partitions: Vec<Partition> = (0..config.replicas)
                .into_par_iter()
                .map(|replica| {
                    let mut rng = ReplicaRng::new(config.seed, replica);
                    sample_classical_with_plan(&plan, &mut rng)
                })
                .collect();
            Ok(SampleRun {
                partitions,
                acceptance_rate: 1.0,
            })
        }
        EnsembleKind::Canonical { mass } => sample_canonical(config, mass),
    }
}

fn sample_canonical(config: &SamplerConfig, mass: u64) -> Result<SampleRun> {
    let strategy = match config.canonical_strategy {
        CanonicalStrategy::Auto => {
            if mass <= 30 {
                CanonicalStrategy::Enumeration
            } else {
                CanonicalStrategy::Rejection
            }
        }
        other => other,
    };
    match strategy {
        CanonicalStrategy::Auto => unreachable!("resolved above"),
        CanonicalStrategy::Enumeration => {
            let weighted = canonical_table(&config.model, mass)?;
            let partitions: Vec<Partition> = (0..config.replicas)
                .into_par_iter()
                .map(|replica| {
                    let mut rng = ReplicaRng::new(config.seed, replica);
                    let u = rng.uniform();
                    let idx = match weighted
                        .cumulative
                        .binary_search_by(|w| w.partial_cmp(&u).expect("finite weights"))
                    {
                        Ok(i) => i + 1,
                        Err(i) => i,
                    }
                    .min(weighted.partitions.len() - 1);
                    weighted.partitions[idx].clone()
                })
                .collect();
            Ok(SampleRun {
                partitions,
                acceptance_rate: 1.0,
            })
        }
        CanonicalStrategy::Rejection => {
            // Mean-matching: tune μ so the grand canonical mass centers on M.
            let mu = analytics::mu_for_target_mass(&config.model, mass as f64, 1e-4)?;
            let plan = quantum_plan(&config.model, mu, config.truncation_tol)?;
            let budget_per_replica = config.max_rejection_attempts.max(1);
            let results: Vec<Result<(Partition, u64)>> = (0..config.replicas)
                .into_par_iter()
                .map(|replica| {
                    let mut rng = ReplicaRng::new(config.seed, replica);
                    for attempt in 1..=budget_per_replica {
                        let p = sample_quantum_with_plan(&plan, &mut rng);
                        if p.mass() == mass {
                            return Ok((p, attempt));
                        }
                    }
                    Err(Error::RejectionBudget {
                        attempts: budget_per_replica,
                    })
                })
                .collect();
            let mut partitions = Vec::with_capacity(results.len());
            let mut attempts_total = 0u64;
            for r in results {
                let (p, attempts) = r?;
                attempts_total += attempts;
                partitions.push(p);
            }
            Ok(SampleRun {
                acceptance_rate: partitions.len() as f64 / attempts_total as f64,
                partitions,
            })
        }
    }
}

struct CanonicalTable {
    partitions: Vec<Partition>,
    /// Cumulative normalized weights, same order as `partitions`.
    cumulative: Vec<f64>,
}

fn canonical_table(model: &EnergyModel, mass: u64) -> Result<CanonicalTable> {
    let partitions = enumerate_partitions_with_cap(mass, DEFAULT_ENUMERATION_CAP)?;
    let beta = model.beta();
    let weights: Vec<f64> = partitions
        .iter()
        .map(|p| {
            if beta == 0.0 {
                return 1.0;
            }
            let h: f64 = p.iter().map(|(k, c)| model.energy(k) * c as f64).sum();
            if h == f64::INFINITY {
                0.0
            } else {
                (-beta * h).exp()
            }
        })
        .collect();
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::NonConvergent {
            reason: "all canonical weights vanished".into(),
        });
    }
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in &weights {
        acc += w / total;
        cumulative.push(acc);
    }
    if let Some(last) = cumulative.last_mut() {
        *last = 1.0;
    }
    Ok(CanonicalTable {
        partitions,
        cumulative,
    })
}

/// Exact canonical probabilities by enumeration (for conditioning tests and
/// reports).
pub fn canonical_distribution(model: &EnergyModel, mass: u64) -> Result<Vec<(Partition, f64)>> {
    let table = canonical_table(model, mass)?;
    let mut prev = 0.0;
    Ok(table
        .partitions
        .into_iter()
        .zip(table.cumulative)
        .map(|(p, c)| {
            let prob = c - prev;
            prev = c;
            (p, prob)
        })
        .collect())
}

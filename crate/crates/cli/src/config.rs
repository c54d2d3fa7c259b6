//! Run configuration: JSON file plus flag overrides, resolved into the
//! core types. Every report embeds the resolved configuration so a run can
//! be replayed from its own output.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use gibbs_partitions::{
    CanonicalStrategy, EnergyModel, EnsembleKind, Error as CoreError, TailKind,
};

use crate::CliError;

/// Energy fragment: `{"kind": "decay|const|loglog|log|table", ...}`.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct EnergyConfig {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e1_override: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exclude_k1: Option<bool>,
}

/// Tail fragment for table energies.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TailConfig {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
}

/// Grid fragment: `{"min": .., "max": .., "points": ..}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub min: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    pub points: usize,
}

/// Full run configuration (the shape written back into every report).
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy: Option<EnergyConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_seq: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_mass: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub canonical_mass: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intervals: Option<Vec<(f64, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

/// Flags shared by every subcommand; any set flag overrides the file value.
#[derive(Debug, Clone, clap::Args, Default)]
pub struct CommonArgs {
    /// JSON configuration file (flags override its fields).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Energy kind: decay | const | loglog | log | table.
    #[arg(long, global = true)]
    pub energy: Option<String>,
    /// Decay exponent for the decay kind (or a table tail).
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Constant energy value for the const kind.
    #[arg(long, global = true)]
    pub c: Option<f64>,
    /// Explicit energies E_1..E_n for the table kind (comma separated).
    #[arg(long, global = true, value_delimiter = ',')]
    pub table: Option<Vec<f64>>,
    /// Tail kind for the table: decay | const | loglog | log | power.
    #[arg(long, global = true)]
    pub tail: Option<String>,
    /// Coefficient of a power tail (E_k = coeff * k^exponent).
    #[arg(long, global = true)]
    pub tail_coeff: Option<f64>,
    /// Exponent of a power tail.
    #[arg(long, global = true)]
    pub tail_exponent: Option<f64>,
    /// Energy at k = 1 for the log kind (0 opts into condensation).
    #[arg(long, global = true)]
    pub e1_override: Option<f64>,
    /// Remove the k = 1 state entirely (log kind).
    #[arg(long, global = true)]
    pub exclude_k1: bool,
    /// Inverse temperature (>= 0).
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Chemical potential.
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    /// Decreasing chemical-potential sequence (comma separated).
    #[arg(long = "mu-seq", global = true, value_delimiter = ',')]
    pub mu_seq: Option<Vec<f64>>,
    /// Target expected mass(es); μ is tuned by bisection.
    #[arg(long = "target-mass", global = true, value_delimiter = ',')]
    pub target_mass: Option<Vec<f64>>,
    /// Ensemble: quantum | classical | canonical.
    #[arg(long, global = true)]
    pub ensemble: Option<String>,
    /// Mass for the canonical ensemble.
    #[arg(long = "canonical-mass", global = true)]
    pub canonical_mass: Option<u64>,
    /// Canonical strategy: auto | enumeration | rejection.
    #[arg(long, global = true)]
    pub strategy: Option<String>,
    /// Number of samples / replicas.
    #[arg(long, global = true)]
    pub samples: Option<u64>,
    /// RNG seed (falls back to $GIBBS_PARTITIONS_SEED, then 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Truncation tolerance for series and samplers.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Evaluation grid as min:max:points (max may be empty for automatic).
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// Lower edge y of the supremum range [y, ∞).
    #[arg(long, global = true)]
    pub y: Option<f64>,
    /// Deviation threshold ε.
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Intervals for counting statistics, e.g. 0.5-1,1-2.
    #[arg(long, global = true, value_delimiter = ',')]
    pub intervals: Option<Vec<String>>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output path for the main report (stdout when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output path for the companion curve CSV, where a command emits one.
    #[arg(long = "curve-out", global = true)]
    pub curve_out: Option<PathBuf>,
}

impl CommonArgs {
    /// Loads the file config (if any) and applies flag overrides.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut config: RunConfig = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::config(format!("cannot read {}: {e}", path.display()))
                })?;
                serde_json::from_str(&text).map_err(|e| {
                    CliError::config(format!(
                        "{} at line {}, column {}",
                        e,
                        e.line(),
                        e.column()
                    ))
                })?
            }
            None => RunConfig::default(),
        };
        if self.energy.is_some()
            || self.alpha.is_some()
            || self.c.is_some()
            || self.table.is_some()
            || self.e1_override.is_some()
            || self.exclude_k1
        {
            let mut energy = config.energy.take().unwrap_or_default();
            if let Some(kind) = &self.energy {
                energy.kind = kind.clone();
            }
            if self.alpha.is_some() {
                energy.alpha = self.alpha;
            }
            if self.c.is_some() {
                energy.c = self.c;
            }
            if self.table.is_some() {
                energy.table = self.table.clone();
            }
            if self.e1_override.is_some() {
                energy.e1_override = self.e1_override;
            }
            if self.exclude_k1 {
                energy.exclude_k1 = Some(true);
            }
            config.energy = Some(energy);
        }
        if let (Some(energy), Some(kind)) = (config.energy.as_mut(), self.tail.as_ref()) {
            let mut tail = energy.tail.take().unwrap_or_default();
            tail.kind = kind.clone();
            tail.alpha = self.alpha.or(tail.alpha);
            tail.c = self.c.or(tail.c);
            tail.coeff = self.tail_coeff.or(tail.coeff);
            tail.exponent = self.tail_exponent.or(tail.exponent);
            energy.tail = Some(tail);
        }
        if self.beta.is_some() {
            config.beta = self.beta;
        }
        if self.mu.is_some() {
            config.mu = self.mu;
        }
        if self.mu_seq.is_some() {
            config.mu_seq = self.mu_seq.clone();
        }
        if self.target_mass.is_some() {
            config.target_mass = self.target_mass.clone();
        }
        if self.ensemble.is_some() {
            config.ensemble = self.ensemble.clone();
        }
        if self.canonical_mass.is_some() {
            config.canonical_mass = self.canonical_mass;
        }
        if self.strategy.is_some() {
            config.strategy = self.strategy.clone();
        }
        if self.samples.is_some() {
            config.samples = self.samples;
        }
        if self.seed.is_some() {
            config.seed = self.seed;
        }
        if self.tol.is_some() {
            config.tol = self.tol;
        }
        if let Some(grid) = &self.grid {
            config.grid = Some(parse_grid(grid)?);
        }
        if self.y.is_some() {
            config.y = self.y;
        }
        if self.epsilon.is_some() {
            config.epsilon = self.epsilon;
        }
        if let Some(raw) = &self.intervals {
            let mut parsed = Vec::with_capacity(raw.len());
            for item in raw {
                parsed.push(parse_interval(item)?);
            }
            config.intervals = Some(parsed);
        }
        if self.threads.is_some() {
            config.threads = self.threads;
        }
        Ok(config)
    }
}

fn parse_grid(text: &str) -> Result<GridConfig, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::config(format!(
            "grid must be min:max:points, got {text:?}"
        )));
    }
    let min: f64 = parts[0]
        .parse()
        .map_err(|e| CliError::config(format!("grid min: {e}")))?;
    let max: Option<f64> = if parts[1].is_empty() {
        None
    } else {
        Some(
            parts[1]
                .parse()
                .map_err(|e| CliError::config(format!("grid max: {e}")))?,
        )
    };
    let points: usize = parts[2]
        .parse()
        .map_err(|e| CliError::config(format!("grid points: {e}")))?;
    Ok(GridConfig { min, max, points })
}

fn parse_interval(text: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = text.split('-').collect();
    if parts.len() != 2 {
        return Err(CliError::config(format!(
            "interval must be lo-hi, got {text:?}"
        )));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|e| CliError::config(format!("interval {text:?}: {e}")))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|e| CliError::config(format!("interval {text:?}: {e}")))?;
    Ok((lo, hi))
}

impl RunConfig {
    /// Builds the energy model from the fragment plus β.
    pub fn energy_model(&self) -> Result<EnergyModel, CliError> {
        let energy = self
            .energy
            .as_ref()
            .ok_or_else(|| CliError::config("missing energy configuration".into()))?;
        let beta = self.beta.unwrap_or(0.0);
        let model = match energy.kind.as_str() {
            "decay" => EnergyModel::decay(energy.alpha.unwrap_or(1.0), beta),
            "const" | "constant" => EnergyModel::constant(energy.c.unwrap_or(1.0), beta),
            "loglog" => EnergyModel::loglog(beta),
            "log" => {
                if energy.exclude_k1 == Some(true) {
                    EnergyModel::log_excluding_k1(beta)
                } else if let Some(e1) = energy.e1_override {
                    EnergyModel::new(gibbs_partitions::EnergyKind::Log { e1 }, beta)
                } else {
                    EnergyModel::log(beta)
                }
            }
            "table" => {
                let entries = energy.table.clone().unwrap_or_default();
                let tail = energy
                    .tail
                    .as_ref()
                    .ok_or_else(|| CliError::config("table energy needs a tail".into()))?;
                let tail = match tail.kind.as_str() {
                    "decay" => TailKind::Decay {
                        alpha: tail.alpha.unwrap_or(1.0),
                    },
                    "const" | "constant" => TailKind::Constant {
                        c: tail.c.unwrap_or(1.0),
                    },
                    "loglog" => TailKind::LogLog,
                    "log" => TailKind::Log,
                    "power" => TailKind::Power {
                        coeff: tail.coeff.unwrap_or(1.0),
                        exponent: tail.exponent.unwrap_or(1.0),
                    },
                    other => {
                        return Err(CliError::config(format!("unknown tail kind {other:?}")))
                    }
                };
                EnergyModel::table(entries, tail, beta)
            }
            other => return Err(CliError::config(format!("unknown energy kind {other:?}"))),
        };
        model.map_err(CliError::from_core)
    }

    /// Enforces "exactly one of mu / mu_seq / target_mass" and returns the
    /// resolved μ values (tuning target masses by bisection where needed).
    pub fn resolve_mu_sequence(&self, model: &EnergyModel) -> Result<Vec<f64>, CliError> {
        let present = [
            self.mu.is_some(),
            self.mu_seq.is_some(),
            self.target_mass.is_some(),
        ]
        .iter()
        .filter(|&&p| p)
        .count();
        if present != 1 {
            return Err(CliError::config(
                "exactly one of mu, mu_seq, target_mass must be set".into(),
            ));
        }
        if let Some(mu) = self.mu {
            return Ok(vec![mu]);
        }
        if let Some(seq) = &self.mu_seq {
            if seq.is_empty() {
                return Err(CliError::config("mu_seq must not be empty".into()));
            }
            return Ok(seq.clone());
        }
        let masses = self.target_mass.as_ref().expect("checked above");
        let tol = self.tol.unwrap_or(1e-4);
        masses
            .iter()
            .map(|&m| {
                gibbs_partitions::mu_for_target_mass(model, m, tol).map_err(CliError::from_core)
            })
            .collect()
    }

    pub fn ensemble(&self) -> Result<EnsembleKind, CliError> {
        match self.ensemble.as_deref().unwrap_or("quantum") {
            "quantum" => Ok(EnsembleKind::QuantumGrandCanonical),
            "classical" => Ok(EnsembleKind::ClassicalGrandCanonical),
            "canonical" => {
                let mass = self.canonical_mass.ok_or_else(|| {
                    CliError::config("canonical ensemble needs canonical_mass".into())
                })?;
                Ok(EnsembleKind::Canonical { mass })
            }
            other => Err(CliError::config(format!("unknown ensemble {other:?}"))),
        }
    }

    pub fn canonical_strategy(&self) -> Result<CanonicalStrategy, CliError> {
        match self.strategy.as_deref().unwrap_or("auto") {
            "auto" => Ok(CanonicalStrategy::Auto),
            "enumeration" => Ok(CanonicalStrategy::Enumeration),
            "rejection" => Ok(CanonicalStrategy::Rejection),
            other => Err(CliError::config(format!("unknown strategy {other:?}"))),
        }
    }

    /// Seed resolution: config value, then $GIBBS_PARTITIONS_SEED, then 0.
    pub fn resolved_seed(&self) -> u64 {
        self.seed.unwrap_or_else(|| {
            std::env::var("GIBBS_PARTITIONS_SEED")
                .ok()
                .and_then(|s| s.parse().ok())
                .unwrap_or(0)
        })
    }
}

impl CliError {
    pub fn from_core(e: CoreError) -> Self {
        CliError {
            kind: core_error_kind(&e),
            message: e.to_string(),
        }
    }
}

fn core_error_kind(e: &CoreError) -> &'static str {
    match e {
        CoreError::Domain { .. } => "domain",
        CoreError::EnumerationCap { .. } => "enumeration_cap",
        CoreError::ChemicalPotentialTooLow { .. } => "chemical_potential_too_low",
        CoreError::NoGrandCanonicalMeasure => "no_grand_canonical_measure",
        CoreError::NonConvergent { .. } => "non_convergent",
        CoreError::DivergentAtZero => "divergent_at_zero",
        CoreError::TargetUnreachable { .. } => "target_unreachable",
        CoreError::RejectionBudget { .. } => "rejection_budget",
        CoreError::InvalidConfig(_) => "invalid_config",
        CoreError::NoCondensateState => "no_condensate_state",
        CoreError::EmptySampleSet => "empty_sample_set",
        CoreError::GridCoverage { .. } => "grid_coverage",
    }
}

//! Internal-energy models `E_k = u(ln k)`, the inverse temperature, ground
//! state analysis, regime classification, and the per-state parameters of
//! the grand canonical product measures.
//!
//! The per-state weights are `θ_k = exp(−βE_k − μk)` (geometric occupation
//! law for integer partitions) and `α_k = θ_k / k!` (Poisson occupation law
//! for set partitions). Everything is computed from log-space intermediates.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::ln_factorial;

/// Energy as a function of part size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum EnergyKind {
    /// `E_k = k^{-alpha}`, `alpha > 0`: energies decay to zero.
    Decay { alpha: f64 },
    /// `E_k = c`, `c > 0`.
    Constant { c: f64 },
    /// `E_k = ln ln k` for `k >= 3`; `E_1 = E_2 = ln ln 3` keeps the
    /// sequence strictly positive without changing the asymptotics.
    LogLog,
    /// `E_k = ln k` for `k >= 2`, with an explicit value at `k = 1` where
    /// `ln 1 = 0` would break strict positivity.
    ///
    /// `e1 = ln 2` is the regular default; `e1 = 0` opts into the
    /// condensation variant; `e1 = +inf` removes the `k = 1` state entirely.
    ///
    /// Scaled energies `E_k = c·ln k` are not a separate kind: since every
    /// probability depends on `β E_k` only, build `Log` with inverse
    /// temperature `c·β` instead (an explicit rescaling, never applied
    /// silently).
    Log { e1: f64 },
    /// Explicit energies `E_1..E_n` followed by an analytic tail.
    Table { entries: Vec<f64>, tail: TailKind },
}

/// Tail behavior of a [`EnergyKind::Table`] beyond its explicit entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TailKind {
    /// `E_k = k^{-alpha}`.
    Decay { alpha: f64 },
    /// `E_k = c`.
    Constant { c: f64 },
    /// `E_k = ln ln k`.
    LogLog,
    /// `E_k = ln k`.
    Log,
    /// `E_k = coeff * k^exponent`. Positive exponents grow super-logarithmically;
    /// negative coefficients with exponent > 1 sink to -infinity.
    Power { coeff: f64, exponent: f64 },
}

/// Asymptotic class of `u(x) = E_{e^x}` as `x -> ∞`, following the limits
/// of `u` and `u'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegimeRow {
    /// `u -> 0`, `u' -> 0` (e.g. `k^{-alpha}`): entropy-dominated.
    Decay,
    /// `u -> const`, `u' -> 0`.
    Constant,
    /// `u -> ∞`, `u' -> 0` (e.g. `ln ln k`).
    Subcritical,
    /// `u ~ x` (e.g. `ln k`): temperature-sensitive critical growth.
    Critical,
    /// `u' -> ∞` (super-logarithmic energies): expected mass stays bounded
    /// as `μ -> 0`, so there is no thermodynamic limit in this ensemble.
    Supercritical,
}

impl RegimeRow {
    /// Lower-case tag used in reports: `i`..`iv` or `supercritical`.
    pub fn tag(&self) -> &'static str {
        match self {
            RegimeRow::Decay => "i",
            RegimeRow::Constant => "ii",
            RegimeRow::Subcritical => "iii",
            RegimeRow::Critical => "iv",
            RegimeRow::Supercritical => "supercritical",
        }
    }
}

/// Existence class of the grand canonical measures, determined by where the
/// per-monomer energy `ε_k = E_k / k` attains its infimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scenario {
    /// `ε* = -∞`: no grand canonical measure exists for any `μ`.
    S1,
    /// The infimum is attained at finite part sizes: condensation at those
    /// states as `μ` approaches `μ*`.
    S2,
    /// The infimum is only approached as `k -> ∞` (unattainable ground state).
    S3,
}

/// Ground-state data: `ε* = inf_k E_k/k`, `μ* = −β ε*`, and attainment.
#[derive(Debug, Clone, Serialize)]
pub struct GroundState {
    /// Infimum of the per-monomer energies (may be `-inf`).
    pub eps_star: f64,
    /// Lower edge of admissible chemical potentials, `−β ε*` (0 when β = 0).
    pub mu_star: f64,
    /// Finite part sizes attaining the infimum (first few, ascending).
    pub finite_minimizers: Vec<u64>,
    /// True if infinitely many finite part sizes attain the infimum.
    pub infinitely_many_minimizers: bool,
    /// True if `liminf ε_k` equals the infimum (attained "at infinity").
    pub attained_at_infinity: bool,
}

impl GroundState {
    /// Scenario label derived from the attainment pattern.
    pub fn scenario(&self) -> Scenario {
        if self.eps_star == f64::NEG_INFINITY {
            Scenario::S1
        } else if !self.finite_minimizers.is_empty() || self.infinitely_many_minimizers {
            Scenario::S2
        } else {
            Scenario::S3
        }
    }
}

/// Regime classification of a model: scenario plus asymptotic row.
#[derive(Debug, Clone, Serialize)]
pub struct RegimeTag {
    pub scenario: Scenario,
    pub row: RegimeRow,
    /// Whether the expected mass diverges in the relevant limit
    /// (`μ -> μ*`); `None` at the borderline where both behaviors occur.
    pub thermodynamic_limit: Option<bool>,
}

/// An energy sequence together with the inverse temperature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyModel {
    kind: EnergyKind,
    beta: f64,
}

#[inline]
fn ln_3() -> f64 {
    3.0_f64.ln()
}

#[inline]
fn ln_ln_3() -> f64 {
    3.0_f64.ln().ln()
}

impl EnergyModel {
    /// Builds a model, validating parameters.
    pub fn new(kind: EnergyKind, beta: f64) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "inverse temperature must be finite and >= 0, got {beta}"
            )));
        }
        match &kind {
            EnergyKind::Decay { alpha } => {
                if !(alpha > &0.0) || !alpha.is_finite() {
                    return Err(Error::InvalidConfig(format!(
                        "decay exponent must be positive and finite, got {alpha}"
                    )));
                }
            }
            EnergyKind::Constant { c } => {
                if !(c > &0.0) || !c.is_finite() {
                    return Err(Error::InvalidConfig(format!(
                        "constant energy must be positive and finite, got {c}"
                    )));
                }
            }
            EnergyKind::Log { e1 } => {
                if e1.is_nan() || *e1 < 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "energy at k = 1 must be >= 0 (or +inf to exclude the state), got {e1}"
                    )));
                }
            }
            EnergyKind::LogLog => {}
            EnergyKind::Table { entries, tail } => {
                if entries.iter().any(|e| e.is_nan()) {
                    return Err(Error::InvalidConfig("table energies must not be NaN".into()));
                }
                match tail {
                    TailKind::Decay { alpha } if !(*alpha > 0.0) => {
                        return Err(Error::InvalidConfig(
                            "tail decay exponent must be positive".into(),
                        ));
                    }
                    TailKind::Constant { c } if !(*c > 0.0) => {
                        return Err(Error::InvalidConfig(
                            "tail constant must be positive".into(),
                        ));
                    }
                    TailKind::Power { coeff, exponent }
                        if !coeff.is_finite() || !exponent.is_finite() =>
                    {
                        return Err(Error::InvalidConfig(
                            "tail power parameters must be finite".into(),
                        ));
                    }
                    _ => {}
                }
            }
        }
        Ok(Self { kind, beta })
    }

    /// Uniform measure: all energies irrelevant at `β = 0`; modelled as the
    /// decay kind for classification purposes.
    pub fn uniform() -> Self {
        Self::new(EnergyKind::Decay { alpha: 1.0 }, 0.0).expect("valid")
    }

    pub fn decay(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(EnergyKind::Decay { alpha }, beta)
    }

    pub fn constant(c: f64, beta: f64) -> Result<Self> {
        Self::new(EnergyKind::Constant { c }, beta)
    }

    pub fn loglog(beta: f64) -> Result<Self> {
        Self::new(EnergyKind::LogLog, beta)
    }

    /// `E_k = ln k` with the regular `E_1 = ln 2` continuation.
    pub fn log(beta: f64) -> Result<Self> {
        Self::new(
            EnergyKind::Log {
                e1: std::f64::consts::LN_2,
            },
            beta,
        )
    }

    /// `E_k = ln k` with `E_1 = 0`: the condensation variant.
    pub fn log_condensation(beta: f64) -> Result<Self> {
        Self::new(EnergyKind::Log { e1: 0.0 }, beta)
    }

    /// `E_k = ln k` with the `k = 1` state removed (`E_1 = +inf`).
    pub fn log_excluding_k1(beta: f64) -> Result<Self> {
        Self::new(EnergyKind::Log { e1: f64::INFINITY }, beta)
    }

    pub fn table(entries: Vec<f64>, tail: TailKind, beta: f64) -> Result<Self> {
        Self::new(EnergyKind::Table { entries, tail }, beta)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn kind(&self) -> &EnergyKind {
        &self.kind
    }

    /// Same energies at a different inverse temperature.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.kind.clone(), beta)
    }

    /// Internal energy `E_k` of a part of size `k >= 1`.
    ///
    /// Panics if `k = 0` (not a part size).
    pub fn energy(&self, k: u64) -> f64 {
        assert!(k >= 1, "part sizes start at k = 1");
        match &self.kind {
            EnergyKind::Decay { alpha } => (k as f64).powf(-alpha),
            EnergyKind::Constant { c } => *c,
            EnergyKind::LogLog => {
                if k < 3 {
                    ln_ln_3()
                } else {
                    (k as f64).ln().ln()
                }
            }
            EnergyKind::Log { e1 } => {
                if k == 1 {
                    *e1
                } else {
                    (k as f64).ln()
                }
            }
            EnergyKind::Table { entries, tail } => {
                if (k as usize) <= entries.len() {
                    entries[k as usize - 1]
                } else {
                    tail_energy(*tail, k)
                }
            }
        }
    }

    /// `u` evaluated at a continuous argument: `u(x) = E_{e^x}` extended off
    /// the integers. Used by the Young-diagram cell scalings at `x = −ln μ`.
    pub fn u_at(&self, x: f64) -> f64 {
        match &self.kind {
            EnergyKind::Decay { alpha } => (-alpha * x).exp(),
            EnergyKind::Constant { c } => *c,
            EnergyKind::LogLog => {
                if x <= ln_3() {
                    ln_ln_3()
                } else {
                    x.ln()
                }
            }
            EnergyKind::Log { .. } => x.max(std::f64::consts::LN_2),
            EnergyKind::Table { entries, tail } => {
                let k = x.exp();
                if k <= entries.len() as f64 {
                    // Continuous argument inside the table: nearest entry.
                    let idx = (k.round().max(1.0) as usize).min(entries.len());
                    entries[idx - 1]
                } else {
                    match tail {
                        TailKind::Decay { alpha } => (-alpha * x).exp(),
                        TailKind::Constant { c } => *c,
                        TailKind::LogLog => x.ln(),
                        TailKind::Log => x,
                        TailKind::Power { coeff, exponent } => coeff * (exponent * x).exp(),
                    }
                }
            }
        }
    }

    /// `ln θ_k = −(βE_k + μk)`; `-inf` encodes an excluded state.
    pub fn log_theta(&self, mu: f64, k: u64) -> f64 {
        let e = self.energy(k);
        if e == f64::INFINITY {
            return f64::NEG_INFINITY;
        }
        -(self.beta * e + mu * k as f64)
    }

    /// Geometric weight `θ_k = exp(−βE_k − μk)`.
    ///
    /// Fails when the weight would reach 1, i.e. when `μ` does not exceed
    /// `−β ε_k` for this state.
    pub fn theta(&self, mu: f64, k: u64) -> Result<f64> {
        let lt = self.log_theta(mu, k);
        if lt >= 0.0 {
            return Err(Error::ChemicalPotentialTooLow {
                mu,
                mu_star: self.ground_state().mu_star,
            });
        }
        Ok(lt.exp())
    }

    /// Poisson rate `α_k = exp(−βE_k − μk) / k!`, computed in log space so
    /// that the factorial cannot overflow.
    pub fn alpha(&self, mu: f64, k: u64) -> f64 {
        let e = self.energy(k);
        if e == f64::INFINITY {
            return 0.0;
        }
        let ln_alpha = -(self.beta * e + mu * k as f64) - ln_factorial(k);
        if ln_alpha < -745.0 {
            0.0
        } else {
            ln_alpha.exp()
        }
    }

    /// Ground-state analysis: `ε* = inf ε_k`, `μ*`, and attainment pattern.
    pub fn ground_state(&self) -> GroundState {
        let (eps_star, finite, infinitely_many, at_infinity) = match &self.kind {
            // ε_k strictly decreasing to 0 for all built-in positive kinds.
            EnergyKind::Decay { .. } | EnergyKind::Constant { .. } | EnergyKind::LogLog => {
                (0.0, Vec::new(), false, true)
            }
            EnergyKind::Log { e1 } => {
                if *e1 == 0.0 {
                    // ε_1 = 0 and ε_k -> 0: attained at k = 1 and at infinity.
                    (0.0, vec![1], false, true)
                } else {
                    (0.0, Vec::new(), false, true)
                }
            }
            EnergyKind::Table { entries, tail } => {
                let (tail_inf, tail_attained_from, tail_at_infinity) =
                    tail_eps_infimum(*tail, entries.len() as u64 + 1);
                let mut eps_star = tail_inf;
                for (i, &e) in entries.iter().enumerate() {
                    if e == f64::INFINITY {
                        continue;
                    }
                    let eps = e / (i as f64 + 1.0);
                    if eps < eps_star {
                        eps_star = eps;
                    }
                }
                if eps_star == f64::NEG_INFINITY {
                    (f64::NEG_INFINITY, Vec::new(), false, true)
                } else {
                    let tol = 1e-12 * eps_star.abs().max(1.0);
                    let mut finite: Vec<u64> = entries
                        .iter()
                        .enumerate()
                        .filter(|(_, &e)| e != f64::INFINITY)
                        .filter(|(i, &e)| (e / (*i as f64 + 1.0) - eps_star).abs() <= tol)
                        .map(|(i, _)| i as u64 + 1)
                        .collect();
                    let mut infinitely_many = false;
                    if let Some(from) = tail_attained_from {
                        if (tail_inf - eps_star).abs() <= tol {
                            finite.push(from);
                            infinitely_many = true;
                        }
                    }
                    let at_infinity = tail_at_infinity && (tail_inf - eps_star).abs() <= tol;
                    (eps_star, finite, infinitely_many, at_infinity)
                }
            }
        };
        let mu_star = if self.beta == 0.0 || eps_star == 0.0 {
            // θ_k = e^{-μk} regardless of the energies (and avoid -0.0).
            0.0
        } else if eps_star == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            -self.beta * eps_star
        };
        GroundState {
            eps_star,
            mu_star,
            finite_minimizers: finite,
            infinitely_many_minimizers: infinitely_many,
            attained_at_infinity: at_infinity,
        }
    }

    /// Largest admissible lower bound on `ε_k` over `k > k0`; used for
    /// certified geometric tail bounds `θ_k <= exp(−(μ + β·bound)k)`.
    pub fn eps_lower_bound_beyond(&self, k0: u64) -> f64 {
        match &self.kind {
            EnergyKind::Decay { .. }
            | EnergyKind::Constant { .. }
            | EnergyKind::LogLog
            | EnergyKind::Log { .. } => 0.0,
            EnergyKind::Table { entries, tail } => {
                let mut bound = f64::INFINITY;
                for (i, &e) in entries.iter().enumerate() {
                    let k = i as u64 + 1;
                    if k <= k0 || e == f64::INFINITY {
                        continue;
                    }
                    bound = bound.min(e / k as f64);
                }
                let (tail_inf, _, _) =
                    tail_eps_infimum(*tail, (entries.len() as u64 + 1).max(k0 + 1));
                // +inf only if every remaining state is excluded, in which
                // case the tail is empty and any bound is valid.
                bound.min(tail_inf)
            }
        }
    }

    /// Classifies the model: scenario plus Table-style asymptotic row.
    pub fn classify(&self) -> RegimeTag {
        let ground = self.ground_state();
        let scenario = ground.scenario();
        let row = match &self.kind {
            EnergyKind::Decay { .. } => RegimeRow::Decay,
            EnergyKind::Constant { .. } => RegimeRow::Constant,
            EnergyKind::LogLog => RegimeRow::Subcritical,
            EnergyKind::Log { .. } => RegimeRow::Critical,
            EnergyKind::Table { tail, .. } => match tail {
                TailKind::Decay { .. } => RegimeRow::Decay,
                TailKind::Constant { .. } => RegimeRow::Constant,
                TailKind::LogLog => RegimeRow::Subcritical,
                TailKind::Log => RegimeRow::Critical,
                TailKind::Power { coeff, exponent } => {
                    if *exponent > 0.0 && *coeff > 0.0 {
                        RegimeRow::Supercritical
                    } else if *exponent > 0.0 {
                        // Negative coefficient growing in magnitude: S1 anyway.
                        RegimeRow::Supercritical
                    } else if *exponent == 0.0 {
                        RegimeRow::Constant
                    } else {
                        RegimeRow::Decay
                    }
                }
            },
        };
        // Divergence of the expected mass as μ -> 0 with the given energies;
        // condensing models additionally diverge at their own μ* (see the
        // scenario field).
        let thermodynamic_limit = if scenario == Scenario::S1 {
            Some(false)
        } else if self.beta == 0.0 {
            Some(true)
        } else {
            match row {
                RegimeRow::Decay | RegimeRow::Constant | RegimeRow::Subcritical => Some(true),
                RegimeRow::Critical => {
                    if self.beta < 2.0 {
                        Some(true)
                    } else if self.beta > 2.0 {
                        Some(false)
                    } else {
                        None // β = 2: depends on sub-leading energy terms.
                    }
                }
                RegimeRow::Supercritical => Some(false),
            }
        };
        RegimeTag {
            scenario,
            row,
            thermodynamic_limit,
        }
    }

    /// Upper bound on single-step energy drops `E_k − E_{k+1}`; zero for
    /// non-decreasing sequences. Used by Poisson-tail certificates.
    pub fn energy_drop_bound(&self) -> f64 {
        match &self.kind {
            EnergyKind::Decay { .. } => self.energy(1), // decreasing, bounded by E_1
            EnergyKind::Constant { .. } | EnergyKind::LogLog | EnergyKind::Log { .. } => 0.0,
            EnergyKind::Table { entries, tail } => {
                let mut drop: f64 = 0.0;
                let finite: Vec<(u64, f64)> = entries
                    .iter()
                    .enumerate()
                    .map(|(i, &e)| (i as u64 + 1, e))
                    .filter(|(_, e)| *e != f64::INFINITY)
                    .collect();
                for w in finite.windows(2) {
                    drop = drop.max(w[0].1 - w[1].1);
                }
                let first_tail = tail_energy(*tail, entries.len() as u64 + 1);
                if let Some(&(_, last)) = finite.last() {
                    drop = drop.max(last - first_tail);
                }
                let tail_drop = match tail {
                    TailKind::Decay { .. } => first_tail,
                    TailKind::Constant { .. } | TailKind::LogLog | TailKind::Log => 0.0,
                    TailKind::Power { coeff, exponent } => {
                        if *coeff >= 0.0 && *exponent >= 0.0 {
                            0.0
                        } else {
                            f64::INFINITY
                        }
                    }
                };
                drop.max(tail_drop)
            }
        }
    }

    /// Renormalized model with `E_k ↦ E_k − ε*·k`, along with the matching
    /// chemical-potential shift `β ε*` (so `μ ↦ μ + β ε*` leaves every
    /// `θ_k` unchanged).
    ///
    /// Only table models with linear tails can represent the shift exactly;
    /// models that already have `ε* = 0` are returned as-is.
    pub fn renormalized(&self) -> Result<(Self, f64)> {
        let ground = self.ground_state();
        if ground.eps_star == f64::NEG_INFINITY {
            return Err(Error::NoGrandCanonicalMeasure);
        }
        let eps = ground.eps_star;
        if eps == 0.0 {
            return Ok((self.clone(), 0.0));
        }
        match &self.kind {
            EnergyKind::Table { entries, tail } => {
                let shifted: Vec<f64> = entries
                    .iter()
                    .enumerate()
                    .map(|(i, &e)| e - eps * (i as f64 + 1.0))
                    .collect();
                let tail = match tail {
                    TailKind::Power { coeff, exponent } if *exponent == 1.0 => TailKind::Power {
                        coeff: coeff - eps,
                        exponent: 1.0,
                    },
                    _ => {
                        return Err(Error::InvalidConfig(
                            "renormalization is only representable for linear tails".into(),
                        ));
                    }
                };
                Ok((
                    Self {
                        kind: EnergyKind::Table {
                            entries: shifted,
                            tail,
                        },
                        beta: self.beta,
                    },
                    self.beta * eps,
                ))
            }
            _ => Err(Error::InvalidConfig(
                "built-in kinds already have eps* = 0".into(),
            )),
        }
    }
}

fn tail_energy(tail: TailKind, k: u64) -> f64 {
    let kf = k as f64;
    match tail {
        TailKind::Decay { alpha } => kf.powf(-alpha),
        TailKind::Constant { c } => c,
        TailKind::LogLog => kf.ln().ln(),
        TailKind::Log => kf.ln(),
        TailKind::Power { coeff, exponent } => coeff * kf.powf(exponent),
    }
}

/// Infimum of `ε_k = E_k/k` over the tail `k >= first`, plus whether it is
/// attained at a finite tail index and/or approached at infinity.
fn tail_eps_infimum(tail: TailKind, first: u64) -> (f64, Option<u64>, bool) {
    let first_f = first as f64;
    match tail {
        // ε positive and decreasing to 0 in all four named kinds.
        TailKind::Decay { .. } | TailKind::Constant { .. } | TailKind::LogLog | TailKind::Log => {
            (0.0, None, true)
        }
        TailKind::Power { coeff, exponent } => {
            // ε_k = coeff * k^{exponent-1}
            if coeff == 0.0 {
                (0.0, Some(first), true)
            } else if coeff > 0.0 {
                if exponent > 1.0 {
                    // increasing: attained at the first tail index
                    (coeff * first_f.powf(exponent - 1.0), Some(first), false)
                } else if exponent == 1.0 {
                    // constant: attained at every tail index
                    (coeff, Some(first), true)
                } else {
                    // decreasing to 0
                    (0.0, None, true)
                }
            } else {
                // coeff < 0
                if exponent > 1.0 {
                    (f64::NEG_INFINITY, None, true)
                } else if exponent == 1.0 {
                    (coeff, Some(first), true)
                } else {
                    // increasing towards 0 from below: attained at first index
                    (coeff * first_f.powf(exponent - 1.0), Some(first), false)
                }
            }
        }
    }
}

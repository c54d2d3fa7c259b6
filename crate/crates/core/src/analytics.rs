//! Exact (certified truncated-series) evaluation of grand-canonical
//! quantities: log partition function, expected mass, and the mean and
//! variance of the scaled size distribution function.
//!
//! Every series comes back as a [`SeriesValue`] carrying the truncation
//! index and a certified upper bound on the omitted tail. The certificates
//! use the geometric domination `θ_k <= r^k` with
//! `r = exp(−(μ + β·inf_{k>K} ε_k))`, which is valid for every admissible
//! chemical potential.

use crate::energy::{EnergyModel, RegimeRow, Scenario};
use crate::error::{Error, Result};
use crate::partition::{visit_partitions, DEFAULT_ENUMERATION_CAP};

/// Compensated (Kahan) accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let y = value - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// A truncated series value with a certified tail bound.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SeriesValue {
    /// The computed partial sum.
    pub value: f64,
    /// Index of the last summed term.
    pub truncation_index: u64,
    /// Certified upper bound on the omitted tail.
    pub tail_bound: f64,
    /// The tolerance that was requested.
    pub requested_tol: f64,
}

/// Which term family a series sums; selects the matching tail certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TermKind {
    /// `−ln(1 − θ_k)`
    LogOneMinusTheta,
    /// `θ_k / (1 − θ_k)`
    Occupancy,
    /// `k · θ_k / (1 − θ_k)`
    MassWeighted,
    /// `θ_k / (1 − θ_k)^2`
    OccupancyVariance,
    /// `k^2 · θ_k / (1 − θ_k)^2`
    MassVariance,
}

impl TermKind {
    fn evaluate(self, log_theta: f64, k: u64) -> f64 {
        if log_theta == f64::NEG_INFINITY {
            return 0.0;
        }
        match self {
            TermKind::LogOneMinusTheta => -(-log_theta.exp_m1()).ln(),
            TermKind::Occupancy => 1.0 / (-log_theta).exp_m1(),
            TermKind::MassWeighted => k as f64 / (-log_theta).exp_m1(),
            TermKind::OccupancyVariance => {
                let em = log_theta.exp_m1(); // θ - 1
                log_theta.exp() / (em * em)
            }
            TermKind::MassVariance => {
                let em = log_theta.exp_m1();
                let kf = k as f64;
                kf * kf * log_theta.exp() / (em * em)
            }
        }
    }

    /// Power of `k` multiplying the geometric factor in the tail.
    fn mass_power(self) -> u32 {
        match self {
            TermKind::LogOneMinusTheta | TermKind::Occupancy | TermKind::OccupancyVariance => 0,
            TermKind::MassWeighted => 1,
            TermKind::MassVariance => 2,
        }
    }

    /// Power of `(1 − θ)` in the denominator.
    fn denom_power(self) -> u32 {
        match self {
            TermKind::Occupancy | TermKind::MassWeighted | TermKind::LogOneMinusTheta => 1,
            TermKind::OccupancyVariance | TermKind::MassVariance => 2,
        }
    }
}

/// Certified bound on `Σ_{k>K} k^p r^k / (1−r^{K+1})^j` for the term kind.
fn tail_bound(kind: TermKind, model: &EnergyModel, mu: f64, big_k: u64) -> f64 {
    let eps_lb = model.eps_lower_bound_beyond(big_k);
    let decay = mu + model.beta() * eps_lb;
    if !(decay > 0.0) {
        return f64::INFINITY;
    }
    let p = kind.mass_power();
    let geom = |q: f64, m: f64| -> f64 {
        // Σ_{k >= m} q^k = q^m / (1−q)
        ((m * q.ln()).exp()) / (1.0 - q)
    };
    let m = big_k as f64 + 1.0;
    let raw = if p == 0 {
        let r = (-decay).exp();
        geom(r, m)
    } else {
        // k^p r^k = (k^p q^k) q^k with q = sqrt(r); bound the bracket by its max.
        let q = (-decay / 2.0).exp();
        let ln_q = -decay / 2.0;
        let k_star = -(p as f64) / ln_q;
        let max_factor = if m >= k_star {
            (p as f64 * m.ln() + m * ln_q).exp()
        } else {
            ((p as f64) * (k_star.ln() - 1.0)).exp()
        };
        max_factor * geom(q, m)
    };
    // Largest possible θ beyond K under the same domination.
    let theta_max = (-(decay * m)).exp();
    if theta_max >= 1.0 {
        return f64::INFINITY;
    }
    raw / (1.0 - theta_max).powi(kind.denom_power() as i32)
}

/// Initial truncation guess: `max(2/μ_eff, (ln(1/tol) + 2 ln(1/μ_eff)) / μ_eff)`
/// with the effective decay rate `μ_eff = μ + β·inf ε`, then adjusted until
/// the certified tail bound passes.
fn initial_truncation(model: &EnergyModel, mu: f64, tol: f64) -> u64 {
    let eps_lb = model.eps_lower_bound_beyond(0);
    let mu_eff = (mu + model.beta() * eps_lb).max(mu).max(1e-12);
    let a = 2.0 / mu_eff;
    let b = ((1.0 / tol).ln() + 2.0 * (1.0 / mu_eff).ln().max(0.0)) / mu_eff;
    a.max(b).ceil().max(8.0) as u64
}

fn find_truncation(
    kind: TermKind,
    model: &EnergyModel,
    mu: f64,
    tol: f64,
) -> Result<(u64, f64)> {
    const K_MAX: u64 = 2_000_000_000;
    let mut k = initial_truncation(model, mu, tol);
    let mut bound = tail_bound(kind, model, mu, k);
    if bound <= tol {
        // Shrink: binary search the smallest K whose certificate passes.
        let mut lo = 1u64;
        let mut hi = k;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if tail_bound(kind, model, mu, mid) <= tol {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        return Ok((lo, tail_bound(kind, model, mu, lo)));
    }
    // Extend until the certificate passes.
    while bound > tol {
        if k >= K_MAX {
            return Err(Error::NonConvergent {
                reason: format!("tail bound {bound} still above {tol} at K = {k}"),
            });
        }
        k = (k * 2).min(K_MAX);
        bound = tail_bound(kind, model, mu, k);
    }
    Ok((k, bound))
}

fn sum_series(
    kind: TermKind,
    model: &EnergyModel,
    mu: f64,
    k_min: u64,
    tol: f64,
) -> Result<SeriesValue> {
    let (big_k, bound) = find_truncation(kind, model, mu, tol)?;
    let mut acc = KahanSum::new();
    for k in k_min..=big_k {
        let lt = model.log_theta(mu, k);
        let term = kind.evaluate(lt, k);
        if term < 1e-300 {
            continue;
        }
        acc.add(term);
    }
    Ok(SeriesValue {
        value: acc.value(),
        truncation_index: big_k.max(k_min),
        tail_bound: bound,
        requested_tol: tol,
    })
}

fn validate_mu(model: &EnergyModel, mu: f64) -> Result<()> {
    let ground = model.ground_state();
    if ground.scenario() == Scenario::S1 && model.beta() > 0.0 {
        return Err(Error::NoGrandCanonicalMeasure);
    }
    if !(mu > ground.mu_star) {
        return Err(Error::ChemicalPotentialTooLow {
            mu,
            mu_star: ground.mu_star,
        });
    }
    Ok(())
}

/// `ln Ξ(μ, β) = −Σ_k ln(1 − θ_k)`, with a certified tail.
pub fn log_grand_potential(model: &EnergyModel, mu: f64, tol: f64) -> Result<SeriesValue> {
    validate_mu(model, mu)?;
    sum_series(TermKind::LogOneMinusTheta, model, mu, 1, tol)
}

/// Expected total mass `E Mon = Σ_k k·θ_k/(1−θ_k)`.
pub fn expected_monomers(model: &EnergyModel, mu: f64, tol: f64) -> Result<SeriesValue> {
    validate_mu(model, mu)?;
    sum_series(TermKind::MassWeighted, model, mu, 1, tol)
}

/// Variance of the total mass, `Σ_k k²·θ_k/(1−θ_k)²`.
pub fn variance_monomers(model: &EnergyModel, mu: f64, tol: f64) -> Result<SeriesValue> {
    validate_mu(model, mu)?;
    sum_series(TermKind::MassVariance, model, mu, 1, tol)
}

/// Expected number of parts of size `>= x/μ`, `Σ_{k ≥ x/μ} θ_k/(1−θ_k)`.
pub fn expected_tail_count(model: &EnergyModel, mu: f64, x: f64, tol: f64) -> Result<SeriesValue> {
    validate_mu(model, mu)?;
    let k_min = lowest_index(x, mu)?;
    sum_series(TermKind::Occupancy, model, mu, k_min, tol)
}

fn lowest_index(x: f64, mu: f64) -> Result<u64> {
    if x < 0.0 || !x.is_finite() {
        return Err(Error::Domain {
            function: "scaled_f",
            message: format!("x = {x} must be finite and >= 0"),
        });
    }
    Ok((x / mu).ceil().max(1.0) as u64)
}

/// Rejects `x = 0` in regimes where the limit density is non-integrable at
/// the origin (decaying energies, and critical energies at `β >= 1`).
fn validate_scaled_x(model: &EnergyModel, x: f64) -> Result<()> {
    if x > 0.0 {
        return Ok(());
    }
    let tag = model.classify();
    let integrable_at_zero = match tag.row {
        RegimeRow::Constant | RegimeRow::Subcritical => true,
        RegimeRow::Critical => model.beta() < 1.0,
        RegimeRow::Decay => false, // limit density ~ 1/x near the origin
        RegimeRow::Supercritical => true, // finite sum at any μ > μ*
    };
    if integrable_at_zero {
        Ok(())
    } else {
        Err(Error::DivergentAtZero)
    }
}

/// Mean of the scaled size distribution,
/// `E F_μ(x) = Σ_{k ≥ x/μ} θ_k/(1−θ_k) / (μ · E Mon)`.
pub fn expected_scaled_f(model: &EnergyModel, mu: f64, x: f64, tol: f64) -> Result<SeriesValue> {
    validate_scaled_x(model, x)?;
    let numerator = expected_tail_count(model, mu, x, tol)?;
    let total = expected_monomers(model, mu, tol.max(1e-12))?;
    combine_ratio(numerator, total, mu, 1)
}

/// Variance of the scaled size distribution,
/// `Var F_μ(x) = Σ_{k ≥ x/μ} θ_k/(1−θ_k)² / (μ · E Mon)²`.
pub fn variance_scaled_f(model: &EnergyModel, mu: f64, x: f64, tol: f64) -> Result<SeriesValue> {
    validate_scaled_x(model, x)?;
    validate_mu(model, mu)?;
    let k_min = lowest_index(x, mu)?;
    let numerator = sum_series(TermKind::OccupancyVariance, model, mu, k_min, tol)?;
    let total = expected_monomers(model, mu, tol.max(1e-12))?;
    combine_ratio(numerator, total, mu, 2)
}

/// Divides a certified numerator by `(μ · E Mon)^power`, propagating the
/// two tail bounds into one interval-style certificate.
fn combine_ratio(
    numerator: SeriesValue,
    total: SeriesValue,
    mu: f64,
    power: i32,
) -> Result<SeriesValue> {
    let denom_lo = mu * total.value;
    let denom_hi = mu * (total.value + total.tail_bound);
    if !(denom_lo > 0.0) {
        return Err(Error::NonConvergent {
            reason: "expected mass underflowed to zero".into(),
        });
    }
    let value = numerator.value / denom_lo.powi(power);
    let hi = (numerator.value + numerator.tail_bound) / denom_lo.powi(power);
    let lo = numerator.value / denom_hi.powi(power);
    Ok(SeriesValue {
        value,
        truncation_index: numerator.truncation_index,
        tail_bound: (hi - value).max(value - lo),
        requested_tol: numerator.requested_tol,
    })
}

/// Mean and variance curves of the scaled size distribution on a grid of
/// `x` values, sharing one pass over the series terms.
///
/// Returns `(mean, variance)` aligned with `xs`. Equivalent to calling
/// [`expected_scaled_f`] and [`variance_scaled_f`] per point.
pub fn scaled_moment_curves(
    model: &EnergyModel,
    mu: f64,
    xs: &[f64],
    tol: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    validate_mu(model, mu)?;
    for &x in xs {
        validate_scaled_x(model, x)?;
    }
    let total = expected_monomers(model, mu, tol.max(1e-12))?;
    let (big_k, _) = find_truncation(TermKind::Occupancy, model, mu, tol)?;
    let (big_k_var, _) = find_truncation(TermKind::OccupancyVariance, model, mu, tol)?;
    let big_k = big_k.max(big_k_var);

    // Thresholds sorted descending so suffix sums can be recorded on the fly.
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[b].partial_cmp(&xs[a]).expect("finite grid"));
    let thresholds: Vec<u64> = order
        .iter()
        .map(|&i| (xs[i] / mu).ceil().max(1.0) as u64)
        .collect();

    let mut mean = vec![0.0; xs.len()];
    let mut var = vec![0.0; xs.len()];
    let mut acc_mean = KahanSum::new();
    let mut acc_var = KahanSum::new();
    let mut next = 0usize;
    for k in (1..=big_k).rev() {
        while next < thresholds.len() && thresholds[next] > k {
            mean[order[next]] = acc_mean.value();
            var[order[next]] = acc_var.value();
            next += 1;
        }
        let lt = model.log_theta(mu, k);
        acc_mean.add(TermKind::Occupancy.evaluate(lt, k));
        acc_var.add(TermKind::OccupancyVariance.evaluate(lt, k));
    }
    while next < thresholds.len() {
        mean[order[next]] = acc_mean.value();
        var[order[next]] = acc_var.value();
        next += 1;
    }
    let denom = mu * total.value;
    for v in &mut mean {
        *v /= denom;
    }
    for v in &mut var {
        *v /= denom * denom;
    }
    Ok((mean, var))
}

/// Canonical partition sum `Z_M(β) = Σ_{p ⊢ M} e^{−β H(p)}` by exhaustive
/// enumeration. At `β = 0` this is the partition number `Q_M`.
pub fn canonical_sum(model: &EnergyModel, m: u64) -> Result<f64> {
    canonical_sum_with_cap(model, m, DEFAULT_ENUMERATION_CAP)
}

/// Canonical sum with an explicit enumeration cap.
pub fn canonical_sum_with_cap(model: &EnergyModel, m: u64, cap: u64) -> Result<f64> {
    if m > cap {
        return Err(Error::EnumerationCap { requested: m, cap });
    }
    let beta = model.beta();
    let mut acc = KahanSum::new();
    visit_partitions(m, &mut |parts| {
        let weight = if beta == 0.0 {
            1.0
        } else {
            let mut h = 0.0;
            for &part in parts {
                h += model.energy(part);
            }
            if h == f64::INFINITY {
                0.0
            } else {
                (-beta * h).exp()
            }
        };
        acc.add(weight);
    });
    Ok(acc.value())
}

/// Finds `μ` with `|E Mon(μ) − target| <= tol·target` by bisection on the
/// strictly decreasing map `μ -> E Mon(μ)`.
pub fn mu_for_target_mass(model: &EnergyModel, target: f64, tol: f64) -> Result<f64> {
    if !(target >= 1.0) {
        return Err(Error::TargetUnreachable { target });
    }
    let tag = model.classify();
    if tag.scenario != Scenario::S3 || tag.thermodynamic_limit != Some(true) {
        return Err(Error::TargetUnreachable { target });
    }
    let series_tol = (tol * target * 0.05).min(1e-3);
    let emon = |mu: f64| -> Result<f64> { Ok(expected_monomers(model, mu, series_tol)?.value) };

    // Bracket the target: E Mon is strictly decreasing in μ.
    let mut hi = 1.0;
    while emon(hi)? > target {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::TargetUnreachable { target });
        }
    }
    let mut lo = hi;
    while emon(lo)? < target {
        lo /= 2.0;
        if lo < 1e-9 {
            return Err(Error::TargetUnreachable { target });
        }
    }
    // lo gives E Mon >= target, hi gives E Mon <= target.
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        let value = emon(mid)?;
        if (value - target).abs() <= tol * target {
            return Ok(mid);
        }
        if value > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NonConvergent {
        reason: format!("mass bisection did not reach tolerance {tol} for target {target}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::TailKind;

    #[test]
    fn kahan_recovers_small_increments() {
        let mut acc = KahanSum::new();
        acc.add(1.0);
        for _ in 0..10_000_000 {
            acc.add(1e-16);
        }
        assert!((acc.value() - (1.0 + 1e-9)).abs() < 1e-12);
    }

    #[test]
    fn log_grand_potential_uniform_reference() {
        // β = 0, μ = 1: lnΞ = −Σ ln(1−e^{-k}); frozen from direct summation.
        let model = EnergyModel::uniform();
        let v = log_grand_potential(&model, 1.0, 1e-9).unwrap();
        assert!(v.tail_bound <= 1e-9);
        assert!(
            (v.value - 0.684328866976887).abs() < 1e-9,
            "got {}",
            v.value
        );
    }

    #[test]
    fn log_grand_potential_vanishes_for_large_mu() {
        let model = EnergyModel::constant(1.0, 1.0).unwrap();
        let v = log_grand_potential(&model, 40.0, 1e-12).unwrap();
        assert!(v.value < 1e-17);
    }

    #[test]
    fn expected_monomers_uniform_law() {
        // μ² E Mon -> π²/6 as μ -> 0.
        let model = EnergyModel::uniform();
        let mu = 1e-3;
        let v = expected_monomers(&model, mu, 1e-8).unwrap();
        let target = std::f64::consts::PI.powi(2) / 6.0;
        assert!((mu * mu * v.value - target).abs() < 0.01 * target);
    }

    #[test]
    fn expected_monomers_bounded_for_supercritical_energies() {
        let model = EnergyModel::table(
            Vec::new(),
            TailKind::Power {
                coeff: 1.0,
                exponent: 2.0,
            },
            1.0,
        )
        .unwrap();
        let a = expected_monomers(&model, 1e-3, 1e-10).unwrap().value;
        let b = expected_monomers(&model, 1e-6, 1e-10).unwrap().value;
        assert!(b < 1.0, "E Mon should stay O(1), got {b}");
        assert!((a - b).abs() < 1e-3);
    }

    #[test]
    fn series_reject_inadmissible_mu() {
        let model = EnergyModel::uniform();
        assert!(matches!(
            expected_monomers(&model, 0.0, 1e-9),
            Err(Error::ChemicalPotentialTooLow { .. })
        ));
        let s1 = EnergyModel::table(
            Vec::new(),
            TailKind::Power {
                coeff: -1.0,
                exponent: 2.0,
            },
            1.0,
        )
        .unwrap();
        assert!(matches!(
            log_grand_potential(&s1, 5.0, 1e-9),
            Err(Error::NoGrandCanonicalMeasure)
        ));
    }

    #[test]
    fn canonical_sum_reference_values() {
        let uniform = EnergyModel::uniform();
        assert_eq!(canonical_sum(&uniform, 14).unwrap(), 135.0);
        assert_eq!(canonical_sum(&uniform, 0).unwrap(), 1.0);

        // M = 2, constant energies at β = 1: partitions 2 and 1+1.
        let model = EnergyModel::constant(1.0, 1.0).unwrap();
        let z2 = canonical_sum(&model, 2).unwrap();
        let expected = (-1.0_f64).exp() + (-2.0_f64).exp();
        assert!((z2 - expected).abs() < 1e-15);

        assert!(canonical_sum(&uniform, 61).is_err());
    }

    #[test]
    fn expected_scaled_f_limits() {
        let model = EnergyModel::constant(1.0, 1.0).unwrap();
        // x -> ∞ gives 0.
        let v = expected_scaled_f(&model, 1e-2, 60.0, 1e-10).unwrap();
        assert!(v.value < 1e-10);
        // x = 0 admissible in the constant regime and equals ~#parts scaling.
        assert!(expected_scaled_f(&model, 1e-2, 0.0, 1e-8).is_ok());
        // x = 0 rejected for decaying energies.
        let uniform = EnergyModel::uniform();
        assert!(matches!(
            expected_scaled_f(&uniform, 1e-2, 0.0, 1e-8),
            Err(Error::DivergentAtZero)
        ));
        // and for critical energies at β >= 1.
        let log = EnergyModel::log(1.5).unwrap();
        assert!(matches!(
            expected_scaled_f(&log, 1e-2, 0.0, 1e-8),
            Err(Error::DivergentAtZero)
        ));
    }

    #[test]
    fn variance_trend_matches_temperature() {
        // Constant energies: variance shrinks as μ -> 0.
        let model = EnergyModel::constant(1.0, 1.0).unwrap();
        let a = variance_scaled_f(&model, 1e-3, 0.5, 1e-9).unwrap().value;
        let b = variance_scaled_f(&model, 1e-4, 0.5, 1e-9).unwrap().value;
        assert!(b < a);
        // Critical energies at β = 1.5: variance grows as μ -> 0.
        let log = EnergyModel::log(1.5).unwrap();
        let a = variance_scaled_f(&log, 1e-3, 0.5, 1e-9).unwrap().value;
        let b = variance_scaled_f(&log, 1e-4, 0.5, 1e-9).unwrap().value;
        assert!(b > a);
        // x -> ∞ gives 0.
        let v = variance_scaled_f(&model, 1e-2, 60.0, 1e-12).unwrap();
        assert!(v.value < 1e-10);
    }

    #[test]
    fn mu_for_target_mass_inverts_expected_monomers() {
        let model = EnergyModel::uniform();
        let target = 1e6;
        let mu = mu_for_target_mass(&model, target, 1e-6).unwrap();
        // Analytic inverse of μ² E Mon ≈ π²/6.
        let predicted = std::f64::consts::PI / (6.0 * target).sqrt();
        assert!((mu - predicted).abs() < 0.01 * predicted, "mu = {mu}");
        let back = expected_monomers(&model, mu, 1e-3).unwrap().value;
        assert!((back - target).abs() <= 2e-6 * target);

        // Monotonicity in the target.
        let mu_small = mu_for_target_mass(&model, 1e4, 1e-6).unwrap();
        assert!(mu_small > mu);

        // Unreachable targets.
        assert!(mu_for_target_mass(&model, 0.0, 1e-6).is_err());
        let supercritical = EnergyModel::table(
            Vec::new(),
            TailKind::Power {
                coeff: 1.0,
                exponent: 2.0,
            },
            1.0,
        )
        .unwrap();
        assert!(matches!(
            mu_for_target_mass(&supercritical, 100.0, 1e-6),
            Err(Error::TargetUnreachable { .. })
        ));
    }

    #[test]
    fn certificates_respect_requested_tolerance() {
        let model = EnergyModel::log(0.5).unwrap();
        for &tol in &[1e-6, 1e-9, 1e-12] {
            let v = expected_monomers(&model, 1e-2, tol).unwrap();
            assert!(v.tail_bound <= tol);
            assert!(v.truncation_index >= 1);
        }
    }

    #[test]
    fn truncation_tightens_for_separated_tails() {
        // E_1 = 0, E_k = k beyond: the tail decays like e^{-(β+μ)k}, so the
        // certificate should need only a few dozen terms, not O(1/μ).
        let model = EnergyModel::table(
            vec![0.0],
            TailKind::Power {
                coeff: 1.0,
                exponent: 1.0,
            },
            1.0,
        )
        .unwrap();
        let v = expected_monomers(&model, 1e-3, 1e-9).unwrap();
        assert!(v.truncation_index < 200, "K = {}", v.truncation_index);
    }
}

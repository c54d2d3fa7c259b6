//! Cross-checks of the analytic layer against independent oracles:
//! quadrature for the special functions, closed-form normalizations, the
//! renormalization identity, and the variance trends that separate the
//! regimes.

mod common;

use common::{adaptive_simpson, e1_quadrature};
use gibbs_partitions::*;

#[test]
fn dilog_matches_quadrature_oracle() {
    // Li2(x) = ∫_0^x −ln(1−t)/t dt.
    for &x in &[0.1, 0.3, 0.5, 0.8, 0.95] {
        let oracle = adaptive_simpson(
            |t| if t == 0.0 { 1.0 } else { -(-t).ln_1p() / t },
            0.0,
            x,
            1e-14,
        );
        let value = special::dilog(x).unwrap();
        assert!(
            (value - oracle).abs() <= 1e-12 * oracle.abs(),
            "x = {x}: dilog = {value}, quadrature = {oracle}"
        );
    }
}

#[test]
fn incomplete_gamma_matches_quadrature_oracle() {
    // Q(s, x) = ∫_x^∞ t^{s-1} e^{-t} dt / Γ(s); tail beyond 60 < 1e-24.
    for &(s, x) in &[(0.5, 1.0), (0.5, 0.2), (1.5, 2.0), (0.7, 3.5)] {
        let oracle =
            adaptive_simpson(|t| t.powf(s - 1.0) * (-t).exp(), x, 60.0, 1e-14)
                / special::gamma(s);
        let value = special::upper_incomplete_gamma_regularized(s, x).unwrap();
        assert!(
            (value - oracle).abs() <= 1e-10 * oracle.abs(),
            "(s, x) = ({s}, {x}): Q = {value}, quadrature = {oracle}"
        );
    }
}

#[test]
fn e1_matches_quadrature_oracle() {
    for &x in &[0.1, 0.5, 1.0, 2.0, 5.0] {
        let oracle = e1_quadrature(x);
        let value = special::exp_integral_e1(x).unwrap();
        assert!(
            (value - oracle).abs() <= 1e-10 * oracle.abs(),
            "x = {x}: E1 = {value}, quadrature = {oracle}"
        );
    }
    // λ(1, 2) = E1(1) − E1(2), frozen from the quadrature oracle.
    let lambda = special::exp_integral_e1(1.0).unwrap() - special::exp_integral_e1(2.0).unwrap();
    assert!((lambda - 0.17048342368745914).abs() < 1e-10);
}

#[test]
fn constant_regime_normalization_reduces_to_uniform_at_beta_zero() {
    // λ(ii) at β = 0 equals λ(i) = π²/6.
    let lambda_ii = special::dilog(1.0).unwrap();
    assert!((lambda_ii - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-14);
}

#[test]
fn limit_shapes_integrate_to_one() {
    // ∫_0^∞ F = 1 in the regimes where F is integrable at the origin, and
    // for the classical shape.
    let cases = [
        ("classical", EnergyModel::uniform()),
        ("constant", EnergyModel::constant(1.0, 1.0).unwrap()),
        ("subcritical", EnergyModel::loglog(1.0).unwrap()),
        ("critical beta<1", EnergyModel::log(0.5).unwrap()),
    ];
    for (name, model) in cases {
        let outcome = limit_shape(&model);
        let shape = outcome.shape().expect("shape exists");
        let upper = shape.support_bound(1e-12);
        let integral = adaptive_simpson(|x| shape.f(x), 1e-12, upper, 1e-10);
        assert!(
            (integral - 1.0).abs() <= 1e-8,
            "{name}: ∫F = {integral}"
        );
    }
}

#[test]
fn renormalization_leaves_series_invariant() {
    // E_k ↦ E_k − ε*k with μ ↦ μ + βε* leaves every series value unchanged.
    // Dyadic shift: exactly equal. Non-dyadic: relative drift ≤ 1e-12.
    let raw = EnergyModel::table(
        Vec::new(),
        TailKind::Power {
            coeff: 1.0,
            exponent: 1.0,
        },
        1.0,
    )
    .unwrap();
    let (renorm, mu_shift) = raw.renormalized().unwrap();
    assert_eq!(mu_shift, 1.0);
    let mu_renorm = 0.0078125; // 2^-7
    let mu_raw = mu_renorm - mu_shift;
    let tol = 1e-10;
    // The shift acts on the per-state weights, so every functional of the
    // θ sequence alone is preserved (the μ-rescaled F additionally uses μ
    // itself and is not expected to be invariant).
    let pairs = [
        (
            log_grand_potential(&raw, mu_raw, tol).unwrap().value,
            log_grand_potential(&renorm, mu_renorm, tol).unwrap().value,
        ),
        (
            expected_monomers(&raw, mu_raw, tol).unwrap().value,
            expected_monomers(&renorm, mu_renorm, tol).unwrap().value,
        ),
        (
            variance_monomers(&raw, mu_raw, tol).unwrap().value,
            variance_monomers(&renorm, mu_renorm, tol).unwrap().value,
        ),
    ];
    for (a, b) in pairs {
        assert!(
            (a - b).abs() <= 1e-12 * a.abs().max(b.abs()),
            "dyadic renormalization drift: {a} vs {b}"
        );
    }

    // Non-dyadic energies and shift.
    let raw = EnergyModel::table(
        vec![0.3, 1.7, 2.1],
        TailKind::Power {
            coeff: 0.9,
            exponent: 1.0,
        },
        0.7,
    )
    .unwrap();
    let (renorm, mu_shift) = raw.renormalized().unwrap();
    let mu_renorm = 0.013;
    let mu_raw = mu_renorm - mu_shift;
    let a = expected_monomers(&raw, mu_raw, tol).unwrap().value;
    let b = expected_monomers(&renorm, mu_renorm, tol).unwrap().value;
    assert!(
        (a - b).abs() <= 1e-12 * a.abs(),
        "non-dyadic renormalization drift: {a} vs {b}"
    );
}

#[test]
fn variance_trends_separate_the_regimes() {
    // Var F_μ(x) → 0 in the decay/constant/subcritical regimes and in the
    // critical regime below β = 1; diverges above; plateaus at β = 1.
    let x = 0.5;
    let shrink = [
        EnergyModel::uniform(),
        EnergyModel::constant(1.0, 1.0).unwrap(),
        EnergyModel::loglog(1.0).unwrap(),
        EnergyModel::log(0.5).unwrap(),
    ];
    for model in shrink {
        let a = variance_scaled_f(&model, 1e-3, x, 1e-9).unwrap().value;
        let b = variance_scaled_f(&model, 1e-4, x, 1e-9).unwrap().value;
        assert!(b < a, "variance should shrink: {a} -> {b}");
    }
    let grow = EnergyModel::log(1.5).unwrap();
    let a = variance_scaled_f(&grow, 1e-3, x, 1e-9).unwrap().value;
    let b = variance_scaled_f(&grow, 1e-4, x, 1e-9).unwrap().value;
    assert!(b > 2.0 * a, "variance should diverge: {a} -> {b}");

    // β = 1: nonzero plateau at E1(x).
    let critical = EnergyModel::log(1.0).unwrap();
    let a = variance_scaled_f(&critical, 1e-3, x, 1e-9).unwrap().value;
    let b = variance_scaled_f(&critical, 1e-4, x, 1e-9).unwrap().value;
    assert!((a / b - 1.0).abs() < 0.05, "plateau violated: {a} vs {b}");
    let e1 = special::exp_integral_e1(x).unwrap();
    assert!((b - e1).abs() < 0.1 * e1, "plateau level {b} vs E1 = {e1}");
}

#[test]
fn constant_regime_mass_law_without_temperature_factor() {
    // μ² E Mon -> Li2(e^{-1}) within 2% at μ = 1e-3 for constant energies.
    let model = EnergyModel::constant(1.0, 1.0).unwrap();
    let mu = 1e-3;
    let emon = expected_monomers(&model, mu, 1e-8).unwrap().value;
    let target = special::dilog((-1.0_f64).exp()).unwrap();
    assert!(
        (mu * mu * emon / target - 1.0).abs() < 0.02,
        "mu^2 E Mon = {}, Li2(1/e) = {target}",
        mu * mu * emon
    );
}

#[test]
fn classical_shape_pointwise_at_moderate_mu() {
    // The uniform-measure mean shape is within 2% of the classical curve
    // at x = 1 already at μ = 1e-3 (classical coordinates).
    let model = EnergyModel::uniform();
    let outcome = limit_shape(&model);
    let shape = outcome.shape().unwrap();
    let ef = shape.expected_f_native(1e-3, 1.0, 1e-9).unwrap();
    let f = shape.f(1.0);
    assert!(
        (ef / f - 1.0).abs() < 0.02,
        "EF = {ef}, classical F(1) = {f}"
    );
    // Closed form of the comparison point.
    let a = std::f64::consts::PI / 6.0_f64.sqrt();
    let expected = -(1.0 / a) * (1.0 - (-a).exp()).ln();
    assert!((f - expected).abs() < 1e-14);
}

#[test]
fn mu_solver_tracks_masses_across_regimes() {
    for model in [
        EnergyModel::uniform(),
        EnergyModel::constant(1.0, 1.0).unwrap(),
        EnergyModel::log(0.5).unwrap(),
    ] {
        let target = 5e4;
        let mu = mu_for_target_mass(&model, target, 1e-5).unwrap();
        let back = expected_monomers(&model, mu, 1e-3).unwrap().value;
        assert!((back - target).abs() <= 2e-5 * target);
    }
}

//! Closed-form limit shapes per energy regime, with their Young-diagram
//! cell scalings.
//!
//! With cell width `μ` and cell height `1/(μ·E Mon)`, the scaled size
//! distributions concentrate on `F(x) = (1/λ)∫_x^∞ Φ(y) dy`, where `Φ` and
//! `λ` depend only on the asymptotic class of the energies:
//!
//! | regime          | Φ(y)               | λ                  | F(x)                                |
//! |-----------------|--------------------|--------------------|-------------------------------------|
//! | decaying        | `1/(e^y−1)`        | `π²/6`             | `−(6/π²)·ln(1−e^{−x})`              |
//! | constant `c`    | `1/(e^y−e^{−βc})`  | `e^{βc}Li₂(e^{−βc})` | `−ln(1−e^{−βc−x})/Li₂(e^{−βc})`   |
//! | sub-logarithmic | `e^{−y}`           | `1`                | `e^{−x}`                            |
//! | logarithmic     | `y^{−β}e^{−y}`     | `Γ(2−β)`           | `Γ(1−β, x)/Γ(2−β)` (β < 1)          |
//!
//! For decaying energies the same curve is usually drawn in the classical
//! square-root normalization; [`LimitShape::f`] reports that form, while
//! [`LimitShape::f_mu_scaled`] always uses the `μ`-scaling above so that it
//! is directly comparable with empirical `F_μ` curves.

use serde::Serialize;

use crate::analytics;
use crate::energy::{EnergyModel, RegimeRow, Scenario};
use crate::error::Result;
use crate::special::{dilog, gamma, upper_incomplete_gamma};

/// Conversion factor between the μ-scaling and the classical square-root
/// scaling of the decay regime: `a = π/√6`.
const CLASSICAL_A: f64 = 1.282_549_830_161_864_3;

#[derive(Debug, Clone, PartialEq, Serialize)]
enum ShapeKind {
    /// `F(x) = −(√6/π)·ln(1−e^{−πx/√6})` in classical coordinates.
    Classical,
    /// `F(x) = −ln(1−q·e^{−x})/Li₂(q)` with `q = e^{−βc}`.
    Dilog { q: f64, dilog_q: f64 },
    /// `F(x) = e^{−x}`.
    Exponential,
    /// `F(x) = Γ(1−β, x)/Γ(2−β)`.
    IncompleteGamma { beta: f64, norm: f64 },
}

/// A closed-form limit shape with its cell scalings.
#[derive(Debug, Clone, Serialize)]
pub struct LimitShape {
    pub regime: RegimeRow,
    pub beta: f64,
    kind: ShapeKind,
    model: EnergyModel,
}

/// Outcome of a limit-shape request: the typed classifications are results,
/// not errors, so callers can report them.
#[derive(Debug, Clone, Serialize)]
pub enum ShapeOutcome {
    /// The regime admits a deterministic limit shape.
    Shape(LimitShape),
    /// Fluctuations survive in the limit (or probability condenses on a
    /// discrete set): no deterministic shape exists.
    NoLimitShape { reason: String },
    /// The expected mass stays bounded as `μ -> 0`.
    NoThermodynamicLimit,
    /// Borderline parameters where the outcome depends on sub-leading
    /// energy asymptotics.
    Indeterminate { reason: String },
    /// No grand canonical measure exists for any chemical potential.
    NoGrandCanonicalMeasure,
}

impl ShapeOutcome {
    /// Short machine-readable tag for reports.
    pub fn tag(&self) -> &'static str {
        match self {
            ShapeOutcome::Shape(s) => match s.kind {
                ShapeKind::Classical => "classical",
                ShapeKind::Dilog { .. } => "dilog",
                ShapeKind::Exponential => "exponential",
                ShapeKind::IncompleteGamma { .. } => "incomplete_gamma",
            },
            ShapeOutcome::NoLimitShape { .. } => "none",
            ShapeOutcome::NoThermodynamicLimit => "no_thermodynamic_limit",
            ShapeOutcome::Indeterminate { .. } => "indeterminate",
            ShapeOutcome::NoGrandCanonicalMeasure => "no_grand_canonical_measure",
        }
    }

    pub fn shape(&self) -> Option<&LimitShape> {
        match self {
            ShapeOutcome::Shape(s) => Some(s),
            _ => None,
        }
    }
}

/// Classifies the model and returns its limit shape where one exists.
pub fn limit_shape(model: &EnergyModel) -> ShapeOutcome {
    let tag = model.classify();
    if tag.scenario == Scenario::S1 && model.beta() > 0.0 {
        return ShapeOutcome::NoGrandCanonicalMeasure;
    }
    let beta = model.beta();
    if beta == 0.0 {
        // Uniform measure regardless of the energies.
        return ShapeOutcome::Shape(LimitShape {
            regime: RegimeRow::Decay,
            beta,
            kind: ShapeKind::Classical,
            model: model.clone(),
        });
    }
    if tag.scenario == Scenario::S2 {
        return ShapeOutcome::NoLimitShape {
            reason: "condensation: probability concentrates on the ground states".into(),
        };
    }
    match tag.row {
        RegimeRow::Decay => ShapeOutcome::Shape(LimitShape {
            regime: RegimeRow::Decay,
            beta,
            kind: ShapeKind::Classical,
            model: model.clone(),
        }),
        RegimeRow::Constant => {
            let c = match model.kind() {
                crate::energy::EnergyKind::Constant { c } => *c,
                crate::energy::EnergyKind::Table {
                    tail: crate::energy::TailKind::Constant { c },
                    ..
                } => *c,
                _ => 1.0,
            };
            let q = (-beta * c).exp();
            let dilog_q = dilog(q).expect("q in (0,1)");
            ShapeOutcome::Shape(LimitShape {
                regime: RegimeRow::Constant,
                beta,
                kind: ShapeKind::Dilog { q, dilog_q },
                model: model.clone(),
            })
        }
        RegimeRow::Subcritical => ShapeOutcome::Shape(LimitShape {
            regime: RegimeRow::Subcritical,
            beta,
            kind: ShapeKind::Exponential,
            model: model.clone(),
        }),
        RegimeRow::Critical => {
            if beta < 1.0 {
                ShapeOutcome::Shape(LimitShape {
                    regime: RegimeRow::Critical,
                    beta,
                    kind: ShapeKind::IncompleteGamma {
                        beta,
                        norm: gamma(2.0 - beta),
                    },
                    model: model.clone(),
                })
            } else if beta == 1.0 {
                ShapeOutcome::Indeterminate {
                    reason: "critical temperature: scaled size distributions stay random \
                             (Poisson-process limit for exactly logarithmic energies)"
                        .into(),
                }
            } else if beta < 2.0 {
                ShapeOutcome::NoLimitShape {
                    reason: "variance of the scaled size distribution diverges for beta > 1"
                        .into(),
                }
            } else if beta == 2.0 {
                ShapeOutcome::Indeterminate {
                    reason: "borderline growth: expected mass may stay bounded or diverge \
                             depending on sub-leading energy terms"
                        .into(),
                }
            } else {
                ShapeOutcome::NoThermodynamicLimit
            }
        }
        RegimeRow::Supercritical => ShapeOutcome::NoThermodynamicLimit,
    }
}

impl LimitShape {
    /// The shape in its native coordinates (classical square-root scaling
    /// for decaying energies, μ-scaling otherwise).
    pub fn f(&self, x: f64) -> f64 {
        match &self.kind {
            ShapeKind::Classical => {
                if x <= 0.0 {
                    f64::INFINITY
                } else {
                    -(1.0 / CLASSICAL_A) * (-(-CLASSICAL_A * x).exp()).ln_1p()
                }
            }
            _ => self.f_mu_scaled(x),
        }
    }

    /// The shape expressed in the μ-scaling (width `μ`, height `1/(μ E Mon)`),
    /// directly comparable with empirical `F_μ` curves.
    pub fn f_mu_scaled(&self, x: f64) -> f64 {
        match &self.kind {
            ShapeKind::Classical => {
                if x <= 0.0 {
                    return f64::INFINITY;
                }
                let pi = std::f64::consts::PI;
                -(6.0 / (pi * pi)) * (-(-x).exp()).ln_1p()
            }
            ShapeKind::Dilog { q, dilog_q } => {
                if x < 0.0 {
                    return f64::INFINITY;
                }
                -(-q * (-x).exp()).ln_1p() / dilog_q
            }
            ShapeKind::Exponential => (-x).exp(),
            ShapeKind::IncompleteGamma { beta, norm } => {
                if x <= 0.0 {
                    if *beta < 1.0 && x == 0.0 {
                        // Γ(1−β) / Γ(2−β) = 1/(1−β)
                        return 1.0 / (1.0 - beta);
                    }
                    return f64::INFINITY;
                }
                upper_incomplete_gamma(1.0 - beta, x).expect("domain checked") / norm
            }
        }
    }

    /// Density `ϱ(x) = −F′(x)` in the same coordinates as [`Self::f`].
    pub fn density(&self, x: f64) -> f64 {
        match &self.kind {
            ShapeKind::Classical => 1.0 / ((CLASSICAL_A * x).exp() - 1.0),
            ShapeKind::Dilog { q, dilog_q } => {
                // q e^{-x} / ((1 − q e^{-x}) Li₂(q))
                let t = q * (-x).exp();
                t / ((1.0 - t) * dilog_q)
            }
            ShapeKind::Exponential => (-x).exp(),
            ShapeKind::IncompleteGamma { beta, norm } => (-beta * x.ln() - x).exp() / norm,
        }
    }

    /// Young-diagram cell width at chemical potential `μ` for the native
    /// coordinates of [`Self::f`].
    pub fn cell_width(&self, mu: f64) -> f64 {
        match &self.kind {
            ShapeKind::Classical => mu / CLASSICAL_A,
            _ => mu,
        }
    }

    /// Young-diagram cell height at chemical potential `μ`: the asymptotic
    /// form of `1/(μ·E Mon)` in the native coordinates.
    pub fn cell_height(&self, mu: f64) -> f64 {
        let beta = self.beta;
        let u0 = self.model.u_at(-mu.ln());
        match &self.kind {
            ShapeKind::Classical => {
                let pi = std::f64::consts::PI;
                // (π/√6) · μ e^{βu(−ln μ)} / λ with λ = π²/6.
                CLASSICAL_A * mu * (beta * u0).exp() / (pi * pi / 6.0)
            }
            ShapeKind::Dilog { q, dilog_q } => {
                // μ e^{βc} / (e^{βc} Li₂(q)) = μ / Li₂(q)
                let _ = q;
                mu / dilog_q
            }
            ShapeKind::Exponential => mu * (beta * u0).exp(),
            ShapeKind::IncompleteGamma { beta, norm } => mu.powf(1.0 - beta) / norm,
        }
    }

    /// Smallest `x` with `F(x) < threshold` (native coordinates), found by
    /// doubling; used to size evaluation grids.
    pub fn support_bound(&self, threshold: f64) -> f64 {
        let mut x = 1.0;
        while self.f(x) >= threshold && x < 1e6 {
            x *= 2.0;
        }
        x
    }

    /// Mean of the scaled size distribution at finite `μ`, expressed in the
    /// shape's native coordinates (applies the classical conversion in the
    /// decay regime).
    pub fn expected_f_native(&self, mu: f64, x: f64, tol: f64) -> Result<f64> {
        match &self.kind {
            ShapeKind::Classical => {
                let v = analytics::expected_scaled_f(&self.model, mu, CLASSICAL_A * x, tol)?;
                Ok(CLASSICAL_A * v.value)
            }
            _ => Ok(analytics::expected_scaled_f(&self.model, mu, x, tol)?.value),
        }
    }

    pub fn model(&self) -> &EnergyModel {
        &self.model
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn classical_fixed_point() {
        // F(x*) = x* at x* = √6·ln2/π.
        let shape = match limit_shape(&EnergyModel::uniform()) {
            ShapeOutcome::Shape(s) => s,
            other => panic!("expected a shape, got {other:?}"),
        };
        let x_star = 6.0_f64.sqrt() * std::f64::consts::LN_2 / PI;
        assert!((x_star - 0.5404).abs() < 1e-4);
        assert!((shape.f(x_star) - x_star).abs() < 1e-12);
    }

    #[test]
    fn constant_regime_approaches_exponential_at_low_temperature() {
        // For large β, −ln(1−e^{−β−x})/Li₂(e^{−β}) -> e^{−x}.
        let model = EnergyModel::constant(1.0, 10.0).unwrap();
        let shape = limit_shape(&model);
        let shape = shape.shape().expect("constant regime has a shape");
        for &x in &[0.25, 0.5, 1.0, 2.0] {
            assert!((shape.f(x) - (-x).exp()).abs() < 1e-4, "x = {x}");
        }
    }

    #[test]
    fn incomplete_gamma_formula_reduces_to_exponential_at_beta_zero() {
        // Γ(2) = 1 and Γ(1, x) = e^{−x}: the algebraic reduction of the
        // critical-regime formula.
        let formula = LimitShape {
            regime: RegimeRow::Critical,
            beta: 0.0,
            kind: ShapeKind::IncompleteGamma {
                beta: 0.0,
                norm: gamma(2.0),
            },
            model: EnergyModel::log(0.0).unwrap(),
        };
        for &x in &[0.1, 1.0, 3.0] {
            assert!((formula.f_mu_scaled(x) - (-x).exp()).abs() < 1e-12);
        }
        // The measure itself is uniform at β = 0, so classification hands
        // back the classical shape, not the formula above.
        let outcome = limit_shape(&EnergyModel::log(0.0).unwrap());
        let shape = outcome.shape().unwrap();
        assert_eq!(shape.regime, RegimeRow::Decay);
    }

    #[test]
    fn critical_regime_verdicts_by_temperature() {
        assert!(matches!(
            limit_shape(&EnergyModel::log(0.5).unwrap()),
            ShapeOutcome::Shape(_)
        ));
        assert!(matches!(
            limit_shape(&EnergyModel::log(1.0).unwrap()),
            ShapeOutcome::Indeterminate { .. }
        ));
        assert!(matches!(
            limit_shape(&EnergyModel::log(1.5).unwrap()),
            ShapeOutcome::NoLimitShape { .. }
        ));
        assert!(matches!(
            limit_shape(&EnergyModel::log(2.0).unwrap()),
            ShapeOutcome::Indeterminate { .. }
        ));
        assert!(matches!(
            limit_shape(&EnergyModel::log(2.5).unwrap()),
            ShapeOutcome::NoThermodynamicLimit
        ));
    }

    #[test]
    fn supercritical_and_condensing_models_have_no_shape() {
        use crate::energy::TailKind;
        let supercritical = EnergyModel::table(
            Vec::new(),
            TailKind::Power {
                coeff: 1.0,
                exponent: 2.0,
            },
            1.0,
        )
        .unwrap();
        // eps* attained at k = 1 here, so condensation wins the verdict.
        assert!(matches!(
            limit_shape(&supercritical),
            ShapeOutcome::NoLimitShape { .. }
        ));
        let linear = EnergyModel::table(
            vec![0.0],
            TailKind::Power {
                coeff: 1.0,
                exponent: 1.0,
            },
            1.0,
        )
        .unwrap();
        assert!(matches!(
            limit_shape(&linear),
            ShapeOutcome::NoLimitShape { .. }
        ));
    }

    #[test]
    fn density_matches_finite_differences() {
        let shapes = [
            limit_shape(&EnergyModel::uniform()),
            limit_shape(&EnergyModel::constant(1.0, 1.0).unwrap()),
            limit_shape(&EnergyModel::loglog(1.0).unwrap()),
            limit_shape(&EnergyModel::log(0.5).unwrap()),
        ];
        for outcome in &shapes {
            let shape = outcome.shape().unwrap();
            for i in 1..=10 {
                let x = 0.3 * i as f64;
                let h = 1e-5;
                let fd = (shape.f(x - h) - shape.f(x + h)) / (2.0 * h);
                let an = shape.density(x);
                assert!(
                    (fd - an).abs() <= 1e-6 * an.abs().max(1e-12),
                    "x = {x}: fd = {fd}, analytic = {an}"
                );
            }
        }
    }

    #[test]
    fn heights_follow_the_expected_mass() {
        // cell_height ≈ 1/(μ E Mon) in the μ-scaled regimes.
        for model in [
            EnergyModel::constant(1.0, 1.0).unwrap(),
            EnergyModel::loglog(1.0).unwrap(),
            EnergyModel::log(0.5).unwrap(),
        ] {
            let shape_outcome = limit_shape(&model);
            let shape = shape_outcome.shape().unwrap();
            let mu = 1e-4;
            let emon = analytics::expected_monomers(&model, mu, 1e-8).unwrap().value;
            let h = shape.cell_height(mu);
            let exact = 1.0 / (mu * emon);
            assert!(
                (h - exact).abs() < 0.08 * exact,
                "{:?}: h = {h}, 1/(mu E Mon) = {exact}",
                shape.regime
            );
        }
    }
}

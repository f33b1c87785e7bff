//! Unicast diversity gains: reactive, deterministic and random look-ahead,
//! and imperfect prediction.

use serde::{Deserialize, Serialize};

use super::{AnalyticError, BoundValue, DerivedConstants};
use crate::traffic::{LookaheadLaw, PredictionErrorSpec, Regime, ScalingKind};

/// Decay rate of `P(Poisson(mean * C) > C)` per unit `C`: `mean - 1 - ln(mean)`.
///
/// Infinite at `mean = 0` (no traffic never overflows).
pub fn poisson_rate(mean: f64) -> f64 {
    if mean == 0.0 {
        f64::INFINITY
    } else {
        mean - 1.0 - mean.ln()
    }
}

/// Diversity gain without prediction.
pub fn div_nonpred(regime: &Regime) -> BoundValue {
    let g = regime.gamma();
    BoundValue::exact(match regime.kind() {
        ScalingKind::Linear => poisson_rate(g),
        ScalingKind::Polynomial => 1.0 - g,
    })
}

/// Bounds under a fixed look-ahead of `t` slots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetBounds {
    pub lower: BoundValue,
    pub upper: BoundValue,
}

/// Deterministic look-ahead: a lower and upper bound in the linear regime, the
/// exact value (reported as both) in the polynomial regime.
pub fn div_pred_det(regime: &Regime, t: u32) -> DetBounds {
    let g = regime.gamma();
    let w = f64::from(t) + 1.0;
    match regime.kind() {
        ScalingKind::Linear => DetBounds {
            lower: BoundValue::lower(w * poisson_rate(g)),
            // one slot's arrivals exceeding the capacity of the whole window
            upper: BoundValue::upper(w * (g / w - 1.0 + (w / g).ln())),
        },
        ScalingKind::Polynomial => {
            let exact = BoundValue::exact(w * (1.0 - g));
            DetBounds {
                lower: exact,
                upper: exact,
            }
        }
    }
}

/// Random look-ahead result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomLookaheadGain {
    pub bound: BoundValue,
    pub constants: DerivedConstants,
}

/// Smallest single-window exponent over windows ending at `t_min..t_max-1`.
/// Infinite when that range is empty.
fn min_window_rate(gamma: f64, law: &LookaheadLaw) -> f64 {
    let (t_min, t_max) = (law.t_min(), law.t_max());
    let mut cumulative = 0.0;
    let mut best = f64::INFINITY;
    for k in t_min..t_max {
        cumulative += law.cdf(k);
        let w = f64::from(k) + 1.0;
        let mean = gamma * cumulative;
        best = best.min(w * ((w / mean).ln() - 1.0) + mean);
    }
    best
}

/// Random look-ahead drawn from `law`: a lower bound in the linear regime,
/// exact in the polynomial regime where the shortest look-ahead dominates.
pub fn div_pred_rand(
    regime: &Regime,
    law: &LookaheadLaw,
) -> Result<RandomLookaheadGain, AnalyticError> {
    if law.is_deterministic() {
        return Err(AnalyticError::DeterministicLaw);
    }
    law.validate()
        .map_err(|e| AnalyticError::InvalidParameter(e.to_string()))?;
    let g = regime.gamma();
    match regime.kind() {
        ScalingKind::Linear => {
            let v_star = min_window_rate(g, law);
            let full = (f64::from(law.t_max()) + 1.0) * poisson_rate(g);
            Ok(RandomLookaheadGain {
                bound: BoundValue::lower(full.min(v_star)),
                constants: DerivedConstants {
                    v_star: Some(v_star),
                    ..Default::default()
                },
            })
        }
        ScalingKind::Polynomial => Ok(RandomLookaheadGain {
            bound: BoundValue::exact((f64::from(law.t_min()) + 1.0) * (1.0 - g)),
            constants: DerivedConstants::default(),
        }),
    }
}

/// Gain under imperfect prediction and its best operating window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionErrorGain {
    /// `min(predicted_term, missed_term)` at the configured look-ahead.
    pub bound: BoundValue,
    /// Exponent from the predicted stream over the whole window; grows with `T`.
    pub predicted_term: f64,
    /// Exponent from the missed stream alone; independent of `T`.
    pub missed_term: f64,
    /// Real-valued look-ahead at which the two terms are equal.
    pub t_crit: f64,
    pub constants: DerivedConstants,
}

impl PredictionErrorGain {
    /// Window length `t_crit + 1` at the balance point.
    pub fn window_at_crit(&self) -> f64 {
        self.t_crit + 1.0
    }
}

/// Lower bound on the gain with missed and false predictions.
pub fn prediction_error_gain(
    spec: &PredictionErrorSpec,
) -> Result<PredictionErrorGain, AnalyticError> {
    spec.validate_asymptotic()
        .map_err(|e| AnalyticError::InvalidParameter(e.to_string()))?;
    let g = spec.regime.gamma();
    let (a_pred, a_miss) = (spec.alpha_pred, spec.alpha_miss);
    // per-slot exponent of the predicted window term, and the missed-stream term
    let (per_slot, missed_term) = match spec.regime.kind() {
        ScalingKind::Linear => (
            poisson_rate((a_pred + a_miss) * g),
            poisson_rate(a_miss * g),
        ),
        ScalingKind::Polynomial => (1.0 - a_pred * g, 1.0 - a_miss * g),
    };
    let predicted_term = (f64::from(spec.t) + 1.0) * per_slot;
    let t_crit = missed_term / per_slot - 1.0;
    Ok(PredictionErrorGain {
        bound: BoundValue::lower(predicted_term.min(missed_term)),
        predicted_term,
        missed_term,
        t_crit,
        constants: DerivedConstants {
            t_crit: Some(t_crit),
            ..Default::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lin(g: f64) -> Regime {
        Regime::linear(g).unwrap()
    }

    fn poly(g: f64) -> Regime {
        Regime::polynomial(g).unwrap()
    }

    #[test]
    fn nonpredictive_examples() {
        assert!((div_nonpred(&lin(0.5)).value - 0.193_147_180_559_945_3).abs() < 1e-15);
        assert_eq!(div_nonpred(&poly(0.5)).value, 0.5);
        assert!(div_nonpred(&lin(1.0 - 1e-9)).value < 1e-12);
    }

    #[test]
    fn deterministic_examples() {
        let b = div_pred_det(&lin(0.5), 0);
        assert!((b.lower.value - b.upper.value).abs() < 1e-15);
        assert!((b.lower.value - 0.193_147_180_559_945_3).abs() < 1e-15);
        let b = div_pred_det(&lin(0.5), 1);
        assert!((b.lower.value - 0.386_294_361_119_890_6).abs() < 1e-15);
        assert!((b.upper.value - 2.0 * (0.25 - 1.0 + 4f64.ln())).abs() < 1e-15);
        assert!((b.upper.value - 1.272_588_722_239_781).abs() < 1e-12);
        let b = div_pred_det(&poly(0.5), 3);
        assert_eq!(b.lower.kind, crate::analytic::BoundKind::Exact);
        assert_eq!(b.lower.value, 2.0);
    }

    #[test]
    fn random_lookahead_examples() {
        let law = LookaheadLaw::finite(0, vec![0.5, 0.0, 0.0, 0.0, 0.0, 0.5]).unwrap();
        assert_eq!(div_pred_rand(&poly(0.5), &law).unwrap().bound.value, 0.5);
        let late = LookaheadLaw::finite(2, vec![0.5, 0.5]).unwrap();
        assert_eq!(div_pred_rand(&poly(0.5), &late).unwrap().bound.value, 1.5);

        let r = div_pred_rand(&lin(0.6), &law).unwrap();
        // CDF is 1/2 on 0..=4, so window k has mean 0.3 (k + 1): every term is
        // (k + 1)(ln(1 / 0.3) - 0.7), smallest at k = 0
        let expected = (1.0f64 / 0.3).ln() - 0.7;
        assert!((r.constants.v_star.unwrap() - expected).abs() < 1e-14);
        assert!((r.bound.value - expected.min(6.0 * poisson_rate(0.6))).abs() < 1e-14);
        assert!(r.bound.value > poisson_rate(0.6));
    }

    #[test]
    fn deterministic_law_is_redirected() {
        let err = div_pred_rand(&lin(0.5), &LookaheadLaw::deterministic(3)).unwrap_err();
        assert_eq!(err, AnalyticError::DeterministicLaw);
    }

    #[test]
    fn prediction_error_linear_example() {
        let spec = PredictionErrorSpec {
            alpha_pred: 1.0,
            alpha_miss: 0.2,
            t: 0,
            regime: lin(0.5),
        };
        let r = prediction_error_gain(&spec).unwrap();
        let ratio = poisson_rate(0.1) / poisson_rate(0.6);
        assert!((r.window_at_crit() - ratio).abs() < 1e-12);
        assert!((r.window_at_crit() - 12.6557).abs() < 1e-4);
    }

    #[test]
    fn prediction_error_polynomial_balance() {
        let spec = PredictionErrorSpec {
            alpha_pred: 1.2,
            alpha_miss: 0.5,
            t: 0,
            regime: poly(0.5),
        };
        let r = prediction_error_gain(&spec).unwrap();
        // (T + 1)(1 - 0.6) = 1 - 0.25
        assert!((r.t_crit - 0.875).abs() < 1e-12);
    }

    #[test]
    fn perfect_prediction_leaves_only_the_window_term() {
        let spec = PredictionErrorSpec {
            alpha_pred: 1.0,
            alpha_miss: 0.0,
            t: 3,
            regime: lin(0.5),
        };
        let r = prediction_error_gain(&spec).unwrap();
        assert!(r.missed_term.is_infinite());
        assert_eq!(r.bound.value, 4.0 * poisson_rate(0.5));
    }
}

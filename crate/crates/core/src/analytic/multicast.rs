//! Multicast gains with request alignment, alone and mixed with unicast.
//!
//! With `L = theta * C` equally likely sources and multicast rate
//! `gamma_m * C`, a source is demanded in a given slot with probability
//! `A = 1 - exp(-gamma_m / theta)` and within a window of `w` slots with
//! probability `1 - exp(-w * gamma_m / theta)`.

use serde::{Deserialize, Serialize};

use super::unicast::poisson_rate;
use super::{
    check_unit, positive_root, AnalyticError, BoundValue, DerivedConstants, RootConstant,
    RootDefinition,
};

fn window_prob(gamma_m: f64, theta: f64, window: f64) -> f64 {
    -(-window * gamma_m / theta).exp_m1()
}

/// `1 - window_prob`, kept separate so it does not round to 0 for long windows.
fn window_miss(gamma_m: f64, theta: f64, window: f64) -> f64 {
    (-window * gamma_m / theta).exp()
}

fn check_multicast(gamma_m: f64, theta: f64) -> Result<(), AnalyticError> {
    check_unit("multicast gamma", gamma_m)?;
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(AnalyticError::InvalidParameter(format!(
            "theta = {theta} must be positive"
        )));
    }
    Ok(())
}

/// Exact gain of reactive multicast; infinite when there are no more sources than capacity.
pub fn div_multicast_nonpred(gamma_m: f64, theta: f64) -> Result<BoundValue, AnalyticError> {
    check_multicast(gamma_m, theta)?;
    if theta <= 1.0 {
        return Ok(BoundValue::exact(f64::INFINITY));
    }
    let a = window_prob(gamma_m, theta, 1.0);
    // (theta-1) ln(theta-1) - theta ln(theta), rearranged to avoid cancellation at large theta
    let entropy = (theta - 1.0) * (-1.0 / theta).ln_1p() - theta.ln();
    Ok(BoundValue::exact(
        entropy + gamma_m * (theta - 1.0) / theta - a.ln(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MulticastPredGain {
    pub bound: BoundValue,
    pub constants: DerivedConstants,
}

/// Lower bound for multicast with look-ahead `t` under EDF; infinite when the
/// window holds at least as many slots as `theta`.
pub fn div_multicast_pred(
    gamma_m: f64,
    theta: f64,
    t: u32,
) -> Result<MulticastPredGain, AnalyticError> {
    check_multicast(gamma_m, theta)?;
    let w = f64::from(t) + 1.0;
    let x = window_prob(gamma_m, theta, w);
    let constants = DerivedConstants {
        x_m: Some(x),
        a_m: Some(window_prob(gamma_m, theta, 1.0)),
        ..Default::default()
    };
    if theta <= w {
        return Ok(MulticastPredGain {
            bound: BoundValue::lower(f64::INFINITY),
            constants,
        });
    }
    // w ln((1-x) w / (x (theta-w))) - theta ln((1-x) theta / (theta-w)), using ln(1-x) = -w gamma_m / theta
    let value = w * (w.ln() - x.ln() - (theta - w).ln()) - w * w * gamma_m / theta
        + w * gamma_m
        + theta * (-w / theta).ln_1p();
    Ok(MulticastPredGain {
        bound: BoundValue::lower(value),
        constants,
    })
}

/// Parameters of the mixed unicast/multicast scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub unicast: f64,
    pub multicast: f64,
    pub theta: f64,
    pub t: u32,
}

/// Reactive load of mixed traffic: expected demanded sources plus unicast, per unit capacity.
pub fn multicast_stability_load(unicast: f64, multicast: f64, theta: f64) -> f64 {
    window_prob(multicast, theta, 1.0) * theta + unicast
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<(), AnalyticError> {
        check_unit("unicast gamma", self.unicast)?;
        check_unit("multicast gamma", self.multicast)?;
        check_unit("theta", self.theta)?;
        let a = window_prob(self.multicast, self.theta, 1.0);
        if a * self.theta + self.unicast >= 1.0 {
            return Err(AnalyticError::Unstable {
                multicast_load: a * self.theta,
                unicast_load: self.unicast,
            });
        }
        Ok(())
    }

    fn source_prob(&self) -> f64 {
        window_prob(self.multicast, self.theta, 1.0)
    }
}

fn admissible(name: &str, y: f64) -> Result<f64, AnalyticError> {
    if y > 1.0 && y.is_finite() {
        Ok(y)
    } else {
        Err(AnalyticError::NoRoot(format!(
            "{name} = {y} does not give a positive tilt"
        )))
    }
}

/// Exact gain with both classes reactive.
pub fn scenario1_gain(p: &ScenarioParams) -> Result<(f64, RootConstant), AnalyticError> {
    p.validate()?;
    let a = p.source_prob();
    let g = p.multicast / p.theta;
    let em1 = g.exp_m1();
    let y = positive_root(p.unicast * em1, (p.theta - 1.0) * em1 + p.unicast, -1.0);
    let y = admissible("y1", y)?;
    let value = y.ln() + p.unicast * (1.0 - y) - p.theta * (a * (y - 1.0)).ln_1p();
    Ok((
        value,
        RootConstant {
            value: y,
            definition: RootDefinition::MixedSingleSlot {
                unicast: p.unicast,
                multicast: p.multicast,
                theta: p.theta,
            },
        },
    ))
}

/// Exponent of arrivals over a window of `t + 1` slots exceeding the
/// window's capacity, with multicast counted once per demanded source.
pub fn window_term(p: &ScenarioParams) -> Result<(f64, RootConstant, f64), AnalyticError> {
    p.validate()?;
    let w = f64::from(p.t) + 1.0;
    let x = window_prob(p.multicast, p.theta, w);
    let miss = window_miss(p.multicast, p.theta, w);
    let y = positive_root(
        w * p.unicast * x,
        w * p.unicast * miss + p.theta * x - w * x,
        -w * miss,
    );
    let y = admissible("y2", y)?;
    let value = w * y.ln() - w * p.unicast * (y - 1.0) - p.theta * (x * (y - 1.0)).ln_1p();
    Ok((
        value,
        RootConstant {
            value: y,
            definition: RootDefinition::MixedWindow {
                unicast: p.unicast,
                multicast: p.multicast,
                theta: p.theta,
                lookahead: p.t,
            },
        },
        x,
    ))
}

fn two_slot_term(p: &ScenarioParams) -> Result<(f64, RootConstant), AnalyticError> {
    let a = p.source_prob();
    let miss = window_miss(p.multicast, p.theta, 1.0);
    let y = positive_root(
        p.unicast * a,
        p.unicast * miss + 2.0 * p.theta * a - 2.0 * a,
        -2.0 * miss,
    );
    let y = admissible("y4", y)?;
    let value = 2.0 * y.ln() - p.unicast * (y - 1.0) - 2.0 * p.theta * (a * (y - 1.0)).ln_1p();
    Ok((
        value,
        RootConstant {
            value: y,
            definition: RootDefinition::MixedTwoSlot {
                unicast: p.unicast,
                multicast: p.multicast,
                theta: p.theta,
            },
        },
    ))
}

/// Bounds for one mixed-traffic scenario; absent sides are unknown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioBounds {
    pub scenario: u8,
    pub lower: Option<BoundValue>,
    pub upper: Option<BoundValue>,
    pub constants: DerivedConstants,
}

/// Scenario 1: both reactive. 2: predictive multicast only, served by the
/// urgent-first policy. 3: both predictive, served by EDF. 4: predictive
/// unicast only, best possible policy.
pub fn scenario_bounds(scenario: u8, p: &ScenarioParams) -> Result<ScenarioBounds, AnalyticError> {
    p.validate()?;
    let mut constants = DerivedConstants {
        a_m: Some(p.source_prob()),
        ..Default::default()
    };
    let (lower, upper) = match scenario {
        1 => {
            let (d1, y1) = scenario1_gain(p)?;
            constants.y1 = Some(y1);
            let exact = BoundValue::exact(d1);
            (Some(exact), Some(exact))
        }
        2 => {
            let (term, y2, x) = window_term(p)?;
            constants.y2 = Some(y2);
            constants.x_m = Some(x);
            let unicast_only = poisson_rate(p.unicast);
            (
                Some(BoundValue::lower(term.min(unicast_only))),
                Some(BoundValue::upper(unicast_only)),
            )
        }
        3 => {
            let (term, y2, x) = window_term(p)?;
            constants.y2 = Some(y2);
            constants.x_m = Some(x);
            (Some(BoundValue::lower(term)), None)
        }
        4 => {
            let (d1, y1) = scenario1_gain(p)?;
            let (pair, y4) = two_slot_term(p)?;
            constants.y1 = Some(y1);
            constants.y4 = Some(y4);
            (None, Some(BoundValue::upper(d1 + f64::from(p.t) * pair)))
        }
        other => {
            return Err(AnalyticError::InvalidParameter(format!(
                "scenario {other} is not one of 1, 2, 3, 4"
            )))
        }
    };
    Ok(ScenarioBounds {
        scenario,
        lower,
        upper,
        constants,
    })
}

/// Smallest look-ahead at which the urgent-first policy's lower bound reaches
/// the unicast-only gain.
pub fn scenario2_crossover(unicast: f64, multicast: f64, theta: f64) -> Result<u32, AnalyticError> {
    const MAX_T: u32 = 100_000;
    let target = poisson_rate(unicast);
    for t in 0..=MAX_T {
        let p = ScenarioParams {
            unicast,
            multicast,
            theta,
            t,
        };
        if window_term(&p)?.0 >= target {
            return Ok(t);
        }
    }
    Err(AnalyticError::NoRoot(format!(
        "no crossover below T = {MAX_T}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(unicast: f64, t: u32) -> ScenarioParams {
        ScenarioParams {
            unicast,
            multicast: 0.9,
            theta: 0.7,
            t,
        }
    }

    #[test]
    fn reactive_multicast_examples() {
        let v = div_multicast_nonpred(0.5, 2.0).unwrap().value;
        assert!((v - 0.372_397_188_3).abs() < 1e-9);
        assert!(v > poisson_rate(0.5));
        let far = div_multicast_nonpred(0.5, 1e6).unwrap().value;
        assert!((far - poisson_rate(0.5)).abs() < 1e-3);
        assert!(div_multicast_nonpred(0.5, 0.9).unwrap().is_infinite());
        assert!(div_multicast_nonpred(0.5, 1.0).unwrap().is_infinite());
    }

    #[test]
    fn reactive_multicast_decreases_in_theta() {
        let vals: Vec<f64> = [1.5, 2.0, 4.0, 10.0, 100.0]
            .iter()
            .map(|&t| div_multicast_nonpred(0.7, t).unwrap().value)
            .collect();
        assert!(vals.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn predictive_multicast_reduces_at_zero_lookahead() {
        let p0 = div_multicast_pred(0.9, 15.0, 0).unwrap();
        let n = div_multicast_nonpred(0.9, 15.0).unwrap().value;
        assert!((p0.bound.value - n).abs() < 1e-12);
        assert_eq!(p0.constants.x_m, p0.constants.a_m);
    }

    #[test]
    fn predictive_multicast_one_slot() {
        let r = div_multicast_pred(0.9, 15.0, 1).unwrap();
        assert!((r.constants.x_m.unwrap() - 0.113_079_563).abs() < 1e-8);
        assert!(r.bound.value > 2.0 * div_multicast_nonpred(0.9, 15.0).unwrap().value);
    }

    #[test]
    fn predictive_multicast_boundary() {
        assert!(div_multicast_pred(0.9, 2.0, 1).unwrap().bound.is_infinite());
        // just above the boundary the event needs every source demanded in the
        // window, so the rate tends to -(T + 1) ln x rather than diverging
        let near = div_multicast_pred(0.9, 2.0 + 1e-9, 1).unwrap();
        let x = near.constants.x_m.unwrap();
        assert!((near.bound.value + 2.0 * x.ln()).abs() < 1e-6);
    }

    #[test]
    fn scenario1_root_is_admissible() {
        let b = scenario_bounds(1, &params(0.4, 0)).unwrap();
        let y1 = b.constants.y1.unwrap().value;
        assert!(y1 > 1.0);
        assert!((y1 - 1.178_47).abs() < 1e-5);
        assert!((b.lower.unwrap().value - 0.007_814_9).abs() < 1e-6);
    }

    #[test]
    fn window_term_at_zero_lookahead_is_scenario1() {
        let (d1, _) = scenario1_gain(&params(0.4, 0)).unwrap();
        let (w0, _, _) = window_term(&params(0.4, 0)).unwrap();
        assert!((d1 - w0).abs() < 1e-14);
    }

    #[test]
    fn scenario2_crossover_example() {
        assert_eq!(scenario2_crossover(0.4, 0.9, 0.7).unwrap(), 2);
        for t in 0..2 {
            let b = scenario_bounds(2, &params(0.4, t)).unwrap();
            assert!(b.lower.unwrap().value < b.upper.unwrap().value);
        }
        for t in 2..8 {
            let b = scenario_bounds(2, &params(0.4, t)).unwrap();
            assert_eq!(b.lower.unwrap().value, b.upper.unwrap().value);
        }
    }

    #[test]
    fn unstable_mix_is_rejected() {
        let err = scenario_bounds(1, &params(0.6, 0)).unwrap_err();
        assert!(matches!(err, AnalyticError::Unstable { .. }));
        assert!(scenario_bounds(5, &params(0.1, 0)).is_err());
    }

    #[test]
    fn both_predictive_beats_best_unicast_only_prediction() {
        for u in [0.05, 0.1, 0.15, 0.2, 0.25] {
            let l3 = scenario_bounds(3, &params(u, 4))
                .unwrap()
                .lower
                .unwrap()
                .value;
            let u4 = scenario_bounds(4, &params(u, 4))
                .unwrap()
                .upper
                .unwrap()
                .value;
            assert!(l3 > u4, "unicast {u}: {l3} vs {u4}");
        }
    }

    #[test]
    fn window_term_when_every_source_is_surely_demanded() {
        // x rounds to 1: sources contribute theta exactly, leaving a Poisson tail
        let p = ScenarioParams {
            unicast: 0.3,
            multicast: 0.9,
            theta: 0.05,
            t: 6,
        };
        let (value, y, _) = window_term(&p).unwrap();
        let w = 7.0;
        let threshold = w - p.theta;
        let mean = w * p.unicast;
        let poisson_exponent = threshold * (threshold / mean).ln() - threshold + mean;
        assert!((y.value - threshold / mean).abs() < 1e-9);
        assert!(
            (value - poisson_exponent).abs() < 1e-9,
            "{value} vs {poisson_exponent}"
        );
    }
}

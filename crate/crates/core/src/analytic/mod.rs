//! Closed-form diversity gains and their bounds.
//!
//! All rates are per unit of capacity and use natural logarithms. Every
//! closed form here is a Legendre transform of a Poisson/binomial log-MGF, so
//! each one can be cross-checked against [`chernoff_exponent`].

mod chernoff;
mod cognitive;
mod multicast;
mod tails;
mod unicast;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use chernoff::{chernoff_exponent, chernoff_optimum, LogMgf, MgfTerm};
pub use cognitive::{
    div_secondary_dynamic, div_secondary_nonpred, DynamicSecondaryGain, SecondaryBounds,
};
pub use multicast::{
    div_multicast_nonpred, div_multicast_pred, multicast_stability_load, scenario1_gain,
    scenario2_crossover, scenario_bounds, window_term, MulticastPredGain, ScenarioBounds,
    ScenarioParams,
};
pub use tails::{binomial_tail, ln_factorial, poisson_pmf, poisson_tail};
pub use unicast::{
    div_nonpred, div_pred_det, div_pred_rand, poisson_rate, prediction_error_gain, DetBounds,
    PredictionErrorGain, RandomLookaheadGain,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unstable mixed traffic: multicast load {multicast_load:.6} + unicast load {unicast_load:.6} must stay below 1")]
    Unstable {
        multicast_load: f64,
        unicast_load: f64,
    },
    #[error("deterministic look-ahead has a dedicated closed form; use div_pred_det")]
    DeterministicLaw,
    #[error("no admissible root: {0}")]
    NoRoot(String),
}

fn check_unit(name: &str, x: f64) -> Result<(), AnalyticError> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(AnalyticError::InvalidParameter(format!(
            "{name} = {x} must lie in (0, 1)"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Exact,
    Lower,
    Upper,
}

impl BoundKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundKind::Exact => "exact",
            BoundKind::Lower => "lower",
            BoundKind::Upper => "upper",
        }
    }
}

/// A diversity gain tagged with what it is known to be.
///
/// `value` may be `+inf` when the outage event is empty at every capacity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub value: f64,
    pub kind: BoundKind,
}

impl BoundValue {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            kind: BoundKind::Exact,
        }
    }

    pub fn lower(value: f64) -> Self {
        Self {
            value,
            kind: BoundKind::Lower,
        }
    }

    pub fn upper(value: f64) -> Self {
        Self {
            value,
            kind: BoundKind::Upper,
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.value == f64::INFINITY
    }
}

/// The equation a stored root is meant to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RootDefinition {
    /// `a y^2 + b y + c = 0`.
    Quadratic { a: f64, b: f64, c: f64 },
    /// Optimal tilt `y = e^{r/2}` for the dynamic-capacity secondary bound.
    DynamicSecondary { primary: f64, secondary: f64 },
    /// Optimal tilt for one slot of mixed unicast and multicast traffic.
    MixedSingleSlot {
        unicast: f64,
        multicast: f64,
        theta: f64,
    },
    /// Optimal tilt for a look-ahead window of `lookahead + 1` slots.
    MixedWindow {
        unicast: f64,
        multicast: f64,
        theta: f64,
        lookahead: u32,
    },
    /// Optimal tilt for the two-slot term of the best-policy upper bound.
    MixedTwoSlot {
        unicast: f64,
        multicast: f64,
        theta: f64,
    },
}

/// A root of a [`RootDefinition`], kept with its parameters so it can be re-checked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootConstant {
    pub value: f64,
    pub definition: RootDefinition,
}

/// Positive root of `a y^2 + b y + c` with `a > 0 >= c`, without cancellation.
/// At `c = 0` this is `-b / a` when `b < 0`.
pub(crate) fn positive_root(a: f64, b: f64, c: f64) -> f64 {
    debug_assert!(a > 0.0 && c <= 0.0);
    let sqrt_disc = (b * b - 4.0 * a * c).sqrt();
    if b >= 0.0 {
        -2.0 * c / (b + sqrt_disc)
    } else {
        (sqrt_disc - b) / (2.0 * a)
    }
}

/// Intermediate quantities of the closed forms, each kept with the parameters
/// that define it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub y_bar: Option<RootConstant>,
    pub y1: Option<RootConstant>,
    pub y2: Option<RootConstant>,
    pub y4: Option<RootConstant>,
    /// Probability a source is demanded somewhere in a look-ahead window.
    pub x_m: Option<f64>,
    /// Probability a source is demanded in one slot.
    pub a_m: Option<f64>,
    pub v_star: Option<f64>,
    pub t_crit: Option<f64>,
}

impl DerivedConstants {
    pub fn roots(&self) -> impl Iterator<Item = (&'static str, &RootConstant)> {
        [
            ("y_bar", &self.y_bar),
            ("y1", &self.y1),
            ("y2", &self.y2),
            ("y4", &self.y4),
        ]
        .into_iter()
        .filter_map(|(name, r)| r.as_ref().map(|r| (name, r)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positive_root_both_branches() {
        // y^2 - 3y - 4 = (y - 4)(y + 1)
        assert!((positive_root(1.0, -3.0, -4.0) - 4.0).abs() < 1e-15);
        // y^2 + 3y - 4 = (y + 4)(y - 1)
        assert!((positive_root(1.0, 3.0, -4.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn positive_root_avoids_cancellation() {
        // tiny a: root close to -c/b
        let y = positive_root(1e-12, 1.0, -1.0);
        assert!((y - 1.0).abs() < 1e-11);
    }
}

//! Experiment descriptions: what the TOML config and the JSON manifest hold.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytic::multicast_stability_load;
use crate::sched::FractionRounding;
use crate::sim::{Policy, SimConfig, TrafficSpec};
use crate::traffic::{LookaheadLaw, Regime, ScalingKind};

use super::figures::FigureId;

/// One complete, reproducible experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Simulate(SimParams),
    Sweep(SimParams),
    Analytic(AnalyticParams),
    OracleCheck(SimParams),
    ReproduceFigure(FigureParams),
}

impl ExperimentConfig {
    pub fn command(&self) -> &'static str {
        match self {
            ExperimentConfig::Simulate(_) => "simulate",
            ExperimentConfig::Sweep(_) => "sweep",
            ExperimentConfig::Analytic(_) => "analytic",
            ExperimentConfig::OracleCheck(_) => "oracle-check",
            ExperimentConfig::ReproduceFigure(_) => "reproduce-figure",
        }
    }
}

/// Monte Carlo run over one or more capacities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimParams {
    /// Capacity grid; `simulate` and `oracle-check` take exactly one value.
    pub capacity: Vec<u32>,
    pub traffic: Vec<TrafficSpec>,
    pub policy: Policy,
    pub paths: u64,
    /// Slots per path, warmup included.
    pub slots: u64,
    #[serde(default)]
    pub warmup: Option<u64>,
    pub seed: u64,
    #[serde(default)]
    pub rounding: FractionRounding,
}

impl SimParams {
    pub fn at(&self, capacity: u32) -> SimConfig {
        SimConfig {
            capacity,
            traffic: self.traffic.clone(),
            policy: self.policy,
            slots: self.slots,
            warmup: self.warmup,
            seed: self.seed,
            rounding: self.rounding,
        }
    }
}

/// Closed-form quantity to evaluate, selectable by name or by numeric id (1-4, 6-12).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formula {
    Nonpred,
    PredDet,
    PredRand,
    SecondaryNonpred,
    SecondaryDynamic,
    PredictionError,
    MulticastNonpred,
    MulticastPred,
    Scenario1,
    Scenario2,
    Scenario3,
    Scenario4,
}

impl Formula {
    pub const ALL: [Formula; 12] = [
        Formula::Nonpred,
        Formula::PredDet,
        Formula::PredRand,
        Formula::SecondaryNonpred,
        Formula::SecondaryDynamic,
        Formula::PredictionError,
        Formula::MulticastNonpred,
        Formula::MulticastPred,
        Formula::Scenario1,
        Formula::Scenario2,
        Formula::Scenario3,
        Formula::Scenario4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Formula::Nonpred => "nonpred",
            Formula::PredDet => "pred-det",
            Formula::PredRand => "pred-rand",
            Formula::SecondaryNonpred => "secondary-nonpred",
            Formula::SecondaryDynamic => "secondary-dynamic",
            Formula::PredictionError => "prediction-error",
            Formula::MulticastNonpred => "multicast-nonpred",
            Formula::MulticastPred => "multicast-pred",
            Formula::Scenario1 => "scenario1",
            Formula::Scenario2 => "scenario2",
            Formula::Scenario3 => "scenario3",
            Formula::Scenario4 => "scenario4",
        }
    }

    fn number(self) -> Option<u32> {
        Some(match self {
            Formula::Nonpred => 1,
            Formula::PredDet => 2,
            Formula::PredRand => 3,
            Formula::SecondaryNonpred => 4,
            Formula::SecondaryDynamic => 6,
            Formula::MulticastNonpred => 7,
            Formula::MulticastPred => 8,
            Formula::Scenario1 => 9,
            Formula::Scenario2 => 10,
            Formula::Scenario3 => 11,
            Formula::Scenario4 => 12,
            Formula::PredictionError => return None,
        })
    }
}

impl FromStr for Formula {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(n) = s.parse::<u32>() {
            return Formula::ALL
                .into_iter()
                .find(|f| f.number() == Some(n))
                .ok_or_else(|| format!("no closed form with id {n}; valid ids are 1-4 and 6-12"));
        }
        Formula::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Formula::ALL.iter().map(|f| f.name()).collect();
                format!(
                    "unknown formula `{s}`; expected a number or one of {}",
                    names.join(", ")
                )
            })
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Inputs for a closed-form evaluation. Unused fields stay `None`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticParams {
    pub formula: Option<Formula>,
    #[serde(default)]
    pub regime: Option<ScalingKind>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub t: Option<u32>,
    #[serde(default)]
    pub lookahead: Option<LookaheadLaw>,
    #[serde(default)]
    pub gamma_p: Option<f64>,
    #[serde(default)]
    pub gamma_s: Option<f64>,
    #[serde(default)]
    pub gamma_m: Option<f64>,
    #[serde(default)]
    pub gamma_u: Option<f64>,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub alpha_pred: Option<f64>,
    #[serde(default)]
    pub alpha_miss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureParams {
    pub figure: FigureId,
    pub paths: u64,
    pub slots: u64,
    pub seed: u64,
}

/// Parse `det`, `det:<T>`, `pmf:<p0>,<p1>,...` (optionally `pmf@<Tmin>:...`) or `binom:<Tmax>,<p>`.
pub fn parse_lookahead(s: &str, t: Option<u32>) -> Result<LookaheadLaw, String> {
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    let numbers = |rest: &str| -> Result<Vec<f64>, String> {
        rest.split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("`{x}` is not a number in look-ahead `{s}`"))
            })
            .collect()
    };
    let law = match kind {
        "det" => {
            let t = if rest.is_empty() {
                t.unwrap_or(0)
            } else {
                rest.parse()
                    .map_err(|_| format!("bad look-ahead T in `{s}`"))?
            };
            LookaheadLaw::deterministic(t)
        }
        "pmf" => LookaheadLaw::finite(0, numbers(rest)?).map_err(|e| e.to_string())?,
        k if k.starts_with("pmf@") => {
            let t_min = k[4..]
                .parse()
                .map_err(|_| format!("bad minimum look-ahead in `{s}`"))?;
            LookaheadLaw::finite(t_min, numbers(rest)?).map_err(|e| e.to_string())?
        }
        "binom" => {
            let (t_max, p) = rest.split_once(',').ok_or_else(|| {
                format!("binomial look-ahead needs `binom:<Tmax>,<p>`, got `{s}`")
            })?;
            let t_max = t_max
                .trim()
                .parse()
                .map_err(|_| format!("bad Tmax in `{s}`"))?;
            let p = p.trim().parse().map_err(|_| format!("bad p in `{s}`"))?;
            LookaheadLaw::binomial(t_max, p).map_err(|e| e.to_string())?
        }
        _ => {
            return Err(format!(
                "unknown look-ahead `{s}`; use det, pmf:<list> or binom:<Tmax>,<p>"
            ))
        }
    };
    Ok(law)
}

/// Parse `reactive`, `edf`, `selfish`, `dynamic:<f>` or `pi2`.
pub fn parse_policy(s: &str) -> Result<Policy, String> {
    match s {
        "reactive" => Ok(Policy::Reactive),
        "edf" => Ok(Policy::Edf),
        "selfish" => Ok(Policy::Selfish),
        "pi2" => Ok(Policy::Pi2),
        _ => {
            let f = s.strip_prefix("dynamic:").ok_or_else(|| {
                format!("unknown policy `{s}`; use reactive, edf, selfish, dynamic:<f> or pi2")
            })?;
            let f: f64 = f.parse().map_err(|_| format!("bad fraction in `{s}`"))?;
            Ok(Policy::Dynamic { f })
        }
    }
}

/// Parse a capacity list: `12`, `8,10,12` or an inclusive range `8..40` / `8..40:4`.
pub fn parse_grid(s: &str) -> Result<Vec<u32>, String> {
    let bad = || format!("bad capacity grid `{s}`; use 12, 8,10,12 or 8..40[:step]");
    if let Some((lo, hi)) = s.split_once("..") {
        let (hi, step) = hi.split_once(':').unwrap_or((hi, "1"));
        let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
        let step: usize = step.trim().parse().map_err(|_| bad())?;
        if step == 0 || lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).step_by(step).collect());
    }
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| bad()))
        .collect()
}

pub fn regime(kind: ScalingKind, gamma: f64, field: &str) -> Result<Regime, String> {
    Regime::new(kind, gamma).map_err(|e| format!("{field}: {e}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// One problem found by [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub severity: Severity,
    pub field: String,
    pub message: String,
}

impl Violation {
    fn error(field: &str, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            field: field.into(),
            message: message.into(),
        }
    }

    fn warning(field: &str, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}: {}", self.field, self.message)
    }
}

/// Structural problems are errors; load conditions that only make a run
/// unstable are warnings. A valid config yields an empty list.
pub fn validate(cfg: &ExperimentConfig) -> Vec<Violation> {
    match cfg {
        ExperimentConfig::Simulate(p) | ExperimentConfig::OracleCheck(p) => {
            let mut v = Vec::new();
            if p.capacity.len() != 1 {
                v.push(Violation::error(
                    "capacity",
                    format!(
                        "{} takes exactly one capacity, got {}",
                        cfg.command(),
                        p.capacity.len()
                    ),
                ));
            }
            v.extend(validate_sim(p));
            v
        }
        ExperimentConfig::Sweep(p) => validate_sim(p),
        ExperimentConfig::Analytic(p) => validate_analytic(p),
        ExperimentConfig::ReproduceFigure(p) => {
            let mut v = Vec::new();
            if p.paths < 2 {
                v.push(Violation::error("paths", "need at least 2 sample paths"));
            }
            if p.slots == 0 {
                v.push(Violation::error("slots", "must be positive"));
            }
            v
        }
    }
}

fn check_gamma(v: &mut Vec<Violation>, field: &str, gamma: f64) {
    if !(gamma > 0.0 && gamma < 1.0) {
        v.push(Violation::error(
            field,
            format!("{gamma} must lie strictly inside (0, 1)"),
        ));
    }
}

fn check_two_class(v: &mut Vec<Violation>, primary: Regime, secondary: Regime) {
    let (gp, gs) = (primary.gamma(), secondary.gamma());
    if gs >= gp {
        v.push(Violation::error(
            "traffic.secondary.regime.gamma",
            format!(
                "secondary gamma {gs} must be below primary gamma {gp} (primary arrivals dominate)"
            ),
        ));
    }
    if primary.kind() != secondary.kind() {
        v.push(Violation::error(
            "traffic.secondary.regime.kind",
            "primary and secondary must share a scaling regime",
        ));
    } else if primary.kind() == ScalingKind::Linear && gp + gs >= 1.0 {
        v.push(Violation::error(
            "traffic.secondary.regime.gamma",
            format!("primary + secondary gamma = {} must be below 1", gp + gs),
        ));
    }
}

fn validate_sim(p: &SimParams) -> Vec<Violation> {
    let mut v = Vec::new();
    if p.capacity.is_empty() {
        v.push(Violation::error("capacity", "empty capacity grid"));
    }
    if p.capacity.windows(2).any(|w| w[0] >= w[1]) {
        v.push(Violation::error(
            "capacity",
            "grid must be strictly ascending",
        ));
    }
    if p.paths < 2 {
        v.push(Violation::error(
            "paths",
            format!("need at least 2 sample paths, got {}", p.paths),
        ));
    }
    if p.traffic.is_empty() {
        v.push(Violation::error("traffic", "no traffic streams"));
    }
    let mut primary = None;
    let mut secondary = None;
    for t in &p.traffic {
        match t {
            TrafficSpec::Primary { regime, .. } => primary = Some(*regime),
            TrafficSpec::Secondary { regime } => secondary = Some(*regime),
            _ => {}
        }
    }
    if let (Some(pr), Some(se)) = (primary, secondary) {
        check_two_class(&mut v, pr, se);
    }
    for &c in &p.capacity {
        let cfg = p.at(c);
        if let Err(e) = cfg.validate() {
            v.push(Violation::error("traffic", format!("at C = {c}: {e}")));
            break;
        }
    }
    if let Some(&c) = p.capacity.first() {
        if v.is_empty() {
            v.extend(
                p.at(c)
                    .warnings()
                    .into_iter()
                    .map(|w| Violation::warning("traffic", w)),
            );
        }
    }
    v
}

fn validate_analytic(p: &AnalyticParams) -> Vec<Violation> {
    let mut v = Vec::new();
    let Some(formula) = p.formula else {
        v.push(Violation::error("formula", "missing; pass --theorem"));
        return v;
    };
    let mut need = |field: &str, value: Option<f64>| match value {
        None => v.push(Violation::error(field, format!("required by {formula}"))),
        Some(g) if field.starts_with("gamma") => check_gamma(&mut v, field, g),
        Some(_) => {}
    };
    match formula {
        Formula::Nonpred | Formula::PredDet | Formula::PredRand => need("gamma", p.gamma),
        Formula::SecondaryNonpred | Formula::SecondaryDynamic => {
            need("gamma_p", p.gamma_p);
            need("gamma_s", p.gamma_s);
        }
        Formula::PredictionError => {
            need("gamma", p.gamma);
            need("alpha_pred", p.alpha_pred);
            need("alpha_miss", p.alpha_miss);
        }
        Formula::MulticastNonpred | Formula::MulticastPred => {
            need("gamma_m", p.gamma_m);
            need("theta", p.theta);
        }
        Formula::Scenario1 | Formula::Scenario2 | Formula::Scenario3 | Formula::Scenario4 => {
            need("gamma_u", p.gamma_u);
            need("gamma_m", p.gamma_m);
            need("theta", p.theta);
        }
    }
    if formula == Formula::PredRand && p.lookahead.is_none() {
        v.push(Violation::error("lookahead", "required by pred-rand"));
    }
    if let (Some(gp), Some(gs)) = (p.gamma_p, p.gamma_s) {
        if matches!(
            formula,
            Formula::SecondaryNonpred | Formula::SecondaryDynamic
        ) {
            let kind = p.regime.unwrap_or(ScalingKind::Linear);
            if let (Ok(pr), Ok(se)) = (Regime::new(kind, gp), Regime::new(kind, gs)) {
                check_two_class(&mut v, pr, se);
            }
        }
    }
    if let Some(theta) = p.theta {
        if theta <= 0.0 {
            v.push(Violation::error(
                "theta",
                format!("{theta} must be positive"),
            ));
        }
    }
    if let (Some(gu), Some(gm), Some(theta)) = (p.gamma_u, p.gamma_m, p.theta) {
        if theta > 0.0 && (0.0..1.0).contains(&gm) {
            let load = multicast_stability_load(gu, gm, theta);
            if load >= 1.0 {
                v.push(Violation::warning(
                    "gamma_u",
                    format!("reactive mixed load A*theta + gamma_u = {load:.4} is not below 1 (multicast stability condition)"),
                ));
            }
        }
    }
    v
}

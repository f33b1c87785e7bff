//! Command-line front end: flag and config parsing, validation and dispatch.
//!
//! [`prepare`] turns parsed arguments into an [`ExperimentConfig`] and
//! [`execute`] runs it without touching the file system, so a manifest can be
//! replayed in-process and compared byte for byte.
//!
//! Every command emits CSV with the columns in [`CSV_HEADER`]:
//!
//! | column | meaning |
//! |---|---|
//! | `experiment` | curve or formula label, with its parameters for closed forms |
//! | `C` | capacity (empty for closed forms) |
//! | `class` | outage class: `all`, `primary`, `secondary`, `unicast`, `multicast` |
//! | `metric` | `outage`, `exact`, `p_hat`, a bound kind or a derived constant |
//! | `value` | the number |
//! | `stderr` | standard error across sample paths (Monte Carlo rows only) |
//! | `seed` | master seed (Monte Carlo rows only) |

mod config;
mod figures;
mod output;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use config::{
    parse_grid, parse_lookahead, parse_policy, validate, AnalyticParams, ExperimentConfig,
    FigureParams, Formula, Severity, SimParams, Violation,
};
pub use figures::{figure_spec, Curve, FigureId, FigureSpec};
pub use output::{
    csv_bytes, write_atomic, write_csv, write_outputs, Manifest, Row, CSV_HEADER, MANIFEST_FILE,
    RESULTS_FILE,
};

use crate::analytic::{
    div_multicast_nonpred, div_multicast_pred, div_nonpred, div_pred_det, div_pred_rand,
    div_secondary_dynamic, div_secondary_nonpred, prediction_error_gain, scenario_bounds,
    AnalyticError, BoundValue, DerivedConstants, ScenarioParams,
};
use crate::oracle::{exact_event_bounds, exact_outage_stationary, OracleError};
use crate::sched::FractionRounding;
use crate::sim::{estimate_outage, sweep_capacity, OutageClass, Policy, SimError, TrafficSpec};
use crate::traffic::{MulticastSpec, PredictionErrorSpec, Regime, ScalingKind};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("invalid configuration:\n{}", .0.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("exact and Monte Carlo outage disagree for class {class}: exact {exact:e}, estimate {p_hat:e} +- {tolerance:e}")]
    Disagreement {
        class: String,
        exact: f64,
        p_hat: f64,
        tolerance: f64,
    },
}

impl CliError {
    /// 2 for anything wrong with the input, 1 for failures while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Invalid(_) => 2,
            CliError::Analytic(AnalyticError::NoRoot(_)) => 1,
            CliError::Analytic(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "proactive",
    version,
    about = "Proactive slotted-network scheduling: simulation, closed forms and exact checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo outage estimate at one capacity.
    Simulate(SimArgs),
    /// Monte Carlo outage estimates over a capacity grid.
    Sweep(SimArgs),
    /// Evaluate a closed-form diversity gain or bound.
    Analytic(AnalyticArgs),
    /// Compare the exact stationary outage of a small system with Monte Carlo.
    OracleCheck(SimArgs),
    /// Regenerate the data behind a reference figure.
    ReproduceFigure(FigureArgs),
    /// Run an experiment from a TOML config or a JSON manifest.
    #[command(alias = "replay")]
    Run(RunArgs),
    /// Check a TOML config or JSON manifest and list every problem found.
    Validate { file: PathBuf },
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Directory for results.csv and manifest.json; CSV goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RegimeArg {
    Linear,
    #[value(alias = "polynomial")]
    Poly,
}

impl From<RegimeArg> for ScalingKind {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::Linear => ScalingKind::Linear,
            RegimeArg::Poly => ScalingKind::Polynomial,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RoundingArg {
    Ceil,
    Floor,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    /// Capacity: `12`, `8,10,12` or `8..40[:step]`.
    #[arg(long = "C", value_name = "GRID")]
    pub capacity: String,
    /// Arrival gamma of the unicast (or primary) stream.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, value_enum, default_value = "linear")]
    pub regime: RegimeArg,
    /// Deterministic look-ahead; also the multicast and prediction-error look-ahead.
    #[arg(long = "T")]
    pub t: Option<u32>,
    /// Look-ahead law: det, pmf:<p0,p1,...> or binom:<Tmax>,<p>.
    #[arg(long)]
    pub lookahead: Option<String>,
    /// reactive, edf, selfish, dynamic:<f> or pi2.
    #[arg(long, default_value = "edf", value_parser = parse_policy)]
    pub policy: Policy,
    /// Secondary gamma; makes the main stream primary.
    #[arg(long)]
    pub gamma_s: Option<f64>,
    /// Multicast gamma; with --gamma the main stream becomes unicast background.
    #[arg(long)]
    pub gamma_m: Option<f64>,
    /// Data sources per unit capacity.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Predicted-stream factor; selects prediction-error traffic.
    #[arg(long)]
    pub alpha_pred: Option<f64>,
    /// Missed-prediction factor.
    #[arg(long)]
    pub alpha_miss: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub paths: u64,
    /// Slots per path, warmup included.
    #[arg(long, default_value_t = 1000)]
    pub slots: u64,
    #[arg(long)]
    pub warmup: Option<u64>,
    #[arg(long, env = "PROACTIVE_SEED", default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "ceil")]
    pub rounding: RoundingArg,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyticArgs {
    /// Formula by name or numeric id.
    #[arg(long, value_parser = |s: &str| s.parse::<Formula>())]
    pub theorem: Formula,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, value_enum, default_value = "linear")]
    pub regime: RegimeArg,
    #[arg(long = "T")]
    pub t: Option<u32>,
    #[arg(long)]
    pub lookahead: Option<String>,
    #[arg(long)]
    pub gamma_p: Option<f64>,
    #[arg(long)]
    pub gamma_s: Option<f64>,
    #[arg(long)]
    pub gamma_m: Option<f64>,
    #[arg(long)]
    pub gamma_u: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub alpha_pred: Option<f64>,
    #[arg(long)]
    pub alpha_miss: Option<f64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    #[arg(value_parser = |s: &str| s.parse::<FigureId>())]
    pub figure: FigureId,
    #[arg(long, default_value_t = 100)]
    pub paths: u64,
    #[arg(long, default_value_t = 1000)]
    pub slots: u64,
    #[arg(long, env = "PROACTIVE_SEED", default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// `.toml` experiment config or `.json` manifest.
    pub file: PathBuf,
    #[command(flatten)]
    pub out: OutArgs,
}

/// A validated experiment plus where to put its outputs.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub experiment: ExperimentConfig,
    pub out: Option<PathBuf>,
    pub warnings: Vec<Violation>,
}

fn sim_params(a: &SimArgs) -> Result<SimParams, CliError> {
    let capacity = parse_grid(&a.capacity).map_err(|e| CliError::Config(format!("--C: {e}")))?;
    let kind = ScalingKind::from(a.regime);
    let main_regime = |field: &str| -> Result<Regime, CliError> {
        let g = a
            .gamma
            .ok_or_else(|| CliError::Config(format!("--gamma is required for {field} traffic")))?;
        config::regime(kind, g, "--gamma").map_err(CliError::Config)
    };
    let lookahead = match &a.lookahead {
        Some(s) => {
            parse_lookahead(s, a.t).map_err(|e| CliError::Config(format!("--lookahead: {e}")))?
        }
        None => crate::traffic::LookaheadLaw::deterministic(a.t.unwrap_or(0)),
    };
    let mut traffic = Vec::new();
    if let Some(gm) = a.gamma_m {
        let theta = a
            .theta
            .ok_or_else(|| CliError::Config("--theta is required with --gamma-m".into()))?;
        let spec = MulticastSpec::new(gm, theta)
            .map_err(|e| CliError::Config(format!("--gamma-m/--theta: {e}")))?;
        if a.gamma.is_some() {
            traffic.push(TrafficSpec::Unicast {
                regime: main_regime("unicast")?,
                lookahead: crate::traffic::LookaheadLaw::deterministic(0),
            });
        }
        traffic.push(TrafficSpec::Multicast {
            spec,
            lookahead: a.t.unwrap_or(0),
        });
    } else if let Some(gs) = a.gamma_s {
        traffic.push(TrafficSpec::Primary {
            regime: main_regime("primary")?,
            lookahead,
        });
        traffic.push(TrafficSpec::Secondary {
            regime: config::regime(kind, gs, "--gamma-s").map_err(CliError::Config)?,
        });
    } else if let Some(alpha_pred) = a.alpha_pred {
        let alpha_miss = a
            .alpha_miss
            .ok_or_else(|| CliError::Config("--alpha-miss is required with --alpha-pred".into()))?;
        traffic.push(TrafficSpec::PredictionError {
            spec: PredictionErrorSpec {
                alpha_pred,
                alpha_miss,
                t: a.t.unwrap_or(0),
                regime: main_regime("prediction-error")?,
            },
        });
    } else {
        traffic.push(TrafficSpec::Unicast {
            regime: main_regime("unicast")?,
            lookahead,
        });
    }
    Ok(SimParams {
        capacity,
        traffic,
        policy: a.policy,
        paths: a.paths,
        slots: a.slots,
        warmup: a.warmup,
        seed: a.seed,
        rounding: match a.rounding {
            RoundingArg::Ceil => FractionRounding::Ceil,
            RoundingArg::Floor => FractionRounding::Floor,
        },
    })
}

fn analytic_params(a: &AnalyticArgs) -> Result<AnalyticParams, CliError> {
    let lookahead = a
        .lookahead
        .as_deref()
        .map(|s| parse_lookahead(s, a.t))
        .transpose()
        .map_err(|e| CliError::Config(format!("--lookahead: {e}")))?;
    Ok(AnalyticParams {
        formula: Some(a.theorem),
        regime: Some(a.regime.into()),
        gamma: a.gamma,
        t: a.t,
        lookahead,
        gamma_p: a.gamma_p,
        gamma_s: a.gamma_s,
        gamma_m: a.gamma_m,
        gamma_u: a.gamma_u,
        theta: a.theta,
        alpha_pred: a.alpha_pred,
        alpha_miss: a.alpha_miss,
    })
}

/// Read a TOML config or a JSON manifest.
pub fn load_experiment(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if path.extension().is_some_and(|x| x == "json") {
        let m: Manifest = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Ok(m.experiment)
    } else {
        parse_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Parse a TOML experiment, naming the offending field in any error.
pub fn parse_toml(text: &str) -> Result<ExperimentConfig, String> {
    fn section<T: serde::de::DeserializeOwned>(table: toml::Table) -> Result<T, String> {
        serde_path_to_error::deserialize(table).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner().to_string();
            let inner = inner.trim();
            if path == "." {
                inner.to_owned()
            } else {
                format!("field `{path}`: {inner}")
            }
        })
    }
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| e.to_string())?;
    let command = match table.remove("command") {
        Some(toml::Value::String(c)) => c,
        Some(_) => return Err("field `command`: expected a string".into()),
        None => return Err("field `command`: missing".into()),
    };
    Ok(match command.as_str() {
        "simulate" => ExperimentConfig::Simulate(section(table)?),
        "sweep" => ExperimentConfig::Sweep(section(table)?),
        "oracle-check" => ExperimentConfig::OracleCheck(section(table)?),
        "analytic" => ExperimentConfig::Analytic(section(table)?),
        "reproduce-figure" => ExperimentConfig::ReproduceFigure(section(table)?),
        other => {
            return Err(format!(
                "field `command`: unknown command `{other}`; expected simulate, sweep, analytic, oracle-check or reproduce-figure"
            ))
        }
    })
}

/// Build and validate the experiment described by the command line.
pub fn prepare(cli: &Cli) -> Result<Prepared, CliError> {
    let (experiment, out) = match &cli.command {
        Command::Simulate(a) => (
            ExperimentConfig::Simulate(sim_params(a)?),
            a.out.out.clone(),
        ),
        Command::Sweep(a) => (ExperimentConfig::Sweep(sim_params(a)?), a.out.out.clone()),
        Command::OracleCheck(a) => (
            ExperimentConfig::OracleCheck(sim_params(a)?),
            a.out.out.clone(),
        ),
        Command::Analytic(a) => (
            ExperimentConfig::Analytic(analytic_params(a)?),
            a.out.out.clone(),
        ),
        Command::ReproduceFigure(a) => (
            ExperimentConfig::ReproduceFigure(FigureParams {
                figure: a.figure,
                paths: a.paths,
                slots: a.slots,
                seed: a.seed,
            }),
            a.out.out.clone(),
        ),
        Command::Run(a) => (load_experiment(&a.file)?, a.out.out.clone()),
        Command::Validate { file } => (load_experiment(file)?, None),
    };
    let (errors, warnings): (Vec<_>, Vec<_>) = validate(&experiment)
        .into_iter()
        .partition(|v| v.severity == Severity::Error);
    if !errors.is_empty() {
        return Err(CliError::Invalid(errors));
    }
    Ok(Prepared {
        experiment,
        out,
        warnings,
    })
}

fn sim_rows(p: &SimParams, experiment: &str) -> Result<Vec<Row>, CliError> {
    let cfg = p.at(p.capacity[0]);
    let curve = sweep_capacity(&cfg, &p.capacity, p.paths)?;
    Ok(curve
        .into_iter()
        .flat_map(|(c, est)| {
            est.into_iter().map(move |(class, e)| Row {
                experiment: experiment.to_owned(),
                capacity: Some(c),
                class: Some(class.as_str().into()),
                metric: "outage".into(),
                value: e.p_hat,
                stderr: Some(e.stderr),
                seed: Some(p.seed),
            })
        })
        .collect())
}

fn oracle_rows(p: &SimParams) -> Result<Vec<Row>, CliError> {
    let c = p.capacity[0];
    let cfg = p.at(c);
    let exact = exact_outage_stationary(&cfg, None)?;
    let est = estimate_outage(&cfg, p.paths)?;
    let label = format!("oracle-check:{}", p.policy.label());
    let row = |class: Option<OutageClass>,
               metric: &str,
               value: f64,
               stderr: Option<f64>,
               seed: Option<u64>| Row {
        experiment: label.clone(),
        capacity: Some(c),
        class: class.map(|k| k.as_str().into()),
        metric: metric.into(),
        value,
        stderr,
        seed,
    };
    let mut rows = Vec::new();
    let mut mismatch = None;
    let counted = (p.paths * (cfg.slots - cfg.effective_warmup())) as f64;
    for (&class, &value) in &exact.per_class {
        let e = &est[&class];
        rows.push(row(Some(class), "exact", value, None, None));
        rows.push(row(
            Some(class),
            "p_hat",
            e.p_hat,
            Some(e.stderr),
            Some(p.seed),
        ));
        // per-path spread, floored by the binomial spread under the exact value
        let sd = e.stderr.max((value * (1.0 - value) / counted).sqrt());
        if mismatch.is_none() && (value - e.p_hat).abs() > 3.0 * sd {
            mismatch = Some(CliError::Disagreement {
                class: class.as_str().into(),
                exact: value,
                p_hat: e.p_hat,
                tolerance: 3.0 * sd,
            });
        }
    }
    rows.push(row(
        None,
        "truncation_mass",
        exact.truncation_mass,
        None,
        None,
    ));
    rows.push(row(None, "states", exact.states as f64, None, None));
    if let ([TrafficSpec::Unicast { regime, lookahead }], Policy::Edf) =
        (p.traffic.as_slice(), p.policy)
    {
        let b = exact_event_bounds(regime.mean_rate(c), c, lookahead);
        rows.push(row(
            Some(OutageClass::All),
            "event_lower",
            b.lower,
            None,
            None,
        ));
        rows.push(row(
            Some(OutageClass::All),
            "event_upper",
            b.upper,
            None,
            None,
        ));
    }
    match mismatch {
        Some(e) => Err(e),
        None => Ok(rows),
    }
}

fn bound_rows(label: &str, bounds: &[BoundValue]) -> Vec<Row> {
    let mut rows: Vec<Row> = Vec::new();
    for b in bounds {
        if !rows
            .iter()
            .any(|r| r.metric == b.kind.as_str() && r.value == b.value)
        {
            rows.push(Row::analytic(label, b.kind.as_str(), b.value));
        }
    }
    rows
}

fn constant_rows(label: &str, c: &DerivedConstants) -> Vec<Row> {
    let mut rows: Vec<Row> = c
        .roots()
        .map(|(name, r)| Row::analytic(label, name, r.value))
        .collect();
    for (name, v) in [
        ("x_m", c.x_m),
        ("a_m", c.a_m),
        ("v_star", c.v_star),
        ("t_crit", c.t_crit),
    ] {
        if let Some(v) = v {
            rows.push(Row::analytic(label, name, v));
        }
    }
    rows
}

fn analytic_label(p: &AnalyticParams, formula: Formula) -> String {
    let mut parts = vec![formula.name().to_owned()];
    let fields: [(&str, Option<f64>); 9] = [
        ("gamma", p.gamma),
        ("gamma_p", p.gamma_p),
        ("gamma_s", p.gamma_s),
        ("gamma_u", p.gamma_u),
        ("gamma_m", p.gamma_m),
        ("theta", p.theta),
        ("alpha_pred", p.alpha_pred),
        ("alpha_miss", p.alpha_miss),
        ("T", p.t.map(f64::from)),
    ];
    parts.extend(
        fields
            .iter()
            .filter_map(|(k, v)| v.map(|v| format!("{k}={v}"))),
    );
    if let Some(kind) = p.regime {
        if !matches!(formula, Formula::MulticastNonpred | Formula::MulticastPred)
            && !matches!(
                formula,
                Formula::Scenario1 | Formula::Scenario2 | Formula::Scenario3 | Formula::Scenario4
            )
        {
            parts.push(format!("regime={}", kind.as_str()));
        }
    }
    if let Some(law) = &p.lookahead {
        parts.push(format!(
            "lookahead={}",
            serde_json::to_string(law)
                .unwrap_or_default()
                .replace(',', ";")
        ));
    }
    parts.join(" ")
}

fn required(v: Option<f64>, name: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::Config(format!("{name} is required")))
}

fn analytic_rows(p: &AnalyticParams) -> Result<Vec<Row>, CliError> {
    let formula = p
        .formula
        .ok_or_else(|| CliError::Config("formula is required".into()))?;
    let label = analytic_label(p, formula);
    let kind = p.regime.unwrap_or(ScalingKind::Linear);
    let main_regime = || -> Result<Regime, CliError> {
        config::regime(kind, required(p.gamma, "gamma")?, "gamma").map_err(CliError::Config)
    };
    let t = p.t.unwrap_or(0);
    let scenario = |k: u8| -> Result<Vec<Row>, CliError> {
        let params = ScenarioParams {
            unicast: required(p.gamma_u, "gamma_u")?,
            multicast: required(p.gamma_m, "gamma_m")?,
            theta: required(p.theta, "theta")?,
            t,
        };
        let b = scenario_bounds(k, &params)?;
        let bounds: Vec<BoundValue> = [b.lower, b.upper].into_iter().flatten().collect();
        let mut rows = bound_rows(&label, &bounds);
        rows.extend(constant_rows(&label, &b.constants));
        Ok(rows)
    };
    let rows = match formula {
        Formula::Nonpred => bound_rows(&label, &[div_nonpred(&main_regime()?)]),
        Formula::PredDet => {
            let b = div_pred_det(&main_regime()?, t);
            bound_rows(&label, &[b.lower, b.upper])
        }
        Formula::PredRand => {
            let law = p
                .lookahead
                .as_ref()
                .ok_or_else(|| CliError::Config("lookahead is required".into()))?;
            let g = div_pred_rand(&main_regime()?, law)?;
            let mut rows = bound_rows(&label, &[g.bound]);
            rows.extend(constant_rows(&label, &g.constants));
            rows
        }
        Formula::SecondaryNonpred => {
            let b = div_secondary_nonpred(
                required(p.gamma_p, "gamma_p")?,
                required(p.gamma_s, "gamma_s")?,
                kind,
            )?;
            bound_rows(&label, &[b.lower, b.upper])
        }
        Formula::SecondaryDynamic => {
            let g = div_secondary_dynamic(
                required(p.gamma_p, "gamma_p")?,
                required(p.gamma_s, "gamma_s")?,
                kind,
            )?;
            let mut rows = bound_rows(&label, &[g.bound]);
            rows.extend(constant_rows(&label, &g.constants));
            rows
        }
        Formula::PredictionError => {
            let spec = PredictionErrorSpec {
                alpha_pred: required(p.alpha_pred, "alpha_pred")?,
                alpha_miss: required(p.alpha_miss, "alpha_miss")?,
                t,
                regime: main_regime()?,
            };
            let g = prediction_error_gain(&spec)?;
            let mut rows = bound_rows(&label, &[g.bound]);
            rows.push(Row::analytic(&label, "predicted_term", g.predicted_term));
            rows.push(Row::analytic(&label, "missed_term", g.missed_term));
            rows.extend(constant_rows(&label, &g.constants));
            rows
        }
        Formula::MulticastNonpred => bound_rows(
            &label,
            &[div_multicast_nonpred(
                required(p.gamma_m, "gamma_m")?,
                required(p.theta, "theta")?,
            )?],
        ),
        Formula::MulticastPred => {
            let g = div_multicast_pred(
                required(p.gamma_m, "gamma_m")?,
                required(p.theta, "theta")?,
                t,
            )?;
            let mut rows = bound_rows(&label, &[g.bound]);
            rows.extend(constant_rows(&label, &g.constants));
            rows
        }
        Formula::Scenario1 => scenario(1)?,
        Formula::Scenario2 => scenario(2)?,
        Formula::Scenario3 => scenario(3)?,
        Formula::Scenario4 => scenario(4)?,
    };
    Ok(rows)
}

fn figure_rows(p: &FigureParams) -> Result<Vec<Row>, CliError> {
    match figure_spec(p.figure) {
        FigureSpec::Simulated { grid, curves } => {
            let mut rows = Vec::new();
            for curve in curves {
                let params = SimParams {
                    capacity: grid.clone(),
                    traffic: curve.traffic.clone(),
                    policy: curve.policy,
                    paths: p.paths,
                    slots: p.slots,
                    warmup: None,
                    seed: p.seed,
                    rounding: FractionRounding::Ceil,
                };
                let all = sim_rows(&params, &curve.label)?;
                rows.extend(all.into_iter().filter(|r| {
                    curve
                        .classes
                        .iter()
                        .any(|c| r.class.as_deref() == Some(c.as_str()))
                }));
            }
            Ok(rows)
        }
        FigureSpec::MulticastGain {
            gamma_m,
            theta,
            max_t,
        } => {
            let nonpred = div_multicast_nonpred(gamma_m, theta)?.value;
            let mut rows = Vec::new();
            for t in 0..=max_t {
                let g = div_multicast_pred(gamma_m, theta, t)?;
                rows.push(Row::analytic(
                    format!("multicast-pred T={t}"),
                    g.bound.kind.as_str(),
                    g.bound.value,
                ));
                rows.push(Row::analytic(
                    format!("scaled multicast-nonpred T={t}"),
                    "lower",
                    (f64::from(t) + 1.0) * nonpred,
                ));
            }
            Ok(rows)
        }
    }
}

/// Run a validated experiment and return its CSV rows.
pub fn execute(experiment: &ExperimentConfig) -> Result<Vec<Row>, CliError> {
    match experiment {
        ExperimentConfig::Simulate(p) | ExperimentConfig::Sweep(p) => {
            sim_rows(p, &format!("{}:{}", experiment.command(), p.policy.label()))
        }
        ExperimentConfig::OracleCheck(p) => oracle_rows(p),
        ExperimentConfig::Analytic(p) => analytic_rows(p),
        ExperimentConfig::ReproduceFigure(p) => figure_rows(p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Prepared, CliError> {
        let cli =
            Cli::try_parse_from(std::iter::once("proactive").chain(args.iter().copied())).unwrap();
        prepare(&cli)
    }

    #[test]
    fn multicast_nonpred_is_a_single_row() {
        let p = parse(&[
            "analytic",
            "--theorem",
            "7",
            "--gamma-m",
            "0.5",
            "--theta",
            "2",
        ])
        .unwrap();
        let rows = execute(&p.experiment).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].metric, "exact");
        assert!((rows[0].value - 0.372_397_188_3).abs() < 1e-9);
    }

    #[test]
    fn secondary_above_primary_exits_2() {
        let err = parse(&[
            "simulate",
            "--C",
            "10",
            "--gamma",
            "0.1",
            "--gamma-s",
            "0.2",
            "--policy",
            "selfish",
        ])
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("secondary"));
    }

    #[test]
    fn flags_build_the_expected_traffic() {
        let p = parse(&[
            "sweep",
            "--C",
            "4..8:2",
            "--gamma",
            "0.5",
            "--lookahead",
            "binom:3,0.5",
        ])
        .unwrap();
        let ExperimentConfig::Sweep(s) = p.experiment else {
            panic!()
        };
        assert_eq!(s.capacity, vec![4, 6, 8]);
        assert!(matches!(&s.traffic[..], [TrafficSpec::Unicast { .. }]));
        let p = parse(&[
            "simulate",
            "--C",
            "4",
            "--gamma",
            "0.3",
            "--gamma-m",
            "0.5",
            "--theta",
            "0.5",
            "--policy",
            "pi2",
        ])
        .unwrap();
        let ExperimentConfig::Simulate(s) = p.experiment else {
            panic!()
        };
        assert!(matches!(
            &s.traffic[..],
            [TrafficSpec::Unicast { .. }, TrafficSpec::Multicast { .. }]
        ));
    }

    #[test]
    fn toml_round_trip() {
        let p = parse(&[
            "simulate", "--C", "4", "--gamma", "0.5", "--T", "1", "--paths", "3",
        ])
        .unwrap();
        let text = toml::to_string(&p.experiment).unwrap();
        let back = parse_toml(&text).unwrap();
        assert_eq!(back, p.experiment);
    }

    #[test]
    fn unknown_toml_field_is_named() {
        let text = "command = \"sweep\"\ncapacity = [4]\ntraffic = []\npolicy = { kind = \"edf\" }\npaths = 2\nslots = 500\nseed = 1\nwormup = 3\n";
        let err = parse_toml(text).unwrap_err();
        assert!(err.contains("wormup"), "{err}");
        let err = parse_toml(&text.replace("paths = 2", "paths = \"two\"")).unwrap_err();
        assert!(err.contains("`paths`"), "{err}");
    }
}

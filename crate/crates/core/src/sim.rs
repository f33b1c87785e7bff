//! Slot-by-slot sample paths and Monte Carlo outage estimates.
//!
//! Each traffic role draws from its own ChaCha8 stream, keyed by the master
//! seed, the path index and the role. Two configurations that differ only in
//! policy or look-ahead therefore see the same arrival counts on every path.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::multicast_stability_load;
use crate::sched::{
    advance_slot, edf_serve, mixed_edf_serve, pi2_serve, serve_two_class, Backlog,
    FractionRounding, MulticastBacklog, PrimaryMode, SchedError, ServiceOutcome,
};
use crate::traffic::{
    sample_multicast, sample_poisson, sample_prediction_error, sample_unicast, ArrivalBatch,
    LookaheadLaw, MulticastSpec, PredictionErrorSpec, Regime, ScalingKind, TrafficError,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error("path {path}: {source}")]
    PathFailed { path: u64, source: SchedError },
    #[error("need at least 2 sample paths, got {0}")]
    TooFewPaths(u64),
    #[error("capacity grid must be strictly ascending")]
    GridNotAscending,
    #[error("need at least 3 curve points for a slope, got {0}")]
    TooFewPoints(usize),
    #[error("outage estimate is 0 at C = {0}: capacity grid too large for the sample size (tail unobservable)")]
    ZeroEstimate(u32),
}

/// One arrival stream and the role it plays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum TrafficSpec {
    Unicast {
        regime: Regime,
        lookahead: LookaheadLaw,
    },
    Primary {
        regime: Regime,
        lookahead: LookaheadLaw,
    },
    /// Secondary requests are always urgent.
    Secondary {
        regime: Regime,
    },
    PredictionError {
        spec: PredictionErrorSpec,
    },
    Multicast {
        spec: MulticastSpec,
        lookahead: u32,
    },
}

/// Service policy for a path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Policy {
    /// Ignore predictions: every request is treated as urgent on arrival.
    Reactive,
    /// Earliest deadline first over everything known.
    Edf,
    /// Predictive primary serving all of its backlog first.
    Selfish,
    /// Predictive primary capped at the dynamic capacity with fraction `f`.
    Dynamic { f: f64 },
    /// Urgent multicast, then unicast, then remaining multicast by EDF.
    Pi2,
}

impl Policy {
    pub fn label(&self) -> String {
        match self {
            Policy::Reactive => "reactive".into(),
            Policy::Edf => "edf".into(),
            Policy::Selfish => "selfish".into(),
            Policy::Dynamic { f } => format!("dynamic:{f}"),
            Policy::Pi2 => "pi2".into(),
        }
    }
}

/// Traffic class an outage flag refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutageClass {
    /// Any class expired a request this slot.
    All,
    Primary,
    Secondary,
    Unicast,
    Multicast,
}

impl OutageClass {
    pub fn as_str(self) -> &'static str {
        match self {
            OutageClass::All => "all",
            OutageClass::Primary => "primary",
            OutageClass::Secondary => "secondary",
            OutageClass::Unicast => "unicast",
            OutageClass::Multicast => "multicast",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub capacity: u32,
    pub traffic: Vec<TrafficSpec>,
    pub policy: Policy,
    /// Total slots per path, warmup included.
    pub slots: u64,
    /// Leading slots excluded from the outage ratio; see [`SimConfig::effective_warmup`].
    #[serde(default)]
    pub warmup: Option<u64>,
    pub seed: u64,
    #[serde(default)]
    pub rounding: FractionRounding,
}

/// Per-slot arrivals for every role, as consumed by the engine.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotArrivals {
    /// Unicast or primary requests by look-ahead.
    pub main: ArrivalBatch,
    pub secondary: u64,
    pub multicast: ArrivalBatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathResult {
    pub outage_slots: BTreeMap<OutageClass, u64>,
    pub total_counted_slots: u64,
    /// Counted slots (0-based, warmup included in the numbering) with an outage of any class.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_slot_trace: Option<Vec<u64>>,
}

impl PathResult {
    pub fn ratio(&self, class: OutageClass) -> f64 {
        if self.total_counted_slots == 0 {
            return 0.0;
        }
        self.outage_slots.get(&class).copied().unwrap_or(0) as f64 / self.total_counted_slots as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutageEstimate {
    pub p_hat: f64,
    /// Sample standard deviation of the per-path ratios over `sqrt(n_paths)`.
    pub stderr: f64,
    pub n_paths: u64,
    pub per_path_values: Vec<f64>,
}

impl OutageEstimate {
    pub fn from_paths(values: Vec<f64>) -> Self {
        let n = values.len() as f64;
        let p_hat = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - p_hat).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            p_hat,
            stderr: (var / n).sqrt(),
            n_paths: values.len() as u64,
            per_path_values: values,
        }
    }
}

/// One estimate per outage class of a configuration.
pub type ClassEstimates = BTreeMap<OutageClass, OutageEstimate>;

/// Arrival process feeding the main (unicast or primary) queue.
#[derive(Debug, Clone)]
pub(crate) enum MainSource {
    Lookahead { regime: Regime, law: LookaheadLaw },
    Errors(PredictionErrorSpec),
}

impl MainSource {
    fn horizon(&self) -> u32 {
        match self {
            MainSource::Lookahead { law, .. } => law.horizon(),
            MainSource::Errors(spec) => spec.t,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Model {
    Single {
        source: Option<MainSource>,
    },
    TwoClass {
        primary: MainSource,
        secondary: Regime,
        mode: PrimaryMode,
    },
    Mixed {
        unicast: Option<MainSource>,
        multicast: MulticastSpec,
        lookahead: u32,
        pi2: bool,
    },
}

const STREAM_MAIN: u64 = 0;
const STREAM_SECONDARY: u64 = 1;
const STREAM_MULTICAST: u64 = 2;
const STREAMS_PER_PATH: u64 = 4;

fn stream_rng(seed: u64, path: u64, role: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path * STREAMS_PER_PATH + role);
    rng
}

fn collapse_to_urgent(batch: ArrivalBatch) -> ArrivalBatch {
    let total = batch.total();
    ArrivalBatch {
        per_lookahead: vec![total],
        ..batch
    }
}

impl SimConfig {
    /// Warmup actually used: the configured value, or `max(100, 10 * (Tmax + 1))`.
    pub fn effective_warmup(&self) -> u64 {
        self.warmup.unwrap_or_else(|| {
            let t_max = self.max_lookahead();
            100u64.max(10 * (u64::from(t_max) + 1))
        })
    }

    /// Largest look-ahead any stream can carry.
    pub fn max_lookahead(&self) -> u32 {
        self.traffic
            .iter()
            .map(|t| match t {
                TrafficSpec::Unicast { lookahead, .. } | TrafficSpec::Primary { lookahead, .. } => {
                    lookahead.t_max()
                }
                TrafficSpec::Secondary { .. } => 0,
                TrafficSpec::PredictionError { spec } => spec.t,
                TrafficSpec::Multicast { lookahead, .. } => *lookahead,
            })
            .max()
            .unwrap_or(0)
    }

    pub(crate) fn model(&self) -> Result<Model, SimError> {
        let mut main = None;
        let mut primary = None;
        let mut secondary = None;
        let mut multicast = None;
        let set_once = |slot: &mut Option<_>, v, what: &str| {
            if slot.is_some() {
                return Err(SimError::InvalidConfig(format!(
                    "more than one {what} stream"
                )));
            }
            *slot = Some(v);
            Ok(())
        };
        for t in &self.traffic {
            match t {
                TrafficSpec::Unicast { regime, lookahead } => {
                    lookahead.validate()?;
                    set_once(
                        &mut main,
                        MainSource::Lookahead {
                            regime: *regime,
                            law: lookahead.clone(),
                        },
                        "unicast",
                    )?
                }
                TrafficSpec::PredictionError { spec } => {
                    spec.validate_at(self.capacity)?;
                    set_once(&mut main, MainSource::Errors(*spec), "unicast")?
                }
                TrafficSpec::Primary { regime, lookahead } => {
                    lookahead.validate()?;
                    set_once(
                        &mut primary,
                        MainSource::Lookahead {
                            regime: *regime,
                            law: lookahead.clone(),
                        },
                        "primary",
                    )?
                }
                TrafficSpec::Secondary { regime } => {
                    if secondary.is_some() {
                        return Err(SimError::InvalidConfig(
                            "more than one secondary stream".into(),
                        ));
                    }
                    secondary = Some(*regime);
                }
                TrafficSpec::Multicast { spec, lookahead } => {
                    spec.validate()?;
                    if *lookahead > MulticastBacklog::MAX_HORIZON {
                        return Err(SimError::InvalidConfig(format!(
                            "multicast look-ahead {lookahead} above {}",
                            MulticastBacklog::MAX_HORIZON
                        )));
                    }
                    if multicast.is_some() {
                        return Err(SimError::InvalidConfig(
                            "more than one multicast stream".into(),
                        ));
                    }
                    multicast = Some((*spec, *lookahead));
                }
            }
        }
        let policy = self.policy;
        let bad_policy = |model: &str| {
            SimError::InvalidConfig(format!(
                "policy {} does not apply to {model} traffic",
                policy.label()
            ))
        };
        match (main, primary, secondary, multicast) {
            (main, None, None, None) => match policy {
                Policy::Reactive | Policy::Edf => Ok(Model::Single { source: main }),
                _ => Err(bad_policy("single-class")),
            },
            (None, Some(primary), Some(secondary), None) => {
                let mode = match policy {
                    Policy::Reactive | Policy::Selfish => PrimaryMode::SelfishPrimary,
                    Policy::Dynamic { f } => {
                        if !(0.0..=1.0).contains(&f) {
                            return Err(SimError::InvalidConfig(format!(
                                "dynamic fraction f = {f} outside [0, 1]"
                            )));
                        }
                        PrimaryMode::DynamicPrimary {
                            f,
                            rounding: self.rounding,
                        }
                    }
                    _ => return Err(bad_policy("primary/secondary")),
                };
                Ok(Model::TwoClass {
                    primary,
                    secondary,
                    mode,
                })
            }
            (unicast, None, None, Some((multicast, lookahead))) => {
                let pi2 = match policy {
                    Policy::Pi2 => {
                        if unicast.as_ref().is_some_and(|u| u.horizon() > 0) {
                            return Err(SimError::InvalidConfig(
                                "the urgent-first policy needs urgent (look-ahead 0) unicast traffic".into(),
                            ));
                        }
                        true
                    }
                    Policy::Reactive | Policy::Edf => false,
                    _ => return Err(bad_policy("multicast")),
                };
                Ok(Model::Mixed {
                    unicast,
                    multicast,
                    lookahead,
                    pi2,
                })
            }
            (_, Some(_), None, _) => Err(SimError::InvalidConfig(
                "primary stream without a secondary stream".into(),
            )),
            (_, None, Some(_), _) => Err(SimError::InvalidConfig(
                "secondary stream without a primary stream".into(),
            )),
            _ => Err(SimError::InvalidConfig(
                "unsupported traffic mix: use unicast, primary+secondary, or multicast(+unicast)"
                    .into(),
            )),
        }
    }

    /// Structural checks; errors make the configuration unusable.
    pub fn validate(&self) -> Result<(), SimError> {
        if self.slots <= self.effective_warmup() {
            return Err(SimError::InvalidConfig(format!(
                "slots ({}) must exceed warmup ({})",
                self.slots,
                self.effective_warmup()
            )));
        }
        self.model().map(|_| ())
    }

    /// Load conditions that make the run unstable but still well defined.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let regime_of = |t: &TrafficSpec| match t {
            TrafficSpec::Unicast { regime, .. }
            | TrafficSpec::Primary { regime, .. }
            | TrafficSpec::Secondary { regime } => Some(*regime),
            TrafficSpec::PredictionError { spec } => Some(spec.regime),
            TrafficSpec::Multicast { .. } => None,
        };
        let primary = self
            .traffic
            .iter()
            .find(|t| matches!(t, TrafficSpec::Primary { .. }))
            .and_then(regime_of);
        let secondary = self
            .traffic
            .iter()
            .find(|t| matches!(t, TrafficSpec::Secondary { .. }))
            .and_then(regime_of);
        if let (Some(p), Some(s)) = (primary, secondary) {
            if s.gamma() >= p.gamma() {
                out.push(format!(
                    "secondary gamma {} is not below primary gamma {}: primary traffic no longer dominates",
                    s.gamma(),
                    p.gamma()
                ));
            }
            let c = self.capacity;
            if p.mean_rate(c) + s.mean_rate(c) >= f64::from(c) {
                out.push(format!(
                    "combined primary and secondary load {:.4} reaches capacity {c}",
                    p.mean_rate(c) + s.mean_rate(c)
                ));
            }
            if p.kind() == ScalingKind::Linear && p.gamma() + s.gamma() >= 1.0 {
                out.push(format!(
                    "primary + secondary gamma {} is not below 1",
                    p.gamma() + s.gamma()
                ));
            }
        }
        if let Some(TrafficSpec::Multicast { spec, .. }) = self
            .traffic
            .iter()
            .find(|t| matches!(t, TrafficSpec::Multicast { .. }))
        {
            let unicast = self
                .traffic
                .iter()
                .find(|t| {
                    matches!(
                        t,
                        TrafficSpec::Unicast { .. } | TrafficSpec::PredictionError { .. }
                    )
                })
                .and_then(regime_of)
                .map(|r| r.mean_rate(self.capacity) / f64::from(self.capacity.max(1)))
                .unwrap_or(0.0);
            let load = multicast_stability_load(unicast, spec.gamma_m, spec.theta);
            if load >= 1.0 {
                out.push(format!(
                    "reactive mixed load A*theta + unicast = {load:.4} is not below 1 (multicast stability condition)"
                ));
            }
        }
        out
    }

    pub(crate) fn classes(model: &Model) -> &'static [OutageClass] {
        match model {
            Model::Single { .. } => &[OutageClass::All],
            Model::TwoClass { .. } => &[
                OutageClass::All,
                OutageClass::Primary,
                OutageClass::Secondary,
            ],
            Model::Mixed { .. } => &[
                OutageClass::All,
                OutageClass::Unicast,
                OutageClass::Multicast,
            ],
        }
    }
}

/// Mutable per-path state.
pub(crate) struct Engine {
    capacity: u64,
    pub(crate) model: Model,
    reactive: bool,
    backlog: Backlog,
    multicast: MulticastBacklog,
}

/// Outage flags for one slot.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct SlotFlags {
    pub(crate) main: bool,
    pub(crate) secondary: bool,
    pub(crate) multicast: bool,
    /// Capacity the primary left unused (two-class model only).
    pub(crate) primary_leftover: u64,
}

impl Engine {
    pub(crate) fn new(cfg: &SimConfig) -> Result<Self, SimError> {
        let model = cfg.model()?;
        let reactive = cfg.policy == Policy::Reactive;
        let main_horizon = match &model {
            Model::Single { source } => source.as_ref().map_or(0, MainSource::horizon),
            Model::TwoClass { primary, .. } => primary.horizon(),
            Model::Mixed { unicast, .. } => unicast.as_ref().map_or(0, MainSource::horizon),
        };
        let (sources, mc_horizon) = match &model {
            Model::Mixed {
                multicast,
                lookahead,
                ..
            } => (multicast.sources(cfg.capacity), *lookahead),
            _ => (0, 0),
        };
        let (main_horizon, mc_horizon) = if reactive {
            (0, 0)
        } else {
            (main_horizon, mc_horizon)
        };
        Ok(Self {
            capacity: u64::from(cfg.capacity),
            model,
            reactive,
            backlog: Backlog::new(main_horizon),
            multicast: MulticastBacklog::new(sources, mc_horizon),
        })
    }

    /// Post-service state as a flat key: pending counts at residual deadlines
    /// `1..=H`, then one pending-deadline mask per multicast source.
    pub(crate) fn key(&self) -> Vec<u64> {
        let mut key = self.backlog.counts()[1..].to_vec();
        key.extend_from_slice(self.multicast.masks());
        key
    }

    pub(crate) fn set_key(&mut self, key: &[u64]) {
        let h = self.backlog.counts().len() - 1;
        let mut counts = Vec::with_capacity(h + 1);
        counts.push(0);
        counts.extend_from_slice(&key[..h]);
        self.backlog = Backlog::from_counts(counts);
        self.multicast = MulticastBacklog::from_masks(self.multicast.horizon(), key[h..].to_vec());
    }

    pub(crate) fn main_horizon(&self) -> usize {
        self.backlog.counts().len() - 1
    }

    fn draw(&self, cfg: &SimConfig, rngs: &mut [ChaCha8Rng; 3]) -> Result<SlotArrivals, SimError> {
        let c = cfg.capacity;
        let draw_main =
            |src: &MainSource, rng: &mut ChaCha8Rng| -> Result<ArrivalBatch, SimError> {
                Ok(match src {
                    MainSource::Lookahead { regime, law } => sample_unicast(regime, law, c, rng),
                    MainSource::Errors(spec) => sample_prediction_error(spec, c, rng)?,
                })
            };
        let [main_rng, sec_rng, mc_rng] = rngs;
        let mut out = SlotArrivals::default();
        match &self.model {
            Model::Single { source } => {
                if let Some(src) = source {
                    out.main = draw_main(src, main_rng)?;
                }
            }
            Model::TwoClass {
                primary, secondary, ..
            } => {
                out.main = draw_main(primary, main_rng)?;
                out.secondary = sample_poisson(secondary.mean_rate(c), sec_rng);
            }
            Model::Mixed {
                unicast, multicast, ..
            } => {
                if let Some(src) = unicast {
                    out.main = draw_main(src, main_rng)?;
                }
                out.multicast = sample_multicast(multicast, c, mc_rng);
            }
        }
        Ok(out)
    }

    pub(crate) fn step(&mut self, arrivals: SlotArrivals) -> Result<SlotFlags, SchedError> {
        let main = if self.reactive {
            collapse_to_urgent(arrivals.main)
        } else {
            arrivals.main
        };
        let backlog = advance_slot(&self.backlog, &main)?;
        let mut flags = SlotFlags::default();
        match &self.model {
            Model::Single { .. } => {
                let out = edf_serve(&backlog, self.capacity);
                flags.main = out.is_outage();
                self.backlog = backlog.after_service(&out);
            }
            Model::TwoClass { mode, .. } => {
                let (p, s) = serve_two_class(&backlog, arrivals.secondary, self.capacity, *mode);
                flags.main = p.is_outage();
                flags.secondary = s.is_outage();
                flags.primary_leftover = p.leftover_capacity;
                self.backlog = backlog.after_service(&p);
            }
            Model::Mixed { lookahead, pi2, .. } => {
                let mc_lookahead = if self.reactive { 0 } else { *lookahead };
                let mb = self.multicast.advance(&arrivals.multicast, mc_lookahead)?;
                let out = if *pi2 {
                    pi2_serve(&mb, backlog.urgent(), self.capacity)
                } else {
                    mixed_edf_serve(&mb, &backlog, self.capacity)
                };
                flags.main = out.unicast.is_outage();
                flags.multicast = out.multicast.outcome.is_outage();
                self.multicast = mb.after_service(&out.multicast.served_sources);
                let mut served = out.unicast.served_per_deadline.clone();
                served.resize(backlog.counts().len(), 0);
                self.backlog = backlog.after_service(&ServiceOutcome {
                    served_per_deadline: served,
                    ..out.unicast
                });
            }
        }
        Ok(flags)
    }
}

fn tally(model: &Model, flags: SlotFlags, counts: &mut BTreeMap<OutageClass, u64>) -> bool {
    let mut bump = |c: OutageClass, hit: bool| {
        if hit {
            *counts.entry(c).or_default() += 1;
        }
    };
    let any = flags.main || flags.secondary || flags.multicast;
    bump(OutageClass::All, any);
    match model {
        Model::Single { .. } => {}
        Model::TwoClass { .. } => {
            bump(OutageClass::Primary, flags.main);
            bump(OutageClass::Secondary, flags.secondary);
        }
        Model::Mixed { .. } => {
            bump(OutageClass::Unicast, flags.main);
            bump(OutageClass::Multicast, flags.multicast);
        }
    }
    any
}

fn empty_counts(model: &Model) -> BTreeMap<OutageClass, u64> {
    SimConfig::classes(model).iter().map(|&c| (c, 0)).collect()
}

fn run(
    cfg: &SimConfig,
    path: u64,
    scripted: Option<&[SlotArrivals]>,
    trace: bool,
) -> Result<PathResult, SimError> {
    let mut engine = Engine::new(cfg)?;
    let warmup = cfg.effective_warmup();
    let mut rngs = [
        stream_rng(cfg.seed, path, STREAM_MAIN),
        stream_rng(cfg.seed, path, STREAM_SECONDARY),
        stream_rng(cfg.seed, path, STREAM_MULTICAST),
    ];
    let mut counts = empty_counts(&engine.model);
    let mut outage_trace = trace.then(Vec::new);
    let slots = scripted.map_or(cfg.slots, |s| s.len() as u64);
    for n in 0..slots {
        let arrivals = match scripted {
            Some(s) => s[n as usize].clone(),
            None => engine.draw(cfg, &mut rngs)?,
        };
        let flags = engine
            .step(arrivals)
            .map_err(|source| SimError::PathFailed { path, source })?;
        if n >= warmup {
            let hit = tally(&engine.model, flags, &mut counts);
            if hit {
                if let Some(t) = outage_trace.as_mut() {
                    t.push(n);
                }
            }
        }
    }
    Ok(PathResult {
        outage_slots: counts,
        total_counted_slots: slots.saturating_sub(warmup),
        per_slot_trace: outage_trace,
    })
}

/// One sample path; `path_index` selects the independent sub-stream.
pub fn run_path(cfg: &SimConfig, path_index: u64) -> Result<PathResult, SimError> {
    cfg.validate()?;
    run(cfg, path_index, None, false)
}

/// Like [`run_path`], also recording which slots had an outage.
pub fn run_path_traced(cfg: &SimConfig, path_index: u64) -> Result<PathResult, SimError> {
    cfg.validate()?;
    run(cfg, path_index, None, true)
}

/// Drive the policy with given arrivals instead of sampled ones. The path has
/// `arrivals.len()` slots; `cfg.slots` is ignored and `cfg.warmup` defaults to 0.
pub fn run_scripted(cfg: &SimConfig, arrivals: &[SlotArrivals]) -> Result<PathResult, SimError> {
    let cfg = SimConfig {
        warmup: Some(cfg.warmup.unwrap_or(0)),
        ..cfg.clone()
    };
    cfg.model()?;
    run(&cfg, 0, Some(arrivals), true)
}

/// Monte Carlo estimate per outage class over `n_paths` independent paths.
///
/// Paths run in parallel; the result is identical to a sequential run.
pub fn estimate_outage(cfg: &SimConfig, n_paths: u64) -> Result<ClassEstimates, SimError> {
    if n_paths < 2 {
        return Err(SimError::TooFewPaths(n_paths));
    }
    cfg.validate()?;
    let results: Vec<PathResult> = (0..n_paths)
        .into_par_iter()
        .map(|p| run(cfg, p, None, false))
        .collect::<Result<_, _>>()?;
    let classes: Vec<OutageClass> = results[0].outage_slots.keys().copied().collect();
    Ok(classes
        .into_iter()
        .map(|c| {
            (
                c,
                OutageEstimate::from_paths(results.iter().map(|r| r.ratio(c)).collect()),
            )
        })
        .collect())
}

/// Estimates at each capacity of an ascending grid, all from the same master seed.
pub fn sweep_capacity(
    cfg: &SimConfig,
    grid: &[u32],
    n_paths: u64,
) -> Result<Vec<(u32, ClassEstimates)>, SimError> {
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SimError::GridNotAscending);
    }
    grid.iter()
        .map(|&c| {
            let point = SimConfig {
                capacity: c,
                ..cfg.clone()
            };
            estimate_outage(&point, n_paths).map(|e| (c, e))
        })
        .collect()
}

/// Least-squares slope of `-ln p` against `C` (linear) or `C ln C` (polynomial).
pub fn estimate_diversity(curve: &[(u32, f64)], kind: ScalingKind) -> Result<f64, SimError> {
    if curve.len() < 3 {
        return Err(SimError::TooFewPoints(curve.len()));
    }
    if let Some(&(c, _)) = curve.iter().find(|(_, p)| *p <= 0.0) {
        return Err(SimError::ZeroEstimate(c));
    }
    let pts: Vec<(f64, f64)> = curve
        .iter()
        .map(|&(c, p)| {
            let c = f64::from(c);
            let x = match kind {
                ScalingKind::Linear => c,
                ScalingKind::Polynomial => c * c.ln(),
            };
            (x, -p.ln())
        })
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

//! Exact reference values for small instances.
//!
//! [`exact_outage_stationary`] enumerates the post-service backlog chain of a
//! configuration, with arrival counts capped per stream (excess mass lumped
//! at the cap and reported), and returns stationary outage probabilities.
//! Slot transitions come from the same engine the simulator runs, so the
//! chain and the Monte Carlo paths share one definition of the policy.
//!
//! [`exact_event_bounds`] evaluates the necessary and sufficient arrival
//! events that sandwich the EDF outage probability, and [`verify_root`]
//! re-checks analytic roots against their defining equations.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::{poisson_pmf, poisson_tail, RootConstant, RootDefinition};
use crate::sim::{Engine, MainSource, Model, OutageClass, SimConfig, SimError, SlotArrivals};
use crate::traffic::{ArrivalBatch, LookaheadLaw};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("state space exceeds {limit} states; reduce C, T or the arrival rate")]
    StateSpaceTooLarge { limit: usize },
    #[error("exact multicast analysis supports at most {max} sources, config has {sources}")]
    TooManySources { sources: u32, max: u32 },
    #[error("power iteration did not converge after {iterations} steps (last change {change:e})")]
    NotConverged { iterations: usize, change: f64 },
    #[error("policy step failed: {0}")]
    Step(String),
}

pub const MAX_STATES: usize = 1_000_000;
pub const MAX_MULTICAST_SOURCES: u32 = 12;
const CONVERGENCE: f64 = 1e-12;
const MAX_ITERATIONS: usize = 200_000;

/// One Poisson arrival stream with its capped distribution.
#[derive(Debug, Clone)]
struct CappedStream {
    lookahead: usize,
    /// `probs[j]` for `j < cap`, then all mass at or above `cap` in the last entry.
    probs: Vec<f64>,
    /// Mass of values strictly above the cap, moved onto it.
    excess: f64,
}

impl CappedStream {
    fn new(lookahead: usize, mean: f64, cap: u64) -> Self {
        let mut probs: Vec<f64> = (0..cap).map(|j| poisson_pmf(mean, j)).collect();
        let at_or_above = if cap == 0 {
            1.0
        } else {
            poisson_tail(mean, cap - 1)
        };
        probs.push(at_or_above);
        Self {
            lookahead,
            probs,
            excess: poisson_tail(mean, cap),
        }
    }
}

/// Default per-stream cap: `ceil(mean + 12 sqrt(mean)) + C (H + 1)`.
pub fn default_cap(mean: f64, capacity: u32, horizon: u32) -> u64 {
    (mean + 12.0 * mean.sqrt()).ceil() as u64 + u64::from(capacity) * (u64::from(horizon) + 1)
}

/// Finite Markov chain over post-service states.
#[derive(Debug, Clone)]
pub struct TruncatedChain {
    pub states: Vec<Vec<u64>>,
    /// Sparse rows `(next state, probability)`.
    pub rows: Vec<Vec<(usize, f64)>>,
    pub classes: Vec<OutageClass>,
    /// `outage[s][i]`: probability that the slot leaving state `s` has an outage of `classes[i]`.
    pub outage: Vec<Vec<f64>>,
    /// Arrival mass per slot moved onto the caps.
    pub truncation_mass: f64,
}

/// Stationary outage probabilities of a configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryOutage {
    pub per_class: BTreeMap<OutageClass, f64>,
    pub truncation_mass: f64,
    pub states: usize,
}

impl StationaryOutage {
    pub fn get(&self, class: OutageClass) -> f64 {
        self.per_class[&class]
    }
}

fn main_streams(
    source: &MainSource,
    capacity: u32,
    cap: Option<u64>,
    horizon: u32,
) -> Vec<CappedStream> {
    let means: Vec<(usize, f64)> = match source {
        MainSource::Lookahead { regime, law } => {
            let lambda = regime.mean_rate(capacity);
            law.pmf()
                .iter()
                .enumerate()
                .filter(|(_, p)| **p > 0.0)
                .map(|(k, p)| (k, p * lambda))
                .collect()
        }
        MainSource::Errors(spec) => {
            let (pred, miss) = spec.rates(capacity);
            vec![(0, miss), (spec.t as usize, pred)]
        }
    };
    means
        .into_iter()
        .filter(|(_, m)| *m > 0.0)
        .map(|(k, m)| {
            CappedStream::new(
                k,
                m,
                cap.unwrap_or_else(|| default_cap(m, capacity, horizon)),
            )
        })
        .collect()
}

/// Every joint arrival outcome of one slot with its probability.
fn arrival_outcomes(
    streams: &[CappedStream],
    multicast: Option<(u32, f64)>,
) -> Vec<(SlotArrivals, f64)> {
    let mut outcomes = vec![(SlotArrivals::default(), 1.0)];
    for s in streams {
        let mut next = Vec::with_capacity(outcomes.len() * s.probs.len());
        for (arr, p) in &outcomes {
            for (j, q) in s.probs.iter().enumerate() {
                if *q == 0.0 {
                    continue;
                }
                let mut a = arr.clone();
                a.main.add(s.lookahead, j as u64);
                next.push((a, p * q));
            }
        }
        outcomes = next;
    }
    if let Some((sources, prob)) = multicast {
        let mut next = Vec::with_capacity(outcomes.len() << sources);
        for (arr, p) in &outcomes {
            for mask in 0u32..(1 << sources) {
                let k = mask.count_ones() as i32;
                let q = prob.powi(k) * (1.0 - prob).powi(sources as i32 - k);
                let mut a = arr.clone();
                a.multicast = ArrivalBatch {
                    multicast_sources: (0..sources).filter(|i| mask >> i & 1 == 1).collect(),
                    ..Default::default()
                };
                next.push((a, p * q));
            }
        }
        outcomes = next;
    }
    outcomes
}

impl TruncatedChain {
    /// Enumerate the chain reachable from the empty system.
    pub fn build(cfg: &SimConfig, cap: Option<u64>) -> Result<Self, OracleError> {
        Self::build_limited(cfg, cap, MAX_STATES)
    }

    pub fn build_limited(
        cfg: &SimConfig,
        cap: Option<u64>,
        limit: usize,
    ) -> Result<Self, OracleError> {
        let mut engine = Engine::new(cfg)?;
        let capacity = cfg.capacity;
        let horizon = engine.main_horizon() as u32;
        let (streams, multicast, secondary) = match &engine.model {
            Model::Single { source } => (
                source
                    .as_ref()
                    .map(|s| main_streams(s, capacity, cap, horizon))
                    .unwrap_or_default(),
                None,
                None,
            ),
            Model::TwoClass {
                primary, secondary, ..
            } => (
                main_streams(primary, capacity, cap, horizon),
                None,
                Some(secondary.mean_rate(capacity)),
            ),
            Model::Mixed {
                unicast, multicast, ..
            } => {
                let sources = multicast.sources(capacity);
                if sources > MAX_MULTICAST_SOURCES {
                    return Err(OracleError::TooManySources {
                        sources,
                        max: MAX_MULTICAST_SOURCES,
                    });
                }
                (
                    unicast
                        .as_ref()
                        .map(|s| main_streams(s, capacity, cap, horizon))
                        .unwrap_or_default(),
                    Some((sources, multicast.per_slot_prob())),
                    None,
                )
            }
        };
        let classes = SimConfig::classes(&engine.model).to_vec();
        let truncation_mass = streams.iter().map(|s| s.excess).sum();
        let outcomes = arrival_outcomes(&streams, multicast);

        let start = engine.key();
        let mut index: HashMap<Vec<u64>, usize> = HashMap::from([(start.clone(), 0)]);
        let mut states = vec![start];
        let mut rows = Vec::new();
        let mut outage = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        while let Some(s) = queue.pop_front() {
            let key = states[s].clone();
            let mut row: HashMap<usize, f64> = HashMap::new();
            let mut out = vec![0.0; classes.len()];
            for (arr, p) in &outcomes {
                engine.set_key(&key);
                let flags = engine
                    .step(arr.clone())
                    .map_err(|e| OracleError::Step(e.to_string()))?;
                let next = engine.key();
                let id = match index.get(&next) {
                    Some(&id) => id,
                    None => {
                        if states.len() >= limit {
                            return Err(OracleError::StateSpaceTooLarge { limit });
                        }
                        let id = states.len();
                        index.insert(next.clone(), id);
                        states.push(next);
                        queue.push_back(id);
                        id
                    }
                };
                *row.entry(id).or_default() += p;
                // secondary arrivals are urgent and independent: integrate them exactly
                let sec = secondary.map_or(0.0, |m| poisson_tail(m, flags.primary_leftover));
                for (c, slot) in classes.iter().zip(out.iter_mut()) {
                    let prob = match c {
                        OutageClass::All => {
                            if flags.main || flags.multicast {
                                1.0
                            } else {
                                sec
                            }
                        }
                        OutageClass::Primary | OutageClass::Unicast => {
                            f64::from(u8::from(flags.main))
                        }
                        OutageClass::Secondary => sec,
                        OutageClass::Multicast => f64::from(u8::from(flags.multicast)),
                    };
                    *slot += p * prob;
                }
            }
            let mut row: Vec<(usize, f64)> = row.into_iter().collect();
            row.sort_unstable_by_key(|e| e.0);
            debug_assert_eq!(rows.len(), s);
            rows.push(row);
            outage.push(out);
        }
        Ok(Self {
            states,
            rows,
            classes,
            outage,
            truncation_mass,
        })
    }

    /// Largest deviation of a row sum from 1.
    pub fn max_row_defect(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.iter().map(|e| e.1).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Stationary distribution by power iteration from the empty state.
    pub fn stationary(&self) -> Result<Vec<f64>, OracleError> {
        let n = self.states.len();
        let mut pi = vec![0.0; n];
        pi[0] = 1.0;
        let mut next = vec![0.0; n];
        for it in 0..MAX_ITERATIONS {
            next.iter_mut().for_each(|x| *x = 0.0);
            for (s, row) in self.rows.iter().enumerate() {
                let mass = pi[s];
                if mass == 0.0 {
                    continue;
                }
                for &(t, p) in row {
                    next[t] += mass * p;
                }
            }
            let total: f64 = next.iter().sum();
            next.iter_mut().for_each(|x| *x /= total);
            let change: f64 = pi.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
            std::mem::swap(&mut pi, &mut next);
            if change < CONVERGENCE {
                return Ok(pi);
            }
            if it + 1 == MAX_ITERATIONS {
                return Err(OracleError::NotConverged {
                    iterations: MAX_ITERATIONS,
                    change,
                });
            }
        }
        unreachable!()
    }

    /// Expected one-step change of `f` from every state.
    pub fn drift_of(&self, f: impl Fn(&[u64]) -> f64) -> Vec<f64> {
        self.rows
            .iter()
            .enumerate()
            .map(|(s, row)| {
                let here = f(&self.states[s]);
                row.iter()
                    .map(|&(t, p)| p * (f(&self.states[t]) - here))
                    .sum()
            })
            .collect()
    }
}

/// Stationary probability of an outage slot, per class.
pub fn exact_outage_stationary(
    cfg: &SimConfig,
    cap: Option<u64>,
) -> Result<StationaryOutage, OracleError> {
    let chain = TruncatedChain::build(cfg, cap)?;
    let pi = chain.stationary()?;
    let per_class = chain
        .classes
        .iter()
        .enumerate()
        .map(|(i, &c)| (c, pi.iter().zip(&chain.outage).map(|(w, o)| w * o[i]).sum()))
        .collect();
    Ok(StationaryOutage {
        per_class,
        truncation_mass: chain.truncation_mass,
        states: chain.states.len(),
    })
}

/// Exact probabilities of the necessary (`lower`) and sufficient (`upper`)
/// arrival events for an EDF outage, with cruder brackets alongside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventBounds {
    pub lower: f64,
    pub upper: f64,
    /// Largest single term of the necessary event's union (`<= lower`).
    pub lower_max_term: f64,
    /// Sum of the sufficient event's terms (`>= upper`).
    pub upper_union_bound: f64,
}

/// `P(S_i > c_i for some i)` for partial sums `S_i` of independent Poisson
/// increments with means `means[i]` and nondecreasing thresholds.
fn first_passage(means: &[f64], thresholds: &[u64]) -> f64 {
    debug_assert!(thresholds.windows(2).all(|w| w[0] <= w[1]));
    let mut alive = vec![1.0];
    let mut crossed = 0.0;
    for (&m, &c) in means.iter().zip(thresholds) {
        crossed += alive
            .iter()
            .enumerate()
            .map(|(s, w)| {
                if s as u64 > c {
                    *w
                } else {
                    w * poisson_tail(m, c - s as u64)
                }
            })
            .sum::<f64>();
        let pmf: Vec<f64> = (0..=c).map(|j| poisson_pmf(m, j)).collect();
        let mut next = vec![0.0; c as usize + 1];
        for (s, w) in alive.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            for (t, slot) in next.iter_mut().enumerate().skip(s) {
                *slot += w * pmf[t - s];
            }
        }
        alive = next;
    }
    crossed
}

/// Event bounds for arrival mean `lambda` per slot at capacity `capacity`.
///
/// The necessary event: for some `k`, requests due in the current slot that
/// arrived with look-ahead at most `k` exceed `C (k + 1)`. The sufficient event:
/// the requests whose deadlines fall in a window exceed the window's capacity.
pub fn exact_event_bounds(lambda: f64, capacity: u32, law: &LookaheadLaw) -> EventBounds {
    let c = u64::from(capacity);
    let (t_min, t_max) = (law.t_min(), law.t_max());
    let pmf = law.pmf();

    // necessary: increments Q_k(n-k), k = t_min..=t_max, thresholds C(k+1)
    let ks: Vec<u32> = (t_min..=t_max).collect();
    let l_means: Vec<f64> = ks.iter().map(|&k| pmf[k as usize] * lambda).collect();
    let l_thresh: Vec<u64> = ks.iter().map(|&k| c * (u64::from(k) + 1)).collect();
    let lower = first_passage(&l_means, &l_thresh);
    let mut running = 0.0;
    let lower_max_term = l_means
        .iter()
        .zip(&l_thresh)
        .map(|(m, &t)| {
            running += m;
            poisson_tail(running, t)
        })
        .fold(0.0, f64::max);

    // sufficient: windows ending at k = t_min..t_max-1 add arrivals with mean
    // lambda F_k; the full window of t_max+1 slots adds the rest
    let mut u_means: Vec<f64> = (t_min..t_max).map(|k| lambda * law.cdf(k)).collect();
    let mut u_thresh: Vec<u64> = (t_min..t_max).map(|k| c * (u64::from(k) + 1)).collect();
    let partial: f64 = u_means.iter().sum();
    u_means.push((lambda * (f64::from(t_max) + 1.0) - partial).max(0.0));
    u_thresh.push(c * (u64::from(t_max) + 1));
    let upper = first_passage(&u_means, &u_thresh);
    let mut running = 0.0;
    let upper_union_bound = u_means
        .iter()
        .zip(&u_thresh)
        .map(|(m, &t)| {
            running += m;
            poisson_tail(running, t)
        })
        .sum::<f64>()
        .min(1.0);

    EventBounds {
        lower,
        upper,
        lower_max_term,
        upper_union_bound,
    }
}

/// `|residual|` of a stored root in its defining equation.
///
/// Tilt roots are checked through the stationarity condition of their
/// exponent: at `r* = ln y` the tilted mean equals the threshold.
pub fn verify_root(root: &RootConstant) -> f64 {
    let y = root.value;
    let source_prob = |m: f64, theta: f64, w: f64| 1.0 - (-w * m / theta).exp();
    let tilted = |q: f64| q * y / (1.0 - q + q * y);
    let r = match root.definition {
        RootDefinition::Quadratic { a, b, c } => a * y * y + b * y + c,
        RootDefinition::DynamicSecondary { primary, secondary } => {
            1.0 - secondary * y * y - primary * y
        }
        RootDefinition::MixedSingleSlot {
            unicast,
            multicast,
            theta,
        } => 1.0 - unicast * y - theta * tilted(source_prob(multicast, theta, 1.0)),
        RootDefinition::MixedWindow {
            unicast,
            multicast,
            theta,
            lookahead,
        } => {
            let w = f64::from(lookahead) + 1.0;
            w - w * unicast * y - theta * tilted(source_prob(multicast, theta, w))
        }
        RootDefinition::MixedTwoSlot {
            unicast,
            multicast,
            theta,
        } => 2.0 - unicast * y - 2.0 * theta * tilted(source_prob(multicast, theta, 1.0)),
    };
    r.abs()
}

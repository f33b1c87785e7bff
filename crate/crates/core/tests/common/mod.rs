//! Config builders shared by the integration targets.
#![allow(dead_code)]

use proactive::sched::FractionRounding;
use proactive::sim::{OutageClass, Policy, SimConfig, TrafficSpec};
use proactive::traffic::{LookaheadLaw, Regime};

pub fn unicast(gamma: f64, law: LookaheadLaw, capacity: u32, policy: Policy) -> SimConfig {
    SimConfig {
        capacity,
        traffic: vec![TrafficSpec::Unicast {
            regime: Regime::linear(gamma).unwrap(),
            lookahead: law,
        }],
        policy,
        slots: 10_000,
        warmup: None,
        seed: 1,
        rounding: FractionRounding::Ceil,
    }
}

pub fn two_class(primary: f64, secondary: f64, t: u32, capacity: u32, policy: Policy) -> SimConfig {
    SimConfig {
        capacity,
        traffic: vec![
            TrafficSpec::Primary {
                regime: Regime::linear(primary).unwrap(),
                lookahead: LookaheadLaw::deterministic(t),
            },
            TrafficSpec::Secondary {
                regime: Regime::linear(secondary).unwrap(),
            },
        ],
        policy,
        slots: 10_000,
        warmup: None,
        seed: 1,
        rounding: FractionRounding::Ceil,
    }
}

pub fn with_run(cfg: SimConfig, slots: u64, seed: u64) -> SimConfig {
    SimConfig { slots, seed, ..cfg }
}

/// `(p_hat, stderr)` for one class.
pub fn outage(cfg: &SimConfig, paths: u64, class: OutageClass) -> (f64, f64) {
    let est = proactive::sim::estimate_outage(cfg, paths).unwrap();
    let e = &est[&class];
    (e.p_hat, e.stderr)
}

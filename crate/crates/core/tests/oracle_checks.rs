mod common;

use proactive::oracle::{exact_outage_stationary, TruncatedChain};
use proactive::sched::FractionRounding;
use proactive::sim::{estimate_outage, Policy, SimConfig, TrafficSpec};
use proactive::traffic::{LookaheadLaw, MulticastSpec, PredictionErrorSpec, Regime};

use common::{two_class, unicast, with_run};

fn agrees(cfg: &SimConfig, paths: u64) {
    let exact = exact_outage_stationary(cfg, None).unwrap();
    assert!(
        exact.truncation_mass < 1e-6,
        "truncation {}",
        exact.truncation_mass
    );
    let mc = estimate_outage(cfg, paths).unwrap();
    for (class, p) in &exact.per_class {
        let e = &mc[class];
        assert!(
            (e.p_hat - p).abs() <= 3.0 * e.stderr,
            "{class:?}: exact {p} vs {} +- {}",
            e.p_hat,
            e.stderr
        );
    }
}

#[test]
fn reactive_single_class() {
    agrees(
        &with_run(
            unicast(0.5, LookaheadLaw::deterministic(0), 4, Policy::Reactive),
            4_100,
            31,
        ),
        50,
    );
}

#[test]
fn random_lookahead_edf() {
    let law = LookaheadLaw::binomial(2, 0.5).unwrap();
    agrees(&with_run(unicast(0.6, law, 2, Policy::Edf), 10_100, 32), 50);
}

#[test]
fn dynamic_two_class() {
    agrees(
        &with_run(
            two_class(0.5, 0.1, 1, 3, Policy::Dynamic { f: 0.5 }),
            10_100,
            33,
        ),
        50,
    );
}

#[test]
fn selfish_two_class() {
    agrees(
        &with_run(two_class(0.5, 0.1, 1, 3, Policy::Selfish), 10_100, 34),
        50,
    );
}

#[test]
fn prediction_errors() {
    let cfg = SimConfig {
        capacity: 3,
        traffic: vec![TrafficSpec::PredictionError {
            spec: PredictionErrorSpec {
                alpha_pred: 0.8,
                alpha_miss: 0.2,
                t: 1,
                regime: Regime::linear(0.5).unwrap(),
            },
        }],
        policy: Policy::Edf,
        slots: 10_100,
        warmup: None,
        seed: 35,
        rounding: FractionRounding::Ceil,
    };
    agrees(&cfg, 50);
}

#[test]
fn multicast_edf() {
    let cfg = SimConfig {
        capacity: 2,
        traffic: vec![TrafficSpec::Multicast {
            spec: MulticastSpec::new(0.9, 3.0).unwrap(),
            lookahead: 1,
        }],
        policy: Policy::Edf,
        slots: 10_100,
        warmup: None,
        seed: 36,
        rounding: FractionRounding::Ceil,
    };
    agrees(&cfg, 50);
}

#[test]
fn dynamic_chain_drift_signs() {
    let (gamma, capacity) = (0.6, 10u32);
    let cfg = two_class(gamma, 0.02, 1, capacity, Policy::Dynamic { f: 0.5 });
    let chain = TruncatedChain::build(&cfg, None).unwrap();
    assert!(chain.max_row_defect() < 1e-12);
    // with T = 1 the post-service key is next slot's urgent primary backlog
    let drift = chain.drift_of(|k| k[0] as f64);
    let c = f64::from(capacity);
    for (state, d) in chain.states.iter().zip(&drift) {
        let n0 = state[0] as f64;
        if n0 >= c {
            assert!(*d <= -(1.0 - gamma) * c + 1e-9, "N0={n0}: {d}");
        } else {
            assert!(*d <= gamma * c / 2.0, "N0={n0}: {d}");
        }
    }
}

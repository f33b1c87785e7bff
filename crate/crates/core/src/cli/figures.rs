//! Frozen parameter sets for the reference figures.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::sim::{OutageClass, Policy, TrafficSpec};
use crate::traffic::{LookaheadLaw, Regime, ScalingKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FigureId {
    Fig4a,
    Fig4b,
    Fig5a,
    Fig5b,
    Fig6a,
    Fig6b,
    FigDyn,
    FigMulticast,
}

impl FigureId {
    pub const ALL: [FigureId; 8] = [
        FigureId::Fig4a,
        FigureId::Fig4b,
        FigureId::Fig5a,
        FigureId::Fig5b,
        FigureId::Fig6a,
        FigureId::Fig6b,
        FigureId::FigDyn,
        FigureId::FigMulticast,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig4a => "fig4a",
            FigureId::Fig4b => "fig4b",
            FigureId::Fig5a => "fig5a",
            FigureId::Fig5b => "fig5b",
            FigureId::Fig6a => "fig6a",
            FigureId::Fig6b => "fig6b",
            FigureId::FigDyn => "fig-dyn",
            FigureId::FigMulticast => "fig-multicast",
        }
    }
}

impl FromStr for FigureId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FigureId::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = FigureId::ALL.iter().map(|f| f.name()).collect();
                format!("unknown figure `{s}`; expected one of {}", names.join(", "))
            })
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One simulated curve: an outage estimate per capacity for each listed class.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub traffic: Vec<TrafficSpec>,
    pub policy: Policy,
    pub classes: Vec<OutageClass>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FigureSpec {
    Simulated {
        grid: Vec<u32>,
        curves: Vec<Curve>,
    },
    /// Predictive multicast lower bound against the scaled non-predictive
    /// gain, for look-ahead `0..=max_t`.
    MulticastGain {
        gamma_m: f64,
        theta: f64,
        max_t: u32,
    },
}

fn regime(kind: ScalingKind, gamma: f64) -> Regime {
    Regime::new(kind, gamma).expect("frozen figure gamma is in range")
}

fn unicast_curve(label: &str, r: Regime, law: LookaheadLaw, policy: Policy) -> Curve {
    Curve {
        label: label.into(),
        traffic: vec![TrafficSpec::Unicast {
            regime: r,
            lookahead: law,
        }],
        policy,
        classes: vec![OutageClass::All],
    }
}

fn two_class_curve(
    label: &str,
    primary: Regime,
    secondary: Regime,
    t: u32,
    policy: Policy,
) -> Curve {
    Curve {
        label: label.into(),
        traffic: vec![
            TrafficSpec::Primary {
                regime: primary,
                lookahead: LookaheadLaw::deterministic(t),
            },
            TrafficSpec::Secondary { regime: secondary },
        ],
        policy,
        classes: vec![OutageClass::Primary, OutageClass::Secondary],
    }
}

fn lookahead_figure(r: Regime, grid: Vec<u32>) -> FigureSpec {
    let mut curves = vec![unicast_curve(
        "nonpred",
        r,
        LookaheadLaw::deterministic(0),
        Policy::Reactive,
    )];
    curves.extend((1..=3).map(|t| {
        unicast_curve(
            &format!("T={t}"),
            r,
            LookaheadLaw::deterministic(t),
            Policy::Edf,
        )
    }));
    FigureSpec::Simulated { grid, curves }
}

const BINOMIAL_T_MAX: u32 = 5;
const BINOMIAL_P: [f64; 3] = [0.1, 0.5, 0.9];

fn random_lookahead_figure(r: Regime, grid: Vec<u32>) -> FigureSpec {
    let mut curves = vec![unicast_curve(
        "nonpred",
        r,
        LookaheadLaw::deterministic(0),
        Policy::Reactive,
    )];
    curves.extend(BINOMIAL_P.iter().map(|&p| {
        let law = LookaheadLaw::binomial(BINOMIAL_T_MAX, p).expect("frozen binomial parameter");
        unicast_curve(&format!("binom p={p}"), r, law, Policy::Edf)
    }));
    FigureSpec::Simulated { grid, curves }
}

const TWO_CLASS_T: u32 = 4;
const DYNAMIC_FRACTIONS: [f64; 3] = [0.0, 0.5, 1.0];

fn selfish_figure(primary: Regime, secondary: Regime, grid: Vec<u32>) -> FigureSpec {
    FigureSpec::Simulated {
        grid,
        curves: vec![
            two_class_curve(
                "reactive primary",
                primary,
                secondary,
                TWO_CLASS_T,
                Policy::Reactive,
            ),
            two_class_curve(
                "selfish primary",
                primary,
                secondary,
                TWO_CLASS_T,
                Policy::Selfish,
            ),
        ],
    }
}

fn dynamic_figure() -> FigureSpec {
    let sets = [
        (
            "linear",
            regime(ScalingKind::Linear, 0.6),
            regime(ScalingKind::Linear, 0.1),
        ),
        (
            "polynomial",
            regime(ScalingKind::Polynomial, 0.75),
            regime(ScalingKind::Polynomial, 0.05),
        ),
    ];
    let curves = sets
        .iter()
        .flat_map(|&(name, p, s)| {
            DYNAMIC_FRACTIONS.iter().map(move |&f| {
                two_class_curve(
                    &format!("{name} f={f}"),
                    p,
                    s,
                    TWO_CLASS_T,
                    Policy::Dynamic { f },
                )
            })
        })
        .collect();
    FigureSpec::Simulated {
        grid: (10..=40).step_by(5).collect(),
        curves,
    }
}

/// The frozen parameter set of a figure.
pub fn figure_spec(id: FigureId) -> FigureSpec {
    use ScalingKind::{Linear, Polynomial};
    match id {
        FigureId::Fig4a => lookahead_figure(regime(Linear, 0.8), (10..=60).step_by(5).collect()),
        FigureId::Fig4b => {
            lookahead_figure(regime(Polynomial, 0.8), (10..=100).step_by(10).collect())
        }
        FigureId::Fig5a => {
            random_lookahead_figure(regime(Linear, 0.6), (5..=40).step_by(5).collect())
        }
        FigureId::Fig5b => {
            random_lookahead_figure(regime(Polynomial, 0.9), (10..=100).step_by(10).collect())
        }
        FigureId::Fig6a => selfish_figure(
            regime(Linear, 0.6),
            regime(Linear, 0.1),
            (10..=40).step_by(5).collect(),
        ),
        FigureId::Fig6b => selfish_figure(
            regime(Polynomial, 0.75),
            regime(Polynomial, 0.05),
            (10..=40).step_by(5).collect(),
        ),
        FigureId::FigDyn => dynamic_figure(),
        FigureId::FigMulticast => FigureSpec::MulticastGain {
            gamma_m: 0.9,
            theta: 15.0,
            max_t: 10,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// (figure, scaling, main gamma, secondary gamma, look-ahead laws, policies)
    type Row = (
        FigureId,
        ScalingKind,
        f64,
        Option<f64>,
        Vec<LookaheadLaw>,
        Vec<Policy>,
    );

    fn frozen() -> Vec<Row> {
        use ScalingKind::{Linear, Polynomial};
        let det = LookaheadLaw::deterministic;
        let binom = |p| LookaheadLaw::binomial(5, p).unwrap();
        let lookahead_policies = vec![Policy::Reactive, Policy::Edf, Policy::Edf, Policy::Edf];
        let two = vec![det(4), det(4)];
        vec![
            (
                FigureId::Fig4a,
                Linear,
                0.8,
                None,
                vec![det(0), det(1), det(2), det(3)],
                lookahead_policies.clone(),
            ),
            (
                FigureId::Fig4b,
                Polynomial,
                0.8,
                None,
                vec![det(0), det(1), det(2), det(3)],
                lookahead_policies.clone(),
            ),
            (
                FigureId::Fig5a,
                Linear,
                0.6,
                None,
                vec![det(0), binom(0.1), binom(0.5), binom(0.9)],
                lookahead_policies.clone(),
            ),
            (
                FigureId::Fig5b,
                Polynomial,
                0.9,
                None,
                vec![det(0), binom(0.1), binom(0.5), binom(0.9)],
                lookahead_policies,
            ),
            (
                FigureId::Fig6a,
                Linear,
                0.6,
                Some(0.1),
                two.clone(),
                vec![Policy::Reactive, Policy::Selfish],
            ),
            (
                FigureId::Fig6b,
                Polynomial,
                0.75,
                Some(0.05),
                two,
                vec![Policy::Reactive, Policy::Selfish],
            ),
        ]
    }

    fn curve_params(c: &Curve) -> (ScalingKind, f64, Option<f64>, LookaheadLaw) {
        let mut main = None;
        let mut sec = None;
        for t in &c.traffic {
            match t {
                TrafficSpec::Unicast { regime, lookahead }
                | TrafficSpec::Primary { regime, lookahead } => {
                    main = Some((*regime, lookahead.clone()))
                }
                TrafficSpec::Secondary { regime } => sec = Some(regime.gamma()),
                _ => panic!("unexpected stream"),
            }
        }
        let (r, law) = main.unwrap();
        (r.kind(), r.gamma(), sec, law)
    }

    #[test]
    fn simulated_figures_match_the_frozen_table() {
        for (id, kind, gamma, sec, laws, policies) in frozen() {
            let FigureSpec::Simulated { curves, .. } = figure_spec(id) else {
                panic!("{id} should be simulated");
            };
            assert_eq!(curves.len(), laws.len(), "{id}");
            for ((c, law), policy) in curves.iter().zip(&laws).zip(&policies) {
                assert_eq!(
                    curve_params(c),
                    (kind, gamma, sec, law.clone()),
                    "{id} {}",
                    c.label
                );
                assert_eq!(c.policy, *policy, "{id} {}", c.label);
            }
        }
    }

    #[test]
    fn dynamic_figure_uses_t4_and_three_fractions() {
        let FigureSpec::Simulated { curves, .. } = figure_spec(FigureId::FigDyn) else {
            panic!()
        };
        let got: Vec<(ScalingKind, f64, Option<f64>, Policy)> = curves
            .iter()
            .map(|c| {
                let (k, g, s, law) = curve_params(c);
                assert_eq!(law, LookaheadLaw::deterministic(4));
                (k, g, s, c.policy)
            })
            .collect();
        let mut want = Vec::new();
        for (k, g, s) in [
            (ScalingKind::Linear, 0.6, 0.1),
            (ScalingKind::Polynomial, 0.75, 0.05),
        ] {
            for f in [0.0, 0.5, 1.0] {
                want.push((k, g, Some(s), Policy::Dynamic { f }));
            }
        }
        assert_eq!(got, want);
    }

    #[test]
    fn multicast_figure_parameters() {
        assert_eq!(
            figure_spec(FigureId::FigMulticast),
            FigureSpec::MulticastGain {
                gamma_m: 0.9,
                theta: 15.0,
                max_t: 10
            }
        );
    }

    #[test]
    fn grids_ascend() {
        for id in FigureId::ALL {
            if let FigureSpec::Simulated { grid, .. } = figure_spec(id) {
                assert!(grid.windows(2).all(|w| w[0] < w[1]), "{id}");
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for id in FigureId::ALL {
            assert_eq!(id.name().parse::<FigureId>().unwrap(), id);
        }
    }
}

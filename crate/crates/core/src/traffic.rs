//! Arrival generation for every traffic class.
//!
//! Each slot produces an [`ArrivalBatch`]: request counts keyed by look-ahead
//! (the number of slots between the request becoming known to the network and
//! its deadline), plus the set of multicast data sources demanded in the slot.
//! All randomness comes from a caller-owned RNG, so generators are immutable
//! and can be shared across worker threads.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

const PMF_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrafficError {
    #[error("gamma must lie strictly inside (0, 1), got {0}")]
    GammaOutOfRange(f64),
    #[error("look-ahead pmf is invalid: {0}")]
    InvalidPmf(String),
    #[error("binomial look-ahead parameter p must lie in [0, 1], got {0}")]
    InvalidBinomialP(f64),
    #[error("prediction-error parameters inconsistent: {0}")]
    InvalidPredictionError(String),
    #[error("multicast parameters invalid: {0}")]
    InvalidMulticast(String),
}

/// How the mean arrival rate grows with the per-slot capacity `C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalingKind {
    /// mean = gamma * C
    Linear,
    /// mean = C^gamma
    #[serde(alias = "poly")]
    Polynomial,
}

impl ScalingKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScalingKind::Linear => "linear",
            ScalingKind::Polynomial => "polynomial",
        }
    }
}

/// A traffic scaling regime: kind plus the exponent/utilisation `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RegimeRepr", into = "RegimeRepr")]
pub struct Regime {
    kind: ScalingKind,
    gamma: f64,
}

#[derive(Serialize, Deserialize)]
struct RegimeRepr {
    kind: ScalingKind,
    gamma: f64,
}

impl TryFrom<RegimeRepr> for Regime {
    type Error = TrafficError;
    fn try_from(r: RegimeRepr) -> Result<Self, Self::Error> {
        Regime::new(r.kind, r.gamma)
    }
}

impl From<Regime> for RegimeRepr {
    fn from(r: Regime) -> Self {
        RegimeRepr {
            kind: r.kind,
            gamma: r.gamma,
        }
    }
}

impl Regime {
    pub fn new(kind: ScalingKind, gamma: f64) -> Result<Self, TrafficError> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(TrafficError::GammaOutOfRange(gamma));
        }
        Ok(Self { kind, gamma })
    }

    pub fn linear(gamma: f64) -> Result<Self, TrafficError> {
        Self::new(ScalingKind::Linear, gamma)
    }

    pub fn polynomial(gamma: f64) -> Result<Self, TrafficError> {
        Self::new(ScalingKind::Polynomial, gamma)
    }

    pub fn kind(&self) -> ScalingKind {
        self.kind
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn mean_rate(&self, capacity: u32) -> f64 {
        mean_rate(self, capacity)
    }
}

/// Mean number of arrivals per slot at capacity `C`.
pub fn mean_rate(regime: &Regime, capacity: u32) -> f64 {
    let c = f64::from(capacity);
    match regime.kind {
        ScalingKind::Linear => regime.gamma * c,
        ScalingKind::Polynomial => c.powf(regime.gamma),
    }
}

/// Distribution of the look-ahead time attached to each request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LookaheadLaw {
    Deterministic {
        t: u32,
    },
    /// `pmf[i]` is the probability of look-ahead `t_min + i`.
    Finite {
        t_min: u32,
        pmf: Vec<f64>,
    },
    Binomial {
        t_max: u32,
        p: f64,
    },
}

impl LookaheadLaw {
    pub fn deterministic(t: u32) -> Self {
        LookaheadLaw::Deterministic { t }
    }

    pub fn finite(t_min: u32, pmf: Vec<f64>) -> Result<Self, TrafficError> {
        let law = LookaheadLaw::Finite { t_min, pmf };
        law.validate()?;
        Ok(law)
    }

    pub fn binomial(t_max: u32, p: f64) -> Result<Self, TrafficError> {
        let law = LookaheadLaw::Binomial { t_max, p };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<(), TrafficError> {
        match self {
            LookaheadLaw::Deterministic { .. } => Ok(()),
            LookaheadLaw::Finite { pmf, .. } => {
                if pmf.is_empty() {
                    return Err(TrafficError::InvalidPmf("empty support".into()));
                }
                if let Some(bad) = pmf.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
                    return Err(TrafficError::InvalidPmf(format!(
                        "entry {bad} is negative or not finite"
                    )));
                }
                let total: f64 = pmf.iter().sum();
                if (total - 1.0).abs() > PMF_TOLERANCE {
                    return Err(TrafficError::InvalidPmf(format!(
                        "entries sum to {total}, not 1"
                    )));
                }
                Ok(())
            }
            LookaheadLaw::Binomial { p, .. } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(TrafficError::InvalidBinomialP(*p));
                }
                Ok(())
            }
        }
    }

    /// Probabilities `p_k` for `k = 0..=t_max` (zeros below the support).
    pub fn pmf(&self) -> Vec<f64> {
        match self {
            LookaheadLaw::Deterministic { t } => {
                let mut v = vec![0.0; *t as usize + 1];
                v[*t as usize] = 1.0;
                v
            }
            LookaheadLaw::Finite { t_min, pmf } => {
                let mut v = vec![0.0; *t_min as usize];
                v.extend_from_slice(pmf);
                v
            }
            LookaheadLaw::Binomial { t_max, p } => binomial_pmf(*t_max, *p),
        }
    }

    /// Smallest look-ahead with positive probability.
    pub fn t_min(&self) -> u32 {
        self.pmf().iter().position(|&p| p > 0.0).unwrap_or(0) as u32
    }

    /// Largest look-ahead with positive probability.
    pub fn t_max(&self) -> u32 {
        self.pmf().iter().rposition(|&p| p > 0.0).unwrap_or(0) as u32
    }

    /// Length of the residual-deadline array needed to hold this law.
    pub fn horizon(&self) -> u32 {
        (self.pmf().len() - 1) as u32
    }

    /// `F_k = P(T <= k)`.
    pub fn cdf(&self, k: u32) -> f64 {
        let pmf = self.pmf();
        let upto = (k as usize).min(pmf.len() - 1);
        pmf[..=upto].iter().sum::<f64>().min(1.0)
    }

    pub fn is_deterministic(&self) -> bool {
        self.t_min() == self.t_max()
    }
}

fn binomial_pmf(n: u32, p: f64) -> Vec<f64> {
    let n_us = n as usize;
    let mut v = vec![0.0; n_us + 1];
    if p <= 0.0 {
        v[0] = 1.0;
        return v;
    }
    if p >= 1.0 {
        v[n_us] = 1.0;
        return v;
    }
    let mut coeff = 1.0_f64;
    for (k, slot) in v.iter_mut().enumerate() {
        if k > 0 {
            coeff *= (n_us + 1 - k) as f64 / k as f64;
        }
        *slot = coeff * p.powi(k as i32) * (1.0 - p).powi((n_us - k) as i32);
    }
    v
}

/// Imperfect prediction: a predicted stream `Q'` with look-ahead `t` and a
/// missed stream `Q''` that shows up urgent.
///
/// In the linear regime the rates are `alpha_pred*gamma*C` and
/// `alpha_miss*gamma*C`; in the polynomial regime they are `C^(alpha_pred*gamma)`
/// and `C^(alpha_miss*gamma)`. Perfect polynomial prediction uses
/// `alpha_miss = -inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionErrorSpec {
    pub alpha_pred: f64,
    pub alpha_miss: f64,
    pub t: u32,
    pub regime: Regime,
}

impl PredictionErrorSpec {
    /// Rates `(lambda', lambda'')` at capacity `C`.
    pub fn rates(&self, capacity: u32) -> (f64, f64) {
        let c = f64::from(capacity);
        let g = self.regime.gamma();
        match self.regime.kind() {
            ScalingKind::Linear => (self.alpha_pred * g * c, self.alpha_miss * g * c),
            ScalingKind::Polynomial => (
                c.powf(self.alpha_pred * g),
                poly_rate(c, self.alpha_miss * g),
            ),
        }
    }

    /// Asymptotic (capacity-free) constraints on the alpha pair.
    pub fn validate_asymptotic(&self) -> Result<(), TrafficError> {
        self.check_common()?;
        if self.regime.kind() == ScalingKind::Polynomial {
            let (a1, g) = (self.alpha_pred, self.regime.gamma());
            if !(a1 >= 1.0 && a1 < 1.0 / g) {
                return Err(TrafficError::InvalidPredictionError(format!(
                    "predicted-stream exponent factor {a1} must lie in [1, 1/gamma = {})",
                    1.0 / g
                )));
            }
        }
        Ok(())
    }

    /// Constraints evaluated at a concrete capacity.
    pub fn validate_at(&self, capacity: u32) -> Result<(), TrafficError> {
        self.check_common()?;
        if self.regime.kind() == ScalingKind::Polynomial {
            let c = f64::from(capacity);
            let (l1, l2) = self.rates(capacity);
            let lo = c.powf(self.regime.gamma());
            if !(l1 + l2 >= lo && l1 + l2 < c) {
                return Err(TrafficError::InvalidPredictionError(format!(
                    "C^(a'g) + C^(a''g) = {} must lie in [C^g = {lo}, C = {c})",
                    l1 + l2
                )));
            }
        }
        Ok(())
    }

    // Checks shared by both forms; the linear regime has no capacity dependence.
    fn check_common(&self) -> Result<(), TrafficError> {
        let g = self.regime.gamma();
        let (a1, a2) = (self.alpha_pred, self.alpha_miss);
        if a1.is_nan() || a2.is_nan() {
            return Err(TrafficError::InvalidPredictionError("alpha is NaN".into()));
        }
        if a2 >= 1.0 {
            return Err(TrafficError::InvalidPredictionError(format!(
                "missed-prediction factor {a2} must be below 1"
            )));
        }
        if self.regime.kind() == ScalingKind::Linear {
            if a2 < 0.0 {
                return Err(TrafficError::InvalidPredictionError(format!(
                    "missed-prediction factor {a2} must be nonnegative"
                )));
            }
            let sum = a1 + a2;
            if !(sum >= 1.0 && sum < 1.0 / g) {
                return Err(TrafficError::InvalidPredictionError(format!(
                    "alpha' + alpha'' = {sum} must lie in [1, 1/gamma = {})",
                    1.0 / g
                )));
            }
        }
        Ok(())
    }
}

fn poly_rate(c: f64, exponent: f64) -> f64 {
    if exponent == f64::NEG_INFINITY {
        0.0
    } else {
        c.powf(exponent)
    }
}

/// Symmetric multicast demand over `L = round(theta*C)` data sources.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MulticastSpec {
    pub gamma_m: f64,
    pub theta: f64,
}

impl MulticastSpec {
    pub fn new(gamma_m: f64, theta: f64) -> Result<Self, TrafficError> {
        let spec = Self { gamma_m, theta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), TrafficError> {
        if !(self.gamma_m > 0.0 && self.gamma_m < 1.0) {
            return Err(TrafficError::GammaOutOfRange(self.gamma_m));
        }
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(TrafficError::InvalidMulticast(format!(
                "theta must be positive and finite, got {}",
                self.theta
            )));
        }
        Ok(())
    }

    /// Number of data sources at capacity `C`, never below one.
    pub fn sources(&self, capacity: u32) -> u32 {
        let l = (self.theta * f64::from(capacity)).round();
        if l < 1.0 {
            1
        } else {
            l as u32
        }
    }

    /// Per-source probability of being demanded in one slot.
    pub fn per_slot_prob(&self) -> f64 {
        bernoulli_source_prob(self, 1)
    }
}

/// Probability that a given data source is demanded at least once in
/// `window` consecutive slots: `1 - exp(-window * gamma_m / theta)`.
pub fn bernoulli_source_prob(spec: &MulticastSpec, window: u32) -> f64 {
    -(-(f64::from(window)) * spec.gamma_m / spec.theta).exp_m1()
}

/// Arrivals of one slot.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrivalBatch {
    pub slot: u64,
    /// `per_lookahead[k]` requests arrive with deadline `slot + k`.
    pub per_lookahead: Vec<u64>,
    /// Distinct multicast sources demanded this slot, ascending.
    pub multicast_sources: Vec<u32>,
}

impl ArrivalBatch {
    pub fn empty(slot: u64) -> Self {
        Self {
            slot,
            ..Default::default()
        }
    }

    pub fn total(&self) -> u64 {
        self.per_lookahead.iter().sum()
    }

    pub fn count_at(&self, k: usize) -> u64 {
        self.per_lookahead.get(k).copied().unwrap_or(0)
    }

    pub fn add(&mut self, k: usize, count: u64) {
        if self.per_lookahead.len() <= k {
            self.per_lookahead.resize(k + 1, 0);
        }
        self.per_lookahead[k] += count;
    }
}

/// Exact Poisson draw; zero mean yields zero.
pub fn sample_poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    // rand_distr uses inversion for small means and a rejection sampler otherwise;
    // both are exact.
    let dist = Poisson::new(mean).expect("finite positive Poisson mean");
    dist.sample(rng) as u64
}

/// One slot of unicast arrivals: total is Poisson(mean_rate), split across
/// look-ahead values as independent Poisson(p_k * mean) streams.
pub fn sample_unicast<R: Rng + ?Sized>(
    regime: &Regime,
    law: &LookaheadLaw,
    capacity: u32,
    rng: &mut R,
) -> ArrivalBatch {
    let lambda = mean_rate(regime, capacity);
    let mut batch = ArrivalBatch::empty(0);
    match law {
        LookaheadLaw::Deterministic { t } => {
            batch.add(*t as usize, sample_poisson(lambda, rng));
        }
        _ => {
            let pmf = law.pmf();
            batch.per_lookahead = vec![0; pmf.len()];
            for (k, p) in pmf.iter().enumerate() {
                if *p > 0.0 {
                    batch.per_lookahead[k] = sample_poisson(p * lambda, rng);
                }
            }
        }
    }
    batch
}

/// One slot under imperfect prediction: `Q''` lands at look-ahead 0 and `Q'`
/// at look-ahead `t`.
pub fn sample_prediction_error<R: Rng + ?Sized>(
    spec: &PredictionErrorSpec,
    capacity: u32,
    rng: &mut R,
) -> Result<ArrivalBatch, TrafficError> {
    spec.validate_at(capacity)?;
    let (l_pred, l_miss) = spec.rates(capacity);
    let mut batch = ArrivalBatch::empty(0);
    batch.per_lookahead = vec![0; spec.t as usize + 1];
    let missed = sample_poisson(l_miss, rng);
    let predicted = sample_poisson(l_pred, rng);
    batch.add(0, missed);
    batch.add(spec.t as usize, predicted);
    Ok(batch)
}

/// One slot of symmetric multicast demand: each of the `L` sources is present
/// independently with probability `1 - exp(-gamma_m/theta)`.
pub fn sample_multicast<R: Rng + ?Sized>(
    spec: &MulticastSpec,
    capacity: u32,
    rng: &mut R,
) -> ArrivalBatch {
    let l = spec.sources(capacity);
    let a = spec.per_slot_prob();
    let mut batch = ArrivalBatch::empty(0);
    batch.multicast_sources = (0..l).filter(|_| rng.random::<f64>() < a).collect();
    batch
}

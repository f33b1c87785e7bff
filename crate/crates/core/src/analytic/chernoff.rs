//! Numeric large-deviation exponent for sums of independent Poisson and
//! binomial components.
//!
//! Everything is expressed per unit of capacity: a component with mean `m`
//! stands for a count of mean `m * C`. The exponent is the Legendre transform
//! `sup_{r > 0} (threshold * r - log_mgf(r))`.

/// One independent summand of the log moment generating function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MgfTerm {
    /// `scale * X` with `X ~ Poisson(rate * C)`.
    Poisson { rate: f64, scale: f64 },
    /// `scale * S` with `S ~ Binomial(trials * C, prob)`.
    Binomial { trials: f64, prob: f64, scale: f64 },
}

impl MgfTerm {
    pub fn poisson(rate: f64) -> Self {
        MgfTerm::Poisson { rate, scale: 1.0 }
    }

    pub fn binomial(trials: f64, prob: f64) -> Self {
        MgfTerm::Binomial {
            trials,
            prob,
            scale: 1.0,
        }
    }

    fn value(&self, r: f64) -> f64 {
        match *self {
            MgfTerm::Poisson { rate, scale } => rate * (scale * r).exp_m1(),
            MgfTerm::Binomial {
                trials,
                prob,
                scale,
            } => trials * (prob * (scale * r).exp_m1()).ln_1p(),
        }
    }

    /// First and second derivatives in `r`.
    fn derivatives(&self, r: f64) -> (f64, f64) {
        match *self {
            MgfTerm::Poisson { rate, scale } => {
                let e = rate * (scale * r).exp();
                (scale * e, scale * scale * e)
            }
            MgfTerm::Binomial {
                trials,
                prob,
                scale,
            } => {
                // tilted success probability
                let w = prob / (prob + (1.0 - prob) * (-scale * r).exp());
                (trials * scale * w, trials * scale * scale * w * (1.0 - w))
            }
        }
    }

    fn mean(&self) -> f64 {
        self.derivatives(0.0).0
    }

    /// Largest value the summand can take per unit capacity, `None` if unbounded.
    fn max_value(&self) -> Option<f64> {
        match *self {
            MgfTerm::Poisson { rate, .. } if rate > 0.0 => None,
            MgfTerm::Poisson { .. } => Some(0.0),
            MgfTerm::Binomial {
                trials,
                prob,
                scale,
            } => Some(if prob > 0.0 { trials * scale } else { 0.0 }),
        }
    }
}

/// Sum of independent [`MgfTerm`]s.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LogMgf {
    pub terms: Vec<MgfTerm>,
}

impl LogMgf {
    pub fn new(terms: Vec<MgfTerm>) -> Self {
        Self { terms }
    }

    pub fn with(mut self, term: MgfTerm) -> Self {
        self.terms.push(term);
        self
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.terms.iter().map(|t| t.value(r)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.terms.iter().map(MgfTerm::mean).sum()
    }

    fn derivatives(&self, r: f64) -> (f64, f64) {
        self.terms
            .iter()
            .map(|t| t.derivatives(r))
            .fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d))
    }

    fn max_value(&self) -> Option<f64> {
        self.terms.iter().map(MgfTerm::max_value).sum()
    }
}

/// `sup_{r > 0} (threshold * r - mgf(r))`.
///
/// Zero when the threshold does not exceed the mean; infinite when it is at or
/// beyond the largest attainable value (the event is empty).
pub fn chernoff_exponent(mgf: &LogMgf, threshold: f64) -> f64 {
    chernoff_optimum(mgf, threshold).0
}

/// Exponent together with the optimal tilt `r*` (`r* = 0` or infinite at the edges).
pub fn chernoff_optimum(mgf: &LogMgf, threshold: f64) -> (f64, f64) {
    if threshold <= mgf.mean() {
        return (0.0, 0.0);
    }
    if let Some(max) = mgf.max_value() {
        if threshold >= max {
            return (f64::INFINITY, f64::INFINITY);
        }
    }
    let slope = |r: f64| threshold - mgf.derivatives(r).0;

    let mut hi = 1.0;
    while slope(hi) > 0.0 {
        hi *= 2.0;
        assert!(hi < 1e6, "Chernoff tilt search diverged");
    }
    let mut lo = 0.0;
    let mut r = 0.5 * hi;
    for _ in 0..200 {
        let (d1, d2) = mgf.derivatives(r);
        let g = threshold - d1;
        if g.abs() <= 4.0 * f64::EPSILON * threshold.abs().max(1.0) {
            break;
        }
        if g > 0.0 {
            lo = r;
        } else {
            hi = r;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
        let newton = r + g / d2;
        r = if d2 > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    (threshold * r - mgf.eval(r), r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_poisson_matches_closed_form() {
        for g in [0.1, 0.5, 0.8, 0.95] {
            let d = chernoff_exponent(&LogMgf::new(vec![MgfTerm::poisson(g)]), 1.0);
            assert!((d - (g - 1.0 - f64::ln(g))).abs() < 1e-12, "gamma {g}");
        }
    }

    #[test]
    fn threshold_at_or_below_mean_gives_zero() {
        let mgf = LogMgf::new(vec![MgfTerm::poisson(2.0)]);
        assert_eq!(chernoff_exponent(&mgf, 2.0), 0.0);
        assert_eq!(chernoff_exponent(&mgf, 1.0), 0.0);
    }

    #[test]
    fn bounded_sum_beyond_range_is_infinite() {
        let mgf = LogMgf::new(vec![MgfTerm::binomial(0.9, 0.3)]);
        assert!(chernoff_exponent(&mgf, 1.0).is_infinite());
        assert!(chernoff_exponent(&mgf, 0.8).is_finite());
    }

    #[test]
    fn scaled_poisson_term() {
        // 2X with X ~ Poisson(m): exponent at t equals Poisson exponent at t/2
        let m = 0.3;
        let scaled = LogMgf::new(vec![MgfTerm::Poisson {
            rate: m,
            scale: 2.0,
        }]);
        let plain = LogMgf::new(vec![MgfTerm::poisson(m)]);
        assert!((chernoff_exponent(&scaled, 1.0) - chernoff_exponent(&plain, 0.5)).abs() < 1e-12);
    }
}

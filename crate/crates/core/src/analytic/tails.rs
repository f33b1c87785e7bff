//! Exact Poisson and binomial tails by direct summation.

/// `ln(n!)`, from a short table for small `n` and the Stirling series otherwise.
pub fn ln_factorial(n: u64) -> f64 {
    const DIRECT: u64 = 32;
    if n < DIRECT {
        return (2..=n).map(|i| (i as f64).ln()).sum();
    }
    let x = (n + 1) as f64;
    // ln Gamma(x), Stirling with four correction terms; error < 1e-17 for x >= 32
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + series
}

fn poisson_ln_pmf(lambda: f64, j: u64) -> f64 {
    -lambda + j as f64 * lambda.ln() - ln_factorial(j)
}

/// `P(Q = j)` for `Q ~ Poisson(lambda)`.
pub fn poisson_pmf(lambda: f64, j: u64) -> f64 {
    if lambda == 0.0 {
        return if j == 0 { 1.0 } else { 0.0 };
    }
    poisson_ln_pmf(lambda, j).exp()
}

/// `P(Q > k)` for `Q ~ Poisson(lambda)`.
pub fn poisson_tail(lambda: f64, k: u64) -> f64 {
    assert!(
        lambda >= 0.0 && lambda.is_finite(),
        "Poisson mean must be finite and nonnegative"
    );
    if lambda == 0.0 {
        return 0.0;
    }
    if (k as f64) >= lambda {
        // upper sum, terms decrease geometrically
        let mut term = poisson_ln_pmf(lambda, k + 1).exp();
        let mut sum = 0.0;
        let mut j = k + 1;
        while term > sum * 1e-18 && term > 0.0 {
            sum += term;
            j += 1;
            term *= lambda / j as f64;
        }
        sum
    } else {
        // lower sum walked down from k; the tail is at least a constant here
        let mut term = poisson_ln_pmf(lambda, k).exp();
        let mut cdf = 0.0;
        let mut j = k;
        loop {
            cdf += term;
            if j == 0 || term < cdf * 1e-18 {
                break;
            }
            term *= j as f64 / lambda;
            j -= 1;
        }
        (1.0 - cdf).max(0.0)
    }
}

/// `P(S > k)` for `S ~ Binomial(n, q)`.
pub fn binomial_tail(n: u64, q: f64, k: u64) -> f64 {
    assert!(
        (0.0..=1.0).contains(&q),
        "success probability outside [0, 1]"
    );
    if k >= n || q == 0.0 {
        return 0.0;
    }
    if q == 1.0 {
        return 1.0;
    }
    let ln_pmf = |j: u64| {
        ln_factorial(n) - ln_factorial(j) - ln_factorial(n - j)
            + j as f64 * q.ln()
            + (n - j) as f64 * (-q).ln_1p()
    };
    let mean = n as f64 * q;
    if k as f64 >= mean {
        (k + 1..=n).map(|j| ln_pmf(j).exp()).sum()
    } else {
        let cdf: f64 = (0..=k).map(|j| ln_pmf(j).exp()).sum();
        (1.0 - cdf).max(0.0)
    }
}

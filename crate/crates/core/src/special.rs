//! Log-space special functions shared by the generator and the likelihood.

use statrs::function::factorial;
use statrs::function::gamma;

/// `ln(n!)`.
#[inline]
pub fn ln_factorial(n: usize) -> f64 {
    factorial::ln_factorial(n as u64)
}

/// `ln P(Z >= k)` for `Z ~ Poisson(mu)`.
///
/// For `k <= mu` the tail is `1 - P(Z <= k - 1)`, the regularized lower
/// incomplete gamma function `P(k, mu)`, which is bounded away from zero. For
/// `k > mu` that route underflows at large `k`, so the tail is summed as a
/// series anchored at the mode of the tail.
pub fn ln_poisson_upper_tail(k: usize, mu: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    if mu <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let kf = k as f64;
    if kf <= mu {
        return gamma::gamma_lr(kf, mu).ln();
    }
    // P(Z >= k) = pmf(k) * sum_{n >= 0} mu^n k! / (k + n)!
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 1.0;
    while term > 1e-17 * sum && n < 100_000.0 {
        term *= mu / (kf + n);
        sum += term;
        n += 1.0;
    }
    -mu + kf * mu.ln() - ln_factorial(k) + sum.ln()
}

/// `ln(exp(a) + exp(b))` without overflow.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let hi = a.max(b);
    hi + (-(a - b).abs()).exp().ln_1p()
}

/// `ln(sum exp(v))` without overflow.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + values.iter().map(|v| (v - hi).exp()).sum::<f64>().ln()
}

/// Probability that the second branch is chosen when the branch log-weights
/// are `log0` and `log1`.
#[inline]
pub fn logistic_choice(log0: f64, log1: f64) -> f64 {
    match (log0 == f64::NEG_INFINITY, log1 == f64::NEG_INFINITY) {
        (true, true) => f64::NAN,
        (true, false) => 1.0,
        (false, true) => 0.0,
        _ => {
            let d = log1 - log0;
            if d >= 0.0 {
                1.0 / (1.0 + (-d).exp())
            } else {
                let e = d.exp();
                e / (1.0 + e)
            }
        }
    }
}

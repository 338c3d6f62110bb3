//! Posterior summaries, derived quantities, edge inclusion probabilities,
//! posterior predictive bands and the binomial tail diagnostic.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::function::factorial::ln_binomial;

use crate::episim::{cumulative_curve, simulate_si};
use crate::error::{Error, Result};
use crate::mcmc::{pair_index, ModelKind, Trace};
use crate::netgen::{generate_brg, generate_pa_network};
use crate::special::log_sum_exp;
use crate::types::NetworkOrder;

/// Approximate mean of the censored edge-count distribution, `mu + e^-mu`.
pub fn mu_star(mu: f64) -> f64 {
    mu + (-mu).exp()
}

/// Network scaled epidemic rate `beta * mu_star(mu)`.
pub fn alpha(beta: f64, mu: f64) -> f64 {
    beta * mu_star(mu)
}

/// Mean, standard deviation and central 95% interval of one quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSummary {
    pub mean: f64,
    pub sd: f64,
    pub lower: f64,
    pub upper: f64,
}

impl ParamSummary {
    pub fn from_draws(x: &[f64]) -> Self {
        let (mean, sd) = mean_sd(x);
        let mut sorted = x.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self { mean, sd, lower: quantile_sorted(&sorted, 0.025), upper: quantile_sorted(&sorted, 0.975) }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    /// Half the width of the central interval.
    pub fn half_width(&self) -> f64 {
        0.5 * (self.upper - self.lower)
    }
}

/// Summary of a kept trace. The attachment-model fields are `None` for a
/// random graph trace and vice versa.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    pub kept_n: usize,
    pub beta: ParamSummary,
    pub mu: Option<ParamSummary>,
    pub gamma: Option<ParamSummary>,
    pub mu_star: Option<ParamSummary>,
    pub alpha: Option<ParamSummary>,
    pub corr_beta_mustar: Option<f64>,
    pub p: Option<ParamSummary>,
    pub corr_beta_p: Option<f64>,
    /// Posterior mean of `p * (m - 1)`.
    pub average_degree: Option<f64>,
    /// Edge count; absent when the trace carries no graph statistics.
    pub edges: Option<ParamSummary>,
}

/// Sample mean and unbiased standard deviation.
pub fn mean_sd(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    if x.len() < 2 {
        return (mean, 0.0);
    }
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Pearson correlation; `0` when either sample is constant.
pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize_trace(trace: &Trace) -> Result<PosteriorSummary> {
    let n = trace.kept();
    if n < 2 {
        return Err(Error::invalid(format!("a summary needs at least two kept draws, found {n}")));
    }
    let edges: Vec<f64> = trace.edge_count.iter().map(|&e| e as f64).collect();
    let mut s = PosteriorSummary {
        kept_n: n,
        beta: ParamSummary::from_draws(&trace.beta),
        mu: None,
        gamma: None,
        mu_star: None,
        alpha: None,
        corr_beta_mustar: None,
        p: None,
        corr_beta_p: None,
        average_degree: None,
        edges: (edges.len() == n).then(|| ParamSummary::from_draws(&edges)),
    };
    match trace.model {
        ModelKind::Pa => {
            let ms: Vec<f64> = trace.mu.iter().map(|&m| mu_star(m)).collect();
            let al: Vec<f64> = trace.beta.iter().zip(&trace.mu).map(|(&b, &m)| alpha(b, m)).collect();
            s.mu = Some(ParamSummary::from_draws(&trace.mu));
            s.gamma = Some(ParamSummary::from_draws(&trace.gamma));
            s.mu_star = Some(ParamSummary::from_draws(&ms));
            s.alpha = Some(ParamSummary::from_draws(&al));
            s.corr_beta_mustar = Some(correlation(&trace.beta, &ms));
        }
        ModelKind::Brg => {
            let p = ParamSummary::from_draws(&trace.p);
            s.average_degree = Some(p.mean * (trace.m as f64 - 1.0));
            s.p = Some(p);
            s.corr_beta_p = Some(correlation(&trace.beta, &trace.p));
        }
    }
    Ok(s)
}

/// Posterior inclusion probability of every unordered pair.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeProbabilities {
    pub m: usize,
    probs: Vec<f64>,
}

impl EdgeProbabilities {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.probs[pair_index(self.m, i, j)]
    }

    /// `(i, j, prob)` for `i < j` in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let m = self.m;
        (0..m).flat_map(move |i| (i + 1..m).map(move |j| (i, j, self.get(i, j))))
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

pub fn edge_posterior(trace: &Trace) -> Result<EdgeProbabilities> {
    let n = trace.kept();
    if n == 0 {
        return Err(Error::invalid("edge probabilities need at least one kept draw"));
    }
    Ok(EdgeProbabilities { m: trace.m, probs: trace.edge_tally.iter().map(|&c| c as f64 / n as f64).collect() })
}

/// `count` equally spaced times from 0 to `span` inclusive.
pub fn time_grid(span: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![span],
        _ => (0..count).map(|k| span * k as f64 / (count - 1) as f64).collect(),
    }
}

/// Default number of grid points for predictive curves.
pub const DEFAULT_GRID_POINTS: usize = 200;

/// Pointwise 2.5%, 50% and 97.5% quantiles of simulated cumulative counts.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveBands {
    pub grid: Vec<f64>,
    pub lower: Vec<f64>,
    pub median: Vec<f64>,
    pub upper: Vec<f64>,
}

impl PredictiveBands {
    /// Fraction of grid points at which `observed` lies inside the band.
    pub fn coverage(&self, observed: &[usize]) -> f64 {
        let inside = observed
            .iter()
            .enumerate()
            .filter(|&(k, &c)| self.lower[k] <= c as f64 && c as f64 <= self.upper[k])
            .count();
        inside as f64 / observed.len() as f64
    }
}

/// Cap on attempts to draw a connected random graph for one simulation.
const CONNECT_ATTEMPTS: usize = 10_000;

fn simulate_curve(trace: &Trace, m: usize, grid: &[f64], seed: u64) -> Result<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(0..trace.kept());
    let beta = trace.beta[k];
    let g = match trace.model {
        ModelKind::Pa => {
            let sigma = NetworkOrder::identity(m);
            generate_pa_network(m, trace.mu[k], trace.gamma[k], &sigma, &mut rng)?.0
        }
        ModelKind::Brg => {
            let mut found = None;
            for _ in 0..CONNECT_ATTEMPTS {
                let g = generate_brg(m, trace.p[k], &mut rng)?;
                if g.is_connected() {
                    found = Some(g);
                    break;
                }
            }
            found.ok_or(Error::Disconnected)?
        }
    };
    let epi = simulate_si(&g, beta, 0, &mut rng)?;
    Ok(cumulative_curve(&epi.times, grid))
}

/// Simulates `n_sims` epidemics from parameter draws picked uniformly with
/// replacement from the trace and returns pointwise quantile bands. The
/// network order is the identity and the first entrant is the initial
/// case. Simulation `k` uses seed `base + k` with `base` drawn from `rng`,
/// so the result does not depend on the thread count.
pub fn posterior_predictive_curves<R: Rng + ?Sized>(
    trace: &Trace,
    m: usize,
    grid: &[f64],
    n_sims: usize,
    rng: &mut R,
) -> Result<PredictiveBands> {
    if trace.kept() == 0 || n_sims == 0 {
        return Err(Error::invalid("predictive simulation needs a non-empty trace and at least one draw"));
    }
    let base: u64 = rng.random();
    let curves: Vec<Vec<usize>> = (0..n_sims)
        .into_par_iter()
        .map(|k| simulate_curve(trace, m, grid, base.wrapping_add(k as u64)))
        .collect::<Result<_>>()?;
    let mut bands = PredictiveBands {
        grid: grid.to_vec(),
        lower: Vec::with_capacity(grid.len()),
        median: Vec::with_capacity(grid.len()),
        upper: Vec::with_capacity(grid.len()),
    };
    let mut column = vec![0.0; n_sims];
    for t in 0..grid.len() {
        for (c, curve) in column.iter_mut().zip(&curves) {
            *c = curve[t] as f64;
        }
        column.sort_by(f64::total_cmp);
        bands.lower.push(quantile_sorted(&column, 0.025));
        bands.median.push(quantile_sorted(&column, 0.5));
        bands.upper.push(quantile_sorted(&column, 0.975));
    }
    Ok(bands)
}

/// `P(X >= k)` for `X ~ Binomial(n, p)`, summed in log space.
pub fn binomial_tail(n: u64, p: f64, k: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || k > n {
        return Err(Error::invalid(format!("binomial tail needs 0 <= p <= 1 and k <= n, got p = {p}, k = {k}, n = {n}")));
    }
    if k == 0 {
        return Ok(1.0);
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let terms: Vec<f64> = (k..=n).map(|x| ln_binomial(n, x) + x as f64 * lp + (n - x) as f64 * lq).collect();
    Ok(log_sum_exp(&terms).exp().min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu_star_values() {
        assert_eq!(mu_star(0.0), 1.0);
        assert!((mu_star(6.0) - 6.0024788).abs() < 1e-7);
        assert!((alpha(0.4, 6.0) - 2.401).abs() < 5e-4);
    }

    #[test]
    fn binomial_small_cases() {
        assert_eq!(binomial_tail(10, 0.3, 0).unwrap(), 1.0);
        assert!((binomial_tail(2, 0.5, 1).unwrap() - 0.75).abs() < 1e-15);
        assert!(binomial_tail(2, 0.5, 3).is_err());
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
        assert_eq!(quantile_sorted(&v, 1.0), 4.0);
        assert_eq!(quantile_sorted(&v, 0.5), 2.5);
    }

    #[test]
    fn grid_endpoints() {
        let g = time_grid(10.0, 200);
        assert_eq!(g.len(), 200);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[199], 10.0);
    }

    #[test]
    fn correlation_guards() {
        assert_eq!(correlation(&[1.0, 1.0], &[0.0, 1.0]), 0.0);
        assert!((correlation(&[1.0, 0.0], &[0.0, 1.0]) + 1.0).abs() < 1e-15);
    }
}

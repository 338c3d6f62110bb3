//! Likelihood of the latent graph under the attachment model, split into the
//! edge-count part `L1` and the attachment part `L2`.
//!
//! Both parts are driven by per-step statistics: for the entrant at position
//! `p` (0-based), its earlier neighbours `q`, the degree `d` of each within
//! the graph formed by positions `< p`, the cumulative degree `c` of
//! positions `< q` in that graph, and the total degree `D` of that graph.

use crate::error::{Error, Result};
use crate::netgen::attachment_weights;
use crate::special::{ln_factorial, ln_poisson_upper_tail};
use crate::types::{Graph, NetworkOrder};

/// How the attachment part of the network likelihood is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum L2Mode {
    /// One ascending-position ordering of the selected nodes, scaled by
    /// `x!`, with each denominator subtracting the weights of all earlier
    /// positions.
    #[default]
    Approx,
    /// Exact probability of the selected set under sequential sampling
    /// without replacement. Limited to small attachment counts.
    Exact,
}

/// Largest number of new edges at one step that `log_l2_exact` will
/// enumerate orderings for.
pub const EXACT_ENUMERATION_LIMIT: usize = 8;

/// One selected earlier neighbour at a given step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SlotStats {
    pub q: u32,
    pub d: u32,
    pub c: u32,
}

pub(crate) struct StepStats {
    /// New-edge count by entry position (`x[0]` is always 0, `x[1]` is 1 iff
    /// the first two entrants are joined).
    pub x: Vec<usize>,
    /// Total degree of the graph on positions `< p`.
    pub dsum: Vec<u64>,
    /// Selected earlier neighbours of position `p`, ascending.
    pub slots: Vec<Vec<SlotStats>>,
}

pub(crate) struct Fenwick {
    tree: Vec<u64>,
}

impl Fenwick {
    pub(crate) fn new(n: usize) -> Self {
        Self { tree: vec![0; n + 1] }
    }

    pub(crate) fn add(&mut self, idx: usize, v: u64) {
        let mut i = idx + 1;
        while i < self.tree.len() {
            self.tree[i] += v;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum over indices `< idx`.
    pub(crate) fn prefix(&self, idx: usize) -> u64 {
        let mut i = idx;
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

pub(crate) fn step_stats(g: &Graph, sigma: &NetworkOrder) -> StepStats {
    let m = g.m();
    let mut x = vec![0usize; m];
    let mut dsum = vec![0u64; m];
    let mut slots = vec![Vec::new(); m];
    let mut partial = vec![0u32; m];
    let mut fen = Fenwick::new(m);
    let mut total = 0u64;
    let mut earlier = Vec::new();
    for p in 0..m {
        let node = sigma.node_at(p);
        earlier.clear();
        earlier.extend(
            g.neighbors(node)
                .iter()
                .map(|&v| sigma.position_of(v))
                .filter(|&q| q < p),
        );
        earlier.sort_unstable();
        x[p] = earlier.len();
        dsum[p] = total;
        if p >= 2 {
            slots[p] = earlier
                .iter()
                .map(|&q| SlotStats { q: q as u32, d: partial[q], c: fen.prefix(q) as u32 })
                .collect();
        }
        for &q in &earlier {
            partial[q] += 1;
            fen.add(q, 1);
        }
        partial[p] = x[p] as u32;
        fen.add(p, x[p] as u64);
        total += 2 * x[p] as u64;
    }
    StepStats { x, dsum, slots }
}

/// Whether the graph is in the support of the attachment model under
/// `sigma`: the first two entrants are joined and every later entrant has at
/// least one earlier neighbour.
pub(crate) fn counts_admissible(x: &[usize]) -> bool {
    x.len() < 2 || (x[1] == 1 && x[2..].iter().all(|&v| v >= 1))
}

/// Log contribution of entrant at position `p` to the approximate `L2`, for
/// selected position `q` with degree `d`, preceding cumulative degree `c` and
/// total degree `dsum`.
#[inline]
pub(crate) fn slot_term(p: usize, q: u32, d: u32, c: u32, dsum: u64, gamma: f64) -> f64 {
    let t = (p * (p + 1) / 2) as f64;
    let q = q as u64;
    let (deg_w, deg_rest) = if dsum > 0 {
        (d as f64 / dsum as f64, (dsum - c as u64) as f64 / dsum as f64)
    } else {
        (0.0, 0.0)
    };
    let pos_w = (q + 1) as f64 / t;
    let pos_rest = (t - (q * (q + 1) / 2) as f64) / t;
    let w = (1.0 - gamma) * deg_w + gamma * pos_w;
    if w <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if q == 0 {
        return w.ln();
    }
    let rest = (1.0 - gamma) * deg_rest + gamma * pos_rest;
    w.ln() - rest.ln()
}

/// Contribution of one step to `ln L1` in the factored form: the common
/// Poisson kernel, the `x = 1` boost and the tail ratio at `x = i - 1`.
/// `step` is the 0-based entry position, so the support is `1..=step`.
#[inline]
pub(crate) fn ln_l1_step(x: usize, step: usize, mu: f64) -> f64 {
    if x == 0 || x > step {
        return f64::NEG_INFINITY;
    }
    let ln_mu = mu.ln();
    let mut v = -mu + x as f64 * ln_mu - ln_factorial(x);
    if x == 1 {
        v += (1.0 + mu).ln() - ln_mu;
    }
    if x == step {
        v += ln_tail_ratio(step, mu);
    }
    v
}

/// `ln[ sum_{z >= k} mu^z/z! / (mu^k/k!) ]`.
#[inline]
fn ln_tail_ratio(k: usize, mu: f64) -> f64 {
    ln_poisson_upper_tail(k, mu) + mu - (k as f64 * mu.ln() - ln_factorial(k))
}

/// `ln L1` from the new-edge counts.
pub(crate) fn log_l1_from_counts(x: &[usize], mu: f64) -> f64 {
    if !counts_admissible(x) {
        return f64::NEG_INFINITY;
    }
    let m = x.len();
    if m <= 2 {
        return 0.0;
    }
    let ln_mu = mu.ln();
    let edges: usize = x.iter().sum();
    let mut ones = 0usize;
    let mut tail = 0.0;
    let mut ln_fact = 0.0;
    for (p, &xp) in x.iter().enumerate().skip(2) {
        if xp == 1 {
            ones += 1;
        }
        if xp == p {
            tail += ln_tail_ratio(p, mu);
        }
        ln_fact += ln_factorial(xp);
    }
    -((m - 2) as f64) * mu + (edges as f64 - 1.0) * ln_mu + ones as f64 * ((1.0 + mu).ln() - ln_mu) + tail
        - ln_fact
}

/// Number of new edges each entrant brought, by entry position.
pub fn new_edge_counts(g: &Graph, sigma: &NetworkOrder) -> Vec<usize> {
    (0..g.m())
        .map(|p| {
            let node = sigma.node_at(p);
            g.neighbors(node).iter().filter(|&&v| sigma.position_of(v) < p).count()
        })
        .collect()
}

/// `ln L1(G; sigma, mu)`, the likelihood of the new-edge counts.
pub fn log_l1(g: &Graph, sigma: &NetworkOrder, mu: f64) -> f64 {
    log_l1_from_counts(&new_edge_counts(g, sigma), mu)
}

pub(crate) fn log_l2_from_stats(stats: &StepStats, gamma: f64) -> f64 {
    let mut total = 0.0;
    for p in 2..stats.x.len() {
        total += ln_factorial(stats.x[p]);
        for s in &stats.slots[p] {
            total += slot_term(p, s.q, s.d, s.c, stats.dsum[p], gamma);
        }
    }
    total
}

/// Approximate `ln L2(G; sigma, gamma)`.
pub fn log_l2_approx(g: &Graph, sigma: &NetworkOrder, gamma: f64) -> f64 {
    log_l2_from_stats(&step_stats(g, sigma), gamma)
}

/// Exact `ln L2`: for every step, the sum over all orderings of the selected
/// set of the sequential without-replacement draw probability.
pub fn log_l2_exact(g: &Graph, sigma: &NetworkOrder, gamma: f64) -> Result<f64> {
    let m = g.m();
    let mut degrees = vec![0usize; m];
    if m >= 2 && g.has_edge(sigma.node_at(0), sigma.node_at(1)) {
        degrees[0] = 1;
        degrees[1] = 1;
    }
    let mut total = 0.0;
    for p in 2..m {
        let node = sigma.node_at(p);
        let selected: Vec<usize> = g
            .neighbors(node)
            .iter()
            .map(|&v| sigma.position_of(v))
            .filter(|&q| q < p)
            .collect();
        if selected.len() > EXACT_ENUMERATION_LIMIT {
            return Err(Error::EnumerationLimit { count: selected.len(), limit: EXACT_ENUMERATION_LIMIT });
        }
        let w = attachment_weights(&degrees[..p], gamma);
        let mut used = vec![false; selected.len()];
        let prob = sum_over_orderings(&w, &selected, &mut used, 1.0);
        total += prob.ln();
        for &q in &selected {
            degrees[q] += 1;
        }
        degrees[p] = selected.len();
    }
    Ok(total)
}

fn sum_over_orderings(w: &[f64], selected: &[usize], used: &mut [bool], remaining: f64) -> f64 {
    let mut total = 0.0;
    let mut any = false;
    for k in 0..selected.len() {
        if used[k] {
            continue;
        }
        any = true;
        let wk = w[selected[k]];
        if wk <= 0.0 {
            continue;
        }
        used[k] = true;
        total += wk / remaining * sum_over_orderings(w, selected, used, remaining - wk);
        used[k] = false;
    }
    if any {
        total
    } else {
        1.0
    }
}

/// `ln pi(G | mu, gamma, sigma) = ln L1 + ln L2`.
pub fn log_network_given_params(
    g: &Graph,
    sigma: &NetworkOrder,
    mu: f64,
    gamma: f64,
    mode: L2Mode,
) -> Result<f64> {
    let stats = step_stats(g, sigma);
    let l1 = log_l1_from_counts(&stats.x, mu);
    if l1 == f64::NEG_INFINITY {
        return Ok(l1);
    }
    let l2 = match mode {
        L2Mode::Approx => log_l2_from_stats(&stats, gamma),
        L2Mode::Exact => log_l2_exact(g, sigma, gamma)?,
    };
    Ok(l1 + l2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(m: usize, e: &[(usize, usize)]) -> Graph {
        Graph::from_edges(m, e).unwrap()
    }

    #[test]
    fn l1_single_step_example() {
        let v = log_l1(&g(3, &[(0, 1), (0, 2)]), &NetworkOrder::identity(3), 4.0);
        assert!((v.exp() - 0.0915782).abs() < 1e-7);
    }

    #[test]
    fn l1_orphan_entrant_is_impossible() {
        let v = log_l1(&g(4, &[(0, 1), (0, 2)]), &NetworkOrder::identity(4), 2.0);
        assert_eq!(v, f64::NEG_INFINITY);
        let v = log_l1(&g(3, &[(0, 2), (1, 2)]), &NetworkOrder::identity(3), 2.0);
        assert_eq!(v, f64::NEG_INFINITY);
    }

    #[test]
    fn l2_examples() {
        let sig = NetworkOrder::identity(3);
        let star = g(3, &[(0, 1), (0, 2)]);
        assert!((log_l2_approx(&star, &sig, 0.0) - 0.5f64.ln()).abs() < 1e-15);
        assert!((log_l2_approx(&star, &sig, 1.0) - (1.0f64 / 3.0).ln()).abs() < 1e-15);
        let tri = Graph::complete(3);
        assert!(log_l2_approx(&tri, &sig, 0.0).abs() < 1e-15);
    }

    #[test]
    fn exact_matches_two_ordering_enumeration() {
        // Node 3 attaches to positions 0 and 2 in the graph 0-1, 0-2.
        let graph = g(4, &[(0, 1), (0, 2), (0, 3), (2, 3)]);
        let sig = NetworkOrder::identity(4);
        let gamma = 0.3;
        let w3 = attachment_weights(&[1, 1], gamma);
        let w4 = attachment_weights(&[2, 1, 1], gamma);
        let step4 = w4[0] * w4[2] / (1.0 - w4[0]) + w4[2] * w4[0] / (1.0 - w4[2]);
        let want = w3[0].ln() + step4.ln();
        assert!((log_l2_exact(&graph, &sig, gamma).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn exact_guard() {
        let graph = Graph::complete(11);
        assert!(matches!(
            log_l2_exact(&graph, &NetworkOrder::identity(11), 0.5),
            Err(Error::EnumerationLimit { .. })
        ));
    }

    #[test]
    fn two_nodes_have_probability_one() {
        let v = log_network_given_params(&g(2, &[(0, 1)]), &NetworkOrder::identity(2), 3.0, 0.2, L2Mode::Approx)
            .unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn trees_prefer_small_mu() {
        let tree = g(6, &[(0, 1), (1, 2), (0, 3), (3, 4), (2, 5)]);
        let sig = NetworkOrder::identity(6);
        let lo = log_network_given_params(&tree, &sig, 0.1, 0.0, L2Mode::Approx).unwrap();
        let hi = log_network_given_params(&tree, &sig, 10.0, 0.0, L2Mode::Approx).unwrap();
        assert!(lo > hi);
    }

    #[test]
    fn fenwick_prefix() {
        let mut f = Fenwick::new(5);
        for (i, v) in [3u64, 1, 4, 1, 5].iter().enumerate() {
            f.add(i, *v);
        }
        assert_eq!(f.prefix(0), 0);
        assert_eq!(f.prefix(3), 8);
        assert_eq!(f.prefix(5), 14);
    }
}

//! Network generators: the modified preferential-attachment model and the
//! Bernoulli random graph baseline.
//!
//! In the attachment model the first two entrants are joined by an edge. Each
//! later entrant at step `i` (1-based) draws a censored Poisson number of new
//! edges on `{1, ..., i-1}` and picks that many earlier entrants by weighted
//! sampling without replacement, with weights mixing the current degree and
//! the entry position.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::special::{ln_factorial, ln_poisson_upper_tail};
use crate::types::{GenerationRecord, Graph, NetworkOrder};

/// Poisson(`mu`) with the mass below 1 moved to 1 and the mass above
/// `support_max` moved to `support_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CensoredPoisson {
    pub mu: f64,
    pub support_max: usize,
}

impl CensoredPoisson {
    /// Distribution of the number of new edges at 1-based step `i`.
    pub fn at_step(i: usize, mu: f64) -> Self {
        Self { mu, support_max: i - 1 }
    }

    pub fn ln_pmf(&self, x: usize) -> Result<f64> {
        let n = self.support_max;
        if x < 1 || x > n {
            return Err(Error::OutOfSupport { value: x, max: n });
        }
        let mu = self.mu;
        if n == 1 {
            return Ok(0.0);
        }
        if mu == 0.0 {
            return Ok(if x == 1 { 0.0 } else { f64::NEG_INFINITY });
        }
        Ok(if x == 1 {
            -mu + mu.ln_1p()
        } else if x < n {
            -mu + x as f64 * mu.ln() - ln_factorial(x)
        } else {
            ln_poisson_upper_tail(n, mu)
        })
    }

    pub fn pmf(&self, x: usize) -> Result<f64> {
        self.ln_pmf(x).map(f64::exp)
    }
}

/// Probability that the entrant at 1-based step `i` brings `x` new edges.
pub fn censored_poisson_pmf(x: usize, i: usize, mu: f64) -> Result<f64> {
    if i < 2 {
        return Err(Error::invalid(format!("step index {i} has no new-edge distribution")));
    }
    if !(mu >= 0.0) {
        return Err(Error::invalid(format!("mu must be non-negative, got {mu}")));
    }
    CensoredPoisson::at_step(i, mu).pmf(x)
}

/// Draws the number of new edges at 1-based step `i >= 3`.
pub fn sample_new_edge_count<R: Rng + ?Sized>(i: usize, mu: f64, rng: &mut R) -> usize {
    debug_assert!(i >= 3);
    if mu <= 0.0 {
        return 1;
    }
    let z = Poisson::new(mu).expect("positive Poisson mean").sample(rng);
    (z as usize).clamp(1, i - 1)
}

/// Attachment weights over the first `partial_degrees.len()` entrants, given
/// their degrees in the graph formed so far.
pub fn attachment_weights(partial_degrees: &[usize], gamma: f64) -> Vec<f64> {
    let n = partial_degrees.len();
    let total_degree: usize = partial_degrees.iter().sum();
    let position_total = (n * (n + 1) / 2) as f64;
    partial_degrees
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            let degree_part = if total_degree > 0 { d as f64 / total_degree as f64 } else { 0.0 };
            (1.0 - gamma) * degree_part + gamma * (k + 1) as f64 / position_total
        })
        .collect()
}

/// Picks `x` distinct indices by successive draws proportional to the
/// weights that remain.
pub fn sample_attachment_targets<R: Rng + ?Sized>(w: &[f64], x: usize, rng: &mut R) -> Result<Vec<usize>> {
    let positive = w.iter().filter(|&&v| v > 0.0).count();
    if positive < x {
        return Err(Error::invalid(format!(
            "cannot draw {x} positions from {positive} with positive weight"
        )));
    }
    let mut remaining = w.to_vec();
    let mut chosen = Vec::with_capacity(x);
    for _ in 0..x {
        let total: f64 = remaining.iter().sum();
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = None;
        for (k, &v) in remaining.iter().enumerate() {
            if v <= 0.0 {
                continue;
            }
            acc += v;
            pick = Some(k);
            if u < acc {
                break;
            }
        }
        let k = pick.expect("a positive weight remains");
        remaining[k] = 0.0;
        chosen.push(k);
    }
    Ok(chosen)
}

/// Grows a network on the nodes of `sigma` in entry order.
///
/// Node labels in the returned graph are the values stored in `sigma`; the
/// records refer to entry positions.
pub fn generate_pa_network<R: Rng + ?Sized>(
    m: usize,
    mu: f64,
    gamma: f64,
    sigma: &NetworkOrder,
    rng: &mut R,
) -> Result<(Graph, Vec<GenerationRecord>)> {
    if m < 2 {
        return Err(Error::invalid("a network needs at least two nodes"));
    }
    if sigma.m() != m {
        return Err(Error::invalid(format!("network order has {} nodes, expected {m}", sigma.m())));
    }
    if !(mu >= 0.0) || !(0.0..=1.0).contains(&gamma) {
        return Err(Error::invalid(format!("mu = {mu}, gamma = {gamma} out of range")));
    }
    let mut g = Graph::empty(m);
    g.set_edge(sigma.node_at(0), sigma.node_at(1), true);
    let mut degrees = vec![0usize; m];
    degrees[0] = 1;
    degrees[1] = 1;
    let mut records = Vec::with_capacity(m.saturating_sub(2));
    for step in 2..m {
        let x = sample_new_edge_count(step + 1, mu, rng);
        let weights = attachment_weights(&degrees[..step], gamma);
        let selected = sample_attachment_targets(&weights, x, rng)?;
        for &q in &selected {
            g.set_edge(sigma.node_at(step), sigma.node_at(q), true);
            degrees[q] += 1;
        }
        degrees[step] = x;
        records.push(GenerationRecord { step, new_edges: x, selected, weights });
    }
    Ok((g, records))
}

/// Each pair present independently with probability `p`.
pub fn generate_brg<R: Rng + ?Sized>(m: usize, p: f64, rng: &mut R) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("edge probability {p} outside [0, 1]")));
    }
    let mut g = Graph::empty(m);
    for i in 0..m {
        for j in i + 1..m {
            if rng.random_bool(p) {
                g.set_edge(i, j, true);
            }
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pmf_examples() {
        assert_eq!(censored_poisson_pmf(1, 5, 0.0).unwrap(), 1.0);
        // e^{-4} * 5
        assert!((censored_poisson_pmf(1, 100, 4.0).unwrap() - 0.0915782).abs() < 1e-7);
        // 1 - e^{-4}(1 + 4 + 8 + 32/3)
        assert!((censored_poisson_pmf(4, 5, 4.0).unwrap() - 0.5665299).abs() < 1e-7);
    }

    #[test]
    fn pmf_normalizes() {
        for i in 3..=8 {
            for &mu in &[0.5, 4.0, 10.0] {
                let s: f64 = (1..i).map(|x| censored_poisson_pmf(x, i, mu).unwrap()).sum();
                assert!((s - 1.0).abs() < 1e-12, "i={i} mu={mu} sum={s}");
            }
        }
    }

    #[test]
    fn pmf_rejects_outside_support() {
        assert!(censored_poisson_pmf(0, 5, 1.0).is_err());
        assert!(censored_poisson_pmf(5, 5, 1.0).is_err());
    }

    #[test]
    fn edge_count_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            assert_eq!(sample_new_edge_count(7, 0.0, &mut rng), 1);
            let x = sample_new_edge_count(3, 5.0, &mut rng);
            assert!(x == 1 || x == 2);
        }
    }

    #[test]
    fn weight_examples() {
        let w = attachment_weights(&[1, 1], 0.0);
        assert_eq!(w, vec![0.5, 0.5]);
        let w = attachment_weights(&[2, 1, 1], 1.0);
        for (a, b) in w.iter().zip([1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        let w = attachment_weights(&[2, 1, 1], 0.0);
        assert_eq!(w, vec![0.5, 0.25, 0.25]);
    }

    #[test]
    fn weights_sum_to_one() {
        let degs = [3, 1, 4, 1, 5, 9, 2, 6];
        for n in 2..=degs.len() {
            for &g in &[0.0, 0.2, 0.5, 0.8, 1.0] {
                let s: f64 = attachment_weights(&degs[..n], g).iter().sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exhaustive_and_point_mass_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut all = sample_attachment_targets(&[0.1, 0.2, 0.3, 0.4], 4, &mut rng).unwrap();
        all.sort();
        assert_eq!(all, vec![0, 1, 2, 3]);
        for _ in 0..100 {
            assert_eq!(sample_attachment_targets(&[1.0, 0.0, 0.0], 1, &mut rng).unwrap(), vec![0]);
        }
        assert!(sample_attachment_targets(&[1.0, 0.0, 0.0], 2, &mut rng).is_err());
    }

    #[test]
    fn small_networks() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sigma = NetworkOrder::new(vec![1, 0]).unwrap();
        let (g, rec) = generate_pa_network(2, 3.0, 0.5, &sigma, &mut rng).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        assert!(rec.is_empty());

        let sigma = NetworkOrder::identity(40);
        for _ in 0..20 {
            let (g, rec) = generate_pa_network(40, 0.0, 0.3, &sigma, &mut rng).unwrap();
            assert_eq!(g.edge_count(), 39);
            assert!(g.is_connected());
            assert!(rec.iter().all(|r| r.new_edges == 1));
        }
    }

    #[test]
    fn edge_count_matches_records() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sigma = NetworkOrder::new((0..30).rev().collect()).unwrap();
        for _ in 0..50 {
            let (g, rec) = generate_pa_network(30, 4.0, 0.4, &sigma, &mut rng).unwrap();
            let total: usize = rec.iter().map(|r| r.new_edges).sum();
            assert_eq!(g.edge_count(), 1 + total);
            assert_eq!(g.edge_count(), g.recount_edges());
            for r in &rec {
                assert!(r.new_edges >= 1 && r.new_edges <= r.step);
                let mut s = r.selected.clone();
                s.sort();
                s.dedup();
                assert_eq!(s.len(), r.new_edges);
            }
        }
    }

    #[test]
    fn brg_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(generate_brg(10, 0.0, &mut rng).unwrap().edge_count(), 0);
        assert_eq!(generate_brg(10, 1.0, &mut rng).unwrap().edge_count(), 45);
    }
}

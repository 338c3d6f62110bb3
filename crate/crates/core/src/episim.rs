//! Markovian SI epidemic on a fixed graph.
//!
//! Every susceptible-infective edge transmits at rate `beta`, so the waiting
//! time to the next infection is exponential with rate `beta * #SI edges`
//! and the transmitting edge is uniform among the SI edges.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{Error, Result};
use crate::types::{Graph, TransmissionTree};

/// A completed epidemic, relabelled so that label `k` is the `k`-th
/// infection.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedEpidemic {
    /// Infection times, `times[0] == 0`.
    pub times: Vec<f64>,
    pub tree: TransmissionTree,
    /// `order[k]` is the original node infected `k`-th.
    pub order: Vec<usize>,
    /// Inverse of `order`.
    pub label_of: Vec<usize>,
}

impl SimulatedEpidemic {
    /// The simulation graph with nodes renamed to epidemic labels.
    pub fn relabel_graph(&self, g: &Graph) -> Graph {
        g.relabel(&self.label_of)
    }
}

/// Runs the epidemic from `initial` until every node is infected.
pub fn simulate_si<R: Rng + ?Sized>(
    g: &Graph,
    beta: f64,
    initial: usize,
    rng: &mut R,
) -> Result<SimulatedEpidemic> {
    let m = g.m();
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("infection rate must be positive, got {beta}")));
    }
    if initial >= m {
        return Err(Error::invalid(format!("initial node {initial} out of range")));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let unit = Exp::new(1.0).expect("unit rate");
    let mut infected = vec![false; m];
    let mut infector = vec![None; m];
    let mut time = vec![0.0; m];
    let mut order = Vec::with_capacity(m);
    let mut si: Vec<(usize, usize)> = Vec::new();

    infected[initial] = true;
    order.push(initial);
    si.extend(g.neighbors(initial).iter().map(|&k| (initial, k)));
    let mut now = 0.0;
    while order.len() < m {
        // Guarded by the connectivity check above.
        debug_assert!(!si.is_empty());
        now += unit.sample(rng) / (beta * si.len() as f64);
        let (src, dst) = si[rng.random_range(0..si.len())];
        infected[dst] = true;
        infector[dst] = Some(src);
        time[dst] = now;
        order.push(dst);
        si.retain(|&(_, v)| v != dst);
        si.extend(g.neighbors(dst).iter().filter(|&&k| !infected[k]).map(|&k| (dst, k)));
    }

    let mut label_of = vec![0; m];
    for (k, &v) in order.iter().enumerate() {
        label_of[v] = k;
    }
    let times = order.iter().map(|&v| time[v]).collect();
    let parents = order
        .iter()
        .map(|&v| infector[v].map(|u: usize| label_of[u]))
        .collect();
    Ok(SimulatedEpidemic {
        times,
        tree: TransmissionTree::from_infectors_unchecked(parents),
        order,
        label_of,
    })
}

/// Number infected by each grid time, counting `times[i] <= t`.
pub fn cumulative_curve(times: &[f64], grid: &[f64]) -> Vec<usize> {
    debug_assert!(times.windows(2).all(|w| w[0] <= w[1]));
    grid.iter().map(|&t| times.partition_point(|&x| x <= t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn path_graph_has_single_tree() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let e = simulate_si(&g, 0.4, 0, &mut rng).unwrap();
            assert_eq!(e.tree.infectors(), &[None, Some(0), Some(1)]);
            assert_eq!(e.times[0], 0.0);
            assert!(e.times[1] < e.times[2]);
        }
    }

    #[test]
    fn relabels_to_infection_order() {
        let g = Graph::from_edges(4, &[(3, 2), (2, 1), (1, 0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let e = simulate_si(&g, 1.0, 3, &mut rng).unwrap();
        assert_eq!(e.order, vec![3, 2, 1, 0]);
        let h = e.relabel_graph(&g);
        assert_eq!(h.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2), (2, 3)]);
        for (i, j) in e.tree.edges() {
            assert!(h.has_edge(i, j));
        }
    }

    #[test]
    fn disconnected_graph_is_an_error() {
        let g = Graph::from_edges(3, &[(0, 1)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert!(matches!(simulate_si(&g, 1.0, 0, &mut rng), Err(Error::Disconnected)));
    }

    #[test]
    fn seeded_runs_repeat() {
        let g = Graph::complete(6);
        let a = simulate_si(&g, 0.7, 2, &mut ChaCha8Rng::seed_from_u64(10)).unwrap();
        let b = simulate_si(&g, 0.7, 2, &mut ChaCha8Rng::seed_from_u64(10)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cumulative_curve_examples() {
        let t = [0.0, 1.0, 2.0];
        assert_eq!(cumulative_curve(&t, &[0.5, 1.5, 2.5]), vec![1, 2, 3]);
        assert_eq!(cumulative_curve(&t, &[-1.0]), vec![0]);
        assert_eq!(cumulative_curve(&t, &[0.0]), vec![1]);
    }
}

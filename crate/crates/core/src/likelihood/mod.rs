//! Log-likelihood of an observed epidemic given the latent graph, and of the
//! graph given the attachment parameters.
//!
//! Every function works in natural-log space and uses `-inf` for states of
//! probability zero.

mod cache;
mod network;

pub use cache::NetworkCache;
pub use network::{
    log_l1, log_l2_approx, log_l2_exact, log_network_given_params, new_edge_counts, L2Mode,
    EXACT_ENUMERATION_LIMIT,
};

use statrs::function::gamma::ln_gamma;

use crate::error::Result;
use crate::special::ln_factorial;
use crate::types::{EpidemicData, Graph, NetworkOrder, ParamState, Priors, TransmissionTree};

/// The four log factors of the likelihood and the edge-time sum that drives
/// the infection-time factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLikComponents {
    pub log_tree: f64,
    pub log_times: f64,
    pub log_l1: f64,
    pub log_l2: f64,
    pub si_sum: f64,
}

impl LogLikComponents {
    pub fn total(&self) -> f64 {
        self.log_tree + self.log_times + self.log_l1 + self.log_l2
    }
}

/// For each node, the number of its neighbours with a smaller label.
pub fn earlier_neighbor_counts(g: &Graph) -> Vec<usize> {
    (0..g.m()).map(|j| g.neighbors(j).iter().filter(|&&i| i < j).count()).collect()
}

/// `ln pi(P | G)`: each infectee picks its infector uniformly among its
/// earlier-infected neighbours.
pub fn log_tree_given_graph(p: &TransmissionTree, g: &Graph) -> f64 {
    if p.m() != g.m() || p.infector(0).is_some() {
        return f64::NEG_INFINITY;
    }
    let mut total = 0.0;
    for j in 1..p.m() {
        let Some(i) = p.infector(j) else {
            return f64::NEG_INFINITY;
        };
        if i >= j || !g.has_edge(i, j) {
            return f64::NEG_INFINITY;
        }
        let n = g.neighbors(j).iter().filter(|&&k| k < j).count();
        total -= (n as f64).ln();
    }
    total
}

/// Sum over present edges of the gap between the two infection times.
pub fn si_edge_time_sum(g: &Graph, times: &[f64]) -> f64 {
    g.edges().map(|(i, j)| (times[j] - times[i]).abs()).sum()
}

/// Change in [`si_edge_time_sum`] when the pair `{i, j}` is switched on.
#[inline]
pub fn si_toggle_gap(times: &[f64], i: usize, j: usize) -> f64 {
    (times[j] - times[i]).abs()
}

/// `ln pi(I | G, beta)` from a precomputed edge-time sum.
#[inline]
pub fn log_times_from_sum(m: usize, si_sum: f64, beta: f64) -> f64 {
    (m as f64 - 1.0) * beta.ln() - beta * si_sum
}

/// `ln pi(I | G, beta) = (m - 1) ln beta - beta * si_sum`.
pub fn log_times_given_graph(times: &[f64], g: &Graph, beta: f64) -> f64 {
    log_times_from_sum(times.len(), si_edge_time_sum(g, times), beta)
}

/// Log density of Gamma(shape, rate) at `x`.
pub fn ln_gamma_density(x: f64, shape: f64, rate: f64) -> f64 {
    if !(x > 0.0) {
        return f64::NEG_INFINITY;
    }
    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
}

/// Log prior of the parameters and the network order: Gamma priors on the
/// infection rate and edge-count parameter, uniform mixing weight and a
/// uniform order.
pub fn log_prior(params: &ParamState, m: usize, priors: &Priors) -> f64 {
    if !(0.0..=1.0).contains(&params.gamma) {
        return f64::NEG_INFINITY;
    }
    ln_gamma_density(params.beta, priors.a_beta, priors.b_beta)
        + ln_gamma_density(params.mu, priors.a_mu, priors.b_mu)
        - ln_factorial(m)
}

/// Whether `g` agrees with every observed pair.
pub fn respects_known_edges(g: &Graph, data: &EpidemicData) -> bool {
    data.known_edges.iter().all(|((i, j), present)| g.has_edge(i, j) == present)
}

/// All likelihood factors for one state.
pub fn log_likelihood_components(
    params: &ParamState,
    sigma: &NetworkOrder,
    g: &Graph,
    data: &EpidemicData,
) -> LogLikComponents {
    let si_sum = si_edge_time_sum(g, &data.times);
    LogLikComponents {
        log_tree: log_tree_given_graph(&data.tree, g),
        log_times: log_times_from_sum(data.m(), si_sum, params.beta),
        log_l1: log_l1(g, sigma, params.mu),
        log_l2: log_l2_approx(g, sigma, params.gamma),
        si_sum,
    }
}

/// Unnormalized log posterior of `(beta, mu, gamma, sigma, G)`.
pub fn log_joint(
    params: &ParamState,
    sigma: &NetworkOrder,
    g: &Graph,
    data: &EpidemicData,
    priors: &Priors,
) -> f64 {
    if !respects_known_edges(g, data) {
        return f64::NEG_INFINITY;
    }
    let c = log_likelihood_components(params, sigma, g, data);
    let like = c.total();
    if like == f64::NEG_INFINITY {
        return like;
    }
    like + log_prior(params, data.m(), priors)
}

/// `ln` of the infection-time factor with the infection rate integrated
/// against its Gamma prior, up to a constant: `-(a + m - 1) ln(b + si_sum)`.
pub fn log_integrated_beta_kernel(g: &Graph, data: &EpidemicData, priors: &Priors) -> f64 {
    log_integrated_beta_from_sum(data.m(), si_edge_time_sum(g, &data.times), priors)
}

#[inline]
pub fn log_integrated_beta_from_sum(m: usize, si_sum: f64, priors: &Priors) -> f64 {
    -(priors.a_beta + m as f64 - 1.0) * (priors.b_beta + si_sum).ln()
}

/// Same as [`log_network_given_params`] with the approximate attachment
/// term; convenience for callers that cannot hit the enumeration guard.
pub fn log_network_approx(g: &Graph, sigma: &NetworkOrder, mu: f64, gamma: f64) -> f64 {
    log_network_given_params(g, sigma, mu, gamma, L2Mode::Approx).expect("approximate form never fails")
}

/// Checked evaluation of [`log_network_given_params`] in exact mode.
pub fn log_network_exact(g: &Graph, sigma: &NetworkOrder, mu: f64, gamma: f64) -> Result<f64> {
    log_network_given_params(g, sigma, mu, gamma, L2Mode::Exact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::KnownEdges;

    fn tree(p: &[Option<usize>]) -> TransmissionTree {
        TransmissionTree::new(p.to_vec()).unwrap()
    }

    #[test]
    fn tree_examples() {
        let star = tree(&[None, Some(0), Some(0)]);
        assert!((log_tree_given_graph(&star, &Graph::complete(3)) - 0.5f64.ln()).abs() < 1e-15);
        let chain = tree(&[None, Some(0), Some(1)]);
        let path = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(log_tree_given_graph(&chain, &path), 0.0);
        assert_eq!(log_tree_given_graph(&star, &path), f64::NEG_INFINITY);
    }

    #[test]
    fn time_sum_examples() {
        let t = [0.0, 1.0, 2.0];
        assert_eq!(si_edge_time_sum(&Graph::empty(3), &t), 0.0);
        let mut g = Graph::complete(3);
        assert_eq!(si_edge_time_sum(&g, &t), 4.0);
        g.set_edge(0, 2, false);
        assert_eq!(si_edge_time_sum(&g, &t), 4.0 - si_toggle_gap(&t, 0, 2));
        assert_eq!(si_edge_time_sum(&g, &t), 2.0);
    }

    #[test]
    fn time_density_examples() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        assert!((log_times_given_graph(&[0.0, 2.0], &g, 0.4) - (-1.7162907)).abs() < 1e-7);
        let v = log_times_given_graph(&[0.0, 1.0, 2.0], &Graph::complete(3), 0.4);
        assert!((v - (2.0 * 0.4f64.ln() - 1.6)).abs() < 1e-14);
    }

    #[test]
    fn integrated_kernel_example() {
        let d = EpidemicData::new(vec![0.0, 1.0, 2.0], tree(&[None, Some(0), Some(0)]), KnownEdges::new()).unwrap();
        let v = log_integrated_beta_kernel(&Graph::complete(3), &d, &Priors::default());
        assert!((v - (-3.0 * 4.001f64.ln())).abs() < 1e-12);
        assert!((v - (-4.1596330)).abs() < 1e-7);
    }

    #[test]
    fn joint_minimal_and_missing_tree_edge() {
        let d = EpidemicData::new(vec![0.0, 2.0], tree(&[None, Some(0)]), KnownEdges::new()).unwrap();
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let params = ParamState::new(0.4, 1.5, 0.3).unwrap();
        let priors = Priors::default();
        let sigma = NetworkOrder::identity(2);
        let want = log_times_given_graph(&d.times, &g, 0.4) + log_prior(&params, 2, &priors);
        assert!((log_joint(&params, &sigma, &g, &d, &priors) - want).abs() < 1e-12);
        assert_eq!(log_joint(&params, &sigma, &Graph::empty(2), &d, &priors), f64::NEG_INFINITY);
    }

    #[test]
    fn gamma_density_matches_exponential() {
        assert!((ln_gamma_density(2.0, 1.0, 0.5) - (0.5f64.ln() - 1.0)).abs() < 1e-14);
    }
}

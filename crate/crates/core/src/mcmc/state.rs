//! Sampler state with cached likelihood components.

use crate::error::{Error, Result};
use crate::likelihood::{
    log_likelihood_components, log_prior, log_times_from_sum, si_edge_time_sum, LogLikComponents, NetworkCache,
};
use crate::types::{EpidemicData, Graph, NetworkOrder, ParamState, Priors};

/// Which pairs the edge sweep may not change: tree pairs and observed pairs.
#[derive(Debug, Clone)]
pub struct ClampMask {
    m: usize,
    clamped: Vec<bool>,
}

impl ClampMask {
    pub fn from_data(data: &EpidemicData) -> Self {
        let m = data.m();
        let mut clamped = vec![false; m * m];
        let mut set = |i: usize, j: usize| {
            clamped[i * m + j] = true;
            clamped[j * m + i] = true;
        };
        for (i, j) in data.tree.edges() {
            set(i, j);
        }
        for ((i, j), _) in data.known_edges.iter() {
            set(i, j);
        }
        Self { m, clamped }
    }

    #[inline]
    pub fn is_clamped(&self, i: usize, j: usize) -> bool {
        self.clamped[i * self.m + j]
    }

    pub fn free_pairs(&self) -> usize {
        let mut n = 0;
        for i in 0..self.m {
            for j in i + 1..self.m {
                n += !self.is_clamped(i, j) as usize;
            }
        }
        n
    }
}

/// Smallest graph consistent with the data: the tree plus every known edge.
pub fn initial_graph(data: &EpidemicData) -> Graph {
    let mut g = Graph::empty(data.m());
    for (i, j) in data.tree.edges() {
        g.set_edge(i, j, true);
    }
    for ((i, j), present) in data.known_edges.iter() {
        if present {
            g.set_edge(i, j, true);
        }
    }
    g
}

/// Current `(beta, mu, gamma, sigma, G)` and everything needed to update it
/// cheaply.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub params: ParamState,
    pub sigma: NetworkOrder,
    pub g: Graph,
    /// Cached factors, kept consistent with the fields above.
    pub cache: LogLikComponents,
    /// Running sum over present edges of the infection-time gaps.
    pub si_sum: f64,
    pub(crate) network: NetworkCache,
    /// Earlier-infected neighbour count per node.
    pub(crate) earlier: Vec<usize>,
    pub(crate) clamp: ClampMask,
}

impl ChainState {
    /// Builds a state and checks that it has positive posterior density.
    pub fn new(data: &EpidemicData, params: ParamState, sigma: NetworkOrder, g: Graph) -> Result<Self> {
        let m = data.m();
        if g.m() != m || sigma.m() != m {
            return Err(Error::invalid(format!(
                "state sizes (graph {}, order {}) do not match data size {m}",
                g.m(),
                sigma.m()
            )));
        }
        let clamp = ClampMask::from_data(data);
        for (i, j) in data.tree.edges() {
            if !g.has_edge(i, j) {
                return Err(Error::invalid(format!("tree edge ({}, {}) missing from graph", i + 1, j + 1)));
            }
        }
        for ((i, j), present) in data.known_edges.iter() {
            if g.has_edge(i, j) != present {
                return Err(Error::invalid(format!("graph disagrees with known pair ({}, {})", i + 1, j + 1)));
            }
        }
        let network = NetworkCache::build(&g, &sigma, params.mu, params.gamma);
        if !network.is_admissible() {
            return Err(Error::invalid("graph cannot arise from the attachment model under this order"));
        }
        let earlier = crate::likelihood::earlier_neighbor_counts(&g);
        let si_sum = si_edge_time_sum(&g, &data.times);
        let mut state = Self {
            params,
            sigma,
            g,
            cache: LogLikComponents { log_tree: 0.0, log_times: 0.0, log_l1: 0.0, log_l2: 0.0, si_sum },
            si_sum,
            network,
            earlier,
            clamp,
        };
        state.refresh(data);
        Ok(state)
    }

    /// Rebuilds the cached totals and the edge-time sum from the incremental
    /// structures, removing accumulated rounding.
    pub(crate) fn refresh(&mut self, data: &EpidemicData) {
        self.network.resync();
        self.si_sum = si_edge_time_sum(&self.g, &data.times);
        self.cache = LogLikComponents {
            log_tree: -self.earlier.iter().skip(1).map(|&n| (n as f64).ln()).sum::<f64>(),
            log_times: log_times_from_sum(data.m(), self.si_sum, self.params.beta),
            log_l1: self.network.log_l1(),
            log_l2: self.network.log_l2(),
            si_sum: self.si_sum,
        };
    }

    /// Components recomputed from scratch, ignoring every cache.
    pub fn recompute(&self, data: &EpidemicData) -> LogLikComponents {
        log_likelihood_components(&self.params, &self.sigma, &self.g, data)
    }

    /// Log posterior kernel from the cached components.
    pub fn log_joint(&self, data: &EpidemicData, priors: &Priors) -> f64 {
        self.cache.log_tree
            + self.cache.log_times
            + self.cache.log_l1
            + self.cache.log_l2
            + log_prior(&self.params, data.m(), priors)
    }

    pub fn clamp(&self) -> &ClampMask {
        &self.clamp
    }
}

//! Metropolis-within-Gibbs sampler over `(beta, mu, gamma, sigma, G)` given
//! infection times and the transmission tree, and the Bernoulli random graph
//! baseline sampler over `(beta, p, G)`.
//!
//! One iteration of the attachment-model sampler updates `mu`, `gamma`
//! (unless pinned), the network order, every unclamped pair of the graph
//! with the infection rate integrated out, and finally the infection rate
//! from its full conditional given the new graph.

mod adapt;
mod brg;
mod kernels;
mod state;

pub use adapt::{adapt_proposal, adapt_step, AcceptCounter, AdaptiveScale, ADAPT_BATCH};
pub use brg::{brg_edge_conditional, gibbs_p, run_brg_chain, BrgState};
pub use kernels::{
    beta_conditional, draw_insertion, edge_branch_logs, edge_conditional, gibbs_beta, gibbs_edge,
    propose_sigma_insertion, rwm_gamma, rwm_mu, sweep_edges, sweep_edges_random, update_sigma,
};
pub use state::{initial_graph, ChainState, ClampMask};

use rand::Rng;

use crate::error::{Error, Result};
use crate::types::{BrgParams, EpidemicData, NetworkOrder, ParamState, Priors};

/// Network model fitted by the sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModelKind {
    #[default]
    Pa,
    Brg,
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pa" => Ok(ModelKind::Pa),
            "brg" => Ok(ModelKind::Brg),
            other => Err(Error::Config(format!("unknown model {other:?}, expected pa or brg"))),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::Pa => "pa",
            ModelKind::Brg => "brg",
        })
    }
}

/// Sampler settings.
#[derive(Debug, Clone, PartialEq)]
pub struct McmcConfig {
    pub iterations: usize,
    pub burnin: usize,
    /// Pinned mixing weight; `None` samples it.
    pub fix_gamma: Option<f64>,
    pub target_accept: f64,
    /// Starting edge-count parameter; `None` uses the tree-degree rule.
    pub init_mu: Option<f64>,
    pub init_gamma: f64,
    pub proposal_sd_mu: f64,
    pub proposal_sd_gamma: f64,
    /// Order proposals per iteration; `None` means `m`.
    pub sigma_moves_per_iter: Option<usize>,
    pub seed: u64,
    pub model: ModelKind,
    pub thin: usize,
    /// Visit pairs in a fresh random order each sweep.
    pub random_scan: bool,
    /// Keep every `k`-th kept order in the trace.
    pub sigma_sample_every: Option<usize>,
    pub brg: BrgParams,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            iterations: 20_000,
            burnin: 10_000,
            fix_gamma: Some(0.0),
            target_accept: 0.44,
            init_mu: None,
            init_gamma: 0.5,
            proposal_sd_mu: 0.5,
            proposal_sd_gamma: 0.1,
            sigma_moves_per_iter: None,
            seed: 1,
            model: ModelKind::Pa,
            thin: 1,
            random_scan: false,
            sigma_sample_every: None,
            brg: BrgParams::default(),
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burnin >= self.iterations {
            return Err(Error::Config(format!(
                "burn-in ({}) must be smaller than the number of iterations ({})",
                self.burnin, self.iterations
            )));
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return Err(Error::Config(format!("target acceptance {} outside (0, 1)", self.target_accept)));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be at least 1".into()));
        }
        if !(self.proposal_sd_mu > 0.0) || !(self.proposal_sd_gamma > 0.0) {
            return Err(Error::Config("proposal scales must be positive".into()));
        }
        if let Some(g) = self.fix_gamma {
            if !(0.0..=1.0).contains(&g) {
                return Err(Error::Config(format!("pinned gamma {g} outside [0, 1]")));
            }
        }
        if !(0.0..=1.0).contains(&self.init_gamma) {
            return Err(Error::Config(format!("initial gamma {} outside [0, 1]", self.init_gamma)));
        }
        if let Some(mu) = self.init_mu {
            if !(mu > 0.0) {
                return Err(Error::Config(format!("initial mu {mu} must be positive")));
            }
        }
        if self.sigma_sample_every == Some(0) {
            return Err(Error::Config("sigma_sample_every must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of iterations recorded after burn-in and thinning.
    pub fn kept(&self) -> usize {
        (self.iterations - self.burnin).div_ceil(self.thin)
    }
}

/// Per-move acceptance counts over the whole run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Acceptance {
    pub mu: AcceptCounter,
    pub gamma: AcceptCounter,
    pub sigma: AcceptCounter,
    /// Pair visits and pair values changed.
    pub edges: AcceptCounter,
}

/// Index of the unordered pair `{i, j}` in lexicographic order.
#[inline]
pub fn pair_index(m: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    i * m - i * (i + 1) / 2 + (j - i - 1)
}

/// Recorded output of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub model: ModelKind,
    pub m: usize,
    /// Iteration number of each kept draw (0-based over the whole run).
    pub iteration: Vec<usize>,
    pub beta: Vec<f64>,
    /// Attachment model only.
    pub mu: Vec<f64>,
    /// Attachment model only.
    pub gamma: Vec<f64>,
    /// Random graph model only.
    pub p: Vec<f64>,
    pub log_joint: Vec<f64>,
    pub edge_count: Vec<usize>,
    /// Kept draws containing each pair, indexed by [`pair_index`].
    pub edge_tally: Vec<u64>,
    pub sigma_samples: Vec<Vec<usize>>,
    pub acceptance: Acceptance,
    pub final_sd_mu: f64,
    pub final_sd_gamma: f64,
}

impl Trace {
    pub(crate) fn new(model: ModelKind, m: usize, capacity: usize) -> Self {
        Self {
            model,
            m,
            iteration: Vec::with_capacity(capacity),
            beta: Vec::with_capacity(capacity),
            mu: Vec::new(),
            gamma: Vec::new(),
            p: Vec::new(),
            log_joint: Vec::with_capacity(capacity),
            edge_count: Vec::with_capacity(capacity),
            edge_tally: vec![0; m * m.saturating_sub(1) / 2],
            sigma_samples: Vec::new(),
            acceptance: Acceptance::default(),
            final_sd_mu: 0.0,
            final_sd_gamma: 0.0,
        }
    }

    pub fn kept(&self) -> usize {
        self.beta.len()
    }

    pub fn tally(&self, i: usize, j: usize) -> u64 {
        self.edge_tally[pair_index(self.m, i, j)]
    }

    pub(crate) fn record_graph(&mut self, g: &crate::types::Graph) {
        for (i, j) in g.edges() {
            self.edge_tally[pair_index(self.m, i, j)] += 1;
        }
        self.edge_count.push(g.edge_count());
    }
}

/// Starting edge-count parameter: one less than the mean tree degree, but at
/// least 0.5.
pub fn default_initial_mu(m: usize) -> f64 {
    let mean_degree = 2.0 * (m as f64 - 1.0) / m as f64;
    (mean_degree - 1.0).max(0.5)
}

/// Attachment-model sampler with its tuning state, usable one iteration at a
/// time.
#[derive(Debug, Clone)]
pub struct PaSampler {
    pub state: ChainState,
    pub mu_scale: AdaptiveScale,
    pub gamma_scale: AdaptiveScale,
    pub acceptance: Acceptance,
    config: McmcConfig,
}

impl PaSampler {
    /// Starts from the tree graph, the identity order and a Gibbs draw of the
    /// infection rate.
    pub fn new<R: Rng + ?Sized>(data: &EpidemicData, priors: &Priors, config: &McmcConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        priors.validate()?;
        let m = data.m();
        if m < 2 {
            return Err(Error::invalid("the sampler needs at least two infections"));
        }
        let mu = config.init_mu.unwrap_or_else(|| default_initial_mu(m));
        let gamma = config.fix_gamma.unwrap_or(config.init_gamma);
        let params = ParamState { beta: 1.0, mu, gamma };
        let state = ChainState::new(data, params, NetworkOrder::identity(m), initial_graph(data))?;
        let mut sampler = Self::with_state(state, config);
        gibbs_beta(&mut sampler.state, data, priors, rng);
        Ok(sampler)
    }

    pub fn with_state(state: ChainState, config: &McmcConfig) -> Self {
        Self {
            state,
            mu_scale: AdaptiveScale::new(config.proposal_sd_mu),
            gamma_scale: AdaptiveScale::new(config.proposal_sd_gamma),
            acceptance: Acceptance::default(),
            config: config.clone(),
        }
    }

    pub fn config(&self) -> &McmcConfig {
        &self.config
    }

    /// One full sweep of all moves.
    pub fn iterate<R: Rng + ?Sized>(&mut self, data: &EpidemicData, priors: &Priors, adapting: bool, rng: &mut R) {
        let target = self.config.target_accept;
        let st = &mut self.state;

        let ok = rwm_mu(st, priors, self.mu_scale.sd, rng);
        self.acceptance.mu.record(ok);
        self.mu_scale.record(ok, adapting, target);

        if self.config.fix_gamma.is_none() {
            let ok = rwm_gamma(st, self.gamma_scale.sd, rng);
            self.acceptance.gamma.record(ok);
            self.gamma_scale.record(ok, adapting, target);
        }

        let moves = self.config.sigma_moves_per_iter.unwrap_or(data.m());
        let acc = update_sigma(st, moves, rng);
        self.acceptance.sigma.add(acc as u64, moves as u64);

        let free = st.clamp.free_pairs();
        let changed = if self.config.random_scan {
            sweep_edges_random(st, data, priors, rng)
        } else {
            sweep_edges(st, data, priors, rng)
        };
        self.acceptance.edges.add(changed as u64, free as u64);

        gibbs_beta(st, data, priors, rng);
    }
}

/// Runs the sampler selected by `config.model`.
pub fn run_chain<R: Rng + ?Sized>(data: &EpidemicData, priors: &Priors, config: &McmcConfig, rng: &mut R) -> Result<Trace> {
    if config.model == ModelKind::Brg {
        return run_brg_chain(data, priors, &config.brg, config, rng);
    }
    let mut sampler = PaSampler::new(data, priors, config, rng)?;
    let m = data.m();
    let mut trace = Trace::new(ModelKind::Pa, m, config.kept());
    let mut kept_index = 0usize;
    for it in 0..config.iterations {
        let burning = it < config.burnin;
        sampler.iterate(data, priors, burning, rng);
        if burning || (it - config.burnin) % config.thin != 0 {
            continue;
        }
        let st = &sampler.state;
        trace.iteration.push(it);
        trace.beta.push(st.params.beta);
        trace.mu.push(st.params.mu);
        trace.gamma.push(st.params.gamma);
        trace.log_joint.push(st.log_joint(data, priors));
        trace.record_graph(&st.g);
        if let Some(every) = config.sigma_sample_every {
            if kept_index % every == 0 {
                trace.sigma_samples.push(st.sigma.as_slice().to_vec());
            }
        }
        kept_index += 1;
    }
    trace.acceptance = sampler.acceptance;
    trace.final_sd_mu = sampler.mu_scale.sd;
    trace.final_sd_gamma = sampler.gamma_scale.sd;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_index_is_lexicographic() {
        let m = 5;
        let mut k = 0;
        for i in 0..m {
            for j in i + 1..m {
                assert_eq!(pair_index(m, i, j), k);
                assert_eq!(pair_index(m, j, i), k);
                k += 1;
            }
        }
    }

    #[test]
    fn config_guards() {
        let c = McmcConfig { iterations: 100, burnin: 100, ..McmcConfig::default() };
        assert!(c.validate().is_err());
        let c = McmcConfig { target_accept: 1.0, ..McmcConfig::default() };
        assert!(c.validate().is_err());
        assert!(McmcConfig::default().validate().is_ok());
        assert_eq!(McmcConfig { iterations: 10, burnin: 3, thin: 2, ..McmcConfig::default() }.kept(), 4);
    }

    #[test]
    fn initial_mu_rule() {
        assert_eq!(default_initial_mu(2), 0.5);
        assert!((default_initial_mu(70) - (2.0 * 69.0 / 70.0 - 1.0)).abs() < 1e-15);
    }
}

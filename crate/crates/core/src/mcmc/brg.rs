//! Sampler for the Bernoulli random graph baseline, where every pair is
//! present independently with probability `p`.

use rand::Rng;
use rand_distr::{Beta, Distribution};
use statrs::function::beta::ln_beta;

use crate::error::{Error, Result};
use crate::likelihood::{ln_gamma_density, log_times_from_sum, si_edge_time_sum, si_toggle_gap};
use crate::special::logistic_choice;
use crate::types::{BrgParams, EpidemicData, Graph, Priors};

use super::kernels::{beta_conditional, draw_gamma, edge_branch_logs};
use super::state::{initial_graph, ClampMask};
use super::{pair_index, AcceptCounter, McmcConfig, ModelKind, Trace};

/// State of the baseline sampler.
#[derive(Debug, Clone)]
pub struct BrgState {
    pub beta: f64,
    pub p: f64,
    pub g: Graph,
    pub si_sum: f64,
    earlier: Vec<usize>,
    clamp: ClampMask,
}

impl BrgState {
    pub fn new(data: &EpidemicData, beta: f64, p: f64, g: Graph) -> Result<Self> {
        for (i, j) in data.tree.edges() {
            if !g.has_edge(i, j) {
                return Err(Error::invalid(format!("tree edge ({}, {}) missing from graph", i + 1, j + 1)));
            }
        }
        Ok(Self {
            beta,
            p,
            si_sum: si_edge_time_sum(&g, &data.times),
            earlier: crate::likelihood::earlier_neighbor_counts(&g),
            clamp: ClampMask::from_data(data),
            g,
        })
    }

    /// Log posterior kernel of `(beta, p, G)`.
    pub fn log_joint(&self, data: &EpidemicData, priors: &Priors, brg: &BrgParams) -> f64 {
        let m = data.m();
        let pairs = (m * (m - 1) / 2) as f64;
        let edges = self.g.edge_count() as f64;
        let tree = -self.earlier.iter().skip(1).map(|&n| (n as f64).ln()).sum::<f64>();
        tree + log_times_from_sum(m, self.si_sum, self.beta)
            + edges * self.p.ln()
            + (pairs - edges) * (1.0 - self.p).ln()
            + ln_gamma_density(self.beta, priors.a_beta, priors.b_beta)
            + (brg.a_p - 1.0) * self.p.ln()
            + (brg.b_p - 1.0) * (1.0 - self.p).ln()
            - ln_beta(brg.a_p, brg.b_p)
    }
}

/// Draws `p` from its conjugate Beta full conditional.
pub fn gibbs_p<R: Rng + ?Sized>(state: &mut BrgState, brg: &BrgParams, rng: &mut R) -> f64 {
    let m = state.g.m();
    let pairs = (m * (m - 1) / 2) as f64;
    let edges = state.g.edge_count() as f64;
    let p = Beta::new(brg.a_p + edges, brg.b_p + pairs - edges).expect("positive beta parameters").sample(rng);
    // Keep p strictly inside (0, 1) so the log odds stay finite.
    state.p = p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
    state.p
}

/// Probability that the pair `(s, t)` is present given everything else, with
/// the infection rate integrated out.
pub fn brg_edge_conditional(state: &BrgState, data: &EpidemicData, priors: &Priors, s: usize, t: usize) -> f64 {
    let (s, t) = if s < t { (s, t) } else { (t, s) };
    let present = state.g.has_edge(s, t);
    let gap = si_toggle_gap(&data.times, s, t);
    let net_delta = state.p.ln() - (1.0 - state.p).ln();
    let earlier = state.earlier[t] - present as usize;
    let si0 = state.si_sum - if present { gap } else { 0.0 };
    let (log0, log1) = edge_branch_logs(net_delta, earlier, si0, gap, data.m(), priors);
    logistic_choice(log0, log1)
}

fn sweep<R: Rng + ?Sized>(state: &mut BrgState, data: &EpidemicData, priors: &Priors, rng: &mut R) -> usize {
    let m = data.m();
    let mut changed = 0;
    for s in 0..m {
        for t in s + 1..m {
            if state.clamp.is_clamped(s, t) {
                continue;
            }
            let present = state.g.has_edge(s, t);
            let p1 = brg_edge_conditional(state, data, priors, s, t);
            let next = rng.random::<f64>() < p1;
            if next != present {
                changed += 1;
                state.g.set_edge(s, t, next);
                let gap = si_toggle_gap(&data.times, s, t);
                if next {
                    state.earlier[t] += 1;
                    state.si_sum += gap;
                } else {
                    state.earlier[t] -= 1;
                    state.si_sum -= gap;
                }
            }
        }
    }
    state.si_sum = si_edge_time_sum(&state.g, &data.times);
    changed
}

/// Runs the baseline sampler: `p`, then every unclamped pair, then the
/// infection rate, each iteration.
pub fn run_brg_chain<R: Rng + ?Sized>(
    data: &EpidemicData,
    priors: &Priors,
    brg: &BrgParams,
    config: &McmcConfig,
    rng: &mut R,
) -> Result<Trace> {
    config.validate()?;
    priors.validate()?;
    let m = data.m();
    if m < 2 {
        return Err(Error::invalid("the sampler needs at least two infections"));
    }
    if !(brg.p > 0.0 && brg.p < 1.0 && brg.a_p > 0.0 && brg.b_p > 0.0) {
        return Err(Error::Config(format!("invalid random graph settings {brg:?}")));
    }
    let mut state = BrgState::new(data, 1.0, brg.p, initial_graph(data))?;
    let (shape, rate) = beta_conditional(m, state.si_sum, priors);
    state.beta = draw_gamma(shape, rate, rng);

    let mut trace = Trace::new(ModelKind::Brg, m, config.kept());
    let free = state.clamp.free_pairs() as u64;
    let mut edges = AcceptCounter::default();
    for it in 0..config.iterations {
        gibbs_p(&mut state, brg, rng);
        let changed = sweep(&mut state, data, priors, rng);
        edges.add(changed as u64, free);
        let (shape, rate) = beta_conditional(m, state.si_sum, priors);
        state.beta = draw_gamma(shape, rate, rng);

        if it < config.burnin || (it - config.burnin) % config.thin != 0 {
            continue;
        }
        trace.iteration.push(it);
        trace.beta.push(state.beta);
        trace.p.push(state.p);
        trace.log_joint.push(state.log_joint(data, priors, brg));
        for (i, j) in state.g.edges() {
            trace.edge_tally[pair_index(m, i, j)] += 1;
        }
        trace.edge_count.push(state.g.edge_count());
    }
    trace.acceptance.edges = edges;
    Ok(trace)
}

//! Individual moves of the Metropolis-within-Gibbs sampler.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};

use crate::likelihood::{ln_gamma_density, log_integrated_beta_from_sum, log_times_from_sum, si_toggle_gap};
use crate::special::logistic_choice;
use crate::types::{EpidemicData, NetworkOrder, Priors};

use super::state::ChainState;

/// Shape and rate of the infection-rate full conditional.
pub fn beta_conditional(m: usize, si_sum: f64, priors: &Priors) -> (f64, f64) {
    (priors.a_beta + m as f64 - 1.0, priors.b_beta + si_sum)
}

pub(crate) fn draw_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    Gamma::new(shape, 1.0 / rate).expect("valid gamma parameters").sample(rng)
}

/// Draws the infection rate from its Gamma full conditional and updates the
/// cached time factor.
pub fn gibbs_beta<R: Rng + ?Sized>(state: &mut ChainState, data: &EpidemicData, priors: &Priors, rng: &mut R) -> f64 {
    let (shape, rate) = beta_conditional(data.m(), state.si_sum, priors);
    let beta = draw_gamma(shape, rate, rng);
    state.params.beta = beta;
    state.cache.log_times = log_times_from_sum(data.m(), state.si_sum, beta);
    beta
}

fn metropolis<R: Rng + ?Sized>(log_ratio: f64, rng: &mut R) -> bool {
    if log_ratio >= 0.0 {
        return true;
    }
    if log_ratio.is_nan() || log_ratio == f64::NEG_INFINITY {
        return false;
    }
    rng.random::<f64>().ln() < log_ratio
}

/// Random-walk Metropolis step for the edge-count parameter. Only the `L1`
/// factor and the prior enter the ratio.
pub fn rwm_mu<R: Rng + ?Sized>(state: &mut ChainState, priors: &Priors, proposal_sd: f64, rng: &mut R) -> bool {
    let mu = state.params.mu;
    let proposal = mu + Normal::new(0.0, proposal_sd).expect("positive sd").sample(rng);
    if !(proposal > 0.0) {
        return false;
    }
    let l1 = state.network.l1_with_mu(proposal);
    let log_ratio = l1 + ln_gamma_density(proposal, priors.a_mu, priors.b_mu)
        - state.cache.log_l1
        - ln_gamma_density(mu, priors.a_mu, priors.b_mu);
    if !metropolis(log_ratio, rng) {
        return false;
    }
    state.params.mu = proposal;
    state.network.set_mu(proposal);
    state.cache.log_l1 = state.network.log_l1();
    true
}

/// Random-walk Metropolis step for the mixing weight under its uniform
/// prior. Only the `L2` factor enters the ratio.
pub fn rwm_gamma<R: Rng + ?Sized>(state: &mut ChainState, proposal_sd: f64, rng: &mut R) -> bool {
    let proposal = state.params.gamma + Normal::new(0.0, proposal_sd).expect("positive sd").sample(rng);
    if !(0.0..=1.0).contains(&proposal) {
        return false;
    }
    let l2 = state.network.l2_with_gamma(proposal);
    if !metropolis(l2 - state.cache.log_l2, rng) {
        return false;
    }
    state.params.gamma = proposal;
    state.network.set_gamma(proposal);
    state.cache.log_l2 = state.network.log_l2();
    true
}

/// Draws the positions of an insertion move, uniformly and with replacement.
pub fn draw_insertion<R: Rng + ?Sized>(m: usize, rng: &mut R) -> (usize, usize) {
    (rng.random_range(0..m), rng.random_range(0..m))
}

/// Removes the element at a uniform position and reinserts it at another
/// uniform position.
pub fn propose_sigma_insertion<R: Rng + ?Sized>(sigma: &NetworkOrder, rng: &mut R) -> NetworkOrder {
    let (i, j) = draw_insertion(sigma.m(), rng);
    let mut next = sigma.clone();
    next.insert_move(i, j);
    next
}

/// `moves` independent Metropolis steps on the network order. Returns the
/// number accepted.
pub fn update_sigma<R: Rng + ?Sized>(state: &mut ChainState, moves: usize, rng: &mut R) -> usize {
    let m = state.sigma.m();
    let mut accepted = 0;
    for _ in 0..moves {
        let (i, j) = draw_insertion(m, rng);
        if i == j {
            accepted += 1;
            continue;
        }
        let mut proposal = state.sigma.clone();
        proposal.insert_move(i, j);
        let value = state.network.evaluate_order(&state.g, &proposal);
        if metropolis(value - state.network.total(), rng) {
            state.network.rebuild(&state.g, &proposal);
            state.sigma = proposal;
            state.cache.log_l1 = state.network.log_l1();
            state.cache.log_l2 = state.network.log_l2();
            accepted += 1;
        }
    }
    accepted
}

/// The two branch log-kernels of the single-pair conditional with the
/// infection rate integrated out, up to a shared constant.
///
/// `net_delta` is `ln pi(G1) - ln pi(G0)` for the network model, `earlier`
/// the number of earlier-infected neighbours of the later node excluding the
/// pair, `si0` the edge-time sum without the pair and `gap` the pair's time
/// gap.
pub fn edge_branch_logs(net_delta: f64, earlier: usize, si0: f64, gap: f64, m: usize, priors: &Priors) -> (f64, f64) {
    let tree0 = if earlier == 0 { f64::NEG_INFINITY } else { -(earlier as f64).ln() };
    let tree1 = -((earlier + 1) as f64).ln();
    let log0 = tree0 + log_integrated_beta_from_sum(m, si0, priors);
    let log1 = net_delta + tree1 + log_integrated_beta_from_sum(m, si0 + gap, priors);
    (log0, log1)
}

/// Probability that the pair `(s, t)` is present given everything else,
/// with the infection rate integrated out. Leaves the pending toggle in the
/// network cache.
pub fn edge_conditional(state: &mut ChainState, data: &EpidemicData, priors: &Priors, s: usize, t: usize) -> f64 {
    let (s, t) = if s < t { (s, t) } else { (t, s) };
    let present = state.g.has_edge(s, t);
    let gap = si_toggle_gap(&data.times, s, t);
    let toggle = state.network.propose_toggle(&state.g, &state.sigma, s, t);
    let net_delta = if present { -toggle } else { toggle };
    let earlier = state.earlier[t] - present as usize;
    let si0 = state.si_sum - if present { gap } else { 0.0 };
    let (log0, log1) = edge_branch_logs(net_delta, earlier, si0, gap, data.m(), priors);
    logistic_choice(log0, log1)
}

/// Gibbs update of one unclamped pair. Clamped pairs are returned unchanged.
pub fn gibbs_edge<R: Rng + ?Sized>(
    state: &mut ChainState,
    data: &EpidemicData,
    priors: &Priors,
    s: usize,
    t: usize,
    rng: &mut R,
) -> bool {
    let (s, t) = if s < t { (s, t) } else { (t, s) };
    let present = state.g.has_edge(s, t);
    if state.clamp.is_clamped(s, t) {
        return present;
    }
    let p1 = edge_conditional(state, data, priors, s, t);
    if p1.is_nan() {
        return present;
    }
    let next = rng.random::<f64>() < p1;
    if next != present {
        state.network.commit_toggle();
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
    next
}

/// One pass of [`gibbs_edge`] over all pairs in lexicographic label order.
/// Returns the number of pairs whose value changed.
pub fn sweep_edges<R: Rng + ?Sized>(state: &mut ChainState, data: &EpidemicData, priors: &Priors, rng: &mut R) -> usize {
    let m = data.m();
    let mut changed = 0;
    for s in 0..m {
        for t in s + 1..m {
            if state.clamp.is_clamped(s, t) {
                continue;
            }
            let before = state.g.has_edge(s, t);
            if gibbs_edge(state, data, priors, s, t, rng) != before {
                changed += 1;
            }
        }
    }
    state.refresh(data);
    changed
}

/// Like [`sweep_edges`] but visiting the pairs in a uniformly shuffled order.
pub fn sweep_edges_random<R: Rng + ?Sized>(
    state: &mut ChainState,
    data: &EpidemicData,
    priors: &Priors,
    rng: &mut R,
) -> usize {
    use rand::seq::SliceRandom;
    let m = data.m();
    let mut pairs: Vec<(usize, usize)> =
        (0..m).flat_map(|s| (s + 1..m).map(move |t| (s, t))).filter(|&(s, t)| !state.clamp.is_clamped(s, t)).collect();
    pairs.shuffle(rng);
    let mut changed = 0;
    for (s, t) in pairs {
        let before = state.g.has_edge(s, t);
        if gibbs_edge(state, data, priors, s, t, rng) != before {
            changed += 1;
        }
    }
    state.refresh(data);
    changed
}

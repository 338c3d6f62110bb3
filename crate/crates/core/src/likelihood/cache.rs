//! Incrementally maintained network likelihood for the sampler.
//!
//! Toggling the pair at entry positions `a < b` changes `L1` only through
//! the count at step `b`, and changes `L2` through the selected set at step
//! `b` and the degree statistics of every later step. Each later term is
//! recomputed from stored integer statistics, so the cost of a toggle is
//! linear in the number of slots after `b` and there is no drift in the
//! individual terms.

use crate::special::ln_factorial;
use crate::types::{Graph, NetworkOrder};

use super::network::{counts_admissible, ln_l1_step, log_l1_from_counts, slot_term, step_stats, Fenwick};

#[derive(Debug, Clone, Copy)]
struct Slot {
    q: u32,
    d: u32,
    c: u32,
    term: f64,
}

#[derive(Debug, Clone, Copy)]
struct Pending {
    a: usize,
    b: usize,
    add: bool,
    new_slot: Option<Slot>,
    l1_delta: f64,
    l2_delta: f64,
}

/// Per-step statistics and log terms of `ln L1 + ln L2` (approximate form)
/// for one `(G, sigma, mu, gamma)`.
#[derive(Debug, Clone)]
pub struct NetworkCache {
    mu: f64,
    gamma: f64,
    x: Vec<usize>,
    dsum: Vec<u64>,
    slots: Vec<Vec<Slot>>,
    l1: f64,
    l2: f64,
    ln_int: Vec<f64>,
    pending: Option<Pending>,
    scratch: Vec<f64>,
}

impl NetworkCache {
    pub fn build(g: &Graph, sigma: &NetworkOrder, mu: f64, gamma: f64) -> Self {
        let stats = step_stats(g, sigma);
        let m = g.m();
        let max_int = m * m + 2;
        let ln_int = (0..=max_int).map(|k| (k as f64).ln()).collect();
        let mut cache = Self {
            mu,
            gamma,
            x: stats.x,
            dsum: stats.dsum,
            slots: Vec::with_capacity(m),
            l1: 0.0,
            l2: 0.0,
            ln_int,
            pending: None,
            scratch: Vec::new(),
        };
        let mut slots = Vec::with_capacity(m);
        for (p, list) in stats.slots.into_iter().enumerate() {
            let dsum = cache.dsum[p];
            slots.push(
                list.into_iter()
                    .map(|s| Slot { q: s.q, d: s.d, c: s.c, term: cache.term(p, s.q, s.d, s.c, dsum) })
                    .collect(),
            );
        }
        cache.slots = slots;
        cache.resync();
        cache
    }

    #[inline]
    fn term(&self, p: usize, q: u32, d: u32, c: u32, dsum: u64) -> f64 {
        if self.gamma == 0.0 && dsum > 0 {
            if d == 0 {
                return f64::NEG_INFINITY;
            }
            // Degree weights only: ln(d / D) - ln((D - c) / D).
            if q == 0 {
                return self.ln_int[d as usize] - self.ln_int[dsum as usize];
            }
            return self.ln_int[d as usize] - self.ln_int[(dsum - c as u64) as usize];
        }
        slot_term(p, q, d, c, dsum, self.gamma)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn log_l1(&self) -> f64 {
        self.l1
    }

    pub fn log_l2(&self) -> f64 {
        self.l2
    }

    /// `ln L1 + ln L2`.
    pub fn total(&self) -> f64 {
        self.l1 + self.l2
    }

    /// New-edge counts by entry position.
    pub fn counts(&self) -> &[usize] {
        &self.x
    }

    pub fn is_admissible(&self) -> bool {
        counts_admissible(&self.x)
    }

    /// `ln L1` at another `mu` with the same graph and order.
    pub fn l1_with_mu(&self, mu: f64) -> f64 {
        log_l1_from_counts(&self.x, mu)
    }

    pub fn set_mu(&mut self, mu: f64) {
        self.mu = mu;
        self.l1 = log_l1_from_counts(&self.x, mu);
    }

    /// `ln L2` at another `gamma` with the same graph and order.
    pub fn l2_with_gamma(&self, gamma: f64) -> f64 {
        let mut total = 0.0;
        for (p, list) in self.slots.iter().enumerate().skip(2) {
            total += ln_factorial(self.x[p]);
            for s in list {
                total += slot_term(p, s.q, s.d, s.c, self.dsum[p], gamma);
            }
        }
        total
    }

    pub fn set_gamma(&mut self, gamma: f64) {
        self.gamma = gamma;
        for p in 2..self.slots.len() {
            let dsum = self.dsum[p];
            for k in 0..self.slots[p].len() {
                let s = self.slots[p][k];
                self.slots[p][k].term = self.term(p, s.q, s.d, s.c, dsum);
            }
        }
        self.resync();
    }

    /// `ln L1 + ln L2` for `g` under another order, at the cached `mu` and
    /// `gamma`, without storing per-step terms.
    pub fn evaluate_order(&self, g: &Graph, sigma: &NetworkOrder) -> f64 {
        let m = g.m();
        let mut partial = vec![0u32; m];
        let mut fen = Fenwick::new(m);
        let mut x = vec![0usize; m];
        let mut earlier = Vec::new();
        let mut total_degree = 0u64;
        let mut l2 = 0.0;
        for p in 0..m {
            let node = sigma.node_at(p);
            earlier.clear();
            earlier.extend(g.neighbors(node).iter().map(|&v| sigma.position_of(v)).filter(|&q| q < p));
            if p >= 1 && earlier.is_empty() {
                return f64::NEG_INFINITY;
            }
            earlier.sort_unstable();
            x[p] = earlier.len();
            if p >= 2 {
                l2 += ln_factorial(x[p]);
                for &q in &earlier {
                    l2 += self.term(p, q as u32, partial[q], fen.prefix(q) as u32, total_degree);
                }
            }
            for &q in &earlier {
                partial[q] += 1;
                fen.add(q, 1);
            }
            partial[p] = x[p] as u32;
            fen.add(p, x[p] as u64);
            total_degree += 2 * x[p] as u64;
        }
        log_l1_from_counts(&x, self.mu) + l2
    }

    /// Replaces the cached graph and order, keeping `mu` and `gamma`.
    pub fn rebuild(&mut self, g: &Graph, sigma: &NetworkOrder) {
        let stats = step_stats(g, sigma);
        self.x = stats.x;
        self.dsum = stats.dsum;
        let mut slots = Vec::with_capacity(g.m());
        for (p, list) in stats.slots.into_iter().enumerate() {
            let dsum = self.dsum[p];
            slots.push(
                list.into_iter()
                    .map(|s| Slot { q: s.q, d: s.d, c: s.c, term: self.term(p, s.q, s.d, s.c, dsum) })
                    .collect(),
            );
        }
        self.slots = slots;
        self.pending = None;
        self.resync();
    }

    /// Recomputes the totals from the stored per-step terms.
    pub fn resync(&mut self) {
        self.l1 = log_l1_from_counts(&self.x, self.mu);
        let mut l2 = 0.0;
        for p in 2..self.x.len() {
            l2 += ln_factorial(self.x[p]);
            l2 += self.slots[p].iter().map(|s| s.term).sum::<f64>();
        }
        self.l2 = l2;
    }

    /// Change in `ln L1 + ln L2` if the pair `{u, v}` of `g` were toggled.
    /// The plan is kept until the next call, so an accepted toggle can be
    /// applied with [`commit_toggle`](Self::commit_toggle) after `g` itself
    /// has been updated.
    pub fn propose_toggle(&mut self, g: &Graph, sigma: &NetworkOrder, u: usize, v: usize) -> f64 {
        let (pu, pv) = (sigma.position_of(u), sigma.position_of(v));
        let (a, b) = if pu < pv { (pu, pv) } else { (pv, pu) };
        let add = !g.has_edge(u, v);
        self.pending = None;
        self.scratch.clear();
        if b == 1 {
            // The first two entrants are always joined.
            debug_assert!(!add, "cache built on an inadmissible graph");
            return f64::NEG_INFINITY;
        }
        let xb = self.x[b];
        let new_xb = if add { xb + 1 } else { xb - 1 };
        if new_xb == 0 {
            return f64::NEG_INFINITY;
        }
        let l1_delta = ln_l1_step(new_xb, b, self.mu) - ln_l1_step(xb, b, self.mu);
        let mut l2_delta = ln_factorial(new_xb) - ln_factorial(xb);
        let mut new_slot = None;
        if add {
            let (d, c) = partial_stats(g, sigma, a, b);
            let term = self.term(b, a as u32, d, c, self.dsum[b]);
            new_slot = Some(Slot { q: a as u32, d, c, term });
            l2_delta += term;
        } else {
            let s = self.slots[b].iter().find(|s| s.q as usize == a).expect("selected slot");
            l2_delta -= s.term;
        }
        let sign: i64 = if add { 1 } else { -1 };
        for p in b + 1..self.x.len() {
            let dsum = (self.dsum[p] as i64 + 2 * sign) as u64;
            for s in &self.slots[p] {
                let q = s.q as usize;
                let d = (s.d as i64 + sign * ((q == a) as i64 + (q == b) as i64)) as u32;
                let c = (s.c as i64 + sign * ((q > a) as i64 + (q > b) as i64)) as u32;
                let t = self.term(p, s.q, d, c, dsum);
                l2_delta += t - s.term;
                self.scratch.push(t);
            }
        }
        self.pending = Some(Pending { a, b, add, new_slot, l1_delta, l2_delta });
        l1_delta + l2_delta
    }

    /// Applies the most recent [`propose_toggle`](Self::propose_toggle).
    pub fn commit_toggle(&mut self) {
        let Pending { a, b, add, new_slot, l1_delta, l2_delta } =
            self.pending.take().expect("no pending toggle");
        let sign: i64 = if add { 1 } else { -1 };
        if add {
            self.x[b] += 1;
            let slot = new_slot.expect("new slot");
            let at = self.slots[b].partition_point(|s| (s.q as usize) < a);
            self.slots[b].insert(at, slot);
        } else {
            self.x[b] -= 1;
            let at = self.slots[b].iter().position(|s| s.q as usize == a).expect("selected slot");
            self.slots[b].remove(at);
        }
        let mut k = 0;
        for p in b + 1..self.x.len() {
            self.dsum[p] = (self.dsum[p] as i64 + 2 * sign) as u64;
            for s in self.slots[p].iter_mut() {
                let q = s.q as usize;
                s.d = (s.d as i64 + sign * ((q == a) as i64 + (q == b) as i64)) as u32;
                s.c = (s.c as i64 + sign * ((q > a) as i64 + (q > b) as i64)) as u32;
                s.term = self.scratch[k];
                k += 1;
            }
        }
        self.l1 += l1_delta;
        self.l2 += l2_delta;
    }
}

/// Degree of position `a` and cumulative degree of positions `< a` in the
/// graph induced by positions `< b`.
fn partial_stats(g: &Graph, sigma: &NetworkOrder, a: usize, b: usize) -> (u32, u32) {
    let count = |r: usize| g.neighbors(sigma.node_at(r)).iter().filter(|&&v| sigma.position_of(v) < b).count();
    let c: usize = (0..a).map(count).sum();
    (count(a) as u32, c as u32)
}

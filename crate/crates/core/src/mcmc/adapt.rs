//! Batch-wise tuning of random-walk proposal scales during burn-in.

/// Iterations per adaptation batch.
pub const ADAPT_BATCH: usize = 50;

/// Step size of the log-scale update after batch `batch_index` (1-based).
pub fn adapt_step(batch_index: usize) -> f64 {
    (1.0 / (batch_index.max(1) as f64).sqrt()).min(0.25)
}

/// Scales `current_sd` up when the batch acceptance rate exceeds the target
/// and down when it falls short.
pub fn adapt_proposal(current_sd: f64, batch_accept_rate: f64, target: f64, batch_index: usize) -> f64 {
    current_sd * (adapt_step(batch_index) * (batch_accept_rate - target)).exp()
}

/// Accepted and attempted counts for one move type.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AcceptCounter {
    pub accepted: u64,
    pub tried: u64,
}

impl AcceptCounter {
    pub fn record(&mut self, accepted: bool) {
        self.tried += 1;
        self.accepted += accepted as u64;
    }

    pub fn add(&mut self, accepted: u64, tried: u64) {
        self.accepted += accepted;
        self.tried += tried;
    }

    pub fn rate(&self) -> f64 {
        if self.tried == 0 {
            0.0
        } else {
            self.accepted as f64 / self.tried as f64
        }
    }
}

/// A proposal scale with its running batch counter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveScale {
    pub sd: f64,
    batch: AcceptCounter,
    batches_done: usize,
}

impl AdaptiveScale {
    pub fn new(sd: f64) -> Self {
        Self { sd, batch: AcceptCounter::default(), batches_done: 0 }
    }

    /// Records one proposal; when a batch completes during burn-in the scale
    /// is updated.
    pub fn record(&mut self, accepted: bool, adapting: bool, target: f64) {
        if !adapting {
            return;
        }
        self.batch.record(accepted);
        if self.batch.tried as usize == ADAPT_BATCH {
            self.batches_done += 1;
            self.sd = adapt_proposal(self.sd, self.batch.rate(), target, self.batches_done);
            self.batch = AcceptCounter::default();
        }
    }
}

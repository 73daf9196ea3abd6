use rand::Rng;

use crate::error::{Error, Result};
use crate::seed;

/// Bernoulli-per-step event train with success probability `p` per step.
///
/// Gaps between events are drawn from the geometric distribution, which
/// yields exactly the same law as one Bernoulli draw per step while
/// touching the generator only once per event.
#[derive(Debug, Clone)]
pub struct BernoulliTrain {
    log_q: f64,
    next: u64,
}

impl BernoulliTrain {
    pub fn new<R: Rng>(p: f64, rng: &mut R) -> Self {
        let log_q = if p <= 0.0 { 0.0 } else { (1.0 - p).ln() };
        let mut t = Self { log_q, next: 0 };
        t.next = t.gap(rng) - 1;
        t
    }

    fn gap<R: Rng>(&self, rng: &mut R) -> u64 {
        if self.log_q == 0.0 {
            return u64::MAX;
        }
        if self.log_q == f64::NEG_INFINITY {
            return 1;
        }
        // U in (0, 1]
        let u: f64 = 1.0 - rng.random::<f64>();
        let g = (u.ln() / self.log_q).ceil();
        if g >= u64::MAX as f64 {
            u64::MAX
        } else {
            (g as u64).max(1)
        }
    }

    /// Step index of the next event.
    #[inline]
    pub fn next_step(&self) -> u64 {
        self.next
    }

    /// Consumes the pending event and schedules the following one.
    #[inline]
    pub fn advance<R: Rng>(&mut self, rng: &mut R) {
        self.next = self.next.saturating_add(self.gap(rng));
    }
}

/// Event steps of a Poisson train approximated by per-step Bernoulli
/// trials with `p = rate · dt`.
pub fn poisson_drive(rate_hz: f64, duration_ms: f64, dt_ms: f64, seed: u64) -> Result<Vec<u64>> {
    if !(rate_hz >= 0.0) {
        return Err(Error::Config(format!("rate must be >= 0, got {rate_hz}")));
    }
    let p = rate_hz * dt_ms * 1e-3;
    if p > 0.1 {
        return Err(Error::Config(format!(
            "rate·dt = {p} exceeds 0.1; Bernoulli approximation invalid"
        )));
    }
    let steps = (duration_ms / dt_ms).round() as u64;
    let mut rng = seed::rng(seed);
    let mut train = BernoulliTrain::new(p, &mut rng);
    let mut out = Vec::new();
    while train.next_step() < steps {
        out.push(train.next_step());
        train.advance(&mut rng);
    }
    Ok(out)
}

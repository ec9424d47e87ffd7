use crate::sketch::{mix64, GOLDEN_GAMMA};

/// SplitMix64 generator. Its outputs are used directly as hash values.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Independent stream for one trial of a simulation.
    pub fn for_trial(seed: u64, trial: u64) -> Self {
        Self::new(mix64(seed ^ mix64(trial.wrapping_add(GOLDEN_GAMMA))))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `(0, 1]`.
    #[inline]
    pub fn next_f64_open_zero(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Number of Bernoulli(`s`) trials up to and including the first success.
    pub fn geometric(&mut self, s: f64) -> f64 {
        debug_assert!(s > 0.0 && s <= 1.0);
        if s >= 1.0 {
            return 1.0;
        }
        let g = (self.next_f64_open_zero().ln() / (-s).ln_1p()).ceil();
        g.max(1.0)
    }
}

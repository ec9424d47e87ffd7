//! Online distinct-count estimation (martingale / HIP).
//!
//! Every time a register changes, the estimate grows by `1 / P` where `P` is
//! the probability that a new distinct element changes the sketch state.
//! The estimate depends on the insertion order and cannot be merged.
//!
//! All per-register probabilities are dyadic rationals with denominator at most
//! `2^64`, so `P` is kept exactly as an integer multiple of `2^-64`.

use crate::sketch::{is_reachable, max_update_value, RegisterChange, Sketch};

const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

/// `ν(r) · 2^64` for a reachable register value `r` at precision `p`.
fn scaled_change_probability(r: u8, p: u32) -> u64 {
    let w = max_update_value(p);
    let u = u32::from(r >> 2);
    let b1 = u64::from(r >> 1 & 1);
    let b2 = u64::from(r & 1);
    match r {
        0 => 1 << (64 - p),
        4 => 1 << (63 - p),
        8 => 3 << (62 - p),
        10 => 1 << (62 - p),
        _ if u < w => (7 - 2 * b1 - 4 * b2) << (64 - p - u),
        _ => (3 - b1 - 2 * b2) << (65 - p - w),
    }
}

/// Probability `ν(r)` that the next new element changes a register currently at `r`.
pub fn nu(r: u8, p: u32) -> f64 {
    assert!(is_reachable(r, p), "register value {r} is not reachable at precision {p}");
    scaled_change_probability(r, p) as f64 / TWO_POW_64
}

/// Lookup table of `ν(r) · 2^64` for one precision.
#[derive(Clone, Debug)]
pub struct ChangeProbabilityTable {
    p: u32,
    scaled: [u64; 256],
}

impl ChangeProbabilityTable {
    pub fn new(p: u32) -> Self {
        let mut scaled = [0u64; 256];
        for r in 0..=255u8 {
            if is_reachable(r, p) {
                scaled[r as usize] = scaled_change_probability(r, p);
            }
        }
        Self { p, scaled }
    }

    pub fn precision(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn scaled(&self, r: u8) -> u64 {
        self.scaled[r as usize]
    }

    pub fn nu(&self, r: u8) -> f64 {
        self.scaled(r) as f64 / TWO_POW_64
    }

    /// `P · 2^64` for a whole register array.
    pub fn scaled_sum(&self, registers: &[u8]) -> u128 {
        registers.iter().map(|&r| u128::from(self.scaled(r))).sum()
    }
}

/// Running martingale estimate paired with one sketch.
#[derive(Clone, Debug)]
pub struct MartingaleEstimator {
    table: ChangeProbabilityTable,
    estimate: f64,
    scaled_change_prob: u128,
}

impl MartingaleEstimator {
    /// State for an empty sketch of precision `p`: estimate 0, `P = 1`.
    pub fn new(p: u32) -> Self {
        Self { table: ChangeProbabilityTable::new(p), estimate: 0.0, scaled_change_prob: 1 << 64 }
    }

    /// State for an existing sketch, with the estimate supplied by the caller
    /// (the insertion history of a sketch is not recoverable from its registers).
    pub fn with_state(sketch: &Sketch, estimate: f64) -> Self {
        let table = ChangeProbabilityTable::new(sketch.precision());
        let scaled_change_prob = table.scaled_sum(sketch.registers());
        Self { table, estimate, scaled_change_prob }
    }

    pub fn estimate(&self) -> f64 {
        self.estimate
    }

    /// Probability that the next new distinct element changes the state.
    pub fn change_probability(&self) -> f64 {
        self.scaled_change_prob as f64 / TWO_POW_64
    }

    /// Updates the state after a register moved from `old` to `new` (`old < new`).
    #[inline]
    pub fn on_register_change(&mut self, old: u8, new: u8) {
        debug_assert!(old < new);
        self.estimate += TWO_POW_64 / self.scaled_change_prob as f64;
        self.scaled_change_prob -= u128::from(self.table.scaled(old));
        self.scaled_change_prob += u128::from(self.table.scaled(new));
    }

    #[inline]
    pub fn observe(&mut self, change: Option<RegisterChange>) {
        if let Some(c) = change {
            self.on_register_change(c.old, c.new);
        }
    }

    /// Inserts into `sketch` and updates the estimate in one step.
    #[inline]
    pub fn insert_hash(&mut self, sketch: &mut Sketch, hash: u64) {
        let change = sketch.insert_hash(hash);
        self.observe(change);
    }

    /// Recomputes `P` from the registers. Returns the absolute difference to the
    /// incrementally maintained value before the resync.
    pub fn resync(&mut self, sketch: &Sketch) -> f64 {
        let fresh = self.table.scaled_sum(sketch.registers());
        let drift = fresh.abs_diff(self.scaled_change_prob) as f64 / TWO_POW_64;
        self.scaled_change_prob = fresh;
        drift
    }
}

use super::register::{is_reachable, max_update_value, MAX_P, MIN_P};
use crate::{Error, Result};

/// Number of registers per register value, the input of every offline estimator.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RegisterHistogram {
    p: u32,
    counts: [u64; 256],
}

impl RegisterHistogram {
    pub(crate) fn from_registers(p: u32, registers: &[u8]) -> Self {
        let mut counts = [0u64; 256];
        for &r in registers {
            counts[r as usize] += 1;
        }
        Self { p, counts }
    }

    /// Builds a histogram from raw counts, checking that they sum to `2^p` and
    /// that only reachable register values occur.
    pub fn from_counts(p: u32, counts: [u64; 256]) -> Result<Self> {
        if !(MIN_P..=MAX_P).contains(&p) {
            return Err(Error::InvalidPrecision(p));
        }
        if let Some(r) = (0..=255u8).find(|&r| counts[r as usize] > 0 && !is_reachable(r, p)) {
            return Err(Error::Domain(format!("register value {r} is not reachable at precision {p}")));
        }
        let total: u64 = counts.iter().sum();
        if total != 1 << p {
            return Err(Error::Domain(format!("counts sum to {total}, expected {}", 1u64 << p)));
        }
        Ok(Self { p, counts })
    }

    pub fn precision(&self) -> u32 {
        self.p
    }

    /// Total number of registers `m = 2^p`.
    pub fn m(&self) -> u64 {
        1 << self.p
    }

    pub fn max_update_value(&self) -> u32 {
        max_update_value(self.p)
    }

    #[inline]
    pub fn count(&self, r: u8) -> u64 {
        self.counts[r as usize]
    }

    pub fn counts(&self) -> &[u64; 256] {
        &self.counts
    }

    /// True iff every register is still in its initial state.
    pub fn is_empty(&self) -> bool {
        self.counts[0] == self.m()
    }

    /// Non-zero entries as `(register value, count)` in ascending value order.
    pub fn iter(&self) -> impl Iterator<Item = (u8, u64)> + '_ {
        self.counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(r, &c)| (r as u8, c))
    }
}

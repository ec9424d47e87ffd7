//! Register encoding.
//!
//! A register byte `r = 4u + <b1 b2>` stores the maximum update value `u` and
//! two occurrence flags: `b1` for `u - 1` and `b2` for `u - 2`. The unpacked
//! form is a 64-bit word in which bit `k + 1` marks that update value `k`
//! occurred.

use std::fmt;

pub const MIN_P: u32 = 3;
pub const MAX_P: u32 = 26;

/// Saturating update value `w = 65 - p` for 64-bit hashes.
#[inline]
pub const fn max_update_value(p: u32) -> u32 {
    65 - p
}

/// Largest register value at precision `p`.
#[inline]
pub const fn max_register_value(p: u32) -> u8 {
    (4 * max_update_value(p) + 3) as u8
}

/// Packs an occurrence bitset `x >= 4` into a register byte.
#[inline]
pub fn pack(x: u64) -> u8 {
    debug_assert!(x >= 4, "pack called with x = {x}");
    let u = 62 - x.leading_zeros();
    ((u << 2) as u64 | ((x >> (u - 1)) & 3)) as u8
}

/// Unpacks a register byte into its occurrence bitset; `0` for the initial state.
#[inline]
pub fn unpack(r: u8) -> u64 {
    if r < 4 {
        return 0;
    }
    let u = u32::from(r >> 2);
    (4 | u64::from(r & 3)) << (u - 1)
}

/// Whether `r` can be attained by a sketch of precision `p`.
///
/// For `u = 1` neither flag is meaningful and for `u = 2` only `b1` is, so
/// 1, 2, 3, 5, 6, 7, 9 and 11 never occur. Neither does anything above `4w + 3`.
#[inline]
pub fn is_reachable(r: u8, p: u32) -> bool {
    match r {
        0 => true,
        1..=3 | 5..=7 | 9 | 11 => false,
        _ => r <= max_register_value(p),
    }
}

/// Decoded view of a register byte.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct RegisterValue(u8);

impl RegisterValue {
    pub const ZERO: RegisterValue = RegisterValue(0);

    /// Builds a register value from its parts, checking the reachability rules
    /// for small `u` (the upper bound depends on the precision and is not checked).
    pub fn new(u: u32, b1: bool, b2: bool) -> Option<Self> {
        if u > 63 || u == 0 && (b1 || b2) || u == 1 && (b1 || b2) || u == 2 && b2 {
            return None;
        }
        Some(Self((u << 2) as u8 | (u8::from(b1) << 1) | u8::from(b2)))
    }

    pub fn from_byte(r: u8) -> Self {
        Self(r)
    }

    pub fn byte(self) -> u8 {
        self.0
    }

    /// Maximum update value seen so far.
    pub fn max_update(self) -> u32 {
        u32::from(self.0 >> 2)
    }

    /// Whether update value `u - 1` occurred.
    pub fn b1(self) -> bool {
        self.0 & 2 != 0
    }

    /// Whether update value `u - 2` occurred.
    pub fn b2(self) -> bool {
        self.0 & 1 != 0
    }

    pub fn unpack(self) -> u64 {
        unpack(self.0)
    }
}

impl fmt::Display for RegisterValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (u={}, b1={}, b2={})", self.0, self.max_update(), u8::from(self.b1()), u8::from(self.b2()))
    }
}

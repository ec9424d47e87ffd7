//! Plain HyperLogLog insertion with one byte per 6-bit register.
//!
//! Only used as a compatibility reference: dropping the two low bits of every
//! UltraLogLog register yields exactly the registers this routine produces for
//! the same hash stream.

/// Records `hash` into HLL registers `registers` of precision `p` (`p >= 2`).
pub fn hll_reference_insert(registers: &mut [u8], hash: u64, p: u32) {
    debug_assert!(p >= 2 && registers.len() == 1 << p);
    let index = (hash >> (64 - p)) as usize;
    let masked = hash & (u64::MAX >> p);
    let k = (masked.leading_zeros() - p + 1) as u8;
    if registers[index] < k {
        registers[index] = k;
    }
}

//! The UltraLogLog register array.

mod hash;
mod histogram;
mod hll;
mod register;

pub use hash::{mix64, SplitMixHasher, TokenHasher, GOLDEN_GAMMA};
pub use histogram::RegisterHistogram;
pub use hll::hll_reference_insert;
pub use register::{is_reachable, max_register_value, max_update_value, pack, unpack, RegisterValue, MAX_P, MIN_P};

use crate::{Error, Result};

/// A register that changed during an insert.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RegisterChange {
    pub index: usize,
    pub old: u8,
    pub new: u8,
}

/// An UltraLogLog sketch: precision `p` and `2^p` byte registers.
///
/// Registers only ever grow, so insertion is idempotent and the final state
/// does not depend on the insertion order.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Sketch {
    p: u32,
    registers: Vec<u8>,
}

impl Sketch {
    pub fn new(p: u32) -> Result<Self> {
        check_precision(p)?;
        Ok(Self { p, registers: vec![0; 1 << p] })
    }

    /// Wraps an existing register array. Every register must be reachable at
    /// precision `p`; the error offset is the register index.
    pub fn from_registers(p: u32, registers: Vec<u8>) -> Result<Self> {
        check_precision(p)?;
        if registers.len() != 1 << p {
            return Err(Error::Decode {
                offset: registers.len().min(1 << p),
                reason: format!("expected {} registers, got {}", 1usize << p, registers.len()),
            });
        }
        if let Some(i) = registers.iter().position(|&r| !is_reachable(r, p)) {
            return Err(Error::Decode {
                offset: i,
                reason: format!("register value {} is not reachable at precision {p}", registers[i]),
            });
        }
        Ok(Self { p, registers })
    }

    pub fn precision(&self) -> u32 {
        self.p
    }

    pub fn num_registers(&self) -> usize {
        self.registers.len()
    }

    pub fn registers(&self) -> &[u8] {
        &self.registers
    }

    pub fn is_empty(&self) -> bool {
        self.registers.iter().all(|&r| r == 0)
    }

    pub fn clear(&mut self) {
        self.registers.fill(0);
    }

    /// Records an element by its 64-bit hash. Returns the register change, if any.
    #[inline]
    pub fn insert_hash(&mut self, hash: u64) -> Option<RegisterChange> {
        let index = (hash >> (64 - self.p)) as usize;
        let masked = hash & (u64::MAX >> self.p);
        // leading_zeros(0) == 64 gives the saturating update value 65 - p
        let k = masked.leading_zeros() - self.p + 1;
        self.insert_update(index, k)
    }

    /// Hashes `bytes` with `hasher` and records the result.
    pub fn insert<H: TokenHasher + ?Sized>(&mut self, bytes: &[u8], hasher: &H) -> Option<RegisterChange> {
        self.insert_hash(hasher.hash_bytes(bytes))
    }

    /// Applies update value `k` in `[1, 65 - p]` to register `index`.
    #[inline]
    pub fn insert_update(&mut self, index: usize, k: u32) -> Option<RegisterChange> {
        debug_assert!(k >= 1 && k <= max_update_value(self.p));
        let old = self.registers[index];
        let new = pack(unpack(old) | (1u64 << (k + 1)));
        if new == old {
            return None;
        }
        self.registers[index] = new;
        Some(RegisterChange { index, old, new })
    }

    /// Merges `src` into `self`. `src` may have a larger precision, in which
    /// case it is reduced on the fly; the result equals recording the union
    /// of both streams at `self`'s precision.
    pub fn merge_from(&mut self, src: &Sketch) -> Result<()> {
        if src.p < self.p {
            return Err(Error::PrecisionMismatch { dst: self.p, src: src.p });
        }
        let d = src.p - self.p;
        if d == 0 {
            for (dst, &r) in self.registers.iter_mut().zip(&src.registers) {
                if r != 0 {
                    *dst = pack(unpack(*dst) | unpack(r));
                }
            }
            return Ok(());
        }
        let batch = 1u64 << d;
        let mut j = 0;
        for dst in self.registers.iter_mut() {
            // the first register of a batch has d trailing zero index bits, which
            // at lower precision become leading zeros of the update value
            let mut x = unpack(*dst) | (unpack(src.registers[j]) << d);
            j += 1;
            for sub in 1..batch {
                if src.registers[j] != 0 {
                    let k = sub.leading_zeros() + d - 63;
                    x |= 1 << (k + 1);
                }
                j += 1;
            }
            if x != 0 {
                *dst = pack(x);
            }
        }
        Ok(())
    }

    /// Union of two sketches at the smaller of their precisions.
    pub fn merged(a: &Sketch, b: &Sketch) -> Sketch {
        let (mut dst, src) = if a.p <= b.p { (a.clone(), b) } else { (b.clone(), a) };
        dst.merge_from(src).expect("dst precision is the smaller one");
        dst
    }

    /// Reduces the sketch to precision `p <= self.precision()`. The result is
    /// identical to recording the same stream at precision `p` directly.
    pub fn downsize(&self, p: u32) -> Result<Sketch> {
        check_precision(p)?;
        if p == self.p {
            return Ok(self.clone());
        }
        let mut out = Sketch::new(p)?;
        out.merge_from(self)?;
        Ok(out)
    }

    /// HyperLogLog registers of the same precision: `floor(r / 4)` per register.
    pub fn to_hll_registers(&self) -> Vec<u8> {
        self.registers.iter().map(|&r| r >> 2).collect()
    }

    pub fn histogram(&self) -> RegisterHistogram {
        RegisterHistogram::from_registers(self.p, &self.registers)
    }

    /// Serialized form: one precision byte followed by the registers in index order.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(1 + self.registers.len());
        out.push(self.p as u8);
        out.extend_from_slice(&self.registers);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let Some(&p) = bytes.first() else {
            return Err(Error::Decode { offset: 0, reason: "empty input".into() });
        };
        let p = u32::from(p);
        if !(MIN_P..=MAX_P).contains(&p) {
            return Err(Error::Decode { offset: 0, reason: format!("invalid precision {p}") });
        }
        let expected = 1 + (1usize << p);
        if bytes.len() != expected {
            return Err(Error::Decode {
                offset: bytes.len().min(expected),
                reason: format!("expected {expected} bytes for precision {p}, got {}", bytes.len()),
            });
        }
        Sketch::from_registers(p, bytes[1..].to_vec()).map_err(|e| match e {
            Error::Decode { offset, reason } => Error::Decode { offset: offset + 1, reason },
            other => other,
        })
    }
}

fn check_precision(p: u32) -> Result<()> {
    if (MIN_P..=MAX_P).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidPrecision(p))
    }
}

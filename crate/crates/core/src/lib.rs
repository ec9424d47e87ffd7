//! UltraLogLog: a byte-per-register distinct-count sketch.
//!
//! Each of the `m = 2^p` registers stores the largest update value `u` seen so far
//! in its upper six bits and, in the lower two bits, whether the update values
//! `u - 1` and `u - 2` have also occurred. The sketch is idempotent, mergeable
//! (also across precisions), reducible to a smaller precision and can be
//! projected onto a HyperLogLog sketch by dropping the two low bits.
//!
//! The crate is organised as follows:
//!
//! - [`sketch`]: the register array, insertion, merge/downsize, HLL projection
//!   and the binary serialization format.
//! - [`estimators`]: offline estimation from a [`RegisterHistogram`], i.e. the
//!   FGRA estimator with small/large range corrections and the maximum-likelihood
//!   estimator.
//! - [`martingale`]: online (non-mergeable) estimation by tracking the state
//!   change probability.
//! - [`theory`]: special functions and the Fisher information / entropy / MVP
//!   analysis of the generalized `(b, q, r)` register family, including the
//!   numerical derivation of the estimator constants.
//! - [`simkit`]: Monte-Carlo harness for estimation-error experiments, with a
//!   waiting-time fast-forward for very large distinct counts.
//!
//! ```
//! use ull_core::{Sketch, estimators::FgraEstimator};
//!
//! let mut sketch = Sketch::new(10).unwrap();
//! let mut rng = ull_core::simkit::SplitMix64::new(7);
//! for _ in 0..10_000 {
//!     sketch.insert_hash(rng.next_u64());
//! }
//! let estimate = FgraEstimator::default_for(10).unwrap().estimate(&sketch.histogram());
//! assert!((estimate / 10_000.0 - 1.0).abs() < 0.1);
//! ```

#![forbid(unsafe_code)]

pub mod error;
pub mod estimators;
pub mod martingale;
pub mod simkit;
pub mod sketch;
pub mod theory;

pub use error::{Error, Result};
pub use martingale::MartingaleEstimator;
pub use sketch::{RegisterHistogram, RegisterValue, Sketch};

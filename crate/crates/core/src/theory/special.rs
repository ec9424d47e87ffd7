//! Gamma and Hurwitz zeta functions.

use crate::{Error, Result};

pub use statrs::function::gamma::{gamma, ln_gamma};

const ZETA_DIRECT_TERMS: usize = 20;

/// Hurwitz zeta `ζ(s, a) = Σ_{k≥0} (k + a)^(-s)` for `s > 1`, `a > 0`.
///
/// Sums the first terms directly and adds the Euler-Maclaurin tail through the
/// `B6` correction.
pub fn hurwitz_zeta(s: f64, a: f64) -> Result<f64> {
    if !(s > 1.0 && a > 0.0 && s.is_finite() && a.is_finite()) {
        return Err(Error::Domain(format!("hurwitz_zeta needs s > 1 and a > 0, got s={s}, a={a}")));
    }
    let mut sum = 0.0;
    for k in 0..ZETA_DIRECT_TERMS {
        sum += (k as f64 + a).powf(-s);
    }
    let x = ZETA_DIRECT_TERMS as f64 + a;
    let xs = x.powf(-s);
    let mut tail = x * xs / (s - 1.0) + 0.5 * xs;
    // B2/2! s x^(-s-1) + B4/4! s(s+1)(s+2) x^(-s-3) + B6/6! ...
    let x2 = 1.0 / (x * x);
    let mut rising = s;
    let mut power = xs / x;
    tail += rising * power / 12.0;
    rising *= (s + 1.0) * (s + 2.0);
    power *= x2;
    tail -= rising * power / 720.0;
    rising *= (s + 3.0) * (s + 4.0);
    power *= x2;
    tail += rising * power / 30_240.0;
    Ok(sum + tail)
}

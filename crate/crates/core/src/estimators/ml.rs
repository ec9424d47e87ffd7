//! Maximum-likelihood estimation.
//!
//! The log-likelihood has the form `-(n/m) λ + Σ_u μ_u ln(1 - exp(-n/(m 2^u)))`,
//! so its maximum is the unique root of the decreasing function
//! `Σ_u μ_u / (2^u (exp(n/(m 2^u)) - 1)) - λ`.

use super::fgra::FgraEstimator;
use super::sum::NeumaierSum;
use crate::sketch::RegisterHistogram;
use crate::{Error, Result};

/// First-order bias constant of the ML estimator, `3 ln2 ζ(3, 5/4) / (2 ζ(2, 5/4)²)`.
pub const ML_BIAS_CONSTANT: f64 = 0.48147376527720065;

const REL_TOL: f64 = 1e-9;
const MAX_ITERATIONS: u32 = 64;

/// Likelihood coefficients; `mu[u - 1]` holds `μ_u` for `u = 1..w-1`.
#[derive(Clone, Debug, PartialEq)]
pub struct MlCoefficients {
    pub lambda: f64,
    pub mu: Vec<f64>,
    pub m: f64,
}

/// Likelihood coefficients of a histogram.
pub fn ml_coefficients(h: &RegisterHistogram) -> MlCoefficients {
    let w = h.max_update_value() as usize;
    let c = |r: usize| h.count(r as u8) as f64;

    let mut lambda = NeumaierSum::new();
    lambda.add(c(0) + c(4) / 2.0 + (3.0 * c(8) + c(10)) / 4.0);
    for u in 3..w {
        let b = 4 * u;
        let num = 7.0 * c(b) + 3.0 * c(b + 1) + 5.0 * c(b + 2) + c(b + 3);
        lambda.add(num * (-(u as f64)).exp2());
    }
    let b = 4 * w;
    lambda.add((3.0 * c(b) + c(b + 1) + 2.0 * c(b + 2)) * (1.0 - w as f64).exp2());

    let mut mu = vec![0.0; w - 1];
    mu[0] = c(4) + c(10) + c(13) + c(15);
    mu[1] = c(8) + c(10) + c(14) + c(15) + c(17) + c(19);
    for u in 3..=w - 2 {
        let b = 4 * u;
        mu[u - 1] = c(b) + c(b + 1) + c(b + 2) + c(b + 3) + c(b + 6) + c(b + 7) + c(b + 9) + c(b + 11);
    }
    mu[w - 2] = c(b - 4) + c(b - 3) + c(b - 2) + c(b - 1) + c(b) + c(b + 1) + 2.0 * (c(b + 2) + c(b + 3));

    MlCoefficients { lambda: lambda.value(), mu, m: h.m() as f64 }
}

impl MlCoefficients {
    fn is_empty(&self) -> bool {
        self.mu.iter().all(|&x| x == 0.0)
    }
}

/// Derivative of the log-likelihood times `m`, i.e. `Σ_u μ_u / (2^u (e^(x_u) - 1)) - λ`.
pub fn ml_score(k: &MlCoefficients, n: f64) -> f64 {
    let mut s = NeumaierSum::new();
    for (i, &mu) in k.mu.iter().enumerate() {
        if mu > 0.0 {
            let scale = ((i + 1) as f64).exp2();
            let x = n / (k.m * scale);
            s.add(mu / (scale * x.exp_m1()));
        }
    }
    s.add(-k.lambda);
    s.value()
}

/// Log-likelihood up to an additive constant.
pub fn ml_log_likelihood(k: &MlCoefficients, n: f64) -> f64 {
    let mut s = NeumaierSum::new();
    s.add(-n / k.m * k.lambda);
    for (i, &mu) in k.mu.iter().enumerate() {
        if mu > 0.0 {
            let x = n / (k.m * ((i + 1) as f64).exp2());
            s.add(mu * (-(-x).exp_m1()).ln());
        }
    }
    s.value()
}

/// Divisor `1 + 0.48147/m` removing the first-order bias.
pub fn ml_bias_divisor(m: f64) -> f64 {
    1.0 + ML_BIAS_CONSTANT / m
}

/// Solves for the likelihood maximum in log space: bracket, then Illinois
/// (modified regula falsi) with a bisection fallback.
fn solve(k: &MlCoefficients, guess: f64) -> Result<f64> {
    let g = |t: f64| ml_score(k, t.exp());
    let ln8 = 8f64.ln();
    let t0 = guess.ln();
    let (mut lo, mut hi) = (t0 - ln8, t0 + ln8);
    let (mut glo, mut ghi) = (g(lo), g(hi));
    let mut expansions = 0;
    while glo <= 0.0 {
        if glo == 0.0 {
            return Ok(lo.exp());
        }
        hi = lo;
        ghi = glo;
        lo -= ln8;
        glo = g(lo);
        expansions += 1;
        if expansions > 64 {
            return Err(Error::NoConvergence { lo: lo.exp(), hi: hi.exp() });
        }
    }
    while ghi >= 0.0 {
        if ghi == 0.0 {
            return Ok(hi.exp());
        }
        lo = hi;
        glo = ghi;
        hi += ln8;
        ghi = g(hi);
        expansions += 1;
        if expansions > 64 {
            return Err(Error::NoConvergence { lo: lo.exp(), hi: hi.exp() });
        }
    }

    let mut side = 0i8;
    for _ in 0..MAX_ITERATIONS {
        if hi - lo <= REL_TOL {
            return Ok((0.5 * (lo + hi)).exp());
        }
        let mut t = (lo * ghi - hi * glo) / (ghi - glo);
        if !(t > lo && t < hi) {
            t = 0.5 * (lo + hi);
        }
        let gt = g(t);
        if gt == 0.0 {
            return Ok(t.exp());
        }
        if gt > 0.0 {
            lo = t;
            glo = gt;
            if side == 1 {
                ghi *= 0.5;
            }
            side = 1;
        } else {
            hi = t;
            ghi = gt;
            if side == -1 {
                glo *= 0.5;
            }
            side = -1;
        }
    }
    if hi - lo <= REL_TOL {
        return Ok((0.5 * (lo + hi)).exp());
    }
    Err(Error::NoConvergence { lo: lo.exp(), hi: hi.exp() })
}

/// Bias-corrected maximum-likelihood estimate. Returns 0 for an empty sketch and
/// `+∞` if every register is saturated.
pub fn ml_estimate(h: &RegisterHistogram) -> Result<f64> {
    let k = ml_coefficients(h);
    if k.is_empty() {
        return Ok(0.0);
    }
    if k.lambda <= 0.0 {
        return Ok(f64::INFINITY);
    }
    let fgra = FgraEstimator::default_for(h.precision())?.estimate(h);
    let guess = if fgra.is_finite() && fgra > 0.0 { fgra } else { k.m };
    Ok(solve(&k, guess)? / ml_bias_divisor(k.m))
}

/// ML estimate without bias correction.
pub fn ml_estimate_uncorrected(h: &RegisterHistogram) -> Result<f64> {
    Ok(ml_estimate(h)? * ml_bias_divisor(h.m() as f64))
}

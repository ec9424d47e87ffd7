//! Range corrections: the helper functions `ψ`, `σ`, `φ` and the estimators of
//! `z_0 = exp(-n/m)` and `z_w = exp(-n/(m 2^w))` used to correct the
//! contributions of very small and very large register values.

use super::fgra::EstimatorConstants;
use crate::sketch::RegisterHistogram;
use crate::{Error, Result};

/// Maximum number of terms evaluated for `φ`.
pub const PHI_LARGE_MAX_TERMS: u32 = 24;

/// Result of a truncated series evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesEval {
    pub value: f64,
    /// Number of terms that changed the sum.
    pub terms: u32,
    /// `false` if the term cap was hit before a term became negligible.
    pub converged: bool,
}

fn check_unit(z: f64) -> Result<()> {
    if (0.0..=1.0).contains(&z) {
        Ok(())
    } else {
        Err(Error::Domain(format!("argument {z} outside [0, 1]")))
    }
}

#[inline]
fn negligible(term: f64, sum: f64) -> bool {
    term.abs() <= sum.abs() * (f64::EPSILON / 2.0)
}

#[inline]
pub(crate) fn psi_unchecked(z: f64, k: &EstimatorConstants) -> f64 {
    let [f0, f1, f2, f3] = k.phi;
    z * (z * (z * (f0 - f1 - f2 + f3) + (f2 - f3)) + (f1 - f3)) + f3
}

/// `ψ(z)`, the cubic interpolating `φ3` at `z = 0` and `φ0` at `z = 1`.
pub fn psi(z: f64, k: &EstimatorConstants) -> Result<f64> {
    check_unit(z)?;
    Ok(psi_unchecked(z, k))
}

pub(crate) fn sigma_unchecked(z: f64, k: &EstimatorConstants, max_terms: u32) -> SeriesEval {
    if z == 0.0 {
        // only the first term survives in the limit
        return SeriesEval { value: k.phi[3], terms: 1, converged: true };
    }
    if z == 1.0 {
        return SeriesEval { value: 0.0, terms: 0, converged: true };
    }
    let two_tau = k.tau.exp2();
    let mut sum = 0.0;
    let mut weight = 1.0;
    let mut x = z;
    for u in 0..max_terms {
        let x2 = x * x;
        let term = weight * (x - x2) * psi_unchecked(x2, k);
        if negligible(term, sum) {
            return SeriesEval { value: sum / z, terms: u, converged: true };
        }
        sum += term;
        weight *= two_tau;
        x = x2;
    }
    SeriesEval { value: sum / z, terms: max_terms, converged: false }
}

/// Small-range correction `σ(z)`, truncated after `p + 8` terms.
pub fn sigma(z: f64, k: &EstimatorConstants, p: u32) -> Result<f64> {
    Ok(sigma_series(z, k, p + 8)?.value)
}

/// `σ(z)` with an explicit term cap and convergence report.
pub fn sigma_series(z: f64, k: &EstimatorConstants, max_terms: u32) -> Result<SeriesEval> {
    check_unit(z)?;
    Ok(sigma_unchecked(z, k, max_terms))
}

pub(crate) fn phi_large_unchecked(z: f64, k: &EstimatorConstants, max_terms: u32) -> SeriesEval {
    let pre = (-2.0 * k.tau).exp2() / (2.0 - (-k.tau).exp2());
    if z == 0.0 {
        return SeriesEval { value: 0.0, terms: 0, converged: true };
    }
    let sz = z.sqrt();
    let mut sum = 2.0 * psi_unchecked(z, k) * sz / (1.0 + sz);
    let inv_two_tau = (-k.tau).exp2();
    let mut weight = 1.0;
    // roots[j] = z^(2^-j)
    let mut prev = z; // z^(2^-(u-1))
    let mut cur = sz; // z^(2^-u)
    let mut product = 1.0 + sz;
    for u in 1..max_terms {
        let next = cur.sqrt(); // z^(2^-(u+1))
        product *= 1.0 + next;
        weight *= inv_two_tau;
        let term = weight * next * (2.0 * psi_unchecked(cur, k) - (next + cur) * psi_unchecked(prev, k)) / product;
        if negligible(term, sum) {
            return SeriesEval { value: pre * sum, terms: u, converged: true };
        }
        sum += term;
        prev = cur;
        cur = next;
    }
    SeriesEval { value: pre * sum, terms: max_terms, converged: false }
}

/// Large-range correction `φ(z)`.
pub fn phi_large(z: f64, k: &EstimatorConstants) -> Result<f64> {
    Ok(phi_large_series(z, k, PHI_LARGE_MAX_TERMS)?.value)
}

pub fn phi_large_series(z: f64, k: &EstimatorConstants, max_terms: u32) -> Result<SeriesEval> {
    check_unit(z)?;
    Ok(phi_large_unchecked(z, k, max_terms))
}

fn quadratic_root(alpha: f64, beta: f64, gamma: f64) -> f64 {
    ((beta * beta + 4.0 * alpha * gamma).sqrt() - beta) / (2.0 * alpha)
}

/// Estimate of `z_0 = exp(-n/m)` from the counts of registers 0, 4, 8 and 10.
pub fn small_range_z0(h: &RegisterHistogram) -> f64 {
    let m = h.m() as f64;
    let [c0, c4, c8, c10] = [0u8, 4, 8, 10].map(|r| h.count(r) as f64);
    let alpha = m + 3.0 * (c0 + c4 + c8 + c10);
    let beta = m - c0 - c4;
    let gamma = 4.0 * c0 + 2.0 * c4 + 3.0 * c8 + c10;
    quadratic_root(alpha, beta, gamma).powi(4)
}

/// Estimate of `z_w = exp(-n/(m 2^w))` from the counts of saturated registers.
pub fn large_range_zw(h: &RegisterHistogram) -> f64 {
    let m = h.m() as f64;
    let base = (4 * h.max_update_value()) as u8;
    let [a, b, c, d] = [0u8, 1, 2, 3].map(|i| h.count(base + i) as f64);
    let alpha = m + 3.0 * (a + b + c + d);
    let beta = a + b + 2.0 * c + 2.0 * d;
    let gamma = m + 2.0 * a + c - d;
    quadratic_root(alpha, beta, gamma).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::{max_register_value, MAX_P, MIN_P};

    fn k() -> EstimatorConstants {
        EstimatorConstants::fgra_default()
    }

    fn hist(p: u32, entries: &[(u8, u64)]) -> RegisterHistogram {
        let mut counts = [0u64; 256];
        let mut rest = 1u64 << p;
        for &(r, c) in entries {
            counts[r as usize] += c;
            rest -= c;
        }
        counts[0] += rest;
        RegisterHistogram::from_counts(p, counts).unwrap()
    }

    #[test]
    fn psi_endpoints() {
        let k = k();
        assert!((psi(1.0, &k).unwrap() - k.phi[0]).abs() < 1e-14);
        assert_eq!(psi(0.0, &k).unwrap(), k.phi[3]);
        assert!(psi(1.5, &k).is_err());
        assert!(psi(-0.1, &k).is_err());
        assert!(psi(f64::NAN, &k).is_err());
    }

    #[test]
    fn sigma_special_points() {
        let k = k();
        assert_eq!(sigma(1.0, &k, 8).unwrap(), 0.0);
        assert_eq!(sigma(0.0, &k, 8).unwrap(), k.phi[3]);
        assert!(sigma(1.01, &k, 8).is_err());
        // continuity at 0
        assert!((sigma(1e-12, &k, 8).unwrap() - k.phi[3]).abs() < 1e-9);
    }

    #[test]
    fn sigma_converges_within_cap_for_one_insert() {
        let k = k();
        for p in MIN_P..=MAX_P {
            let z = (-1.0 / (1u64 << p) as f64).exp();
            let eval = sigma_series(z, &k, p + 8).unwrap();
            assert!(eval.converged, "p={p} {eval:?}");
            assert!(eval.terms <= p + 7, "p={p} {eval:?}");
        }
    }

    #[test]
    fn sigma_matches_direct_series() {
        let k = k();
        for &z in &[0.1f64, 0.5, 0.9, 0.99] {
            let mut direct = 0.0;
            for u in 0..200 {
                let a = z.powf(2f64.powi(u));
                let b = z.powf(2f64.powi(u + 1));
                direct += 2f64.powf(k.tau * u as f64) * (a - b) * psi_unchecked(b, &k);
            }
            direct /= z;
            let got = sigma(z, &k, 30).unwrap();
            assert!((got / direct - 1.0).abs() < 1e-13, "z={z}");
        }
    }

    #[test]
    fn phi_large_matches_first_form() {
        let k = k();
        for &z in &[0.05f64, 0.3, 0.7, 0.95] {
            let mut direct = 0.0;
            for u in 0..2000 {
                let a = z.powf(2f64.powi(-u - 1));
                let b = z.powf(2f64.powi(-u));
                direct += 2f64.powf(-k.tau * u as f64) * (a - b) * psi_unchecked(b, &k);
            }
            direct *= 4f64.powf(-k.tau) / (1.0 - z);
            let got = phi_large_series(z, &k, PHI_LARGE_MAX_TERMS).unwrap();
            assert!(got.converged);
            assert!((got.value / direct - 1.0).abs() < 1e-10, "z={z} {} vs {direct}", got.value);
        }
    }

    #[test]
    fn phi_large_endpoints() {
        let k = k();
        let limit = k.phi[0] * 4f64.powf(-k.tau) / (2.0 - 2f64.powf(-k.tau));
        assert!((phi_large(1.0, &k).unwrap() - limit).abs() < 1e-14);
        assert!((phi_large(1.0 - 1e-9, &k).unwrap() - limit).abs() < 1e-7);
        assert_eq!(phi_large(0.0, &k).unwrap(), 0.0);
        assert!(phi_large(2.0, &k).is_err());
    }

    #[test]
    fn phi_large_converges_within_cap() {
        // arguments as produced by the saturated-register estimator, down to the
        // smallest nonzero value (a single register short of full saturation)
        let k = k();
        for p in MIN_P..=MAX_P {
            let m = 1u64 << p;
            let top = max_register_value(p);
            let mut cases = vec![];
            for j in [1, 2, 3, m / 4, m / 2, m - 1] {
                for off in 0..4u8 {
                    cases.push(vec![(top - off, j)]);
                    cases.push(vec![(top - 3, j), (top - off, m - j)]);
                }
            }
            for case in cases {
                let zw = large_range_zw(&hist(p, &case));
                let eval = phi_large_series(zw.sqrt(), &k, PHI_LARGE_MAX_TERMS).unwrap();
                assert!(eval.converged, "p={p} {case:?} {eval:?}");
            }
        }
    }

    #[test]
    fn z0_examples() {
        assert_eq!(small_range_z0(&hist(8, &[])), 1.0);
        let z = small_range_z0(&hist(8, &[(4, 1)]));
        assert!((z - 0.996_097_564_697_265_6).abs() < 1e-15, "{z}");
        assert!((-256.0 * z.ln() - 1.000_977_836).abs() < 1e-8);
    }

    #[test]
    fn zw_examples() {
        assert_eq!(large_range_zw(&hist(8, &[])), 1.0);
        let top = max_register_value(8);
        assert_eq!(large_range_zw(&hist(8, &[(top, 256)])), 0.0);
        let z = large_range_zw(&hist(8, &[(top - 3, 100), (top, 20)]));
        assert!(z > 0.0 && z < 1.0);
    }
}

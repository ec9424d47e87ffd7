use super::corrections::{
    large_range_zw, phi_large_unchecked, psi_unchecked, sigma_unchecked, small_range_z0, PHI_LARGE_MAX_TERMS,
};
use super::sum::NeumaierSum;
use crate::sketch::{max_update_value, RegisterHistogram, MAX_P, MIN_P};
use crate::{Error, Result};

pub(crate) const DEFAULT_TAU: f64 = 0.8194911375910897;
pub(crate) const DEFAULT_V: f64 = 0.6118931496978437;
pub(crate) const DEFAULT_PHI: [f64; 4] = [4.663135422063788, 2.1378502137958524, 2.781144650979996, 0.9824082545153715];

pub(crate) const GRA_TAU: f64 = 0.755097;
pub(crate) const GRA_V: f64 = 0.6169896447;

/// Exponent `τ`, variance factor `v` and low-bit coefficients `φ0..φ3`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EstimatorConstants {
    pub tau: f64,
    pub v: f64,
    pub phi: [f64; 4],
}

impl EstimatorConstants {
    /// The published FGRA constants.
    pub fn fgra_default() -> Self {
        Self { tau: DEFAULT_TAU, v: DEFAULT_V, phi: DEFAULT_PHI }
    }

    /// FGRA constants for an arbitrary `τ`, computed numerically.
    pub fn fgra(tau: f64) -> Result<Self> {
        let phi = crate::theory::fgra_coefficients(2.0, tau)?;
        let v = crate::theory::fgra_variance_factor(2.0, tau)?;
        Self::new(tau, v, phi)
    }

    /// Coefficients reproducing the GRA estimator, for which register
    /// contributions depend on the low bits only through fixed powers of two.
    pub fn gra(tau: f64) -> Result<Self> {
        let phi = crate::theory::gra_coefficients(2.0, tau)?;
        let v = crate::theory::gra_variance_factor(&crate::theory::GeneralizedConfig::ULL, tau)?;
        Self::new(tau, v, phi)
    }

    /// GRA at its optimal exponent `τ ≈ 0.755097`.
    pub fn gra_default() -> Self {
        Self::gra(GRA_TAU).expect("GRA constants are finite at the default exponent")
    }

    pub fn new(tau: f64, v: f64, phi: [f64; 4]) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::Domain(format!("tau must be positive, got {tau}")));
        }
        if !v.is_finite() || phi.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::Domain(format!("invalid coefficients v={v}, phi={phi:?}")));
        }
        Ok(Self { tau, v, phi })
    }

    /// Precision-dependent factor `ξ_p = m^(1+1/τ) / (1 + (1+τ) v / (2m))`.
    pub fn xi(&self, p: u32) -> f64 {
        let m = (1u64 << p) as f64;
        m.powf(1.0 + 1.0 / self.tau) / (1.0 + (1.0 + self.tau) * self.v / (2.0 * m))
    }

    /// Contribution `2^(-τ⌊r/4⌋) φ_(r mod 4)` of an intermediate register value.
    pub fn contribution(&self, r: u8) -> f64 {
        assert!(r >= 12, "register value {r} below the intermediate range");
        (-self.tau * f64::from(r >> 2)).exp2() * self.phi[usize::from(r & 3)]
    }
}

/// FGRA estimator with contributions precomputed for one precision.
#[derive(Clone, Debug)]
pub struct FgraEstimator {
    constants: EstimatorConstants,
    p: u32,
    xi: f64,
    table: [f64; 256],
}

impl FgraEstimator {
    pub fn new(constants: EstimatorConstants, p: u32) -> Result<Self> {
        if !(MIN_P..=MAX_P).contains(&p) {
            return Err(Error::InvalidPrecision(p));
        }
        let w = max_update_value(p);
        let mut table = [0.0; 256];
        for r in 12..4 * w {
            table[r as usize] = constants.contribution(r as u8);
        }
        Ok(Self { constants, p, xi: constants.xi(p), table })
    }

    pub fn default_for(p: u32) -> Result<Self> {
        Self::new(EstimatorConstants::fgra_default(), p)
    }

    pub fn constants(&self) -> &EstimatorConstants {
        &self.constants
    }

    pub fn precision(&self) -> u32 {
        self.p
    }

    /// Corrected contribution sum `S`; the estimate is `ξ_p S^(-1/τ)`.
    pub fn contribution_sum(&self, h: &RegisterHistogram) -> f64 {
        assert_eq!(h.precision(), self.p, "histogram precision does not match the estimator");
        let k = &self.constants;
        let w = h.max_update_value();
        let mut sum = NeumaierSum::new();
        for (r, c) in h.iter() {
            let g = self.table[r as usize];
            if g != 0.0 {
                sum.add(c as f64 * g);
            }
        }

        let [c0, c4, c8, c10] = [0u8, 4, 8, 10].map(|r| h.count(r) as f64);
        if c0 + c4 + c8 + c10 > 0.0 {
            let z = small_range_z0(h);
            let quarter = (-2.0 * k.tau).exp2();
            if c0 > 0.0 {
                sum.add(c0 * sigma_unchecked(z, k, self.p + 8).value);
            }
            if c4 > 0.0 {
                sum.add(c4 * (-k.tau).exp2() * psi_unchecked(z, k));
            }
            if c8 > 0.0 {
                sum.add(c8 * quarter * (z * (k.phi[0] - k.phi[1]) + k.phi[1]));
            }
            if c10 > 0.0 {
                sum.add(c10 * quarter * (z * (k.phi[2] - k.phi[3]) + k.phi[3]));
            }
        }

        let base = (4 * w) as u8;
        let [a, b, c, d] = [0u8, 1, 2, 3].map(|i| h.count(base + i) as f64);
        if a + b + c + d > 0.0 {
            let z = large_range_zw(h);
            let zs = z.sqrt();
            let half = (-k.tau).exp2();
            let [f0, f1, f2, f3] = k.phi;
            let mut s = z * (1.0 + zs) * (f0 * a + f1 * b + f2 * c + f3 * d);
            s += half * zs * (z * (f0 - f2) + f2) * (a + b);
            s += half * zs * (z * (f1 - f3) + f3) * (c + d);
            s += phi_large_unchecked(zs, k, PHI_LARGE_MAX_TERMS).value * (a + b + c + d);
            sum.add(s / ((k.tau * f64::from(w)).exp2() * (1.0 + zs) * (1.0 + z)));
        }
        sum.value()
    }

    /// Distinct-count estimate; 0 for an empty sketch.
    pub fn estimate(&self, h: &RegisterHistogram) -> f64 {
        if h.is_empty() {
            return 0.0;
        }
        let s = self.contribution_sum(h);
        if s <= 0.0 {
            // every register saturated at 4w + 3
            return f64::INFINITY;
        }
        self.xi * s.powf(-1.0 / self.constants.tau)
    }
}

/// FGRA estimate with the given constants.
pub fn fgra_estimate(h: &RegisterHistogram, k: &EstimatorConstants) -> Result<f64> {
    Ok(FgraEstimator::new(*k, h.precision())?.estimate(h))
}

//! Offline distinct-count estimation from a register histogram.
//!
//! [`FgraEstimator`] is the default: cheap, seamless over the whole range and
//! within a few percent of the Cramér-Rao bound. [`ml_estimate`] is slightly more
//! efficient but needs an iterative solver.

mod corrections;
mod fgra;
mod ml;
mod sum;

pub use corrections::{
    large_range_zw, phi_large, phi_large_series, psi, sigma, sigma_series, small_range_z0, SeriesEval,
    PHI_LARGE_MAX_TERMS,
};
pub use fgra::{fgra_estimate, EstimatorConstants, FgraEstimator};
pub use ml::{
    ml_bias_divisor, ml_coefficients, ml_estimate, ml_estimate_uncorrected, ml_log_likelihood, ml_score,
    MlCoefficients, ML_BIAS_CONSTANT,
};
pub use sum::NeumaierSum;

use crate::sketch::RegisterHistogram;

/// Estimators selectable by name, e.g. from the command line or a simulation plan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    /// FGRA with the default constants.
    Fgra,
    /// GRA expressed through the FGRA machinery (`τ ≈ 0.755097`).
    Gra,
    /// Bias-corrected maximum likelihood.
    Ml,
    /// Online martingale estimate (only meaningful during insertion).
    Martingale,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 4] = [Self::Fgra, Self::Gra, Self::Ml, Self::Martingale];

    pub fn name(self) -> &'static str {
        match self {
            Self::Fgra => "fgra",
            Self::Gra => "gra",
            Self::Ml => "ml",
            Self::Martingale => "martingale",
        }
    }

    /// Asymptotic memory-variance product used for the theoretical error curve.
    pub fn mvp(self) -> f64 {
        match self {
            Self::Fgra => 8.0 * fgra::DEFAULT_V,
            Self::Gra => 8.0 * fgra::GRA_V,
            Self::Ml => crate::theory::ULL_MVP_ML,
            Self::Martingale => crate::theory::ULL_MVP_MARTINGALE,
        }
    }

    /// Whether the estimate is a function of the final histogram only.
    pub fn is_offline(self) -> bool {
        !matches!(self, Self::Martingale)
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fgra" => Ok(Self::Fgra),
            "gra" => Ok(Self::Gra),
            "ml" => Ok(Self::Ml),
            "martingale" | "mart" | "hip" => Ok(Self::Martingale),
            other => Err(crate::Error::Domain(format!("unknown estimator '{other}'"))),
        }
    }
}

/// Bundles the precomputed state of all offline estimators for one precision.
#[derive(Clone, Debug)]
pub struct OfflineEstimators {
    fgra: FgraEstimator,
    gra: FgraEstimator,
}

impl OfflineEstimators {
    pub fn new(p: u32) -> crate::Result<Self> {
        Ok(Self {
            fgra: FgraEstimator::default_for(p)?,
            gra: FgraEstimator::new(EstimatorConstants::gra_default(), p)?,
        })
    }

    /// Estimate of an offline estimator. Returns `None` for the martingale.
    pub fn estimate(&self, kind: EstimatorKind, h: &RegisterHistogram) -> Option<f64> {
        match kind {
            EstimatorKind::Fgra => Some(self.fgra.estimate(h)),
            EstimatorKind::Gra => Some(self.gra.estimate(h)),
            EstimatorKind::Ml => Some(ml_estimate(h).unwrap_or(f64::NAN)),
            EstimatorKind::Martingale => None,
        }
    }
}

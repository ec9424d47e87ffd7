//! Asymptotic analysis of the generalized register family.
//!
//! A configuration `(b, q, r)` describes registers that store the maximum update
//! value (base `b`, `r` bits) plus `q` indicator bits for the preceding update
//! values. ULL is `(2, 2, 6)`, HLL is `(2, 0, 6)` and ExaLogLog-style EHLL is
//! `(2, 1, 6)`. Every quantity below is the `m → ∞`, `n → ∞` limit with the
//! periodic fluctuations in `log_b n` neglected.

mod optimize;
mod quadrature;
mod special;

pub use optimize::golden_section;
pub use quadrature::{tanh_sinh, QuadratureResult};
pub use special::{gamma, hurwitz_zeta, ln_gamma};

use crate::{Error, Result};
use std::f64::consts::LN_2;

/// Theoretical MVP of the ML estimator for ULL, `8 ln 2 / ζ(2, 5/4)`.
pub const ULL_MVP_ML: f64 = 4.631289085048860;
/// Theoretical MVP of the martingale estimator for ULL, `5 ln 2`.
pub const ULL_MVP_MARTINGALE: f64 = 3.4657359027997265;

const ENTROPY_TOLERANCE: f64 = 1e-12;

/// Register configuration `(b, q, r)`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GeneralizedConfig {
    pub b: f64,
    pub q: u32,
    pub r: u32,
}

impl GeneralizedConfig {
    pub const ULL: GeneralizedConfig = GeneralizedConfig { b: 2.0, q: 2, r: 6 };
    pub const HLL: GeneralizedConfig = GeneralizedConfig { b: 2.0, q: 0, r: 6 };
    pub const EHLL: GeneralizedConfig = GeneralizedConfig { b: 2.0, q: 1, r: 6 };

    pub fn new(b: f64, q: u32, r: u32) -> Result<Self> {
        let c = Self { b, q, r };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b.is_finite() && self.b > 1.0) {
            return Err(Error::Domain(format!("base must be finite and > 1, got {}", self.b)));
        }
        if self.r == 0 {
            return Err(Error::Domain("r must be at least 1".into()));
        }
        Ok(())
    }

    /// `b^(-q) / (b - 1)`, the quantity through which `q` enters all formulas.
    pub fn c(&self) -> f64 {
        self.b.powf(-f64::from(self.q)) / (self.b - 1.0)
    }

    /// Bits per register, `r + q`.
    pub fn bits(&self) -> u32 {
        self.r + self.q
    }
}

/// All MVP figures of one configuration.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MvpReport {
    pub config: GeneralizedConfig,
    pub fisher_factor: f64,
    /// Bits per register under optimal lossless compression.
    pub entropy_rate: f64,
    pub mvp_uncompressed: f64,
    pub mvp_compressed: f64,
    pub mvp_martingale: f64,
    pub mvp_compressed_martingale: f64,
    pub ml_bias_factor: f64,
}

/// Fisher information factor: `I(n) ≈ (m / n²) ζ(2, 1 + c) / ln b`.
pub fn fisher_factor(cfg: &GeneralizedConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(hurwitz_zeta(2.0, 1.0 + cfg.c())? / cfg.b.ln())
}

/// `∫_0^1 z^c (1 - z) ln(1 - z) / (z ln z) dz`.
pub fn entropy_integral(c: f64, tol: f64) -> QuadratureResult {
    tanh_sinh(
        |z, zc| {
            let ln_z = if z > 0.5 { (-zc).ln_1p() } else { z.ln() };
            // ln(1 - z) / z, finite as z → 0
            let ratio = if z < 0.5 { (-z).ln_1p() / z } else { zc.ln() / z };
            z.powf(c) * zc * ratio / ln_z
        },
        tol,
    )
}

fn entropy_rate_from_c(c: f64, b: f64) -> f64 {
    (1.0 / (1.0 + c) + entropy_integral(c, ENTROPY_TOLERANCE).value) / (LN_2 * b.ln())
}

/// Shannon entropy per register in bits.
pub fn shannon_entropy_rate(cfg: &GeneralizedConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(entropy_rate_from_c(cfg.c(), cfg.b))
}

/// MVP of an efficient estimator with `r + q` bits per register.
pub fn mvp_uncompressed(cfg: &GeneralizedConfig) -> Result<f64> {
    Ok(f64::from(cfg.bits()) / fisher_factor(cfg)?)
}

/// MVP of an efficient estimator under optimal lossless compression.
pub fn mvp_compressed(cfg: &GeneralizedConfig) -> Result<f64> {
    Ok(shannon_entropy_rate(cfg)? / fisher_factor(cfg)?)
}

/// MVP of the martingale estimator.
pub fn mvp_martingale(cfg: &GeneralizedConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(f64::from(cfg.bits()) * 0.5 * cfg.b.ln() * (1.0 + cfg.c()))
}

/// MVP of the martingale estimator under optimal lossless compression.
pub fn mvp_compressed_martingale(cfg: &GeneralizedConfig) -> Result<f64> {
    Ok(shannon_entropy_rate(cfg)? * 0.5 * cfg.b.ln() * (1.0 + cfg.c()))
}

/// Limit of [`mvp_compressed`] as `c → 0` (independent of `b`).
pub fn mvp_compressed_limit() -> f64 {
    entropy_rate_from_c(0.0, 2.0) / (std::f64::consts::PI.powi(2) / 6.0 / LN_2)
}

/// Limit of [`mvp_compressed_martingale`] as `c → 0`.
pub fn mvp_compressed_martingale_limit() -> f64 {
    entropy_rate_from_c(0.0, 2.0) * 0.5 * LN_2
}

/// First-order relative bias of the ML estimator times `m`.
pub fn ml_bias_factor(cfg: &GeneralizedConfig) -> Result<f64> {
    cfg.validate()?;
    let c = cfg.c();
    let z2 = hurwitz_zeta(2.0, 1.0 + c)?;
    Ok(cfg.b.ln() * (1.0 + 2.0 * c) * hurwitz_zeta(3.0, 1.0 + c)? / (z2 * z2))
}

pub fn mvp_report(cfg: &GeneralizedConfig) -> Result<MvpReport> {
    Ok(MvpReport {
        config: *cfg,
        fisher_factor: fisher_factor(cfg)?,
        entropy_rate: shannon_entropy_rate(cfg)?,
        mvp_uncompressed: mvp_uncompressed(cfg)?,
        mvp_compressed: mvp_compressed(cfg)?,
        mvp_martingale: mvp_martingale(cfg)?,
        mvp_compressed_martingale: mvp_compressed_martingale(cfg)?,
        ml_bias_factor: ml_bias_factor(cfg)?,
    })
}

fn check_tau(tau: f64) -> Result<()> {
    if tau.is_finite() && tau > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("tau must be positive, got {tau}")))
    }
}

fn check_base(b: f64) -> Result<()> {
    GeneralizedConfig { b, q: 2, r: 6 }.validate()
}

/// Asymptotic relative variance times `m` of the GRA estimator.
pub fn gra_variance_factor(cfg: &GeneralizedConfig, tau: f64) -> Result<f64> {
    cfg.validate()?;
    check_tau(tau)?;
    let b = cfg.b;
    let q = f64::from(cfg.q);
    let denom = b - 1.0 + b.powf(-q);
    let mut inner = 1.0 + 2.0 * b.powf(-tau * q) / (b.powf(tau) - 1.0);
    for s in 1..=cfg.q {
        let s = f64::from(s);
        inner += 2.0 * b.powf(-tau * s) / (1.0 + (b - 1.0) * b.powf(-s) / denom).powf(2.0 * tau);
    }
    let lead = (ln_gamma(2.0 * tau) - 2.0 * ln_gamma(tau)).exp() * b.ln();
    Ok((lead * inner - 1.0) / (tau * tau))
}

fn gra_coefficients_with(b: f64, tau: f64, pre_base: f64) -> Result<[f64; 4]> {
    check_base(b)?;
    check_tau(tau)?;
    let pre = pre_base.powf(tau) * b.ln() / gamma(tau);
    let base = 1.0 / (b.powf(tau) - 1.0);
    Ok([0usize, 1, 2, 3].map(|j| {
        let b1 = (j >> 1) as f64;
        let b2 = (j & 1) as f64;
        pre * (base + (1.0 - b1) * b.powf(tau) + (1.0 - b2) * b.powf(2.0 * tau))
    }))
}

/// GRA register contribution coefficients for `q = 2`, indexed by the two low bits.
///
/// Normalized with `(b - 1 + b^-q)^τ ln b / Γ(τ)`, which makes the expected
/// contribution sum match `m (n/m)^-τ` so the estimator is asymptotically unbiased.
pub fn gra_coefficients(b: f64, tau: f64) -> Result<[f64; 4]> {
    gra_coefficients_with(b, tau, b - 1.0 + b.powf(-2.0))
}

/// GRA coefficients with the commonly quoted prefactor `(b - 1 + b^-τ)^τ`.
///
/// Gives `φ ≈ (4.841356, 2.539198, 3.477312, 1.175153)` at `b = 2`,
/// `τ = 0.755097`. The prefactor only agrees with [`gra_coefficients`] for
/// `τ = q`; for ULL it inflates all coefficients by 20% at `τ ≈ 0.755`, which
/// biases the estimate by about -21%. Kept for reproducing published tables.
pub fn gra_coefficients_published(b: f64, tau: f64) -> Result<[f64; 4]> {
    gra_coefficients_with(b, tau, b - 1.0 + b.powf(-tau))
}

/// The functions `η_0..η_3` determining the optimal FGRA coefficients.
pub fn fgra_eta(b: f64, tau: f64) -> [f64; 4] {
    let t = |x: f64| x.powf(-tau);
    let b2 = b * b;
    let b3 = b2 * b;
    let a = t(b3 - b + 1.0);
    let c3 = t(b3);
    let d = t(b2 - b + 1.0);
    let c2 = t(b2);
    let e = t(b3 - b2 + 1.0);
    let f = t(b3 - b2 + b);
    [a - c3, d - c2 - a + c3, e - f - a + c3, a - e + f - c3 - d + c2 + 1.0 - t(b)]
}

fn fgra_eta_sum(b: f64, tau: f64) -> Result<([f64; 4], [f64; 4], f64)> {
    check_base(b)?;
    check_tau(tau)?;
    let e1 = fgra_eta(b, tau);
    let e2 = fgra_eta(b, 2.0 * tau);
    if e1.iter().chain(&e2).any(|x| !(*x > 0.0)) {
        return Err(Error::Numeric(format!("eta functions not positive at b={b}, tau={tau}")));
    }
    let s = (0..4).map(|i| e1[i] * e1[i] / e2[i]).sum();
    Ok((e1, e2, s))
}

/// Variance-minimizing coefficients `φ0..φ3` for a fixed `τ`.
pub fn fgra_coefficients(b: f64, tau: f64) -> Result<[f64; 4]> {
    let (e1, e2, s) = fgra_eta_sum(b, tau)?;
    let pre = b.ln() / gamma(tau) / s;
    Ok([0, 1, 2, 3].map(|i| pre * e1[i] / e2[i]))
}

/// Asymptotic relative variance times `m` of FGRA with optimal coefficients.
pub fn fgra_variance_factor(b: f64, tau: f64) -> Result<f64> {
    let (_, _, s) = fgra_eta_sum(b, tau)?;
    let lead = (ln_gamma(2.0 * tau) - 2.0 * ln_gamma(tau)).exp() * b.ln();
    Ok((lead / s - 1.0) / (tau * tau))
}

/// Estimator family whose exponent is optimized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TauObjective {
    Gra,
    Fgra,
}

impl std::str::FromStr for TauObjective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gra" => Ok(Self::Gra),
            "fgra" => Ok(Self::Fgra),
            other => Err(Error::Domain(format!("unknown objective '{other}', expected gra or fgra"))),
        }
    }
}

/// Optimal exponent with the resulting constants (`q = 2`).
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TauOptimum {
    pub objective: TauObjective,
    pub b: f64,
    pub tau: f64,
    pub v: f64,
    pub phi: [f64; 4],
    /// GRA only: coefficients with the commonly quoted prefactor, see
    /// [`gra_coefficients_published`].
    pub phi_published: Option<[f64; 4]>,
    /// `(r + q) v` with `r = 6`.
    pub mvp: f64,
}

const TAU_SEARCH: (f64, f64) = (0.05, 5.0);
const TAU_WIDTH: f64 = 1e-8;

/// Minimizes the variance factor over `τ ∈ [0.05, 5]` by golden-section search.
pub fn optimize_tau(objective: TauObjective, b: f64) -> Result<TauOptimum> {
    check_base(b)?;
    let cfg = GeneralizedConfig { b, q: 2, r: 6 };
    let v = |tau: f64| match objective {
        TauObjective::Gra => gra_variance_factor(&cfg, tau),
        TauObjective::Fgra => fgra_variance_factor(b, tau),
    };
    let (tau, v_min) = golden_section(|t| v(t).unwrap_or(f64::NAN), TAU_SEARCH.0, TAU_SEARCH.1, TAU_WIDTH)?;
    let phi = match objective {
        TauObjective::Gra => gra_coefficients(b, tau)?,
        TauObjective::Fgra => fgra_coefficients(b, tau)?,
    };
    let phi_published = match objective {
        TauObjective::Gra => Some(gra_coefficients_published(b, tau)?),
        TauObjective::Fgra => None,
    };
    Ok(TauOptimum { objective, b, tau, v: v_min, phi, phi_published, mvp: f64::from(cfg.bits()) * v_min })
}

/// Configuration minimizing [`mvp_uncompressed`] for fixed `r`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MvpMinimum {
    pub config: GeneralizedConfig,
    pub mvp: f64,
}

/// Searches `q ∈ [0, q_max]` exhaustively and `b ∈ [1.01, 3]` by a grid scan
/// refined with golden-section search.
pub fn minimize_mvp_uncompressed(r: u32, q_max: u32) -> Result<MvpMinimum> {
    let mut best: Option<MvpMinimum> = None;
    for q in 0..=q_max {
        let f = |b: f64| mvp_uncompressed(&GeneralizedConfig { b, q, r }).unwrap_or(f64::NAN);
        let step = 0.005;
        let (mut b_best, mut f_best) = (1.01, f(1.01));
        let mut b = 1.01;
        while b <= 3.0 {
            let y = f(b);
            if y < f_best {
                b_best = b;
                f_best = y;
            }
            b += step;
        }
        let lo = (b_best - step).max(1.0 + 1e-9);
        let (b_opt, mvp) = golden_section(f, lo, b_best + step, 1e-10)?;
        if best.is_none_or(|m| mvp < m.mvp) {
            best = Some(MvpMinimum { config: GeneralizedConfig { b: b_opt, q, r }, mvp });
        }
    }
    best.ok_or_else(|| Error::Numeric("empty search range".into()))
}

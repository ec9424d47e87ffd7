//! Monte-Carlo harness for estimation-error experiments.
//!
//! Each trial feeds pseudorandom 64-bit words (standing in for hashes of
//! distinct elements) into a fresh sketch and records the relative error of
//! every estimator at each target distinct count. For counts beyond
//! `exact_threshold` the waiting-time mode jumps directly from one register
//! change to the next: for every register `i` and update value `k`, the number of
//! further distinct elements until `(i, k)` first occurs is geometric with
//! success probability `1 / (m 2^min(k, 64 - p))`.
//!
//! Trials are seeded individually and reduced in a fixed order, so results do
//! not depend on the number of threads.

mod output;
mod rng;

pub use crate::estimators::EstimatorKind;
pub use output::{parse_targets, write_csv, CSV_SCHEMA};
pub use rng::SplitMix64;

use crate::estimators::OfflineEstimators;
use crate::martingale::MartingaleEstimator;
use crate::sketch::{max_update_value, Sketch, MAX_P, MIN_P};
use crate::{Error, Result};
use rayon::prelude::*;

/// Switch point from per-element insertion to waiting-time simulation.
pub const DEFAULT_EXACT_THRESHOLD: u64 = 1_000_000;
pub const MAX_EXACT_THRESHOLD: u64 = 10_000_000;

/// Trials per work unit; fixed so the reduction order never depends on threads.
const CHUNK: u64 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimMode {
    /// Insert every element.
    Exact,
    /// Insert up to `exact_threshold`, then jump between register changes.
    Transitions,
}

impl std::str::FromStr for SimMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "transitions" => Ok(Self::Transitions),
            other => Err(Error::InvalidPlan(format!("unknown mode '{other}', expected exact or transitions"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SimPlan {
    pub p: u32,
    pub estimators: Vec<EstimatorKind>,
    /// Strictly ascending distinct counts; integral below `2^53`.
    pub targets: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub exact_threshold: u64,
    pub mode: SimMode,
}

impl SimPlan {
    pub fn new(p: u32, estimators: Vec<EstimatorKind>, targets: Vec<f64>, trials: u64, seed: u64) -> Self {
        Self { p, estimators, targets, trials, seed, exact_threshold: DEFAULT_EXACT_THRESHOLD, mode: SimMode::Exact }
    }

    pub fn with_mode(mut self, mode: SimMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_exact_threshold(mut self, threshold: u64) -> Self {
        self.exact_threshold = threshold;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidPlan(msg));
        if !(MIN_P..=MAX_P).contains(&self.p) {
            return bad(format!("precision {} outside [{MIN_P}, {MAX_P}]", self.p));
        }
        if self.estimators.is_empty() {
            return bad("no estimators selected".into());
        }
        if self.targets.is_empty() {
            return bad("no targets".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.exact_threshold > MAX_EXACT_THRESHOLD {
            return bad(format!("exact threshold {} exceeds {MAX_EXACT_THRESHOLD}", self.exact_threshold));
        }
        for &t in &self.targets {
            if !(t.is_finite() && t >= 0.0) {
                return bad(format!("invalid target {t}"));
            }
            if t < 9_007_199_254_740_992.0 && t.fract() != 0.0 {
                return bad(format!("target {t} is not an integer"));
            }
        }
        if self.targets.windows(2).any(|w| w[0] >= w[1]) {
            return bad("targets must be strictly ascending".into());
        }
        if self.mode == SimMode::Exact {
            let max = *self.targets.last().unwrap();
            if max > self.exact_threshold as f64 {
                return bad(format!("exact mode needs targets <= exact threshold {}, got {max}", self.exact_threshold));
            }
        }
        Ok(())
    }
}

/// Error statistics of one estimator at one target.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ErrorStats {
    pub target_n: f64,
    pub estimator: EstimatorKind,
    pub trials: u64,
    pub mean_rel_bias: f64,
    pub rel_rmse: f64,
    pub theoretical_rmse: f64,
}

/// Asymptotic relative standard error `sqrt(mvp / (8 m))` of an 8-bit register sketch.
pub fn theoretical_rmse(mvp: f64, m: f64) -> f64 {
    (mvp / (8.0 * m)).sqrt()
}

/// Relative error, or the raw estimate for a true count of 0.
pub fn relative_error(estimate: f64, n: f64) -> f64 {
    if n == 0.0 {
        estimate
    } else {
        (estimate - n) / n
    }
}

/// Runs one trial and calls `observe(target_index, sketch, martingale)` at every target.
pub fn simulate_trial<F>(
    p: u32,
    targets: &[f64],
    mode: SimMode,
    exact_threshold: u64,
    rng: &mut SplitMix64,
    mut observe: F,
) where
    F: FnMut(usize, &Sketch, &MartingaleEstimator),
{
    let mut sketch = Sketch::new(p).expect("precision validated by caller");
    let mut mart = MartingaleEstimator::new(p);
    let exact_limit = match mode {
        SimMode::Exact => u64::MAX,
        SimMode::Transitions => exact_threshold,
    };

    let mut n = 0u64;
    let mut next = 0;
    while next < targets.len() && targets[next] <= exact_limit as f64 {
        let t = targets[next] as u64;
        while n < t {
            mart.insert_hash(&mut sketch, rng.next_u64());
            n += 1;
        }
        observe(next, &sketch, &mart);
        next += 1;
    }
    if next == targets.len() {
        return;
    }

    while n < exact_limit {
        mart.insert_hash(&mut sketch, rng.next_u64());
        n += 1;
    }
    let events = transition_events(&sketch, n as f64, *targets.last().unwrap(), rng);
    let mut e = 0;
    for (i, &t) in targets.iter().enumerate().skip(next) {
        while e < events.len() && events[e].0 <= t {
            let (_, index, k) = events[e];
            mart.observe(sketch.insert_update(index as usize, k));
            e += 1;
        }
        observe(i, &sketch, &mart);
    }
}

/// Samples the first occurrence after `n0` of every update `(i, k)` that could
/// still change the sketch, keeping those up to `horizon`, sorted by time.
fn transition_events(sketch: &Sketch, n0: f64, horizon: f64, rng: &mut SplitMix64) -> Vec<(f64, u32, u32)> {
    let p = sketch.precision();
    let w = max_update_value(p);
    let m = sketch.num_registers() as f64;
    let probs: Vec<f64> = (0..=w).map(|k| 1.0 / (m * (k.min(64 - p) as f64).exp2())).collect();
    let mut events = Vec::new();
    for (i, &r) in sketch.registers().iter().enumerate() {
        let u = u32::from(r >> 2);
        for k in 1..=w {
            let relevant = r == 0 || k > u || (k + 1 == u && r & 2 == 0) || (k + 2 == u && r & 1 == 0);
            if !relevant {
                continue;
            }
            let t = n0 + rng.geometric(probs[k as usize]);
            if t <= horizon {
                events.push((t, i as u32, k));
            }
        }
    }
    events.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    events
}

#[derive(Clone)]
struct Moments {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Self { sum: vec![0.0; len], sum_sq: vec![0.0; len] }
    }

    fn merge(&mut self, other: &Moments) {
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.sum_sq[i] += other.sum_sq[i];
        }
    }
}

/// Runs the plan and returns one [`ErrorStats`] per (target, estimator),
/// ordered by target and then by the estimator order of the plan.
pub fn run(plan: &SimPlan) -> Result<Vec<ErrorStats>> {
    plan.validate()?;
    let offline = OfflineEstimators::new(plan.p)?;
    let ne = plan.estimators.len();
    let len = plan.targets.len() * ne;
    let chunks = plan.trials.div_ceil(CHUNK);

    let partial: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Moments::new(len);
            for trial in c * CHUNK..((c + 1) * CHUNK).min(plan.trials) {
                let mut rng = SplitMix64::for_trial(plan.seed, trial);
                simulate_trial(plan.p, &plan.targets, plan.mode, plan.exact_threshold, &mut rng, |ti, sketch, mart| {
                    let n = plan.targets[ti];
                    let h = plan.estimators.iter().any(|k| k.is_offline()).then(|| sketch.histogram());
                    for (j, &kind) in plan.estimators.iter().enumerate() {
                        let est = match (kind, &h) {
                            (EstimatorKind::Martingale, _) => mart.estimate(),
                            (_, Some(h)) => offline.estimate(kind, h).unwrap_or(f64::NAN),
                            (_, None) => unreachable!(),
                        };
                        let e = relative_error(est, n);
                        acc.sum[ti * ne + j] += e;
                        acc.sum_sq[ti * ne + j] += e * e;
                    }
                });
            }
            acc
        })
        .collect();

    let mut total = Moments::new(len);
    for part in &partial {
        total.merge(part);
    }

    let m = (1u64 << plan.p) as f64;
    let trials = plan.trials as f64;
    let mut out = Vec::with_capacity(len);
    for (ti, &n) in plan.targets.iter().enumerate() {
        for (j, &kind) in plan.estimators.iter().enumerate() {
            let idx = ti * ne + j;
            out.push(ErrorStats {
                target_n: n,
                estimator: kind,
                trials: plan.trials,
                mean_rel_bias: total.sum[idx] / trials,
                rel_rmse: (total.sum_sq[idx] / trials).sqrt(),
                theoretical_rmse: theoretical_rmse(kind.mvp(), m),
            });
        }
    }
    Ok(out)
}

/// [`run`] for a plan in exact mode.
pub fn run_exact(plan: &SimPlan) -> Result<Vec<ErrorStats>> {
    run(&plan.clone().with_mode(SimMode::Exact))
}

/// [`run`] for a plan in waiting-time mode.
pub fn run_transitions(plan: &SimPlan) -> Result<Vec<ErrorStats>> {
    run(&plan.clone().with_mode(SimMode::Transitions))
}

/// Final sketches of independent trials at distinct count `n`, in trial order.
pub fn final_sketches(
    p: u32,
    n: f64,
    mode: SimMode,
    exact_threshold: u64,
    trials: u64,
    seed: u64,
) -> Result<Vec<Sketch>> {
    let plan = SimPlan::new(p, vec![EstimatorKind::Fgra], vec![n], trials, seed)
        .with_mode(mode)
        .with_exact_threshold(exact_threshold);
    plan.validate()?;
    Ok((0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = SplitMix64::for_trial(seed, trial);
            let mut out = None;
            simulate_trial(p, &[n], mode, exact_threshold, &mut rng, |_, s, _| out = Some(s.clone()));
            out.expect("single target is always observed")
        })
        .collect())
}

/// Plug-in Shannon entropy in bits of a register-value histogram.
pub fn histogram_entropy(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    -counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let q = c as f64 / total;
            q * q.log2()
        })
        .sum::<f64>()
}

/// Empirical entropy per register in bits, pooled over all registers of all trials.
pub fn empirical_entropy(p: u32, n: f64, trials: u64, seed: u64) -> Result<f64> {
    let sketches = final_sketches(p, n, SimMode::Transitions, DEFAULT_EXACT_THRESHOLD, trials, seed)?;
    let mut counts = [0u64; 256];
    for s in &sketches {
        for &r in s.registers() {
            counts[r as usize] += 1;
        }
    }
    Ok(histogram_entropy(&counts))
}

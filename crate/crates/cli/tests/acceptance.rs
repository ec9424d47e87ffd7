//! Acceptance criteria 1-9. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::process::{Command, ExitCode};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use ull_core::estimators::{large_range_zw, phi_large_series, sigma_series, EstimatorConstants, PHI_LARGE_MAX_TERMS};
use ull_core::simkit::{empirical_entropy, final_sketches, parse_targets, run, EstimatorKind, SimMode, SimPlan};
use ull_core::sketch::{hll_reference_insert, is_reachable, max_register_value, pack, unpack, MAX_P, MIN_P};
use ull_core::theory::{
    fgra_variance_factor, gra_variance_factor, ml_bias_factor, mvp_compressed, mvp_martingale, mvp_uncompressed,
    optimize_tau, shannon_entropy_rate, GeneralizedConfig, TauObjective,
};
use ull_core::{RegisterHistogram, Sketch};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn close(x: f64, want: f64, tol: f64) -> bool {
    (x - want).abs() <= tol
}

fn rel_close(x: f64, want: f64, tol: f64) -> bool {
    ((x - want) / want).abs() <= tol
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_ull"))
        .args(["optimize", "--estimator", "fgra", "--b", "2"])
        .output()
        .expect("run ull optimize");
    let elapsed = start.elapsed().as_secs_f64();
    if !out.status.success() {
        return outcome(false, format!("exit status {}", out.status));
    }
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).expect("optimize prints JSON");
    let tau = json["tau"].as_f64().unwrap();
    let v = json["v"].as_f64().unwrap();
    let phi: Vec<f64> = json["phi"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let want_phi = [4.663135, 2.137850, 2.781145, 0.982408];
    let ok = close(tau, 0.8194911, 1e-5)
        && close(v, 0.6118931, 1e-5)
        && phi.iter().zip(want_phi).all(|(&a, b)| close(a, b, 1e-5))
        && elapsed < 1.0;
    outcome(ok, format!("tau={tau:.7} v={v:.7} phi={phi:.6?} in {elapsed:.3}s"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let ull = GeneralizedConfig::ULL;
    let hll = GeneralizedConfig::HLL;
    let q3 = GeneralizedConfig::new(2.0, 3, 6).unwrap();
    let gra = optimize_tau(TauObjective::Gra, 2.0).unwrap();
    let fgra = optimize_tau(TauObjective::Fgra, 2.0).unwrap();
    let rows = [
        ("ULL", mvp_uncompressed(&ull).unwrap(), 4.6313),
        ("HLL", mvp_uncompressed(&hll).unwrap(), 6.4485),
        ("q=3", mvp_uncompressed(&q3).unwrap(), 4.4940),
        ("GRA", 8.0 * gra_variance_factor(&ull, gra.tau).unwrap(), 4.935917),
        ("FGRA", 8.0 * fgra_variance_factor(2.0, fgra.tau).unwrap(), 4.895145),
        ("martingale ULL", mvp_martingale(&ull).unwrap(), 3.4657),
        ("martingale HLL", mvp_martingale(&hll).unwrap(), 4.1589),
        ("compressed ULL", mvp_compressed(&ull).unwrap(), 2.3122),
        ("compressed HLL", mvp_compressed(&hll).unwrap(), 3.0437),
    ];
    let elapsed = start.elapsed().as_secs_f64();
    let bad: Vec<String> = rows
        .iter()
        .filter(|(_, got, want)| !rel_close(*got, *want, 1e-3))
        .map(|(name, got, want)| format!("{name}: {got} vs {want}"))
        .collect();
    let ok = bad.is_empty() && elapsed < 1.0;
    let detail = if bad.is_empty() {
        rows.iter().map(|(n, g, _)| format!("{n}={g:.6}")).collect::<Vec<_>>().join(" ")
    } else {
        bad.join("; ")
    };
    outcome(ok, format!("{detail} in {elapsed:.3}s"))
}

fn criterion_3() -> Outcome {
    let kinds = vec![EstimatorKind::Fgra, EstimatorKind::Ml, EstimatorKind::Martingale];
    let want = [0.04889, 0.04755, 0.04114];
    let plan = SimPlan::new(8, kinds, vec![1e4], 10_000, 3);
    let stats = run(&plan).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for (s, w) in stats.iter().zip(want) {
        let good = rel_close(s.rel_rmse, w, 0.05) && s.mean_rel_bias.abs() < 0.1 * s.rel_rmse;
        ok &= good;
        detail.push(format!("{}: rmse={:.5} (theory {w}) bias={:+.5}", s.estimator, s.rel_rmse, s.mean_rel_bias));
    }
    outcome(ok, detail.join(", "))
}

fn criterion_4() -> Outcome {
    let targets = parse_targets("geom:1:1e12:25").unwrap();
    let plan = SimPlan::new(8, vec![EstimatorKind::Fgra], targets, 2000, 4).with_mode(SimMode::Transitions);
    let stats = run(&plan).unwrap();
    let worst = stats.iter().map(|s| (s.rel_rmse / s.theoretical_rmse, s.target_n)).fold((0.0, 0.0), |a, b| {
        if b.0 > a.0 {
            b
        } else {
            a
        }
    });
    outcome(
        stats.len() == 25 && worst.0 <= 1.3,
        format!("{} targets, worst rmse/theory = {:.4} at n={:e}", stats.len(), worst.0, worst.1),
    )
}

/// Two-sample chi-squared homogeneity test; bins with an expected count below 5
/// in either sample are pooled with their neighbors. Returns (p-value, df).
fn chi_squared_homogeneity(a: &[u64; 256], b: &[u64; 256]) -> (f64, usize) {
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let total = na + nb;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for r in 0..256 {
        acc.0 += a[r] as f64;
        acc.1 += b[r] as f64;
        let col = acc.0 + acc.1;
        if col * na.min(nb) / total >= 5.0 {
            bins.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.0 + acc.1 > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => bins.push(acc),
        }
    }
    let mut stat = 0.0;
    for &(oa, ob) in &bins {
        let col = oa + ob;
        let (ea, eb) = (col * na / total, col * nb / total);
        stat += (oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb;
    }
    let df = bins.len() - 1;
    let p = 1.0 - ChiSquared::new(df as f64).unwrap().cdf(stat);
    (p, df)
}

fn criterion_5() -> Outcome {
    let (p, n, trials) = (3, 1e4, 100_000);
    let marginal = |mode, threshold, seed| {
        let mut counts = [0u64; 256];
        for s in final_sketches(p, n, mode, threshold, trials, seed).unwrap() {
            counts[s.registers()[0] as usize] += 1;
        }
        counts
    };
    let exact = marginal(SimMode::Exact, 10_000, 51);
    let fast = marginal(SimMode::Transitions, 0, 52);
    let (pvalue, df) = chi_squared_homogeneity(&exact, &fast);
    outcome(pvalue > 0.01, format!("register-0 marginal chi2 p-value={pvalue:.4} (df={df}, alpha=0.01)"))
}

fn hash_for(p: u32) -> impl Strategy<Value = u64> {
    (any::<u64>(), any::<u64>(), 0..=(64 - p))
        .prop_map(move |(a, b, s)| (a & !(u64::MAX >> p)) | ((b & (u64::MAX >> p)) >> s))
}

fn record(p: u32, hashes: &[u64]) -> Sketch {
    let mut s = Sketch::new(p).unwrap();
    hashes.iter().for_each(|&h| {
        s.insert_hash(h);
    });
    s
}

static CASES_RUN: AtomicU64 = AtomicU64::new(0);

fn criterion_6() -> Outcome {
    const CASES: u32 = 1000;
    // a runner keeps its case count across runs, so each property gets its own
    let runner = || TestRunner::new(Config { cases: CASES, failure_persistence: None, ..Config::default() });
    let stream = |p: u32| prop::collection::vec(hash_for(p), 0..200);
    let mut results: Vec<(&str, Result<(), String>)> = Vec::new();
    macro_rules! check {
        ($name:expr, $r:expr $(,)?) => {
            results.push(($name, $r.map_err(|e| e.to_string())))
        };
    }

    check!(
        "idempotency",
        runner().run(&(MIN_P..=12u32).prop_flat_map(|p| (Just(p), stream(p))), |(p, h)| {
            CASES_RUN.fetch_add(1, Ordering::Relaxed);
            let once = record(p, &h);
            let doubled: Vec<u64> = h.iter().chain(&h).copied().collect();
            prop_assert_eq!(record(p, &doubled), once);
            Ok(())
        }),
    );
    check!(
        "permutation invariance",
        runner().run(
            &(MIN_P..=12u32).prop_flat_map(move |p| stream(p).prop_flat_map(move |h| (
                Just(p),
                Just(h.clone()),
                Just(h).prop_shuffle()
            ))),
            |(p, h, shuffled)| {
                CASES_RUN.fetch_add(1, Ordering::Relaxed);
                prop_assert_eq!(record(p, &h).to_bytes(), record(p, &shuffled).to_bytes());
                Ok(())
            },
        ),
    );
    check!(
        "merge = union",
        runner().run(
            &(MIN_P..=10u32, 0..=6u32).prop_flat_map(move |(p, d)| (Just(p), Just(p + d), stream(p), stream(p + d))),
            |(pd, ps, a, b)| {
                CASES_RUN.fetch_add(1, Ordering::Relaxed);
                let mut merged = record(pd, &a);
                merged.merge_from(&record(ps, &b)).unwrap();
                let union: Vec<u64> = a.iter().chain(&b).copied().collect();
                prop_assert_eq!(merged.to_bytes(), record(pd, &union).to_bytes());
                Ok(())
            },
        ),
    );
    check!(
        "downsize reducibility",
        runner().run(&(MIN_P..=14u32).prop_flat_map(move |q| (MIN_P..=q, Just(q), stream(q))), |(p, q, h)| {
            CASES_RUN.fetch_add(1, Ordering::Relaxed);
            prop_assert_eq!(record(q, &h).downsize(p).unwrap().to_bytes(), record(p, &h).to_bytes());
            Ok(())
        }),
    );
    check!(
        "codec round-trips",
        runner().run(&(MIN_P..=MAX_P, any::<u8>(), 1u32..=62, 0u64..4), |(p, r, u, low)| {
            CASES_RUN.fetch_add(1, Ordering::Relaxed);
            if is_reachable(r, p) && r >= 4 {
                prop_assert_eq!(pack(unpack(r)), r);
            }
            let x = ((1u64 << (u + 1)) | (low << (u - 1))) & !3;
            prop_assert_eq!(unpack(pack(x)), x);
            Ok(())
        }),
    );
    check!(
        "HLL projection",
        runner().run(&(MIN_P..=12u32).prop_flat_map(move |p| (Just(p), stream(p), hash_for(p))), |(p, h, x)| {
            CASES_RUN.fetch_add(1, Ordering::Relaxed);
            let mut s = record(p, &h);
            let mut hll = s.to_hll_registers();
            s.insert_hash(x);
            hll_reference_insert(&mut hll, x, p);
            prop_assert_eq!(s.to_hll_registers(), hll);
            Ok(())
        }),
    );
    check!(
        "serialization round-trip",
        runner().run(&(MIN_P..=14u32).prop_flat_map(move |p| (Just(p), stream(p))), |(p, h)| {
            CASES_RUN.fetch_add(1, Ordering::Relaxed);
            let s = record(p, &h);
            prop_assert_eq!(Sketch::from_bytes(&s.to_bytes()).unwrap(), s);
            Ok(())
        }),
    );

    let failed: Vec<String> =
        results.iter().filter_map(|(n, r)| r.as_ref().err().map(|e| format!("{n}: {e}"))).collect();
    if failed.is_empty() {
        let names: Vec<&str> = results.iter().map(|(n, _)| *n).collect();
        let ran = CASES_RUN.load(Ordering::Relaxed);
        let ok = ran >= u64::from(CASES) * names.len() as u64;
        outcome(ok, format!("{} properties, {ran} cases run ({CASES} each): {}", names.len(), names.join(", ")))
    } else {
        outcome(false, failed.join("; "))
    }
}

fn criterion_7() -> Outcome {
    let c = ml_bias_factor(&GeneralizedConfig::ULL).unwrap();
    outcome(close(c, 0.48147, 1e-4), format!("ml_bias_factor(2,2)={c:.8}"))
}

fn criterion_8() -> Outcome {
    let rate = shannon_entropy_rate(&GeneralizedConfig::ULL).unwrap();
    let h = empirical_entropy(12, 1e6, 20, 8).unwrap();
    outcome(
        rel_close(h, rate, 0.02),
        format!("empirical {h:.5} bits vs rate {rate:.5} ({:+.3}%)", 100.0 * (h / rate - 1.0)),
    )
}

fn criterion_9() -> Outcome {
    let k = EstimatorConstants::fgra_default();
    let mut sigma_ok = true;
    let mut sigma_worst = 0;
    for p in MIN_P..=MAX_P {
        let z = (-1.0 / (1u64 << p) as f64).exp();
        let e = sigma_series(z, &k, p + 8).unwrap();
        sigma_ok &= e.converged;
        sigma_worst = sigma_worst.max(e.terms as i64 - p as i64);
    }
    let mut phi_ok = true;
    let mut phi_worst = 0;
    for p in MIN_P..=MAX_P {
        let m = 1u64 << p;
        let top = max_register_value(p);
        for j in [1, 2, 3, m / 4, m / 2, m - 1] {
            for off in 0..4u8 {
                for (lo, hi) in [(top - off, top), (top - 3, top - off)] {
                    let mut counts = [0u64; 256];
                    counts[lo as usize] += j;
                    counts[hi as usize] += m - j;
                    let h = RegisterHistogram::from_counts(p, counts).unwrap();
                    let e = phi_large_series(large_range_zw(&h).sqrt(), &k, PHI_LARGE_MAX_TERMS).unwrap();
                    phi_ok &= e.converged;
                    phi_worst = phi_worst.max(e.terms);
                }
            }
        }
    }
    outcome(
        sigma_ok && phi_ok,
        format!(
            "sigma within p+{sigma_worst} terms (cap p+8), phi within {phi_worst} terms (cap {PHI_LARGE_MAX_TERMS})"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("constant reproduction", criterion_1),
        ("MVP table", criterion_2),
        ("intermediate-range error", criterion_3),
        ("full-range robustness", criterion_4),
        ("waiting-time fidelity", criterion_5),
        ("structural invariants", criterion_6),
        ("ML bias constant", criterion_7),
        ("register entropy", criterion_8),
        ("sigma/phi convergence", criterion_9),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        failures += usize::from(!o.pass);
        println!("criterion {} [{tag}] {name}: {} ({:.1}s)", i + 1, o.detail, start.elapsed().as_secs_f64());
    }
    if failures == 0 {
        println!("acceptance: all 9 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} of 9 criteria failed");
        ExitCode::FAILURE
    }
}

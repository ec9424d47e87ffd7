use ull_core::simkit::{empirical_entropy, final_sketches, run, EstimatorKind, SimMode, SimPlan, SplitMix64};
use ull_core::theory::{shannon_entropy_rate, GeneralizedConfig};
use ull_core::{MartingaleEstimator, Sketch};

#[test]
fn martingale_drift_after_a_million_inserts() {
    for p in [4, 10, 16] {
        let mut sketch = Sketch::new(p).unwrap();
        let mut mart = MartingaleEstimator::new(p);
        let mut rng = SplitMix64::new(u64::from(p));
        for _ in 0..1_000_000 {
            mart.insert_hash(&mut sketch, rng.next_u64());
        }
        let before = mart.estimate();
        assert!(mart.resync(&sketch) <= 1e-9, "p={p}");
        assert_eq!(mart.estimate(), before);
        assert!((before / 1e6 - 1.0).abs() < 0.5, "p={p} estimate={before}");
    }
}

#[test]
fn estimators_are_unbiased() {
    let kinds = vec![EstimatorKind::Fgra, EstimatorKind::Ml, EstimatorKind::Martingale];
    for p in [8, 12] {
        let plan = SimPlan::new(p, kinds.clone(), vec![1e3, 1e4, 1e6], 1000, 0x5eed + u64::from(p));
        for s in run(&plan).unwrap() {
            assert!(s.rel_rmse >= s.mean_rel_bias.abs());
            assert!(
                s.mean_rel_bias.abs() < 0.1 * s.rel_rmse,
                "p={p} n={} {}: bias={} rmse={}",
                s.target_n,
                s.estimator,
                s.mean_rel_bias,
                s.rel_rmse
            );
        }
    }
}

#[test]
fn fgra_error_matches_theory_at_a_billion() {
    let plan = SimPlan::new(8, vec![EstimatorKind::Fgra], vec![1e9], 1000, 99).with_mode(SimMode::Transitions);
    let s = &run(&plan).unwrap()[0];
    let ratio = s.rel_rmse / s.theoretical_rmse;
    assert!((0.9..=1.1).contains(&ratio), "ratio={ratio}");
}

/// Two-sample Kolmogorov-Smirnov rejection test at `alpha` (asymptotic critical value).
fn ks_rejects(a: &[u8], b: &[u8], alpha: f64) -> (bool, f64) {
    let mut ca = [0u64; 256];
    let mut cb = [0u64; 256];
    a.iter().for_each(|&r| ca[r as usize] += 1);
    b.iter().for_each(|&r| cb[r as usize] += 1);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut fa, mut fb, mut d) = (0.0, 0.0, 0.0f64);
    for r in 0..256 {
        fa += ca[r] as f64 / na;
        fb += cb[r] as f64 / nb;
        d = d.max((fa - fb).abs());
    }
    let crit = (-(alpha / 2.0).ln() / 2.0).sqrt() * ((na + nb) / (na * nb)).sqrt();
    (d > crit, d)
}

#[test]
fn waiting_time_marginals_match_exact_simulation() {
    let (p, n, trials) = (4, 1e6, 10_000);
    let exact = final_sketches(p, n, SimMode::Exact, 1_000_000, trials, 1).unwrap();
    let fast = final_sketches(p, n, SimMode::Transitions, 0, trials, 2).unwrap();
    for index in [0, 7, 15] {
        let a: Vec<u8> = exact.iter().map(|s| s.registers()[index]).collect();
        let b: Vec<u8> = fast.iter().map(|s| s.registers()[index]).collect();
        let (reject, d) = ks_rejects(&a, &b, 0.01);
        assert!(!reject, "register {index}: D={d}");
    }
}

#[test]
fn empirical_entropy_respects_the_rate() {
    let rate = shannon_entropy_rate(&GeneralizedConfig::ULL).unwrap();
    for (p, n) in [(8, 1e5), (10, 1e6), (12, 1e7)] {
        let h = empirical_entropy(p, n, 20, 3).unwrap();
        assert!(h >= rate - 0.05, "p={p} n={n} h={h} rate={rate}");
        assert!((h / rate - 1.0).abs() < 0.02, "p={p} n={n} h={h} rate={rate}");
    }
    assert_eq!(empirical_entropy(8, 0.0, 5, 3).unwrap(), 0.0);
}

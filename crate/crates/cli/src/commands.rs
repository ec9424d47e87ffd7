use crate::{usage, UsageError};
use anyhow::Context;
use clap::Args;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use ull_core::estimators::{EstimatorConstants, EstimatorKind};
use ull_core::simkit::{self, parse_targets, SimMode, SimPlan, DEFAULT_EXACT_THRESHOLD};
use ull_core::theory::{self, GeneralizedConfig, TauObjective};

pub const THEORY_SCHEMA: &str = "ull-theory/1";
pub const OPTIMIZE_SCHEMA: &str = "ull-optimize/1";
pub const CONSTANTS_SCHEMA: &str = "ull-constants/1";

const CONSTANTS_TOLERANCE: f64 = 1e-6;

#[derive(Args)]
pub struct SimulateArgs {
    /// Precision (log2 of the register count), 3..=26.
    #[arg(long)]
    p: u32,
    /// Comma-separated estimators: fgra, gra, ml, martingale.
    #[arg(long, default_value = "fgra,ml,martingale")]
    estimators: String,
    /// Comma-separated distinct counts and/or geom:start:stop:points sweeps.
    #[arg(long)]
    targets: String,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// exact or transitions.
    #[arg(long, default_value = "exact")]
    mode: String,
    /// Distinct count up to which elements are inserted one by one.
    #[arg(long, default_value_t = DEFAULT_EXACT_THRESHOLD)]
    exact_threshold: u64,
    /// Worker threads (default: all cores). The output does not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn parse_estimators(s: &str) -> anyhow::Result<Vec<EstimatorKind>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let kind: EstimatorKind = item.parse().map_err(|e: ull_core::Error| UsageError(e.to_string()))?;
        if !out.contains(&kind) {
            out.push(kind);
        }
    }
    Ok(out)
}

pub fn simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let estimators = parse_estimators(&args.estimators)?;
    let targets = parse_targets(&args.targets).map_err(|e| UsageError(e.to_string()))?;
    let mode: SimMode = args.mode.parse().map_err(|e: ull_core::Error| UsageError(e.to_string()))?;
    let plan = SimPlan::new(args.p, estimators, targets, args.trials, args.seed)
        .with_mode(mode)
        .with_exact_threshold(args.exact_threshold);
    if let Err(e) = plan.validate() {
        return usage(e.to_string());
    }
    if args.threads == Some(0) {
        return usage("--threads must be at least 1");
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().context("cannot start worker threads")?;
    let stats = pool.install(|| simkit::run(&plan))?;
    let mut out = output(&args.out)?;
    simkit::write_csv(&mut out, &stats)?;
    out.flush()?;
    Ok(())
}

#[derive(Args)]
pub struct TheoryArgs {
    /// Base b > 1.
    #[arg(long, default_value_t = 2.0)]
    b: f64,
    /// Number of extra bits q.
    #[arg(long, default_value_t = 2)]
    q: u32,
    /// Bits for the maximum update value.
    #[arg(long, default_value_t = 6)]
    r: u32,
    /// Sweep b over a log grid for every q in --q-list.
    #[arg(long)]
    grid: bool,
    #[arg(long, default_value_t = 1.05)]
    b_min: f64,
    #[arg(long, default_value_t = 4.0)]
    b_max: f64,
    #[arg(long, default_value_t = 50)]
    points: usize,
    #[arg(long, default_value = "0,1,2,3,4,5,6")]
    q_list: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn g(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn theory(args: TheoryArgs) -> anyhow::Result<()> {
    let configs: Vec<GeneralizedConfig> = if args.grid {
        if !(args.b_min > 1.0 && args.b_max >= args.b_min && args.points >= 1) {
            return usage("grid needs 1 < b-min <= b-max and at least one point");
        }
        let mut qs = Vec::new();
        for item in args.q_list.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            qs.push(item.parse::<u32>().map_err(|_| UsageError(format!("invalid q '{item}'")))?);
        }
        let (lo, hi) = (args.b_min.ln(), args.b_max.ln());
        let mut out = Vec::new();
        for &q in &qs {
            for i in 0..args.points {
                let f = if args.points == 1 { 0.0 } else { i as f64 / (args.points - 1) as f64 };
                out.push(GeneralizedConfig { b: (lo + (hi - lo) * f).exp(), q, r: args.r });
            }
        }
        out
    } else {
        vec![GeneralizedConfig { b: args.b, q: args.q, r: args.r }]
    };
    for c in &configs {
        if let Err(e) = c.validate() {
            return usage(e.to_string());
        }
    }
    let mut out = output(&args.out)?;
    writeln!(out, "# schema: {THEORY_SCHEMA}")?;
    writeln!(
        out,
        "b,q,r,fisher_factor,entropy_rate,mvp_uncompressed,mvp_compressed,mvp_martingale,mvp_compressed_martingale,ml_bias_factor"
    )?;
    for c in &configs {
        let rep = theory::mvp_report(c)?;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            g(c.b),
            c.q,
            c.r,
            g(rep.fisher_factor),
            g(rep.entropy_rate),
            g(rep.mvp_uncompressed),
            g(rep.mvp_compressed),
            g(rep.mvp_martingale),
            g(rep.mvp_compressed_martingale),
            g(rep.ml_bias_factor)
        )?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Args)]
pub struct OptimizeArgs {
    /// gra or fgra.
    #[arg(long, default_value = "fgra")]
    estimator: String,
    #[arg(long, default_value_t = 2.0)]
    b: f64,
}

pub fn optimize(args: OptimizeArgs) -> anyhow::Result<()> {
    let objective: TauObjective = args.estimator.parse().map_err(|e: ull_core::Error| UsageError(e.to_string()))?;
    if !(args.b.is_finite() && args.b > 1.0) {
        return usage(format!("base must be > 1, got {}", args.b));
    }
    let opt = theory::optimize_tau(objective, args.b)?;
    let mut json = serde_json::json!({
        "schema": OPTIMIZE_SCHEMA,
        "estimator": opt.objective,
        "b": opt.b,
        "tau": opt.tau,
        "v": opt.v,
        "phi": opt.phi,
        "mvp": opt.mvp,
    });
    if let Some(published) = opt.phi_published {
        json["phi_published"] = serde_json::json!(published);
    }
    println!("{}", serde_json::to_string_pretty(&json)?);
    Ok(())
}

pub fn constants() -> anyhow::Result<()> {
    let baked = EstimatorConstants::fgra_default();
    let fresh = theory::optimize_tau(TauObjective::Fgra, 2.0)?;
    let mut drift = (baked.tau - fresh.tau).abs().max((baked.v - fresh.v).abs());
    for i in 0..4 {
        drift = drift.max((baked.phi[i] - fresh.phi[i]).abs());
    }
    let ok = drift <= CONSTANTS_TOLERANCE;
    let json = serde_json::json!({
        "schema": CONSTANTS_SCHEMA,
        "builtin": baked,
        "optimized": { "tau": fresh.tau, "v": fresh.v, "phi": fresh.phi },
        "max_abs_drift": drift,
        "tolerance": CONSTANTS_TOLERANCE,
        "ok": ok,
    });
    println!("{}", serde_json::to_string_pretty(&json)?);
    if !ok {
        anyhow::bail!("built-in constants drift from the optimization by {drift:e}");
    }
    Ok(())
}

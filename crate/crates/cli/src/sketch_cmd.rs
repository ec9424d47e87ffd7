use crate::{usage, UsageError};
use anyhow::Context;
use clap::{Args, Subcommand};
use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, BufReader, Read};
use std::path::{Path, PathBuf};
use ull_core::estimators::{EstimatorKind, OfflineEstimators};
use ull_core::sketch::{SplitMixHasher, MAX_P, MIN_P};
use ull_core::Sketch;

pub const EXPORT_SCHEMA: &str = "ull-sketch-export/1";
const DEFAULT_P: u32 = 12;

#[derive(Subcommand)]
pub enum SketchCommand {
    /// Inserts newline-delimited tokens (or raw hashes) into a sketch file,
    /// creating it if needed.
    Add(AddArgs),
    /// Merges sketches; the result has the smallest input precision.
    Merge {
        #[arg(required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reduces a sketch to a lower precision.
    Downsize {
        input: PathBuf,
        #[arg(long)]
        p: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Prints the distinct-count estimate.
    Estimate {
        input: PathBuf,
        /// fgra, gra or ml.
        #[arg(long, default_value = "fgra")]
        estimator: String,
    },
    /// Prints precision, registers and register histogram as JSON.
    Export { input: PathBuf },
}

#[derive(Args)]
pub struct AddArgs {
    /// Sketch file, created if it does not exist.
    sketch: PathBuf,
    /// Precision of a newly created sketch (default 12); must match an existing file.
    #[arg(long)]
    p: Option<u32>,
    /// Treat every line as a 64-bit hash written as 16 hex digits.
    #[arg(long)]
    raw: bool,
    /// Seed of the bundled token hasher.
    #[arg(long, default_value_t = 0)]
    hash_seed: u64,
    /// Token file (default: stdin).
    #[arg(long)]
    input: Option<PathBuf>,
}

pub fn read_sketch(path: &Path) -> anyhow::Result<Sketch> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    Sketch::from_bytes(&bytes).with_context(|| format!("invalid sketch file {}", path.display()))
}

fn write_sketch(path: &Path, sketch: &Sketch) -> anyhow::Result<()> {
    fs::write(path, sketch.to_bytes()).with_context(|| format!("cannot write {}", path.display()))
}

fn check_precision(p: u32) -> anyhow::Result<()> {
    if (MIN_P..=MAX_P).contains(&p) {
        Ok(())
    } else {
        usage(format!("precision {p} outside [{MIN_P}, {MAX_P}]"))
    }
}

fn parse_raw_hash(line: &str, line_no: usize) -> anyhow::Result<u64> {
    if line.len() != 16 || !line.bytes().all(|b| b.is_ascii_hexdigit()) {
        anyhow::bail!("line {line_no}: expected 16 hex digits, got '{line}'");
    }
    Ok(u64::from_str_radix(line, 16)?)
}

fn add(args: AddArgs) -> anyhow::Result<()> {
    if let Some(p) = args.p {
        check_precision(p)?;
    }
    let mut sketch = if args.sketch.exists() {
        let s = read_sketch(&args.sketch)?;
        if let Some(p) = args.p.filter(|&p| p != s.precision()) {
            return usage(format!("--p {p} does not match the existing sketch precision {}", s.precision()));
        }
        s
    } else {
        Sketch::new(args.p.unwrap_or(DEFAULT_P))?
    };
    let reader: Box<dyn Read> = match &args.input {
        Some(path) => Box::new(fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?),
        None => Box::new(io::stdin().lock()),
    };
    let hasher = SplitMixHasher::with_seed(args.hash_seed);
    let mut reader = BufReader::new(reader);
    let mut line = Vec::new();
    let mut line_no = 0;
    loop {
        line.clear();
        if reader.read_until(b'\n', &mut line)? == 0 {
            break;
        }
        line_no += 1;
        if line.last() == Some(&b'\n') {
            line.pop();
            if line.last() == Some(&b'\r') {
                line.pop();
            }
        }
        if line.is_empty() {
            continue;
        }
        if args.raw {
            let text = std::str::from_utf8(&line).map_err(|_| anyhow::anyhow!("line {line_no}: not UTF-8"))?;
            sketch.insert_hash(parse_raw_hash(text.trim(), line_no)?);
        } else {
            sketch.insert(&line, &hasher);
        }
    }
    write_sketch(&args.sketch, &sketch)
}

pub fn run(cmd: SketchCommand) -> anyhow::Result<()> {
    match cmd {
        SketchCommand::Add(args) => add(args),
        SketchCommand::Merge { inputs, out } => {
            let sketches = inputs.iter().map(|p| read_sketch(p)).collect::<anyhow::Result<Vec<_>>>()?;
            let p = sketches.iter().map(Sketch::precision).min().expect("at least one input");
            let mut acc = Sketch::new(p)?;
            for s in &sketches {
                acc.merge_from(s)?;
            }
            write_sketch(&out, &acc)
        }
        SketchCommand::Downsize { input, p, out } => {
            check_precision(p)?;
            let s = read_sketch(&input)?;
            if p > s.precision() {
                return usage(format!("cannot downsize precision {} to {p}", s.precision()));
            }
            write_sketch(&out, &s.downsize(p)?)
        }
        SketchCommand::Estimate { input, estimator } => {
            let kind: EstimatorKind = estimator.parse().map_err(|e: ull_core::Error| UsageError(e.to_string()))?;
            if !kind.is_offline() {
                return usage(
                    "the martingale estimate depends on the insertion history and is not stored in sketch files",
                );
            }
            let s = read_sketch(&input)?;
            let est = OfflineEstimators::new(s.precision())?.estimate(kind, &s.histogram()).expect("offline estimator");
            if est.is_nan() {
                anyhow::bail!("estimator {kind} failed to converge");
            }
            println!("{est}");
            Ok(())
        }
        SketchCommand::Export { input } => {
            let s = read_sketch(&input)?;
            let histogram: BTreeMap<String, u64> = s.histogram().iter().map(|(r, c)| (r.to_string(), c)).collect();
            let json = serde_json::json!({
                "schema": EXPORT_SCHEMA,
                "p": s.precision(),
                "registers": s.registers(),
                "histogram": histogram,
            });
            println!("{}", serde_json::to_string(&json)?);
            Ok(())
        }
    }
}

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use compresspp::diagnostics::{mmd_empirical, mmd_to_target};
use compresspp::io::save_points;
use compresspp::SeedPath;
use compresspp_bench::suite::{
    fit_records, input_for_cli, read_records, run_algorithm, run_suite, write_records, Algo, Curve, SuiteConfig,
};

/// Distribution compression benchmarks.
///
/// Set COMPRESSPP_THREADS to cap the worker pool used for replicates and
/// Gram-matrix sums.
#[derive(Parser)]
#[command(name = "compresspp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark suite described by a JSON config and write one record per run.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output path; `.jsonl` selects JSON lines, anything else CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compress one input and write the coreset.
    Thin {
        #[arg(long)]
        algo: Algo,
        /// Target preset to sample from (ignored with --chain).
        #[arg(long, default_value = "gauss_d2")]
        target: String,
        /// Input size (a power of 4).
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        g: u32,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Headerless CSV chain to thin to n points instead of sampling.
        #[arg(long)]
        chain: Option<PathBuf>,
        /// Standardize chain coordinates.
        #[arg(long)]
        normalize: bool,
        /// Use the corrected second mixture mean in mog_M* presets.
        #[arg(long)]
        corrected_mog: bool,
        /// Where to write the coreset (CSV, or JSON lines for `.jsonl`).
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit log-log slopes per algorithm from a record file.
    Fit {
        #[arg(long)]
        records: PathBuf,
        /// mmd, kernel_evals or wall_time.
        #[arg(long, default_value = "mmd")]
        curve: Curve,
        /// Replicates counted as timing runs for the wall_time curve.
        #[arg(long, default_value_t = 3)]
        timing_reps: usize,
    },
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("COMPRESSPP_THREADS") {
        let n: usize = v.parse().with_context(|| format!("COMPRESSPP_THREADS={v:?} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    init_threads()?;
    match Cli::parse().command {
        Command::Run { config, out } => {
            let cfg = SuiteConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
            let records = run_suite(&cfg)?;
            write_records(&out, &records)?;
            println!("wrote {} records to {}", records.len(), out.display());
        }
        Command::Thin { algo, target, n, g, delta, seed, chain, normalize, corrected_mog, out } => {
            let (s, kernel, tgt) =
                input_for_cli(&target, corrected_mog, n, seed, chain.as_deref().map(|p| (p, normalize)))?;
            let res =
                run_algorithm(algo, &s, kernel, g, delta, &SeedPath::new(seed).split(n as u64).split(0).split(1))?;
            let mmd = match &tgt {
                Some(t) => mmd_to_target(&kernel, t, &res.coreset)?,
                None => mmd_empirical(&kernel, &s, &res.coreset)?,
            };
            save_points(&res.coreset, &out)?;
            println!(
                "algo={algo} n={n} out={} g={} mmd={mmd:.6e} kernel_evals={} halve_calls={} wall_time_s={:.6}",
                res.coreset.len(),
                res.g,
                res.kernel_evals,
                res.halve_calls,
                res.wall_time_s
            );
        }
        Command::Fit { records, curve, timing_reps } => {
            let recs = read_records(&records)?;
            if recs.is_empty() {
                bail!("{} holds no records", records.display());
            }
            for (algo, fit) in fit_records(&recs, curve, timing_reps) {
                match fit {
                    Ok(f) => println!("{algo}: slope={:.4} intercept={:.4} r2={:.4}", f.slope, f.intercept, f.r2),
                    Err(e) => println!("{algo}: no fit ({e})"),
                }
            }
        }
    }
    Ok(())
}

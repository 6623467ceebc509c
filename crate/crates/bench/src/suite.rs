//! Benchmark suite: configuration, algorithm runners and record I/O.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use compresspp::compress::{compress_indices, compresspp_indices};
use compresspp::diagnostics::{fit_decay, mmd_empirical, mmd_to_target, DecayFit};
use compresspp::points::standard_thin_indices;
use compresspp::thinners::{herding, kt};
use compresspp::{
    BudgetVariant, CompressConfig, CountingKernel, Error, HalveAlgorithm, HalverSpec, KernelSpec, PointSeq, Result,
    SeedPath, TargetSpec, ThinAlgorithm, ThinnerSpec,
};
use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{ar1_chain, ingest_chain, thin_chain};
use crate::targets::{preset, sample_target};

/// Algorithms the harness can run. Each maps `n` input points to `√n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algo {
    /// Standard thinning.
    St,
    /// A uniformly random subset of the input.
    Iid,
    /// Full kernel thinning.
    Kt,
    /// Kernel herding.
    Herd,
    /// Compress with symmetrized KT halving and `g = 0`.
    KtCompress,
    /// Compress++ with symmetrized KT halving and KT thinning.
    KtCompresspp,
    /// Compress++ with symmetrized herding halving and herding thinning.
    HerdCompresspp,
}

impl Algo {
    pub const ALL: [Algo; 7] =
        [Algo::St, Algo::Iid, Algo::Kt, Algo::Herd, Algo::KtCompress, Algo::KtCompresspp, Algo::HerdCompresspp];

    pub fn id(self) -> &'static str {
        match self {
            Algo::St => "st",
            Algo::Iid => "iid",
            Algo::Kt => "kt",
            Algo::Herd => "herd",
            Algo::KtCompress => "kt_compress",
            Algo::KtCompresspp => "kt_compresspp",
            Algo::HerdCompresspp => "herd_compresspp",
        }
    }

    fn index(self) -> u64 {
        Algo::ALL.iter().position(|&a| a == self).unwrap_or(0) as u64
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algo::ALL.into_iter().find(|a| a.id() == s).ok_or_else(|| Error::Config(format!("unknown algorithm {s:?}")))
    }
}

/// Where an external-sample target comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    /// Headerless CSV of post-burn-in rows; when absent a synthetic AR(1) chain is used.
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// Standardize coordinates with full-chain statistics.
    #[serde(default)]
    pub normalize: bool,
    /// Synthetic chain length (default: 4 × the largest grid size).
    #[serde(default)]
    pub synthetic_len: Option<usize>,
    #[serde(default = "default_chain_dim")]
    pub synthetic_dim: usize,
    #[serde(default = "default_rho")]
    pub synthetic_rho: f64,
}

fn default_chain_dim() -> usize {
    2
}
fn default_rho() -> f64 {
    0.9
}
fn default_g() -> u32 {
    4
}
fn default_delta() -> f64 {
    0.5
}
fn default_reps() -> usize {
    10
}
fn default_timing_reps() -> usize {
    3
}

/// Suite configuration, read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    /// Preset id (`gauss_d2`, `mog_M8`, ...) or `chain`.
    pub target: String,
    pub algorithms: Vec<Algo>,
    /// Input sizes; each must be a power of 4.
    pub n_grid: Vec<usize>,
    #[serde(default = "default_g")]
    pub g: u32,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Replicates per (algorithm, n).
    #[serde(default = "default_reps")]
    pub reps: usize,
    /// The first `timing_reps` replicates run one at a time so their wall
    /// times are not skewed by concurrent work.
    #[serde(default = "default_timing_reps")]
    pub timing_reps: usize,
    #[serde(default)]
    pub seed: u64,
    /// Overrides the `2d` bandwidth rule.
    #[serde(default)]
    pub bandwidth_sq: Option<f64>,
    #[serde(default)]
    pub chain: Option<ChainConfig>,
    /// Use `μ₂ = [3, 3]` in the `mog_M*` presets.
    #[serde(default)]
    pub corrected_mog: bool,
}

impl SuiteConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SuiteConfig = serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Checks every field and reports all problems at once, each prefixed by its path.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.target == "chain" {
            match &self.chain {
                None => errs.push("chain: required when target is \"chain\"".to_string()),
                Some(c) => {
                    if c.path.is_none() && c.synthetic_dim == 0 {
                        errs.push("chain.synthetic_dim: must be positive".into());
                    }
                    if !(c.synthetic_rho.abs() < 1.0) {
                        errs.push(format!("chain.synthetic_rho: {} is not in (-1, 1)", c.synthetic_rho));
                    }
                }
            }
        } else if let Err(e) = preset(&self.target, self.corrected_mog) {
            errs.push(format!("target: {e}"));
        }
        if self.algorithms.is_empty() {
            errs.push("algorithms: at least one algorithm is required".into());
        }
        if self.n_grid.is_empty() {
            errs.push("n_grid: at least one size is required".into());
        }
        for (i, &n) in self.n_grid.iter().enumerate() {
            if !(n >= 4 && n.is_power_of_two() && n.trailing_zeros() % 2 == 0) {
                errs.push(format!("n_grid[{i}]: {n} is not a power of 4 (>= 4)"));
            }
        }
        if self.g > 12 {
            errs.push(format!("g: {} is too large", self.g));
        }
        if self.g == 0 && self.algorithms.contains(&Algo::KtCompresspp) {
            errs.push("g: kt_compresspp needs g >= 1".into());
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            errs.push(format!("delta: {} is not in (0, 1)", self.delta));
        }
        if self.reps == 0 {
            errs.push("reps: must be positive".into());
        }
        if let Some(b) = self.bandwidth_sq {
            if !(b > 0.0 && b.is_finite()) {
                errs.push(format!("bandwidth_sq: {b} must be positive"));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs.join("; ")))
        }
    }
}

/// One benchmark row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub algo_id: String,
    pub n: usize,
    pub d: usize,
    pub target_id: String,
    pub g: u32,
    pub delta: f64,
    pub mmd: f64,
    pub wall_time_s: f64,
    pub halve_calls: usize,
    pub kernel_evals: u64,
    pub peak_points: usize,
    pub seed: u64,
    pub rep: usize,
}

/// Output of a single algorithm run.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub coreset: PointSeq,
    pub halve_calls: usize,
    pub kernel_evals: u64,
    pub wall_time_s: f64,
    /// The oversampling parameter actually used.
    pub g: u32,
}

/// `√n` for a power of 4.
fn root(n: usize) -> usize {
    1usize << (n.trailing_zeros() / 2)
}

/// Runs `algo` on `s` (of size a power of 4), counting kernel evaluations.
pub fn run_algorithm(
    algo: Algo,
    s: &PointSeq,
    kernel: KernelSpec,
    g: u32,
    delta: f64,
    seed: &SeedPath,
) -> Result<RunOutput> {
    let n = s.len();
    if !(n.is_power_of_two() && n.trailing_zeros() % 2 == 0) {
        return Err(Error::Size(format!("benchmark inputs must have a power-of-4 size, got {n}")));
    }
    let m = root(n);
    // Compress++ needs n >= 4^g; smaller inputs use the largest admissible g.
    let g_eff = g.min(n.trailing_zeros() / 2);
    let ck = CountingKernel::new(kernel);
    let start = Instant::now();
    let (idx, halve_calls) = match algo {
        Algo::St => (standard_thin_indices(n, m)?, 0),
        Algo::Iid => (sample(&mut seed.rng(), n, m).into_vec(), 0),
        Algo::Kt => (kt(s, &ck, delta, n / m, seed)?, 0),
        Algo::Herd => {
            let out = herding(s, &ck, m, false)?;
            let elapsed = start.elapsed().as_secs_f64();
            return Ok(RunOutput {
                coreset: out,
                halve_calls: 0,
                kernel_evals: ck.count(),
                wall_time_s: elapsed,
                g: 0,
            });
        }
        Algo::KtCompress => {
            let cfg = CompressConfig::kt_compress(kernel, 0, delta);
            let (idx, trace) = compress_indices(s, &cfg, &ck, seed)?;
            (idx, trace.halve_calls.len())
        }
        Algo::KtCompresspp | Algo::HerdCompresspp => {
            let cfg = if algo == Algo::KtCompresspp {
                if g_eff == 0 {
                    return Err(Error::Config("kt_compresspp needs g >= 1".into()));
                }
                CompressConfig::kt_compresspp(kernel, g_eff, delta)
            } else {
                herd_compresspp_config(kernel, g_eff, delta)
            };
            let (idx, trace) = compresspp_indices(s, &cfg, &ck, seed)?;
            (idx, trace.halve_calls.len())
        }
    };
    let wall_time_s = start.elapsed().as_secs_f64();
    let g_used = matches!(algo, Algo::KtCompresspp | Algo::HerdCompresspp).then_some(g_eff).unwrap_or(0);
    Ok(RunOutput { coreset: s.select(&idx), halve_calls, kernel_evals: ck.count(), wall_time_s, g: g_used })
}

/// Compress++ with symmetrized distinct-point herding as Halve and herding as Thin.
pub fn herd_compresspp_config(kernel: KernelSpec, g: u32, delta: f64) -> CompressConfig {
    CompressConfig {
        g,
        halver: HalverSpec::new(HalveAlgorithm::Herding, Some(kernel), delta, true),
        thinner: Some(ThinnerSpec {
            algorithm: ThinAlgorithm::Herding,
            kernel: Some(kernel),
            delta,
            thin_factor: 1 << g,
        }),
        delta,
        budget_variant: BudgetVariant::FixedDelta,
        parallel: false,
    }
}

/// Input sequences for the suite: sampled from a preset, or drawn from a chain.
enum Source {
    Analytic { target: TargetSpec },
    Chain { chain: PointSeq, normalize: bool },
}

struct Prepared {
    source: Source,
    target_id: String,
    kernel: KernelSpec,
    d: usize,
}

fn prepare(cfg: &SuiteConfig) -> Result<Prepared> {
    if cfg.target == "chain" {
        let c = cfg.chain.as_ref().ok_or_else(|| Error::Config("chain: missing".into()))?;
        let n_max = cfg.n_grid.iter().copied().max().unwrap_or(4);
        let chain = match &c.path {
            Some(p) => compresspp::io::load_points(p)?,
            None => {
                let len = c.synthetic_len.unwrap_or(4 * n_max);
                ar1_chain(len, c.synthetic_dim, c.synthetic_rho, &SeedPath::new(cfg.seed).split(u64::MAX))?
            }
        };
        let d = chain.dim();
        let kernel = KernelSpec::gaussian(cfg.bandwidth_sq.unwrap_or(2.0 * d as f64))?;
        let target_id = match &c.path {
            Some(p) => format!("chain:{}", p.display()),
            None => "chain:ar1".to_string(),
        };
        Ok(Prepared { source: Source::Chain { chain, normalize: c.normalize }, target_id, kernel, d })
    } else {
        let p = preset(&cfg.target, cfg.corrected_mog)?;
        let kernel = KernelSpec::gaussian(cfg.bandwidth_sq.unwrap_or(p.bandwidth_sq))?;
        let d = p.target.dim();
        Ok(Prepared { source: Source::Analytic { target: p.target }, target_id: p.id, kernel, d })
    }
}

impl Prepared {
    fn input(&self, n: usize, rep: usize, root_seed: u64) -> Result<PointSeq> {
        match &self.source {
            Source::Analytic { target } => {
                sample_target(target, n, &SeedPath::new(root_seed).split(n as u64).split(rep as u64).split(0))
            }
            // A chain gives one input per n; replicates differ only in algorithm randomness.
            Source::Chain { chain, normalize } => thin_chain(chain, n, *normalize),
        }
    }

    fn mmd(&self, input: &PointSeq, coreset: &PointSeq) -> Result<f64> {
        match &self.source {
            Source::Analytic { target } => mmd_to_target(&self.kernel, target, coreset),
            Source::Chain { .. } => mmd_empirical(&self.kernel, input, coreset),
        }
    }
}

fn run_cell(
    cfg: &SuiteConfig,
    prep: &Prepared,
    input: &PointSeq,
    algo: Algo,
    n: usize,
    rep: usize,
) -> Result<ExperimentRecord> {
    let seed = SeedPath::new(cfg.seed).split(n as u64).split(rep as u64).split(1).split(algo.index());
    let out = run_algorithm(algo, input, prep.kernel, cfg.g, cfg.delta, &seed)?;
    let mmd = prep.mmd(input, &out.coreset)?;
    log::debug!("{algo} n={n} rep={rep}: mmd={mmd:.4e} evals={} t={:.3}s", out.kernel_evals, out.wall_time_s);
    Ok(ExperimentRecord {
        algo_id: algo.id().to_string(),
        n,
        d: prep.d,
        target_id: prep.target_id.clone(),
        g: out.g,
        delta: cfg.delta,
        mmd,
        wall_time_s: out.wall_time_s,
        halve_calls: out.halve_calls,
        kernel_evals: out.kernel_evals,
        peak_points: n,
        seed: cfg.seed,
        rep,
    })
}

/// Runs every (algorithm, n, replicate) cell. Every algorithm sees the same
/// input for a given (n, replicate). Records are ordered by n, replicate and
/// algorithm.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    let prep = prepare(cfg)?;
    if let Source::Chain { chain, .. } = &prep.source {
        if let Some(&n) = cfg.n_grid.iter().find(|&&n| n > chain.len()) {
            return Err(Error::Config(format!("n_grid: {n} exceeds the chain length {}", chain.len())));
        }
    }
    let total_reps = cfg.reps.max(cfg.timing_reps);
    let timed = cfg.timing_reps.min(total_reps);
    let mut records = Vec::new();
    for &n in &cfg.n_grid {
        let inputs: Vec<PointSeq> = (0..total_reps).map(|rep| prep.input(n, rep, cfg.seed)).collect::<Result<_>>()?;
        for (rep, input) in inputs.iter().enumerate().take(timed) {
            for &algo in &cfg.algorithms {
                records.push(run_cell(cfg, &prep, input, algo, n, rep)?);
            }
        }
        let cells: Vec<(usize, Algo)> =
            (timed..total_reps).flat_map(|rep| cfg.algorithms.iter().map(move |&a| (rep, a))).collect();
        let rest: Vec<ExperimentRecord> = cells
            .par_iter()
            .map(|&(rep, algo)| run_cell(cfg, &prep, &inputs[rep], algo, n, rep))
            .collect::<Result<_>>()?;
        records.extend(rest);
        log::info!("finished n={n}");
    }
    Ok(records)
}

/// Thin a fresh input for the `thin` subcommand.
pub fn input_for_cli(
    target: &str,
    corrected_mog: bool,
    n: usize,
    seed: u64,
    chain: Option<(&Path, bool)>,
) -> Result<(PointSeq, KernelSpec, Option<TargetSpec>)> {
    match chain {
        Some((path, normalize)) => {
            let s = ingest_chain(path, n, normalize)?;
            let k = KernelSpec::gaussian(2.0 * s.dim() as f64)?;
            Ok((s, k, None))
        }
        None => {
            let p = preset(target, corrected_mog)?;
            let s = sample_target(&p.target, n, &SeedPath::new(seed).split(n as u64).split(0).split(0))?;
            Ok((s, p.kernel(), Some(p.target)))
        }
    }
}

fn is_jsonl(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "jsonl")
}

/// Writes records as CSV, or JSONL when the path ends in `.jsonl`.
pub fn write_records(path: &Path, records: &[ExperimentRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    if is_jsonl(path) {
        for r in records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
    } else {
        let mut wr = csv::Writer::from_writer(w);
        for r in records {
            wr.serialize(r)?;
        }
        wr.flush()?;
    }
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let f = File::open(path)?;
    if is_jsonl(path) {
        let mut out = Vec::new();
        for line in BufReader::new(f).lines() {
            let line = line?;
            if !line.trim().is_empty() {
                out.push(serde_json::from_str(&line)?);
            }
        }
        Ok(out)
    } else {
        csv::Reader::from_reader(f).deserialize().map(|r| r.map_err(Error::from)).collect()
    }
}

/// Quantity fitted against `n` in log-log space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Curve {
    Mmd,
    KernelEvals,
    WallTime,
}

impl FromStr for Curve {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mmd" => Ok(Curve::Mmd),
            "kernel_evals" => Ok(Curve::KernelEvals),
            "wall_time" => Ok(Curve::WallTime),
            other => Err(Error::Config(format!("unknown curve {other:?}; use mmd, kernel_evals or wall_time"))),
        }
    }
}

/// Per-algorithm means of `curve` at each `n`.
pub fn curve_means(
    records: &[ExperimentRecord],
    curve: Curve,
    timing_reps: usize,
) -> BTreeMap<String, Vec<(f64, f64)>> {
    let mut acc: BTreeMap<(String, usize), (f64, usize)> = BTreeMap::new();
    for r in records {
        let v = match curve {
            Curve::Mmd => r.mmd,
            Curve::KernelEvals => r.kernel_evals as f64,
            Curve::WallTime if r.rep < timing_reps => r.wall_time_s,
            Curve::WallTime => continue,
        };
        let e = acc.entry((r.algo_id.clone(), r.n)).or_insert((0.0, 0));
        e.0 += v;
        e.1 += 1;
    }
    let mut out: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for ((algo, n), (sum, count)) in acc {
        out.entry(algo).or_default().push((n as f64, sum / count as f64));
    }
    out
}

/// Log-log fit per algorithm; algorithms with fewer than three positive
/// means are reported as errors.
pub fn fit_records(
    records: &[ExperimentRecord],
    curve: Curve,
    timing_reps: usize,
) -> BTreeMap<String, Result<DecayFit>> {
    curve_means(records, curve, timing_reps).into_iter().map(|(algo, pts)| (algo, fit_decay(&pts))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config() -> SuiteConfig {
        SuiteConfig::from_json(r#"{"target":"gauss_d2","algorithms":["st","kt_compresspp"],"n_grid":[64,256]}"#)
            .unwrap()
    }

    #[test]
    fn defaults_follow_protocol() {
        let c = base_config();
        assert_eq!((c.g, c.delta, c.reps, c.timing_reps, c.seed), (4, 0.5, 10, 3, 0));
    }

    #[test]
    fn validation_lists_paths() {
        let err = SuiteConfig::from_json(r#"{"target":"nope","algorithms":[],"n_grid":[64,100],"delta":2.0,"reps":0}"#)
            .unwrap_err()
            .to_string();
        for needle in ["target:", "algorithms:", "n_grid[1]:", "delta:", "reps:"] {
            assert!(err.contains(needle), "{needle} missing from {err}");
        }
        assert!(SuiteConfig::from_json(r#"{"target":"gauss_d2","algorithms":["bogus"],"n_grid":[64]}"#).is_err());
        assert!(SuiteConfig::from_json(r#"{"target":"chain","algorithms":["st"],"n_grid":[64]}"#).is_err());
    }

    #[test]
    fn algo_ids_round_trip() {
        for a in Algo::ALL {
            assert_eq!(a.id().parse::<Algo>().unwrap(), a);
            assert_eq!(serde_json::to_string(&a).unwrap(), format!("\"{}\"", a.id()));
        }
    }

    #[test]
    fn every_algorithm_returns_root_n_points() {
        let s = sample_target(&TargetSpec::GaussianIid { d: 2 }, 256, &SeedPath::new(1)).unwrap();
        let k = KernelSpec::gaussian(4.0).unwrap();
        for a in Algo::ALL {
            let out = run_algorithm(a, &s, k, 2, 0.5, &SeedPath::new(2)).unwrap();
            assert_eq!(out.coreset.len(), 16, "{a}");
            let counts = matches!(a, Algo::St | Algo::Iid);
            assert_eq!(out.kernel_evals == 0, counts, "{a}");
        }
    }

    #[test]
    fn small_inputs_clamp_g() {
        let s = sample_target(&TargetSpec::GaussianIid { d: 2 }, 64, &SeedPath::new(1)).unwrap();
        let out = run_algorithm(Algo::KtCompresspp, &s, KernelSpec::gaussian(4.0).unwrap(), 4, 0.5, &SeedPath::new(2))
            .unwrap();
        assert_eq!(out.g, 3);
        assert_eq!(out.coreset.len(), 8);
    }

    #[test]
    fn suite_is_reproducible_and_paired() {
        let mut c = base_config();
        c.reps = 3;
        c.timing_reps = 1;
        let a = run_suite(&c).unwrap();
        let b = run_suite(&c).unwrap();
        assert_eq!(a.len(), 2 * 3 * 2);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.mmd.to_bits(), y.mmd.to_bits());
            assert_eq!(x.kernel_evals, y.kernel_evals);
        }
        assert!(a.iter().all(|r| r.mmd >= 0.0 && r.wall_time_s >= 0.0 && r.peak_points == r.n));
    }

    #[test]
    fn chain_suite_runs() {
        let c = SuiteConfig::from_json(
            r#"{"target":"chain","algorithms":["st","kt"],"n_grid":[16,64],"reps":2,"timing_reps":1,
                "chain":{"normalize":true,"synthetic_len":1000}}"#,
        )
        .unwrap();
        let recs = run_suite(&c).unwrap();
        assert_eq!(recs.len(), 8);
        assert!(recs.iter().all(|r| r.target_id == "chain:ar1" && r.d == 2));
    }

    #[test]
    fn curve_means_and_fit() {
        let mk = |n: usize, rep: usize, mmd: f64| ExperimentRecord {
            algo_id: "st".into(),
            n,
            d: 2,
            target_id: "gauss_d2".into(),
            g: 0,
            delta: 0.5,
            mmd,
            wall_time_s: 0.1 * rep as f64,
            halve_calls: 0,
            kernel_evals: 0,
            peak_points: n,
            seed: 0,
            rep,
        };
        let mut recs = Vec::new();
        for n in [16usize, 64, 256] {
            let v = (n as f64).powf(-0.25);
            recs.push(mk(n, 0, v * 0.9));
            recs.push(mk(n, 1, v * 1.1));
        }
        let fits = fit_records(&recs, Curve::Mmd, 3);
        assert!((fits["st"].as_ref().unwrap().slope + 0.25).abs() < 1e-12);
        assert!(fit_records(&recs, Curve::KernelEvals, 3)["st"].is_err());
        let t = curve_means(&recs, Curve::WallTime, 1);
        assert!(t["st"].iter().all(|&(_, v)| v == 0.0));
    }
}

//! Compress and Compress++.
//!
//! Compress splits its input into four contiguous blocks, compresses each
//! recursively, concatenates the results and halves them. The recursion
//! bottoms out at `4^g` points, so an input of `n = 4^{k+g}` points yields
//! `2^g √n` points after Halve calls on sizes `ℓ_n 2^{-i}` (`4^i` calls at
//! level `i`), where `ℓ_n = 2^{g+1} √n`. Compress++ then thins that
//! intermediate coreset by `2^g` down to `√n` points.
//!
//! Every recursive call draws randomness from its own [`SeedPath`] child, so
//! parallel and serial execution give identical results.

mod budget;
mod recursion;
mod streaming;

pub use budget::{choose_g, delta_budget, failure_mass, thin_delta_budget, BudgetVariant, GRule, EXPERIMENTS_G};
pub use recursion::{
    compresspp_error, compresspp_runtime, error_recursion, recursion_summary, runtime_recursion, ErrorRecursion,
    RecursionSummary,
};
pub use streaming::{compress_streaming, StreamEmission, StreamingCompress};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelSpec};
use crate::points::{PointSeq, SeedPath};
use crate::thinners::{HalveAlgorithm, HalverSpec, NoKernel, ThinAlgorithm, ThinnerSpec};

/// Below this many points the four recursive branches run serially even
/// when parallelism is enabled.
const PARALLEL_MIN_POINTS: usize = 1024;

/// `ℓ_n = 2^{g+1} √n`, the input size of the top-level Halve call.
pub fn ell_n(n: usize, g: u32) -> usize {
    (1usize << (g + 1)) * (1usize << (n.trailing_zeros() / 2))
}

/// `β_n = log₄ n − g − 1`, the deepest Halve level (`-1` when `n = 4^g`).
pub fn beta_n(n: usize, g: u32) -> i64 {
    (n.trailing_zeros() / 2) as i64 - g as i64 - 1
}

/// Whether `n = 4^k · 4^g` for some `k >= 0`.
pub fn is_valid_size(n: usize, g: u32) -> bool {
    n.is_power_of_two() && n.trailing_zeros() % 2 == 0 && n.trailing_zeros() / 2 >= g
}

pub(crate) fn check_size(n: usize, g: u32) -> Result<()> {
    if g > 30 {
        return Err(Error::InvalidParameter(format!("oversampling parameter g={g} is too large")));
    }
    if !is_valid_size(n, g) {
        return Err(Error::Size(format!("n={n} is not of the form 4^k * 4^g with g={g}")));
    }
    Ok(())
}

/// Configuration of Compress / Compress++.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompressConfig {
    /// Oversampling parameter.
    pub g: u32,
    pub halver: HalverSpec,
    /// Required by Compress++ only; its `thin_factor` must be `2^g`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thinner: Option<ThinnerSpec>,
    /// Global failure probability, split across calls by `budget_variant`.
    pub delta: f64,
    pub budget_variant: BudgetVariant,
    /// Run the four recursive branches on the rayon pool.
    #[serde(default)]
    pub parallel: bool,
}

impl CompressConfig {
    /// KT-Compress: symmetrized KT halving with the matching budgets.
    pub fn kt_compress(kernel: KernelSpec, g: u32, delta: f64) -> Self {
        Self {
            g,
            halver: HalverSpec::new(HalveAlgorithm::Kt, Some(kernel), delta, true),
            thinner: None,
            delta,
            budget_variant: BudgetVariant::Ex5KtCompress,
            parallel: false,
        }
    }

    /// KT-Compress++: symmetrized KT halving and KT thinning by `2^g`.
    pub fn kt_compresspp(kernel: KernelSpec, g: u32, delta: f64) -> Self {
        Self {
            g,
            halver: HalverSpec::new(HalveAlgorithm::Kt, Some(kernel), delta, true),
            thinner: Some(ThinnerSpec {
                algorithm: ThinAlgorithm::Kt,
                kernel: Some(kernel),
                delta,
                thin_factor: 1 << g,
            }),
            delta,
            budget_variant: BudgetVariant::Ex7KtCpp,
            parallel: false,
        }
    }

    /// kt-split Compress: symmetrized kernel halving with the matching budgets.
    pub fn ktsplit_compress(kernel: KernelSpec, g: u32, delta: f64) -> Self {
        Self {
            g,
            halver: HalverSpec::new(HalveAlgorithm::KernelHalve, Some(kernel), delta, true),
            thinner: None,
            delta,
            budget_variant: BudgetVariant::Ex3KtsplitCompress,
            parallel: false,
        }
    }

    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if self.g > 30 {
            return Err(Error::Config(format!("g={} is too large", self.g)));
        }
        self.halver.validate()?;
        if let Some(t) = &self.thinner {
            t.validate()?;
            if t.thin_factor != 1usize << self.g {
                return Err(Error::Config(format!(
                    "thinner thin_factor must be 2^g = {}, got {}",
                    1usize << self.g,
                    t.thin_factor
                )));
            }
        }
        if self.budget_variant.is_compresspp() && self.g == 0 {
            let msg = "Compress++ budget variants give the Thin call zero failure probability when g = 0; \
                       use g >= 1 or the fixed_delta variant";
            log::warn!("{msg}");
            return Err(Error::Config(msg.into()));
        }
        if self.budget_variant == BudgetVariant::Ex7KtCpp {
            let halver_ok = self.halver.algorithm == HalveAlgorithm::Kt && self.halver.symmetrized;
            let thinner_ok = self.thinner.as_ref().is_none_or(|t| t.algorithm == ThinAlgorithm::Kt);
            if !halver_ok || !thinner_ok {
                return Err(Error::Config("ex7_kt_cpp wiring needs a symmetrized kt halver and a kt thinner".into()));
            }
        }
        Ok(())
    }

    fn validate_compresspp(&self) -> Result<&ThinnerSpec> {
        let thinner = self.thinner.as_ref().ok_or_else(|| Error::Config("Compress++ needs a thinner".into()))?;
        if matches!(self.budget_variant, BudgetVariant::Ex3KtsplitCompress | BudgetVariant::Ex5KtCompress) {
            return Err(Error::Config(format!(
                "{:?} budgets Compress only; use ex6_ktsplit_cpp, ex7_kt_cpp or fixed_delta for Compress++",
                self.budget_variant
            )));
        }
        Ok(thinner)
    }

    /// The configured kernel shared by the halver and thinner, if any.
    fn kernel(&self) -> Result<Option<KernelSpec>> {
        let h = self.halver.kernel;
        let t = self.thinner.as_ref().and_then(|t| t.kernel);
        match (h, t) {
            (Some(a), Some(b)) if a != b => Err(Error::Config("halver and thinner kernels differ".into())),
            (a, b) => Ok(a.or(b)),
        }
    }
}

/// One Halve invocation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalveCall {
    /// Recursion depth; the final Halve of the top-level call is level 0.
    pub level: u32,
    pub size: usize,
    pub delta: f64,
}

/// The Compress++ Thin invocation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThinCall {
    pub size: usize,
    pub delta: f64,
}

/// Audit record of the calls made by a run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CompressTrace {
    pub halve_calls: Vec<HalveCall>,
    pub thin_call: Option<ThinCall>,
    /// Peak number of stored points (streaming runs only).
    pub peak_stored_points: Option<usize>,
}

impl CompressTrace {
    /// Number of Halve calls per input size, sorted by decreasing size.
    pub fn histogram(&self) -> Vec<(usize, usize)> {
        let mut counts = std::collections::BTreeMap::new();
        for c in &self.halve_calls {
            *counts.entry(c.size).or_insert(0usize) += 1;
        }
        counts.into_iter().rev().collect()
    }

    /// One JSON object per line: `{"level":i,"size":ℓ,"delta":δ'}` for each
    /// Halve call, then `{"thin":true,"size":ℓ,"delta":δ'}` for the Thin call.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for c in &self.halve_calls {
            serde_json::to_writer(&mut w, c)?;
            w.write_all(b"\n")?;
        }
        if let Some(t) = &self.thin_call {
            let row = serde_json::json!({ "thin": true, "size": t.size, "delta": t.delta });
            serde_json::to_writer(&mut w, &row)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Expected Halve histogram of Compress: `4^i` calls at size `ℓ_n 2^{-i}`.
pub fn expected_histogram(n: usize, g: u32) -> Result<Vec<(usize, usize)>> {
    check_size(n, g)?;
    let beta = beta_n(n, g);
    Ok((0..=beta).map(|i| (ell_n(n, g) >> i, 1usize << (2 * i))).collect())
}

struct Ctx<'a, K: ?Sized> {
    s: &'a PointSeq,
    k: &'a K,
    cfg: &'a CompressConfig,
    n: usize,
}

/// Compresses the contiguous block `[start, start + len)`; returns indices into `s`.
fn compress_block<K: Kernel + ?Sized>(
    ctx: &Ctx<'_, K>,
    start: usize,
    len: usize,
    level: u32,
    seed: &SeedPath,
    calls: &mut Vec<HalveCall>,
) -> Result<Vec<usize>> {
    let g = ctx.cfg.g;
    if len == 1usize << (2 * g) {
        return Ok((start..start + len).collect());
    }
    let q = len / 4;
    let mut parts: [(Vec<usize>, Vec<HalveCall>); 4] = Default::default();
    if ctx.cfg.parallel && len >= PARALLEL_MIN_POINTS {
        let run = |i: usize| -> Result<(Vec<usize>, Vec<HalveCall>)> {
            let mut c = Vec::new();
            let idx = compress_block(ctx, start + i * q, q, level + 1, &seed.split(i as u64), &mut c)?;
            Ok((idx, c))
        };
        let ((a, b), (c, d)) = rayon::join(|| rayon::join(|| run(0), || run(1)), || rayon::join(|| run(2), || run(3)));
        parts = [a?, b?, c?, d?];
    } else {
        for (i, part) in parts.iter_mut().enumerate() {
            part.0 = compress_block(ctx, start + i * q, q, level + 1, &seed.split(i as u64), &mut part.1)?;
        }
    }
    let mut merged = Vec::with_capacity(parts.iter().map(|p| p.0.len()).sum());
    for (idx, c) in parts {
        merged.extend(idx);
        calls.extend(c);
    }
    let size = merged.len();
    let delta = delta_budget(ctx.cfg.budget_variant, size, ctx.n, g, ctx.cfg.delta)?;
    let sub = ctx.s.select(&merged);
    let outcome = ctx.cfg.halver.halve_with(&sub, ctx.k, delta, &seed.split(4))?;
    if cfg!(debug_assertions) {
        outcome.check_contract(size)?;
    }
    calls.push(HalveCall { level, size, delta });
    Ok(outcome.output().iter().map(|&j| merged[j]).collect())
}

/// Compress returning indices into `s`, evaluating the halver with `k`.
pub fn compress_indices<K: Kernel + ?Sized>(
    s: &PointSeq,
    cfg: &CompressConfig,
    k: &K,
    seed: &SeedPath,
) -> Result<(Vec<usize>, CompressTrace)> {
    cfg.validate()?;
    let n = s.len();
    check_size(n, cfg.g)?;
    let ctx = Ctx { s, k, cfg, n };
    let mut calls = Vec::new();
    let idx = compress_block(&ctx, 0, n, 0, seed, &mut calls)?;
    Ok((idx, CompressTrace { halve_calls: calls, ..Default::default() }))
}

/// Compress++ returning indices into `s`, evaluating both stages with `k`.
pub fn compresspp_indices<K: Kernel + ?Sized>(
    s: &PointSeq,
    cfg: &CompressConfig,
    k: &K,
    seed: &SeedPath,
) -> Result<(Vec<usize>, CompressTrace)> {
    let thinner = cfg.validate_compresspp()?;
    let (mid, mut trace) = compress_indices(s, cfg, k, &seed.split(0))?;
    let n = s.len();
    let delta = thin_delta_budget(cfg.budget_variant, n, cfg.g, cfg.delta)?;
    let sub = s.select(&mid);
    let out = thinner.thin_with(&sub, k, delta, &seed.split(1))?;
    trace.thin_call = Some(ThinCall { size: mid.len(), delta });
    Ok((out.into_iter().map(|j| mid[j]).collect(), trace))
}

/// Compress with the halver's configured kernel; output has `2^g √n` points of `s`.
pub fn compress(s: &PointSeq, cfg: &CompressConfig, seed: &SeedPath) -> Result<(PointSeq, CompressTrace)> {
    let (idx, trace) = match cfg.kernel()? {
        Some(k) => compress_indices(s, cfg, &k, seed)?,
        None => compress_indices(s, cfg, &NoKernel, seed)?,
    };
    Ok((s.select(&idx), trace))
}

/// Compress++ with the configured kernel; output has `√n` points of `s`.
pub fn compresspp(s: &PointSeq, cfg: &CompressConfig, seed: &SeedPath) -> Result<(PointSeq, CompressTrace)> {
    let (idx, trace) = match cfg.kernel()? {
        Some(k) => compresspp_indices(s, cfg, &k, seed)?,
        None => compresspp_indices(s, cfg, &NoKernel, seed)?,
    };
    Ok((s.select(&idx), trace))
}

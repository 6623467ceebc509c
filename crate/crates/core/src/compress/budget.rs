//! Failure-probability budgets and oversampling-parameter rules.
//!
//! Each budget variant hands every Halve (and, for Compress++, the single
//! Thin) call its own failure probability `δ'` so that a union bound over all
//! calls succeeds with probability at least `1 - δ/2`. Each call fails with
//! probability at most `δ'/2`; [`failure_mass`] sums that over a trace.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{beta_n, check_size, ell_n, CompressTrace};
use crate::error::{Error, Result};

/// How the global failure probability is split across calls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetVariant {
    /// kt-split Compress: Halve gets `ℓ²/(n 4^{g+1} (β_n+1)) δ`.
    Ex3KtsplitCompress,
    /// KT-Compress: same Halve budget with symmetrized KT as Halve.
    Ex5KtCompress,
    /// kt-split Compress++: Halve gets `ℓ²/(4n 2^g (g + 2^g(β_n+1))) δ`,
    /// Thin gets `g/(g + 2^g(β_n+1)) δ`.
    Ex6KtsplitCpp,
    /// KT-Compress++: the Compress++ budgets with symmetrized KT as Halve and KT as Thin.
    Ex7KtCpp,
    /// Every call receives the global δ unchanged.
    FixedDelta,
}

impl BudgetVariant {
    /// Whether the variant allocates a Thin budget (Compress++ wiring).
    pub fn is_compresspp(self) -> bool {
        matches!(self, Self::Ex6KtsplitCpp | Self::Ex7KtCpp)
    }

    /// Whether the variant splits δ across calls (as opposed to passing it through).
    pub fn is_union_bound(self) -> bool {
        !matches!(self, Self::FixedDelta)
    }
}

fn check_global_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("global delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

/// `g + 2^g (β_n + 1)`, the common denominator of the Compress++ budgets.
fn cpp_denominator(n: usize, g: u32) -> f64 {
    g as f64 + (1u64 << g) as f64 * (beta_n(n, g) + 1) as f64
}

/// Failure probability for one Halve call on an input of size `ell`.
///
/// `ell` must be one of the Halve input sizes `ℓ_n 2^{-i}`, `i = 0..=β_n`.
pub fn delta_budget(variant: BudgetVariant, ell: usize, n: usize, g: u32, delta: f64) -> Result<f64> {
    check_size(n, g)?;
    check_global_delta(delta)?;
    let beta = beta_n(n, g);
    let top = ell_n(n, g);
    let valid = (0..=beta).any(|i| top >> i == ell);
    if beta < 0 || !valid {
        return Err(Error::InvalidParameter(format!("{ell} is not a Halve input size for n={n}, g={g}")));
    }
    let (l, nf) = (ell as f64, n as f64);
    Ok(match variant {
        BudgetVariant::Ex3KtsplitCompress | BudgetVariant::Ex5KtCompress => {
            l * l / (nf * 4f64.powi(g as i32 + 1) * (beta + 1) as f64) * delta
        }
        BudgetVariant::Ex6KtsplitCpp | BudgetVariant::Ex7KtCpp => {
            l * l / (4.0 * nf * (1u64 << g) as f64 * cpp_denominator(n, g)) * delta
        }
        BudgetVariant::FixedDelta => delta,
    })
}

/// Failure probability for the Compress++ Thin call.
///
/// Zero when `g = 0` under the Compress++ variants; Compress-only variants
/// have no Thin budget.
pub fn thin_delta_budget(variant: BudgetVariant, n: usize, g: u32, delta: f64) -> Result<f64> {
    check_size(n, g)?;
    check_global_delta(delta)?;
    match variant {
        BudgetVariant::Ex6KtsplitCpp | BudgetVariant::Ex7KtCpp => Ok(g as f64 / cpp_denominator(n, g) * delta),
        BudgetVariant::FixedDelta => Ok(delta),
        BudgetVariant::Ex3KtsplitCompress | BudgetVariant::Ex5KtCompress => {
            Err(Error::Unsupported(format!("{variant:?} budgets Compress only and has no Thin budget")))
        }
    }
}

/// Union-bound failure mass of every call in `trace`: `Σ δ'/2`.
pub fn failure_mass(trace: &CompressTrace) -> f64 {
    let halves: f64 = trace.halve_calls.iter().map(|c| c.delta / 2.0).sum();
    halves + trace.thin_call.as_ref().map_or(0.0, |t| t.delta / 2.0)
}

/// Rule for picking the oversampling parameter `g`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GRule {
    /// Compress alone: `g = 0` gives the smallest error bound.
    CompressErrBound,
    /// `⌈log₄ log₄ n + log₂ ratio⌉`: Compress++ matches Thin's sub-Gaussian error up to √2.
    CppSubgauss,
    /// `⌈log₂ log(n+1) + log₂(8.5 ratio)⌉`: Compress++ MMD within a factor 4 of Thin.
    CppMmd,
    /// `⌈log₂ log n + 3.1⌉`, the KT-Compress++ default.
    KtCppDefault,
    /// The fixed `g = 4` used throughout the benchmark experiments.
    Experiments,
}

impl FromStr for GRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "compress_err_bound" => Self::CompressErrBound,
            "cpp_subgauss" => Self::CppSubgauss,
            "cpp_mmd" => Self::CppMmd,
            "kt_cpp_default" => Self::KtCppDefault,
            "experiments" => Self::Experiments,
            other => return Err(Error::InvalidParameter(format!("unknown g rule {other:?}"))),
        })
    }
}

/// The `g` used by the benchmark experiments.
pub const EXPERIMENTS_G: u32 = 4;

/// Smallest non-negative integer satisfying `rule`. `ratio` is the Halve/Thin
/// error-parameter ratio (1 when both come from the same algorithm).
pub fn choose_g(n: usize, rule: GRule, ratio: f64) -> Result<u32> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!("choose_g needs n >= 4, got {n}")));
    }
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::InvalidParameter(format!("ratio must be positive, got {ratio}")));
    }
    let nf = n as f64;
    let bound = match rule {
        GRule::CompressErrBound => return Ok(0),
        GRule::Experiments => return Ok(EXPERIMENTS_G),
        GRule::CppSubgauss => (nf.ln() / 4f64.ln()).log(4.0) + ratio.log2(),
        GRule::CppMmd => (nf + 1.0).ln().log2() + (8.5 * ratio).log2(),
        GRule::KtCppDefault => nf.ln().log2() + 3.1,
    };
    // Guard against values a hair above an integer from round-off.
    Ok((bound - 1e-9).ceil().max(0.0) as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compress::HalveCall;

    #[test]
    fn ex5_example_value() {
        let d = delta_budget(BudgetVariant::Ex5KtCompress, 32, 256, 0, 0.5).unwrap();
        assert!((d - 0.125).abs() < 1e-15);
    }

    #[test]
    fn ex7_thin_budget_vanishes_at_g0() {
        assert_eq!(thin_delta_budget(BudgetVariant::Ex7KtCpp, 256, 0, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn fixed_delta_passes_through() {
        for ell in [16, 8, 4] {
            assert_eq!(delta_budget(BudgetVariant::FixedDelta, ell, 64, 0, 0.3).unwrap(), 0.3);
        }
        assert_eq!(thin_delta_budget(BudgetVariant::FixedDelta, 64, 1, 0.3).unwrap(), 0.3);
    }

    #[test]
    fn invalid_sizes_rejected() {
        assert!(delta_budget(BudgetVariant::Ex5KtCompress, 12, 256, 0, 0.5).is_err());
        assert!(delta_budget(BudgetVariant::Ex5KtCompress, 2, 256, 0, 0.5).is_err());
        assert!(delta_budget(BudgetVariant::Ex5KtCompress, 64, 256, 0, 0.5).is_err());
        // n = 4^g has no Halve calls at all.
        assert!(delta_budget(BudgetVariant::Ex5KtCompress, 16, 16, 2, 0.5).is_err());
        assert!(delta_budget(BudgetVariant::Ex5KtCompress, 32, 250, 0, 0.5).is_err());
        assert!(thin_delta_budget(BudgetVariant::Ex3KtsplitCompress, 256, 1, 0.5).is_err());
    }

    /// Rebuilds the Halve call list of Compress by unrolling the recursion.
    fn unrolled_trace(variant: BudgetVariant, n: usize, g: u32, delta: f64) -> CompressTrace {
        let mut trace = CompressTrace::default();
        let beta = beta_n(n, g);
        for i in 0..=beta {
            let size = ell_n(n, g) >> i;
            for _ in 0..4usize.pow(i as u32) {
                let d = delta_budget(variant, size, n, g, delta).unwrap();
                trace.halve_calls.push(HalveCall { level: i as u32, size, delta: d });
            }
        }
        if variant.is_compresspp() {
            let d = thin_delta_budget(variant, n, g, delta).unwrap();
            trace.thin_call = Some(crate::compress::ThinCall { size: ell_n(n, g) / 2, delta: d });
        }
        trace
    }

    #[test]
    fn union_bound_mass_is_at_most_half_delta() {
        for variant in [
            BudgetVariant::Ex3KtsplitCompress,
            BudgetVariant::Ex5KtCompress,
            BudgetVariant::Ex6KtsplitCpp,
            BudgetVariant::Ex7KtCpp,
        ] {
            for g in 0..4u32 {
                for k in 1..6u32 {
                    let n = 4usize.pow(k + g);
                    let trace = unrolled_trace(variant, n, g, 0.5);
                    assert!(failure_mass(&trace) <= 0.25 + 1e-12, "{variant:?} n={n} g={g}");
                }
            }
        }
    }

    #[test]
    fn choose_g_examples() {
        assert_eq!(choose_g(65536, GRule::KtCppDefault, 1.0).unwrap(), 7);
        assert_eq!(choose_g(256, GRule::CppSubgauss, 1.0).unwrap(), 1);
        assert_eq!(choose_g(1 << 20, GRule::Experiments, 1.0).unwrap(), 4);
        assert_eq!(choose_g(1 << 20, GRule::CompressErrBound, 1.0).unwrap(), 0);
        assert_eq!("cpp_mmd".parse::<GRule>().unwrap(), GRule::CppMmd);
        assert!("nope".parse::<GRule>().is_err());
        assert!(choose_g(2, GRule::CppMmd, 1.0).is_err());
    }

    #[test]
    fn choose_g_is_smallest_satisfying_integer() {
        for &n in &[4usize, 16, 100, 256, 4096, 1 << 16, 1 << 20] {
            for &ratio in &[0.5f64, 1.0, 3.0] {
                let nf = n as f64;
                let bound: f64 = (nf + 1.0).ln().log2() + (8.5 * ratio).log2();
                let g = choose_g(n, GRule::CppMmd, ratio).unwrap() as f64;
                assert!(g >= bound - 1e-9);
                assert!(g == 0.0 || g - 1.0 < bound);
            }
        }
    }
}

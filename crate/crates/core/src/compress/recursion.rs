//! Analytic runtime and error recursions of Compress and Compress++.
//!
//! Compress on `n` points calls Halve `4^i` times on inputs of size
//! `ℓ_n 2^{-i}` for `i = 0..=β_n`. Given a Halve cost `r_H` and a Halve
//! sub-Gaussian parameter `ν_H` as functions of input size, the totals are
//!
//! ```text
//! r_C(n)  = Σ_i 4^i    r_H(ℓ_n 2^{-i})
//! ν²_C(n) = Σ_i 4^{-i} ν²_H(ℓ_n 2^{-i})
//! ```
//!
//! and Compress++ adds one Thin call on `ℓ_n / 2` points.

use serde::{Deserialize, Serialize};

use super::{beta_n, check_size, ell_n};
use crate::error::Result;

/// Runtime and squared error parameter of a meta-procedure.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RecursionSummary {
    pub runtime_units: f64,
    pub nu_sq: f64,
}

/// Result of the error recursion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecursion {
    /// Exact `ν²_C(n)`.
    pub nu_sq: f64,
    /// `(β_n + 1) ν²_H(ℓ_n)`, reported when `ℓ ν_H(ℓ)` is non-decreasing over
    /// the Halve input sizes (the condition under which it bounds `ν²_C`).
    pub nu_sq_bound: Option<f64>,
}

/// Halve input sizes `ℓ_n 2^{-i}` paired with their level `i`.
fn levels(n: usize, g: u32) -> Result<impl Iterator<Item = (u32, f64)>> {
    check_size(n, g)?;
    let top = ell_n(n, g) as f64;
    let beta = beta_n(n, g);
    Ok((0..=beta).map(move |i| (i as u32, top / 2f64.powi(i as i32))))
}

/// `Σ_i 4^i r_H(ℓ_n 2^{-i})`.
pub fn runtime_recursion(r_h: impl Fn(f64) -> f64, n: usize, g: u32) -> Result<f64> {
    Ok(levels(n, g)?.map(|(i, l)| 4f64.powi(i as i32) * r_h(l)).sum())
}

/// `Σ_i 4^{-i} ν²_H(ℓ_n 2^{-i})`, plus the single-term bound when it applies.
pub fn error_recursion(nu_h: impl Fn(f64) -> f64, n: usize, g: u32) -> Result<ErrorRecursion> {
    let mut nu_sq = 0.0;
    let mut monotone = true;
    let mut prev: Option<f64> = None;
    // Sizes decrease with i, so `ℓ ν_H(ℓ)` must not increase along the walk.
    for (i, l) in levels(n, g)? {
        let v = nu_h(l);
        nu_sq += v * v / 4f64.powi(i as i32);
        let scaled = l * v;
        if prev.is_some_and(|p| scaled > p) {
            monotone = false;
        }
        prev = Some(scaled);
    }
    let beta = beta_n(n, g);
    let nu_sq_bound = (monotone && beta >= 0).then(|| {
        let v = nu_h(ell_n(n, g) as f64);
        (beta + 1) as f64 * v * v
    });
    Ok(ErrorRecursion { nu_sq, nu_sq_bound })
}

/// Compress++ runtime `r_C(n) + r_T(ℓ_n / 2)`.
pub fn compresspp_runtime(r_h: impl Fn(f64) -> f64, r_t: impl Fn(f64) -> f64, n: usize, g: u32) -> Result<f64> {
    Ok(runtime_recursion(r_h, n, g)? + r_t(ell_n(n, g) as f64 / 2.0))
}

/// Compress++ squared error parameter `ν²_C(n) + ν²_T(ℓ_n / 2)`.
pub fn compresspp_error(nu_h: impl Fn(f64) -> f64, nu_t: impl Fn(f64) -> f64, n: usize, g: u32) -> Result<f64> {
    let t = nu_t(ell_n(n, g) as f64 / 2.0);
    Ok(error_recursion(nu_h, n, g)?.nu_sq + t * t)
}

/// Both recursions at once.
pub fn recursion_summary(
    r_h: impl Fn(f64) -> f64,
    nu_h: impl Fn(f64) -> f64,
    n: usize,
    g: u32,
) -> Result<RecursionSummary> {
    Ok(RecursionSummary { runtime_units: runtime_recursion(r_h, n, g)?, nu_sq: error_recursion(nu_h, n, g)?.nu_sq })
}

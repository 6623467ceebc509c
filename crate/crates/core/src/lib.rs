//! Near-linear-time distribution compression.
//!
//! The crate provides the Compress and Compress++ meta-procedures, which
//! turn a quadratic-time halving or thinning algorithm into one that runs in
//! near-linear time with only a small loss in maximum mean discrepancy (MMD).
//! The building blocks are:
//!
//! * [`points`]: the [`PointSeq`] container, seeded RNG streams and the
//!   structural operations (partition, concatenate, standard thinning);
//! * [`kernels`]: the Gaussian kernel and closed-form target expectations;
//! * [`thinners`]: kernel halving, kernel thinning (KT), herding and uniform
//!   halving, with a symmetrization adapter;
//! * [`compress`]: Compress, Compress++, streaming Compress, failure
//!   probability budgets and the runtime/error recursions;
//! * [`diagnostics`]: MMD evaluation, sub-Gaussian parameter calculators and
//!   log-log decay fits;
//! * [`io`]: CSV and JSONL point-sequence serialization.

pub mod compress;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod kernels;
pub mod points;
pub mod thinners;

pub use compress::{
    compress, compresspp, BudgetVariant, CompressConfig, CompressTrace, HalveCall, StreamingCompress, ThinCall,
};
pub use error::{Error, Result};
pub use kernels::{CountingKernel, Kernel, KernelSpec, TargetSpec};
pub use points::{PointSeq, SeedPath};
pub use thinners::{HalveAlgorithm, HalverSpec, ThinAlgorithm, ThinnerSpec};

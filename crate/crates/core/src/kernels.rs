//! Kernels and analytic target expectations.
//!
//! The built-in family is the Gaussian kernel
//! `k(x, y) = exp(-|x - y|^2 / (2 sigma^2))`. Any type implementing
//! [`Kernel`] can be handed to the thinners and meta-procedures; the
//! closed-form target expectations below are specific to the Gaussian
//! family and to unit-covariance Gaussian or mixture targets.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::points::PointSeq;

/// A symmetric positive-definite kernel on `R^d`.
pub trait Kernel: Sync {
    /// `k(x, y)`; callers guarantee `x.len() == y.len()`.
    fn eval(&self, x: &[f64], y: &[f64]) -> f64;

    /// `sup_x k(x, x)`.
    fn sup_diag(&self) -> f64;
}

impl<K: Kernel + ?Sized> Kernel for &K {
    #[inline]
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        (**self).eval(x, y)
    }

    fn sup_diag(&self) -> f64 {
        (**self).sup_diag()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    Gaussian,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub bandwidth_sq: f64,
}

impl KernelSpec {
    pub fn gaussian(bandwidth_sq: f64) -> Result<Self> {
        let spec = Self { family: KernelFamily::Gaussian, bandwidth_sq };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_sq.is_finite() && self.bandwidth_sq > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bandwidth_sq must be finite and positive, got {}",
                self.bandwidth_sq
            )));
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

impl Kernel for KernelSpec {
    #[inline]
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), y.len());
        match self.family {
            KernelFamily::Gaussian => (-sq_dist(x, y) / (2.0 * self.bandwidth_sq)).exp(),
        }
    }

    fn sup_diag(&self) -> f64 {
        1.0
    }
}

/// Checked kernel evaluation.
pub fn kernel_eval<K: Kernel + ?Sized>(k: &K, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    Ok(k.eval(x, y))
}

/// Wraps a kernel and counts every evaluation.
#[derive(Debug)]
pub struct CountingKernel<K> {
    inner: K,
    evals: AtomicU64,
}

impl<K: Kernel> CountingKernel<K> {
    pub fn new(inner: K) -> Self {
        Self { inner, evals: AtomicU64::new(0) }
    }

    pub fn count(&self) -> u64 {
        self.evals.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.evals.store(0, Ordering::Relaxed);
    }

    pub fn inner(&self) -> &K {
        &self.inner
    }
}

impl<K: Kernel> Kernel for CountingKernel<K> {
    #[inline]
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        self.evals.fetch_add(1, Ordering::Relaxed);
        self.inner.eval(x, y)
    }

    fn sup_diag(&self) -> f64 {
        self.inner.sup_diag()
    }
}

/// Target distribution `P` against which coresets are scored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetSpec {
    /// `N(0, I_d)`.
    GaussianIid { d: usize },
    /// Uniform mixture of `N(mu_j, I_d)`.
    MogIid { d: usize, means: Vec<Vec<f64>> },
    /// Only known through a sample, e.g. an MCMC chain.
    ExternalSample {
        #[serde(with = "rows")]
        sample: PointSeq,
    },
}

impl TargetSpec {
    pub fn dim(&self) -> usize {
        match self {
            TargetSpec::GaussianIid { d } | TargetSpec::MogIid { d, .. } => *d,
            TargetSpec::ExternalSample { sample } => sample.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TargetSpec::GaussianIid { d } if *d == 0 => {
                Err(Error::InvalidParameter("target dimension must be positive".into()))
            }
            TargetSpec::MogIid { d, means } => {
                if means.is_empty() {
                    return Err(Error::InvalidParameter("mixture needs at least one mean".into()));
                }
                for m in means {
                    if m.len() != *d {
                        return Err(Error::DimensionMismatch { expected: *d, got: m.len() });
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Component means; the standard Gaussian has a single zero mean.
    fn component_means(&self) -> Result<Vec<Vec<f64>>> {
        match self {
            TargetSpec::GaussianIid { d } => Ok(vec![vec![0.0; *d]]),
            TargetSpec::MogIid { means, .. } => Ok(means.clone()),
            TargetSpec::ExternalSample { .. } => {
                Err(Error::Unsupported("closed-form expectations need a gaussian_iid or mog_iid target".into()))
            }
        }
    }
}

fn gaussian_bandwidth(k: &KernelSpec) -> Result<f64> {
    k.validate()?;
    match k.family {
        KernelFamily::Gaussian => Ok(k.bandwidth_sq),
    }
}

/// `E_{X~P} k(X, y)`.
///
/// For `N(mu, I_d)` and a Gaussian kernel with bandwidth `s2` this is
/// `(s2/(s2+1))^{d/2} exp(-|y-mu|^2 / (2(s2+1)))`; mixtures average over
/// components.
pub fn target_mean_embedding(t: &TargetSpec, k: &KernelSpec, y: &[f64]) -> Result<f64> {
    let s2 = gaussian_bandwidth(k)?;
    let means = t.component_means()?;
    let d = t.dim();
    if y.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: y.len() });
    }
    let scale = (s2 / (s2 + 1.0)).powf(d as f64 / 2.0);
    let total: f64 = means.iter().map(|mu| (-sq_dist(y, mu) / (2.0 * (s2 + 1.0))).exp()).sum();
    Ok(scale * total / means.len() as f64)
}

/// Mean embedding at every point of `s`, as used by the closed-form MMD.
pub(crate) fn target_mean_embedding_all(t: &TargetSpec, k: &KernelSpec, s: &PointSeq) -> Result<Vec<f64>> {
    s.iter().map(|y| target_mean_embedding(t, k, y)).collect()
}

/// `E_{X,X'~P} k(X, X')`: average over component pairs of
/// `(s2/(s2+2))^{d/2} exp(-|mu_i - mu_j|^2 / (2(s2+2)))`.
pub fn target_self_energy(t: &TargetSpec, k: &KernelSpec) -> Result<f64> {
    let s2 = gaussian_bandwidth(k)?;
    let means = t.component_means()?;
    let d = t.dim() as f64;
    let scale = (s2 / (s2 + 2.0)).powf(d / 2.0);
    let mut total = 0.0;
    for a in &means {
        for b in &means {
            total += (-sq_dist(a, b) / (2.0 * (s2 + 2.0))).exp();
        }
    }
    Ok(scale * total / (means.len() * means.len()) as f64)
}

/// Serde adapter storing a [`PointSeq`] as a list of rows.
pub mod rows {
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    use crate::points::PointSeq;

    pub fn serialize<S: Serializer>(s: &PointSeq, ser: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<&[f64]> = s.iter().collect();
        rows.serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<PointSeq, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(de)?;
        PointSeq::from_rows(&rows).map_err(D::Error::custom)
    }
}

//! Target presets and samplers.

use compresspp::{Error, KernelSpec, PointSeq, Result, SeedPath, TargetSpec};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// A named target with the kernel bandwidth used to score it.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetPreset {
    pub id: String,
    pub target: TargetSpec,
    /// Squared bandwidth `σ² = 2d`.
    pub bandwidth_sq: f64,
}

impl TargetPreset {
    fn new(id: &str, target: TargetSpec) -> Self {
        let bandwidth_sq = 2.0 * target.dim() as f64;
        Self { id: id.to_string(), target, bandwidth_sq }
    }

    pub fn kernel(&self) -> KernelSpec {
        KernelSpec::gaussian(self.bandwidth_sq).expect("preset bandwidths are positive")
    }
}

/// The eight mixture means used by the `mog_M*` presets, as printed:
/// `μ₁` and `μ₂` are both `[-3, 3]`. With `corrected`, `μ₂ = [3, 3]`.
pub fn mog_means(corrected: bool) -> Vec<Vec<f64>> {
    let mu2 = if corrected { vec![3.0, 3.0] } else { vec![-3.0, 3.0] };
    vec![
        vec![-3.0, 3.0],
        mu2,
        vec![-3.0, -3.0],
        vec![3.0, -3.0],
        vec![0.0, 6.0],
        vec![-6.0, 0.0],
        vec![6.0, 0.0],
        vec![0.0, -6.0],
    ]
}

/// 32 means on circles of radius 10 (`j <= 16`) and 20:
/// `μ_j = α_j [sin j, cos j]`.
pub fn circle_means() -> Vec<Vec<f64>> {
    (1..=32)
        .map(|j| {
            let alpha = if j <= 16 { 10.0 } else { 20.0 };
            let t = j as f64;
            vec![alpha * t.sin(), alpha * t.cos()]
        })
        .collect()
}

/// Every built-in preset.
pub fn preset_targets(corrected_mog: bool) -> Vec<TargetPreset> {
    let mut out: Vec<TargetPreset> = [2usize, 4, 10, 100]
        .iter()
        .map(|&d| TargetPreset::new(&format!("gauss_d{d}"), TargetSpec::GaussianIid { d }))
        .collect();
    let means = mog_means(corrected_mog);
    for m in [4usize, 6, 8] {
        out.push(TargetPreset::new(&format!("mog_M{m}"), TargetSpec::MogIid { d: 2, means: means[..m].to_vec() }));
    }
    out.push(TargetPreset::new("mog_M32", TargetSpec::MogIid { d: 2, means: circle_means() }));
    out
}

pub fn preset(id: &str, corrected_mog: bool) -> Result<TargetPreset> {
    preset_targets(corrected_mog)
        .into_iter()
        .find(|p| p.id == id)
        .ok_or_else(|| Error::Config(format!("unknown target preset {id:?}")))
}

/// `n` i.i.d. draws from an analytic target. Mixture draws pick a component
/// uniformly, then add standard Gaussian noise.
pub fn sample_target(t: &TargetSpec, n: usize, seed: &SeedPath) -> Result<PointSeq> {
    t.validate()?;
    let d = t.dim();
    let mut rng = seed.rng();
    let mut data = Vec::with_capacity(n * d);
    match t {
        TargetSpec::GaussianIid { .. } => {
            data.extend((0..n * d).map(|_| -> f64 { StandardNormal.sample(&mut rng) }));
        }
        TargetSpec::MogIid { means, .. } => {
            for _ in 0..n {
                let mu = &means[rng.random_range(0..means.len())];
                data.extend(mu.iter().map(|m| -> f64 {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    m + e
                }));
            }
        }
        TargetSpec::ExternalSample { .. } => {
            return Err(Error::Unsupported("cannot sample an external target".into()));
        }
    }
    PointSeq::new(data, d)
}

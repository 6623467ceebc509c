//! MMD evaluation, sub-Gaussian parameter calculators and decay fits.
//!
//! MMD is computed with the biased V-statistic (diagonal terms included),
//! i.e. the population MMD between the two empirical measures. Round-off that
//! drives the squared MMD slightly negative is clamped to zero before the
//! square root.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{target_mean_embedding_all, target_self_energy, Kernel, KernelSpec, TargetSpec};
use crate::points::PointSeq;

/// Deterministic pairwise summation; the result depends only on the input order.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

fn check_pair(s1: &PointSeq, s2: &PointSeq) -> Result<()> {
    if s1.is_empty() || s2.is_empty() {
        return Err(Error::Size("MMD needs two non-empty sequences".into()));
    }
    if s1.dim() != s2.dim() {
        return Err(Error::DimensionMismatch { expected: s1.dim(), got: s2.dim() });
    }
    Ok(())
}

/// `Σ_{i,j} k(s_i, s_j)`, using symmetry and rows summed in parallel.
pub fn gram_sum_self<K: Kernel + ?Sized>(k: &K, s: &PointSeq) -> f64 {
    let rows: Vec<f64> = (0..s.len())
        .into_par_iter()
        .map(|i| {
            let x = s.point(i);
            let off: f64 = (0..i).map(|j| k.eval(x, s.point(j))).sum();
            2.0 * off + k.eval(x, x)
        })
        .collect();
    pairwise_sum(&rows)
}

/// `Σ_{i,j} k(a_i, b_j)`.
pub fn gram_sum_cross<K: Kernel + ?Sized>(k: &K, a: &PointSeq, b: &PointSeq) -> f64 {
    let rows: Vec<f64> = (0..a.len())
        .into_par_iter()
        .map(|i| {
            let x = a.point(i);
            b.iter().map(|y| k.eval(x, y)).sum()
        })
        .collect();
    pairwise_sum(&rows)
}

/// `MMD_k` between the empirical measures of `s1` and `s2`.
pub fn mmd_empirical<K: Kernel + ?Sized>(k: &K, s1: &PointSeq, s2: &PointSeq) -> Result<f64> {
    check_pair(s1, s2)?;
    let (n1, n2) = (s1.len() as f64, s2.len() as f64);
    let sq = gram_sum_self(k, s1) / (n1 * n1) - 2.0 * gram_sum_cross(k, s1, s2) / (n1 * n2)
        + gram_sum_self(k, s2) / (n2 * n2);
    finish(sq)
}

fn finish(sq: f64) -> Result<f64> {
    if !sq.is_finite() {
        return Err(Error::NonFinite("squared MMD".into()));
    }
    Ok(sq.max(0.0).sqrt())
}

/// `MMD_k(P, s)` for an analytic target, from the closed-form expectations.
pub fn mmd_to_target(k: &KernelSpec, t: &TargetSpec, s: &PointSeq) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::Size("MMD needs a non-empty sequence".into()));
    }
    if let TargetSpec::ExternalSample { .. } = t {
        return Err(Error::Unsupported(
            "no closed form for an external sample; use mmd_empirical against the sample".into(),
        ));
    }
    if s.dim() != t.dim() {
        return Err(Error::DimensionMismatch { expected: t.dim(), got: s.dim() });
    }
    let n = s.len() as f64;
    let pp = target_self_energy(t, k)?;
    let emb = target_mean_embedding_all(t, k, s)?;
    let sq = pp - 2.0 * pairwise_sum(&emb) / n + gram_sum_self(k, s) / (n * n);
    finish(sq)
}

/// Sub-Gaussian parameters `(a, v)` of an algorithm, with the opaque
/// constants used to produce them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubGaussParams {
    /// Shift parameter.
    pub a: f64,
    /// Scale parameter.
    pub v: f64,
    pub c_a: f64,
    pub c_v: f64,
    /// Tail inflation factor, at least 1.
    pub inflation_m: f64,
    /// `sup_x k(x, x)`.
    pub k_sup: f64,
}

impl SubGaussParams {
    /// Parameters `(a, v)` with every constant at its default of 1.
    pub fn new(a: f64, v: f64) -> Self {
        Self { a, v, c_a: 1.0, c_v: 1.0, inflation_m: 1.0, k_sup: 1.0 }
    }

    /// Error `ε = max(a, v)`.
    pub fn epsilon(&self) -> f64 {
        self.a.max(self.v)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a >= 0.0 && self.v >= 0.0) || !self.a.is_finite() || !self.v.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "a and v must be finite and >= 0, got ({}, {})",
                self.a, self.v
            )));
        }
        if !(self.inflation_m >= 1.0) {
            return Err(Error::InvalidParameter(format!("inflation factor must be >= 1, got {}", self.inflation_m)));
        }
        Ok(())
    }

    fn with_av(&self, a: f64, v: f64) -> Self {
        Self { a, v, ..*self }
    }
}

/// Compress parameters with the inflation ceiling `10 log(n+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompressParams {
    pub params: SubGaussParams,
    /// `ε_Compress / ε_Halve(ℓ_n)` never exceeds this.
    pub ratio_bound: f64,
}

fn log4_n_minus_g(n: usize, g: u32) -> Result<f64> {
    crate::compress::check_size(n, g)?;
    Ok((n.trailing_zeros() / 2) as f64 - g as f64)
}

/// Compress parameters from Halve's parameters at input size `ℓ_n`:
/// `ṽ = 4(a + v) √(2(log₄ n − g))` and `ã = ṽ √log(n+1)`.
pub fn compress_params(h: &SubGaussParams, n: usize, g: u32) -> Result<CompressParams> {
    h.validate()?;
    let depth = log4_n_minus_g(n, g)?;
    let v = 4.0 * (h.a + h.v) * (2.0 * depth).sqrt();
    let a = v * ((n as f64) + 1.0).ln().sqrt();
    Ok(CompressParams { params: h.with_av(a, v), ratio_bound: 10.0 * ((n as f64) + 1.0).ln() })
}

/// Compress++ parameters from Halve's parameters at `ℓ_n` and Thin's at
/// `ℓ_n / 2`: `v̂ = ṽ + v'` and `â = ã + a' + v̂ √log 2`.
pub fn compresspp_params(h: &SubGaussParams, t: &SubGaussParams, n: usize, g: u32) -> Result<SubGaussParams> {
    t.validate()?;
    let c = compress_params(h, n, g)?.params;
    let v = c.v + t.v;
    let a = c.a + t.a + v * 2f64.ln().sqrt();
    Ok(h.with_av(a, v))
}

/// Kernel thinning parameters for `n -> n_out`:
/// `a = C_a/n_out √k_sup` and
/// `v = C_v/n_out √(k_sup log(6 n_out log₂(n/n_out) / δ)) 𝔐`.
pub fn kt_params(n: usize, n_out: usize, delta: f64, k_sup: f64, c_a: f64, c_v: f64, m: f64) -> Result<SubGaussParams> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    if n_out == 0 || n % n_out != 0 || !(n / n_out).is_power_of_two() || n == n_out {
        return Err(Error::InvalidParameter(format!(
            "n / n_out must be a power of two greater than 1, got n={n}, n_out={n_out}"
        )));
    }
    if !(k_sup > 0.0) || !(m >= 1.0) || !(c_a >= 0.0) || !(c_v >= 0.0) {
        return Err(Error::InvalidParameter("k_sup > 0, M >= 1 and C_a, C_v >= 0 are required".into()));
    }
    let no = n_out as f64;
    let rounds = (n / n_out).trailing_zeros() as f64;
    let a = c_a / no * k_sup.sqrt();
    let v = c_v / no * (k_sup * (6.0 * no * rounds / delta).ln()).sqrt() * m;
    Ok(SubGaussParams { a, v, c_a, c_v, inflation_m: m, k_sup })
}

/// Least-squares line of `log₁₀ mmd` against `log₁₀ n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; 1 when the response is constant.
    pub r2: f64,
}

pub fn fit_decay(points: &[(f64, f64)]) -> Result<DecayFit> {
    if points.len() < 3 {
        return Err(Error::InvalidParameter(format!("decay fit needs >= 3 points, got {}", points.len())));
    }
    if points.iter().any(|&(n, y)| !(n > 0.0 && y > 0.0 && n.is_finite() && y.is_finite())) {
        return Err(Error::InvalidParameter("decay fit needs positive finite values".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.log10()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("decay fit needs at least two distinct n".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(DecayFit { slope, intercept, r2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compress::{choose_g, ell_n, GRule};
    use crate::points::SeedPath;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn k2() -> KernelSpec {
        KernelSpec::gaussian(2.0).unwrap()
    }

    /// Plain double-loop MMD.
    fn brute_mmd(k: &KernelSpec, a: &PointSeq, b: &PointSeq) -> f64 {
        let mean = |x: &PointSeq, y: &PointSeq| {
            let mut t = 0.0;
            for p in x.iter() {
                for q in y.iter() {
                    t += k.eval(p, q);
                }
            }
            t / (x.len() * y.len()) as f64
        };
        (mean(a, a) - 2.0 * mean(a, b) + mean(b, b)).max(0.0).sqrt()
    }

    fn random_seq(rng: &mut impl Rng, n: usize, d: usize) -> PointSeq {
        PointSeq::new((0..n * d).map(|_| rng.random::<f64>() * 6.0 - 3.0).collect(), d).unwrap()
    }

    #[test]
    fn examples() {
        let k = k2();
        let a = PointSeq::from_scalars(&[0.0]).unwrap();
        let b = PointSeq::from_scalars(&[2.0]).unwrap();
        assert!((mmd_empirical(&k, &a, &b).unwrap() - (2.0 - 2.0 * (-1f64).exp()).sqrt()).abs() < 1e-12);
        assert!((mmd_empirical(&k, &a, &b).unwrap() - 1.1244).abs() < 1e-4);
        let c = PointSeq::from_scalars(&[-1.0, 1.0]).unwrap();
        let e1 = (-1f64).exp();
        let want = ((2.0 + 2.0 * e1) / 4.0 - 2.0 * (-0.25f64).exp() + 1.0).sqrt();
        assert!((mmd_empirical(&k, &c, &a).unwrap() - want).abs() < 1e-12);
        assert!((want - 0.3554).abs() < 1e-4);
        assert!(mmd_empirical(&k, &c, &c).unwrap() <= 1e-9);
    }

    #[test]
    fn empty_and_mismatched_rejected() {
        let k = k2();
        let a = PointSeq::from_scalars(&[0.0]).unwrap();
        assert!(mmd_empirical(&k, &a, &PointSeq::empty(1)).is_err());
        let b = PointSeq::new(vec![0.0, 0.0], 2).unwrap();
        assert!(mmd_empirical(&k, &a, &b).is_err());
    }

    #[test]
    fn matches_brute_force_and_is_symmetric() {
        let mut rng = SeedPath::new(11).rng();
        for case in 0..50 {
            let d = 1 + case % 4;
            let na = 1 + rng.random_range(0..40);
            let a = random_seq(&mut rng, na, d);
            let nb = 1 + rng.random_range(0..40);
            let b = random_seq(&mut rng, nb, d);
            let k = KernelSpec::gaussian(0.5 + rng.random::<f64>() * 4.0).unwrap();
            let fast = mmd_empirical(&k, &a, &b).unwrap();
            let slow = brute_mmd(&k, &a, &b);
            assert!((fast - slow).abs() <= 1e-10 * slow.max(1e-300) + 1e-13, "case {case}: {fast} vs {slow}");
            assert!((fast - mmd_empirical(&k, &b, &a).unwrap()).abs() <= 1e-12 * fast.max(1e-6));
            assert!(fast >= 0.0);
        }
    }

    #[test]
    fn triangle_inequality() {
        let mut rng = SeedPath::new(12).rng();
        let k = k2();
        for _ in 0..50 {
            let [a, b, c] = [0, 1, 2].map(|_| {
                let n = 1 + rng.random_range(0..20);
                random_seq(&mut rng, n, 2)
            });
            let ac = mmd_empirical(&k, &a, &c).unwrap();
            let ab = mmd_empirical(&k, &a, &b).unwrap();
            let bc = mmd_empirical(&k, &b, &c).unwrap();
            assert!(ac <= ab + bc + 1e-9);
        }
    }

    #[test]
    fn bit_stable_across_runs() {
        let mut rng = SeedPath::new(13).rng();
        let a = random_seq(&mut rng, 500, 3);
        let b = random_seq(&mut rng, 300, 3);
        let first = mmd_empirical(&k2(), &a, &b).unwrap();
        for _ in 0..3 {
            assert_eq!(first.to_bits(), mmd_empirical(&k2(), &a, &b).unwrap().to_bits());
        }
    }

    #[test]
    fn target_examples() {
        let t = TargetSpec::GaussianIid { d: 1 };
        let s = PointSeq::from_scalars(&[0.0]).unwrap();
        let want = (0.5f64.sqrt() - 2.0 * (2.0f64 / 3.0).sqrt() + 1.0).sqrt();
        let got = mmd_to_target(&k2(), &t, &s).unwrap();
        assert!((got - want).abs() < 1e-12);
        assert!((got - 0.2722).abs() < 1e-4);
        assert!(matches!(
            mmd_to_target(&k2(), &TargetSpec::ExternalSample { sample: s.clone() }, &s),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn large_sample_is_close_to_target() {
        let mut rng = SeedPath::new(14).rng();
        let n = 100_000;
        let data: Vec<f64> = (0..2 * n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let s = PointSeq::new(data, 2).unwrap();
        let k = KernelSpec::gaussian(4.0).unwrap();
        assert!(mmd_to_target(&k, &TargetSpec::GaussianIid { d: 2 }, &s).unwrap() < 0.02);
    }

    #[test]
    fn symmetric_mixture_labeling() {
        let mu = vec![1.5, -0.5];
        let neg: Vec<f64> = mu.iter().map(|v| -v).collect();
        let t1 = TargetSpec::MogIid { d: 2, means: vec![mu.clone(), neg.clone()] };
        let t2 = TargetSpec::MogIid { d: 2, means: vec![neg.clone(), mu.clone()] };
        let s = PointSeq::from_rows(&[neg.clone(), mu.clone()]).unwrap();
        let k = KernelSpec::gaussian(4.0).unwrap();
        let a = mmd_to_target(&k, &t1, &s).unwrap();
        let b = mmd_to_target(&k, &t2, &s).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    /// Compress parameters re-derived from the equation display with plain
    /// arithmetic on log₄ n.
    fn compress_oracle(a: f64, v: f64, n: usize, g: u32) -> (f64, f64) {
        let log4n = (n as f64).ln() / 4f64.ln();
        let vt = 4.0 * (a + v) * (2.0 * (log4n - g as f64)).sqrt();
        (vt * ((n + 1) as f64).ln().sqrt(), vt)
    }

    #[test]
    fn compress_params_examples() {
        let z = compress_params(&SubGaussParams::new(0.0, 0.0), 256, 0).unwrap();
        assert_eq!((z.params.a, z.params.v), (0.0, 0.0));
        let p = compress_params(&SubGaussParams::new(1.0, 1.0), 256, 0).unwrap();
        assert!((p.params.v - 8.0 * 8f64.sqrt()).abs() < 1e-12);
        assert!((p.params.a - 8.0 * 8f64.sqrt() * 257f64.ln().sqrt()).abs() < 1e-12);
        let (oa, ov) = compress_oracle(1.0, 1.0, 256, 0);
        assert!((p.params.a - oa).abs() <= 1e-12 * oa && (p.params.v - ov).abs() <= 1e-12 * ov);
    }

    #[test]
    fn compress_inflation_ceiling() {
        let mut rng = SeedPath::new(15).rng();
        for _ in 0..100 {
            let g = rng.random_range(0..4u32);
            let k = rng.random_range(1..10u32);
            let n = 4usize.pow(k + g);
            let h = SubGaussParams::new(rng.random::<f64>() * 3.0, rng.random::<f64>() * 3.0 + 1e-6);
            let p = compress_params(&h, n, g).unwrap();
            assert!(p.params.epsilon() / h.epsilon() <= p.ratio_bound);
        }
    }

    #[test]
    fn compresspp_params_examples() {
        let z = SubGaussParams::new(0.0, 0.0);
        let p = compresspp_params(&z, &z, 256, 1).unwrap();
        assert_eq!((p.a, p.v), (0.0, 0.0));
        let one = SubGaussParams::new(1.0, 1.0);
        let p = compresspp_params(&one, &one, 256, 1).unwrap();
        let vt = 8.0 * 6f64.sqrt();
        assert!((p.v - (vt + 1.0)).abs() < 1e-12);
        let at = vt * 257f64.ln().sqrt();
        assert!((p.a - (at + 1.0 + (vt + 1.0) * 2f64.ln().sqrt())).abs() < 1e-12);
    }

    #[test]
    fn compresspp_within_factor_four_of_thin() {
        // Equal rescaled errors: ε_H(ℓ_n) (ℓ_n/2) = ε_T(ℓ_n/2) √n.
        let mut checked = 0;
        for k in 2..=16u32 {
            let n = 4usize.pow(k);
            let g = choose_g(n, GRule::CppMmd, 1.0).unwrap();
            if g > k {
                continue;
            }
            checked += 1;
            let eps_t = 1.0 / (n as f64).sqrt();
            let eps_h = 2.0 / ell_n(n, g) as f64;
            let h = SubGaussParams::new(eps_h, eps_h);
            let t = SubGaussParams::new(eps_t, eps_t);
            let p = compresspp_params(&h, &t, n, g).unwrap();
            assert!(p.epsilon() <= 4.0 * t.epsilon(), "n={n} g={g}: {} vs {}", p.epsilon(), t.epsilon());
        }
        assert!(checked >= 8);
    }

    #[test]
    fn kt_params_examples() {
        let p = kt_params(64, 8, 0.5, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(p.a, 0.125);
        // log₂(64/8) = 3 rounds.
        assert!((p.v - 288f64.ln().sqrt() / 8.0).abs() < 1e-15);
        let lo = kt_params(64, 8, 0.9, 1.0, 1.0, 1.0, 1.0).unwrap();
        let hi = kt_params(64, 8, 0.1, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(lo.v < hi.v);
        let wide = kt_params(64, 16, 0.5, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(wide.a, p.a / 2.0);
        assert!(kt_params(64, 8, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(kt_params(64, 12, 0.5, 1.0, 1.0, 1.0, 1.0).is_err());
        let inflated = kt_params(64, 8, 0.5, 1.0, 1.0, 1.0, 3.0).unwrap();
        assert!((inflated.v - 3.0 * p.v).abs() < 1e-15);
    }

    #[test]
    fn decay_fits() {
        let ns = [16.0, 64.0, 256.0];
        let f = fit_decay(&ns.map(|n: f64| (n, n.powf(-0.5)))).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        let f = fit_decay(&ns.map(|n: f64| (n, n.powf(-0.25)))).unwrap();
        assert!((f.slope + 0.25).abs() < 1e-12);
        let f = fit_decay(&ns.map(|n| (n, 0.3))).unwrap();
        assert!(f.slope.abs() < 1e-12);
        assert!(fit_decay(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
        assert!(fit_decay(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499_500.0);
    }
}

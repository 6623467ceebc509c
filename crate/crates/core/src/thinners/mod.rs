//! Halving and thinning algorithms.
//!
//! Every algorithm works on indices into the input [`PointSeq`], so callers
//! can map outputs back to the original sequence and check membership. A
//! halver returns a [`HalveOutcome`] holding the selected half and its
//! complement; [`symmetrize`] then picks one of the two with a fair coin.

mod herding;
mod kernel_halving;
mod swap;

pub use herding::herding;
pub use kernel_halving::{kernel_halve, kt_split};
pub use swap::{kt, kt_swap, SwapMode};

pub(crate) use herding::herding_indices;
pub(crate) use kernel_halving::kt_split_prepared;
pub(crate) use swap::{kt_swap_prepared, SwapCandidate};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelSpec};
use crate::points::{standard_thin_indices, PointSeq, SeedPath};

/// Outcome of the symmetrization coin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

/// The two halves produced by a halving algorithm, as indices into its input.
#[derive(Clone, Debug, PartialEq)]
pub struct HalveOutcome {
    pub selected: Vec<usize>,
    pub complement: Vec<usize>,
    /// `Plus` keeps `selected`, `Minus` returns `complement`.
    pub coin: Sign,
}

impl HalveOutcome {
    pub(crate) fn new(selected: Vec<usize>, complement: Vec<usize>) -> Self {
        Self { selected, complement, coin: Sign::Plus }
    }

    /// Builds the complement of `selected` within `0..n`, keeping input order.
    pub(crate) fn from_selected(selected: Vec<usize>, n: usize) -> Self {
        let mut taken = vec![false; n];
        for &i in &selected {
            taken[i] = true;
        }
        let complement = (0..n).filter(|&i| !taken[i]).collect();
        Self::new(selected, complement)
    }

    /// The half chosen by the coin.
    pub fn output(&self) -> &[usize] {
        match self.coin {
            Sign::Plus => &self.selected,
            Sign::Minus => &self.complement,
        }
    }

    pub fn into_output(self) -> Vec<usize> {
        match self.coin {
            Sign::Plus => self.selected,
            Sign::Minus => self.complement,
        }
    }

    pub fn output_points(&self, s: &PointSeq) -> PointSeq {
        s.select(self.output())
    }

    /// Halving contract: both halves have `n/2` distinct indices and
    /// together cover the input exactly once.
    pub fn check_contract(&self, n: usize) -> Result<()> {
        if self.selected.len() != n / 2 || self.complement.len() != n - n / 2 {
            return Err(Error::Size(format!(
                "halves of sizes {} and {} for input of {}",
                self.selected.len(),
                self.complement.len(),
                n
            )));
        }
        let mut seen = vec![false; n];
        for &i in self.selected.iter().chain(&self.complement) {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Size(format!("index {i} repeated or out of range")));
            }
        }
        Ok(())
    }
}

/// Returns the selected half or its complement with equal probability.
pub fn symmetrize(mut outcome: HalveOutcome, seed: &SeedPath) -> HalveOutcome {
    outcome.coin = if seed.rng().random::<bool>() { Sign::Plus } else { Sign::Minus };
    outcome
}

/// For each consecutive pair a fair coin sends one point to each half.
pub fn uniform_halve(s: &PointSeq, seed: &SeedPath) -> Result<HalveOutcome> {
    let n = s.len();
    if n % 2 != 0 {
        return Err(Error::Size(format!("halving needs an even number of points, got {n}")));
    }
    let mut rng = seed.rng();
    let mut selected = Vec::with_capacity(n / 2);
    let mut complement = Vec::with_capacity(n / 2);
    for i in (0..n).step_by(2) {
        let (a, b) = if rng.random::<bool>() { (i, i + 1) } else { (i + 1, i) };
        selected.push(a);
        complement.push(b);
    }
    Ok(HalveOutcome::new(selected, complement))
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalveAlgorithm {
    /// One round of kt-split.
    KernelHalve,
    /// kt-split followed by a distinct-point kt-swap refinement.
    Kt,
    /// Kernel herding restricted to distinct points.
    Herding,
    /// Fair coin per consecutive pair.
    UniformHalve,
}

/// Declarative halving algorithm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalverSpec {
    pub algorithm: HalveAlgorithm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    pub delta: f64,
    pub symmetrized: bool,
}

impl HalverSpec {
    pub fn new(algorithm: HalveAlgorithm, kernel: Option<KernelSpec>, delta: f64, symmetrized: bool) -> Self {
        Self { algorithm, kernel, delta, symmetrized }
    }

    pub fn needs_kernel(&self) -> bool {
        !matches!(self.algorithm, HalveAlgorithm::UniformHalve)
    }

    pub fn validate(&self) -> Result<()> {
        check_delta(self.delta)?;
        match (self.needs_kernel(), self.kernel) {
            (true, None) => Err(Error::Config(format!("{:?} halver needs a kernel", self.algorithm))),
            (_, Some(k)) => k.validate(),
            _ => Ok(()),
        }
    }

    /// Runs the halver with its own kernel and δ.
    pub fn halve(&self, s: &PointSeq, seed: &SeedPath) -> Result<HalveOutcome> {
        self.validate()?;
        match self.kernel {
            Some(k) => self.halve_with(s, &k, self.delta, seed),
            None => self.halve_with(s, &NoKernel, self.delta, seed),
        }
    }

    /// Runs the halver with an explicit kernel and per-call δ.
    ///
    /// Randomness for the split uses child stream 0 of `seed`, the
    /// symmetrization coin child stream 1.
    pub fn halve_with<K: Kernel + ?Sized>(
        &self,
        s: &PointSeq,
        k: &K,
        delta: f64,
        seed: &SeedPath,
    ) -> Result<HalveOutcome> {
        let n = s.len();
        if n % 2 != 0 {
            return Err(Error::Size(format!("halving needs an even number of points, got {n}")));
        }
        let split_seed = seed.split(0);
        let outcome = match self.algorithm {
            HalveAlgorithm::KernelHalve => kernel_halve(s, k, delta, &split_seed)?,
            HalveAlgorithm::UniformHalve => uniform_halve(s, &split_seed)?,
            HalveAlgorithm::Kt => {
                check_delta(delta)?;
                let split = kt_split_prepared(s, k, delta, 1, &split_seed)?;
                let (pool, rows) = split.into_swap_candidates();
                let chosen = kt_swap_prepared(s, k, pool, rows, SwapMode::Distinct)?;
                HalveOutcome::from_selected(chosen, n)
            }
            HalveAlgorithm::Herding => HalveOutcome::from_selected(herding_indices(s, k, n / 2, true)?, n),
        };
        debug_assert!(outcome.check_contract(n).is_ok());
        Ok(if self.symmetrized { symmetrize(outcome, &seed.split(1)) } else { outcome })
    }
}

/// Placeholder kernel for kernel-free halvers.
pub(crate) struct NoKernel;

impl Kernel for NoKernel {
    fn eval(&self, _: &[f64], _: &[f64]) -> f64 {
        unreachable!("kernel-free halver evaluated a kernel")
    }

    fn sup_diag(&self) -> f64 {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThinAlgorithm {
    /// kt-split then kt-swap.
    Kt,
    /// kt-split alone; one of the leaf coresets is returned uniformly at random.
    KtSplitOnly,
    /// Kernel herding, repeats allowed.
    Herding,
    /// Standard thinning.
    Standard,
}

/// Declarative `thin_factor`-thinning algorithm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThinnerSpec {
    pub algorithm: ThinAlgorithm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    pub delta: f64,
    pub thin_factor: usize,
}

impl ThinnerSpec {
    pub fn validate(&self) -> Result<()> {
        if self.thin_factor == 0 {
            return Err(Error::Config("thin_factor must be positive".into()));
        }
        if matches!(self.algorithm, ThinAlgorithm::Kt | ThinAlgorithm::KtSplitOnly)
            && !self.thin_factor.is_power_of_two()
        {
            return Err(Error::Config(format!(
                "kt thinners need a power-of-two thin_factor, got {}",
                self.thin_factor
            )));
        }
        if !matches!(self.algorithm, ThinAlgorithm::Standard) {
            check_delta(self.delta)?;
            match self.kernel {
                None => return Err(Error::Config(format!("{:?} thinner needs a kernel", self.algorithm))),
                Some(k) => k.validate()?,
            }
        }
        Ok(())
    }

    pub fn thin(&self, s: &PointSeq, seed: &SeedPath) -> Result<Vec<usize>> {
        self.validate()?;
        match self.kernel {
            Some(k) => self.thin_with(s, &k, self.delta, seed),
            None => self.thin_with(s, &NoKernel, self.delta, seed),
        }
    }

    /// Output has `floor(n / thin_factor)` indices into `s`.
    pub fn thin_with<K: Kernel + ?Sized>(
        &self,
        s: &PointSeq,
        k: &K,
        delta: f64,
        seed: &SeedPath,
    ) -> Result<Vec<usize>> {
        let n = s.len();
        let f = self.thin_factor;
        if f == 1 {
            return Ok((0..n).collect());
        }
        let m = n / f;
        match self.algorithm {
            ThinAlgorithm::Standard => standard_thin_indices(n, m),
            ThinAlgorithm::Herding => herding_indices(s, k, m, false),
            ThinAlgorithm::Kt => kt(s, k, delta, f, seed),
            ThinAlgorithm::KtSplitOnly => {
                check_delta(delta)?;
                let rounds = f.trailing_zeros();
                let mut leaves = kt_split(s, k, delta, rounds, &seed.split(0))?;
                let pick = seed.split(1).rng().random_range(0..leaves.len());
                Ok(leaves.swap_remove(pick))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k2() -> KernelSpec {
        KernelSpec::gaussian(2.0).unwrap()
    }

    fn line(n: usize) -> PointSeq {
        PointSeq::from_scalars(&(0..n).map(|i| (i as f64 * 0.37).sin() * 3.0).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn symmetrize_follows_coin() {
        let o = HalveOutcome::new(vec![0], vec![1]);
        assert_eq!(HalveOutcome { coin: Sign::Plus, ..o.clone() }.output(), &[0]);
        assert_eq!(HalveOutcome { coin: Sign::Minus, ..o.clone() }.output(), &[1]);
    }

    #[test]
    fn symmetrize_coin_is_fair() {
        let o = HalveOutcome::new(vec![0], vec![1]);
        let flips = (0..10_000u64).filter(|&i| symmetrize(o.clone(), &SeedPath::new(i)).coin == Sign::Minus).count();
        let freq = flips as f64 / 10_000.0;
        assert!((0.48..=0.52).contains(&freq), "complement frequency {freq}");
    }

    #[test]
    fn uniform_halve_pairs() {
        let s = line(2);
        let mut seen = [false; 2];
        for i in 0..64 {
            let o = uniform_halve(&s, &SeedPath::new(i)).unwrap();
            o.check_contract(2).unwrap();
            seen[o.selected[0]] = true;
        }
        assert_eq!(seen, [true, true]);
        let o = uniform_halve(&line(40), &SeedPath::new(5)).unwrap();
        assert_eq!((o.selected.len(), o.complement.len()), (20, 20));
        assert!(uniform_halve(&line(3), &SeedPath::new(0)).is_err());
    }

    #[test]
    fn every_halver_honours_the_contract() {
        let s = line(48);
        for alg in
            [HalveAlgorithm::KernelHalve, HalveAlgorithm::Kt, HalveAlgorithm::Herding, HalveAlgorithm::UniformHalve]
        {
            for symmetrized in [false, true] {
                let spec = HalverSpec::new(alg, Some(k2()), 0.5, symmetrized);
                for seed in 0..5 {
                    let o = spec.halve(&s, &SeedPath::new(seed)).unwrap();
                    o.check_contract(48).unwrap();
                    assert_eq!(o.output().len(), 24);
                }
            }
        }
    }

    #[test]
    fn halvers_are_deterministic() {
        let s = line(64);
        for alg in [HalveAlgorithm::KernelHalve, HalveAlgorithm::Kt, HalveAlgorithm::UniformHalve] {
            let spec = HalverSpec::new(alg, Some(k2()), 0.5, true);
            let a = spec.halve(&s, &SeedPath::new(9).split(2)).unwrap();
            let b = spec.halve(&s, &SeedPath::new(9).split(2)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn halver_spec_validation() {
        assert!(HalverSpec::new(HalveAlgorithm::KernelHalve, None, 0.5, false).validate().is_err());
        assert!(HalverSpec::new(HalveAlgorithm::UniformHalve, None, 0.5, false).validate().is_ok());
        assert!(HalverSpec::new(HalveAlgorithm::Kt, Some(k2()), 1.0, false).validate().is_err());
        assert!(HalverSpec::new(HalveAlgorithm::Kt, Some(k2()), 0.0, false).validate().is_err());
    }

    #[test]
    fn thinner_output_sizes() {
        let s = line(64);
        for alg in [ThinAlgorithm::Kt, ThinAlgorithm::KtSplitOnly, ThinAlgorithm::Herding, ThinAlgorithm::Standard] {
            for f in [1usize, 2, 4, 16] {
                let spec = ThinnerSpec { algorithm: alg, kernel: Some(k2()), delta: 0.5, thin_factor: f };
                let out = spec.thin(&s, &SeedPath::new(1)).unwrap();
                assert_eq!(out.len(), 64 / f, "{alg:?} factor {f}");
                assert!(out.iter().all(|&i| i < 64));
            }
        }
        let bad = ThinnerSpec { algorithm: ThinAlgorithm::Kt, kernel: Some(k2()), delta: 0.5, thin_factor: 3 };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = HalverSpec::new(HalveAlgorithm::Kt, Some(k2()), 0.25, true);
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains(r#""algorithm":"kt""#));
        assert_eq!(serde_json::from_str::<HalverSpec>(&text).unwrap(), spec);
        let thin: ThinnerSpec = serde_json::from_str(
            r#"{"algorithm":"kt","kernel":{"family":"gaussian","bandwidth_sq":4.0},"delta":0.5,"thin_factor":16}"#,
        )
        .unwrap();
        assert_eq!(thin.thin_factor, 16);
    }
}

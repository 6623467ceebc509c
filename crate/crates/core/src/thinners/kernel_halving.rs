//! Kernel halving (one kt-split round) and its multi-round recursion.
//!
//! Pairs `(x, x')` are consumed in input order. The signed discrepancy
//! `psi = sum_{S1} k(y, .) - sum_{S2} k(z, .)` of the halves built so far
//! decides, through a self-balancing coin, which point of the pair joins
//! the first half:
//!
//! ```text
//! b^2   = k(x,x) + k(x',x') - 2 k(x,x')
//! a     = max(b sigma sqrt(2 log(2/delta_i)), b^2)
//! theta = clip(psi(x) - psi(x'), -a, a)
//! P[x -> S1] = (1 - theta/a) / 2                       (1/2 when a = 0)
//! sigma^2 += b^2 (1 + (b^2 - 2a) sigma^2 / a^2)_+
//! ```
//!
//! Evaluating `psi` at the new pair touches every earlier point once, so a
//! round costs about `n^2/2` kernel evaluations. Those same evaluations are
//! folded into per-point row sums over each half, which the swap stage
//! reuses instead of recomputing them.

use rand::Rng;

use super::{check_delta, HalveOutcome, SwapCandidate};
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::points::{PointSeq, SeedPath};

/// Per-point sums `sum_{c in half} k(x, c)` for both halves of a split.
pub(crate) struct HalfSums {
    pub selected: Vec<f64>,
    pub complement: Vec<f64>,
}

/// One self-balancing halving pass with per-pair failure budget `delta_pair`.
pub(crate) fn halve_pairs<K: Kernel + ?Sized, R: Rng>(
    s: &PointSeq,
    k: &K,
    delta_pair: f64,
    rng: &mut R,
) -> Result<(HalveOutcome, HalfSums)> {
    let n = s.len();
    if n % 2 != 0 {
        return Err(Error::Size(format!("halving needs an even number of points, got {n}")));
    }
    let log_term = (2.0 * (2.0 / delta_pair).ln()).sqrt();
    let mut in_first = vec![false; n];
    let mut sums = HalfSums { selected: vec![0.0; n], complement: vec![0.0; n] };
    let mut kx = vec![0.0; n];
    let mut ky = vec![0.0; n];
    let mut selected = Vec::with_capacity(n / 2);
    let mut complement = Vec::with_capacity(n / 2);
    let mut sigma_sq = 0.0f64;

    for i in (0..n).step_by(2) {
        let (x, y) = (s.point(i), s.point(i + 1));
        let (mut x_first, mut x_second, mut y_first, mut y_second) = (0.0, 0.0, 0.0, 0.0);
        for j in 0..i {
            let z = s.point(j);
            let (a, b) = (k.eval(x, z), k.eval(y, z));
            kx[j] = a;
            ky[j] = b;
            if in_first[j] {
                x_first += a;
                y_first += b;
            } else {
                x_second += a;
                y_second += b;
            }
        }
        let kxx = k.eval(x, x);
        let kyy = k.eval(y, y);
        let kxy = k.eval(x, y);
        let b_sq = (kxx + kyy - 2.0 * kxy).max(0.0);
        let theta = (x_first - x_second) - (y_first - y_second);
        if !(b_sq.is_finite() && theta.is_finite()) {
            return Err(Error::NonFinite(format!("kernel values for pair starting at index {i}")));
        }
        let b = b_sq.sqrt();
        let a = (b * sigma_sq.sqrt() * log_term).max(b_sq);
        let p_x_first = if a > 0.0 { 0.5 * (1.0 - theta.clamp(-a, a) / a) } else { 0.5 };
        let x_goes_first = rng.random::<f64>() < p_x_first;
        sigma_sq += if a > 0.0 { b_sq * (1.0 + (b_sq - 2.0 * a) * sigma_sq / (a * a)).max(0.0) } else { b_sq };

        let (first, second) = if x_goes_first { (i, i + 1) } else { (i + 1, i) };
        in_first[first] = true;
        selected.push(first);
        complement.push(second);

        let (k_first, k_second) = if x_goes_first { (&kx, &ky) } else { (&ky, &kx) };
        for j in 0..i {
            sums.selected[j] += k_first[j];
            sums.complement[j] += k_second[j];
        }
        if x_goes_first {
            sums.selected[i] = x_first + kxx;
            sums.complement[i] = x_second + kxy;
            sums.selected[i + 1] = y_first + kxy;
            sums.complement[i + 1] = y_second + kyy;
        } else {
            sums.selected[i] = x_first + kxy;
            sums.complement[i] = x_second + kxx;
            sums.selected[i + 1] = y_first + kyy;
            sums.complement[i + 1] = y_second + kxy;
        }
    }
    Ok((HalveOutcome::new(selected, complement), sums))
}

/// One kt-split round on `s`, with per-pair failure budget `delta / n`.
pub fn kernel_halve<K: Kernel + ?Sized>(s: &PointSeq, k: &K, delta: f64, seed: &SeedPath) -> Result<HalveOutcome> {
    check_delta(delta)?;
    let n = s.len();
    if n % 2 != 0 {
        return Err(Error::Size(format!("halving needs an even number of points, got {n}")));
    }
    if n == 0 {
        return Ok(HalveOutcome::new(Vec::new(), Vec::new()));
    }
    let (outcome, _) = halve_pairs(s, k, delta / n as f64, &mut seed.rng())?;
    Ok(outcome)
}

/// Leaves of a multi-round split plus the by-product sums the swap stage can reuse.
pub(crate) struct SplitResult {
    pub leaves: Vec<Vec<usize>>,
    /// `sum_c k(c, c')` over each leaf.
    pub leaf_self_sums: Vec<Option<f64>>,
    /// `sum_{c in leaf} k(x, c)` for every input `x`; only known after a single round.
    pub leaf_rows: Vec<Option<Vec<f64>>>,
    /// `sum_y k(x, y)` over the whole input, from the first round.
    pub input_rows: Option<Vec<f64>>,
}

impl SplitResult {
    pub fn into_swap_candidates(self) -> (Vec<SwapCandidate>, Option<Vec<f64>>) {
        let cands = self
            .leaves
            .into_iter()
            .zip(self.leaf_self_sums)
            .zip(self.leaf_rows)
            .map(|((indices, self_sum), rows)| SwapCandidate { indices, self_sum, rows })
            .collect();
        (cands, self.input_rows)
    }
}

/// `rounds` rounds of kernel halving. Every pair in every round gets the
/// failure budget `delta / n` with `n = s.len()`.
pub(crate) fn kt_split_prepared<K: Kernel + ?Sized>(
    s: &PointSeq,
    k: &K,
    delta: f64,
    rounds: u32,
    seed: &SeedPath,
) -> Result<SplitResult> {
    check_delta(delta)?;
    let n = s.len();
    let factor = 1usize.checked_shl(rounds).filter(|f| n % f == 0);
    if factor.is_none() {
        return Err(Error::Size(format!("kt-split with {rounds} rounds needs n divisible by 2^{rounds}, got {n}")));
    }
    let all: Vec<usize> = (0..n).collect();
    if rounds == 0 {
        return Ok(SplitResult {
            leaves: vec![all],
            leaf_self_sums: vec![None],
            leaf_rows: vec![None],
            input_rows: None,
        });
    }
    let delta_pair = delta / n as f64;
    let mut nodes = vec![all];
    let mut input_rows = None;
    let mut self_sums = Vec::new();
    let mut leaf_rows = Vec::new();
    for round in 0..rounds {
        let last = round + 1 == rounds;
        let mut next = Vec::with_capacity(nodes.len() * 2);
        self_sums.clear();
        leaf_rows.clear();
        for (j, node) in nodes.iter().enumerate() {
            let sub = s.select(node);
            let mut rng = seed.split(round as u64).split(j as u64).rng();
            let (outcome, sums) = halve_pairs(&sub, k, delta_pair, &mut rng)?;
            if round == 0 {
                input_rows = Some(sums.selected.iter().zip(&sums.complement).map(|(a, b)| a + b).collect());
            }
            if last {
                self_sums.push(Some(outcome.selected.iter().map(|&i| sums.selected[i]).sum::<f64>()));
                self_sums.push(Some(outcome.complement.iter().map(|&i| sums.complement[i]).sum::<f64>()));
                if round == 0 {
                    leaf_rows.push(Some(sums.selected));
                    leaf_rows.push(Some(sums.complement));
                } else {
                    leaf_rows.push(None);
                    leaf_rows.push(None);
                }
            }
            next.push(outcome.selected.iter().map(|&i| node[i]).collect());
            next.push(outcome.complement.iter().map(|&i| node[i]).collect());
        }
        nodes = next;
    }
    Ok(SplitResult { leaves: nodes, leaf_self_sums: self_sums, leaf_rows, input_rows })
}

/// All `2^rounds` candidate coresets of size `n / 2^rounds`, as indices into `s`.
pub fn kt_split<K: Kernel + ?Sized>(
    s: &PointSeq,
    k: &K,
    delta: f64,
    rounds: u32,
    seed: &SeedPath,
) -> Result<Vec<Vec<usize>>> {
    Ok(kt_split_prepared(s, k, delta, rounds, seed)?.leaves)
}

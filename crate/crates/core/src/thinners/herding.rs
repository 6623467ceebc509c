//! Kernel herding: greedy matching of the input mean embedding.

use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::points::PointSeq;

/// Indices of `m` herded points. Step `t` picks the input maximising
/// `mu(x) - acc(x) / (t + 1)` where `mu` is the input mean embedding and
/// `acc(x)` sums `k(x, x_j)` over earlier picks. Ties go to the lowest index.
/// With `distinct` set, an index is picked at most once.
pub(crate) fn herding_indices<K: Kernel + ?Sized>(s: &PointSeq, k: &K, m: usize, distinct: bool) -> Result<Vec<usize>> {
    let n = s.len();
    if m == 0 || m > n {
        return Err(Error::Size(format!("herding needs 1 <= m_out <= n, got m_out={m}, n={n}")));
    }
    let mut mu = vec![0.0; n];
    for i in 0..n {
        let x = s.point(i);
        mu[i] += k.eval(x, x);
        for j in 0..i {
            let v = k.eval(x, s.point(j));
            mu[i] += v;
            mu[j] += v;
        }
    }
    for v in &mut mu {
        *v /= n as f64;
    }

    let mut acc = vec![0.0; n];
    let mut taken = vec![false; n];
    let mut out = Vec::with_capacity(m);
    for t in 0..m {
        let scale = 1.0 / (t as f64 + 1.0);
        let mut best = None;
        let mut best_score = f64::NEG_INFINITY;
        for x in 0..n {
            if distinct && taken[x] {
                continue;
            }
            let score = mu[x] - acc[x] * scale;
            if score > best_score {
                best_score = score;
                best = Some(x);
            }
        }
        let pick = best.ok_or_else(|| Error::NonFinite("herding scores are not finite".into()))?;
        taken[pick] = true;
        out.push(pick);
        if t + 1 < m {
            let p = s.point(pick);
            for (x, a) in acc.iter_mut().enumerate() {
                *a += k.eval(s.point(x), p);
            }
        }
    }
    Ok(out)
}

/// Kernel herding returning `m_out` points of `s` (repeats allowed unless
/// `distinct`).
pub fn herding<K: Kernel + ?Sized>(s: &PointSeq, k: &K, m_out: usize, distinct: bool) -> Result<PointSeq> {
    Ok(s.select(&herding_indices(s, k, m_out, distinct)?))
}

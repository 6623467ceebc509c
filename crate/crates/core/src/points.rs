//! Point sequences, seed paths, and the structural operations every
//! algorithm is built from: contiguous four-way partition, concatenation and
//! standard thinning.
//!
//! A [`PointSeq`] is a dense row-major buffer of `n` points in `d`
//! dimensions. Order matters: halvers consume consecutive pairs and the
//! meta-procedures split inputs into contiguous blocks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered sequence of `d`-dimensional points with finite coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSeq {
    data: Vec<f64>,
    dim: usize,
}

impl PointSeq {
    /// Wraps a row-major buffer. `data.len()` must be a multiple of `dim`.
    pub fn new(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if data.len() % dim != 0 {
            return Err(Error::Size(format!("buffer of length {} is not a multiple of dimension {}", data.len(), dim)));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("coordinate {} of point {}", pos % dim, pos / dim)));
        }
        Ok(Self { data, dim })
    }

    pub fn empty(dim: usize) -> Self {
        Self { data: Vec::new(), dim: dim.max(1) }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = match rows.first() {
            Some(r) => r.as_ref().len(),
            None => return Err(Error::Size("cannot infer dimension of zero rows".into())),
        };
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: row.len() });
            }
            data.extend_from_slice(row);
        }
        Self::new(data, dim)
    }

    /// One-dimensional sequence from scalars.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec(), 1)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    /// Gathers the rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> PointSeq {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.point(i));
        }
        PointSeq { data, dim: self.dim }
    }

    /// Contiguous rows `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> PointSeq {
        PointSeq { data: self.data[start * self.dim..end * self.dim].to_vec(), dim: self.dim }
    }

    pub(crate) fn push_point(&mut self, p: &[f64]) {
        debug_assert_eq!(p.len(), self.dim);
        self.data.extend_from_slice(p);
    }

    pub(crate) fn extend_from(&mut self, other: &PointSeq) {
        debug_assert_eq!(other.dim, self.dim);
        self.data.extend_from_slice(&other.data);
    }
}

/// Splits `s` into four contiguous blocks of `n/4` points each.
pub fn partition4(s: &PointSeq) -> Result<[PointSeq; 4]> {
    let n = s.len();
    if n % 4 != 0 {
        return Err(Error::Size(format!("partition4 needs n divisible by 4, got {n}")));
    }
    let q = n / 4;
    Ok([s.slice(0, q), s.slice(q, 2 * q), s.slice(2 * q, 3 * q), s.slice(3 * q, n)])
}

/// Appends the parts in argument order.
pub fn concatenate(parts: &[PointSeq]) -> Result<PointSeq> {
    let Some(first) = parts.first() else {
        return Err(Error::Size("concatenate needs at least one part".into()));
    };
    let dim = first.dim();
    let total: usize = parts.iter().map(PointSeq::len).sum();
    let mut out = PointSeq { data: Vec::with_capacity(total * dim), dim };
    for p in parts {
        if p.dim() != dim && !p.is_empty() {
            return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
        }
        out.extend_from(p);
    }
    Ok(out)
}

/// Indices kept by standard thinning of `n` points down to `m`:
/// `ceil((i+1) n / m) - 1` for `i = 0..m`. The last point is always kept.
pub fn standard_thin_indices(n: usize, m: usize) -> Result<Vec<usize>> {
    if m == 0 || m > n {
        return Err(Error::Size(format!("standard thinning needs 1 <= m <= n, got m={m}, n={n}")));
    }
    Ok((0..m).map(|i| ((i + 1) * n).div_ceil(m) - 1).collect())
}

pub fn standard_thin(s: &PointSeq, m: usize) -> Result<PointSeq> {
    Ok(s.select(&standard_thin_indices(s.len(), m)?))
}

/// Address of an RNG stream: a root seed plus a path of child indices.
///
/// The stream is a pure function of `(root_seed, path)`, so recursive
/// branches can run in any order or in parallel and still draw identical
/// numbers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedPath {
    pub root_seed: u64,
    pub path: Vec<u64>,
}

impl SeedPath {
    pub fn new(root_seed: u64) -> Self {
        Self { root_seed, path: Vec::new() }
    }

    /// Child stream `child` of this one.
    pub fn split(&self, child: u64) -> SeedPath {
        let mut path = Vec::with_capacity(self.path.len() + 1);
        path.extend_from_slice(&self.path);
        path.push(child);
        SeedPath { root_seed: self.root_seed, path }
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut state = splitmix64(self.root_seed ^ 0x6a09_e667_f3bc_c908);
        for (depth, &c) in self.path.iter().enumerate() {
            state = splitmix64(state ^ splitmix64(c.wrapping_add((depth as u64 + 1) << 32)));
        }
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }
}

/// Functional form of [`SeedPath::split`].
pub fn split_seed(sp: &SeedPath, child: u64) -> SeedPath {
    sp.split(child)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

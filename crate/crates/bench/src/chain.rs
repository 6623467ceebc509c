//! MCMC chain ingestion and a synthetic autocorrelated chain.

use std::path::Path;

use compresspp::io::load_points;
use compresspp::points::standard_thin_indices;
use compresspp::{Error, PointSeq, Result, SeedPath};
use rand_distr::{Distribution, StandardNormal};

/// Thins a post-burn-in chain to `n` points with standard thinning. With
/// `normalize`, each coordinate is shifted by the chain's sample mean and
/// divided by its sample standard deviation, both computed on the full chain
/// before thinning.
pub fn thin_chain(chain: &PointSeq, n: usize, normalize: bool) -> Result<PointSeq> {
    let len = chain.len();
    if n == 0 || n > len {
        return Err(Error::Size(format!("cannot take {n} points from a chain of length {len}")));
    }
    let idx = standard_thin_indices(len, n)?;
    let out = chain.select(&idx);
    if !normalize {
        return Ok(out);
    }
    if len < 2 {
        return Err(Error::Size("normalization needs at least two chain rows".into()));
    }
    let d = chain.dim();
    let mut mean = vec![0.0; d];
    for p in chain.iter() {
        for (m, v) in mean.iter_mut().zip(p) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= len as f64);
    let mut var = vec![0.0; d];
    for p in chain.iter() {
        for c in 0..d {
            var[c] += (p[c] - mean[c]).powi(2);
        }
    }
    let sd: Vec<f64> = var.iter().map(|v| (v / (len - 1) as f64).sqrt()).collect();
    if let Some(c) = sd.iter().position(|&s| s == 0.0) {
        return Err(Error::InvalidParameter(format!("chain coordinate {c} is constant; cannot normalize")));
    }
    let data =
        out.iter().flat_map(|p| p.iter().enumerate().map(|(c, v)| (v - mean[c]) / sd[c]).collect::<Vec<_>>()).collect();
    PointSeq::new(data, d)
}

/// Reads a headerless chain CSV (or `.jsonl`) and thins it with [`thin_chain`].
pub fn ingest_chain(path: &Path, n: usize, normalize: bool) -> Result<PointSeq> {
    thin_chain(&load_points(path)?, n, normalize)
}

/// Stationary Gaussian AR(1) chain `x_t = ρ x_{t-1} + √(1-ρ²) ε_t` with
/// `x_0 ~ N(0, I_d)`, so every marginal is `N(0, I_d)`.
pub fn ar1_chain(len: usize, d: usize, rho: f64, seed: &SeedPath) -> Result<PointSeq> {
    if !(rho.abs() < 1.0) {
        return Err(Error::InvalidParameter(format!("AR(1) coefficient must satisfy |rho| < 1, got {rho}")));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("chain dimension must be positive".into()));
    }
    let mut rng = seed.rng();
    let noise = (1.0 - rho * rho).sqrt();
    let mut data = Vec::with_capacity(len * d);
    let mut x: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
    for t in 0..len {
        if t > 0 {
            for v in x.iter_mut() {
                let e: f64 = StandardNormal.sample(&mut rng);
                *v = rho * *v + noise * e;
            }
        }
        data.extend_from_slice(&x);
    }
    PointSeq::new(data, d)
}

//! Streaming Compress with level buffers.
//!
//! Points arrive one at a time and are grouped into batches of `4^{g+1}`.
//! Level `i` holds at most `2^i 4^{g+1}` points; when it fills up it is
//! halved into level `i + 1` and emptied. After batch `t = 4^j` (`j >= 1`),
//! that is after `n = 4^{j+g+1}` inputs, level `j + 1` holds a coreset of
//! `2^g √n` points, which is emitted. Every Halve call receives the global
//! δ of the configuration.
//!
//! Streaming output is not expected to equal batch Compress on the same data:
//! the two consume points in different groupings.

use crate::compress::{CompressConfig, CompressTrace, HalveCall};
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::points::{PointSeq, SeedPath};

/// A coreset emitted by [`StreamingCompress`].
#[derive(Clone, Debug, PartialEq)]
pub struct StreamEmission {
    /// Number of input points consumed so far.
    pub n: usize,
    /// `2^g √n` points.
    pub coreset: PointSeq,
    /// Calls made so far, with the running peak of stored points.
    pub trace: CompressTrace,
}

/// Single-writer streaming state machine.
pub struct StreamingCompress<K> {
    cfg: CompressConfig,
    kernel: K,
    seed: SeedPath,
    dim: Option<usize>,
    levels: Vec<PointSeq>,
    batches: u64,
    points_seen: usize,
    halves_per_level: Vec<u64>,
    trace: CompressTrace,
    peak: usize,
}

impl<K: Kernel> StreamingCompress<K> {
    pub fn new(cfg: CompressConfig, kernel: K, seed: SeedPath) -> Result<Self> {
        cfg.validate()?;
        if cfg.g > 12 {
            return Err(Error::Config(format!("streaming batch size 4^(g+1) is too large for g={}", cfg.g)));
        }
        Ok(Self {
            cfg,
            kernel,
            seed,
            dim: None,
            levels: Vec::new(),
            batches: 0,
            points_seen: 0,
            halves_per_level: Vec::new(),
            trace: CompressTrace { peak_stored_points: Some(0), ..Default::default() },
            peak: 0,
        })
    }

    /// `4^{g+1}`.
    pub fn batch_size(&self) -> usize {
        1usize << (2 * (self.cfg.g + 1))
    }

    pub fn points_seen(&self) -> usize {
        self.points_seen
    }

    /// Points currently held across all levels.
    pub fn stored_points(&self) -> usize {
        self.levels.iter().map(PointSeq::len).sum()
    }

    /// Largest number of points held at once, counting a Halve call's own
    /// working copy of its input.
    pub fn peak_stored_points(&self) -> usize {
        self.peak
    }

    pub fn trace(&self) -> &CompressTrace {
        &self.trace
    }

    /// Adds one point; returns a coreset when a batch boundary `t = 4^j`,
    /// `j >= 1`, is reached.
    pub fn push(&mut self, x: &[f64]) -> Result<Option<StreamEmission>> {
        match self.dim {
            None => {
                PointSeq::new(x.to_vec(), x.len())?;
                self.dim = Some(x.len());
                self.levels.push(PointSeq::empty(x.len()));
            }
            Some(d) if d != x.len() => return Err(Error::DimensionMismatch { expected: d, got: x.len() }),
            Some(_) => {
                if let Some(pos) = x.iter().position(|v| !v.is_finite()) {
                    return Err(Error::NonFinite(format!("coordinate {pos} of streamed point {}", self.points_seen)));
                }
            }
        }
        self.levels[0].push_point(x);
        self.points_seen += 1;
        self.peak = self.peak.max(self.stored_points());
        if self.levels[0].len() < self.batch_size() {
            self.trace.peak_stored_points = Some(self.peak);
            return Ok(None);
        }
        self.batches += 1;
        self.process_levels()?;
        self.trace.peak_stored_points = Some(self.peak);

        let t = self.batches;
        if t >= 4 && t.is_power_of_two() && t.trailing_zeros() % 2 == 0 {
            let j = (t.trailing_zeros() / 2) as usize;
            return Ok(Some(StreamEmission {
                n: self.points_seen,
                coreset: self.levels[j + 1].clone(),
                trace: self.trace.clone(),
            }));
        }
        Ok(None)
    }

    fn process_levels(&mut self) -> Result<()> {
        let base = self.batch_size();
        let dim = self.dim.unwrap_or(1);
        let mut i = 0;
        while i < self.levels.len() {
            let cap = base << i;
            if self.levels[i].len() == cap {
                if self.levels.len() == i + 1 {
                    self.levels.push(PointSeq::empty(dim));
                    self.halves_per_level.resize(self.levels.len(), 0);
                }
                if self.halves_per_level.len() <= i {
                    self.halves_per_level.resize(i + 1, 0);
                }
                // The Halve call keeps its own copy of the level while running.
                self.peak = self.peak.max(self.stored_points() + cap);
                let count = self.halves_per_level[i];
                self.halves_per_level[i] += 1;
                let seed = self.seed.split(i as u64).split(count);
                let level = std::mem::replace(&mut self.levels[i], PointSeq::empty(dim));
                let outcome = self.cfg.halver.halve_with(&level, &self.kernel, self.cfg.delta, &seed)?;
                let half = outcome.output_points(&level);
                self.levels[i + 1].extend_from(&half);
                self.trace.halve_calls.push(HalveCall { level: i as u32, size: cap, delta: self.cfg.delta });
            }
            i += 1;
        }
        Ok(())
    }
}

/// Runs the streaming state machine over a finite sequence and collects every emission.
pub fn compress_streaming<K: Kernel>(
    points: &PointSeq,
    cfg: &CompressConfig,
    kernel: K,
    seed: &SeedPath,
) -> Result<Vec<StreamEmission>> {
    let mut sc = StreamingCompress::new(cfg.clone(), kernel, seed.clone())?;
    let mut out = Vec::new();
    for x in points.iter() {
        if let Some(e) = sc.push(x)? {
            out.push(e);
        }
    }
    Ok(out)
}

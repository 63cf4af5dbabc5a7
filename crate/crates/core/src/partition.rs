use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly increasing times `t_0 < t_1 < ... < t_K`, with `K >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    times: Vec<f64>,
    uniform: bool,
}

impl Partition {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidPartition(format!(
                "need at least two points, got {}",
                times.len()
            )));
        }
        if let Some(t) = times.iter().find(|t| !t.is_finite()) {
            return Err(Error::InvalidPartition(format!("non-finite time {t}")));
        }
        if let Some(k) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPartition(format!(
                "not strictly increasing at index {}: {} then {}",
                k + 1,
                times[k],
                times[k + 1]
            )));
        }
        let h0 = times[1] - times[0];
        let span = times[times.len() - 1] - times[0];
        let uniform = times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h0).abs() <= 1e-12 * span.max(1.0));
        Ok(Self { times, uniform })
    }

    /// `K` equal steps on `[t0, t1]`.
    pub fn uniform(t0: f64, t1: f64, k: usize) -> Result<Self> {
        if k == 0 || !(t1 > t0) {
            return Err(Error::InvalidPartition(format!(
                "uniform partition needs K >= 1 and t1 > t0 (K={k}, [{t0}, {t1}])"
            )));
        }
        let h = (t1 - t0) / k as f64;
        let mut times: Vec<f64> = (0..=k).map(|i| t0 + h * i as f64).collect();
        times[k] = t1;
        Ok(Self { times, uniform: true })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Number of points, `K + 1`.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of steps `K`.
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn mesh(&self) -> f64 {
        self.times
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Index of a point equal to `t` up to a relative tolerance of 1e-12.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let tol = 1e-12 * (self.end() - self.start()).abs().max(1.0);
        let i = self.times.partition_point(|&s| s < t - tol);
        (i < self.times.len() && (self.times[i] - t).abs() <= tol).then_some(i)
    }

    /// Index `k` with `t_k <= t < t_{k+1}`, clamped to the last interval.
    pub fn interval_of(&self, t: f64) -> usize {
        let i = self.times.partition_point(|&s| s <= t);
        i.saturating_sub(1).min(self.steps() - 1)
    }

    /// Every `stride`-th point; the last point must be hit exactly.
    pub fn coarsen(&self, stride: usize) -> Result<Self> {
        if stride == 0 || !self.steps().is_multiple_of(stride) {
            return Err(Error::InvalidPartition(format!(
                "stride {stride} does not divide {} steps",
                self.steps()
            )));
        }
        let times: Vec<f64> = self.times.iter().step_by(stride).copied().collect();
        Ok(Self {
            times,
            uniform: self.uniform,
        })
    }

    /// Points of `self` lying in `[a, b]`.
    pub fn restrict(&self, a: f64, b: f64) -> Result<Self> {
        Self::new(
            self.times
                .iter()
                .copied()
                .filter(|&t| t >= a && t <= b)
                .collect(),
        )
    }
}

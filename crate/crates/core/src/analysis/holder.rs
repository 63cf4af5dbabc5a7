//! Hölder exponent by regression of sup-increments on dyadic lags.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::drivers::ChainCurve;
use crate::error::{Error, Result};
use crate::path::DriverPath;

use super::explosion::slope;

/// Slope of `log sup_k |x(t_{k+L}) - x(t_k)|` on `log(L Δt)` over dyadic
/// lags `L <= len/8`, with `Δt` the mean grid spacing. A constant path gives
/// `+∞`.
pub fn holder_estimate(path: &DriverPath) -> Result<f64> {
    let n = path.len();
    if n < 64 {
        return Err(Error::InvalidConfig(format!("need at least 64 samples, got {n}")));
    }
    if path.is_constant() {
        return Ok(f64::INFINITY);
    }
    let dt = (path.time(n - 1) - path.time(0)) / (n - 1) as f64;
    let mut pts = Vec::new();
    let mut lag = 1;
    while lag <= (n - 1) / 8 {
        let sup = (0..n - lag)
            .map(|k| path.increment(k, k + lag).iter().map(|v| v * v).sum::<f64>())
            .fold(0.0, f64::max)
            .sqrt();
        if sup > 0.0 {
            pts.push(((lag as f64 * dt).ln(), sup.ln()));
        }
        lag *= 2;
    }
    if pts.len() < 2 {
        return Ok(f64::INFINITY);
    }
    Ok(slope(&pts))
}

#[derive(Debug, Clone, Serialize)]
pub struct HolderSandwich {
    pub alpha: f64,
    pub pairs: usize,
    pub seed: u64,
    /// `min |u(s) - u(t)| / |s - t|^α` over the pairs.
    pub c1: f64,
    /// `max` of the same ratio.
    pub c2: f64,
    pub ratio: f64,
    /// The minimum restricted to `|s - t| >= δ_depth`; `None` if no pair qualifies.
    pub c1_beyond_delta: Option<f64>,
}

/// Two-sided Hölder constants of the chain curve over `pairs` uniform random
/// pairs `s != t` in `[0, 1]`, Euclidean norm.
pub fn holder_sandwich(curve: &ChainCurve, pairs: usize, seed: u64) -> Result<HolderSandwich> {
    if pairs == 0 {
        return Err(Error::InvalidConfig("need at least one pair".into()));
    }
    let alpha = curve.alpha();
    let delta = curve.delta(curve.depth());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut c1, mut c2) = (f64::INFINITY, 0.0f64);
    let mut c1_far: Option<f64> = None;
    let mut drawn = 0;
    while drawn < pairs {
        let (s, t): (f64, f64) = (rng.random(), rng.random());
        if s == t {
            continue;
        }
        drawn += 1;
        let (a, b) = (curve.eval(s), curve.eval(t));
        let gap = (s - t).abs();
        let r = (a[0] - b[0]).hypot(a[1] - b[1]) / gap.powf(alpha);
        c1 = c1.min(r);
        c2 = c2.max(r);
        if gap >= delta {
            c1_far = Some(c1_far.map_or(r, |c| c.min(r)));
        }
    }
    Ok(HolderSandwich {
        alpha,
        pairs,
        seed,
        c1,
        c2,
        ratio: c2 / c1,
        c1_beyond_delta: c1_far,
    })
}

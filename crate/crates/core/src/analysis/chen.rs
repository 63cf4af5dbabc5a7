//! Random-triple checks of `A(s,u) = A(s,t) + A(t,u) + Δx(s,t) ⊗ Δx(t,u)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::area::{chen_combine, AreaProcess};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct ChenReport {
    pub triples: usize,
    pub seed: u64,
    /// Largest entrywise `|A(s,u) - chen_combine(...)|`.
    pub max_residual: f64,
    /// Grid indices `(s, t, u)` where it occurs.
    pub worst: Option<(usize, usize, usize)>,
    /// Largest `|A(s,u)|_∞` seen, for scale.
    pub max_area: f64,
}

/// Draws `triples` sorted index triples `s <= t <= u` uniformly from the
/// area grid and compares the direct area with the Chen combination.
pub fn chen_check(area: &AreaProcess, triples: usize, seed: u64) -> Result<ChenReport> {
    let n = area.steps() + 1;
    if n < 2 {
        return Err(Error::InvalidConfig("area grid has no intervals".into()));
    }
    let path = area.path();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_residual: f64 = 0.0;
    let mut max_area: f64 = 0.0;
    let mut worst = None;
    for _ in 0..triples {
        let mut v = [rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n)];
        v.sort_unstable();
        let [s, t, u] = v;
        let direct = area.area(s, u);
        let combined = chen_combine(&area.area(s, t), &area.area(t, u), &path.increment(s, t), &path.increment(t, u))?;
        let r = direct.iter().zip(&combined).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        max_area = direct.iter().fold(max_area, |m, a| m.max(a.abs()));
        if r > max_residual || worst.is_none() {
            max_residual = max_residual.max(r);
            worst = Some((s, t, u));
        }
    }
    Ok(ChenReport {
        triples,
        seed,
        max_residual,
        worst,
        max_area,
    })
}

//! Cancellation statistic for sums of consecutive small-interval areas:
//! `max |Σ_{l=k}^{m-1} A^{ij}(lh, (l+1)h)| / ((m-k)^β h^{2α})` over dyadic `h`.

use rayon::prelude::*;
use serde::Serialize;

use crate::area::AreaProcess;
use crate::error::{Error, Result};

/// Longest window `m - k` examined at each level.
pub const WINDOW_CAP: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Argmax {
    pub level: u32,
    pub k: usize,
    pub m: usize,
    pub i: usize,
    pub j: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionStat {
    pub alpha: f64,
    pub beta: f64,
    pub levels: Vec<u32>,
    /// Maximum at `h = T 2^{-level}` alone.
    pub per_level: Vec<f64>,
    /// Maximum over all `h >= T 2^{-level}` among the examined levels.
    pub cumulative: Vec<f64>,
    /// Overall maximum and where it is attained.
    pub value: f64,
    pub argmax: Option<Argmax>,
    pub window_cap: usize,
}

impl ConditionStat {
    /// Ratio of consecutive cumulative values.
    pub fn level_ratios(&self) -> Vec<f64> {
        self.cumulative.windows(2).map(|w| w[1] / w[0]).collect()
    }

    /// Cumulative value at `level`.
    pub fn at_level(&self, level: u32) -> Option<f64> {
        self.levels.iter().position(|&l| l == level).map(|i| self.cumulative[i])
    }
}

/// Prefix sums of the level-`level` coarse areas for entry `(i, j)`, up to `upto`.
fn prefix(area: &AreaProcess, level: u32, i: usize, j: usize, upto: usize) -> Vec<f64> {
    let stride = area.steps() >> level;
    let mut p = Vec::with_capacity(upto + 1);
    let mut acc = 0.0;
    p.push(acc);
    for l in 0..upto {
        acc += area.entry(l * stride, (l + 1) * stride, i, j);
        p.push(acc);
    }
    p
}

fn ratio(p: &[f64], k: usize, m: usize, beta: f64, h2a: f64) -> f64 {
    (p[m] - p[k]).abs() / (((m - k) as f64).powf(beta) * h2a)
}

/// Exhaustive over windows `0 <= k < m <= 2^level`, `m - k <= WINDOW_CAP`,
/// and all entries, at each dyadic level.
pub fn condition21_stat(area: &AreaProcess, alpha: f64, beta: f64, levels: &[u32]) -> Result<ConditionStat> {
    let steps = area.steps();
    if !steps.is_power_of_two() {
        return Err(Error::InvalidConfig(format!("area has {steps} steps, not a power of two")));
    }
    if let Some(&l) = levels.iter().find(|&&l| (1usize << l) > steps) {
        return Err(Error::InvalidConfig(format!("level {l} finer than the area grid ({steps} steps)")));
    }
    let span = area.path().time(steps) - area.path().time(0);
    let d = area.dim();
    let mut per_level = Vec::with_capacity(levels.len());
    let mut cumulative = Vec::with_capacity(levels.len());
    let mut best: (f64, Option<Argmax>) = (0.0, None);
    for &level in levels {
        let n = 1usize << level;
        let h = span / n as f64;
        let h2a = h.powf(2.0 * alpha);
        let mut lvl: (f64, Option<Argmax>) = (0.0, None);
        for i in 0..d {
            for j in 0..d {
                let p = prefix(area, level, i, j, n);
                let (v, k, m) = (0..n)
                    .into_par_iter()
                    .map(|k| {
                        let mut b = (0.0, k, k + 1);
                        for m in k + 1..=(k + WINDOW_CAP).min(n) {
                            let r = ratio(&p, k, m, beta, h2a);
                            if r > b.0 {
                                b = (r, k, m);
                            }
                        }
                        b
                    })
                    .reduce(|| (0.0, 0, 1), |a, b| if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) { b } else { a });
                if v > lvl.0 {
                    lvl = (v, Some(Argmax { level, k, m, i, j }));
                }
            }
        }
        per_level.push(lvl.0);
        if lvl.0 > best.0 {
            best = lvl;
        }
        cumulative.push(best.0);
    }
    Ok(ConditionStat {
        alpha,
        beta,
        levels: levels.to_vec(),
        per_level,
        cumulative,
        value: best.0,
        argmax: best.1,
        window_cap: WINDOW_CAP,
    })
}

/// The ratio for one window, computed as in [`condition21_stat`].
pub fn condition21_ratio(area: &AreaProcess, alpha: f64, beta: f64, at: &Argmax) -> f64 {
    let steps = area.steps();
    let span = area.path().time(steps) - area.path().time(0);
    let h = span / (1usize << at.level) as f64;
    let p = prefix(area, at.level, at.i, at.j, at.m);
    ratio(&p, at.k, at.m, beta, h.powf(2.0 * alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::area::AreaKind;
    use crate::drivers::{brownian_path, ito_area, stratonovich_area, BrownianConfig};
    use crate::path::DriverPath;
    use std::sync::Arc;

    fn ito(levels: u32, seed: u64) -> AreaProcess {
        let cfg = BrownianConfig::new(2, 1.0, levels, seed).with_substeps(4);
        let p = Arc::new(brownian_path(&cfg).unwrap());
        ito_area(p, &cfg).unwrap()
    }

    #[test]
    fn zero_area_gives_zero() {
        // constant path: every coarse area is zero too
        let grid = crate::partition::Partition::uniform(0.0, 1.0, 256).unwrap();
        let p = Arc::new(DriverPath::from_fn(grid, 2, |_| vec![0.3, -1.0]).unwrap());
        let a = AreaProcess::zero(p, AreaKind::Degenerate);
        let s = condition21_stat(&a, 0.45, 0.55, &[2, 4, 8]).unwrap();
        assert_eq!(s.value, 0.0);
        assert!(s.argmax.is_none());
        // on a moving path a zero fine area vanishes at the finest level only
        let cfg = BrownianConfig::new(2, 1.0, 8, 1);
        let a = AreaProcess::zero(Arc::new(brownian_path(&cfg).unwrap()), AreaKind::Ito);
        assert_eq!(condition21_stat(&a, 0.45, 0.55, &[8]).unwrap().value, 0.0);
    }

    #[test]
    fn argmax_reproduces_value() {
        let a = ito(9, 7);
        let s = condition21_stat(&a, 0.45, 0.55, &[3, 5, 7, 9]).unwrap();
        assert_eq!(condition21_ratio(&a, 0.45, 0.55, &s.argmax.unwrap()), s.value);
        assert!(s.cumulative.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn brute_force_small_level() {
        let a = ito(6, 3);
        let s = condition21_stat(&a, 0.4, 0.6, &[4]).unwrap();
        let h: f64 = 1.0 / 16.0;
        let mut best: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..16 {
                    for m in k + 1..=16 {
                        let sum: f64 = (k..m).map(|l| a.area(4 * l, 4 * l + 4)[i * 2 + j]).sum();
                        best = best.max(sum.abs() / (((m - k) as f64).powf(0.6) * h.powf(0.8)));
                    }
                }
            }
        }
        assert!((s.value - best).abs() <= 1e-12 * best);
    }

    #[test]
    fn scaling_is_linear() {
        // scaling the path by 2 multiplies every area by 4 exactly
        let a = ito(8, 11);
        let s1 = condition21_stat(&a, 0.45, 0.55, &[4, 6, 8]).unwrap();
        let s2 = condition21_stat(&a.scaled(2.0), 0.45, 0.55, &[4, 6, 8]).unwrap();
        assert_eq!(s2.value, 4.0 * s1.value);
    }

    #[test]
    fn stratonovich_dominates_ito() {
        for seed in [1, 2, 3] {
            let a = ito(10, seed);
            let s = stratonovich_area(&a).unwrap();
            let lv: Vec<u32> = (4..=10).collect();
            let vi = condition21_stat(&a, 0.45, 0.55, &lv).unwrap().value;
            let vs = condition21_stat(&s, 0.45, 0.55, &lv).unwrap().value;
            assert!(vs >= vi, "seed {seed}: {vs} < {vi}");
        }
    }

    #[test]
    fn rejects_fine_levels() {
        let a = ito(5, 1);
        assert!(condition21_stat(&a, 0.45, 0.55, &[6]).is_err());
    }
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::area::AreaProcess;
use crate::error::{check_dim, Error, Result};
use crate::path::DriverPath;

/// A control `ω(s, t)`: either `c (t - s)` or `ω(t) - ω(s)` for a tabulated
/// non-decreasing `ω`, linearly interpolated between nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ControlModulus {
    Linear { c: f64 },
    Tabulated { times: Vec<f64>, omega: Vec<f64> },
}

impl ControlModulus {
    pub fn linear(c: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::InvalidConfig(format!("control constant {c} must be finite and >= 0")));
        }
        Ok(Self::Linear { c })
    }

    pub fn tabulated(times: Vec<f64>, omega: Vec<f64>) -> Result<Self> {
        check_dim("tabulated control", times.len(), omega.len())?;
        if times.len() < 2 {
            return Err(Error::InvalidConfig("tabulated control needs two nodes".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("control nodes must increase strictly".into()));
        }
        if omega.windows(2).any(|w| w[1] < w[0]) || omega.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidConfig("tabulated control must be finite and non-decreasing".into()));
        }
        Ok(Self::Tabulated { times, omega })
    }

    /// The constant of the linear form.
    pub fn constant(&self) -> Option<f64> {
        match self {
            Self::Linear { c } => Some(*c),
            Self::Tabulated { .. } => None,
        }
    }

    fn at(times: &[f64], omega: &[f64], t: f64) -> f64 {
        let n = times.len();
        if t <= times[0] {
            return omega[0];
        }
        if t >= times[n - 1] {
            return omega[n - 1];
        }
        let i = times.partition_point(|&s| s <= t) - 1;
        let w = (t - times[i]) / (times[i + 1] - times[i]);
        omega[i] + w * (omega[i + 1] - omega[i])
    }

    /// `ω(s, t)` for `s <= t`.
    pub fn omega(&self, s: f64, t: f64) -> f64 {
        if s == t {
            return 0.0;
        }
        match self {
            Self::Linear { c } => c * (t - s),
            Self::Tabulated { times, omega } => Self::at(times, omega, t) - Self::at(times, omega, s),
        }
    }
}

const BLOCK: usize = 64;

/// Smallest `c` with `|x(t) - x(s)|_∞^p <= c (t - s)` over all grid pairs.
///
/// Exhaustive, with block-wise pruning: for a fixed left point, a block of
/// right points is skipped when the block's coordinate range cannot beat the
/// running maximum.
pub fn control_fit(path: &DriverPath, p: f64) -> Result<ControlModulus> {
    if !(p >= 1.0) {
        return Err(Error::InvalidConfig(format!("control exponent p={p} must be >= 1")));
    }
    let n = path.len();
    let d = path.dim();
    let t = path.grid().times();
    let ratio = |k: usize, m: usize| path.increment_sup(k, m).powf(p) / (t[m] - t[k]);

    let adjacent = (0..n - 1).map(|k| ratio(k, k + 1)).fold(0.0, f64::max);

    let nb = n.div_ceil(BLOCK);
    let mut lo = vec![f64::INFINITY; nb * d];
    let mut hi = vec![f64::NEG_INFINITY; nb * d];
    for k in 0..n {
        let b = k / BLOCK;
        for (i, &v) in path.value(k).iter().enumerate() {
            lo[b * d + i] = lo[b * d + i].min(v);
            hi[b * d + i] = hi[b * d + i].max(v);
        }
    }

    let best = (0..n - 1)
        .into_par_iter()
        .map(|k| {
            let xk = path.value(k);
            let mut best = adjacent;
            let mut m = k + 1;
            while m < n {
                let b = m / BLOCK;
                let end = ((b + 1) * BLOCK).min(n);
                let reach = (0..d)
                    .map(|i| (hi[b * d + i] - xk[i]).max(xk[i] - lo[b * d + i]))
                    .fold(0.0, f64::max);
                if reach.powf(p) / (t[m] - t[k]) > best {
                    for q in m..end {
                        best = best.max(ratio(k, q));
                    }
                }
                m = end;
            }
            best
        })
        .reduce(|| adjacent, f64::max);
    ControlModulus::linear(best)
}

/// Like [`control_fit`], additionally requiring `|A(s,t)|_∞^{p/2} <= c (t - s)`.
///
/// The area part is exhaustive too. A block of right points is skipped when
/// `|A(k,m)| <= |cum(m) - cum(k)| + |x_k - x_0| |x_m - x_k| + |μ| (t_m - t_k)`,
/// bounded over the block, cannot beat the running maximum. The running
/// maximum starts from all pairs of a coarse sub-grid.
pub fn control_fit_with_area(area: &AreaProcess, p: f64) -> Result<ControlModulus> {
    let path = area.path();
    let c_path = control_fit(path, p)?.constant().unwrap_or(0.0);
    let n = path.len();
    let d = area.dim();
    let dd = d * d;
    let t = path.grid().times();
    let q = p / 2.0;
    let entry_sup = |k: usize, m: usize| {
        let mut a: f64 = 0.0;
        for r in 0..d {
            for j in 0..d {
                a = a.max(area.entry(k, m, r, j).abs());
            }
        }
        a
    };
    let ratio = |k: usize, m: usize| entry_sup(k, m).powf(q) / (t[m] - t[k]);

    let stride = BLOCK.min(n - 1).max(1);
    let coarse: Vec<usize> = (0..n).step_by(stride).collect();
    let seed = coarse
        .par_iter()
        .enumerate()
        .map(|(i, &k)| coarse[i + 1..].iter().map(|&m| ratio(k, m)).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max)
        .max((0..n - 1).map(|k| ratio(k, k + 1)).fold(0.0, f64::max));

    let nb = n.div_ceil(BLOCK);
    let mut x_lo = vec![f64::INFINITY; nb * d];
    let mut x_hi = vec![f64::NEG_INFINITY; nb * d];
    let mut c_lo = vec![f64::INFINITY; nb * dd];
    let mut c_hi = vec![f64::NEG_INFINITY; nb * dd];
    for k in 0..n {
        let b = k / BLOCK;
        for (i, &v) in path.value(k).iter().enumerate() {
            x_lo[b * d + i] = x_lo[b * d + i].min(v);
            x_hi[b * d + i] = x_hi[b * d + i].max(v);
        }
        for e in 0..dd {
            let v = area.cum_entry(k, e);
            c_lo[b * dd + e] = c_lo[b * dd + e].min(v);
            c_hi[b * dd + e] = c_hi[b * dd + e].max(v);
        }
    }
    let mu: Vec<f64> = area.drift().map_or(vec![0.0; dd], |m| m.iter().map(|v| v.abs()).collect());
    let x0 = path.value(0);

    let c_area = (0..n - 1)
        .into_par_iter()
        .map(|k| {
            let xk = path.value(k);
            let mut best = seed;
            let mut m = k + 1;
            while m < n {
                let b = m / BLOCK;
                let end = ((b + 1) * BLOCK).min(n);
                let span = t[end - 1] - t[k];
                let mut bound: f64 = 0.0;
                for r in 0..d {
                    for j in 0..d {
                        let e = r * d + j;
                        let ck = area.cum_entry(k, e);
                        let dc = (c_hi[b * dd + e] - ck).max(ck - c_lo[b * dd + e]);
                        let dx = (x_hi[b * d + j] - xk[j]).max(xk[j] - x_lo[b * d + j]);
                        bound = bound.max(dc + (xk[r] - x0[r]).abs() * dx + mu[e] * span);
                    }
                }
                // slack covers rounding between the bound and the entry formula
                if (bound * (1.0 + 1e-9)).powf(q) / (t[m] - t[k]) > best {
                    for l in m..end {
                        best = best.max(ratio(k, l));
                    }
                }
                m = end;
            }
            best
        })
        .reduce(|| seed, f64::max);
    ControlModulus::linear(c_path.max(c_area))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::Partition;
    use proptest::prelude::*;

    fn brute(path: &DriverPath, p: f64) -> f64 {
        let t = path.grid().times();
        let mut c: f64 = 0.0;
        for k in 0..path.len() {
            for m in k + 1..path.len() {
                c = c.max(path.increment_sup(k, m).powf(p) / (t[m] - t[k]));
            }
        }
        c
    }

    #[test]
    fn trivial_fits() {
        let g = Partition::uniform(0.0, 1.0, 10).unwrap();
        let flat = DriverPath::from_fn(g.clone(), 2, |_| vec![1.0, -1.0]).unwrap();
        assert_eq!(control_fit(&flat, 2.0).unwrap().constant(), Some(0.0));
        let line = DriverPath::from_fn(g, 1, |t| vec![t]).unwrap();
        let c = control_fit(&line, 1.0).unwrap().constant().unwrap();
        assert!((c - 1.0).abs() < 1e-12);
        assert!(control_fit(&line, 0.5).is_err());
    }

    #[test]
    fn tabulated_interpolates() {
        let w = ControlModulus::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 3.0]).unwrap();
        assert!((w.omega(0.5, 1.5) - 1.5).abs() < 1e-15);
        assert_eq!(w.omega(0.7, 0.7), 0.0);
        assert!(ControlModulus::tabulated(vec![0.0, 1.0], vec![1.0, 0.0]).is_err());
    }

    proptest! {
        #[test]
        fn pruned_fit_matches_brute_force(
            v in prop::collection::vec(-1.0f64..1.0, 2 * 150),
            p in 1.0f64..3.0,
        ) {
            let g = Partition::uniform(0.0, 2.0, 149).unwrap();
            let path = DriverPath::from_flat(g, 2, v).unwrap();
            let fit = control_fit(&path, p).unwrap().constant().unwrap();
            prop_assert_eq!(fit, brute(&path, p));
        }

        #[test]
        fn pruned_area_fit_matches_brute_force(seed in 0u64..500, p in 2.0f64..3.0) {
            use crate::drivers::{brownian_path, ito_area, stratonovich_area, BrownianConfig};
            use std::sync::Arc;
            let cfg = BrownianConfig::new(2, 1.0, 8, seed).with_substeps(4);
            let path = Arc::new(brownian_path(&cfg).unwrap());
            let ito = ito_area(Arc::clone(&path), &cfg).unwrap();
            for a in [stratonovich_area(&ito).unwrap(), ito] {
                let t = path.grid().times();
                let mut c = brute(&path, p);
                for k in 0..path.len() {
                    for m in k + 1..path.len() {
                        let s = a.area(k, m).iter().fold(0.0f64, |x, v| x.max(v.abs()));
                        c = c.max(s.powf(p / 2.0) / (t[m] - t[k]));
                    }
                }
                prop_assert_eq!(control_fit_with_area(&a, p).unwrap().constant().unwrap(), c);
            }
        }

        #[test]
        fn controls_are_superadditive(
            c in 0.0f64..10.0,
            incs in prop::collection::vec(0.0f64..1.0, 8),
            s in 0.0f64..8.0, a in 0.0f64..8.0, b in 0.0f64..8.0,
        ) {
            let mut w = vec![0.0];
            for i in &incs { let l = *w.last().unwrap(); w.push(l + i); }
            let times: Vec<f64> = (0..=8).map(|i| i as f64).collect();
            let mut pts = [s, a, b];
            pts.sort_by(f64::total_cmp);
            let [s, t, u] = pts;
            for om in [ControlModulus::linear(c).unwrap(), ControlModulus::tabulated(times.clone(), w.clone()).unwrap()] {
                prop_assert!(om.omega(s, u) + 1e-12 >= om.omega(s, t) + om.omega(t, u));
                prop_assert_eq!(om.omega(s, s), 0.0);
            }
        }
    }
}

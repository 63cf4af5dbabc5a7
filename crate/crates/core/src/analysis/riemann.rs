//! Recovering areas from left-point Riemann sums of the path.

use serde::Serialize;

use crate::area::AreaProcess;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct RiemannRecovery {
    pub k: usize,
    pub m: usize,
    pub ns: Vec<usize>,
    /// Calibrated sums `Σ x^i(t_l) Δx^j - x^i(s) Δx^j(s,t)`, row-major per `N`.
    pub sums: Vec<Vec<f64>>,
    pub target: Vec<f64>,
    /// `max_{ij} |sum - A^{ij}(s,t)|` per `N`.
    pub errors: Vec<f64>,
}

impl RiemannRecovery {
    /// Error of the Richardson combination `2 S_{2N} - S_N` of the last two
    /// sums, when they are `N` and `2N`.
    pub fn richardson_error(&self) -> Option<f64> {
        let n = self.ns.len();
        if n < 2 || self.ns[n - 1] != 2 * self.ns[n - 2] {
            return None;
        }
        let (a, b) = (&self.sums[n - 2], &self.sums[n - 1]);
        Some(
            a.iter()
                .zip(b)
                .zip(&self.target)
                .map(|((a, b), t)| (2.0 * b - a - t).abs())
                .fold(0.0, f64::max),
        )
    }
}

/// Compares calibrated left-point sums over `N` equal index steps of
/// `[t_k, t_m]` with `A(t_k, t_m)`. Each `N` must divide `m - k`.
pub fn riemann_area_recovery(area: &AreaProcess, k: usize, m: usize, ns: &[usize]) -> Result<RiemannRecovery> {
    if !(k <= m && m <= area.steps()) {
        return Err(Error::InvalidConfig(format!("indices ({k}, {m}) outside the area grid")));
    }
    let path = area.path();
    let d = area.dim();
    let target = area.area(k, m);
    let xs = path.value(k).to_vec();
    let mut sums = Vec::with_capacity(ns.len());
    let mut errors = Vec::with_capacity(ns.len());
    for &n in ns {
        if k == m {
            sums.push(vec![0.0; d * d]);
            errors.push(0.0);
            continue;
        }
        if n == 0 || !(m - k).is_multiple_of(n) {
            return Err(Error::InvalidConfig(format!("N={n} does not divide {} steps", m - k)));
        }
        let stride = (m - k) / n;
        let mut s = vec![0.0; d * d];
        for l in 0..n {
            let (a, b) = (k + l * stride, k + (l + 1) * stride);
            let (xa, xb) = (path.value(a), path.value(b));
            for i in 0..d {
                for j in 0..d {
                    s[i * d + j] += xa[i] * (xb[j] - xa[j]);
                }
            }
        }
        let xm = path.value(m);
        for i in 0..d {
            for j in 0..d {
                s[i * d + j] -= xs[i] * (xm[j] - xs[j]);
            }
        }
        errors.push(s.iter().zip(&target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        sums.push(s);
    }
    Ok(RiemannRecovery { k, m, ns: ns.to_vec(), sums, target, errors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drivers::{analytic_area, brownian_path, ito_area, BrownianConfig, PolynomialPath};
    use crate::partition::Partition;
    use std::sync::Arc;

    #[test]
    fn polynomial_rate_is_first_order() {
        let poly = PolynomialPath::new(vec![vec![0.0, 1.0, 0.5], vec![1.0, -0.3, 0.0, 0.8]]).unwrap();
        let a = analytic_area(&poly, Partition::uniform(0.0, 1.0, 1 << 14).unwrap()).unwrap();
        let ns: Vec<usize> = (4..=14).map(|j| 1 << j).collect();
        let r = riemann_area_recovery(&a, 0, 1 << 14, &ns).unwrap();
        for w in r.errors.windows(2) {
            let q = w[0] / w[1];
            assert!((q - 2.0).abs() < 0.05, "ratio {q}");
        }
        assert!(r.richardson_error().unwrap() < 1e-8);
    }

    #[test]
    fn ito_errors_trend_down() {
        let cfg = BrownianConfig::new(2, 1.0, 10, 42).with_substeps(16);
        let p = Arc::new(brownian_path(&cfg).unwrap());
        let a = ito_area(p, &cfg).unwrap();
        let ns: Vec<usize> = (4..=10).map(|j| 1 << j).collect();
        let r = riemann_area_recovery(&a, 0, 1024, &ns).unwrap();
        let inversions = r.errors.windows(2).filter(|w| w[1] > w[0]).count();
        assert!(inversions <= 2, "{:?}", r.errors);
    }

    #[test]
    fn empty_interval() {
        let cfg = BrownianConfig::new(2, 1.0, 4, 1);
        let a = ito_area(Arc::new(brownian_path(&cfg).unwrap()), &cfg).unwrap();
        let r = riemann_area_recovery(&a, 5, 5, &[1, 2]).unwrap();
        assert_eq!(r.errors, vec![0.0, 0.0]);
        assert!(riemann_area_recovery(&a, 0, 16, &[3]).is_err());
    }
}

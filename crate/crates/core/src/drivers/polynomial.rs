use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::area::{AreaKind, AreaProcess};
use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::path::DriverPath;

/// A path whose components are polynomials in `t`, coefficients in ascending
/// order: `x^i(t) = Σ_k coeffs[i][k] t^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialPath {
    pub coeffs: Vec<Vec<f64>>,
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * t + a)
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, a)| k as f64 * a).collect()
}

fn product(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn antiderivative(c: &[f64]) -> Vec<f64> {
    std::iter::once(0.0)
        .chain(c.iter().enumerate().map(|(k, a)| a / (k + 1) as f64))
        .collect()
}

impl PolynomialPath {
    pub fn new(coeffs: Vec<Vec<f64>>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidConfig("polynomial path needs at least one component".into()));
        }
        if coeffs.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidConfig("polynomial coefficients must be finite".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        self.coeffs.iter().map(|c| horner(c, t)).collect()
    }

    /// `∫_s^t (x^i(u) - x^i(s)) dx^j(u)` in closed form.
    pub fn area_entry(&self, i: usize, j: usize, s: f64, t: f64) -> f64 {
        if s == t {
            return 0.0;
        }
        let mut shifted = self.coeffs[i].clone();
        if shifted.is_empty() {
            shifted.push(0.0);
        }
        shifted[0] -= horner(&self.coeffs[i], s);
        let q = antiderivative(&product(&shifted, &derivative(&self.coeffs[j])));
        horner(&q, t) - horner(&q, s)
    }

    pub fn area(&self, s: f64, t: f64) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                out[i * d + j] = self.area_entry(i, j, s, t);
            }
        }
        out
    }

    /// Samples the path on `grid`; tagged as Lipschitz (`α = 1`, `p = 1`).
    pub fn sample(&self, grid: Partition) -> Result<DriverPath> {
        DriverPath::from_fn(grid, self.dim(), |t| self.eval(t))?.with_regularity(1.0, 1.0)
    }
}

/// Samples `poly` on `grid` and attaches closed-form fine-interval areas.
pub fn analytic_area(poly: &PolynomialPath, grid: Partition) -> Result<AreaProcess> {
    let path = Arc::new(poly.sample(grid)?);
    let d = poly.dim();
    let mut fine = Vec::with_capacity((path.len() - 1) * d * d);
    for k in 0..path.len() - 1 {
        fine.extend(poly.area(path.time(k), path.time(k + 1)));
    }
    AreaProcess::from_fine(path, AreaKind::Analytic, fine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn riemann(poly: &PolynomialPath, i: usize, j: usize, s: f64, t: f64, n: usize) -> f64 {
        let h = (t - s) / n as f64;
        let xs = poly.eval(s)[i];
        (0..n)
            .map(|k| {
                let (a, b) = (s + h * k as f64, s + h * (k + 1) as f64);
                (poly.eval(a)[i] - xs) * (poly.eval(b)[j] - poly.eval(a)[j])
            })
            .sum()
    }

    #[test]
    fn closed_forms() {
        let p = PolynomialPath::new(vec![vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
        for t in [0.3, 1.0, 2.5] {
            assert!((p.area_entry(0, 1, 0.0, t) - t * t / 2.0).abs() < 1e-15);
        }
        let q = PolynomialPath::new(vec![vec![0.0, 1.0], vec![0.0, 0.0, 1.0]]).unwrap();
        assert!((q.area_entry(0, 1, 0.0, 1.0) - 2.0 / 3.0).abs() < 1e-15);
        // left-point Riemann cross-check, error O(1/N)
        assert!((riemann(&q, 0, 1, 0.0, 1.0, 1_000_000) - 2.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn half_intervals_combine() {
        let q = PolynomialPath::new(vec![vec![0.0, 1.0], vec![0.0, 0.0, 1.0]]).unwrap();
        let a = analytic_area(&q, Partition::new(vec![0.0, 0.5, 1.0]).unwrap()).unwrap();
        let full = q.area(0.0, 1.0);
        for (x, y) in a.area(0, 2).iter().zip(&full) {
            assert!((x - y).abs() <= 1e-12);
        }
    }

    proptest! {
        #[test]
        fn empty_interval_has_zero_area(s in -3.0f64..3.0) {
            let q = PolynomialPath::new(vec![vec![1.0, -2.0, 0.5], vec![0.0, 3.0, 0.0, 1.0]]).unwrap();
            prop_assert_eq!(q.area(s, s), vec![0.0; 4]);
        }

        #[test]
        fn symmetric_part_is_half_product(s in -1.0f64..1.0, len in 0.01f64..1.0) {
            let q = PolynomialPath::new(vec![vec![1.0, -2.0, 0.5], vec![0.0, 3.0, 0.0, 1.0]]).unwrap();
            let t = s + len;
            let a = q.area(s, t);
            let dx: Vec<f64> = q.eval(t).iter().zip(q.eval(s)).map(|(a, b)| a - b).collect();
            prop_assert!((a[1] + a[2] - dx[0] * dx[1]).abs() < 1e-12);
            prop_assert!((a[0] - 0.5 * dx[0] * dx[0]).abs() < 1e-12);
        }
    }
}

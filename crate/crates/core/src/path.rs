use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::partition::Partition;

/// A sampled continuous path `x: [0, T] -> R^d`.
///
/// Values are stored row-major, one row per grid point. Off-grid evaluation is
/// piecewise linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriverPath {
    dim: usize,
    grid: Partition,
    values: Vec<f64>,
    holder_alpha: f64,
    p: f64,
}

impl DriverPath {
    /// Regularity metadata defaults to `alpha = 1/2`, `p = 2`; override with
    /// [`DriverPath::with_regularity`].
    pub fn new(grid: Partition, values: Vec<Vec<f64>>) -> Result<Self> {
        check_dim("path values vs grid points", grid.len(), values.len())?;
        let dim = values[0].len();
        if dim == 0 {
            return Err(Error::InvalidConfig("path dimension must be >= 1".into()));
        }
        let mut flat = Vec::with_capacity(dim * values.len());
        for v in &values {
            check_dim("path value", dim, v.len())?;
            flat.extend_from_slice(v);
        }
        Self::from_flat(grid, dim, flat)
    }

    pub fn from_flat(grid: Partition, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("path dimension must be >= 1".into()));
        }
        check_dim("flat path values", grid.len() * dim, values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("path contains non-finite values".into()));
        }
        Ok(Self {
            dim,
            grid,
            values,
            holder_alpha: 0.5,
            p: 2.0,
        })
    }

    pub fn from_fn(grid: Partition, dim: usize, f: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len() * dim);
        for &t in grid.times() {
            let v = f(t);
            check_dim("path function output", dim, v.len())?;
            values.extend(v);
        }
        Self::from_flat(grid, dim, values)
    }

    pub fn with_regularity(mut self, holder_alpha: f64, p: f64) -> Result<Self> {
        if !(holder_alpha > 0.0 && holder_alpha <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "Hölder exponent {holder_alpha} outside (0, 1]"
            )));
        }
        if !(p >= 1.0) {
            return Err(Error::InvalidConfig(format!("p-variation exponent {p} < 1")));
        }
        self.holder_alpha = holder_alpha;
        self.p = p;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid(&self) -> &Partition {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn holder_alpha(&self) -> f64 {
        self.holder_alpha
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn time(&self, k: usize) -> f64 {
        self.grid.times()[k]
    }

    /// `x(t_m) - x(t_k)`.
    pub fn increment(&self, k: usize, m: usize) -> Vec<f64> {
        let (a, b) = (self.value(k), self.value(m));
        b.iter().zip(a).map(|(b, a)| b - a).collect()
    }

    /// Componentwise sup norm of `x(t_m) - x(t_k)`.
    pub fn increment_sup(&self, k: usize, m: usize) -> f64 {
        let (a, b) = (self.value(k), self.value(m));
        b.iter().zip(a).map(|(b, a)| (b - a).abs()).fold(0.0, f64::max)
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        if let Some(k) = self.grid.index_of(t) {
            return self.value(k).to_vec();
        }
        let k = self.grid.interval_of(t);
        let (t0, t1) = (self.time(k), self.time(k + 1));
        let w = (t - t0) / (t1 - t0);
        let (a, b) = (self.value(k), self.value(k + 1));
        a.iter().zip(b).map(|(a, b)| a + w * (b - a)).collect()
    }

    /// Grid indices of every point of `part`.
    pub fn indices_of(&self, part: &Partition) -> Result<Vec<usize>> {
        part.times()
            .iter()
            .map(|&t| self.grid.index_of(t).ok_or(Error::OffGrid(t)))
            .collect()
    }

    /// Keeps grid points `idx` (increasing) and the corresponding values.
    pub fn subsample(&self, idx: &[usize]) -> Result<Self> {
        let grid = Partition::new(idx.iter().map(|&k| self.time(k)).collect())?;
        let values = idx.iter().flat_map(|&k| self.value(k).to_vec()).collect();
        let mut out = Self::from_flat(grid, self.dim, values)?;
        out.holder_alpha = self.holder_alpha;
        out.p = self.p;
        Ok(out)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    pub fn is_constant(&self) -> bool {
        let x0 = self.value(0);
        (1..self.len()).all(|k| self.value(k) == x0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> DriverPath {
        let g = Partition::uniform(0.0, 1.0, 4).unwrap();
        DriverPath::from_fn(g, 2, |t| vec![t, 2.0 * t]).unwrap()
    }

    #[test]
    fn eval_is_piecewise_linear() {
        let g = Partition::new(vec![0.0, 1.0, 3.0]).unwrap();
        let x = DriverPath::new(g, vec![vec![0.0], vec![2.0], vec![0.0]]).unwrap();
        assert_eq!(x.eval(0.5), vec![1.0]);
        assert_eq!(x.eval(2.0), vec![1.0]);
        assert_eq!(x.eval(3.0), vec![0.0]);
    }

    #[test]
    fn increments_and_indices() {
        let x = line();
        assert_eq!(x.increment(1, 3), vec![0.5, 1.0]);
        assert_eq!(x.increment_sup(1, 3), 1.0);
        let part = Partition::new(vec![0.0, 0.5, 1.0]).unwrap();
        assert_eq!(x.indices_of(&part).unwrap(), vec![0, 2, 4]);
        let off = Partition::new(vec![0.0, 0.3, 1.0]).unwrap();
        assert!(matches!(x.indices_of(&off), Err(Error::OffGrid(_))));
    }

    #[test]
    fn validation() {
        let g = Partition::uniform(0.0, 1.0, 2).unwrap();
        assert!(DriverPath::new(g.clone(), vec![vec![0.0]; 2]).is_err());
        assert!(DriverPath::new(g.clone(), vec![vec![0.0], vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(DriverPath::new(g.clone(), vec![vec![0.0], vec![f64::NAN], vec![1.0]]).is_err());
        let x = DriverPath::new(g, vec![vec![0.0]; 3]).unwrap();
        assert!(x.is_constant());
        assert!(x.clone().with_regularity(1.5, 2.0).is_err());
        assert!(x.with_regularity(0.4, 2.5).is_ok());
    }
}

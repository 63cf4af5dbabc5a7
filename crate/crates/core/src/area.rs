use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::path::DriverPath;

/// How the second-level data was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AreaKind {
    Ito,
    Stratonovich,
    Degenerate,
    Analytic,
    Perturbed,
}

impl fmt::Display for AreaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AreaKind::Ito => "ito",
            AreaKind::Stratonovich => "stratonovich",
            AreaKind::Degenerate => "degenerate",
            AreaKind::Analytic => "analytic",
            AreaKind::Perturbed => "perturbed",
        };
        f.write_str(s)
    }
}

/// `A(s,u) = A(s,t) + A(t,u) + dx(s,t) ⊗ dx(t,u)`, matrices row-major `d × d`.
pub fn chen_combine(a_st: &[f64], a_tu: &[f64], dx_st: &[f64], dx_tu: &[f64]) -> Result<Vec<f64>> {
    let d = dx_st.len();
    check_dim("increment dx_tu", d, dx_tu.len())?;
    check_dim("area a_st", d * d, a_st.len())?;
    check_dim("area a_tu", d * d, a_tu.len())?;
    let mut out = vec![0.0; d * d];
    for r in 0..d {
        for j in 0..d {
            let e = r * d + j;
            out[e] = a_st[e] + a_tu[e] + dx_st[r] * dx_tu[j];
        }
    }
    Ok(out)
}

/// Area data `A^{rj}(t_k, t_m)` for grid pairs of a driver.
///
/// Only the finest-interval areas are stored. Coarse pairs are Chen
/// combinations of fine ones, evaluated through running totals
/// `A(t_0, t_k)`, so the consistency relation holds by construction. An
/// optional drift `M` adds `M (t_m - t_k)` to every pair; this keeps Chen
/// consistency and makes the Itô/Stratonovich shift exactly reversible.
#[derive(Debug, Clone)]
pub struct AreaProcess {
    dim: usize,
    kind: AreaKind,
    path: Arc<DriverPath>,
    fine: Arc<Vec<f64>>,
    cum: Arc<Vec<f64>>,
    drift: Option<Vec<f64>>,
}

impl AreaProcess {
    /// `fine` holds one `d × d` block per grid interval.
    pub fn from_fine(path: Arc<DriverPath>, kind: AreaKind, fine: Vec<f64>) -> Result<Self> {
        let d = path.dim();
        let steps = path.len() - 1;
        check_dim("fine area entries", steps * d * d, fine.len())?;
        if fine.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidConfig("area contains non-finite values".into()));
        }
        let dd = d * d;
        let mut cum = vec![0.0; (steps + 1) * dd];
        for k in 0..steps {
            let x0 = path.value(0);
            let xk = path.value(k);
            let dx = path.increment(k, k + 1);
            for r in 0..d {
                for j in 0..d {
                    let e = r * d + j;
                    cum[(k + 1) * dd + e] =
                        cum[k * dd + e] + fine[k * dd + e] + (xk[r] - x0[r]) * dx[j];
                }
            }
        }
        Ok(Self {
            dim: d,
            kind,
            path,
            fine: Arc::new(fine),
            cum: Arc::new(cum),
            drift: None,
        })
    }

    pub fn zero(path: Arc<DriverPath>, kind: AreaKind) -> Self {
        let n = (path.len() - 1) * path.dim() * path.dim();
        Self::from_fine(path, kind, vec![0.0; n]).expect("zero area is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> AreaKind {
        self.kind
    }

    pub fn path(&self) -> &DriverPath {
        &self.path
    }

    pub fn shared_path(&self) -> Arc<DriverPath> {
        Arc::clone(&self.path)
    }

    pub fn drift(&self) -> Option<&[f64]> {
        self.drift.as_deref()
    }

    /// Number of fine intervals.
    pub fn steps(&self) -> usize {
        self.path.len() - 1
    }

    /// Stored fine block for interval `k`, without drift.
    pub fn fine_raw(&self, k: usize) -> &[f64] {
        let dd = self.dim * self.dim;
        &self.fine[k * dd..(k + 1) * dd]
    }

    /// Prefix sum `A(t_0, t_m)` without drift, entry `e = r*d + j`.
    pub(crate) fn cum_entry(&self, m: usize, e: usize) -> f64 {
        self.cum[m * self.dim * self.dim + e]
    }

    /// Single entry `A^{rj}(t_k, t_m)`, `k <= m`.
    pub fn entry(&self, k: usize, m: usize, r: usize, j: usize) -> f64 {
        debug_assert!(k <= m);
        let d = self.dim;
        let e = r * d + j;
        let base = if k == m {
            return 0.0;
        } else if m == k + 1 {
            self.fine[k * d * d + e]
        } else {
            let x0 = self.path.value(0);
            let xk = self.path.value(k);
            let xm = self.path.value(m);
            self.cum[m * d * d + e] - self.cum[k * d * d + e] - (xk[r] - x0[r]) * (xm[j] - xk[j])
        };
        match &self.drift {
            Some(mu) => base + mu[e] * (self.path.time(m) - self.path.time(k)),
            None => base,
        }
    }

    /// `A(t_k, t_m)` as a row-major `d × d` matrix, `k <= m`.
    pub fn area(&self, k: usize, m: usize) -> Vec<f64> {
        assert!(k <= m && m < self.path.len(), "invalid area pair ({k}, {m})");
        let d = self.dim;
        let mut out = vec![0.0; d * d];
        for r in 0..d {
            for j in 0..d {
                out[r * d + j] = self.entry(k, m, r, j);
            }
        }
        out
    }

    /// `A(t_k, t_m)` as an explicit left fold of [`chen_combine`] over fine
    /// intervals. Slow; used to cross-check [`AreaProcess::area`].
    pub fn fold(&self, k: usize, m: usize) -> Vec<f64> {
        let d = self.dim;
        let mut acc = vec![0.0; d * d];
        for l in k..m {
            let fine = self.area(l, l + 1);
            acc = chen_combine(&acc, &fine, &self.path.increment(k, l), &self.path.increment(l, l + 1))
                .expect("dimensions agree");
        }
        acc
    }

    /// Adds `drift (t - s)` to every pair and retags.
    pub fn with_drift(&self, kind: AreaKind, drift: Vec<f64>) -> Result<Self> {
        check_dim("area drift", self.dim * self.dim, drift.len())?;
        let mut out = self.clone();
        out.kind = kind;
        out.drift = Some(match &self.drift {
            Some(old) => old.iter().zip(&drift).map(|(a, b)| a + b).collect(),
            None => drift,
        });
        Ok(out)
    }

    /// Drops any drift and retags.
    pub fn without_drift(&self, kind: AreaKind) -> Self {
        let mut out = self.clone();
        out.kind = kind;
        out.drift = None;
        out
    }

    /// Area of the path `c x`: every entry scales by `c^2`.
    pub fn scaled(&self, c: f64) -> Self {
        let path = Arc::new(self.path.scaled(c));
        let fine = self.fine.iter().map(|a| a * c * c).collect();
        let mut out = Self::from_fine(path, self.kind, fine).expect("scaling keeps dimensions");
        out.drift = self.drift.as_ref().map(|m| m.iter().map(|a| a * c * c).collect());
        out
    }

    /// Fine blocks including drift, one per interval.
    pub fn fine_blocks(&self) -> Vec<Vec<f64>> {
        (0..self.steps()).map(|k| self.area(k, k + 1)).collect()
    }
}

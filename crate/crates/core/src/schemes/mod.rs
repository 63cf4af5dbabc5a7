//! Fixed-partition integrators for `dy = f(y) dx`.
//!
//! All solvers require partition points to be grid points of the driver, and
//! read `Δx` and `A(t_k, t_{k+1})` from the driver grid directly.

mod augmented;
mod defect;
mod extended;
mod solve;

pub use augmented::{augmented_solve, JacobianTrajectory};
pub use defect::{defect, defect_with_control, pairs_within};
pub use extended::{extended_solve, ExtendedSolution};
pub use solve::{corrected_solve, euler_solve, solve};

use serde::{Deserialize, Serialize};

use crate::area::AreaProcess;
use crate::error::{check_dim, Error, Result};
use crate::field::VectorField;
use crate::partition::Partition;
use crate::path::DriverPath;
use crate::trajectory::{euclid_norm, SchemeKind};
use crate::EXPLOSION_THRESHOLD;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub scheme: SchemeKind,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Exponents used by defect reports.
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_p")]
    pub p: f64,
}

fn default_threshold() -> f64 {
    EXPLOSION_THRESHOLD
}

fn default_gamma() -> f64 {
    3.0
}

fn default_p() -> f64 {
    2.5
}

impl SchemeConfig {
    pub fn new(scheme: SchemeKind) -> Self {
        Self {
            scheme,
            threshold: EXPLOSION_THRESHOLD,
            gamma: default_gamma(),
            p: default_p(),
        }
    }

    pub fn euler() -> Self {
        Self::new(SchemeKind::Euler)
    }

    pub fn corrected() -> Self {
        Self::new(SchemeKind::Corrected)
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn with_exponents(mut self, gamma: f64, p: f64) -> Self {
        self.gamma = gamma;
        self.p = p;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0) {
            return Err(Error::InvalidConfig(format!("threshold={} must be positive", self.threshold)));
        }
        if !matches!(self.scheme, SchemeKind::Euler | SchemeKind::Corrected) {
            return Err(Error::InvalidConfig(format!("scheme {:?} is not a base scheme", self.scheme)));
        }
        if !(self.gamma > 0.0 && self.p >= 1.0) {
            return Err(Error::InvalidConfig(format!("gamma={}, p={} out of range", self.gamma, self.p)));
        }
        Ok(())
    }
}

/// Driver data resolved against a partition: grid indices and per-step
/// increments and areas.
pub(crate) struct Steps<'a> {
    pub path: &'a DriverPath,
    pub area: Option<&'a AreaProcess>,
    pub idx: Vec<usize>,
}

impl<'a> Steps<'a> {
    pub fn new(
        f: &VectorField,
        path: &'a DriverPath,
        area: Option<&'a AreaProcess>,
        part: &Partition,
        y0: &[f64],
    ) -> Result<Self> {
        check_dim("driver dimension", f.d(), path.dim())?;
        check_dim("initial state", f.n(), y0.len())?;
        if let Some(a) = area {
            check_dim("area dimension", path.dim(), a.dim())?;
            if a.path().grid() != path.grid() {
                return Err(Error::InvalidConfig("area is not built on the driver's grid".into()));
            }
        }
        let idx = path.indices_of(part)?;
        Ok(Self { path, area, idx })
    }

    pub fn len(&self) -> usize {
        self.idx.len() - 1
    }

    pub fn dx(&self, k: usize) -> Vec<f64> {
        self.path.increment(self.idx[k], self.idx[k + 1])
    }

    pub fn area(&self, k: usize) -> Vec<f64> {
        match self.area {
            Some(a) => a.area(self.idx[k], self.idx[k + 1]),
            None => vec![0.0; self.path.dim() * self.path.dim()],
        }
    }
}

/// One scheme step: `y + f Δx`, then `+ g A` when `g` is given. Every solver
/// and the defect functionals share this so adjacent defects vanish exactly.
pub(crate) fn step(y: &[f64], fv: &[f64], dx: &[f64], ga: Option<(&[f64], &[f64])>) -> Vec<f64> {
    let (n, d) = (y.len(), dx.len());
    let mut next = y.to_vec();
    for i in 0..n {
        for j in 0..d {
            next[i] += fv[i * d + j] * dx[j];
        }
    }
    if let Some((g, a)) = ga {
        for i in 0..n {
            for r in 0..d {
                for j in 0..d {
                    next[i] += g[(i * d + r) * d + j] * a[r * d + j];
                }
            }
        }
    }
    next
}

/// Outcome of checking a freshly computed state.
pub(crate) enum Guard {
    Continue,
    Exploded,
}

pub(crate) fn guard(y: &[f64], step: usize, threshold: f64) -> Result<Guard> {
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { step });
    }
    Ok(if euclid_norm(y) > threshold { Guard::Exploded } else { Guard::Continue })
}

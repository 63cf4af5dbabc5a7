use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::partition::Partition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Euler,
    Corrected,
    Extended,
    Augmented,
    /// Known solution built together with its driver, not a numerical solve.
    Constructed,
}

/// Discrete solution `y_k` on a partition.
///
/// When the run exploded, `states` stops at the first state whose norm
/// exceeded the threshold, so `states.len() == exploded_at + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    partition: Partition,
    n: usize,
    states: Vec<f64>,
    exploded_at: Option<usize>,
    scheme: SchemeKind,
}

impl Trajectory {
    pub fn new(
        partition: Partition,
        n: usize,
        states: Vec<f64>,
        exploded_at: Option<usize>,
        scheme: SchemeKind,
    ) -> Result<Self> {
        if n == 0 || !states.len().is_multiple_of(n) {
            return Err(Error::InvalidConfig("state block length not a multiple of n".into()));
        }
        let count = states.len() / n;
        match exploded_at {
            None => check_dim("trajectory states", partition.len(), count)?,
            Some(k) => check_dim("truncated trajectory states", k + 1, count)?,
        }
        Ok(Self {
            partition,
            n,
            states,
            exploded_at,
            scheme,
        })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.states.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.n..(k + 1) * self.n]
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn last(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn exploded_at(&self) -> Option<usize> {
        self.exploded_at
    }

    pub fn scheme(&self) -> SchemeKind {
        self.scheme
    }

    pub fn time(&self, k: usize) -> f64 {
        self.partition.times()[k]
    }

    /// CSV with header `t,y_1,...,y_n`. Numbers use the shortest round-trip
    /// representation.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t");
        for i in 1..=self.n {
            write!(s, ",y_{i}").unwrap();
        }
        s.push('\n');
        for k in 0..self.len() {
            write!(s, "{}", self.time(k)).unwrap();
            for v in self.state(k) {
                write!(s, ",{v}").unwrap();
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DefectKind {
    /// `I_kl = y_l - y_k - f(y_k) Δx`
    I,
    /// `J_kl = I_kl - g(y_k) A_kl`
    J,
}

/// Per-pair defects and the fitted constant `M = sup |defect|_∞ / ω^{γ/p}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub kind: DefectKind,
    pub gamma: f64,
    pub p: f64,
    pub control_constant: Option<f64>,
    pub intervals: Vec<(usize, usize)>,
    pub defect: Vec<Vec<f64>>,
    pub omega_pow: Vec<f64>,
    pub fitted_m: f64,
}

impl DefectReport {
    /// Builds the report; `M` ignores pairs where both defect and `ω` vanish
    /// and is `+∞` if a nonzero defect meets a zero control.
    pub fn new(
        kind: DefectKind,
        gamma: f64,
        p: f64,
        control_constant: Option<f64>,
        intervals: Vec<(usize, usize)>,
        defect: Vec<Vec<f64>>,
        omega_pow: Vec<f64>,
    ) -> Self {
        let mut m: f64 = 0.0;
        for (dv, &w) in defect.iter().zip(&omega_pow) {
            let a = sup_norm(dv);
            if a == 0.0 {
                continue;
            }
            m = m.max(if w > 0.0 { a / w } else { f64::INFINITY });
        }
        Self {
            kind,
            gamma,
            p,
            control_constant,
            intervals,
            defect,
            omega_pow,
            fitted_m: m,
        }
    }

    pub fn max_defect(&self) -> f64 {
        self.defect.iter().map(|d| sup_norm(d)).fold(0.0, f64::max)
    }
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

pub fn euclid_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

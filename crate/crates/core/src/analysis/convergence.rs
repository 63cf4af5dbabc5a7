//! Mesh-refinement studies with a log-log rate fit.

use serde::Serialize;

use crate::area::AreaProcess;
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::path::DriverPath;
use crate::schemes::{corrected_solve, solve, SchemeConfig};
use crate::trajectory::euclid_norm;

/// Coarsest meshes left out of the fit as pre-asymptotic.
pub const DROPPED_COARSE: usize = 2;

/// Reference for terminal errors.
#[derive(Debug, Clone)]
pub enum Oracle {
    /// Known terminal value.
    Terminal { value: Vec<f64>, description: String },
    /// Corrected scheme on a mesh `factor` times finer than the finest `K`.
    FineCorrected { factor: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    pub ks: Vec<usize>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `log2 e` on `log2 K`; `None` when fewer than
    /// two usable points remain.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub oracle: String,
    /// Every error is below `1e-12` times the oracle scale.
    pub exact: bool,
    pub dropped: usize,
    pub notes: Vec<String>,
}

/// Least squares of `log2 e` on `log2 K` over `ks[drop..]`, skipping zero
/// errors. Returns `(slope, intercept, skipped)`.
pub fn fit_rate(ks: &[usize], errors: &[f64], drop: usize) -> (Option<(f64, f64)>, Vec<usize>) {
    let mut skipped = Vec::new();
    let pts: Vec<(f64, f64)> = ks
        .iter()
        .zip(errors)
        .skip(drop)
        .filter_map(|(&k, &e)| {
            if e > 0.0 {
                Some(((k as f64).log2(), e.log2()))
            } else {
                skipped.push(k);
                None
            }
        })
        .collect();
    if pts.len() < 2 {
        return (None, skipped);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    (Some((slope, my - slope * mx)), skipped)
}

/// Runs `cfg.scheme` on uniform coarsenings of the driver grid with `K`
/// steps each and fits the terminal-error rate.
pub fn convergence_study(
    f: &VectorField,
    path: &DriverPath,
    area: Option<&AreaProcess>,
    y0: &[f64],
    cfg: &SchemeConfig,
    ks: &[usize],
    oracle: &Oracle,
) -> Result<RateReport> {
    if ks.len() < DROPPED_COARSE + 2 || ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(format!(
            "need at least {} strictly increasing mesh sizes",
            DROPPED_COARSE + 2
        )));
    }
    let steps = path.len() - 1;
    let mesh = |k: usize| {
        if k == 0 || !steps.is_multiple_of(k) {
            Err(Error::InvalidConfig(format!("K={k} does not divide the {steps} driver steps")))
        } else {
            path.grid().coarsen(steps / k)
        }
    };
    let (reference, desc) = match oracle {
        Oracle::Terminal { value, description } => (value.clone(), description.clone()),
        Oracle::FineCorrected { factor } => {
            let a = area.ok_or_else(|| Error::InvalidConfig("fine corrected oracle needs an area".into()))?;
            let kf = ks[ks.len() - 1] * factor;
            let t = corrected_solve(f, path, a, &mesh(kf)?, y0, &SchemeConfig::corrected())?;
            if t.exploded_at().is_some() {
                return Err(Error::Rejected("oracle run exploded".into()));
            }
            (t.last().to_vec(), format!("corrected scheme at K={kf}"))
        }
    };
    let errors = ks
        .iter()
        .map(|&k| {
            let t = solve(f, path, area, &mesh(k)?, y0, cfg)?;
            if let Some(e) = t.exploded_at() {
                return Err(Error::Rejected(format!("K={k}: trajectory exploded at step {e}")));
            }
            let diff: Vec<f64> = t.last().iter().zip(&reference).map(|(a, b)| a - b).collect();
            Ok(euclid_norm(&diff))
        })
        .collect::<Result<Vec<f64>>>()?;
    let scale = euclid_norm(&reference).max(1.0);
    let exact = errors.iter().all(|&e| e <= 1e-12 * scale);
    let mut notes = Vec::new();
    let (fit, skipped) = if exact { (None, Vec::new()) } else { fit_rate(ks, &errors, DROPPED_COARSE) };
    if exact {
        notes.push("scheme exact at every K; no rate fitted".into());
    }
    if !skipped.is_empty() {
        notes.push(format!("zero errors excluded from the fit at K={skipped:?}"));
    }
    Ok(RateReport {
        ks: ks.to_vec(),
        errors,
        slope: fit.map(|f| f.0),
        intercept: fit.map(|f| f.1),
        oracle: desc,
        exact,
        dropped: DROPPED_COARSE,
        notes,
    })
}

/// `y0 exp(σ W(T) - σ²T/2)`, the Itô solution of `dy = σ y dW`.
pub fn gbm_ito_oracle(path: &DriverPath, y0: f64, sigma: f64) -> Oracle {
    let n = path.len() - 1;
    let w = path.value(n)[0] - path.value(0)[0];
    let t = path.time(n) - path.time(0);
    Oracle::Terminal {
        value: vec![y0 * (sigma * w - 0.5 * sigma * sigma * t).exp()],
        description: "exact Ito solution y0 exp(sigma W - sigma^2 T/2)".into(),
    }
}

/// `y0 exp(σ W(T))`, the Stratonovich solution.
pub fn gbm_stratonovich_oracle(path: &DriverPath, y0: f64, sigma: f64) -> Oracle {
    let n = path.len() - 1;
    let w = path.value(n)[0] - path.value(0)[0];
    Oracle::Terminal {
        value: vec![y0 * (sigma * w).exp()],
        description: "exact Stratonovich solution y0 exp(sigma W)".into(),
    }
}

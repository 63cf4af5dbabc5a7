//! Two solutions of the same equation from the same initial point.

use std::sync::Arc;

use serde::Serialize;

use crate::control::control_fit;
use crate::drivers::counterexample::{counterexample_field, counterexample_path, CounterexampleConfig};
use crate::drivers::degenerate_area;
use crate::error::{Error, Result};
use crate::schemes::{defect_with_control, pairs_within};
use crate::trajectory::{DefectReport, SchemeKind, Trajectory};

/// Index gap of the pairs entering the defect fits.
pub const DEFECT_WINDOW: usize = 4;

#[derive(Debug, Clone, Serialize)]
pub struct NonuniquenessReport {
    #[serde(skip)]
    pub traj_a: Trajectory,
    #[serde(skip)]
    pub traj_b: Trajectory,
    pub defect_a: DefectReport,
    pub defect_b: DefectReport,
    /// `|y^1_b(t_max) - y^1_a(t_max)|`.
    pub separation: f64,
    /// `max(M_a, M_b) ω(0, t_max)^{γ/p}`.
    pub defect_scale: f64,
    /// `min_t |y^1_b(t)| / (3 t^β)` over positive grid times; at least 1.
    pub min_ratio: f64,
    pub control_constant: Option<f64>,
}

/// Builds `y_a = (0, x^2)` and `y_b = (c ∫ (x^2)^γ dx^1, x^2)` on the
/// counterexample grid and fits `I`-defects (`J`-defects with the degenerate
/// area when `γ > 2`) over index gaps up to [`DEFECT_WINDOW`], against a
/// control fitted on the driver at exponent `p`.
pub fn nonuniqueness_demo(cfg: &CounterexampleConfig) -> Result<NonuniquenessReport> {
    let path = counterexample_path(cfg)?;
    let f = counterexample_field(cfg)?;
    let grid = path.grid().clone();
    let integral = cfg.integral_on(&grid)?;
    let c = cfg.solution_factor();
    let mut min_ratio = f64::INFINITY;
    for (k, &t) in grid.times().iter().enumerate().skip(1) {
        let r = (c * integral[k]).abs() / (3.0 * t.powf(cfg.beta_exp));
        if r < 1.0 {
            return Err(Error::Rejected(format!(
                "|y^1| >= 3 t^beta fails at t={t} (ratio {r:.4})"
            )));
        }
        min_ratio = min_ratio.min(r);
    }
    let n = grid.len();
    let mut a = Vec::with_capacity(2 * n);
    let mut b = Vec::with_capacity(2 * n);
    for k in 0..n {
        let x2 = path.value(k)[1];
        a.extend_from_slice(&[0.0, x2]);
        b.extend_from_slice(&[c * integral[k], x2]);
    }
    let kind = if cfg.second_order() { SchemeKind::Corrected } else { SchemeKind::Euler };
    let traj_a = Trajectory::new(grid.clone(), 2, a, None, kind)?;
    let traj_b = Trajectory::new(grid, 2, b, None, kind)?;
    let omega = control_fit(&path, cfg.p)?;
    let pairs = pairs_within(n, DEFECT_WINDOW);
    let shared = Arc::new(path);
    let area = if cfg.second_order() { Some(degenerate_area(Arc::clone(&shared))?) } else { None };
    let fit = |t: &Trajectory| defect_with_control(t, &f, &shared, area.as_ref(), &pairs, cfg.gamma, cfg.p, &omega);
    let (defect_a, defect_b) = (fit(&traj_a)?, fit(&traj_b)?);
    let t_end = *shared.grid().times().last().unwrap();
    let w = omega.omega(0.0, t_end).powf(cfg.gamma / cfg.p);
    let defect_scale = defect_a.fitted_m.max(defect_b.fitted_m) * w;
    let separation = (traj_b.last()[0] - traj_a.last()[0]).abs();
    Ok(NonuniquenessReport {
        traj_a,
        traj_b,
        defect_a,
        defect_b,
        separation,
        defect_scale,
        min_ratio,
        control_constant: omega.constant(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example1_separates() {
        let r = nonuniqueness_demo(&CounterexampleConfig::example1()).unwrap();
        assert!(r.traj_a.states().chunks(2).all(|s| s[0] == 0.0));
        assert!(r.defect_a.fitted_m.is_finite() && r.defect_b.fitted_m.is_finite());
        assert!(r.separation > 10.0 * r.defect_scale, "{} vs {}", r.separation, r.defect_scale);
        assert!(r.min_ratio >= 1.0);
    }

    #[test]
    fn example2_j_defects_finite() {
        let r = nonuniqueness_demo(&CounterexampleConfig::example2()).unwrap();
        assert_eq!(r.defect_b.kind, crate::trajectory::DefectKind::J);
        assert!(r.defect_a.fitted_m.is_finite() && r.defect_b.fitted_m.is_finite());
        assert!(r.separation > 0.0);
    }

    #[test]
    fn inequality_violation_rejected() {
        let mut cfg = CounterexampleConfig::example1();
        cfg.t_max = 0.9;
        assert!(matches!(nonuniqueness_demo(&cfg), Err(Error::Rejected(_))));
    }
}

use crate::area::AreaProcess;
use crate::control::{control_fit, control_fit_with_area, ControlModulus};
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::path::DriverPath;
use crate::trajectory::{DefectKind, DefectReport, Trajectory};

use super::step;

/// All `(k, l)` with `1 <= l - k <= max_gap` and `l < len`.
pub fn pairs_within(len: usize, max_gap: usize) -> Vec<(usize, usize)> {
    (0..len)
        .flat_map(|k| (k + 1..len.min(k + max_gap + 1)).map(move |l| (k, l)))
        .collect()
}

/// `I_kl` (no area) or `J_kl` (with area) over `pairs` of trajectory
/// indices, against a control fitted on the driver at exponent `p`
/// (with the area when one is given).
pub fn defect(
    traj: &Trajectory,
    f: &VectorField,
    path: &DriverPath,
    area: Option<&AreaProcess>,
    pairs: &[(usize, usize)],
    gamma: f64,
    p: f64,
) -> Result<DefectReport> {
    if gamma > 2.0 && area.is_none() {
        return Err(Error::InvalidConfig(format!("gamma={gamma} > 2 needs an area process")));
    }
    let omega = match area {
        Some(a) => control_fit_with_area(a, p)?,
        None => control_fit(path, p)?,
    };
    defect_with_control(traj, f, path, area, pairs, gamma, p, &omega)
}

/// As [`defect`] with a given control.
#[allow(clippy::too_many_arguments)]
pub fn defect_with_control(
    traj: &Trajectory,
    f: &VectorField,
    path: &DriverPath,
    area: Option<&AreaProcess>,
    pairs: &[(usize, usize)],
    gamma: f64,
    p: f64,
    omega: &ControlModulus,
) -> Result<DefectReport> {
    let (n, d) = (f.n(), f.d());
    let idx = path.indices_of(traj.partition())?;
    let mut g = vec![0.0; n * d * d];
    let mut defects = Vec::with_capacity(pairs.len());
    let mut omega_pow = Vec::with_capacity(pairs.len());
    for &(k, l) in pairs {
        if !(k < l && l < traj.len()) {
            return Err(Error::InvalidConfig(format!("pair ({k}, {l}) outside trajectory of {} states", traj.len())));
        }
        let (yk, yl) = (traj.state(k), traj.state(l));
        let fv = f.eval(yk);
        let dx = path.increment(idx[k], idx[l]);
        let pred = match area {
            Some(a) => {
                let df = f.deriv1(yk)?;
                f.correction_from(&fv, &df, &mut g);
                step(yk, &fv, &dx, Some((&g, &a.area(idx[k], idx[l]))))
            }
            None => step(yk, &fv, &dx, None),
        };
        let out: Vec<f64> = yl.iter().zip(&pred).map(|(a, b)| a - b).collect();
        defects.push(out);
        omega_pow.push(omega.omega(traj.time(k), traj.time(l)).powf(gamma / p));
    }
    let kind = if area.is_some() { DefectKind::J } else { DefectKind::I };
    Ok(DefectReport::new(kind, gamma, p, omega.constant(), pairs.to_vec(), defects, omega_pow))
}

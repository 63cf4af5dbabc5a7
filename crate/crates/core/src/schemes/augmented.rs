use crate::area::AreaProcess;
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::partition::Partition;
use crate::path::DriverPath;
use crate::trajectory::{SchemeKind, Trajectory};

use super::{guard, step, Guard, SchemeConfig, Steps};

/// `z_k = ∂y_k / ∂y_0`, one row-major `n × n` matrix per state.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianTrajectory {
    n: usize,
    mats: Vec<f64>,
}

impl JacobianTrajectory {
    pub fn len(&self) -> usize {
        self.mats.len() / (self.n * self.n)
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn matrix(&self, k: usize) -> &[f64] {
        let nn = self.n * self.n;
        &self.mats[k * nn..(k + 1) * nn]
    }

    pub fn last(&self) -> &[f64] {
        self.matrix(self.len() - 1)
    }
}

/// Runs the scheme of `cfg` together with its derivative flow
/// `z_{k+1} = S_k z_k`, `S_k = I + ∂f(y_k) Δx_k [+ ∂g(y_k) A_k]`, `z_0 = I`.
pub fn augmented_solve(
    f: &VectorField,
    path: &DriverPath,
    area: Option<&AreaProcess>,
    part: &Partition,
    y0: &[f64],
    cfg: &SchemeConfig,
) -> Result<(Trajectory, JacobianTrajectory)> {
    cfg.validate()?;
    let corrected = cfg.scheme == SchemeKind::Corrected;
    if corrected && area.is_none() {
        return Err(Error::InvalidConfig("corrected scheme needs an area process".into()));
    }
    if !f.has_deriv1() {
        return Err(Error::MissingCapability("first derivatives"));
    }
    if corrected && !f.has_deriv2() {
        return Err(Error::MissingCapability("second derivatives"));
    }
    let steps = Steps::new(f, path, if corrected { area } else { None }, part, y0)?;
    let (n, d) = (f.n(), f.d());
    let nn = n * n;
    let mut states = y0.to_vec();
    let mut mats = vec![0.0; nn];
    for i in 0..n {
        mats[i * n + i] = 1.0;
    }
    let mut exploded = match guard(y0, 0, cfg.threshold)? {
        Guard::Exploded => Some(0),
        Guard::Continue => None,
    };
    let mut y = y0.to_vec();
    let mut fv = vec![0.0; n * d];
    let mut df = vec![0.0; n * d * n];
    let mut g = vec![0.0; n * d * d];
    let mut k = 0;
    while exploded.is_none() && k < steps.len() {
        f.eval_into(&y, &mut fv);
        f.deriv1_into(&y, &mut df)?;
        let dx = steps.dx(k);
        let mut s = vec![0.0; nn];
        for i in 0..n {
            s[i * n + i] = 1.0;
            for j in 0..d {
                for h in 0..n {
                    s[i * n + h] += df[(i * d + j) * n + h] * dx[j];
                }
            }
        }
        let next = if corrected {
            let a = steps.area(k);
            f.correction_from(&fv, &df, &mut g);
            let dg = f.correction_jacobian(&y)?;
            for i in 0..n {
                for r in 0..d {
                    for j in 0..d {
                        let arj = a[r * d + j];
                        let e = (i * d + r) * d + j;
                        for q in 0..n {
                            s[i * n + q] += dg[e * n + q] * arj;
                        }
                    }
                }
            }
            step(&y, &fv, &dx, Some((&g, &a)))
        } else {
            step(&y, &fv, &dx, None)
        };
        let z = &mats[k * nn..(k + 1) * nn];
        let mut zn = vec![0.0; nn];
        for i in 0..n {
            for c in 0..n {
                zn[i * n + c] = (0..n).map(|h| s[i * n + h] * z[h * n + c]).sum();
            }
        }
        k += 1;
        if let Guard::Exploded = guard(&next, k, cfg.threshold)? {
            exploded = Some(k);
        }
        if zn.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: k });
        }
        states.extend_from_slice(&next);
        mats.extend_from_slice(&zn);
        y = next;
    }
    let part = Partition::new(steps.idx.iter().map(|&i| path.time(i)).collect())?;
    let traj = Trajectory::new(part, n, states, exploded, SchemeKind::Augmented)?;
    Ok((traj, JacobianTrajectory { n, mats }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drivers::{analytic_area, PolynomialPath};
    use crate::schemes::{corrected_solve, euler_solve};

    fn smooth_driver() -> (DriverPath, AreaProcess) {
        let poly = PolynomialPath::new(vec![vec![0.0, 1.0, -0.5, 0.3], vec![0.0, 0.4, 0.8, -0.6]]).unwrap();
        let grid = Partition::uniform(0.0, 1.0, 256).unwrap();
        let area = analytic_area(&poly, grid).unwrap();
        (area.path().clone(), area)
    }

    fn field() -> VectorField {
        VectorField::sine(
            2,
            2,
            vec![1.0, 0.5, -0.7, 0.3],
            vec![1.0, 0.2, -0.4, 0.9, 0.3, 0.3, 1.1, -0.5],
            vec![0.0, 0.4, 1.0, -0.2],
        )
        .unwrap()
    }

    #[test]
    fn zero_field_keeps_identity() {
        let (p, a) = smooth_driver();
        let f = VectorField::zero(2, 2);
        let (_, z) = augmented_solve(&f, &p, Some(&a), p.grid(), &[1.0, 2.0], &SchemeConfig::corrected()).unwrap();
        for k in 0..z.len() {
            assert_eq!(z.matrix(k), &[1.0, 0.0, 0.0, 1.0]);
        }
    }

    #[test]
    fn linear_field_is_matrix_product() {
        // f_j(y) = M_j y: Euler step matrix I + Σ_j M_j Δx^j, independent of y
        let (p, _) = smooth_driver();
        let m = vec![vec![0.3, -1.0, 0.5, 0.2], vec![-0.4, 0.1, 0.7, 0.9]];
        let f = VectorField::linear(2, 2, m.clone(), vec![0.0; 4]).unwrap();
        let part = p.grid().coarsen(16).unwrap();
        let (t, z) = augmented_solve(&f, &p, None, &part, &[1.0, 0.0], &SchemeConfig::euler()).unwrap();
        let idx = p.indices_of(&part).unwrap();
        let mut prod = [1.0, 0.0, 0.0, 1.0];
        for k in 0..idx.len() - 1 {
            let dx = p.increment(idx[k], idx[k + 1]);
            let mut s = [1.0, 0.0, 0.0, 1.0];
            for (j, mj) in m.iter().enumerate() {
                for e in 0..4 {
                    s[e] += mj[e] * dx[j];
                }
            }
            prod = [
                s[0] * prod[0] + s[1] * prod[2],
                s[0] * prod[1] + s[1] * prod[3],
                s[2] * prod[0] + s[3] * prod[2],
                s[2] * prod[1] + s[3] * prod[3],
            ];
            let zk = z.matrix(k + 1);
            for e in 0..4 {
                assert!((zk[e] - prod[e]).abs() < 1e-13);
            }
        }
        // linear flow: y_K = z_K y_0
        assert!((t.last()[0] - z.last()[0]).abs() < 1e-13 && (t.last()[1] - z.last()[2]).abs() < 1e-13);
    }

    fn fd_check(corrected: bool) -> f64 {
        let (p, a) = smooth_driver();
        let f = field();
        let y0 = [0.4, -0.2];
        let cfg = if corrected { SchemeConfig::corrected() } else { SchemeConfig::euler() };
        let run = |y: &[f64]| -> Vec<f64> {
            if corrected {
                corrected_solve(&f, &p, &a, p.grid(), y, &cfg).unwrap().last().to_vec()
            } else {
                euler_solve(&f, &p, p.grid(), y, &cfg).unwrap().last().to_vec()
            }
        };
        let (_, z) = augmented_solve(&f, &p, Some(&a), p.grid(), &y0, &cfg).unwrap();
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for c in 0..2 {
            let (mut up, mut dn) = (y0, y0);
            up[c] += h;
            dn[c] -= h;
            let (yu, yd) = (run(&up), run(&dn));
            for i in 0..2 {
                let fd = (yu[i] - yd[i]) / (2.0 * h);
                let an = z.last()[i * 2 + c];
                worst = worst.max((fd - an).abs() / an.abs().max(1e-3));
            }
        }
        worst
    }

    #[test]
    fn euler_flow_matches_fd() {
        assert!(fd_check(false) <= 1e-4);
    }

    #[test]
    fn corrected_flow_matches_fd() {
        assert!(fd_check(true) <= 1e-4);
    }

    #[test]
    fn capability_errors() {
        let (p, a) = smooth_driver();
        let f = VectorField::new(2, 2, 3.0, |_, _| {}).with_deriv1(|_, _| {});
        assert!(matches!(
            augmented_solve(&f, &p, Some(&a), p.grid(), &[0.0, 0.0], &SchemeConfig::corrected()),
            Err(Error::MissingCapability(_))
        ));
        assert!(augmented_solve(&f, &p, None, p.grid(), &[0.0, 0.0], &SchemeConfig::euler()).is_ok());
    }
}

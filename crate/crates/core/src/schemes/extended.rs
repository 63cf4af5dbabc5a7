use crate::area::AreaProcess;
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::partition::Partition;
use crate::path::DriverPath;
use crate::trajectory::{SchemeKind, Trajectory};

use super::{guard, step, Guard, SchemeConfig, Steps};

/// Corrected solution of the system extended by
/// `B^{il} = ∫ x^i dy^l`, `C^{kc} = ∫ y^k dx^c`, `D^{kl} = ∫ y^k dy^l`,
/// with cumulative values at every partition point.
#[derive(Debug, Clone)]
pub struct ExtendedSolution {
    pub traj: Trajectory,
    n: usize,
    d: usize,
    x: Vec<f64>,
    fy: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    dd: Vec<f64>,
}

impl ExtendedSolution {
    fn x(&self, k: usize) -> &[f64] {
        &self.x[k * self.d..(k + 1) * self.d]
    }

    fn fy(&self, k: usize) -> &[f64] {
        let nd = self.n * self.d;
        &self.fy[k * nd..(k + 1) * nd]
    }

    fn check(&self, k: usize, l: usize) {
        assert!(k <= l && l < self.traj.len(), "pair ({k}, {l}) outside the solution");
    }

    /// `B^{il}(s,t) = ΔB - x^i(s) f^l_j(y_s) Δx^j`, row-major `d × n`.
    pub fn b(&self, k: usize, l: usize) -> Vec<f64> {
        self.check(k, l);
        let (n, d) = (self.n, self.d);
        let (xs, xt, f) = (self.x(k), self.x(l), self.fy(k));
        let mut out = vec![0.0; d * n];
        for i in 0..d {
            for m in 0..n {
                let e = i * n + m;
                let drive: f64 = (0..d).map(|j| f[m * d + j] * (xt[j] - xs[j])).sum();
                out[e] = self.b[l * d * n + e] - self.b[k * d * n + e] - xs[i] * drive;
            }
        }
        out
    }

    /// `C^{kc}(s,t) = ΔC - y^k(s) Δx^c`, row-major `n × d`.
    pub fn c(&self, k: usize, l: usize) -> Vec<f64> {
        self.check(k, l);
        let (n, d) = (self.n, self.d);
        let (xs, xt, ys) = (self.x(k), self.x(l), self.traj.state(k));
        let mut out = vec![0.0; n * d];
        for a in 0..n {
            for c in 0..d {
                let e = a * d + c;
                out[e] = self.c[l * n * d + e] - self.c[k * n * d + e] - ys[a] * (xt[c] - xs[c]);
            }
        }
        out
    }

    /// `D^{kl}(s,t) = ΔD - y^k(s) f^l_j(y_s) Δx^j`, row-major `n × n`.
    pub fn d(&self, k: usize, l: usize) -> Vec<f64> {
        self.check(k, l);
        let (n, d) = (self.n, self.d);
        let (xs, xt, ys, f) = (self.x(k), self.x(l), self.traj.state(k), self.fy(k));
        let mut out = vec![0.0; n * n];
        for a in 0..n {
            for m in 0..n {
                let e = a * n + m;
                let drive: f64 = (0..d).map(|j| f[m * d + j] * (xt[j] - xs[j])).sum();
                out[e] = self.dd[l * n * n + e] - self.dd[k * n * n + e] - ys[a] * drive;
            }
        }
        out
    }

    /// Value of `x` at partition point `k`.
    pub fn driver(&self, k: usize) -> &[f64] {
        self.x(k)
    }

    /// `f(y_k)`, row-major `n × d`.
    pub fn field_at(&self, k: usize) -> &[f64] {
        self.fy(k)
    }
}

/// Corrected scheme for `(x, y, B, C, D)`. Per step, with `g = f^h_r ∂_h f`:
///
/// - `ΔB^{il} = x^i f^l_j Δx^j + A^{ij} f^l_j + x^i g^l_{rj} A^{rj}`
/// - `ΔC^{kc} = y^k Δx^c + f^k_r A^{rc}`
/// - `ΔD^{kl} = y^k f^l_j Δx^j + f^k_r f^l_j A^{rj} + y^k g^l_{rj} A^{rj}`
pub fn extended_solve(
    f: &VectorField,
    path: &DriverPath,
    area: &AreaProcess,
    part: &Partition,
    y0: &[f64],
    cfg: &SchemeConfig,
) -> Result<ExtendedSolution> {
    let mut cfg = cfg.clone();
    cfg.scheme = SchemeKind::Corrected;
    cfg.validate()?;
    if !f.has_deriv1() {
        return Err(Error::MissingCapability("first derivatives"));
    }
    let steps = Steps::new(f, path, Some(area), part, y0)?;
    let (n, d) = (f.n(), f.d());
    let mut exploded = match guard(y0, 0, cfg.threshold)? {
        Guard::Exploded => Some(0),
        Guard::Continue => None,
    };
    let mut states = y0.to_vec();
    let mut xs = path.value(steps.idx[0]).to_vec();
    let mut fys = Vec::new();
    let (mut b, mut c, mut dd) = (vec![0.0; d * n], vec![0.0; n * d], vec![0.0; n * n]);
    let mut fv = vec![0.0; n * d];
    let mut df = vec![0.0; n * d * n];
    let mut g = vec![0.0; n * d * d];
    let mut y = y0.to_vec();
    let mut k = 0;
    loop {
        f.eval_into(&y, &mut fv);
        fys.extend_from_slice(&fv);
        if exploded.is_some() || k == steps.len() {
            break;
        }
        f.deriv1_into(&y, &mut df)?;
        f.correction_from(&fv, &df, &mut g);
        let x = path.value(steps.idx[k]);
        let dx = steps.dx(k);
        let a = steps.area(k);
        // dy^l = f^l_j Δx^j + g^l_{rj} A^{rj}
        let next = step(&y, &fv, &dx, Some((&g, &a)));
        let dy: Vec<f64> = next.iter().zip(&y).map(|(a, b)| a - b).collect();
        let base = k * d * n;
        for i in 0..d {
            for l in 0..n {
                let cross: f64 = (0..d).map(|j| a[i * d + j] * fv[l * d + j]).sum();
                b.push(b[base + i * n + l] + x[i] * dy[l] + cross);
            }
        }
        let base = k * n * d;
        for kk in 0..n {
            for cc in 0..d {
                let cross: f64 = (0..d).map(|r| fv[kk * d + r] * a[r * d + cc]).sum();
                c.push(c[base + kk * d + cc] + y[kk] * dx[cc] + cross);
            }
        }
        let base = k * n * n;
        for kk in 0..n {
            for l in 0..n {
                let mut cross = 0.0;
                for r in 0..d {
                    for j in 0..d {
                        cross += fv[kk * d + r] * fv[l * d + j] * a[r * d + j];
                    }
                }
                dd.push(dd[base + kk * n + l] + y[kk] * dy[l] + cross);
            }
        }
        k += 1;
        if let Guard::Exploded = guard(&next, k, cfg.threshold)? {
            exploded = Some(k);
        }
        states.extend_from_slice(&next);
        xs.extend_from_slice(path.value(steps.idx[k]));
        y = next;
    }
    let part = Partition::new(steps.idx.iter().map(|&i| path.time(i)).collect())?;
    let traj = Trajectory::new(part, n, states, exploded, SchemeKind::Extended)?;
    Ok(ExtendedSolution { traj, n, d, x: xs, fy: fys, b, c, dd })
}

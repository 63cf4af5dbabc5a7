//! A two-dimensional driver and a scalar field whose solution reaches
//! infinity at a finite time `t_*`, built from a growth envelope `(D, A)`
//! with a convergent criterion integral.
//!
//! The envelopes are first regularised, `D̃(y) = inf_{u>=1} u^r D(y/u)`, then
//! mollified, `D*(y) = 2^{-r} ∫_1^2 D̃(yu) φ(u) du`, and likewise for `A`. With
//! `λ(y) = ∫_1^y (A*/D*)^{1/β}` and `α = (D*^{1-β} / A*)^{1/β}` the field is
//! `f(y) = D*(y)(-sin λ, cos λ)` and the driver is
//! `x = α(y)(cos λ, sin λ)` along `y(t)`, where `t(y) = ∫_1^y F*` and
//! `F* = A*^{-ρ''} D*^{-ρ'}`. Since `f · dx/dy = D* α λ' = 1`, `y` solves
//! `dy = f(y) dx` classically until `t_*`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::explosion::{explosion_criterion, Verdict};
use crate::envelope::GrowthEnvelope;
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::partition::Partition;
use crate::path::DriverPath;
use crate::quadrature::{adaptive_simpson, gauss_legendre};
use crate::trajectory::{SchemeKind, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExplosionOptions {
    /// Regularisation exponent; `1/ρ + 1/2` when unset.
    pub r: Option<f64>,
    /// The sampled path follows `y` up to here before jumping to `t_*`.
    pub y_max: f64,
    /// Ratio `y_{i+1}/y_i - 1` of the sampled path.
    pub y_step: f64,
    /// Upper end of the `D*`, `A*` tables; beyond it a power tail is used.
    pub table_max: f64,
    pub nodes_per_efold: usize,
    /// Relative tolerance of the adaptive quadratures.
    pub rel_tol: f64,
    /// Upper limit of the numerical criterion check.
    pub r_max: f64,
}

impl Default for ExplosionOptions {
    fn default() -> Self {
        Self {
            r: None,
            y_max: 1e7,
            y_step: 1e-3,
            table_max: 1e9,
            nodes_per_efold: 64,
            rel_tol: 1e-8,
            r_max: 1e6,
        }
    }
}

const INF_GRID: usize = 512;
const INF_SPAN: f64 = 1e4;
const BUMP_NODES: usize = 32;

#[derive(Debug, Clone)]
pub struct ExplosionDriver {
    beta: f64,
    rho1: f64,
    rho2: f64,
    r: f64,
    /// `ln y` at the table nodes.
    log_y: Vec<f64>,
    log_d: Vec<f64>,
    log_a: Vec<f64>,
    /// Path samples in `y`, with `λ` and the remaining mass `∫_y^∞ F*`.
    path_y: Vec<f64>,
    path_lambda: Vec<f64>,
    path_tail: Vec<f64>,
    t_star: f64,
    opts: ExplosionOptions,
}

/// Smooth bump on `(1, 2)`, unnormalised.
fn bump(u: f64) -> f64 {
    if u <= 1.0 || u >= 2.0 {
        0.0
    } else {
        (-1.0 / ((u - 1.0) * (2.0 - u))).exp()
    }
}

/// `ln D̃(y)` with the infimum over a geometric grid of `u ∈ [1, 1e4]` and
/// `D` held at `D(1)` below 1.
fn log_regularised(env_fn: &(dyn Fn(f64) -> f64 + Sync), r: f64, y: f64) -> f64 {
    let step = INF_SPAN.ln() / (INF_GRID - 1) as f64;
    (0..INF_GRID)
        .map(|i| {
            let lu = i as f64 * step;
            r * lu + env_fn((y * (-lu).exp()).max(1.0)).ln()
        })
        .fold(f64::INFINITY, f64::min)
}

impl ExplosionDriver {
    pub fn new(env: &GrowthEnvelope, p: f64, gamma: f64, opts: ExplosionOptions) -> Result<Self> {
        let crit = explosion_criterion(env, p, gamma, opts.r_max)?;
        if crit.verdict != Verdict::Converges {
            return Err(Error::Divergent(format!(
                "dyadic contributions do not decay (tail slope {:.6})",
                crit.tail_slope
            )));
        }
        if !(opts.y_max > 1.0 && opts.table_max >= 4.0 * opts.y_max && opts.y_step > 0.0 && opts.nodes_per_efold >= 4)
        {
            return Err(Error::InvalidConfig("explosion options out of range".into()));
        }
        let beta = env.beta();
        let rho1 = (beta * p + 1.0 - p) / beta;
        let rho2 = (p - 1.0) / beta;
        let rho = rho1.min(rho2);
        if !(rho > 0.0) {
            return Err(Error::InvalidConfig(format!("rho={rho} must be positive")));
        }
        let r = opts.r.unwrap_or(1.0 / rho + 0.5);
        if !(r > 1.0 / rho) {
            return Err(Error::InvalidConfig(format!("r={r} must exceed 1/rho={}", 1.0 / rho)));
        }

        let (nodes, weights) = gauss_legendre(BUMP_NODES);
        let bump_u: Vec<f64> = nodes.iter().map(|x| 1.5 + 0.5 * x).collect();
        let bump_w: Vec<f64> = weights.iter().zip(&bump_u).map(|(w, &u)| w * bump(u)).collect();
        let norm: f64 = bump_w.iter().sum();

        let count = (opts.nodes_per_efold as f64 * opts.table_max.ln()).ceil() as usize + 1;
        let h = opts.table_max.ln() / (count - 1) as f64;
        let log_y: Vec<f64> = (0..count).map(|i| i as f64 * h).collect();
        let mollify = |f: &(dyn Fn(f64) -> f64 + Sync)| -> Vec<f64> {
            log_y
                .par_iter()
                .map(|&ly| {
                    let y = ly.exp();
                    let s: f64 = bump_u
                        .iter()
                        .zip(&bump_w)
                        .map(|(&u, &w)| w * log_regularised(f, r, y * u).exp())
                        .sum();
                    (s / norm).ln() - r * std::f64::consts::LN_2
                })
                .collect()
        };
        let log_d = mollify(&|x| env.d(x));
        let log_a = mollify(&|x| env.a(x));

        let mut drv = Self {
            beta,
            rho1,
            rho2,
            r,
            log_y,
            log_d,
            log_a,
            path_y: Vec::new(),
            path_lambda: Vec::new(),
            path_tail: Vec::new(),
            t_star: 0.0,
            opts,
        };
        drv.build_path()?;
        Ok(drv)
    }

    fn interp(&self, table: &[f64], y: f64) -> f64 {
        let ly = y.max(1.0).ln();
        let h = self.log_y[1];
        let last = self.log_y.len() - 1;
        let i = ((ly / h).floor() as usize).min(last - 1);
        let w = (ly - self.log_y[i]) / h;
        table[i] + w * (table[i + 1] - table[i])
    }

    /// Local log-log slope of a table at `y`.
    fn log_slope(&self, table: &[f64], y: f64) -> f64 {
        let h = self.log_y[1];
        let i = ((y.max(1.0).ln() / h).floor() as usize).min(self.log_y.len() - 2);
        (table[i + 1] - table[i]) / h
    }

    pub fn d_star(&self, y: f64) -> f64 {
        self.interp(&self.log_d, y).exp()
    }

    pub fn a_star(&self, y: f64) -> f64 {
        self.interp(&self.log_a, y).exp()
    }

    /// `F* = A*^{-ρ''} D*^{-ρ'}`.
    pub fn f_star(&self, y: f64) -> f64 {
        (-self.rho2 * self.interp(&self.log_a, y) - self.rho1 * self.interp(&self.log_d, y)).exp()
    }

    /// `λ' = (A*/D*)^{1/β}`.
    pub fn lambda_rate(&self, y: f64) -> f64 {
        ((self.interp(&self.log_a, y) - self.interp(&self.log_d, y)) / self.beta).exp()
    }

    /// `α = (D*^{1-β} / A*)^{1/β}`.
    pub fn amplitude(&self, y: f64) -> f64 {
        (((1.0 - self.beta) * self.interp(&self.log_d, y) - self.interp(&self.log_a, y)) / self.beta).exp()
    }

    /// `∫_a^b g` in the variable `ln y`.
    fn integrate(&self, g: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        adaptive_simpson(
            &|s: f64| {
                let y = s.exp();
                g(y) * y
            },
            a.ln(),
            b.ln(),
            self.opts.rel_tol,
        )
    }

    /// `∫_y^∞ F*` with table nodes as breakpoints and a power tail past the
    /// last usable node.
    fn tail_from(&self, y: f64) -> Result<f64> {
        let top = (self.opts.table_max / 2.0).min(self.log_y[self.log_y.len() - 2].exp());
        if y >= top {
            return self.power_tail(y);
        }
        let h = self.log_y[1];
        let mut acc = 0.0;
        let mut lo = y;
        let mut i = (y.ln() / h).floor() as usize + 1;
        while lo < top {
            let hi = self.log_y[i].exp().min(top);
            if hi > lo {
                acc += self.integrate(&|v| self.f_star(v), lo, hi);
            }
            lo = hi;
            i += 1;
        }
        Ok(acc + self.power_tail(top)?)
    }

    fn power_tail(&self, y: f64) -> Result<f64> {
        let s = -self.rho2 * self.log_slope(&self.log_a, y) - self.rho1 * self.log_slope(&self.log_d, y);
        if s >= -1.0 {
            return Err(Error::Divergent(format!("F* decays like y^{s:.4} beyond the table")));
        }
        Ok(self.f_star(y) * y / (-s - 1.0))
    }

    fn build_path(&mut self) -> Result<()> {
        let ratio = 1.0 + self.opts.y_step;
        // geometric up to y_max, dropping a last point closer than half a step
        let mut ys: Vec<f64> = (0..)
            .map(|i| ratio.powi(i))
            .take_while(|&y| y < self.opts.y_max / (1.0 + 0.5 * self.opts.y_step))
            .collect();
        ys.push(self.opts.y_max);
        let steps = ys.len() - 1;
        let seg_t: Vec<f64> = ys
            .par_windows(2)
            .map(|w| self.integrate(&|v| self.f_star(v), w[0], w[1]))
            .collect();
        let seg_l: Vec<f64> = ys
            .par_windows(2)
            .map(|w| self.integrate(&|v| self.lambda_rate(v), w[0], w[1]))
            .collect();
        let mut tail = vec![0.0; ys.len()];
        tail[steps] = self.tail_from(ys[steps])?;
        for i in (0..steps).rev() {
            tail[i] = tail[i + 1] + seg_t[i];
        }
        let mut lambda = vec![0.0; ys.len()];
        for i in 0..steps {
            lambda[i + 1] = lambda[i] + seg_l[i];
        }
        self.t_star = tail[0];
        self.path_y = ys;
        self.path_lambda = lambda;
        self.path_tail = tail;
        Ok(())
    }

    pub fn t_star(&self) -> f64 {
        self.t_star
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `(ρ', ρ'')`.
    pub fn rho(&self) -> (f64, f64) {
        (self.rho1, self.rho2)
    }

    /// `t(y) = ∫_1^y F*` by direct quadrature.
    pub fn time_of(&self, y: f64) -> f64 {
        if y <= 1.0 {
            0.0
        } else {
            self.integrate(&|v| self.f_star(v), 1.0, y)
        }
    }

    /// `λ(y)` by direct quadrature.
    pub fn lambda(&self, y: f64) -> f64 {
        if y <= 1.0 {
            0.0
        } else {
            self.integrate(&|v| self.lambda_rate(v), 1.0, y)
        }
    }

    /// Driver value at parameter `y`, given `λ(y)`.
    pub fn x_at(&self, y: f64, lambda: f64) -> [f64; 2] {
        let a = self.amplitude(y);
        [a * lambda.cos(), a * lambda.sin()]
    }

    /// The sampled `(y_i, λ(y_i), t(y_i))` along the path.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.path_y.len()).map(|i| (self.path_y[i], self.path_lambda[i], self.t_star - self.path_tail[i]))
    }

    /// `f(y) = D*(y)(-sin λ(y), cos λ(y))` for `y >= 1`, extended constantly
    /// below 1. `λ` is interpolated from the path samples inside their range.
    pub fn field(&self) -> VectorField {
        let this = std::sync::Arc::new(self.clone());
        let t2 = std::sync::Arc::clone(&this);
        VectorField::new(1, 2, 1.0 + self.beta, move |y: &[f64], out: &mut [f64]| {
            let v = y[0].max(1.0);
            let (d, l) = (this.d_star(v), this.lambda_fast(v));
            out[0] = -d * l.sin();
            out[1] = d * l.cos();
        })
        .with_deriv1(move |y: &[f64], out: &mut [f64]| {
            if y[0] < 1.0 {
                out.fill(0.0);
                return;
            }
            let v = y[0];
            let (d, l) = (t2.d_star(v), t2.lambda_fast(v));
            let dd = d * t2.log_slope(&t2.log_d, v) / v;
            let lr = t2.lambda_rate(v);
            out[0] = -dd * l.sin() - d * lr * l.cos();
            out[1] = dd * l.cos() - d * lr * l.sin();
        })
        .with_fd_derivatives()
        .with_label("explosion")
    }

    /// `λ(y)` from the nearest path sample below plus a short quadrature.
    fn lambda_fast(&self, y: f64) -> f64 {
        let ratio = 1.0 + self.opts.y_step;
        let last = self.path_y.len() - 1;
        let i = ((y.ln() / ratio.ln()).floor() as usize).min(last);
        let (y0, l0) = (self.path_y[i], self.path_lambda[i]);
        if y <= y0 {
            return l0 - if y < y0 { self.integrate(&|v| self.lambda_rate(v), y, y0) } else { 0.0 };
        }
        l0 + self.integrate(&|v| self.lambda_rate(v), y0, y)
    }

    /// The solution `y(t_i) = y_i` on the sample times, all before `t_*`.
    pub fn trajectory(&self) -> Result<Trajectory> {
        let mut times: Vec<f64> = self.samples().map(|s| s.2).collect();
        times[0] = 0.0;
        Trajectory::new(Partition::new(times)?, 1, self.path_y.clone(), None, SchemeKind::Constructed)
    }

    /// Samples `x(t(y_i))`, then `x(t_*) = 0` and one more point at `1.1 t_*`.
    pub fn path(&self) -> Result<DriverPath> {
        let mut times = Vec::with_capacity(self.path_y.len() + 2);
        let mut values = Vec::with_capacity(2 * (self.path_y.len() + 2));
        for (y, l, t) in self.samples() {
            times.push(t);
            values.extend_from_slice(&self.x_at(y, l));
        }
        times[0] = 0.0;
        times.push(self.t_star);
        times.push(1.1 * self.t_star);
        values.extend_from_slice(&[0.0; 4]);
        let p = 1.0 / self.rho1.min(self.rho2);
        DriverPath::from_flat(Partition::new(times)?, 2, values)?.with_regularity(1.0 / p.max(1.0), p.max(1.0))
    }
}

/// Field, sampled driver and blow-up time with default options.
pub fn explosion_driver(env: &GrowthEnvelope, p: f64, gamma: f64) -> Result<(VectorField, DriverPath, f64)> {
    let drv = ExplosionDriver::new(env, p, gamma, ExplosionOptions::default())?;
    Ok((drv.field(), drv.path()?, drv.t_star()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn env() -> GrowthEnvelope {
        GrowthEnvelope::power_law(2.0, 1.5, 0.5, 1.2).unwrap()
    }

    fn driver() -> &'static ExplosionDriver {
        static D: OnceLock<ExplosionDriver> = OnceLock::new();
        D.get_or_init(|| ExplosionDriver::new(&env(), 1.2, 1.5, ExplosionOptions::default()).unwrap())
    }

    #[test]
    fn exponents() {
        let d = driver();
        let (r1, r2) = d.rho();
        assert!((r1 - 0.8).abs() < 1e-12 && (r2 - 0.4).abs() < 1e-12);
        assert!((d.r() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn power_envelopes_mollify_to_multiples() {
        // D̃ = D for increasing powers with exponent < r, so D* = c y^2 with
        // c = 2^{-r} ∫ u^2 φ / ∫ φ, computed here by Simpson
        let d = driver();
        let num = adaptive_simpson(&|u| u * u * bump(u), 1.0, 2.0, 1e-12);
        let den = adaptive_simpson(&bump, 1.0, 2.0, 1e-12);
        let c = num / den / 8.0;
        for &y in &[1.0, 3.7, 1e3, 2e6] {
            assert!((d.d_star(y) / (c * y * y) - 1.0).abs() < 1e-6, "y={y}");
        }
    }

    #[test]
    fn t_star_is_refinement_stable() {
        let fine = ExplosionOptions {
            rel_tol: 1e-11,
            ..Default::default()
        };
        let a = driver().t_star();
        let b = ExplosionDriver::new(&env(), 1.2, 1.5, fine).unwrap().t_star();
        assert!((a - b).abs() <= 1e-6 * b, "{a} {b}");
        // direct quadrature to the end of the path plus the remaining tail
        let d = driver();
        let direct = d.time_of(1e7) + d.tail_from(1e7).unwrap();
        assert!((direct - a).abs() <= 1e-6 * a);
    }

    #[test]
    fn classical_ode_residual() {
        let d = driver();
        let t_star = d.t_star();
        let pts: Vec<_> = d.samples().filter(|s| s.2 >= 0.1 * t_star && s.2 <= 0.9 * t_star).collect();
        let (y1, y2) = (pts[0].0, pts[pts.len() - 1].0);
        // midpoint Riemann–Stieltjes sum of f·dx on a 20x finer y-grid
        let n = 20 * pts.len();
        let q = (y2 / y1).powf(1.0 / n as f64);
        let mut acc = 0.0;
        let mut lam = d.lambda(y1);
        let mut x_prev = d.x_at(y1, lam);
        let mut y_prev = y1;
        for i in 1..=n {
            let y = if i == n { y2 } else { y1 * q.powi(i as i32) };
            let ym = (y * y_prev).sqrt();
            let lm = lam + d.integrate(&|v| d.lambda_rate(v), y_prev, ym);
            lam = lm + d.integrate(&|v| d.lambda_rate(v), ym, y);
            let x = d.x_at(y, lam);
            let dm = d.d_star(ym);
            acc += -dm * lm.sin() * (x[0] - x_prev[0]) + dm * lm.cos() * (x[1] - x_prev[1]);
            x_prev = x;
            y_prev = y;
        }
        assert!(((y2 - y1) - acc).abs() <= 1e-4 * (y2 - y1), "{} vs {acc}", y2 - y1);
    }

    #[test]
    fn path_ends_at_zero_after_t_star() {
        let d = driver();
        let p = d.path().unwrap();
        let n = p.len();
        assert_eq!(p.time(n - 2), d.t_star());
        assert_eq!(p.value(n - 2), &[0.0, 0.0]);
        assert!(p.time(n - 3) < d.t_star());
        assert_eq!(p.time(0), 0.0);
    }

    #[test]
    fn constructed_trajectory_explodes_before_t_star() {
        let d = driver();
        let tr = d.trajectory().unwrap();
        let k = (0..tr.len()).find(|&k| tr.state(k)[0] > 1e6).unwrap();
        assert!(tr.time(k) < d.t_star());
        assert_eq!(tr.last(), &[1e7]);
    }

    #[test]
    fn divergent_envelope_refused() {
        let env = GrowthEnvelope::power_law(0.0, 2.5, 0.5, 1.2).unwrap();
        assert!(matches!(
            ExplosionDriver::new(&env, 1.2, 1.5, ExplosionOptions::default()),
            Err(Error::Divergent(_))
        ));
    }
}

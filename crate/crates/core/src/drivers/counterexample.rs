//! Path and vector field with two distinct solutions from the origin.
//!
//! `x^1(t) = t^β cos(t^{-ρ})`, `x^2(t) = t^β (2 + sin(t^{-ρ}))` and the system
//! `dy^1 = κ f(y) dx^1`, `dy^2 = dx^2`, where `f = s(|y^1|/y^2) (y^2)_+^γ` and
//! `s` is a smoothstep ramp equal to 0 at 0 and 1 beyond `2τ`. Both `y^1 ≡ 0`
//! and `y^1 = c ∫ (x^2)^γ dx^1` solve it; `c = κ` for `γ < 2` and
//! `c = κ(1 - γ)` for `2 < γ < 3` with the degenerate area.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::partition::Partition;
use crate::path::DriverPath;
use crate::quadrature::{gauss_apply, gauss_legendre};

fn d_tau() -> f64 {
    0.25
}
fn d_t_min() -> f64 {
    1e-4
}
fn d_log_ratio() -> f64 {
    5e-4
}
fn d_phase_step() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleConfig {
    pub p: f64,
    pub gamma: f64,
    pub beta_exp: f64,
    pub rho_exp: f64,
    /// Half-width of the smoothing collar: the ramp spans `|y^1|/y^2 ∈ [0, 2τ]`.
    #[serde(default = "d_tau")]
    pub tau: f64,
    pub t_max: f64,
    /// Below this time the second solution uses its leading-order asymptotics;
    /// above it, per-interval Gauss–Legendre quadrature.
    pub t_switch: f64,
    /// First positive grid point.
    #[serde(default = "d_t_min")]
    pub t_min: f64,
    /// Relative spacing of the log grid on `[t_min, t_switch)`.
    #[serde(default = "d_log_ratio")]
    pub log_ratio: f64,
    /// Phase increment of the grid on `[t_switch, t_max]`, in radians of `t^{-ρ}`.
    #[serde(default = "d_phase_step")]
    pub phase_step: f64,
    /// Coefficient `κ` on `dx^1`. Defaults to 1 when `γ < 2` and to `1 - ρ`
    /// when `γ > 2`.
    #[serde(default)]
    pub coefficient: Option<f64>,
}

impl CounterexampleConfig {
    /// `γ = 1.1`, `p = 1.9`, `β = 3`, `ρ = 4.5` on `[0, 0.4]`.
    pub fn example1() -> Self {
        Self {
            p: 1.9,
            gamma: 1.1,
            beta_exp: 3.0,
            rho_exp: 4.5,
            tau: d_tau(),
            t_max: 0.4,
            t_switch: 0.12,
            t_min: d_t_min(),
            log_ratio: d_log_ratio(),
            phase_step: d_phase_step(),
            coefficient: None,
        }
    }

    /// `γ = 2.1`, `p = 2.9`, `β = 3`, `ρ = 7` on `[0, 0.55]`.
    pub fn example2() -> Self {
        Self {
            p: 2.9,
            gamma: 2.1,
            beta_exp: 3.0,
            rho_exp: 7.0,
            tau: d_tau(),
            t_max: 0.55,
            t_switch: 0.3,
            t_min: 1e-3,
            log_ratio: 1e-3,
            phase_step: d_phase_step(),
            coefficient: None,
        }
    }

    /// Whether `2 < γ < p < 3`.
    pub fn second_order(&self) -> bool {
        self.gamma > 2.0
    }

    pub fn kappa(&self) -> f64 {
        self.coefficient
            .unwrap_or(if self.second_order() { 1.0 - self.rho_exp } else { 1.0 })
    }

    /// Multiplier `c` in `y^1 = c ∫ (x^2)^γ dx^1` for the nonzero solution.
    pub fn solution_factor(&self) -> f64 {
        if self.second_order() {
            self.kappa() * (1.0 - self.gamma)
        } else {
            self.kappa()
        }
    }

    /// Leading-order exponent `β(γ+1) - ρ` of the nonzero solution.
    pub fn growth_exponent(&self) -> f64 {
        self.beta_exp * (self.gamma + 1.0) - self.rho_exp
    }

    pub fn validate(&self) -> Result<()> {
        let (g, p, b, r) = (self.gamma, self.p, self.beta_exp, self.rho_exp);
        let first = 1.0 < g && g < p && p < 2.0;
        let second = 2.0 < g && g < p && p < 3.0;
        if !(first || second) {
            return Err(Error::InvalidConfig(format!(
                "need 1 < gamma < p < 2 or 2 < gamma < p < 3 (gamma={g}, p={p})"
            )));
        }
        if !(b > 0.0 && r > 0.0 && g < r / b && (r + 1.0) / b < p) {
            return Err(Error::InvalidConfig(format!(
                "need gamma < rho/beta < (rho+1)/beta < p (rho/beta={}, (rho+1)/beta={})",
                r / b,
                (r + 1.0) / b
            )));
        }
        if !(self.tau > 0.0 && self.tau <= 0.5) {
            return Err(Error::InvalidConfig(format!("tau={} outside (0, 0.5]", self.tau)));
        }
        if !(0.0 < self.t_min && self.t_min < self.t_switch && self.t_switch < self.t_max) {
            return Err(Error::InvalidConfig("need 0 < t_min < t_switch < t_max".into()));
        }
        if !(self.log_ratio > 0.0 && self.phase_step > 0.0) {
            return Err(Error::InvalidConfig("grid spacings must be positive".into()));
        }
        if !self.kappa().is_finite() || self.kappa() == 0.0 {
            return Err(Error::InvalidConfig("coefficient must be finite and nonzero".into()));
        }
        Ok(())
    }

    pub fn x(&self, t: f64) -> [f64; 2] {
        if t <= 0.0 {
            return [0.0, 0.0];
        }
        let ph = t.powf(-self.rho_exp);
        let a = t.powf(self.beta_exp);
        [a * ph.cos(), a * (2.0 + ph.sin())]
    }

    fn dx1(&self, t: f64) -> f64 {
        let (b, r) = (self.beta_exp, self.rho_exp);
        let ph = t.powf(-r);
        b * t.powf(b - 1.0) * ph.cos() + r * t.powf(b - r - 1.0) * ph.sin()
    }

    /// `(x^2)^γ dx^1/dt`.
    fn integrand(&self, t: f64) -> f64 {
        self.x(t)[1].powf(self.gamma) * self.dx1(t)
    }

    /// Phase average `(1/2π) ∫ (2 + sin φ)^γ sin φ dφ` (trapezoid rule,
    /// spectrally accurate for periodic integrands).
    pub fn phase_mean(&self) -> f64 {
        let n = 512;
        (0..n)
            .map(|i| {
                let ph = std::f64::consts::TAU * i as f64 / n as f64;
                (2.0 + ph.sin()).powf(self.gamma) * ph.sin()
            })
            .sum::<f64>()
            / n as f64
    }

    /// Leading-order constant `C` with `∫_0^t (x^2)^γ dx^1 ≈ C t^{β(γ+1)-ρ}`.
    pub fn asymptotic_constant(&self) -> f64 {
        self.rho_exp * self.phase_mean() / self.growth_exponent()
    }

    /// `0`, a log grid on `[t_min, t_switch)`, then a phase-uniform grid on
    /// `[t_switch, t_max]`.
    pub fn grid(&self) -> Result<Partition> {
        self.validate()?;
        let mut t = vec![0.0];
        let mut s = self.t_min;
        while s < self.t_switch * (1.0 - 0.5 * self.log_ratio) {
            t.push(s);
            s *= 1.0 + self.log_ratio;
        }
        let r = self.rho_exp;
        let (ph_hi, ph_lo) = (self.t_switch.powf(-r), self.t_max.powf(-r));
        let n = ((ph_hi - ph_lo) / self.phase_step).ceil().max(1.0) as usize;
        for i in (0..=n).rev() {
            let ph = ph_lo + (ph_hi - ph_lo) * i as f64 / n as f64;
            t.push(ph.powf(-1.0 / r));
        }
        let last = t.len() - 1;
        t[last] = self.t_max;
        t[last - n] = self.t_switch;
        Partition::new(t)
    }

    /// `∫_0^{t_k} (x^2)^γ dx^1` at every grid point.
    pub fn integral_on(&self, grid: &Partition) -> Result<Vec<f64>> {
        self.validate()?;
        let c = self.asymptotic_constant();
        let e = self.growth_exponent();
        let rule = gauss_legendre(8);
        let times = grid.times();
        let mut out = Vec::with_capacity(times.len());
        let mut acc = 0.0;
        for (k, &t) in times.iter().enumerate() {
            if t <= self.t_switch {
                acc = if t > 0.0 { c * t.powf(e) } else { 0.0 };
            } else {
                let s = times[k - 1].max(self.t_switch);
                acc += gauss_apply(&rule, &|u| self.integrand(u), s, t);
            }
            out.push(acc);
        }
        Ok(out)
    }
}

fn smoothstep(u: f64) -> (f64, f64) {
    if u <= 0.0 {
        (0.0, 0.0)
    } else if u >= 1.0 {
        (1.0, 0.0)
    } else {
        (u * u * (3.0 - 2.0 * u), 6.0 * u * (1.0 - u))
    }
}

/// `f(y) = s(|y^1|/y^2) (y^2)^γ` for `y^2 > 0`, else 0, with its gradient.
fn indicator_field(gamma: f64, tau: f64, y1: f64, y2: f64) -> (f64, [f64; 2]) {
    if y2 <= 0.0 {
        return (0.0, [0.0, 0.0]);
    }
    let r = y1.abs() / y2;
    let (s, ds) = smoothstep(r / (2.0 * tau));
    let ds_dr = ds / (2.0 * tau);
    let w = y2.powf(gamma - 1.0);
    let f = s * w * y2;
    let g1 = ds_dr * y1.signum() * w;
    let g2 = w * (gamma * s - r * ds_dr);
    (f, [g1, g2])
}

/// `[[κ f(y), 0], [0, 1]]` with analytic first derivatives.
pub fn counterexample_field(cfg: &CounterexampleConfig) -> Result<VectorField> {
    cfg.validate()?;
    let (g, tau, kappa) = (cfg.gamma, cfg.tau, cfg.kappa());
    Ok(VectorField::new(2, 2, g, move |y, out| {
        out[0] = kappa * indicator_field(g, tau, y[0], y[1]).0;
        out[3] = 1.0;
    })
    .with_deriv1(move |y, out| {
        let (_, grad) = indicator_field(g, tau, y[0], y[1]);
        out[0] = kappa * grad[0];
        out[1] = kappa * grad[1];
    })
    .with_fd_derivatives()
    .with_label("counterexample"))
}

/// Samples `x` on [`CounterexampleConfig::grid`], tagged `α = 1/p`.
pub fn counterexample_path(cfg: &CounterexampleConfig) -> Result<DriverPath> {
    let grid = cfg.grid()?;
    DriverPath::from_fn(grid, 2, |t| cfg.x(t).to_vec())?.with_regularity(1.0 / cfg.p, cfg.p)
}

/// Driver and vector field of the nonuniqueness example.
pub fn example1_driver(cfg: &CounterexampleConfig) -> Result<(DriverPath, VectorField)> {
    Ok((counterexample_path(cfg)?, counterexample_field(cfg)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive_simpson;

    #[test]
    fn exponent_chain_enforced() {
        CounterexampleConfig::example1().validate().unwrap();
        CounterexampleConfig::example2().validate().unwrap();
        let mut bad = CounterexampleConfig::example1();
        bad.rho_exp = 3.0; // rho/beta = 1 < gamma
        assert!(bad.validate().is_err());
        let mut bad = CounterexampleConfig::example1();
        bad.p = 1.05;
        assert!(bad.validate().is_err());
        let mut bad = CounterexampleConfig::example1();
        bad.tau = 0.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn field_values() {
        let cfg = CounterexampleConfig::example1();
        let f = counterexample_field(&cfg).unwrap();
        for y2 in [1e-3, 0.2, 1.0, 4.0] {
            assert_eq!(f.eval(&[0.0, y2])[0], 0.0);
            let y1 = 2.0 * cfg.tau * y2;
            for s in [1.0, -1.0, 1.5] {
                let v = f.eval(&[s * y1, y2])[0];
                assert!((v - y2.powf(cfg.gamma)).abs() <= 1e-15 * v.abs().max(1.0));
            }
        }
        assert_eq!(f.eval(&[1.0, -0.5])[0], 0.0);
        assert_eq!(f.eval(&[0.3, 0.7])[3], 1.0);
        // analytic gradient against central differences off the kinks
        let probes = vec![vec![0.05, 0.4], vec![-0.1, 0.9], vec![0.8, 0.5]];
        let (e1, _) = f.derivative_discrepancy(&probes).unwrap();
        assert!(e1.unwrap() < 1e-6);
        let d = f.deriv1(&[0.0, 0.5]).unwrap();
        assert_eq!(&d[0..2], &[0.0, 0.0]);
    }

    #[test]
    fn grid_layout() {
        let cfg = CounterexampleConfig::example1();
        let g = cfg.grid().unwrap();
        assert_eq!(g.start(), 0.0);
        assert_eq!(g.end(), cfg.t_max);
        assert!(g.index_of(cfg.t_switch).is_some());
        let t = g.times();
        let k = g.index_of(cfg.t_switch).unwrap();
        for w in t[k..].windows(2) {
            let dph = w[0].powf(-cfg.rho_exp) - w[1].powf(-cfg.rho_exp);
            assert!(dph <= cfg.phase_step * (1.0 + 1e-9));
        }
    }

    #[test]
    fn asymptotic_constant_matches_quadrature() {
        // m = (1/2π)∫(2+sin)^γ sin, independently by adaptive Simpson
        let cfg = CounterexampleConfig::example1();
        let m = adaptive_simpson(
            &|ph: f64| (2.0 + ph.sin()).powf(cfg.gamma) * ph.sin(),
            0.0,
            std::f64::consts::TAU,
            1e-12,
        ) / std::f64::consts::TAU;
        assert!((cfg.phase_mean() - m).abs() < 1e-12);
        assert!((m - 0.587_711_461_585_683_5).abs() < 1e-9);
    }

    #[test]
    fn gauss_segment_matches_simpson() {
        let cfg = CounterexampleConfig::example1();
        let g = cfg.grid().unwrap();
        let k0 = g.index_of(cfg.t_switch).unwrap();
        let i = cfg.integral_on(&g).unwrap();
        let (a, b) = (g.times()[k0 + 500], g.times()[k0 + 900]);
        let want = adaptive_simpson(&|t| cfg.integrand(t), a, b, 1e-12);
        assert!((i[k0 + 900] - i[k0 + 500] - want).abs() < 1e-12);
    }
}

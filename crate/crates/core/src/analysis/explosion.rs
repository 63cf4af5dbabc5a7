//! Integral test on growth envelopes: finite `∫_1^∞ {A^{1-p} D^{p-1-βp}}^{1/β}`
//! permits finite-time blow-up, an infinite one rules it out.

use serde::Serialize;

use crate::envelope::GrowthEnvelope;
use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;

/// Slopes of the dyadic contributions below `-SLOPE_TOL` count as decay.
pub const SLOPE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Converges,
    DivergesTrend,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub verdict: Verdict,
    /// Fitted `log2` slope of the contribution of `[2^j, 2^{j+1}]` against `j`
    /// over the tail half of the ranges. A power-law integrand `R^e` gives `e + 1`.
    pub tail_slope: f64,
    /// `(2^j, 2^{j+1}, ∫)` for each dyadic range inside `[1, R_max]`.
    pub partial: Vec<(f64, f64, f64)>,
    /// Sum of the partial integrals.
    pub total: f64,
}

/// Dyadic partial integrals of the criterion integrand on `[1, r_max]` and a
/// trend verdict from the log-slope of the tail contributions.
pub fn explosion_criterion(env: &GrowthEnvelope, p: f64, gamma: f64, r_max: f64) -> Result<CriterionReport> {
    if (p - env.p()).abs() > 1e-12 || (gamma - env.gamma()).abs() > 1e-12 {
        return Err(Error::InvalidConfig(format!(
            "exponents p={p}, gamma={gamma} disagree with the envelope (p={}, gamma={})",
            env.p(),
            env.gamma()
        )));
    }
    if !(r_max >= 1e3) {
        return Err(Error::InvalidConfig(format!("R_max={r_max} below 1e3")));
    }
    env.validate(r_max, 256)?;
    let ranges = r_max.log2().floor() as i32;
    // substitute R = e^s so each range is smooth for power-like envelopes
    let partial: Vec<(f64, f64, f64)> = (0..ranges)
        .map(|j| {
            let (lo, hi) = (2f64.powi(j), 2f64.powi(j + 1));
            let g = |s: f64| {
                let r = s.exp();
                env.criterion_integrand(r) * r
            };
            (lo, hi, adaptive_simpson(&g, lo.ln(), hi.ln(), 1e-10))
        })
        .collect();
    let total = partial.iter().map(|c| c.2).sum();
    let tail = &partial[partial.len() / 2..];
    let pts: Vec<(f64, f64)> = tail.iter().map(|&(lo, _, v)| (lo.log2(), v.log2())).collect();
    let tail_slope = slope(&pts);
    let verdict = if tail_slope < -SLOPE_TOL { Verdict::Converges } else { Verdict::DivergesTrend };
    Ok(CriterionReport { verdict, tail_slope, partial, total })
}

pub(crate) fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Closed form: `R^e` is integrable at infinity iff `e < -1`.
    fn closed_form(d_exp: f64, a_exp: f64, beta: f64, p: f64) -> (f64, bool) {
        let e = (a_exp * (1.0 - p) + d_exp * (p - 1.0 - beta * p)) / beta;
        (e, e < -1.0 - 1e-9)
    }

    #[test]
    fn grid_matches_closed_form() {
        let (beta, p) = (0.5, 1.2);
        for &d in &[0.0, 0.5, 1.0, 1.5, 2.0] {
            for &a in &[1.5, 2.0, 2.5, 3.0, 3.5] {
                let env = GrowthEnvelope::power_law(d, a, beta, p).unwrap();
                let rep = explosion_criterion(&env, p, 1.0 + beta, 1e6).unwrap();
                let (e, conv) = closed_form(d, a, beta, p);
                assert_eq!(rep.verdict == Verdict::Converges, conv, "d={d} a={a} e={e}");
                assert!((rep.tail_slope - (e + 1.0)).abs() < 1e-6, "d={d} a={a}");
            }
        }
    }

    #[test]
    fn partial_integrals_match_closed_form() {
        let env = GrowthEnvelope::power_law(2.0, 1.5, 0.5, 1.2).unwrap();
        let rep = explosion_criterion(&env, 1.2, 1.5, 1024.0).unwrap();
        for &(lo, hi, v) in &rep.partial {
            let want = (hi.powf(-1.2) - lo.powf(-1.2)) / -1.2;
            assert!((v - want).abs() < 1e-9 * want);
        }
    }

    #[test]
    fn constant_envelope_diverges() {
        // bounded f and seminorm: integrand constant, no explosion
        let env = GrowthEnvelope::power_law(0.0, 0.0, 0.5, 1.4).unwrap();
        let rep = explosion_criterion(&env, 1.4, 1.5, 1e4).unwrap();
        assert_eq!(rep.verdict, Verdict::DivergesTrend);
    }

    #[test]
    fn refuses_bad_input() {
        let env = GrowthEnvelope::power_law(2.0, 1.0, 0.5, 1.2).unwrap();
        assert!(matches!(explosion_criterion(&env, 1.2, 1.5, 1e4), Err(Error::Rejected(_))));
        let env = GrowthEnvelope::power_law(2.0, 1.5, 0.5, 1.2).unwrap();
        assert!(explosion_criterion(&env, 1.3, 1.5, 1e4).is_err());
        assert!(explosion_criterion(&env, 1.2, 1.5, 100.0).is_err());
    }
}

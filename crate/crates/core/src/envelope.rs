use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Growth bounds on `[1, ∞)`: `D(R)` bounds `|f|` and `A(R)` bounds its
/// Hölder seminorm on the ball of radius `R`; `β = γ - 1`.
#[derive(Clone)]
pub struct GrowthEnvelope {
    d: ScalarFn,
    a: ScalarFn,
    beta: f64,
    p: f64,
    power: Option<(f64, f64)>,
}

impl fmt::Debug for GrowthEnvelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GrowthEnvelope")
            .field("beta", &self.beta)
            .field("p", &self.p)
            .field("power", &self.power)
            .finish()
    }
}

impl GrowthEnvelope {
    pub fn new(
        d: impl Fn(f64) -> f64 + Send + Sync + 'static,
        a: impl Fn(f64) -> f64 + Send + Sync + 'static,
        beta: f64,
        p: f64,
    ) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::InvalidConfig(format!("beta={beta} outside (0, 1]")));
        }
        if !(p >= 1.0) {
            return Err(Error::InvalidConfig(format!("p={p} must be >= 1")));
        }
        Ok(Self {
            d: Arc::new(d),
            a: Arc::new(a),
            beta,
            p,
            power: None,
        })
    }

    /// `D(R) = R^d_exp`, `A(R) = R^a_exp`.
    pub fn power_law(d_exp: f64, a_exp: f64, beta: f64, p: f64) -> Result<Self> {
        let mut env = Self::new(move |r| r.powf(d_exp), move |r| r.powf(a_exp), beta, p)?;
        env.power = Some((d_exp, a_exp));
        Ok(env)
    }

    pub fn d(&self, r: f64) -> f64 {
        (self.d)(r)
    }

    pub fn a(&self, r: f64) -> f64 {
        (self.a)(r)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.beta + 1.0
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Exponents `(d, a)` when built by [`GrowthEnvelope::power_law`].
    pub fn power(&self) -> Option<(f64, f64)> {
        self.power
    }

    /// `{A^{1-p} D^{p-1-βp}}^{1/β}` at `R`.
    pub fn criterion_integrand(&self, r: f64) -> f64 {
        let (b, p) = (self.beta, self.p);
        // log form avoids overflow at large R
        let l = (1.0 - p) * self.a(r).ln() + (p - 1.0 - b * p) * self.d(r).ln();
        (l / b).exp()
    }

    /// Checks positivity, monotonicity and `D(R) <= R^β A(R)` at `samples`
    /// log-spaced radii in `[1, r_max]`.
    pub fn validate(&self, r_max: f64, samples: usize) -> Result<()> {
        let mut prev = (0.0, 0.0);
        for i in 0..samples.max(2) {
            let r = r_max.powf(i as f64 / (samples.max(2) - 1) as f64);
            let (d, a) = (self.d(r), self.a(r));
            if !(d > 0.0 && a > 0.0 && d.is_finite() && a.is_finite()) {
                return Err(Error::Rejected(format!("envelope not positive and finite at R={r}")));
            }
            if d < prev.0 * (1.0 - 1e-12) || a < prev.1 * (1.0 - 1e-12) {
                return Err(Error::Rejected(format!("envelope decreasing near R={r}")));
            }
            if d > r.powf(self.beta) * a * (1.0 + 1e-12) {
                return Err(Error::Rejected(format!(
                    "D(R) > R^beta A(R) at R={r}: {d} > {}",
                    r.powf(self.beta) * a
                )));
            }
            prev = (d, a);
        }
        Ok(())
    }
}

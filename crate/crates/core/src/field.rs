use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};

/// Writes a block of values for a state `y` into `out`.
pub type FieldFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// Coefficients `f^i_j(y)` of `dy^i = f^i_j(y) dx^j`, for `y ∈ R^n`, `x ∈ R^d`.
///
/// Layouts (row-major):
/// - `eval`: `f^i_j` at `i*d + j`
/// - `deriv1`: `∂_h f^i_j` at `(i*d + j)*n + h`
/// - `deriv2`: `∂_q ∂_h f^i_j` at `((i*d + j)*n + q)*n + h`
/// - [`VectorField::correction`]: `g^i_{rj} = f^h_r ∂_h f^i_j` at `(i*d + r)*d + j`
#[derive(Clone)]
pub struct VectorField {
    n: usize,
    d: usize,
    gamma: f64,
    label: String,
    eval: FieldFn,
    deriv1: Option<FieldFn>,
    deriv2: Option<FieldFn>,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField")
            .field("label", &self.label)
            .field("n", &self.n)
            .field("d", &self.d)
            .field("gamma", &self.gamma)
            .field("deriv1", &self.deriv1.is_some())
            .field("deriv2", &self.deriv2.is_some())
            .finish()
    }
}

fn fd_step(y: f64) -> f64 {
    1e-5 * y.abs().max(1.0)
}

impl VectorField {
    pub fn new(
        n: usize,
        d: usize,
        gamma: f64,
        eval: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self {
            n,
            d,
            gamma,
            label: "custom".into(),
            eval: Arc::new(eval),
            deriv1: None,
            deriv2: None,
        }
    }

    pub fn with_deriv1(mut self, f: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.deriv1 = Some(Arc::new(f));
        self
    }

    pub fn with_deriv2(mut self, f: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.deriv2 = Some(Arc::new(f));
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    /// Fills missing derivatives with central differences (of `eval` for the
    /// first derivative, of the first derivative for the second).
    pub fn with_fd_derivatives(mut self) -> Self {
        let (n, d) = (self.n, self.d);
        if self.deriv1.is_none() {
            let eval = Arc::clone(&self.eval);
            self.deriv1 = Some(Arc::new(move |y: &[f64], out: &mut [f64]| {
                central_diff(&*eval, n, n * d, y, out)
            }));
        }
        if self.deriv2.is_none() {
            let d1 = Arc::clone(self.deriv1.as_ref().unwrap());
            self.deriv2 = Some(Arc::new(move |y: &[f64], out: &mut [f64]| {
                central_diff(&*d1, n, n * d * n, y, out)
            }));
        }
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn has_deriv1(&self) -> bool {
        self.deriv1.is_some()
    }

    pub fn has_deriv2(&self) -> bool {
        self.deriv2.is_some()
    }

    pub fn eval_into(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.n);
        out.iter_mut().for_each(|v| *v = 0.0);
        (self.eval)(y, out)
    }

    pub fn eval(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n * self.d];
        self.eval_into(y, &mut out);
        out
    }

    pub fn deriv1_into(&self, y: &[f64], out: &mut [f64]) -> Result<()> {
        let f = self.deriv1.as_ref().ok_or(Error::MissingCapability("first derivatives"))?;
        out.iter_mut().for_each(|v| *v = 0.0);
        f(y, out);
        Ok(())
    }

    pub fn deriv1(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n * self.d * self.n];
        self.deriv1_into(y, &mut out)?;
        Ok(out)
    }

    pub fn deriv2(&self, y: &[f64]) -> Result<Vec<f64>> {
        let f = self.deriv2.as_ref().ok_or(Error::MissingCapability("second derivatives"))?;
        let mut out = vec![0.0; self.n * self.d * self.n * self.n];
        f(y, &mut out);
        Ok(out)
    }

    /// `g^i_{rj}(y) = f^h_r(y) ∂_h f^i_j(y)` from precomputed `f` and `∂f`.
    pub fn correction_from(&self, f: &[f64], df: &[f64], out: &mut [f64]) {
        let (n, d) = (self.n, self.d);
        for i in 0..n {
            for r in 0..d {
                for j in 0..d {
                    let mut s = 0.0;
                    for h in 0..n {
                        s += f[h * d + r] * df[(i * d + j) * n + h];
                    }
                    out[(i * d + r) * d + j] = s;
                }
            }
        }
    }

    pub fn correction(&self, y: &[f64]) -> Result<Vec<f64>> {
        let f = self.eval(y);
        let df = self.deriv1(y)?;
        let mut g = vec![0.0; self.n * self.d * self.d];
        self.correction_from(&f, &df, &mut g);
        Ok(g)
    }

    /// `∂_q g^i_{rj} = ∂_q f^h_r ∂_h f^i_j + f^h_r ∂_q ∂_h f^i_j`, at
    /// `((i*d + r)*d + j)*n + q`.
    pub fn correction_jacobian(&self, y: &[f64]) -> Result<Vec<f64>> {
        let (n, d) = (self.n, self.d);
        let f = self.eval(y);
        let df = self.deriv1(y)?;
        let d2f = self.deriv2(y)?;
        let mut out = vec![0.0; n * d * d * n];
        for i in 0..n {
            for r in 0..d {
                for j in 0..d {
                    for q in 0..n {
                        let mut s = 0.0;
                        for h in 0..n {
                            s += df[(h * d + r) * n + q] * df[(i * d + j) * n + h]
                                + f[h * d + r] * d2f[((i * d + j) * n + q) * n + h];
                        }
                        out[((i * d + r) * d + j) * n + q] = s;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Largest relative discrepancy between the supplied derivatives and
    /// central differences at the probe points, as `(first, second)`.
    /// `None` marks an absent derivative.
    pub fn derivative_discrepancy(&self, probes: &[Vec<f64>]) -> Result<(Option<f64>, Option<f64>)> {
        let (n, d) = (self.n, self.d);
        let mut e1 = self.deriv1.as_ref().map(|_| 0.0f64);
        let mut e2 = self.deriv2.as_ref().map(|_| 0.0f64);
        for y in probes {
            check_dim("probe point", n, y.len())?;
            if let Some(err) = e1.as_mut() {
                let exact = self.deriv1(y)?;
                let mut fd = vec![0.0; exact.len()];
                central_diff(&*self.eval, n, n * d, y, &mut fd);
                let scale = self.eval(y).iter().fold(1e-300f64, |a, v| a.max(v.abs()));
                *err = err.max(block_rel_err(&exact, &fd, 1e-8 * scale));
            }
            if let (Some(err), Some(d1)) = (e2.as_mut(), self.deriv1.as_ref()) {
                let exact = self.deriv2(y)?;
                let mut fd = vec![0.0; exact.len()];
                central_diff(&**d1, n, n * d * n, y, &mut fd);
                let scale = self.deriv1(y)?.iter().fold(1e-300f64, |a, v| a.max(v.abs()));
                *err = err.max(block_rel_err(&exact, &fd, 1e-8 * scale));
            }
        }
        Ok((e1, e2))
    }

    /// Passes when both derivative discrepancies are within `1e-5`.
    pub fn check_derivatives(&self, probes: &[Vec<f64>]) -> Result<()> {
        let (e1, e2) = self.derivative_discrepancy(probes)?;
        for (name, e) in [("first", e1), ("second", e2)] {
            if let Some(e) = e {
                if !(e <= 1e-5) {
                    return Err(Error::Rejected(format!(
                        "{name} derivative disagrees with finite differences (rel. error {e:.3e})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `f ≡ 0`.
    pub fn zero(n: usize, d: usize) -> Self {
        Self::new(n, d, f64::INFINITY, |_, _| {})
            .with_deriv1(|_, _| {})
            .with_deriv2(|_, _| {})
            .with_label("zero")
    }

    /// `f^i_j ≡ c[i*d + j]`.
    pub fn constant(n: usize, d: usize, c: Vec<f64>) -> Result<Self> {
        check_dim("constant field entries", n * d, c.len())?;
        Ok(Self::new(n, d, f64::INFINITY, move |_, out| out.copy_from_slice(&c))
            .with_deriv1(|_, _| {})
            .with_deriv2(|_, _| {})
            .with_label("constant"))
    }

    /// `f^i_j(y) = Σ_h m[j][i*n + h] y^h + b[i*d + j]`: one `n × n` matrix per
    /// driver component.
    pub fn linear(n: usize, d: usize, m: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        check_dim("linear field matrices", d, m.len())?;
        for mj in &m {
            check_dim("linear field matrix entries", n * n, mj.len())?;
        }
        check_dim("linear field offset", n * d, b.len())?;
        let m = Arc::new(m);
        let m1 = Arc::clone(&m);
        Ok(Self::new(n, d, f64::INFINITY, move |y, out| {
            for i in 0..n {
                for j in 0..d {
                    let mut s = b[i * d + j];
                    for h in 0..n {
                        s += m[j][i * n + h] * y[h];
                    }
                    out[i * d + j] = s;
                }
            }
        })
        .with_deriv1(move |_, out| {
            for i in 0..n {
                for j in 0..d {
                    for h in 0..n {
                        out[(i * d + j) * n + h] = m1[j][i * n + h];
                    }
                }
            }
        })
        .with_deriv2(|_, _| {})
        .with_label("linear"))
    }

    /// Scalar `f(y) = sigma y` (geometric Brownian motion for a Brownian driver).
    pub fn scalar_linear(sigma: f64) -> Self {
        Self::linear(1, 1, vec![vec![sigma]], vec![0.0])
            .expect("scalar dimensions")
            .with_label("scalar-linear")
    }

    /// `f^i_j(y) = a[i*d+j] sin(w[i*d+j] · y + phi[i*d+j])`, with `w` holding
    /// `n` frequencies per entry.
    pub fn sine(n: usize, d: usize, a: Vec<f64>, w: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        check_dim("sine amplitudes", n * d, a.len())?;
        check_dim("sine frequencies", n * d * n, w.len())?;
        check_dim("sine phases", n * d, phi.len())?;
        let p = Arc::new((a, w, phi));
        let arg = move |p: &(Vec<f64>, Vec<f64>, Vec<f64>), e: usize, y: &[f64]| {
            p.2[e] + (0..n).map(|h| p.1[e * n + h] * y[h]).sum::<f64>()
        };
        let (p0, p1, p2) = (Arc::clone(&p), Arc::clone(&p), p);
        Ok(Self::new(n, d, f64::INFINITY, move |y, out| {
            for e in 0..n * d {
                out[e] = p0.0[e] * arg(&p0, e, y).sin();
            }
        })
        .with_deriv1(move |y, out| {
            for e in 0..n * d {
                let c = p1.0[e] * arg(&p1, e, y).cos();
                for h in 0..n {
                    out[e * n + h] = c * p1.1[e * n + h];
                }
            }
        })
        .with_deriv2(move |y, out| {
            for e in 0..n * d {
                let s = -p2.0[e] * arg(&p2, e, y).sin();
                for q in 0..n {
                    for h in 0..n {
                        out[(e * n + q) * n + h] = s * p2.1[e * n + q] * p2.1[e * n + h];
                    }
                }
            }
        })
        .with_label("sine"))
    }
}

/// Central differences of a block-valued map: `out[e*n + h] = ∂_h F_e`.
fn central_diff(f: &(dyn Fn(&[f64], &mut [f64]) + Send + Sync), n: usize, m: usize, y: &[f64], out: &mut [f64]) {
    let mut yp = y.to_vec();
    let mut fp = vec![0.0; m];
    let mut fm = vec![0.0; m];
    for h in 0..n {
        let eps = fd_step(y[h]);
        yp[h] = y[h] + eps;
        fp.iter_mut().for_each(|v| *v = 0.0);
        f(&yp, &mut fp);
        yp[h] = y[h] - eps;
        fm.iter_mut().for_each(|v| *v = 0.0);
        f(&yp, &mut fm);
        yp[h] = y[h];
        for e in 0..m {
            out[e * n + h] = (fp[e] - fm[e]) / (2.0 * eps);
        }
    }
}

fn block_rel_err(exact: &[f64], approx: &[f64], floor: f64) -> f64 {
    let diff = exact.iter().zip(approx).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    let scale = exact.iter().fold(floor, |a, v| a.max(v.abs()));
    diff / scale
}

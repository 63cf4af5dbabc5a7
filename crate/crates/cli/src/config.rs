//! JSON experiment configurations, one struct per subcommand. Unknown keys
//! are rejected everywhere; defaults are filled in on parse so the manifest
//! echo is complete.

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use roughstep::drivers::{
    analytic_area, brownian_path, counterexample_field, counterexample_path, degenerate_area, ito_area,
    stratonovich_area, BrownianConfig, ChainCurve, CounterexampleConfig, ExplosionDriver, ExplosionOptions,
    PolynomialPath,
};
use roughstep::schemes::SchemeConfig;
use roughstep::{AreaProcess, DriverPath, Error, GrowthEnvelope, Partition, Result, VectorField};

fn one() -> f64 {
    1.0
}

fn substeps() -> usize {
    16
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AreaChoice {
    Ito,
    Stratonovich,
    None,
}

fn ito() -> AreaChoice {
    AreaChoice::Ito
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeSpec {
    /// `D(R) = R^d_exp`.
    pub d_exp: f64,
    /// `A(R) = R^a_exp`.
    pub a_exp: f64,
    pub beta: f64,
    pub p: f64,
}

impl EnvelopeSpec {
    pub fn build(&self) -> Result<GrowthEnvelope> {
        GrowthEnvelope::power_law(self.d_exp, self.a_exp, self.beta, self.p)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DriverSpec {
    Brownian {
        d: usize,
        #[serde(rename = "T", default = "one")]
        t_end: f64,
        levels: u32,
        #[serde(default = "substeps")]
        substeps: usize,
        #[serde(default = "ito")]
        area: AreaChoice,
    },
    /// `x^i(t) = Σ_k coeffs[i][k] t^k` on `steps` equal steps of `[0, T]`,
    /// with its exact area.
    Polynomial {
        coeffs: Vec<Vec<f64>>,
        steps: usize,
        #[serde(rename = "T", default = "one")]
        t_end: f64,
    },
    /// Nonuniqueness driver; carries its own field and, when `γ > 2`, the
    /// degenerate area.
    Counterexample(CounterexampleConfig),
    /// Two-sided Hölder curve sampled at `samples + 1` equal times.
    Chain {
        alpha: f64,
        depth: usize,
        samples: usize,
    },
    /// Blow-up driver; carries its own field.
    Explosion {
        envelope: EnvelopeSpec,
        #[serde(default)]
        options: ExplosionOptions,
    },
}

pub struct Driver {
    pub path: Arc<DriverPath>,
    pub area: Option<AreaProcess>,
    pub field: Option<VectorField>,
}

impl DriverSpec {
    pub fn stochastic(&self) -> bool {
        matches!(self, DriverSpec::Brownian { .. })
    }

    pub fn build(&self, seed: Option<u64>) -> Result<Driver> {
        match self {
            DriverSpec::Brownian {
                d,
                t_end,
                levels,
                substeps,
                area,
            } => {
                let seed = seed.ok_or_else(|| Error::InvalidConfig("brownian driver needs a seed".into()))?;
                let cfg = BrownianConfig::new(*d, *t_end, *levels, seed).with_substeps(*substeps);
                let path = Arc::new(brownian_path(&cfg)?);
                let area = match area {
                    AreaChoice::None => None,
                    AreaChoice::Ito => Some(ito_area(Arc::clone(&path), &cfg)?),
                    AreaChoice::Stratonovich => Some(stratonovich_area(&ito_area(Arc::clone(&path), &cfg)?)?),
                };
                Ok(Driver { path, area, field: None })
            }
            DriverSpec::Polynomial { coeffs, steps, t_end } => {
                let poly = PolynomialPath::new(coeffs.clone())?;
                let grid = Partition::uniform(0.0, *t_end, *steps)?;
                let area = analytic_area(&poly, grid)?;
                Ok(Driver {
                    path: area.shared_path(),
                    area: Some(area),
                    field: None,
                })
            }
            DriverSpec::Counterexample(config) => {
                let path = Arc::new(counterexample_path(config)?);
                let area = if config.second_order() {
                    Some(degenerate_area(Arc::clone(&path))?)
                } else {
                    None
                };
                Ok(Driver {
                    path,
                    area,
                    field: Some(counterexample_field(config)?),
                })
            }
            DriverSpec::Chain { alpha, depth, samples } => {
                let curve = ChainCurve::new(*alpha, *depth)?;
                Ok(Driver {
                    path: Arc::new(curve.sample(*samples)?),
                    area: None,
                    field: None,
                })
            }
            DriverSpec::Explosion { envelope, options } => {
                let env = envelope.build()?;
                let drv = ExplosionDriver::new(&env, env.p(), env.gamma(), options.clone())?;
                Ok(Driver {
                    path: Arc::new(drv.path()?),
                    area: None,
                    field: Some(drv.field()),
                })
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    Zero {
        n: usize,
        d: usize,
    },
    /// Row-major `n × d` entries.
    Constant {
        n: usize,
        d: usize,
        c: Vec<f64>,
    },
    /// One `n × n` matrix per driver component plus an `n × d` offset.
    Linear {
        n: usize,
        d: usize,
        m: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    ScalarLinear {
        sigma: f64,
    },
    Sine {
        n: usize,
        d: usize,
        a: Vec<f64>,
        w: Vec<f64>,
        phi: Vec<f64>,
    },
}

impl FieldSpec {
    pub fn build(&self) -> Result<VectorField> {
        match self.clone() {
            FieldSpec::Zero { n, d } => Ok(VectorField::zero(n, d)),
            FieldSpec::Constant { n, d, c } => VectorField::constant(n, d, c),
            FieldSpec::Linear { n, d, m, b } => VectorField::linear(n, d, m, b),
            FieldSpec::ScalarLinear { sigma } => Ok(VectorField::scalar_linear(sigma)),
            FieldSpec::Sine { n, d, a, w, phi } => VectorField::sine(n, d, a, w, phi),
        }
    }
}

/// The explicit field, else the one the driver carries.
pub fn resolve_field(spec: Option<&FieldSpec>, driver: &Driver) -> Result<VectorField> {
    match (spec, &driver.field) {
        (Some(s), None) => s.build(),
        (None, Some(f)) => Ok(f.clone()),
        (Some(_), Some(_)) => Err(Error::InvalidConfig("this driver supplies its own field; omit `field`".into())),
        (None, None) => Err(Error::InvalidConfig("missing `field`".into())),
    }
}

fn default_scheme() -> SchemeConfig {
    SchemeConfig::euler()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefectSpec {
    /// Pairs `(k, l)` with `l - k <= max_gap`.
    pub max_gap: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub seed: Option<u64>,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    pub driver: DriverSpec,
    pub field: Option<FieldSpec>,
    #[serde(default = "default_scheme")]
    pub scheme: SchemeConfig,
    pub y0: Vec<f64>,
    /// Uniform coarsening to this many steps; the driver grid when unset.
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub defect: Option<DefectSpec>,
    /// Treat a threshold crossing as a result rather than a failure.
    #[serde(default)]
    pub expect_explosion: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OracleSpec {
    /// `y0 exp(σW - σ²T/2)` for `f(y) = σy`.
    GbmIto { sigma: f64 },
    /// `y0 exp(σW)`.
    GbmStratonovich { sigma: f64 },
    /// Corrected scheme `factor` times finer than the finest `K`.
    FineCorrected { factor: usize },
    Terminal { value: Vec<f64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub seed: Option<u64>,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    pub driver: DriverSpec,
    pub field: Option<FieldSpec>,
    pub scheme: SchemeConfig,
    pub y0: Vec<f64>,
    pub ks: Vec<usize>,
    pub oracle: OracleSpec,
}

fn triples() -> usize {
    1000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChenCheckConfig {
    pub seed: Option<u64>,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    pub driver: DriverSpec,
    #[serde(default = "triples")]
    pub triples: usize,
    /// Riemann-sum refinements `N` for the full-horizon area, each dividing
    /// the driver steps.
    #[serde(default)]
    pub riemann: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Condition21Config {
    pub seed: Option<u64>,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    pub driver: DriverSpec,
    pub alpha: f64,
    pub beta: f64,
    pub levels: Vec<u32>,
}

fn example1() -> CounterexampleConfig {
    CounterexampleConfig::example1()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonuniquenessConfig {
    pub seed: Option<u64>,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(default = "example1")]
    pub counterexample: CounterexampleConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionGrid {
    pub d_exps: Vec<f64>,
    pub a_exps: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplosionConfig {
    pub seed: Option<u64>,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    pub envelope: EnvelopeSpec,
    #[serde(default)]
    pub options: ExplosionOptions,
    /// Extra power-law envelopes `(d_exp, a_exp)` with the same `β`, `p` to
    /// classify.
    #[serde(default)]
    pub grid: Option<CriterionGrid>,
}

fn pairs() -> usize {
    10_000
}

fn curve_samples() -> usize {
    4096
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    pub seed: Option<u64>,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    pub alpha: f64,
    pub depth: usize,
    /// Random pairs for the Hölder sandwich.
    #[serde(default = "pairs")]
    pub pairs: usize,
    /// Equal-time samples written to `curve.csv`.
    #[serde(default = "curve_samples")]
    pub samples: usize,
}

use std::fmt::Write as _;

use serde::Serialize;

use roughstep::analysis::{
    chen_check, condition21_stat, convergence_study, explosion_criterion, gbm_ito_oracle, gbm_stratonovich_oracle,
    holder_estimate, holder_sandwich, nonuniqueness_demo, riemann_area_recovery, ChenReport, CriterionReport,
    HolderSandwich, Oracle, RiemannRecovery, Verdict,
};
use roughstep::drivers::{ChainCurve, ExplosionDriver};
use roughstep::schemes::{defect, euler_solve, pairs_within, solve, SchemeConfig};
use roughstep::{control_fit, DriverPath, Error, GrowthEnvelope, SchemeKind};

use crate::artifacts::Artifacts;
use crate::config::*;

/// Why a run stopped; decides the exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonFinite { .. } | Error::Rejected(_) => Failure::Numerical(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

pub struct Outcome {
    pub artifacts: Artifacts,
    /// `ok`, or a numerical failure whose artifacts are still worth keeping.
    pub status: &'static str,
}

impl Outcome {
    fn ok(artifacts: Artifacts) -> Self {
        Self { artifacts, status: "ok" }
    }
}

type Run = Result<Outcome, Failure>;

/// Applies the `--seed` override and enforces a seed where randomness is used.
pub fn resolve_seed(config: &mut Option<u64>, over: Option<u64>, needed: bool, what: &str) -> Result<(), Failure> {
    if over.is_some() {
        *config = over;
    }
    if needed && config.is_none() {
        return Err(Failure::Config(format!("{what} is stochastic; `seed` is required")));
    }
    Ok(())
}

fn path_csv(path: &DriverPath) -> String {
    let mut s = String::from("t");
    for i in 1..=path.dim() {
        write!(s, ",x_{i}").unwrap();
    }
    s.push('\n');
    for k in 0..path.len() {
        write!(s, "{}", path.time(k)).unwrap();
        for v in path.value(k) {
            write!(s, ",{v}").unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn solve_cmd(cfg: &SolveConfig) -> Run {
    let drv = cfg.driver.build(cfg.seed)?;
    let f = resolve_field(cfg.field.as_ref(), &drv)?;
    let path = &drv.path;
    let part = match cfg.steps {
        None => path.grid().clone(),
        Some(k) => {
            let n = path.len() - 1;
            if k == 0 || n % k != 0 {
                return Err(Failure::Config(format!("steps={k} does not divide the {n} driver steps")));
            }
            path.grid().coarsen(n / k)?
        }
    };
    let area = drv.area.as_ref();
    let traj = solve(&f, path, area, &part, &cfg.y0, &cfg.scheme)?;
    let mut out = Artifacts::default();
    out.text("trajectory.csv", traj.to_csv());
    if let Some(spec) = &cfg.defect {
        let a = if cfg.scheme.scheme == SchemeKind::Corrected { area } else { None };
        let pairs = pairs_within(traj.len(), spec.max_gap);
        let rep = defect(&traj, &f, path, a, &pairs, cfg.scheme.gamma, cfg.scheme.p)?;
        out.json("defect.json", &rep);
    }
    let status = match traj.exploded_at() {
        Some(_) if !cfg.expect_explosion => "exploded",
        _ => "ok",
    };
    Ok(Outcome { artifacts: out, status })
}

pub fn convergence_cmd(cfg: &ConvergenceConfig) -> Run {
    let drv = cfg.driver.build(cfg.seed)?;
    let f = resolve_field(cfg.field.as_ref(), &drv)?;
    let scalar = |what: &str| {
        if cfg.y0.len() == 1 {
            Ok(cfg.y0[0])
        } else {
            Err(Failure::Config(format!("{what} oracle needs a scalar y0")))
        }
    };
    let oracle = match &cfg.oracle {
        OracleSpec::GbmIto { sigma } => gbm_ito_oracle(&drv.path, scalar("gbm-ito")?, *sigma),
        OracleSpec::GbmStratonovich { sigma } => gbm_stratonovich_oracle(&drv.path, scalar("gbm-stratonovich")?, *sigma),
        OracleSpec::FineCorrected { factor } => Oracle::FineCorrected { factor: *factor },
        OracleSpec::Terminal { value } => Oracle::Terminal {
            value: value.clone(),
            description: "terminal value from config".into(),
        },
    };
    let rep = convergence_study(&f, &drv.path, drv.area.as_ref(), &cfg.y0, &cfg.scheme, &cfg.ks, &oracle)?;
    let mut out = Artifacts::default();
    out.json("rate.json", &rep);
    Ok(Outcome::ok(out))
}

#[derive(Serialize)]
struct ChenArtifact {
    chen: ChenReport,
    riemann: Option<RiemannRecovery>,
    richardson_error: Option<f64>,
}

pub fn chen_cmd(cfg: &ChenCheckConfig) -> Run {
    let drv = cfg.driver.build(cfg.seed)?;
    let area = drv
        .area
        .as_ref()
        .ok_or_else(|| Failure::Config("driver has no area process".into()))?;
    let chen = chen_check(area, cfg.triples, cfg.seed.expect("seed resolved"))?;
    let riemann = if cfg.riemann.is_empty() {
        None
    } else {
        Some(riemann_area_recovery(area, 0, area.steps(), &cfg.riemann)?)
    };
    let richardson_error = riemann.as_ref().and_then(|r| r.richardson_error());
    let mut out = Artifacts::default();
    out.json(
        "chen.json",
        &ChenArtifact {
            chen,
            riemann,
            richardson_error,
        },
    );
    Ok(Outcome::ok(out))
}

pub fn condition21_cmd(cfg: &Condition21Config) -> Run {
    let drv = cfg.driver.build(cfg.seed)?;
    let area = drv
        .area
        .as_ref()
        .ok_or_else(|| Failure::Config("driver has no area process".into()))?;
    let stat = condition21_stat(area, cfg.alpha, cfg.beta, &cfg.levels)?;
    let mut out = Artifacts::default();
    out.json("condition21.json", &stat);
    Ok(Outcome::ok(out))
}

pub fn nonuniqueness_cmd(cfg: &NonuniquenessConfig) -> Run {
    let rep = nonuniqueness_demo(&cfg.counterexample)?;
    let (a, b) = (&rep.traj_a, &rep.traj_b);
    let mut csv = String::from("t,y_1_a,y_2_a,y_1_b,y_2_b\n");
    for k in 0..a.len() {
        let (ya, yb) = (a.state(k), b.state(k));
        writeln!(csv, "{},{},{},{},{}", a.time(k), ya[0], ya[1], yb[0], yb[1]).unwrap();
    }
    let mut out = Artifacts::default();
    out.text("trajectory.csv", csv);
    out.json("defect.json", &rep);
    Ok(Outcome::ok(out))
}

#[derive(Serialize)]
struct FirstExceed {
    threshold: f64,
    index: usize,
    time: f64,
    y: f64,
}

#[derive(Serialize)]
struct EulerRun {
    exploded_at: Option<usize>,
    time: Option<f64>,
    last: Vec<f64>,
}

#[derive(Serialize)]
struct GridEntry {
    d_exp: f64,
    a_exp: f64,
    /// Exponent `e` of the integrand `R^e`.
    exponent: f64,
    closed_form_converges: bool,
    verdict: Option<Verdict>,
    agrees: Option<bool>,
    error: Option<String>,
}

#[derive(Serialize)]
struct ExplosionArtifact {
    t_star: f64,
    r: f64,
    rho: (f64, f64),
    first_exceed: Option<FirstExceed>,
    control_constant: Option<f64>,
    euler: EulerRun,
    criterion: CriterionReport,
    grid: Vec<GridEntry>,
}

/// Exponent of `{A^{1-p} D^{p-1-βp}}^{1/β}` for `D = R^d`, `A = R^a`.
pub fn criterion_exponent(d: f64, a: f64, beta: f64, p: f64) -> f64 {
    ((1.0 - p) * a + (p - 1.0 - beta * p) * d) / beta
}

pub fn explosion_cmd(cfg: &ExplosionConfig) -> Run {
    let env = cfg.envelope.build()?;
    let (p, gamma) = (env.p(), env.gamma());
    let criterion = explosion_criterion(&env, p, gamma, cfg.options.r_max)?;
    let drv = ExplosionDriver::new(&env, p, gamma, cfg.options.clone())?;
    let traj = drv.trajectory()?;
    let path = drv.path()?;
    let first_exceed = (0..traj.len()).find(|&k| traj.state(k)[0] > roughstep::EXPLOSION_THRESHOLD).map(|k| FirstExceed {
        threshold: roughstep::EXPLOSION_THRESHOLD,
        index: k,
        time: traj.time(k),
        y: traj.state(k)[0],
    });
    let control_constant = control_fit(&path, p)?.constant();
    let e = euler_solve(&drv.field(), &path, path.grid(), &[1.0], &SchemeConfig::euler())?;
    let euler = EulerRun {
        exploded_at: e.exploded_at(),
        time: e.exploded_at().map(|k| e.time(k)),
        last: e.last().to_vec(),
    };
    let mut grid = Vec::new();
    if let Some(g) = &cfg.grid {
        for &d in &g.d_exps {
            for &a in &g.a_exps {
                let exponent = criterion_exponent(d, a, env.beta(), p);
                let closed = exponent < -1.0;
                let res = GrowthEnvelope::power_law(d, a, env.beta(), p)
                    .and_then(|e| explosion_criterion(&e, p, gamma, cfg.options.r_max));
                let (verdict, error) = match res {
                    Ok(r) => (Some(r.verdict), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                grid.push(GridEntry {
                    d_exp: d,
                    a_exp: a,
                    exponent,
                    closed_form_converges: closed,
                    verdict,
                    agrees: verdict.map(|v| (v == Verdict::Converges) == closed),
                    error,
                });
            }
        }
    }
    let mut out = Artifacts::default();
    out.text("trajectory.csv", traj.to_csv());
    out.json(
        "explosion.json",
        &ExplosionArtifact {
            t_star: drv.t_star(),
            r: drv.r(),
            rho: drv.rho(),
            first_exceed,
            control_constant,
            euler,
            criterion,
            grid,
        },
    );
    Ok(Outcome::ok(out))
}

#[derive(Serialize)]
struct CurveArtifact {
    sequence: Vec<(usize, usize)>,
    cells: String,
    sandwich: HolderSandwich,
    holder_estimate: f64,
}

pub fn curve_cmd(cfg: &CurveConfig) -> Run {
    let curve = ChainCurve::new(cfg.alpha, cfg.depth)?;
    let sandwich = holder_sandwich(&curve, cfg.pairs, cfg.seed.expect("seed resolved"))?;
    let path = curve.sample(cfg.samples)?;
    let mut out = Artifacts::default();
    out.text("curve.csv", path_csv(&path));
    out.json(
        "curve.json",
        &CurveArtifact {
            sequence: curve.sequence(),
            cells: curve.cells().to_string(),
            sandwich,
            holder_estimate: holder_estimate(&path)?,
        },
    );
    Ok(Outcome::ok(out))
}

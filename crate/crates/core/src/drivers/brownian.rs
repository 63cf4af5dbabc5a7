use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::area::{AreaKind, AreaProcess};
use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::path::DriverPath;

const PATH_STREAM: u64 = 0;
const BRIDGE_STREAM: u64 = 1;

fn default_substeps() -> usize {
    16
}

/// Standard `d`-dimensional Brownian motion on `[0, T]` sampled on `2^levels`
/// equal steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BrownianConfig {
    pub d: usize,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub levels: u32,
    pub seed: u64,
    /// Bridge refinement per fine interval for off-diagonal areas.
    #[serde(default = "default_substeps")]
    pub substeps: usize,
}

impl BrownianConfig {
    pub fn new(d: usize, t_end: f64, levels: u32, seed: u64) -> Self {
        Self {
            d,
            t_end,
            levels,
            seed,
            substeps: default_substeps(),
        }
    }

    pub fn with_substeps(mut self, r: usize) -> Self {
        self.substeps = r;
        self
    }

    pub fn steps(&self) -> usize {
        1usize << self.levels
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidConfig("Brownian dimension must be >= 1".into()));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidConfig(format!("T={} must be positive", self.t_end)));
        }
        if !(1..=24).contains(&self.levels) {
            return Err(Error::InvalidConfig(format!("levels={} outside 1..=24", self.levels)));
        }
        if self.substeps == 0 {
            return Err(Error::InvalidConfig("substeps must be >= 1".into()));
        }
        Ok(())
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// Independent Gaussian increments with variance equal to the step size,
/// `W(0) = 0`. Tagged with `p = 2.5`, `α = 0.4`.
pub fn brownian_path(cfg: &BrownianConfig) -> Result<DriverPath> {
    cfg.validate()?;
    let n = cfg.steps();
    let d = cfg.d;
    let grid = Partition::uniform(0.0, cfg.t_end, n)?;
    let sd = (cfg.t_end / n as f64).sqrt();
    let mut rng = cfg.rng(PATH_STREAM);
    let mut values = vec![0.0; (n + 1) * d];
    for k in 0..n {
        for i in 0..d {
            let z: f64 = StandardNormal.sample(&mut rng);
            values[(k + 1) * d + i] = values[k * d + i] + sd * z;
        }
    }
    DriverPath::from_flat(grid, d, values)?.with_regularity(0.4, 2.5)
}

fn check_pairing(path: &DriverPath, cfg: &BrownianConfig) -> Result<()> {
    cfg.validate()?;
    let g = path.grid();
    if path.dim() != cfg.d || g.steps() != cfg.steps() || !g.is_uniform() || (g.end() - cfg.t_end).abs() > 1e-12 * cfg.t_end {
        return Err(Error::InvalidConfig(format!(
            "path (d={}, {} steps on [{}, {}]) does not match Brownian config (d={}, {} steps on [0, {}])",
            path.dim(),
            g.steps(),
            g.start(),
            g.end(),
            cfg.d,
            cfg.steps(),
            cfg.t_end
        )));
    }
    Ok(())
}

/// Itô areas on every fine interval.
///
/// Diagonal entries are exact, `½(ΔW^j)^2 - ½h`. For `r != j` the symmetric
/// part is exact, `½ΔW^r ΔW^j`, and the Lévy part `½(S^{rj} - S^{jr})` comes
/// from left-point sums `S` along a Brownian bridge with `substeps` pieces
/// pinned to the interval's increments.
pub fn ito_area(path: Arc<DriverPath>, cfg: &BrownianConfig) -> Result<AreaProcess> {
    check_pairing(&path, cfg)?;
    let n = cfg.steps();
    let d = cfg.d;
    let r = cfg.substeps;
    let h = cfg.t_end / n as f64;
    let sub_sd = (h / r as f64).sqrt();
    let mut rng = cfg.rng(BRIDGE_STREAM);
    let mut fine = vec![0.0; n * d * d];
    let mut bridge = vec![0.0; (r + 1) * d];
    for k in 0..n {
        let dw = path.increment(k, k + 1);
        let block = &mut fine[k * d * d..(k + 1) * d * d];
        for j in 0..d {
            block[j * d + j] = 0.5 * dw[j] * dw[j] - 0.5 * h;
        }
        if d == 1 {
            continue;
        }
        // free walk, then pin the endpoint: b_i = S_i - (i/R)(S_R - ΔW)
        for i in 0..r {
            for c in 0..d {
                let z: f64 = StandardNormal.sample(&mut rng);
                bridge[(i + 1) * d + c] = bridge[i * d + c] + sub_sd * z;
            }
        }
        for c in 0..d {
            let gap = bridge[r * d + c] - dw[c];
            for i in 1..=r {
                bridge[i * d + c] -= gap * i as f64 / r as f64;
            }
        }
        for a in 0..d {
            for b in a + 1..d {
                let (mut sab, mut sba) = (0.0, 0.0);
                for i in 0..r {
                    sab += bridge[i * d + a] * (bridge[(i + 1) * d + b] - bridge[i * d + b]);
                    sba += bridge[i * d + b] * (bridge[(i + 1) * d + a] - bridge[i * d + a]);
                }
                let levy = 0.5 * (sab - sba);
                let sym = 0.5 * dw[a] * dw[b];
                block[a * d + b] = sym + levy;
                block[b * d + a] = sym - levy;
            }
        }
    }
    AreaProcess::from_fine(path, AreaKind::Ito, fine)
}

/// Adds `(t - s)/2` to the diagonal. Off-diagonal entries are untouched and
/// [`ito_from_stratonovich`] undoes the shift bitwise.
pub fn stratonovich_area(ito: &AreaProcess) -> Result<AreaProcess> {
    if ito.kind() != AreaKind::Ito {
        return Err(Error::AreaKind {
            expected: AreaKind::Ito.to_string(),
            got: ito.kind().to_string(),
        });
    }
    let d = ito.dim();
    let mut shift = vec![0.0; d * d];
    for j in 0..d {
        shift[j * d + j] = 0.5;
    }
    ito.with_drift(AreaKind::Stratonovich, shift)
}

/// Inverse of [`stratonovich_area`].
pub fn ito_from_stratonovich(strat: &AreaProcess) -> Result<AreaProcess> {
    if strat.kind() != AreaKind::Stratonovich {
        return Err(Error::AreaKind {
            expected: AreaKind::Stratonovich.to_string(),
            got: strat.kind().to_string(),
        });
    }
    Ok(strat.without_drift(AreaKind::Ito))
}

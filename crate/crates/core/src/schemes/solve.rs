use crate::area::AreaProcess;
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::partition::Partition;
use crate::path::DriverPath;
use crate::trajectory::{SchemeKind, Trajectory};

use super::{guard, step, Guard, SchemeConfig, Steps};

/// Dispatches on `cfg.scheme`; the corrected scheme needs `area`.
pub fn solve(
    f: &VectorField,
    path: &DriverPath,
    area: Option<&AreaProcess>,
    part: &Partition,
    y0: &[f64],
    cfg: &SchemeConfig,
) -> Result<Trajectory> {
    match (cfg.scheme, area) {
        (SchemeKind::Euler, _) => euler_solve(f, path, part, y0, cfg),
        (SchemeKind::Corrected, Some(a)) => corrected_solve(f, path, a, part, y0, cfg),
        (SchemeKind::Corrected, None) => Err(Error::InvalidConfig("corrected scheme needs an area process".into())),
        (s, _) => Err(Error::InvalidConfig(format!("scheme {s:?} is not a base scheme"))),
    }
}

/// `y_{k+1} = y_k + f(y_k) Δx_k`.
pub fn euler_solve(
    f: &VectorField,
    path: &DriverPath,
    part: &Partition,
    y0: &[f64],
    cfg: &SchemeConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let steps = Steps::new(f, path, None, part, y0)?;
    run(f, &steps, y0, cfg, SchemeKind::Euler, false)
}

/// `y_{k+1} = y_k + f(y_k) Δx_k + g(y_k) A(t_k, t_{k+1})` with
/// `g^i_{rj} = f^h_r ∂_h f^i_j`.
pub fn corrected_solve(
    f: &VectorField,
    path: &DriverPath,
    area: &AreaProcess,
    part: &Partition,
    y0: &[f64],
    cfg: &SchemeConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    if !f.has_deriv1() {
        return Err(Error::MissingCapability("first derivatives"));
    }
    let steps = Steps::new(f, path, Some(area), part, y0)?;
    run(f, &steps, y0, cfg, SchemeKind::Corrected, true)
}

fn run(
    f: &VectorField,
    steps: &Steps<'_>,
    y0: &[f64],
    cfg: &SchemeConfig,
    kind: SchemeKind,
    corrected: bool,
) -> Result<Trajectory> {
    let (n, d) = (f.n(), f.d());
    let mut states = Vec::with_capacity(n * (steps.len() + 1));
    states.extend_from_slice(y0);
    let mut exploded = match guard(y0, 0, cfg.threshold)? {
        Guard::Exploded => Some(0),
        Guard::Continue => None,
    };
    let mut fv = vec![0.0; n * d];
    let mut df = vec![0.0; n * d * n];
    let mut g = vec![0.0; n * d * d];
    let mut y = y0.to_vec();
    let mut k = 0;
    while exploded.is_none() && k < steps.len() {
        f.eval_into(&y, &mut fv);
        let dx = steps.dx(k);
        let next = if corrected {
            f.deriv1_into(&y, &mut df)?;
            f.correction_from(&fv, &df, &mut g);
            let a = steps.area(k);
            step(&y, &fv, &dx, Some((&g, &a)))
        } else {
            step(&y, &fv, &dx, None)
        };
        k += 1;
        if let Guard::Exploded = guard(&next, k, cfg.threshold)? {
            exploded = Some(k);
        }
        states.extend_from_slice(&next);
        y = next;
    }
    let part = Partition::new(steps.idx.iter().map(|&i| steps.path.time(i)).collect())?;
    Trajectory::new(part, n, states, exploded, kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::area::AreaKind;
    use crate::drivers::{brownian_path, ito_area, BrownianConfig};
    use proptest::prelude::*;
    use std::sync::Arc;

    fn bm(levels: u32, seed: u64) -> (Arc<DriverPath>, AreaProcess) {
        let cfg = BrownianConfig::new(1, 1.0, levels, seed).with_substeps(1);
        let p = Arc::new(brownian_path(&cfg).unwrap());
        let a = ito_area(Arc::clone(&p), &cfg).unwrap();
        (p, a)
    }

    #[test]
    fn zero_field_is_constant() {
        let (p, _) = bm(6, 1);
        let f = VectorField::zero(2, 1);
        let t = euler_solve(&f, &p, p.grid(), &[1.0, -2.0], &SchemeConfig::euler()).unwrap();
        for k in 0..t.len() {
            assert_eq!(t.state(k), &[1.0, -2.0]);
        }
    }

    #[test]
    fn unit_field_telescopes() {
        let (p, _) = bm(8, 2);
        let f = VectorField::constant(1, 1, vec![1.0]).unwrap();
        let t = euler_solve(&f, &p, p.grid(), &[0.5], &SchemeConfig::euler()).unwrap();
        for k in 0..t.len() {
            assert!((t.state(k)[0] - (0.5 + p.value(k)[0] - p.value(0)[0])).abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_milstein_step() {
        let (p, a) = bm(4, 3);
        let f = VectorField::scalar_linear(1.0);
        let t = corrected_solve(&f, &p, &a, p.grid(), &[1.0], &SchemeConfig::corrected()).unwrap();
        let h = 1.0 / 16.0;
        let mut y = 1.0;
        for k in 0..16 {
            let dw = p.value(k + 1)[0] - p.value(k)[0];
            y *= 1.0 + dw + 0.5 * (dw * dw - h);
            assert!((t.state(k + 1)[0] - y).abs() < 1e-12 * y.abs().max(1.0));
        }
    }

    #[test]
    fn constant_field_corrected_equals_euler() {
        let cfg = BrownianConfig::new(2, 1.0, 8, 9).with_substeps(4);
        let p = Arc::new(brownian_path(&cfg).unwrap());
        let a = ito_area(Arc::clone(&p), &cfg).unwrap();
        let f = VectorField::constant(3, 2, vec![1.0, 2.0, -1.0, 0.5, 0.0, 3.0]).unwrap();
        let part = p.grid().coarsen(4).unwrap();
        let e = euler_solve(&f, &p, &part, &[0.0; 3], &SchemeConfig::euler()).unwrap();
        let c = corrected_solve(&f, &p, &a, &part, &[0.0; 3], &SchemeConfig::corrected()).unwrap();
        assert_eq!(e.states(), c.states());
    }

    #[test]
    fn explosion_truncates() {
        let grid = Partition::uniform(0.0, 2.0, 200).unwrap();
        let p = DriverPath::from_fn(grid, 1, |t| vec![t]).unwrap();
        // y' = y^2 from 1 blows up at t = 1; Euler lags but still crosses
        let f = VectorField::new(1, 1, 3.0, |y: &[f64], o: &mut [f64]| o[0] = y[0] * y[0]);
        let cfg = SchemeConfig::euler().with_threshold(1e3);
        let t = euler_solve(&f, &p, p.grid(), &[1.0], &cfg).unwrap();
        let k = t.exploded_at().unwrap();
        assert_eq!(t.len(), k + 1);
        assert!(t.last()[0] > 1e3 && t.state(k - 1)[0] <= 1e3);
    }

    #[test]
    fn non_finite_aborts() {
        let grid = Partition::uniform(0.0, 1.0, 10).unwrap();
        let p = DriverPath::from_fn(grid, 1, |t| vec![t]).unwrap();
        let f = VectorField::new(1, 1, 3.0, |y: &[f64], o: &mut [f64]| o[0] = (y[0] - 2.0).ln());
        let r = euler_solve(&f, &p, p.grid(), &[1.0], &SchemeConfig::euler().with_threshold(f64::INFINITY));
        assert_eq!(r.unwrap_err(), Error::NonFinite { step: 1 });
    }

    #[test]
    fn errors() {
        let (p, a) = bm(4, 3);
        let f = VectorField::new(1, 1, 3.0, |y: &[f64], o: &mut [f64]| o[0] = y[0]);
        assert!(matches!(
            corrected_solve(&f, &p, &a, p.grid(), &[1.0], &SchemeConfig::corrected()),
            Err(Error::MissingCapability(_))
        ));
        let f = VectorField::scalar_linear(1.0);
        assert!(matches!(
            euler_solve(&f, &p, p.grid(), &[1.0, 2.0], &SchemeConfig::euler()),
            Err(Error::DimensionMismatch { .. })
        ));
        let off = Partition::new(vec![0.0, 0.01, 1.0]).unwrap();
        assert!(matches!(
            euler_solve(&f, &p, &off, &[1.0], &SchemeConfig::euler()),
            Err(Error::OffGrid(_))
        ));
        assert!(solve(&f, &p, None, p.grid(), &[1.0], &SchemeConfig::corrected()).is_err());
        let _ = AreaKind::Ito;
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn restart_is_exact(seed in 0u64..1000, cut in 1usize..63, corrected in any::<bool>()) {
            let cfg = BrownianConfig::new(2, 1.0, 6, seed).with_substeps(2);
            let p = Arc::new(brownian_path(&cfg).unwrap());
            let a = ito_area(Arc::clone(&p), &cfg).unwrap();
            let f = VectorField::sine(
                2,
                2,
                vec![0.7, -0.3, 0.5, 0.2],
                vec![1.1, 0.4, -0.3, 0.8, 0.2, 0.9, 1.0, -0.6],
                vec![0.2, 1.3, -0.5, 0.0],
            )
            .unwrap();
            let sc = if corrected { SchemeConfig::corrected() } else { SchemeConfig::euler() };
            let area = corrected.then_some(&a);
            let whole = solve(&f, &p, area, p.grid(), &[0.3, -0.1], &sc).unwrap();
            let tc = p.time(cut);
            let first = solve(&f, &p, area, &p.grid().restrict(0.0, tc).unwrap(), &[0.3, -0.1], &sc).unwrap();
            let second = solve(&f, &p, area, &p.grid().restrict(tc, 1.0).unwrap(), first.last(), &sc).unwrap();
            prop_assert_eq!(first.states(), &whole.states()[..2 * (cut + 1)]);
            prop_assert_eq!(second.states(), &whole.states()[2 * cut..]);
        }

        #[test]
        fn zero_correction_matches_euler(seed in 0u64..1000) {
            let cfg = BrownianConfig::new(2, 1.0, 6, seed).with_substeps(2);
            let p = Arc::new(brownian_path(&cfg).unwrap());
            let a = ito_area(Arc::clone(&p), &cfg).unwrap();
            // f^1 = (0, y^2), f^2 = (0, 0): only ∂_2 f^1_2 is nonzero and f^2_r = 0, so g ≡ 0
            let f = VectorField::new(2, 2, 3.0, |y: &[f64], o: &mut [f64]| o[1] = y[1])
                .with_deriv1(|_y: &[f64], o: &mut [f64]| o[3] = 1.0);
            let e = euler_solve(&f, &p, p.grid(), &[0.2, 0.7], &SchemeConfig::euler()).unwrap();
            let c = corrected_solve(&f, &p, &a, p.grid(), &[0.2, 0.7], &SchemeConfig::corrected()).unwrap();
            prop_assert_eq!(e.states(), c.states());
        }
    }
}

//! Frozen values from seeded runs. Each was first checked against an
//! independent computation in the test body or in the unit tests, then
//! recorded here to catch drift in the generators.

use std::sync::Arc;

use roughstep::drivers::{brownian_path, example1_driver, ito_area, BrownianConfig, CounterexampleConfig};
use roughstep::{control_fit, DriverPath};

fn brute_control(path: &DriverPath, p: f64) -> f64 {
    let t = path.grid().times();
    let mut c: f64 = 0.0;
    for k in 0..path.len() {
        for m in k + 1..path.len() {
            c = c.max(path.increment_sup(k, m).powf(p) / (t[m] - t[k]));
        }
    }
    c
}

#[test]
fn brownian_control_constant() {
    let path = brownian_path(&BrownianConfig::new(1, 1.0, 12, 42)).unwrap();
    let c = control_fit(&path, 2.5).unwrap().constant().unwrap();
    assert_eq!(c, brute_control(&path, 2.5));
    assert_eq!(c, GOLDEN_BROWNIAN_C);
}

#[test]
fn brownian_first_increments() {
    let cfg = BrownianConfig::new(2, 1.0, 12, 42);
    let path = Arc::new(brownian_path(&cfg).unwrap());
    assert_eq!(path.value(0), &[0.0, 0.0]);
    assert_eq!(path.value(1), GOLDEN_W1);
    let a = ito_area(Arc::clone(&path), &cfg).unwrap();
    let full = a.area(0, 4096);
    // symmetric part is the product of increments
    let w = path.value(4096);
    assert!((full[1] + full[2] - w[0] * w[1]).abs() < 1e-12);
    assert_eq!(full[1], GOLDEN_LEVY_01);
}

#[test]
fn example1_control_constant() {
    let cfg = CounterexampleConfig::example1();
    let (path, _) = example1_driver(&cfg).unwrap();
    let c = control_fit(&path, cfg.p).unwrap().constant().unwrap();
    assert!(c.is_finite());
    assert!(c <= GOLDEN_EXAMPLE1_C * (1.0 + 1e-12), "{c}");
}

const GOLDEN_BROWNIAN_C: f64 = 10.083861178030103;
const GOLDEN_W1: &[f64] = &[0.007468456849234715, 0.020844853284871998];
const GOLDEN_LEVY_01: f64 = -0.3949801290175775;
const GOLDEN_EXAMPLE1_C: f64 = 5.337154511266086;

//! Driving signals and their areas.

pub mod brownian;
pub mod chain;
pub mod counterexample;
pub mod degenerate;
pub mod explosion;
pub mod polynomial;

pub use brownian::{brownian_path, ito_area, ito_from_stratonovich, stratonovich_area, BrownianConfig};
pub use chain::{chain_sequence, holder_chain_curve, ChainCurve};
pub use counterexample::{counterexample_field, counterexample_path, example1_driver, CounterexampleConfig};
pub use degenerate::degenerate_area;
pub use polynomial::{analytic_area, PolynomialPath};
pub use explosion::{explosion_driver, ExplosionDriver, ExplosionOptions};

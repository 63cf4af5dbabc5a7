//! Discrete approximation of differential equations `dy = f(y) dx` driven by
//! rough paths.
//!
//! The crate provides the plain Euler recurrence
//! `y_{k+1} = y_k + f(y_k)(x_{k+1} - x_k)` and the area-corrected recurrence
//! that adds `f^h_r ∂_h f^i_j (y_k) A^{rj}(t_k, t_{k+1})`, together with the
//! driving signals they need and tools to check their behaviour:
//!
//! - [`drivers`]: Brownian paths with Itô and Stratonovich areas, polynomial
//!   paths with closed-form areas, degenerate areas, a nonuniqueness
//!   counterexample, a two-sided Hölder curve and an explosion driver.
//! - [`schemes`]: Euler, corrected, derivative-flow and extended solvers, and
//!   the defect functionals `I` and `J`.
//! - [`analysis`]: convergence rates, the area cancellation statistic,
//!   Riemann-sum area recovery, the explosion criterion, nonuniqueness and
//!   Hölder estimates.
//!
//! Coarse areas are always Chen combinations of fine ones, so
//! `A(s,u) = A(s,t) + A(t,u) + Δx(s,t) ⊗ Δx(t,u)` holds by construction.

// negated float comparisons reject NaN on purpose; index loops mirror the formulas
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod area;
pub mod control;
pub mod drivers;
pub mod envelope;
pub mod error;
pub mod field;
pub mod io;
pub mod partition;
pub mod path;
pub mod quadrature;
pub mod schemes;
pub mod trajectory;

pub use area::{chen_combine, AreaKind, AreaProcess};
pub use control::{control_fit, control_fit_with_area, ControlModulus};
pub use envelope::GrowthEnvelope;
pub use error::{Error, Result};
pub use field::VectorField;
pub use partition::Partition;
pub use path::DriverPath;
pub use trajectory::{DefectKind, DefectReport, SchemeKind, Trajectory};

/// States whose Euclidean norm exceeds this halt a solve.
pub const EXPLOSION_THRESHOLD: f64 = 1e6;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

//! Verifiers built on the schemes and drivers.

pub mod chen;
pub mod condition21;
pub mod convergence;
pub mod explosion;
pub mod holder;
pub mod nonuniqueness;
pub mod riemann;

pub use chen::{chen_check, ChenReport};
pub use condition21::{condition21_ratio, condition21_stat, Argmax, ConditionStat, WINDOW_CAP};
pub use convergence::{convergence_study, fit_rate, gbm_ito_oracle, gbm_stratonovich_oracle, Oracle, RateReport};
pub use explosion::{explosion_criterion, CriterionReport, Verdict};
pub use holder::{holder_estimate, holder_sandwich, HolderSandwich};
pub use nonuniqueness::{nonuniqueness_demo, NonuniquenessReport};
pub use riemann::{riemann_area_recovery, RiemannRecovery};

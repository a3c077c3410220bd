//! Bernstein-Kantorovich polynomials and numerical checks of semi-discrete
//! Grüss-Voronovskaya-type estimates.
//!
//! The crate is split along the lines of the computation:
//!
//! - [`function_space`]: the analytic test-function corpus, sup-norm and
//!   modulus-of-continuity estimators, divided differences.
//! - [`kantorovich`]: Bernstein basis, Gauss-Legendre cell quadrature and the
//!   operator `K_n` itself, with closed-form moments as an oracle path.
//! - [`gruss`]: both sides of the two-point Grüss-Voronovskaya inequality, its
//!   perturbed Grüss corollary, and the pointwise `|K_n h - h|` bound.
//! - [`asymptotics`]: sup-norm sweeps over `n` and log-log rate fits.
//! - [`cli`]: configuration, orchestration and report emission for `kgruss`.

pub mod asymptotics;
pub mod cli;
mod error;
pub mod function_space;
pub mod gruss;
pub mod kantorovich;
mod summation;

pub use asymptotics::{
    default_rate_degrees, fit_rate, gruss_norm_sup, gv_residual_sup, nfn_limit_residual, run_sweep,
    RateFit, Residual, ResidualKind, SweepPoint, SweepResult,
};
pub use error::{Error, Result};
pub use function_space::{
    corpus, divided_difference, lookup, modulus_lower, modulus_upper, sup_norm_lower, GridSpec,
    SmoothFunction,
};
pub use gruss::{
    e_n, f_n, BoundCheckRecord, CheckReport, EstimateConfig, GrussEstimator, NormMode, OmegaMode,
};
pub use kantorovich::{
    bernstein_basis, bernstein_weights, cell_mean, kantorovich_apply, kantorovich_moment_exact,
    EvaluationMethod, KantorovichOperator, OperatorEvaluation, QuadratureRule, MAX_DEGREE,
};

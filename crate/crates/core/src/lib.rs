//! Shepard's model (compact-support Nadaraya-Watson) on the unit torus `[0, 1)`, with
//! an `O(n)` leave-one-out cross-validation score, mesh-norm geometry, and explicit
//! concentration bounds for the score and the risk.
//!
//! ```
//! use shepard_cv::{loo_cv_fast, sample_uniform, KernelFamily, SampleSet, TestFunction, UndefinedPolicy};
//!
//! let f = TestFunction::sine();
//! let samples = SampleSet::from_function(sample_uniform(7, 500).unwrap(), &f);
//! let kernel = KernelFamily::hat(40.0).unwrap();
//! let cv = loo_cv_fast(&samples, &kernel, UndefinedPolicy::NearestNode).unwrap();
//! assert!(cv.score >= 0.0);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod cross_validation;
pub mod error;
pub mod experiment;
pub mod io;
pub mod kernels;
pub mod shepard;
pub mod torus;

pub use bounds::{
    epsilon_bound, gamma_gumbel, gamma_upper, gamma_upper_or_gumbel, gamma_upper_with,
    quantile_bound_shepard, tail_probability, validity_threshold, BoundParams, GammaMethod,
    GammaOptions, GammaResult, TailKind, ALPHA_CV, ALPHA_DIFF, ALPHA_RISK,
};
pub use cross_validation::{loo_cv_fast, loo_cv_naive, CvResult};
pub use error::{Error, Result};
pub use experiment::{
    estimate_event_probability, quantile, run_experiment, AggregateRow, ExperimentConfig,
    ExperimentRecord, GammaSource, TestFunctionSpec,
};
pub use kernels::{hat_kernel, KernelFamily};
pub use shepard::{fit, SampleSet, ShepardModel, TestFunction, UndefinedPolicy};
pub use torus::{
    loo_mesh_norms, mesh_norm, sample_uniform, torus_distance, xi_membership, NodeSet, TorusPoint,
};

//! Conditional extreme value analysis on standard Laplace margins.
//!
//! The crate provides, at desk scale:
//!
//! * [`margins`] — Laplace/Pareto/Gumbel distribution kernels, the exact
//!   Pareto→Laplace change of variables and a rank-based transform for
//!   external data;
//! * [`examples`] — exact samplers, closed-form marginals and Laplace-scale
//!   transforms for five bivariate mixture families whose conditional tails
//!   misbehave in instructive ways;
//! * [`limits`] — norming-function registry, empirical conditional-CDF
//!   estimation under random norming, limiting laws, and diagnostics for
//!   mass escaping to −∞, oscillating conditional probabilities, tail
//!   dependence (χ) and the reverse conditional of the four-component
//!   mixture;
//! * [`fit`] — canonical-model fitting (a(x) = αx, b(x) = x^β) by Gaussian
//!   pseudo-likelihood, with misfit diagnostics that expose scale functions
//!   outside the power family.
//!
//! Everything is deterministic given a seed; samplers split one master seed
//! into independent counter-indexed streams, so results do not depend on
//! thread count.

pub mod error;
pub mod examples;
pub mod fit;
pub mod limits;
pub mod margins;
pub mod stats;

pub use error::{CevmError, Result};
pub use examples::{ExampleId, LabeledSample};

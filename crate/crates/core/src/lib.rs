//! Predictable feature analysis with supplementary information.
//!
//! The crate extracts linearly predictable features from a multivariate
//! signal, fits autoregressive predictors that additionally consume a
//! control signal, inverts those predictors into norm-constrained control
//! commands, and drives a point agent through a 2D environment with them.
//!
//! Pipeline overview:
//!
//! - [`preprocessing`]: monomial expansion and sphering
//! - [`sfa`]: slow feature analysis baseline
//! - [`pfa`]: predictable feature analysis on the sphered signal
//! - [`pfax`]: PFA with a supplementary (control) signal
//! - [`control`]: goal features and constrained command synthesis
//! - [`isolated`]: alternating extraction of single AR components
//! - [`sim`]: environment, sensors, random walks and navigation
//! - [`experiment`]: configuration files, artifacts and the CLI commands

pub mod control;
pub mod error;
pub mod experiment;
pub mod isolated;
pub mod pfa;
pub mod pfax;
pub mod preprocessing;
pub mod sfa;
pub mod sim;
pub mod signal;

pub use error::{PfaxError, Result};

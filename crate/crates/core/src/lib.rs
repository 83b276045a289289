//! Joint 2-D direction-of-arrival and angular-spread estimation for
//! incoherently distributed sources on uniform rectangular arrays.
//!
//! Modules, bottom-up:
//! - [`array`]: geometry, manifold, derivatives, subarray selection.
//! - [`sim`]: seeded snapshot simulator.
//! - [`spectral`]: sample covariance and subspace split.
//! - [`esprit`]: the closed-form three-subarray estimator.
//! - [`dispersion`]: Gaussian-kernel covariance model.
//! - [`crb`]: approximate Cramér-Rao bound.
//! - [`baselines`]: grid-search reference estimators.
//! - [`bench`]: Monte Carlo harness, complexity table, CSV/SVG output.
//!
//! Angles are radians everywhere except the bench config boundary.

pub mod array;
pub mod baselines;
pub mod bench;
pub mod crb;
pub mod dispersion;
pub mod error;
pub mod esprit;
pub mod linalg;
pub mod rng;
pub mod sim;
pub mod spectral;

pub use array::{AngPair, UraGeometry};
pub use error::{Error, Result};
pub use esprit::{estimate, AngularEstimate};
pub use faer::c64;
pub use sim::{generate, SnapshotSet, SourceParams};

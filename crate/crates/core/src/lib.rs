//! Linear Turing-instability analysis and nonlinear onset experiments for
//! two-species reaction-diffusion systems on `(0, π)^d` with no-flux
//! boundaries.
//!
//! The crate is organised bottom-up:
//!
//! - [`kinetics`]: reaction systems, steady states, linearization
//! - [`linear_analysis`]: dispersion relation, Turing test, growing modes
//! - [`spectral`]: cosine transforms, norms, exact linear propagator
//! - [`simulator`]: pseudospectral time stepping of the full system
//! - [`verification`]: escape time, deviation reports, constant fits
//! - [`config`], [`report`] and [`csv`]: run configuration and tabular output

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod csv;
pub mod kinetics;
pub mod linear_analysis;
pub mod report;
pub mod simulator;
pub mod spectral;
pub mod verification;

pub use kinetics::{Linearization, ReactionSystem};
pub use linear_analysis::{GrowingModeSummary, ModeEigen, ModeIndex};
pub use spectral::{Coefficients, Grid, GridValues, SpectralField};

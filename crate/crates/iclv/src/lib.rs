//! Integrated choice and latent variable (ICLV) modeling for electric-vehicle
//! stated-preference data.
//!
//! The crate covers the full pipeline:
//!
//! * [`model`] — domain types and the pure probability kernels: structural
//!   latent equations, ordered-logit measurement of Likert indicators, and
//!   an MNL choice kernel with latent-attribute interactions;
//! * [`draws`] — deterministic quasi-random / pseudo-random normal draws;
//! * [`likelihood`] — the joint simulated log-likelihood over panel data;
//! * [`estimation`] — maximum simulated likelihood with identification
//!   constraints, numerical gradients and standard errors;
//! * [`synthetic`] — stated-preference design generation, D-error scoring
//!   and dataset simulation for recovery studies;
//! * [`policy`] — cohort construction and policy scenario sweeps;
//! * [`formats`] — the CSV/JSON file formats and run manifests used by the
//!   `iclv` command-line tool.

pub mod draws;
pub mod error;
pub mod estimation;
pub mod formats;
pub mod likelihood;
pub mod model;
pub mod policy;
pub mod synthetic;

pub use error::{Error, Result};

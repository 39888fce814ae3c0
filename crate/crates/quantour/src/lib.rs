//! Bayesian multiple-output directional quantile regression.
//!
//! Fits one asymmetric-Laplace quantile regression per direction on the unit
//! circle, intersects the fitted upper halfplanes into convex quantile
//! regions, and ships the ATP match-data pipeline that feeds the model with
//! (relative points won, minutes) responses for Djokovic, Federer and Nadal.
//!
//! Modules mirror the pipeline: [`ingest`] parses and filters the match CSV
//! corpus, [`design`] encodes covariates and standardizes the response,
//! [`sampler`] runs the per-direction Gibbs sweep, [`geometry`] intersects
//! halfplanes into regions, [`engine`] orchestrates full fits and contour
//! sets, [`oracle`] holds brute-force references used by tests and the
//! `validate` subcommand, and [`cli`] implements the command-line front end.

pub mod cli;
pub mod design;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod ingest;
pub mod manifest;
pub mod mat;
pub mod oracle;
pub mod sampler;
pub mod svg;
pub mod validate;

pub use error::{Error, Result};

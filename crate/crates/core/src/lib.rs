//! Coverage analytics and Monte Carlo cross-validation for a UAV-assisted
//! cellular network whose ground base stations inside a circular
//! malfunction area are out of service.
//!
//! A UAV hovers above the centre of the malfunction disc. Each user in the
//! disc is served by the nearest surviving ground base station, by the UAV,
//! or by both cooperatively, depending on how the average received powers
//! compare under a cooperation parameter `delta`. The crate evaluates the
//! resulting coverage probabilities, expected service-region areas and
//! normalized spectral efficiency in closed form (with numerical
//! quadrature), and provides a seeded network simulator that estimates the
//! same quantities empirically.
//!
//! Module map:
//!
//! - [`params`]: the shared parameter set and its flat TOML form.
//! - [`numerics`]: incomplete beta, Chebyshev nodes, adaptive quadrature.
//! - [`geometry`]: nearest ground-BS distance law around the hole.
//! - [`channel`]: LoS probability, path-loss gains, region assignment.
//! - [`interference`]: Laplace transform of the residual interference and
//!   its derivatives.
//! - [`coverage`]: per-region coverage, area fractions, NSE, benchmarks.
//! - [`montecarlo`]: the seeded simulator and its estimators.
//! - [`cli`]: sweep driver behind the `uavcov` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod cli;
pub mod coverage;
pub mod error;
pub mod geometry;
pub mod interference;
pub mod montecarlo;
pub mod numerics;
pub mod params;

pub use channel::{LinkState, LinkTag, RegionLabel};
pub use coverage::{AreaFractions, CoverageBreakdown, Scheme};
pub use error::{Error, Result};
pub use params::{SystemParams, ValidationReport};

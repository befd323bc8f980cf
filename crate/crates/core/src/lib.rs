//! Geometry and dynamics of the planar n-body problem with homogeneous
//! pairwise potentials, viewed through the energy-conformal metric
//! `(h + U) <., .>` on configuration space.
//!
//! The crate provides:
//!
//! - mass-weighted Hermitian products and the classical first integrals
//!   ([`mass_geometry`]),
//! - the potential `U = (1/alpha) sum m_i m_j / r_ij^alpha`, its gradient
//!   and Hessian action ([`potential`]),
//! - central configurations via a constrained Newton solve
//!   ([`central_config`]),
//! - sectional and holomorphic sectional curvature of the conformal
//!   metric, with a curvature characterization of centrality
//!   ([`curvature`]),
//! - an adaptive Runge-Kutta integrator with dense output ([`ode`]) and
//!   n-body trajectories with conserved-quantity tracking ([`dynamics`]),
//! - curvature along trajectories and constant-potential diagnostics
//!   ([`saari`]),
//! - linear stability of relative equilibria: analytic return spectra and
//!   numerical monodromy ([`stability`]),
//! - finite-difference cross-checks of gradients, Hessians, and curvature
//!   ([`fdcheck`]),
//! - JSON configuration input/output ([`config_io`]) and reference
//!   configurations for tests ([`fixtures`]).

pub mod central_config;
pub mod config_io;
pub mod curvature;
pub mod dynamics;
pub mod error;
pub mod fdcheck;
pub mod fixtures;
pub mod mass_geometry;
pub mod ode;
pub mod potential;
pub mod saari;
pub mod stability;
pub mod tolerances;

pub use error::{Error, Result};

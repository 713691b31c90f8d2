//! Multi-phase level-set simulation of capillarity-driven grain-boundary
//! and triple-junction migration in 2D.
//!
//! Each grain is carried by its own signed-distance function, positive
//! inside the grain, whose zero contour is the grain boundary. Boundaries
//! move by mean-curvature flow, integrated with a semi-implicit diffusion
//! step, while an explicit source term keeps the phases mutually exclusive
//! and space-filling. Three couplings are provided: the classical
//! Merriman-Bence-Osher projection, a uniform penalization of vacuum and
//! overlap, and a heterogeneous per-grain penalization whose coefficient
//! ratios act as surrogate boundary-energy ratios. Triple-junction
//! kinetics and dihedral angles measured from the simulations can be
//! compared against closed-form solutions (translating-profile kinetics of
//! the symmetric T-junction family and Young's equilibrium relation),
//! which live in [`analytic`].
//!
//! The crate is organized bottom-up: [`grid`] holds fields and stencils,
//! [`levelset`] initialization and redistancing, [`evolution`] the time
//! stepper, [`measure`] contour and junction extraction, [`analytic`] the
//! closed forms, and [`scenarios`] ready-made benchmark setups plus the
//! parameter-sweep driver. [`acceptance`] bundles the end-to-end
//! validation criteria used by the test suite and the `validate` CLI
//! subcommand.

pub mod acceptance;
pub mod analytic;
pub mod error;
pub mod evolution;
pub mod exec;
pub mod grid;
pub mod io;
pub mod levelset;
pub mod measure;
pub mod scenarios;

pub use error::{Error, Result};

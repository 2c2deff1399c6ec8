//! Numerical laboratory for the 1D repulsive Euler-Poisson equations of a
//! cold plasma: exact blow-up criteria, Lagrangian characteristic dynamics,
//! an Eulerian method-of-lines solver with pluggable regularizing terms
//! (friction, density-dependent friction, pressure, viscosity), a stochastic
//! particle counterpart with kernel-density moment fields, and cross-cutting
//! verification instruments.

pub mod acceptance;
pub mod characteristics;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod fields;
pub mod ode;
pub mod state;
pub mod stochastic;

pub use error::{Error, Result};

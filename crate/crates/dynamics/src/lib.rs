//! Numerical diagnostics on center-manifold Hamiltonians: trajectories with
//! tangent flows, Poincaré sections, frequency maps, fast Lyapunov
//! indicators and normal-mode bifurcation scans.

pub mod bifurcation;
pub mod dop853;
pub mod error;
pub mod events;
pub mod field;
pub mod fli;
pub mod freqmap;
pub mod section;
pub mod trajectory;

pub use error::{DynamicsError, Result};

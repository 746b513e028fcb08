//! Normal forms around the collinear points of the spatial restricted
//! three-body problem with a radiating primary and an oblate secondary.

pub mod center_manifold;
pub mod equilibria;
pub mod error;
pub mod expansion;
pub mod linear;
pub mod params;
pub mod pipeline;
pub mod poly;
pub mod resonance;

pub use error::{Error, Result};

//! Numerical laboratory for interface pinning under semilinear fractional diffusion
//! in a Poisson obstacle field.

pub mod error;
pub mod evolution;
pub mod flat_percolation;
pub mod frac_operators;
pub mod periodic_cell;
pub mod quadrature;
pub mod random_media;
pub mod special;
pub mod supersolution;

pub use error::{Error, Result};
pub use frac_operators::{FractionalOrder, GridFunction, PeriodicGrid};
pub use random_media::{ObstacleField, StrengthLaw};

//! Phototactic swimmers in a synthetic two-dimensional turbulent flow.
//!
//! The crate is organized around five pieces:
//!
//! * [`flow`]: a spectral stream-function model of homogeneous isotropic
//!   turbulence with a Kraichnan energy spectrum and Ornstein-Uhlenbeck
//!   temporal decorrelation, plus two evaluation backends.
//! * [`light`]: a periodicized Gaussian illumination field with exact
//!   derivatives.
//! * [`dynamics`]: RK4 integration of swimmer trajectories and of their
//!   tangent dynamics (Benettin renormalization).
//! * [`analysis`]: box-counting information dimension, Lyapunov summaries,
//!   Kaplan-Yorke dimension, effective diffusivity, light gain and radial
//!   density profiles.
//! * [`theory`]: effective-diffusion (Boltzmann) predictions evaluated by
//!   quadrature over the illumination field.
//!
//! The unit box is `[-1/2, 1/2)^2` with periodic boundaries.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod light;
pub mod theory;

pub use error::{Error, Result};
pub use geometry::{Mat2, Vec2};

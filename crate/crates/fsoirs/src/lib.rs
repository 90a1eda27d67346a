//! Channel modelling for free-space-optical links relayed by an intelligent
//! reflecting surface (IRS).
//!
//! The crate computes the geometric-and-misalignment loss (GML) of the link in
//! two and three dimensions, its statistics under building sway, composite
//! fading with atmospheric turbulence and the resulting outage probability.
//! A Huygens–Fresnel integrator and a Monte Carlo engine serve as independent
//! cross-checks of the closed-form models.

pub mod beam;
pub mod channel;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod irs2d;
pub mod irs3d;
pub mod montecarlo;
pub mod pointing;
pub mod quad;
pub mod scenario;
pub mod special;
pub mod wave_oracle;

pub use error::{Error, Result};

//! Mesh-free deep least-squares solver for second-order elliptic interface
//! problems.
//!
//! The solution of a diffusion problem whose coefficient jumps across an
//! internal interface is approximated by two independent tanh networks, one
//! per sub-domain, selected through a level-set classifier. Training
//! minimizes a sampled least-squares functional built from the PDE residual,
//! the interface jump conditions, and the boundary condition. A
//! residual-driven refinement loop optionally grows the sample set where the
//! pointwise residual is largest.
//!
//! Module layout:
//! - [`geometry`] — level-set geometries, region classification, point samplers
//! - [`network`] — tanh MLPs with spatial derivatives and parameter gradients
//! - [`problems`] — built-in benchmark problems with manufactured solutions
//! - [`loss`] — the four discrete loss terms and pointwise residual indicators
//! - [`trainer`] — full-batch Adam training loop
//! - [`adaptive`] — residual-ranked sample refinement
//! - [`evaluate`] — error metrics and field export

pub mod adaptive;
pub mod evaluate;
pub mod geometry;
pub mod loss;
pub mod network;
pub mod problems;
pub mod rng;
pub mod trainer;

mod error;

pub use error::{Error, Result};

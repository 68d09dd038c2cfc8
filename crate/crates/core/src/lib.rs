//! Density evolution for turbo-like code ensembles (PCC, SCC, BCC) on the
//! binary erasure channel.
//!
//! The crate computes exact BCJR transfer functions of convolutional
//! component codes, assembles them into scalar admissible systems, evaluates
//! their potential functions and BP/potential thresholds, and runs the
//! spatially coupled recursion to exhibit threshold saturation.

pub mod cli;
pub mod coupled;
pub mod ensembles;
pub mod error;
pub mod gf2;
pub mod mc;
pub mod potential;
pub mod quadrature;
pub mod trellis;
pub mod transfer;

pub use error::{Error, Result};

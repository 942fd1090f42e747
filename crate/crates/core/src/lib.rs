//! Constructive toolkit for Okamoto's function and the iterated function
//! systems behind it.
//!
//! The crate is organised bottom-up:
//!
//! * [`symbolic`]: words over `{1,2,3}`, stopping-time covers and the
//!   homogeneous subsystem alphabets.
//! * [`systems`]: the planar Okamoto IFS, its projection to the `y` axis, the
//!   conjugate system `Φ_b`, exact projections and polynomial representations.
//! * [`separation`]: pair classes, the `F¹, F², F³` functions, minimal gaps
//!   between projected cylinders and empirical separation reports.
//! * [`dimensions`]: closed-form and root-solved dimension quantities.
//! * [`estimators`]: box counting, level-set covers, measure sampling, local
//!   dimension and Fourier probes.
//! * [`subsystem`]: homogeneous subsystems, their splittings and the checks
//!   built on them.
//! * [`cli`]: the command-line front end and report formats.

pub mod cli;
pub mod dimensions;
pub mod error;
pub mod estimators;
pub mod numeric;
pub mod separation;
pub mod stats;
pub mod subsystem;
pub mod symbolic;
pub mod systems;

pub use error::{Error, Result};
pub use numeric::{Param, Scalar};
pub use symbolic::Word;

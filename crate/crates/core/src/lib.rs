//! Semiclassical dynamics of electronic two-level systems, a lossy infrared
//! cavity mode and a collective vibrational bath.
//!
//! The electronic subsystem is carried by a single representative density
//! matrix (symmetric Dicke states), while the cavity coordinate, the
//! vibrational bright mode and a finite set of dark oscillators evolve as
//! classical variables under mean-field forces. Everything is expressed in
//! Hartree atomic units; [`units`] converts at the I/O boundary.
//!
//! ```no_run
//! use casimir_core::{dynamics, Params};
//!
//! let params = Params::default();
//! let traj = dynamics::integrate(&params).unwrap();
//! println!("E_D(final) = {:e} a.u.", traj.e_d.last().unwrap());
//! ```

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod dynamics;
mod error;
pub mod fit;
pub mod matrix;
pub mod model;
pub mod observables;
mod params;
pub mod state;
pub mod sweep;
pub mod units;

pub use dynamics::Trajectory;
pub use error::{Error, Result};
pub use matrix::Matrix2;
pub use num_complex::Complex64;
pub use params::{DarkSampling, Params, Pulse, TermFactor};
pub use state::{ElectronicDensityMatrix, SystemState};
pub use sweep::{SweepParam, SweepSpec, SweepTable};

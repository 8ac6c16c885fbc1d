//! Human-mosquito dengue transmission model with threshold analysis,
//! seasonal forcing and insecticide optimal control.
//!
//! - [`model`]: parameters, scenario presets and the three vector fields.
//! - [`analysis`]: reproduction number, equilibria, sensitivity indices.
//! - [`integrator`]: fixed-step RK4 and adaptive Dormand-Prince 5(4).
//! - [`optimal_control`]: cost, Hamiltonian, costates and the
//!   forward-backward sweep solver.
//! - [`batch`]: parallel or sequential fan-out of independent runs.
//! - [`cli`]: configuration, CSV output and the command implementations.

pub mod analysis;
pub mod batch;
pub mod cli;
pub mod error;
pub mod integrator;
pub mod model;
pub mod optimal_control;

pub use error::{Error, Result};

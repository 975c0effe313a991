//! Time-dependent variational dynamics of the zero-temperature spin-boson model.
//!
//! The spin is coupled linearly to a discretized harmonic bath,
//!
//! ```text
//! H = -(Δ/2) σx + Σ_l ω_l b_l† b_l + (σz/2) Σ_l λ_l (b_l + b_l†)
//! ```
//!
//! and the state is restricted to the two-branch coherent-state form
//! `A|+⟩|f⟩ + B|−⟩|g⟩` (a Davydov D1 ansatz). The crate provides the bath
//! discretization ([`bath`]), static functionals of the trial state
//! ([`state`]), the explicit equations of motion and an RK4 propagator
//! ([`dynamics`]), the Schrödinger residual of the ansatz ([`deviation`]),
//! a brute-force Fock-space reference ([`oracle`]) and the run/sweep
//! drivers used by the command line tool ([`driver`]).

pub mod analysis;
pub mod bath;
pub mod config;
pub mod deviation;
pub mod driver;
pub mod dynamics;
mod error;
pub mod oracle;
pub mod state;
pub mod table;

pub use error::{Error, Result};

pub use num_complex::Complex64;

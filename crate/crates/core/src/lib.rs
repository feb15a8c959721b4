//! Single-excitation dynamics of a giant atom coupled to a tight-binding
//! waveguide at several points with complex coupling phases.
//!
//! Three independent solvers produce a [`Trajectory`] of the atomic amplitude:
//! exact lattice evolution ([`lattice`]), the delay differential equation
//! ([`dde`]) and a time-bin collision model ([`collision`]). Analytic helpers
//! cover the master-equation rate and phase conditions ([`markov`]), bound
//! states in the continuum ([`bic`]) and the emitted field ([`field`]).

pub mod bic;
pub mod collision;
pub mod config;
pub mod dde;
pub mod error;
pub mod field;
pub mod hamiltonian;
pub mod lattice;
pub mod markov;
pub mod phase;
pub mod trajectory;

pub use config::{AmplitudeState, Boundary, CouplingPoint, DerivedConstants, SystemConfig};
pub use error::{Error, Result};
pub use trajectory::{SolverTag, Trajectory};

//! Simulation toolkit for the 2D Z₂ lattice gauge theory on a square grid:
//! lattice geometry, a statevector engine, circuit compilers, exact
//! reference solvers, trajectory noise, error mitigation and observables.

pub mod circuits;
pub mod error;
pub mod gate;
pub mod lattice;
pub mod mitigation;
pub mod model;
pub mod noise;
pub mod observables;
pub mod pauli;
pub mod prep;
pub mod reference;
pub mod shots;
pub mod state;
pub mod wala;

pub use error::{Error, Result};

//! Circuit IR and compilers: WALA preparation, Trotter steps, two-string
//! superpositions and the Hadamard-test fragment.

mod hadamard;
mod ir;
mod layout;
mod superposition;
mod trotter;
mod wala_prep;

pub use hadamard::{build_hadamard_test, estimator_operator, readout_rotation};
pub use ir::{Circuit, Op};
pub use layout::{AncillaMode, QubitLayout, LAYOUT_RESERVE};
pub use superposition::{
    build_superposition_circuit, central_plaquette, default_superposition_paths, superpose_direct,
    superpose_gate_level, Branch,
};
pub use trotter::{
    build_trotter_step, field_gate, run_steps, EvolutionMode, TrotterSpec, LADDER_ORDER,
};
pub use wala_prep::{build_wala, plaquette_order, WalaMode};

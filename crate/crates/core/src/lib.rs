//! Exact and approximate single-qubit synthesis over Clifford+T and Clifford+V_p.

pub mod api;
pub mod approx;
pub mod exact;
pub mod exact_synth;
pub mod experiments;
pub mod gates;
pub mod lattice;
pub mod prob_synth;
pub mod rings;
pub mod su2;

//! Mechanical checks for two-observer Bell–Kochen–Specker arguments.
//!
//! The crate builds the Mermin–Peres square and the odd-`n` family of
//! commuting observable sets, decides whether a noncontextual ±1 assignment
//! exists (GF(2) elimination with certificates), checks perfect correlations
//! on shared Bell pairs by state-vector simulation, simulates the two-observer
//! protocol under noise, and compares CHSH values on `n` singlets with the
//! local-realist bound.

pub mod chsh;
pub mod constructions;
pub mod dense;
pub mod dsl;
pub mod parity;
pub mod pauli;
pub mod protocol;
pub mod state;
pub mod stats;

pub use constructions::{
    generalized_sets, ghz_contexts, ghz_observables, mermin_square, validate, CatalogEntry, Context,
    ContextSystem, GhzGrouping, ValidationReport,
};
pub use dsl::{parse_document, serialize};
pub use parity::{
    brute_force, build_parity_system, check_assignment, check_certificate, solve, Assignment, ParityRow,
    ParitySystem, SolveResult,
};
pub use pauli::{format_pauli, Letter, Outcome, PauliError, PauliOperator};
pub use state::{
    bell_product_state, eigenrelation_check, eigenrelation_residual, ghz_state, singlet_product_state,
    StateVector,
};

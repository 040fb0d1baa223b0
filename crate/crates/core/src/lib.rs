//! Simulation toolkit for a driven three-level atom in an optical cavity.
//!
//! The atom has two ground states `|1⟩`, `|2⟩` and an excited state `|3⟩`.
//! The cavity couples `|1⟩ ↔ |3⟩` with strength `g`, a control laser couples
//! `|2⟩ ↔ |3⟩` with `Ω₂₃`, and a ground-state drive couples `|1⟩ ↔ |2⟩` with
//! `Ω₁₂`. All rates are in units of the cavity field decay rate `κ`.
//!
//! States live on `C³ ⊗ C^{n_max+1}` with atom-major ordering, see
//! [`hilbert::HilbertSpec::index`].

// Range checks are written `!(x < y)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod darkstates;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod solvers;
pub mod strongdrive;

#[cfg(test)]
mod test_support;

pub use error::{Error, Result};
pub use hilbert::{DensityMatrix, HilbertSpec, Operator, StateVector, C64};
pub use model::{liouvillian, Superoperator, SystemParams};
pub use observables::ObservableSet;
pub use solvers::{auto_truncate, evolve, steady_state, TimeGrid};

//! Numerical laboratory for hypercontractivity of qubit channel semigroups.
//!
//! Operators live on `C^{2^n}` for small `n` and are manipulated either as
//! dense matrices or as real coefficient tensors over Pauli words. On top of
//! that the crate provides unital qubit channels and their generators, a
//! lower-bound estimator for `p -> q` norms over positive semidefinite
//! witnesses, the classical noise operator on the Boolean cube, and numerical
//! verdicts for the inequalities around the hypercontractive bound.

pub mod channel_algebra;
pub mod classical_cube;
pub mod error;
pub mod inequality_lab;
pub mod norm_estimator;
pub mod pauli_tensor;
pub mod seed;

pub use error::{HyperqError, Result};

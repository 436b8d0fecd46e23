//! Symmetry-exact configuration interaction for atoms.
//!
//! The pipeline: enumerate configurations for a model space with cutoff
//! rules, decompose each configuration exactly into total-(L, S, parity)
//! symmetry blocks via highest-weight kernels and ladder descent, restrict to
//! a single magnetic column, precompute reduced density matrices of the
//! symmetry-adapted basis once, and then assemble and diagonalize the small
//! Hamiltonian blocks for any Slater-orbital exponent vector during
//! variational optimization.

pub mod angular;
pub mod bipoly;
pub mod cache;
pub mod coulomb;
pub mod error;
pub mod exact;
pub mod exact_linalg;
pub mod fock;
pub mod lsdecomp;
pub mod model;
pub mod nelder_mead;
pub mod rdm;
pub mod solver;
pub mod sto;

pub use error::{Error, Result};

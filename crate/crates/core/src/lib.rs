//! Statevector simulation of quantum imaginary time evolution and its
//! multi-state, folded-spectrum, Krylov and spin-shifted variants.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, configuration
//! and the command line live in the companion `qite` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod exact;
pub mod fermion;
pub mod folded;
pub mod linalg;
pub mod msqite;
pub mod pauli;
pub mod qite;
pub mod qlanczos;
pub mod state;

pub use error::{Error, Result};
pub use exact::{exact_diag, exact_diag_sector, exact_ite, exact_ite_composed, sector_basis, SpectralDecomposition};
pub use fermion::{
    build_hamiltonian, build_pool, build_spin_ops, OperatorPool, PoolKind, SpinOperators, SpinOrbitalIntegrals,
};
pub use folded::{fold_hamiltonian, run_fsqite, FoldedConfig, FoldedReport};
pub use msqite::{shift_hamiltonian_spin, ModelSpace, Msqite, MsqiteConfig, MsqiteMode};
pub use pauli::{Pauli, PauliString, PauliSum, PauliTerm};
pub use qite::{run_qite, BVariant, Qite, QiteConfig, StepReport};
pub use qlanczos::{KrylovHistory, NormEstimator, NormSource, QlanczosResult};
pub use state::{StateSpec, StateVector};

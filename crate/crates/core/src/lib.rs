//! Go/no-go feasibility criteria for quantum chemistry on quantum hardware.
//!
//! The crate computes the energy scales that decide whether a molecular
//! problem is tractable with a noisy variational eigensolver (the tolerable
//! per-gate error) or with fault-tolerant phase estimation (the ground-state
//! overlap and its overlap-index proxy):
//!
//! - [`pauli`]: Pauli words and sums, matrix-free statevector kernels.
//! - [`fermion`]: molecular integrals, FCIDUMP, Jordan-Wigner mapping and
//!   closed-form determinant and infinite-temperature energies.
//! - [`hchain`]: STO-3G hydrogen chains, restricted Hartree-Fock.
//! - [`spectra`]: Lanczos extremal eigenpairs and exact overlaps.
//! - [`itevo`]: imaginary-time projection, the area under `E(tau)` and the
//!   overlap index.
//! - [`vqe`]: UCCSD ansatz, statevector optimization and the depolarizing
//!   noise model.
//! - [`criteria`]: the two criteria, scaling fits and the JSON report.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod criteria;
pub mod error;
pub mod fermion;
pub mod hchain;
pub mod itevo;
pub mod pauli;
pub mod spectra;
pub mod vqe;

pub use error::{Error, Result};

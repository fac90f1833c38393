//! Classical simulation of measurement-based quantum computation (MBQC) on
//! thermal states of the free and interacting cluster Hamiltonians.
//!
//! The interacting cluster Hamiltonian `-J Σ K_i K_j` is unitarily equivalent
//! to the ferromagnetic Ising model, so every quantity computed here reduces
//! to Ising physics:
//!
//! - [`exact`]: exact square-lattice row correlators (Toeplitz-type
//!   determinants of a Fourier-transformed symbol), Onsager's critical
//!   temperature and the closed forms of the free cluster model.
//! - [`mc`]: Metropolis and replica-exchange sampling on arbitrary graphs,
//!   symmetry-broken correlators and Binder-cumulant `Tc` estimation.
//! - [`fidelity`]: identity / Hadamard gate fidelities from the projector
//!   expansion into cluster-stabilizer expectation values.
//! - [`tqec`]: thermal error chains on the RHG cell complex, syndromes,
//!   minimum-weight perfect matching, homology verdicts and the correlated
//!   random-plaquette gauge model used for free-energy decoding.
//!
//! The crate is `no_std` and only needs `alloc`; parallel drivers, file
//! formats and the command-line front end live in `thermal-mbqc-lab`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bits;
pub mod error;
pub mod exact;
pub mod fidelity;
pub mod lattice;
pub mod mc;
pub mod rng;
pub mod stats;
pub mod tqec;

mod math;

pub use error::{Error, Result};

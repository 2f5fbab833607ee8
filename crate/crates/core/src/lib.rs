//! Quantum state transfer through uniformly coupled open XY spin chains.
//!
//! A qubit encoded on site 1 propagates to site `N` through a channel
//! (sites `2..=N`) prepared in a product state with a fixed set of
//! excitations. Under the Jordan-Wigner mapping the chain is a free-fermion
//! system, so the evolved state is a sum of Slater determinants and the
//! Bloch-sphere averaged fidelity reduces to five overlap sums
//! ([`GammaSet`]). Those sums are evaluated by direct subset enumeration
//! ([`gamma_direct`]), by a polynomial Cauchy-Binet route ([`gamma_fast`]),
//! and independently by exact diagonalization of the spin Hamiltonian
//! ([`oracle::gamma_oracle`]).
//!
//! Sites are 1-indexed on every public interface.

mod combinatorics;
mod error;
pub mod experiments;
pub mod fidelity;
mod linalg;
pub mod model;
pub mod oracle;
pub mod propagator;

pub use error::{Error, Result};
pub use fidelity::{
    average_fidelity, gamma_direct, gamma_direct_with_cap, gamma_fast, occupation_profile, raw_average_fidelity,
    single_excitation_fidelity, FidelityMode, GammaSet, DEFAULT_ENUMERATION_CAP,
};
pub use model::{BranchPair, ChainSpec, ExcitationPattern};
pub use propagator::{amplitude_matrix, single_amplitude, spectrum, AmplitudeMatrix, Propagator, SpectralData};

pub use num_complex::Complex64;

//! A dense state-vector quantum circuit simulator together with the family of
//! phase-kickback algorithms built on top of it.
//!
//! Every algorithm follows the same pattern: put a control register into
//! superposition, apply a controlled operation whose target holds an
//! eigenstate so that the eigenvalue lands on the control branch as a
//! relative phase, then interfere the control register with a Hadamard or
//! Fourier transform and read it out.
//!
//! Basis convention: qubit 0 is the most significant bit of the basis index,
//! so `|a1 a2 ... an>` sits at index `2^(n-1) a1 + ... + an`. The same
//! convention is used by every module.
//!
//! Module map:
//!
//! - [`statevec`]: amplitudes, gate and permutation application, measurement.
//! - [`gates`]: 2x2 gates, classical oracles, controlled modular multiplication.
//! - [`qft`]: the Fourier network, its inverse, and a dense reference.
//! - [`phase_estimation`]: the estimation kernel, closed-form readout
//!   distribution and precision amplification.
//! - [`algorithms`]: Deutsch, Deutsch-Jozsa, Bernstein-Vazirani, affine
//!   recovery, Grover search and interference-pattern generation.
//! - [`order_finding`]: order finding, continued fractions and RSA recovery.
//! - [`analysis`]: implementation-independent oracles and bound sweeps.

pub mod algorithms;
pub mod analysis;
pub mod error;
pub mod gates;
pub mod order_finding;
pub mod phase_estimation;
pub mod qft;
pub mod statevec;

pub use error::{Error, Result};
pub use gates::{Gate2x2, Oracle};
pub use statevec::{Amplitude, Prng, StateVector};

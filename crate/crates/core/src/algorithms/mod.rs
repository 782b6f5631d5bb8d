//! Promise problems and interference algorithms built on phase kickback.

mod grover;
mod pattern;
mod promise;

use serde::Serialize;

use crate::error::Result;
use crate::gates::{hadamard, phase_shifter};
use crate::statevec::StateVector;

pub use grover::{
    default_iterations, grover_search, grover_success_curve, grover_success_probability,
    GroverOracle, GroverReport,
};
pub use pattern::{add_constant, fourier_eigenstate, pattern_generate, PatternReport, PatternSpec};
pub use promise::{
    affine_recovery, affine_single_run, bernstein_vazirani, deutsch, deutsch_jozsa, parity_promise,
    AffineReport, AffineSpec, BvReport, PromiseReport, PROMISE_DIAGNOSTIC_THRESHOLD,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Constant,
    Balanced,
}

/// Detector probabilities of a Mach-Zehnder interferometer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MachZehnderReport {
    pub p0: f64,
    pub p1: f64,
}

/// Beam splitter, phase difference `phi1 - phi0` kicked back from a
/// controlled phase shifter acting on its `|1>` eigenstate, beam splitter.
pub fn mach_zehnder(phi0: f64, phi1: f64) -> Result<MachZehnderReport> {
    let mut state = StateVector::basis_state(2, 0b01)?;
    let h = hadamard();
    state.apply_single_qubit(&h, 0)?;
    state.apply_controlled(&phase_shifter(phi1 - phi0), 0, 1)?;
    state.apply_single_qubit(&h, 0)?;
    let p = state.marginal_probabilities(&[0])?;
    Ok(MachZehnderReport { p0: p[0], p1: p[1] })
}

//! Arbitrary phase patterns `e^{2πi φ(x)}` on a control register, written by
//! a conditional adder acting on a shared Fourier eigenstate.

use std::f64::consts::PI;

use serde::Serialize;

use crate::analysis::cross_minor_entanglement;
use crate::error::{domain, Result};
use crate::statevec::{Amplitude, Permutation, StateVector};

/// `2^{-m/2} Σ_y e^{-2πi l y / 2^m} |y>`, an eigenstate of every
/// "add k mod 2^m" with eigenvalue `e^{2πi k l / 2^m}`.
pub fn fourier_eigenstate(l: u64, m: usize) -> Result<StateVector> {
    if m == 0 || m > 24 {
        return Err(domain!("register width {m} outside 1..=24"));
    }
    let dim = 1u64 << m;
    if l >= dim {
        return Err(domain!("index {l} outside [0, {dim})"));
    }
    let scale = 1.0 / (dim as f64).sqrt();
    let amps = (0..dim)
        .map(|y| Amplitude::from_polar(scale, -2.0 * PI * ((l * y) % dim) as f64 / dim as f64))
        .collect();
    StateVector::from_amplitudes(amps)
}

/// `y -> y + k mod 2^m`.
pub fn add_constant(k: u64, m: usize) -> Permutation {
    let mask = (1u64 << m) - 1;
    Permutation::from_fn_unchecked(m, |y| (y + k) & mask)
}

/// Phase pattern `φ(x) = phi[x] / 2^m` over `n` control bits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PatternSpec {
    pub n: usize,
    pub m: usize,
    pub phi: Vec<u64>,
}

impl PatternSpec {
    pub fn new(n: usize, m: usize, phi: Vec<u64>) -> Result<Self> {
        if n == 0 || m == 0 || n + m > 24 {
            return Err(domain!("pattern widths n={n}, m={m} out of range"));
        }
        if phi.len() != 1 << n {
            return Err(domain!(
                "phase table has {} entries, expected {}",
                phi.len(),
                1u64 << n
            ));
        }
        if let Some(v) = phi.iter().find(|&&v| v >> m != 0) {
            return Err(domain!("phase numerator {v} does not fit in {m} bits"));
        }
        Ok(PatternSpec { n, m, phi })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatternReport {
    /// Control register after the ancilla is projected out.
    pub control: StateVector,
    /// Largest 2x2 minor across the control/ancilla cut.
    pub max_cross_minor: f64,
}

/// Uniform control register, ancilla in the `l = 1` Fourier eigenstate, then
/// `|x>|y> -> |x>|y + φ(x)>`. The ancilla returns unchanged and the control
/// register holds `2^{-n/2} Σ_x e^{2πi φ(x)/2^m} |x>`.
pub fn pattern_generate(spec: &PatternSpec) -> Result<PatternReport> {
    let (n, m) = (spec.n, spec.m);
    let ancilla = fourier_eigenstate(1, m)?;
    let mut state = StateVector::uniform(n)?.tensor(&ancilla)?;
    let span: Vec<usize> = (0..n + m).collect();
    let mask = (1u64 << m) - 1;
    state.apply_span_map(&span, |xy| {
        let x = xy >> m;
        (x << m) | ((xy + spec.phi[x as usize]) & mask)
    });

    let max_cross_minor = cross_minor_entanglement(&state, &(0..n).collect::<Vec<_>>())?;
    let anc = ancilla.amplitudes();
    let amps = (0..1u64 << n)
        .map(|x| {
            (0..1u64 << m)
                .map(|y| anc[y as usize].conj() * state.amplitude((x << m) | y))
                .sum()
        })
        .collect();
    Ok(PatternReport {
        control: StateVector::normalized(amps)?,
        max_cross_minor,
    })
}

//! Quantum Fourier transform over `Z_{2^m}`.
//!
//! The forward map is `|a> -> 2^{-m/2} Σ_y e^{2πi a y / 2^m} |y>`. It is built
//! from the usual ladder: on span position `i` a Hadamard, then controlled
//! `R_k` for `k = 2..=m-i` controlled by position `i+k-1`. The ladder leaves
//! the output bits in reverse order, so the plan ends with explicit swaps and
//! callers see the un-reversed convention.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::gates::{hadamard, r_k};
use crate::statevec::{Amplitude, StateVector};

/// Largest span accepted by [`dft_reference`].
pub const MAX_DENSE_DFT_BITS: usize = 12;

/// One gate of the network, with positions relative to the span.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum QftStep {
    Hadamard {
        qubit: usize,
    },
    ControlledRk {
        k: u32,
        control: usize,
        target: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QftPlan {
    m: usize,
    steps: Vec<QftStep>,
    reversal: Vec<(usize, usize)>,
}

impl QftPlan {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(domain!("QFT needs at least one qubit"));
        }
        let mut steps = Vec::with_capacity(m * (m + 1) / 2);
        for i in 0..m {
            steps.push(QftStep::Hadamard { qubit: i });
            for k in 2..=(m - i) as u32 {
                steps.push(QftStep::ControlledRk {
                    k,
                    control: i + k as usize - 1,
                    target: i,
                });
            }
        }
        let reversal = (0..m / 2).map(|i| (i, m - 1 - i)).collect();
        Ok(QftPlan { m, steps, reversal })
    }

    pub fn width(&self) -> usize {
        self.m
    }

    pub fn steps(&self) -> &[QftStep] {
        &self.steps
    }

    pub fn reversal(&self) -> &[(usize, usize)] {
        &self.reversal
    }

    pub fn hadamard_count(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s, QftStep::Hadamard { .. }))
            .count()
    }

    pub fn rotation_count(&self) -> usize {
        self.steps.len() - self.hadamard_count()
    }

    fn check(&self, state: &StateVector, span: &[usize]) -> Result<()> {
        if span.len() != self.m {
            return Err(domain!(
                "plan for {} qubits applied to a span of {}",
                self.m,
                span.len()
            ));
        }
        state.check_span(span)
    }

    pub fn apply(&self, state: &mut StateVector, span: &[usize]) -> Result<()> {
        self.check(state, span)?;
        let h = hadamard();
        for step in &self.steps {
            match *step {
                QftStep::Hadamard { qubit } => state.apply_single_qubit(&h, span[qubit])?,
                QftStep::ControlledRk { k, control, target } => {
                    state.apply_controlled(&r_k(k)?, span[control], span[target])?
                }
            }
        }
        for &(a, b) in &self.reversal {
            state.swap(span[a], span[b])?;
        }
        Ok(())
    }

    /// Runs the network backwards with conjugated rotations.
    pub fn apply_inverse(&self, state: &mut StateVector, span: &[usize]) -> Result<()> {
        self.check(state, span)?;
        for &(a, b) in self.reversal.iter().rev() {
            state.swap(span[a], span[b])?;
        }
        let h = hadamard();
        for step in self.steps.iter().rev() {
            match *step {
                QftStep::Hadamard { qubit } => state.apply_single_qubit(&h, span[qubit])?,
                QftStep::ControlledRk { k, control, target } => {
                    state.apply_controlled(&r_k(k)?.adjoint(), span[control], span[target])?
                }
            }
        }
        Ok(())
    }
}

pub fn qft(state: &mut StateVector, span: &[usize]) -> Result<()> {
    QftPlan::new(span.len())?.apply(state, span)
}

pub fn inverse_qft(state: &mut StateVector, span: &[usize]) -> Result<()> {
    QftPlan::new(span.len())?.apply_inverse(state, span)
}

/// Dense `2^m x 2^m` DFT applied by direct matrix-vector multiplication on
/// every slice of the span. Shares no code with the gate network.
pub fn dft_reference(state: &mut StateVector, span: &[usize]) -> Result<()> {
    dense_dft(state, span, 1.0)
}

/// Conjugate transpose of [`dft_reference`].
pub fn inverse_dft_reference(state: &mut StateVector, span: &[usize]) -> Result<()> {
    dense_dft(state, span, -1.0)
}

fn dense_dft(state: &mut StateVector, span: &[usize], sign: f64) -> Result<()> {
    let m = span.len();
    if m == 0 {
        return Err(domain!("empty span"));
    }
    if m > MAX_DENSE_DFT_BITS {
        return Err(Error::Capacity(format!(
            "dense DFT limited to {MAX_DENSE_DFT_BITS} qubits, got {m}"
        )));
    }
    state.check_span(span)?;
    let dim = 1usize << m;
    let scale = 1.0 / (dim as f64).sqrt();
    // e^{2πi k / 2^m} for k mod 2^m, so every entry is an exact table lookup
    let roots: Vec<Amplitude> = (0..dim)
        .map(|k| Amplitude::from_polar(scale, sign * 2.0 * PI * k as f64 / dim as f64))
        .collect();

    let mut amps = state.amplitudes().to_vec();
    let len = amps.len();
    let mut done = vec![false; len];
    let mut slice = vec![Amplitude::new(0.0, 0.0); dim];
    let mut indices = vec![0usize; dim];
    for base in 0..len {
        if done[base] || state.span_value(base, span) != 0 {
            continue;
        }
        for (x, idx) in indices.iter_mut().enumerate() {
            *idx = state.with_span_value(base, span, x as u64);
            slice[x] = amps[*idx];
            done[*idx] = true;
        }
        for (y, &idx) in indices.iter().enumerate() {
            amps[idx] = (0..dim).map(|x| roots[(x * y) % dim] * slice[x]).sum();
        }
    }
    *state = StateVector::from_amplitudes(amps)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Amplitude {
        Amplitude::new(re, im)
    }

    fn span(m: usize) -> Vec<usize> {
        (0..m).collect()
    }

    #[test]
    fn plan_structure_and_gate_counts() {
        for m in 1..=12 {
            let plan = QftPlan::new(m).unwrap();
            assert_eq!(plan.hadamard_count(), m);
            assert_eq!(plan.rotation_count(), m * (m - 1) / 2);
            assert_eq!(plan.reversal().len(), m / 2);
            for &(a, b) in plan.reversal() {
                assert_eq!(a + b, m - 1);
            }
        }
        let plan = QftPlan::new(3).unwrap();
        assert_eq!(
            plan.steps(),
            &[
                QftStep::Hadamard { qubit: 0 },
                QftStep::ControlledRk {
                    k: 2,
                    control: 1,
                    target: 0
                },
                QftStep::ControlledRk {
                    k: 3,
                    control: 2,
                    target: 0
                },
                QftStep::Hadamard { qubit: 1 },
                QftStep::ControlledRk {
                    k: 2,
                    control: 2,
                    target: 1
                },
                QftStep::Hadamard { qubit: 2 },
            ]
        );
        assert!(QftPlan::new(0).is_err());
    }

    #[test]
    fn one_qubit_qft_is_hadamard() {
        for a in 0..2 {
            let mut s = StateVector::basis_state(1, a).unwrap();
            let mut h = s.clone();
            qft(&mut s, &[0]).unwrap();
            h.apply_single_qubit(&hadamard(), 0).unwrap();
            assert!(s.max_deviation(&h) < 1e-15);
            inverse_qft(&mut s, &[0]).unwrap();
            h.apply_single_qubit(&hadamard(), 0).unwrap();
            assert!(s.max_deviation(&h) < 1e-15);
        }
    }

    #[test]
    fn three_qubit_basis_outputs() {
        let r8 = 1.0 / 8f64.sqrt();
        let mut s = StateVector::zero(3).unwrap();
        qft(&mut s, &span(3)).unwrap();
        for y in 0..8 {
            assert!((s.amplitude(y) - c(r8, 0.)).norm() < 1e-12);
        }
        let mut s = StateVector::basis_state(3, 1).unwrap();
        qft(&mut s, &span(3)).unwrap();
        for y in 0..8u64 {
            let expected = Amplitude::from_polar(r8, 2.0 * PI * y as f64 / 8.0);
            assert!((s.amplitude(y) - expected).norm() < 1e-12, "y={y}");
        }
    }

    #[test]
    fn dense_reference_small_case() {
        let mut s = StateVector::basis_state(2, 1).unwrap();
        dft_reference(&mut s, &span(2)).unwrap();
        let expected = [c(0.5, 0.), c(0., 0.5), c(-0.5, 0.), c(0., -0.5)];
        for (y, e) in expected.iter().enumerate() {
            assert!((s.amplitude(y as u64) - e).norm() < 1e-15);
        }
        let mut big = StateVector::zero(13).unwrap();
        assert!(matches!(
            dft_reference(&mut big, &span(13)),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn dense_reference_is_unitary() {
        let amps: Vec<Amplitude> = (0..32)
            .map(|i| c((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let start = StateVector::normalized(amps).unwrap();
        let mut s = start.clone();
        dft_reference(&mut s, &[1, 3, 4]).unwrap();
        inverse_dft_reference(&mut s, &[1, 3, 4]).unwrap();
        assert!(s.max_deviation(&start) < 1e-12);
    }

    #[test]
    fn inverse_undoes_forward() {
        for m in 1..=8 {
            for a in 0..1u64 << m {
                let start = StateVector::basis_state(m, a).unwrap();
                let mut s = start.clone();
                qft(&mut s, &span(m)).unwrap();
                inverse_qft(&mut s, &span(m)).unwrap();
                assert!(s.max_deviation(&start) < 1e-10, "m={m} a={a}");
            }
        }
    }

    #[test]
    fn inverse_extracts_binary_fraction() {
        let m = 5;
        for a in 0..1u64 << m {
            let dim = 1u64 << m;
            let amps = (0..dim)
                .map(|y| {
                    Amplitude::from_polar(
                        1.0 / (dim as f64).sqrt(),
                        2.0 * PI * (a * y) as f64 / dim as f64,
                    )
                })
                .collect();
            let mut s = StateVector::from_amplitudes(amps).unwrap();
            inverse_qft(&mut s, &span(m)).unwrap();
            assert!((s.amplitude(a).norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn network_on_sub_span_matches_reference() {
        let amps: Vec<Amplitude> = (0..64)
            .map(|i| c((i as f64 * 1.7).sin(), (i as f64 * 0.2).cos()))
            .collect();
        let start = StateVector::normalized(amps).unwrap();
        let sub = [4, 1, 2];
        let mut a = start.clone();
        let mut b = start;
        qft(&mut a, &sub).unwrap();
        dft_reference(&mut b, &sub).unwrap();
        assert!(a.max_deviation(&b) < 1e-12);
    }
}

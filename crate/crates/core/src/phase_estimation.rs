//! Phase estimation: the controlled-power kernel, inverse-QFT readout, the
//! closed-form readout distribution and precision amplification.
//!
//! Register layout used throughout: control qubits `0..m` (qubit `m-1-j`
//! carries weight `2^j` and controls `U^(2^j)`), target qubits
//! `m..m+target_width`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::gates::{hadamard, phase_shifter};
use crate::qft::inverse_qft;
use crate::statevec::{Prng, StateVector};

/// Lower bound on the probability of reading out the best estimate.
pub const SUCCESS_BOUND: f64 = 4.0 / (PI * PI);

/// Provider of controlled powers of some unitary `U` and a preparation of
/// (a superposition of) its eigenstates.
pub trait EigenOracle {
    fn target_width(&self) -> usize;

    /// The state loaded into the target register before the kernel runs.
    fn eigenstate(&self) -> Result<StateVector>;

    /// Controlled `U^(2^j)` with `control` outside `target`.
    fn controlled_power(
        &self,
        state: &mut StateVector,
        j: u32,
        control: usize,
        target: &[usize],
    ) -> Result<()>;
}

/// Single-qubit `U = diag(1, e^{2πiφ})` with eigenstate `|1>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagonalPhaseOracle {
    phi: f64,
}

impl DiagonalPhaseOracle {
    pub fn new(phi: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&phi) {
            return Err(domain!("phase {phi} outside [0, 1)"));
        }
        Ok(DiagonalPhaseOracle { phi })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

impl EigenOracle for DiagonalPhaseOracle {
    fn target_width(&self) -> usize {
        1
    }

    fn eigenstate(&self) -> Result<StateVector> {
        StateVector::basis_state(1, 1)
    }

    fn controlled_power(
        &self,
        state: &mut StateVector,
        j: u32,
        control: usize,
        target: &[usize],
    ) -> Result<()> {
        let turns = (self.phi * (j as f64).exp2()).fract();
        state.apply_controlled(&phase_shifter(2.0 * PI * turns), control, target[0])
    }
}

/// An `m`-bit dyadic value `a / 2^m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PhaseFraction {
    numerator: u64,
    bits: u32,
}

impl PhaseFraction {
    pub fn new(numerator: u64, bits: u32) -> Result<Self> {
        if bits == 0 || bits > 62 {
            return Err(domain!("bit width {bits} outside 1..=62"));
        }
        if numerator >> bits != 0 {
            return Err(domain!("numerator {numerator} does not fit in {bits} bits"));
        }
        Ok(PhaseFraction { numerator, bits })
    }

    pub fn numerator(&self) -> u64 {
        self.numerator
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn value(&self) -> f64 {
        self.numerator as f64 / (self.bits as f64).exp2()
    }
}

/// Distance between two phases on the unit circle.
pub fn wrap_distance(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(1.0);
    d.min(1.0 - d)
}

fn control_span(m: usize) -> Vec<usize> {
    (0..m).collect()
}

fn target_span(m: usize, oracle: &dyn EigenOracle) -> Vec<usize> {
    (m..m + oracle.target_width()).collect()
}

/// Hadamards on the control register followed by the controlled-power
/// ladder. With an exact eigenstate the control register ends up in
/// `2^{-m/2} Σ_y e^{2πiφy} |y>` and the target is unchanged.
pub fn kernel_state(m: usize, oracle: &dyn EigenOracle) -> Result<StateVector> {
    if m == 0 {
        return Err(domain!("need at least one control qubit"));
    }
    let mut state = StateVector::zero(m)?.tensor(&oracle.eigenstate()?)?;
    if state.num_qubits() != m + oracle.target_width() {
        return Err(domain!("eigenstate width does not match the oracle"));
    }
    state.apply_to_each(&hadamard(), 0..m)?;
    let target = target_span(m, oracle);
    for j in 0..m {
        oracle.controlled_power(&mut state, j as u32, m - 1 - j, &target)?;
    }
    Ok(state)
}

/// Kernel followed by the inverse QFT on the control register.
pub fn readout_state(m: usize, oracle: &dyn EigenOracle) -> Result<StateVector> {
    let mut state = kernel_state(m, oracle)?;
    inverse_qft(&mut state, &control_span(m))?;
    Ok(state)
}

/// Exact distribution of the control-register readout from the simulated
/// circuit.
pub fn circuit_distribution(m: usize, oracle: &dyn EigenOracle) -> Result<Vec<f64>> {
    readout_state(m, oracle)?.marginal_probabilities(&control_span(m))
}

/// Runs the circuit and measures the control register.
pub fn estimate_phase(m: usize, oracle: &dyn EigenOracle, rng: &mut Prng) -> Result<PhaseFraction> {
    let state = readout_state(m, oracle)?;
    let a = state.measure_span(&control_span(m), rng)?;
    PhaseFraction::new(a, m as u32)
}

/// Closed-form readout statistics for phase `phi` on `m` bits.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimationAnalysis {
    pub phi: f64,
    pub m: u32,
    /// Best estimates; two entries when `phi` sits exactly halfway.
    pub best: Vec<u64>,
    /// `phi - best[0] / 2^m`, wrapped into `[-1/2, 1/2)`.
    pub delta: f64,
    pub distribution: Vec<f64>,
    pub success_prob: f64,
}

/// `|α_t|^2` for outcome `t`.
///
/// The geometric series `2^{-m} Σ_y e^{2πiδy}` with `δ = φ - t/2^m` has
/// modulus `|sin(π 2^m δ)| / (2^m |sin(π δ)|)`; the removable singularity at
/// `δ = 0` is taken as its limit 1.
pub fn outcome_probability(phi: f64, m: u32, t: u64) -> f64 {
    let dim = (m as f64).exp2();
    // offset in units of 2^-m, wrapped to [-dim/2, dim/2)
    let d = (phi * dim - t as f64 + dim / 2.0).rem_euclid(dim) - dim / 2.0;
    if d == 0.0 {
        return 1.0;
    }
    let num = (PI * d).sin();
    let den = dim * (PI * d / dim).sin();
    (num / den).powi(2)
}

/// Outcomes `t` closest to `phi` on the circle.
pub fn best_estimates(phi: f64, m: u32) -> Vec<u64> {
    let dim = 1u64 << m;
    let x = phi * dim as f64;
    let lo = x.floor();
    let frac = x - lo;
    let lo = lo as u64 % dim;
    let hi = (lo + 1) % dim;
    if frac == 0.5 {
        vec![lo, hi]
    } else if frac < 0.5 {
        vec![lo]
    } else {
        vec![hi]
    }
}

pub fn analytic_distribution(phi: f64, m: u32) -> Result<EstimationAnalysis> {
    if !(0.0..1.0).contains(&phi) {
        return Err(domain!("phase {phi} outside [0, 1)"));
    }
    if m == 0 || m > 30 {
        return Err(domain!("bit width {m} outside 1..=30"));
    }
    let distribution: Vec<f64> = (0..1u64 << m)
        .map(|t| outcome_probability(phi, m, t))
        .collect();
    let best = best_estimates(phi, m);
    let success_prob = best.iter().map(|&t| distribution[t as usize]).sum();
    let dim = (m as f64).exp2();
    let delta = (phi - best[0] as f64 / dim + 0.5).rem_euclid(1.0) - 0.5;
    Ok(EstimationAnalysis {
        phi,
        m,
        best,
        delta,
        distribution,
        success_prob,
    })
}

/// Closed-form probability that the readout lies more than `k / 2^m` from
/// `phi` on the circle.
pub fn tail_probability(phi: f64, m: u32, k: u64) -> f64 {
    let dim = (m as f64).exp2();
    let x = phi * dim;
    (0..1u64 << m)
        .filter(|&t| {
            let d = (x - t as f64).rem_euclid(dim);
            d.min(dim - d) > k as f64
        })
        .map(|t| outcome_probability(phi, m, t))
        .sum()
}

/// Upper bound `1/(2k-1)` on [`tail_probability`].
pub fn tail_bound(k: u64) -> f64 {
    1.0 / (2.0 * k as f64 - 1.0)
}

/// Number of readout bits needed for `n` accurate bits with failure
/// probability at most `epsilon`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PrecisionRequest {
    pub n: u32,
    pub epsilon: f64,
    pub m_prime: u32,
}

/// `m' = n + ceil(log2(1/(2ε) + 1/2))`.
pub fn precision_for_error(n: u32, epsilon: f64) -> Result<PrecisionRequest> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(domain!("epsilon {epsilon} outside (0, 1)"));
    }
    let x = 1.0 / (2.0 * epsilon) + 0.5;
    let mut extra = 0u32;
    while (extra as f64).exp2() < x {
        extra += 1;
    }
    Ok(PrecisionRequest {
        n,
        epsilon,
        m_prime: n + extra,
    })
}

/// Nearest `n`-bit dyadic modulo 1: add half an `n`-bit unit, drop the low
/// bits, wrap.
pub fn round_to_bits(est: PhaseFraction, n: u32) -> Result<PhaseFraction> {
    let mp = est.bits();
    if n == 0 || n > mp {
        return Err(domain!("cannot round {mp} bits to {n}"));
    }
    if n == mp {
        return Ok(est);
    }
    let drop = mp - n;
    let rounded = ((est.numerator() + (1u64 << (drop - 1))) >> drop) % (1u64 << n);
    PhaseFraction::new(rounded, n)
}

/// Amplified estimate: read `m'` bits, then round to `n`.
pub fn estimate_phase_amplified(
    n: u32,
    epsilon: f64,
    oracle: &dyn EigenOracle,
    rng: &mut Prng,
) -> Result<PhaseFraction> {
    let req = precision_for_error(n, epsilon)?;
    let raw = estimate_phase(req.m_prime as usize, oracle, rng)?;
    round_to_bits(raw, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevec::Amplitude;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn kernel_single_bit_half_phase() {
        let oracle = DiagonalPhaseOracle::new(0.5).unwrap();
        let s = kernel_state(1, &oracle).unwrap();
        // control (|0> - |1>)/√2, target |1>
        assert!((s.amplitude(0b01) - Amplitude::new(FRAC_1_SQRT_2, 0.)).norm() < 1e-12);
        assert!((s.amplitude(0b11) - Amplitude::new(-FRAC_1_SQRT_2, 0.)).norm() < 1e-12);
        assert!(s.amplitude(0b00).norm() < 1e-15 && s.amplitude(0b10).norm() < 1e-15);
    }

    #[test]
    fn kernel_three_bits_product_form() {
        let oracle = DiagonalPhaseOracle::new(0.125).unwrap();
        let s = kernel_state(3, &oracle).unwrap();
        let factor = |q: u32, bit: u64| {
            if bit == 0 {
                Amplitude::new(1.0, 0.0)
            } else {
                Amplitude::from_polar(1.0, 2.0 * PI * (1u64 << q) as f64 / 8.0)
            }
        };
        for y in 0..8u64 {
            let expected =
                factor(2, (y >> 2) & 1) * factor(1, (y >> 1) & 1) * factor(0, y & 1) / 8f64.sqrt();
            assert!(
                (s.amplitude((y << 1) | 1) - expected).norm() < 1e-12,
                "y={y}"
            );
        }
    }

    #[test]
    fn kernel_leaves_target_unchanged() {
        let oracle = DiagonalPhaseOracle::new(0.37).unwrap();
        let s = kernel_state(5, &oracle).unwrap();
        let target = s.marginal_probabilities(&[5]).unwrap();
        assert!((target[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn analytic_exact_dyadic() {
        let a = analytic_distribution(5.0 / 16.0, 4).unwrap();
        assert_eq!(a.best, vec![5]);
        assert_eq!(a.distribution[5], 1.0);
        assert!((a.success_prob - 1.0).abs() < 1e-15);
        assert_eq!(a.delta, 0.0);
    }

    #[test]
    fn analytic_one_third() {
        let a = analytic_distribution(1.0 / 3.0, 3).unwrap();
        assert_eq!(a.best, vec![3]);
        assert!(a.success_prob >= SUCCESS_BOUND);
        // brute-force geometric series for the same outcome
        let coeff: Amplitude = (0..8)
            .map(|y| {
                Amplitude::from_polar(1.0 / 8.0, 2.0 * PI * (1.0 / 3.0 - 3.0 / 8.0) * y as f64)
            })
            .sum();
        assert!((coeff.norm_sqr() - a.success_prob).abs() < 1e-14);
    }

    #[test]
    fn analytic_sums_to_one() {
        let mut rng = Prng::seed_from_u64(11);
        for _ in 0..50 {
            let phi = rng.next_f64();
            for m in 1..=10 {
                let a = analytic_distribution(phi, m).unwrap();
                let total: f64 = a.distribution.iter().sum();
                assert!((total - 1.0).abs() < 1e-12, "phi={phi} m={m}");
            }
        }
    }

    #[test]
    fn tie_counts_both_neighbours() {
        let a = analytic_distribution(3.0 / 16.0, 3).unwrap();
        assert_eq!(a.best, vec![1, 2]);
        let sum = a.distribution[1] + a.distribution[2];
        assert!((a.success_prob - sum).abs() < 1e-15);
        let wrap = analytic_distribution(15.0 / 16.0, 3).unwrap();
        assert_eq!(wrap.best, vec![7, 0]);
    }

    #[test]
    fn near_one_wraps_to_zero() {
        let a = analytic_distribution(0.999, 4).unwrap();
        assert_eq!(a.best, vec![0]);
        assert!(a.delta < 0.0);
        assert!(a.success_prob > 0.9);
    }

    #[test]
    fn exact_dyadic_estimate_is_certain() {
        let oracle = DiagonalPhaseOracle::new(5.0 / 16.0).unwrap();
        for seed in 0..10 {
            let est = estimate_phase(4, &oracle, &mut Prng::seed_from_u64(seed)).unwrap();
            assert_eq!(est.numerator(), 5);
        }
    }

    #[test]
    fn sampler_matches_closed_form() {
        let oracle = DiagonalPhaseOracle::new(1.0 / 3.0).unwrap();
        let mut rng = Prng::seed_from_u64(5);
        let runs = 10_000;
        let hits = (0..runs)
            .filter(|_| estimate_phase(3, &oracle, &mut rng).unwrap().numerator() == 3)
            .count();
        let expected = analytic_distribution(1.0 / 3.0, 3).unwrap().distribution[3];
        assert!((hits as f64 / runs as f64 - expected).abs() < 0.02);
    }

    #[test]
    fn circuit_distribution_is_the_amplitude_squares() {
        for m in 1..=6 {
            let oracle = DiagonalPhaseOracle::new(0.2345).unwrap();
            let state = readout_state(m, &oracle).unwrap();
            let dist = circuit_distribution(m, &oracle).unwrap();
            for (t, p) in dist.iter().enumerate() {
                // target is exactly |1>, so each control outcome has one amplitude
                let amp = state.amplitude(((t as u64) << 1) | 1);
                assert!((amp.norm_sqr() - p).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn precision_examples() {
        assert_eq!(precision_for_error(5, 0.5).unwrap().m_prime, 6);
        assert_eq!(precision_for_error(5, 0.05).unwrap().m_prime, 9);
        assert_eq!(precision_for_error(6, 0.1).unwrap().m_prime, 9);
        assert_eq!(tail_bound(1), 1.0);
        for bad in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(precision_for_error(3, bad).is_err());
        }
    }

    #[test]
    fn rounding_examples() {
        let r = |a, mp, n| {
            round_to_bits(PhaseFraction::new(a, mp).unwrap(), n)
                .unwrap()
                .numerator()
        };
        assert_eq!(r(5, 4, 2), 1);
        assert_eq!(r(15, 4, 2), 0);
        assert_eq!(r(4, 4, 2), 1);
        assert_eq!(r(6, 4, 2), 2);
        assert_eq!(r(9, 4, 4), 9);
        assert!(round_to_bits(PhaseFraction::new(1, 2).unwrap(), 3).is_err());
    }

    #[test]
    fn tail_extremes() {
        for m in 2..=8u32 {
            let k = 1u64 << (m - 1);
            assert_eq!(tail_probability(0.3, m, k), 0.0);
        }
        assert!(tail_probability(0.31, 8, 4) < tail_bound(4));
    }

    #[test]
    fn wrap_distance_cases() {
        assert!((wrap_distance(0.95, 0.05) - 0.1).abs() < 1e-15);
        assert!((wrap_distance(0.2, 0.5) - 0.3).abs() < 1e-15);
        assert_eq!(wrap_distance(0.5, 0.0), 0.5);
    }
}

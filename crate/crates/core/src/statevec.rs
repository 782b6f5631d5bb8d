//! Dense state vectors over `n` qubits.
//!
//! Basis index of `|a_1 a_2 ... a_n>` is `2^(n-1) a_1 + ... + 2^0 a_n`, so qubit
//! 0 is the most significant bit. A span is an ordered list of distinct qubits;
//! its first entry is the most significant bit of the span value.

use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, validation, Error, Result};
use crate::gates::Gate2x2;

/// Complex amplitude in double precision.
pub type Amplitude = Complex64;

/// Soft cap on register width (16M amplitudes).
pub const DEFAULT_MAX_QUBITS: usize = 24;

/// Tolerance on the squared norm accepted by [`StateVector::from_amplitudes`].
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Tolerance on the squared norm accepted by measurement.
pub const MEASURE_NORM_TOLERANCE: f64 = 1e-8;

static MAX_QUBITS: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_QUBITS);

/// Current register-width cap.
pub fn max_qubits() -> usize {
    MAX_QUBITS.load(Ordering::Relaxed)
}

/// Override the register-width cap for the whole process.
pub fn set_max_qubits(n: usize) {
    MAX_QUBITS.store(n.max(1), Ordering::Relaxed);
}

fn check_capacity(n: usize) -> Result<()> {
    if n == 0 {
        return Err(domain!("register needs at least one qubit"));
    }
    let cap = max_qubits();
    if n > cap {
        return Err(Error::Capacity(format!(
            "{n} qubits requested, cap is {cap}"
        )));
    }
    Ok(())
}

/// Seeded pseudo-random generator used for every measurement.
///
/// Backed by ChaCha8 seeded through `seed_from_u64`, whose output stream is
/// fixed by the algorithm and identical on every platform.
#[derive(Clone, Debug)]
pub struct Prng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Prng {
    pub fn seed_from_u64(seed: u64) -> Self {
        Prng {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw from `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    /// Uniform draw from `[0, bound)`.
    pub fn below(&mut self, bound: u64) -> u64 {
        self.inner.gen_range(0..bound)
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.inner
    }
}

/// A verified bijection on `[0, 2^width)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    width: usize,
    map: Vec<u64>,
}

impl Permutation {
    /// Validates that `map` is a bijection on `[0, map.len())` with a
    /// power-of-two length.
    pub fn new(map: Vec<u64>) -> Result<Self> {
        let len = map.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(validation!(
                "permutation length {len} is not a power of two"
            ));
        }
        let mut seen = vec![false; len];
        for (x, &y) in map.iter().enumerate() {
            let yi = y as usize;
            if yi >= len {
                return Err(validation!("image {y} of {x} is out of range"));
            }
            if seen[yi] {
                return Err(validation!("image {y} is repeated"));
            }
            seen[yi] = true;
        }
        Ok(Permutation {
            width: len.trailing_zeros() as usize,
            map,
        })
    }

    pub fn from_fn(width: usize, f: impl Fn(u64) -> u64) -> Result<Self> {
        Self::new((0..1u64 << width).map(f).collect())
    }

    /// Caller guarantees bijectivity (e.g. XOR-target maps).
    pub(crate) fn from_fn_unchecked(width: usize, f: impl Fn(u64) -> u64) -> Self {
        let map: Vec<u64> = (0..1u64 << width).map(f).collect();
        debug_assert!(Permutation::new(map.clone()).is_ok());
        Permutation { width, map }
    }

    pub fn identity(width: usize) -> Self {
        Permutation {
            width,
            map: (0..1u64 << width).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn image(&self, x: u64) -> u64 {
        self.map[x as usize]
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &Permutation) -> Result<Permutation> {
        if self.width != first.width {
            return Err(domain!(
                "cannot compose widths {} and {}",
                self.width,
                first.width
            ));
        }
        Ok(Permutation {
            width: self.width,
            map: first.map.iter().map(|&x| self.map[x as usize]).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.map.len()];
        for (x, &y) in self.map.iter().enumerate() {
            inv[y as usize] = x as u64;
        }
        Permutation {
            width: self.width,
            map: inv,
        }
    }
}

/// Dense vector of `2^n` amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Amplitude>,
}

impl StateVector {
    /// `|a>` on `n` qubits.
    pub fn basis_state(n: usize, a: u64) -> Result<Self> {
        check_capacity(n)?;
        let len = 1usize << n;
        if a >= len as u64 {
            return Err(domain!("basis index {a} out of range for {n} qubits"));
        }
        let mut amps = vec![Amplitude::new(0.0, 0.0); len];
        amps[a as usize] = Amplitude::new(1.0, 0.0);
        Ok(StateVector {
            num_qubits: n,
            amps,
        })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::basis_state(n, 0)
    }

    /// Equal superposition over all `2^n` basis states.
    pub fn uniform(n: usize) -> Result<Self> {
        check_capacity(n)?;
        let len = 1usize << n;
        let c = Amplitude::new(1.0 / (len as f64).sqrt(), 0.0);
        Ok(StateVector {
            num_qubits: n,
            amps: vec![c; len],
        })
    }

    /// Wraps raw amplitudes; rejects non-finite entries and norms off by more
    /// than [`NORM_TOLERANCE`].
    pub fn from_amplitudes(amps: Vec<Amplitude>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(validation!("amplitude count {len} is not 2^n with n >= 1"));
        }
        let n = len.trailing_zeros() as usize;
        check_capacity(n)?;
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(validation!("non-finite amplitude"));
        }
        let state = StateVector {
            num_qubits: n,
            amps,
        };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(validation!("squared norm {norm} is not 1"));
        }
        Ok(state)
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(mut amps: Vec<Amplitude>) -> Result<Self> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(validation!("cannot normalize a zero or non-finite vector"));
        }
        for a in amps.iter_mut() {
            *a /= norm;
        }
        Self::from_amplitudes(amps)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amps
    }

    pub fn amplitude(&self, index: u64) -> Amplitude {
        self.amps[index as usize]
    }

    pub fn into_amplitudes(self) -> Vec<Amplitude> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Amplitude> {
        if self.len() != other.len() {
            return Err(domain!("inner product of mismatched registers"));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_deviation(&self, other: &StateVector) -> f64 {
        assert_eq!(self.len(), other.len(), "mismatched registers");
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `self ⊗ low`: `self` occupies the leading (most significant) qubits.
    pub fn tensor(&self, low: &StateVector) -> Result<StateVector> {
        let n = self.num_qubits + low.num_qubits;
        check_capacity(n)?;
        let mut amps = Vec::with_capacity(self.len() * low.len());
        for a in &self.amps {
            amps.extend(low.amps.iter().map(|b| a * b));
        }
        Ok(StateVector {
            num_qubits: n,
            amps,
        })
    }

    /// Bit position of `qubit` inside the basis index.
    fn shift(&self, qubit: usize) -> usize {
        self.num_qubits - 1 - qubit
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(domain!(
                "qubit {qubit} out of range for {} qubits",
                self.num_qubits
            ));
        }
        Ok(())
    }

    pub(crate) fn check_span(&self, span: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.num_qubits];
        for &q in span {
            self.check_qubit(q)?;
            if seen[q] {
                return Err(domain!("qubit {q} repeated in span"));
            }
            seen[q] = true;
        }
        Ok(())
    }

    /// Value of the span bits within a basis index.
    pub(crate) fn span_value(&self, index: usize, span: &[usize]) -> u64 {
        span.iter().fold(0u64, |acc, &q| {
            (acc << 1) | ((index >> self.shift(q)) & 1) as u64
        })
    }

    /// Basis index with the span bits replaced by `value`.
    pub(crate) fn with_span_value(&self, index: usize, span: &[usize], value: u64) -> usize {
        let k = span.len();
        span.iter().enumerate().fold(index, |acc, (i, &q)| {
            let bit = ((value >> (k - 1 - i)) & 1) as usize;
            let s = self.shift(q);
            (acc & !(1 << s)) | (bit << s)
        })
    }

    /// Applies a 2x2 unitary to `target`.
    pub fn apply_single_qubit(&mut self, gate: &Gate2x2, target: usize) -> Result<()> {
        self.check_qubit(target)?;
        let stride = 1usize << self.shift(target);
        let [[g00, g01], [g10, g11]] = *gate.matrix();
        for base in (0..self.amps.len()).step_by(stride << 1) {
            for i in base..base + stride {
                let a0 = self.amps[i];
                let a1 = self.amps[i + stride];
                self.amps[i] = g00 * a0 + g01 * a1;
                self.amps[i + stride] = g10 * a0 + g11 * a1;
            }
        }
        Ok(())
    }

    /// Applies `gate` to `target` on the subspace where `control` is 1.
    pub fn apply_controlled(
        &mut self,
        gate: &Gate2x2,
        control: usize,
        target: usize,
    ) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(domain!("control and target are both qubit {control}"));
        }
        let stride = 1usize << self.shift(target);
        let cmask = 1usize << self.shift(control);
        let [[g00, g01], [g10, g11]] = *gate.matrix();
        for i in 0..self.amps.len() {
            if i & stride != 0 || i & cmask == 0 {
                continue;
            }
            let j = i | stride;
            let a0 = self.amps[i];
            let a1 = self.amps[j];
            self.amps[i] = g00 * a0 + g01 * a1;
            self.amps[j] = g10 * a0 + g11 * a1;
        }
        Ok(())
    }

    /// Applies `gate` to every qubit in `qubits`.
    pub fn apply_to_each(
        &mut self,
        gate: &Gate2x2,
        qubits: impl IntoIterator<Item = usize>,
    ) -> Result<()> {
        for q in qubits {
            self.apply_single_qubit(gate, q)?;
        }
        Ok(())
    }

    pub fn swap(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Ok(());
        }
        let (ma, mb) = (1usize << self.shift(a), 1usize << self.shift(b));
        for i in 0..self.amps.len() {
            // visit each swapped pair once, from the side with a=1, b=0
            if i & ma != 0 && i & mb == 0 {
                self.amps.swap(i, (i & !ma) | mb);
            }
        }
        Ok(())
    }

    /// Relabels the span bits `x -> perm(x)`; all other bits are untouched.
    pub fn apply_permutation(&mut self, perm: &Permutation, span: &[usize]) -> Result<()> {
        self.check_span(span)?;
        if perm.width() != span.len() {
            return Err(domain!(
                "permutation width {} does not match span of {} qubits",
                perm.width(),
                span.len()
            ));
        }
        self.apply_span_map(span, |x| perm.image(x));
        Ok(())
    }

    /// Caller guarantees `f` is a bijection on span values.
    pub(crate) fn apply_span_map(&mut self, span: &[usize], f: impl Fn(u64) -> u64) {
        let mut out = vec![Amplitude::new(0.0, 0.0); self.amps.len()];
        for (i, &a) in self.amps.iter().enumerate() {
            let x = self.span_value(i, span);
            out[self.with_span_value(i, span, f(x))] = a;
        }
        self.amps = out;
    }

    /// Born-rule probabilities of every basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Distribution of the span value, summed over all other qubits.
    pub fn marginal_probabilities(&self, span: &[usize]) -> Result<Vec<f64>> {
        self.check_span(span)?;
        let mut out = vec![0.0; 1usize << span.len()];
        for (i, a) in self.amps.iter().enumerate() {
            out[self.span_value(i, span) as usize] += a.norm_sqr();
        }
        Ok(out)
    }

    fn check_measurable(&self) -> Result<()> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > MEASURE_NORM_TOLERANCE {
            return Err(validation!(
                "cannot measure a state with squared norm {norm}"
            ));
        }
        Ok(())
    }

    /// Samples a basis index without disturbing the state.
    pub fn measure_all(&self, rng: &mut Prng) -> Result<u64> {
        self.check_measurable()?;
        Ok(sample_index(&self.probabilities(), rng))
    }

    /// Samples a basis index and collapses onto it.
    pub fn measure_all_collapse(&mut self, rng: &mut Prng) -> Result<u64> {
        let outcome = self.measure_all(rng)?;
        self.amps.fill(Amplitude::new(0.0, 0.0));
        self.amps[outcome as usize] = Amplitude::new(1.0, 0.0);
        Ok(outcome)
    }

    /// Samples the span value without disturbing the state.
    pub fn measure_span(&self, span: &[usize], rng: &mut Prng) -> Result<u64> {
        self.check_measurable()?;
        Ok(sample_index(&self.marginal_probabilities(span)?, rng))
    }
}

/// Inverse-CDF draw from a discrete distribution.
pub fn sample_index(probs: &[f64], rng: &mut Prng) -> u64 {
    let total: f64 = probs.iter().sum();
    let u = rng.next_f64() * total;
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_nonzero = i;
        }
        acc += p;
        if u < acc {
            return i as u64;
        }
    }
    last_nonzero as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{hadamard, pauli_x, phase_shifter, r_k};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Amplitude {
        Amplitude::new(re, im)
    }

    #[test]
    fn basis_state_digit_convention() {
        let s = StateVector::basis_state(2, 0).unwrap();
        assert_eq!(
            s.amplitudes(),
            &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]
        );
        let s = StateVector::basis_state(2, 2).unwrap();
        assert_eq!(s.amplitude(2), c(1., 0.));
        // |10>: qubit 0 set
        let mut t = StateVector::zero(2).unwrap();
        t.apply_single_qubit(&pauli_x(), 0).unwrap();
        assert_eq!(s, t);
        assert!(matches!(
            StateVector::basis_state(3, 8),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn capacity_cap() {
        assert!(matches!(
            StateVector::zero(DEFAULT_MAX_QUBITS + 1),
            Err(Error::Capacity(_))
        ));
        assert!(matches!(StateVector::zero(0), Err(Error::Domain(_))));
    }

    #[test]
    fn hadamard_examples() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_single_qubit(&hadamard(), 0).unwrap();
        assert!((s.amplitude(0) - c(FRAC_1_SQRT_2, 0.)).norm() < 1e-15);
        assert!((s.amplitude(1) - c(FRAC_1_SQRT_2, 0.)).norm() < 1e-15);

        let mut s = StateVector::basis_state(1, 1).unwrap();
        s.apply_single_qubit(&hadamard(), 0).unwrap();
        s.apply_single_qubit(&hadamard(), 0).unwrap();
        assert!(s.max_deviation(&StateVector::basis_state(1, 1).unwrap()) < 1e-12);

        let mut s = StateVector::uniform(3).unwrap();
        let before = s.clone();
        s.apply_single_qubit(&Gate2x2::identity(), 1).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn target_out_of_range() {
        let mut s = StateVector::zero(2).unwrap();
        assert!(matches!(
            s.apply_single_qubit(&hadamard(), 2),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            s.apply_controlled(&hadamard(), 1, 1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn controlled_examples() {
        // control 0 everywhere: unchanged
        let mut s = StateVector::zero(2).unwrap();
        s.apply_single_qubit(&hadamard(), 1).unwrap();
        let before = s.clone();
        s.apply_controlled(&pauli_x(), 0, 1).unwrap();
        assert_eq!(s, before);

        for k in 1..6 {
            let mut s = StateVector::basis_state(2, 3).unwrap();
            s.apply_controlled(&r_k(k).unwrap(), 0, 1).unwrap();
            let expected = Amplitude::from_polar(1.0, 2.0 * PI / f64::powi(2.0, k as i32));
            assert!((s.amplitude(3) - expected).norm() < 1e-14);
        }

        // kickback interferometer
        for &phi in &[0.0, 0.3, 1.0, PI / 2.0, PI, 4.0] {
            let mut s = StateVector::basis_state(2, 1).unwrap();
            s.apply_single_qubit(&hadamard(), 0).unwrap();
            s.apply_controlled(&phase_shifter(phi), 0, 1).unwrap();
            s.apply_single_qubit(&hadamard(), 0).unwrap();
            let p = s.marginal_probabilities(&[0]).unwrap();
            assert!((p[0] - 0.5 * (1.0 + phi.cos())).abs() < 1e-12);
        }
    }

    #[test]
    fn permutation_examples() {
        let mut s = StateVector::uniform(3).unwrap();
        s.apply_single_qubit(&phase_shifter(0.7), 2).unwrap();
        let before = s.clone();
        s.apply_permutation(&Permutation::identity(2), &[0, 2])
            .unwrap();
        assert_eq!(s, before);

        let swap01 = Permutation::new(vec![1, 0, 2, 3]).unwrap();
        let mut s = StateVector::basis_state(2, 0).unwrap();
        s.apply_permutation(&swap01, &[0, 1]).unwrap();
        assert_eq!(s, StateVector::basis_state(2, 1).unwrap());

        assert!(matches!(
            Permutation::new(vec![0, 0, 2, 3]),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            Permutation::new(vec![0, 4, 2, 3]),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn permutation_on_non_leading_span() {
        // span [2, 0] on |abc>: span value = c*2 + a
        let mut s = StateVector::basis_state(3, 0b001).unwrap();
        let inc = Permutation::from_fn(2, |x| (x + 1) % 4).unwrap();
        s.apply_permutation(&inc, &[2, 0]).unwrap();
        // span value was 2 (c=1,a=0) -> 3 (c=1,a=1)
        assert_eq!(s, StateVector::basis_state(3, 0b101).unwrap());
    }

    #[test]
    fn probabilities_examples() {
        assert_eq!(
            StateVector::basis_state(2, 3).unwrap().probabilities(),
            vec![0., 0., 0., 1.]
        );
        for p in StateVector::uniform(2).unwrap().probabilities() {
            assert!((p - 0.25).abs() < 1e-15);
        }
        let mut s = StateVector::basis_state(1, 1).unwrap();
        s.apply_single_qubit(&hadamard(), 0).unwrap();
        let p = s.probabilities();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn measure_examples() {
        let s = StateVector::basis_state(3, 5).unwrap();
        for seed in 0..20 {
            assert_eq!(s.measure_all(&mut Prng::seed_from_u64(seed)).unwrap(), 5);
        }

        let s = StateVector::uniform(1).unwrap();
        let mut rng = Prng::seed_from_u64(42);
        let shots = 100_000;
        let zeros = (0..shots)
            .filter(|_| s.measure_all(&mut rng).unwrap() == 0)
            .count();
        assert!((zeros as f64 / shots as f64 - 0.5).abs() < 0.01);

        let raw = StateVector {
            num_qubits: 1,
            amps: vec![c(1.0, 0.0), c(1.0, 0.0)],
        };
        assert!(matches!(
            raw.measure_all(&mut rng),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn collapse_mode() {
        let mut s = StateVector::uniform(3).unwrap();
        let mut rng = Prng::seed_from_u64(9);
        let x = s.measure_all_collapse(&mut rng).unwrap();
        assert_eq!(s, StateVector::basis_state(3, x).unwrap());
    }

    #[test]
    fn measurement_is_seed_deterministic() {
        let s = StateVector::uniform(4).unwrap();
        let run = |seed| {
            let mut rng = Prng::seed_from_u64(seed);
            (0..32)
                .map(|_| s.measure_all(&mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }

    #[test]
    fn from_amplitudes_rejects_bad_input() {
        assert!(StateVector::from_amplitudes(vec![c(1., 0.); 3]).is_err());
        assert!(StateVector::from_amplitudes(vec![c(f64::NAN, 0.), c(0., 0.)]).is_err());
        assert!(StateVector::from_amplitudes(vec![c(1., 0.), c(1., 0.)]).is_err());
        assert!(StateVector::normalized(vec![c(1., 0.), c(1., 0.)]).is_ok());
    }

    #[test]
    fn swap_and_tensor() {
        let a = StateVector::basis_state(1, 1).unwrap();
        let b = StateVector::basis_state(2, 1).unwrap();
        let mut ab = a.tensor(&b).unwrap();
        assert_eq!(ab, StateVector::basis_state(3, 0b101).unwrap());
        ab.swap(0, 1).unwrap();
        assert_eq!(ab, StateVector::basis_state(3, 0b011).unwrap());
    }
}

//! Single-query promise problems: Deutsch, Deutsch-Jozsa, the parity
//! generalisation, Bernstein-Vazirani and affine matrix recovery.
//!
//! All of them run the same network: control register in uniform
//! superposition, ancilla set to `|c>` and Hadamard-transformed, one
//! f-controlled-NOT, Hadamards on the control register, readout. With every
//! ancilla bit of `c` set the ancilla is `(|0>-|1>)/√2` per qubit and the
//! control branch `|x>` picks up `(-1)^{parity f(x)}`.

use serde::Serialize;

use super::Verdict;
use crate::error::{domain, Result};
use crate::gates::{f_controlled_not, hadamard, pauli_x, Oracle};
use crate::statevec::{Amplitude, Prng, StateVector};

/// `P(|0...0>)` further than this from 0 and 1 flags a promise violation.
pub const PROMISE_DIAGNOSTIC_THRESHOLD: f64 = 1e-6;

struct NetworkRun {
    state: StateVector,
    n: usize,
    m: usize,
    calls: u64,
}

impl NetworkRun {
    fn control(&self) -> Vec<usize> {
        (0..self.n).collect()
    }

    fn distribution(&self) -> Result<Vec<f64>> {
        self.state.marginal_probabilities(&self.control())
    }

    /// Amplitude of `|x>` on the control register against the ancilla state
    /// `⊗ (|0> + (-1)^{c_i}|1>)/√2`.
    fn control_amplitude(&self, x: u64, c: u64) -> Amplitude {
        let m = self.m;
        let scale = (-(m as f64) / 2.0).exp2();
        (0..1u64 << m)
            .map(|y| {
                let sign = if (y & c).count_ones() % 2 == 1 {
                    -1.0
                } else {
                    1.0
                };
                self.state.amplitude((x << m) | y) * sign * scale
            })
            .sum()
    }
}

fn run_network(oracle: &Oracle, c: u64) -> Result<NetworkRun> {
    let (n, m) = (oracle.n_in(), oracle.m_out());
    let mut state = StateVector::zero(n + m)?;
    for i in 0..m {
        if (c >> (m - 1 - i)) & 1 == 1 {
            state.apply_single_qubit(&pauli_x(), n + i)?;
        }
    }
    let h = hadamard();
    state.apply_to_each(&h, 0..n + m)?;
    let before = oracle.call_count();
    let input: Vec<usize> = (0..n).collect();
    let output: Vec<usize> = (n..n + m).collect();
    f_controlled_not(oracle, &mut state, &input, &output)?;
    let calls = oracle.call_count() - before;
    state.apply_to_each(&h, 0..n)?;
    Ok(NetworkRun { state, n, m, calls })
}

/// Outcome of a constant-versus-balanced style query.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PromiseReport {
    pub verdict: Verdict,
    pub oracle_calls: u64,
    pub outcome: u64,
    /// Pre-measurement probability of `outcome`.
    pub outcome_probability: f64,
    /// Amplitude `(re, im)` of `|0...0>` on the control register,
    /// `Σ_x (-1)^{f(x)} / 2^n` under the promise.
    pub zero_amplitude: (f64, f64),
    pub zero_probability: f64,
    /// `zero_probability` is not within the diagnostic threshold of 0 or 1.
    pub promise_suspect: bool,
    /// Pre-measurement distribution of the control register.
    pub distribution: Vec<f64>,
}

fn classify(oracle: &Oracle, rng: &mut Prng) -> Result<PromiseReport> {
    let c = (1u64 << oracle.m_out()) - 1;
    let run = run_network(oracle, c)?;
    let distribution = run.distribution()?;
    let outcome = run.state.measure_span(&run.control(), rng)?;
    let zero = run.control_amplitude(0, c);
    let zero_probability = distribution[0];
    let t = PROMISE_DIAGNOSTIC_THRESHOLD;
    Ok(PromiseReport {
        verdict: if outcome == 0 {
            Verdict::Constant
        } else {
            Verdict::Balanced
        },
        oracle_calls: run.calls,
        outcome,
        outcome_probability: distribution[outcome as usize],
        zero_amplitude: (zero.re, zero.im),
        zero_probability,
        promise_suspect: zero_probability > t && zero_probability < 1.0 - t,
        distribution,
    })
}

/// Constant or balanced for a one-bit function, with one query.
pub fn deutsch(oracle: &Oracle, rng: &mut Prng) -> Result<PromiseReport> {
    if oracle.n_in() != 1 || oracle.m_out() != 1 {
        return Err(domain!(
            "Deutsch needs a 1->1 oracle, got {}->{}",
            oracle.n_in(),
            oracle.m_out()
        ));
    }
    classify(oracle, rng)
}

/// Constant or balanced for `f: {0,1}^n -> {0,1}` under the promise.
pub fn deutsch_jozsa(n: usize, oracle: &Oracle, rng: &mut Prng) -> Result<PromiseReport> {
    if oracle.n_in() != n || oracle.m_out() != 1 {
        return Err(domain!(
            "expected an {n}->1 oracle, got {}->{}",
            oracle.n_in(),
            oracle.m_out()
        ));
    }
    classify(oracle, rng)
}

/// Whether the parity of `f(x)` is constant or evenly balanced.
pub fn parity_promise(
    n: usize,
    m: usize,
    oracle: &Oracle,
    rng: &mut Prng,
) -> Result<PromiseReport> {
    if oracle.n_in() != n || oracle.m_out() != m {
        return Err(domain!(
            "expected an {n}->{m} oracle, got {}->{}",
            oracle.n_in(),
            oracle.m_out()
        ));
    }
    if m > n {
        return Err(domain!("parity promise needs m <= n, got m={m} n={n}"));
    }
    classify(oracle, rng)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BvReport {
    pub a: u64,
    /// `f(0...0)`, from one classical evaluation outside the network.
    pub b: u64,
    pub oracle_calls: u64,
    /// Queries a classical algorithm needs: one per input bit.
    pub classical_calls: u64,
    pub outcome_probability: f64,
    /// Sign of the readout amplitude, `(-1)^b` for a linear `f`.
    pub global_phase: f64,
}

/// Recovers `a` from `f(x) = (a·x) ⊕ b` with a single query. A non-linear
/// `f` produces an arbitrary readout.
pub fn bernstein_vazirani(n: usize, oracle: &Oracle, rng: &mut Prng) -> Result<BvReport> {
    if oracle.n_in() != n || oracle.m_out() != 1 {
        return Err(domain!(
            "expected an {n}->1 oracle, got {}->{}",
            oracle.n_in(),
            oracle.m_out()
        ));
    }
    let run = run_network(oracle, 1)?;
    let a = run.state.measure_span(&run.control(), rng)?;
    let amp = run.control_amplitude(a, 1);
    Ok(BvReport {
        a,
        b: oracle.eval(0),
        oracle_calls: run.calls,
        classical_calls: n as u64,
        outcome_probability: amp.norm_sqr(),
        global_phase: amp.re.signum(),
    })
}

/// `f(x) = (A·x) ⊕ b` over GF(2).
///
/// Row `i` of `A` is an `n`-bit integer whose most significant bit is the
/// coefficient of `x_1`; output bit `i` is the `i`-th most significant bit
/// of `f(x)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AffineSpec {
    pub n: usize,
    pub m: usize,
    pub rows: Vec<u64>,
    pub b: u64,
}

impl AffineSpec {
    pub fn new(n: usize, rows: Vec<u64>, b: u64) -> Result<Self> {
        let m = rows.len();
        if n == 0 || m == 0 || n > 24 || m > 24 {
            return Err(domain!("affine map dimensions {m}x{n} out of range"));
        }
        if rows.iter().any(|r| r >> n != 0) || b >> m != 0 {
            return Err(domain!("matrix row or offset wider than declared"));
        }
        Ok(AffineSpec { n, m, rows, b })
    }

    pub fn eval(&self, x: u64) -> u64 {
        let ax = self.rows.iter().fold(0u64, |acc, row| {
            (acc << 1) | ((row & x).count_ones() % 2) as u64
        });
        ax ^ self.b
    }

    /// Row vector `c·A`, with `c` read most significant bit first.
    pub fn left_multiply(&self, c: u64) -> u64 {
        self.rows
            .iter()
            .enumerate()
            .filter(|(i, _)| (c >> (self.m - 1 - i)) & 1 == 1)
            .fold(0, |acc, (_, row)| acc ^ row)
    }

    pub fn oracle(&self) -> Result<Oracle> {
        Oracle::from_fn(self.n, self.m, |x| self.eval(x))
    }
}

/// One run of the network with the ancilla prepared from `|c>`; the
/// readout is `c·A`.
pub fn affine_single_run(oracle: &Oracle, c: u64, rng: &mut Prng) -> Result<u64> {
    if c >> oracle.m_out() != 0 {
        return Err(domain!("selector {c} wider than {} bits", oracle.m_out()));
    }
    let run = run_network(oracle, c)?;
    run.state.measure_span(&run.control(), rng)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AffineReport {
    /// Rows of `A`; `b` is not recovered.
    pub rows: Vec<u64>,
    pub oracle_calls: u64,
}

/// Recovers `A` one row at a time using the `m` unit selectors.
pub fn affine_recovery(
    n: usize,
    m: usize,
    oracle: &Oracle,
    rng: &mut Prng,
) -> Result<AffineReport> {
    if oracle.n_in() != n || oracle.m_out() != m {
        return Err(domain!(
            "expected an {n}->{m} oracle, got {}->{}",
            oracle.n_in(),
            oracle.m_out()
        ));
    }
    let before = oracle.call_count();
    let rows = (0..m)
        .map(|i| affine_single_run(oracle, 1 << (m - 1 - i), rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(AffineReport {
        rows,
        oracle_calls: oracle.call_count() - before,
    })
}

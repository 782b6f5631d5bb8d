//! Single-qubit gates and the reversible classical operations used as
//! oracles: f-controlled-NOT and controlled modular multiplication.

mod oracle;

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{domain, validation, Result};
use crate::order_finding::{gcd, mod_exp};
use crate::statevec::{Amplitude, StateVector};

pub use oracle::Oracle;

/// Unitarity tolerance applied when a gate is constructed.
pub const UNITARY_TOLERANCE: f64 = 1e-10;

/// A 2x2 unitary, validated once at construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gate2x2 {
    m: [[Amplitude; 2]; 2],
}

impl Gate2x2 {
    pub fn new(m: [[Amplitude; 2]; 2]) -> Result<Self> {
        if m.iter()
            .flatten()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(validation!("gate has a non-finite entry"));
        }
        let g = Gate2x2 { m };
        let prod = g.adjoint().mul(&g);
        let id = Gate2x2::identity();
        let dev = (0..2)
            .flat_map(|r| (0..2).map(move |c| (r, c)))
            .map(|(r, c)| (prod.m[r][c] - id.m[r][c]).norm())
            .fold(0.0, f64::max);
        if dev > UNITARY_TOLERANCE {
            return Err(validation!("gate is not unitary (deviation {dev:e})"));
        }
        Ok(g)
    }

    pub fn identity() -> Self {
        let (o, z) = (Amplitude::new(1.0, 0.0), Amplitude::new(0.0, 0.0));
        Gate2x2 {
            m: [[o, z], [z, o]],
        }
    }

    pub fn matrix(&self) -> &[[Amplitude; 2]; 2] {
        &self.m
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Gate2x2 {
            m: [
                [m[0][0].conj(), m[1][0].conj()],
                [m[0][1].conj(), m[1][1].conj()],
            ],
        }
    }

    /// Matrix product `self * rhs` (apply `rhs` first).
    pub fn mul(&self, rhs: &Gate2x2) -> Self {
        let (a, b) = (&self.m, &rhs.m);
        let mut m = [[Amplitude::new(0.0, 0.0); 2]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Gate2x2 { m }
    }

    pub fn max_deviation(&self, other: &Gate2x2) -> f64 {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn diag_phase(theta: f64) -> Gate2x2 {
    let (o, z) = (Amplitude::new(1.0, 0.0), Amplitude::new(0.0, 0.0));
    Gate2x2 {
        m: [[o, z], [z, Amplitude::from_polar(1.0, theta)]],
    }
}

/// Hadamard: rows `(1, 1)/√2` and `(1, -1)/√2`.
pub fn hadamard() -> Gate2x2 {
    let h = Amplitude::new(FRAC_1_SQRT_2, 0.0);
    Gate2x2 {
        m: [[h, h], [h, -h]],
    }
}

pub fn pauli_x() -> Gate2x2 {
    let (o, z) = (Amplitude::new(1.0, 0.0), Amplitude::new(0.0, 0.0));
    Gate2x2 {
        m: [[z, o], [o, z]],
    }
}

/// `R_k = diag(1, e^{2πi/2^k})`. Applied exactly for every `k`, no truncation.
pub fn r_k(k: u32) -> Result<Gate2x2> {
    if k < 1 {
        return Err(domain!("R_k needs k >= 1, got {k}"));
    }
    Ok(diag_phase(2.0 * PI * (-(k as f64)).exp2()))
}

/// `diag(1, e^{iφ})`; `φ` is the relative phase between the two arms.
pub fn phase_shifter(phi: f64) -> Gate2x2 {
    diag_phase(phi)
}

/// Applies `|x>|y> -> |x>|y ⊕ f(x)>` with `x` on `input_span` and `y` on
/// `output_span`. Counts as one oracle call however wide the superposition.
pub fn f_controlled_not(
    oracle: &Oracle,
    state: &mut StateVector,
    input_span: &[usize],
    output_span: &[usize],
) -> Result<()> {
    if input_span.len() != oracle.n_in() || output_span.len() != oracle.m_out() {
        return Err(domain!(
            "spans of width {}/{} do not match oracle arity {}->{}",
            input_span.len(),
            output_span.len(),
            oracle.n_in(),
            oracle.m_out()
        ));
    }
    if input_span.iter().any(|q| output_span.contains(q)) {
        return Err(domain!("input and output spans overlap"));
    }
    let span: Vec<usize> = input_span.iter().chain(output_span).copied().collect();
    state.check_span(&span)?;
    let m = oracle.m_out();
    state.apply_span_map(&span, |xy| xy ^ oracle.eval(xy >> m));
    oracle.record_call();
    Ok(())
}

/// Controlled multiplication by `a^(2^j) mod N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModMultSpec {
    a: u64,
    modulus: u64,
    j: u32,
}

impl ModMultSpec {
    pub fn new(a: u64, modulus: u64, j: u32) -> Result<Self> {
        if modulus < 2 {
            return Err(domain!("modulus must be at least 2, got {modulus}"));
        }
        if a == 0 || a >= modulus {
            return Err(domain!("base {a} outside [1, {modulus})"));
        }
        if gcd(a, modulus) != 1 {
            return Err(domain!("gcd({a}, {modulus}) != 1"));
        }
        Ok(ModMultSpec { a, modulus, j })
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn power(&self) -> u32 {
        self.j
    }

    /// `a^(2^j) mod N`, by `j` repeated squarings.
    pub fn multiplier(&self) -> u64 {
        (0..self.j).fold(self.a % self.modulus, |b, _| {
            mod_exp(b, 2, self.modulus).unwrap()
        })
    }

    /// Elementary-gate count of a reversible circuit for this operation,
    /// `O(n^2)` in the register width. Recorded only; never materialized.
    pub fn elementary_gate_estimate(&self) -> u64 {
        let n = 64 - (self.modulus - 1).leading_zeros() as u64;
        n * n
    }
}

/// On the control-1 branch maps `x -> b·x mod N` for `x < N` with
/// `b = a^(2^j) mod N`; values `x >= N` are fixed points.
pub fn controlled_modmult(
    spec: &ModMultSpec,
    state: &mut StateVector,
    control: usize,
    target_span: &[usize],
) -> Result<()> {
    let n = spec.modulus();
    if target_span.len() >= 64 || (1u64 << target_span.len()) < n {
        return Err(domain!(
            "target span of {} qubits cannot hold residues mod {n}",
            target_span.len()
        ));
    }
    if target_span.contains(&control) {
        return Err(domain!("control qubit {control} lies in the target span"));
    }
    let mut span = Vec::with_capacity(target_span.len() + 1);
    span.push(control);
    span.extend_from_slice(target_span);
    state.check_span(&span)?;
    let b = spec.multiplier();
    let w = target_span.len();
    state.apply_span_map(&span, |cx| {
        let x = cx & ((1u64 << w) - 1);
        if cx >> w == 0 || x >= n {
            cx
        } else {
            (1u64 << w) | ((b as u128 * x as u128) % n as u128) as u64
        }
    });
    Ok(())
}

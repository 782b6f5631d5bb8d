use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::gates::{f_controlled_not, hadamard, pauli_x, Oracle};
use crate::statevec::{Prng, StateVector};

/// `f_k(x) = 1` iff `x = k`.
#[derive(Clone, Debug)]
pub struct GroverOracle {
    n: usize,
    k: u64,
    oracle: Oracle,
}

impl GroverOracle {
    pub fn new(n: usize, k: u64) -> Result<Self> {
        if n == 0 || n > 20 {
            return Err(domain!("search width {n} outside 1..=20"));
        }
        if k >> n != 0 {
            return Err(domain!("tagged value {k} does not fit in {n} bits"));
        }
        Ok(GroverOracle {
            n,
            k,
            oracle: Oracle::from_fn(n, 1, |x| (x == k) as u64)?,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tagged(&self) -> u64 {
        self.k
    }

    pub fn call_count(&self) -> u64 {
        self.oracle.call_count()
    }
}

/// `round(π / (4θ) - 1/2)` with `sin θ = 2^{-n/2}`: the iteration count that
/// maximizes the success probability.
pub fn default_iterations(n: usize) -> u64 {
    let theta = (-(n as f64) / 2.0).exp2().asin();
    (PI / (4.0 * theta) - 0.5).round().max(0.0) as u64
}

struct Search<'a> {
    oracle: &'a GroverOracle,
    zero_flip: Oracle,
    state: StateVector,
}

impl<'a> Search<'a> {
    /// Uniform control register, ancilla in `(|0>-|1>)/√2`.
    fn new(oracle: &'a GroverOracle) -> Result<Self> {
        let n = oracle.n;
        let mut state = StateVector::zero(n + 1)?;
        state.apply_single_qubit(&pauli_x(), n)?;
        state.apply_to_each(&hadamard(), 0..=n)?;
        Ok(Search {
            oracle,
            zero_flip: Oracle::from_fn(n, 1, |x| (x == 0) as u64)?,
            state,
        })
    }

    /// Tagged-item phase flip by kickback, then inversion about the mean
    /// (Hadamards around a kickback phase flip on `|0...0>`).
    fn iterate(&mut self) -> Result<()> {
        let n = self.oracle.n;
        let input: Vec<usize> = (0..n).collect();
        let h = hadamard();
        f_controlled_not(&self.oracle.oracle, &mut self.state, &input, &[n])?;
        self.state.apply_to_each(&h, 0..n)?;
        f_controlled_not(&self.zero_flip, &mut self.state, &input, &[n])?;
        self.state.apply_to_each(&h, 0..n)?;
        Ok(())
    }

    fn distribution(&self) -> Result<Vec<f64>> {
        let n = self.oracle.n;
        self.state
            .marginal_probabilities(&(0..n).collect::<Vec<_>>())
    }

    fn success(&self) -> Result<f64> {
        Ok(self.distribution()?[self.oracle.k as usize])
    }
}

/// Exact success probability after each of `0..=max_iterations` iterations.
pub fn grover_success_curve(oracle: &GroverOracle, max_iterations: u64) -> Result<Vec<f64>> {
    let mut search = Search::new(oracle)?;
    let mut curve = vec![search.success()?];
    for _ in 0..max_iterations {
        search.iterate()?;
        curve.push(search.success()?);
    }
    Ok(curve)
}

pub fn grover_success_probability(oracle: &GroverOracle, iterations: u64) -> Result<f64> {
    Ok(*grover_success_curve(oracle, iterations)?
        .last()
        .expect("non-empty"))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroverReport {
    pub outcome: u64,
    pub found: bool,
    pub iterations: u64,
    pub success_probability: f64,
    pub oracle_calls: u64,
}

pub fn grover_search(
    oracle: &GroverOracle,
    iterations: u64,
    rng: &mut Prng,
) -> Result<GroverReport> {
    let before = oracle.call_count();
    let mut search = Search::new(oracle)?;
    for _ in 0..iterations {
        search.iterate()?;
    }
    let dist = search.distribution()?;
    let n = oracle.n;
    let outcome = search
        .state
        .measure_span(&(0..n).collect::<Vec<_>>(), rng)?;
    Ok(GroverReport {
        outcome,
        found: outcome == oracle.k,
        iterations,
        success_probability: dist[oracle.k as usize],
        oracle_calls: oracle.call_count() - before,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_iterations_is_uniform() {
        for n in 1..=6 {
            let o = GroverOracle::new(n, 1).unwrap();
            let p = grover_success_probability(&o, 0).unwrap();
            assert!((p - (-(n as f64)).exp2()).abs() < 1e-12);
        }
    }

    #[test]
    fn two_qubits_one_iteration_is_certain() {
        for k in 0..4 {
            let o = GroverOracle::new(2, k).unwrap();
            assert!((grover_success_probability(&o, 1).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn three_qubits_two_iterations() {
        let o = GroverOracle::new(3, 5).unwrap();
        let p = grover_success_probability(&o, 2).unwrap();
        // 8-dim exact value: (11/(8√2))^2 = 121/128
        assert!((p - 121.0 / 128.0).abs() < 1e-10);
        assert!((p - 0.945).abs() < 1e-3);
    }

    #[test]
    fn default_counts() {
        assert_eq!(default_iterations(2), 1);
        assert_eq!(default_iterations(3), 2);
        assert_eq!(default_iterations(4), 3);
        assert_eq!(default_iterations(10), 25);
    }

    #[test]
    fn search_counts_calls() {
        let o = GroverOracle::new(4, 9).unwrap();
        let rep = grover_search(&o, 3, &mut Prng::seed_from_u64(2)).unwrap();
        assert_eq!(rep.oracle_calls, 3);
        assert!(rep.success_probability > 0.9);
        assert!(GroverOracle::new(3, 8).is_err());
    }
}

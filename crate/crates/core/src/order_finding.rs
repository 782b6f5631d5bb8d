//! Order finding on the simulated phase-estimation network, continued
//! fraction post-processing and RSA plaintext recovery from the order of the
//! ciphertext.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, validation, Error, Result};
use crate::gates::{controlled_modmult, ModMultSpec};
use crate::phase_estimation::{circuit_distribution, readout_state, EigenOracle};
use crate::statevec::{Amplitude, Prng, StateVector};

/// Total network runs allowed per [`find_order`] call.
pub const DEFAULT_TRIAL_CAP: u32 = 64;

/// Single-run failures tolerated before two-run lcm candidates are tried.
pub const LCM_FALLBACK_AFTER: u32 = 4;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd(a, b) * b
}

/// `(g, x, y)` with `a x + b y = g = gcd(a, b)`.
pub fn extended_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    (old_r, old_s, old_t)
}

/// Inverse of `a` modulo `m`, if it exists. Every residue is `0` mod 1.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    if m == 0 {
        return None;
    }
    if m == 1 {
        return Some(0);
    }
    let (g, x, _) = extended_gcd(a as i128, m as i128);
    (g == 1).then(|| x.rem_euclid(m as i128) as u64)
}

/// `a^e mod N` by square-and-multiply.
pub fn mod_exp(a: u64, mut e: u64, modulus: u64) -> Result<u64> {
    if modulus < 2 {
        return Err(domain!("modulus must be at least 2, got {modulus}"));
    }
    let n = modulus as u128;
    let mut base = a as u128 % n;
    let mut acc = 1u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % n;
        }
        base = base * base % n;
        e >>= 1;
    }
    Ok(acc as u64)
}

fn prime_factors(mut x: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= x {
        if x.is_multiple_of(p) {
            out.push(p);
            while x.is_multiple_of(p) {
                x /= p;
            }
        }
        p += 1;
    }
    if x > 1 {
        out.push(x);
    }
    out
}

/// True when `r` is the least positive exponent with `a^r = 1 mod N`.
pub fn is_order(a: u64, r: u64, modulus: u64) -> Result<bool> {
    if r == 0 || mod_exp(a, r, modulus)? != 1 {
        return Ok(false);
    }
    for p in prime_factors(r) {
        if mod_exp(a, r / p, modulus)? == 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Shrinks an exponent with `a^e = 1` down to the order of `a`.
fn reduce_to_order(a: u64, mut e: u64, modulus: u64) -> Result<u64> {
    for p in prime_factors(e) {
        while e.is_multiple_of(p) && mod_exp(a, e / p, modulus)? == 1 {
            e /= p;
        }
    }
    Ok(e)
}

fn bits_for(modulus: u64) -> usize {
    (64 - (modulus - 1).leading_zeros()) as usize
}

/// Find the least `r > 0` with `a^r = 1 mod N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OrderProblem {
    a: u64,
    modulus: u64,
    target_bits: usize,
    control_bits: usize,
}

impl OrderProblem {
    /// Target width `ceil(log2 N)`, control width twice that.
    pub fn new(a: u64, modulus: u64) -> Result<Self> {
        ModMultSpec::new(a, modulus, 0)?;
        let n = bits_for(modulus).max(1);
        Ok(OrderProblem {
            a,
            modulus,
            target_bits: n,
            control_bits: 2 * n,
        })
    }

    pub fn with_control_bits(mut self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(domain!("need at least one control qubit"));
        }
        self.control_bits = m;
        Ok(self)
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn target_bits(&self) -> usize {
        self.target_bits
    }

    pub fn control_bits(&self) -> usize {
        self.control_bits
    }
}

/// Eigenvector of `x -> a x mod N` with eigenvalue `e^{2πik/r}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PsiK {
    pub k: u64,
    pub r: u64,
}

/// `r^{-1/2} Σ_j e^{-2πikj/r} |a^j mod N>` on the target register.
///
/// `r` must be the true order. Only a test device: the order-finding network
/// itself starts from `|1>`.
pub fn prepare_psi_k(problem: &OrderProblem, k: u64, r: u64) -> Result<StateVector> {
    let (a, n) = (problem.a(), problem.modulus());
    if !is_order(a, r, n)? {
        return Err(validation!("{r} is not the order of {a} mod {n}"));
    }
    if k == 0 || k > r {
        return Err(domain!("eigenvector index {k} outside 1..={r}"));
    }
    let mut amps = vec![Amplitude::new(0.0, 0.0); 1 << problem.target_bits()];
    let scale = 1.0 / (r as f64).sqrt();
    let mut power = 1u64;
    for j in 0..r {
        let turns = ((k * j) % r) as f64 / r as f64;
        amps[power as usize] = Amplitude::from_polar(scale, -2.0 * PI * turns);
        power = mod_exp(power * a, 1, n)?;
    }
    StateVector::from_amplitudes(amps)
}

/// Controlled powers of `x -> a x mod N` together with the state loaded into
/// the target register.
#[derive(Clone, Debug)]
pub struct ModMultOracle {
    problem: OrderProblem,
    preparation: StateVector,
}

impl ModMultOracle {
    /// Target starts in `|1>`.
    pub fn from_one(problem: &OrderProblem) -> Result<Self> {
        Ok(ModMultOracle {
            problem: *problem,
            preparation: StateVector::basis_state(problem.target_bits(), 1)?,
        })
    }

    /// Target starts in `ψ_k`.
    pub fn from_psi_k(problem: &OrderProblem, k: u64, r: u64) -> Result<Self> {
        Ok(ModMultOracle {
            problem: *problem,
            preparation: prepare_psi_k(problem, k, r)?,
        })
    }
}

impl EigenOracle for ModMultOracle {
    fn target_width(&self) -> usize {
        self.problem.target_bits()
    }

    fn eigenstate(&self) -> Result<StateVector> {
        Ok(self.preparation.clone())
    }

    fn controlled_power(
        &self,
        state: &mut StateVector,
        j: u32,
        control: usize,
        target: &[usize],
    ) -> Result<()> {
        let spec = ModMultSpec::new(self.problem.a(), self.problem.modulus(), j)?;
        controlled_modmult(&spec, state, control, target)
    }
}

/// Exact control-register readout distribution of the order-finding network.
pub fn control_distribution(problem: &OrderProblem, oracle: &ModMultOracle) -> Result<Vec<f64>> {
    circuit_distribution(problem.control_bits(), oracle)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Convergent {
    pub p: u64,
    pub q: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConvergentResult {
    /// Denominator of the last convergent with `q < bound`.
    pub candidate: u64,
    pub convergents: Vec<Convergent>,
}

/// Continued-fraction convergents of `x / 2^m`.
pub fn convergents(x: u64, m: u32, bound: u64) -> Result<ConvergentResult> {
    if m == 0 || m > 62 {
        return Err(domain!("bit width {m} outside 1..=62"));
    }
    if x >> m != 0 {
        return Err(domain!("{x} is not below 2^{m}"));
    }
    let (mut num, mut den) = (x, 1u64 << m);
    let (mut p_prev, mut p) = (0u64, 1u64);
    let (mut q_prev, mut q) = (1u64, 0u64);
    let mut all = Vec::new();
    loop {
        let term = num / den;
        (p_prev, p) = (p, term * p + p_prev);
        (q_prev, q) = (q, term * q + q_prev);
        all.push(Convergent { p, q });
        let rem = num % den;
        if rem == 0 {
            break;
        }
        (num, den) = (den, rem);
    }
    let candidate = all.iter().rev().find(|c| c.q < bound).map_or(1, |c| c.q);
    Ok(ConvergentResult {
        candidate,
        convergents: all,
    })
}

/// How the returned order was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderMethod {
    SingleRun,
    TwoRunLcm,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderReport {
    pub a: u64,
    #[serde(rename = "N")]
    pub modulus: u64,
    pub m: usize,
    pub trials: u32,
    pub measured_x: Vec<u64>,
    pub candidates: Vec<u64>,
    pub convergents: Vec<Vec<Convergent>>,
    pub method: OrderMethod,
    pub r: u64,
    pub verified: bool,
}

/// Repeats the order-finding network until a verified order appears.
///
/// Each run starts the target in `|1>`, reads `x` from the control register
/// and takes the last convergent denominator below `N` as a candidate. After
/// [`LCM_FALLBACK_AFTER`] failed runs, the lcm of the latest two candidates
/// is tried as well. Any exponent that passes `a^r = 1` is reduced to the
/// least such exponent before it is returned.
pub fn find_order(problem: &OrderProblem, rng: &mut Prng) -> Result<OrderReport> {
    find_order_with_cap(problem, DEFAULT_TRIAL_CAP, rng)
}

pub fn find_order_with_cap(
    problem: &OrderProblem,
    cap: u32,
    rng: &mut Prng,
) -> Result<OrderReport> {
    let (a, n, m) = (problem.a(), problem.modulus(), problem.control_bits());
    let oracle = ModMultOracle::from_one(problem)?;
    let control: Vec<usize> = (0..m).collect();
    let mut report = OrderReport {
        a,
        modulus: n,
        m,
        trials: 0,
        measured_x: Vec::new(),
        candidates: Vec::new(),
        convergents: Vec::new(),
        method: OrderMethod::SingleRun,
        r: 0,
        verified: false,
    };
    let mut failures = 0u32;
    while report.trials < cap {
        let state = readout_state(m, &oracle)?;
        let x = state.measure_span(&control, rng)?;
        let cf = convergents(x, m as u32, n)?;
        report.trials += 1;
        report.measured_x.push(x);
        report.convergents.push(cf.convergents.clone());
        let previous = report.candidates.last().copied();
        report.candidates.push(cf.candidate);

        if mod_exp(a, cf.candidate, n)? == 1 {
            report.r = reduce_to_order(a, cf.candidate, n)?;
            report.verified = true;
            return Ok(report);
        }
        failures += 1;
        if failures > LCM_FALLBACK_AFTER {
            if let Some(prev) = previous {
                let l = lcm(prev, cf.candidate);
                if l > 0 && mod_exp(a, l, n)? == 1 {
                    report.r = reduce_to_order(a, l, n)?;
                    report.method = OrderMethod::TwoRunLcm;
                    report.verified = true;
                    return Ok(report);
                }
            }
        }
    }
    Err(Error::Failure(format!(
        "no verified order of {a} mod {n} after {cap} runs"
    )))
}

/// Fraction of pairs `(k1, k2)` in `{1..r}^2` with `gcd(k1, k2) = 1`.
pub fn coprime_pair_probability(r: u64) -> Result<f64> {
    if r == 0 {
        return Err(domain!("r must be positive"));
    }
    let count = (1..=r)
        .flat_map(|k1| (1..=r).map(move |k2| (k1, k2)))
        .filter(|&(k1, k2)| gcd(k1, k2) == 1)
        .count();
    Ok(count as f64 / (r * r) as f64)
}

/// An RSA ciphertext `C = P^e mod N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RsaInstance {
    #[serde(rename = "N")]
    pub modulus: u64,
    pub e: u64,
    #[serde(rename = "C")]
    pub ciphertext: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RsaReport {
    #[serde(rename = "P")]
    pub plaintext: u64,
    /// Order of `C` mod `N`; absent when `e = 1` short-circuits.
    pub order: Option<u64>,
    pub d: u64,
    pub trials: u32,
    pub verified: bool,
}

/// Recovers `P` from `C = P^e mod N` via the order of `C`: with
/// `e d = 1 mod ord(C)` we get `C^d = P`.
pub fn rsa_crack(inst: &RsaInstance, rng: &mut Prng) -> Result<RsaReport> {
    let RsaInstance {
        modulus: n,
        e,
        ciphertext: c,
    } = *inst;
    if n < 2 {
        return Err(domain!("modulus must be at least 2"));
    }
    if c == 0 || c >= n || gcd(c, n) != 1 {
        return Err(domain!("ciphertext {c} is not a unit mod {n}"));
    }
    if e == 0 {
        return Err(domain!("public exponent must be positive"));
    }
    let (plaintext, order, d, trials) = if e == 1 {
        (c, None, 1, 0)
    } else {
        let report = find_order(&OrderProblem::new(c, n)?, rng)?;
        let r = report.r;
        let d = mod_inverse(e % r, r).ok_or_else(|| {
            Error::Failure(format!("e = {e} is not invertible modulo ord(C) = {r}"))
        })?;
        (mod_exp(c, d, n)?, Some(r), d, report.trials)
    };
    if mod_exp(plaintext, e, n)? != c {
        return Err(Error::Internal(format!(
            "recovered {plaintext} does not re-encrypt to {c}"
        )));
    }
    Ok(RsaReport {
        plaintext,
        order,
        d,
        trials,
        verified: true,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TotientKey {
    #[serde(rename = "N")]
    pub modulus: u64,
    pub phi: u64,
    pub d: u64,
}

/// Classical path: `φ(N)` from the prime factorization (with multiplicity),
/// then `d = e^{-1} mod φ(N)`.
pub fn totient_decrypt(factors: &[u64], e: u64) -> Result<TotientKey> {
    if factors.is_empty() {
        return Err(domain!("empty factorization"));
    }
    let mut modulus = 1u64;
    for &p in factors {
        if p < 2 || prime_factors(p) != [p] {
            return Err(domain!("{p} is not prime"));
        }
        modulus = modulus
            .checked_mul(p)
            .ok_or_else(|| domain!("modulus overflows u64"))?;
    }
    let mut distinct = factors.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let phi = distinct.iter().fold(modulus, |acc, &p| acc / p * (p - 1));
    let d = mod_inverse(e, phi)
        .filter(|_| gcd(e, phi) == 1)
        .ok_or_else(|| domain!("gcd({e}, φ(N) = {phi}) != 1"))?;
    Ok(TotientKey { modulus, phi, d })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_order(a: u64, n: u64) -> u64 {
        let mut x = a % n;
        let mut r = 1;
        while x != 1 {
            x = x * a % n;
            r += 1;
        }
        r
    }

    #[test]
    fn mod_exp_examples() {
        assert_eq!(mod_exp(2, 10, 1000).unwrap(), 24);
        assert_eq!(mod_exp(7, 0, 33).unwrap(), 1);
        assert_eq!(mod_exp(7, 10, 33).unwrap(), 1);
        assert_eq!(brute_order(7, 33), 10);
        assert!(mod_exp(3, 3, 1).is_err());
        let big = (1u64 << 61) - 1;
        assert_eq!(mod_exp(3, big - 1, big).unwrap(), 1);
    }

    #[test]
    fn mod_exp_matches_multiply_loop() {
        for n in 2..40u64 {
            for a in 0..n {
                let mut acc = 1 % n;
                for e in 0..30u64 {
                    assert_eq!(mod_exp(a, e, n).unwrap(), acc);
                    acc = acc * a % n;
                }
            }
        }
    }

    #[test]
    fn inverse_and_lcm() {
        assert_eq!(mod_inverse(3, 20), Some(7));
        assert_eq!(mod_inverse(3, 10), Some(7));
        assert_eq!(mod_inverse(4, 10), None);
        assert_eq!(lcm(4, 6), 12);
        assert_eq!(extended_gcd(240, 46).0, 2);
    }

    #[test]
    fn psi_k_examples() {
        let problem = OrderProblem::new(2, 5).unwrap();
        let r = 4;
        let s = prepare_psi_k(&problem, r, r).unwrap();
        for j in 0..r {
            let idx = mod_exp(2, j, 5).unwrap();
            assert!((s.amplitude(idx) - Amplitude::new(0.5, 0.0)).norm() < 1e-15);
        }
        assert!(matches!(
            prepare_psi_k(&problem, 1, 2),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            prepare_psi_k(&problem, 1, 8),
            Err(Error::Validation(_))
        ));
        assert!(prepare_psi_k(&problem, 0, 4).is_err());
    }

    #[test]
    fn psi_k_sum_is_one() {
        let problem = OrderProblem::new(7, 15).unwrap();
        let r = brute_order(7, 15);
        let mut sum = vec![Amplitude::new(0.0, 0.0); 16];
        for k in 1..=r {
            let s = prepare_psi_k(&problem, k, r).unwrap();
            for (acc, a) in sum.iter_mut().zip(s.amplitudes()) {
                *acc += a;
            }
        }
        let total = StateVector::normalized(sum).unwrap();
        assert!(
            (total
                .fidelity(&StateVector::basis_state(4, 1).unwrap())
                .unwrap()
                - 1.0)
                .abs()
                < 1e-10
        );
    }

    #[test]
    fn convergent_examples() {
        let c = convergents(0, 5, 7).unwrap();
        assert_eq!(c.candidate, 1);
        assert_eq!(c.convergents, vec![Convergent { p: 0, q: 1 }]);

        assert_eq!(convergents(16, 5, 7).unwrap().candidate, 2);

        let c = convergents(1365, 12, 15).unwrap();
        assert_eq!(c.candidate, 3);
        assert_eq!(
            c.convergents,
            vec![
                Convergent { p: 0, q: 1 },
                Convergent { p: 1, q: 3 },
                Convergent { p: 1365, q: 4096 },
            ]
        );
        assert!(convergents(32, 5, 7).is_err());
    }

    #[test]
    fn convergents_are_reduced_and_approach_value() {
        for x in 0..256u64 {
            let res = convergents(x, 8, 300).unwrap();
            for c in &res.convergents {
                assert_eq!(gcd(c.p, c.q), 1);
            }
            let last = res.convergents.last().unwrap();
            assert_eq!(last.p * 256, x * last.q);
        }
    }

    #[test]
    fn trivial_base_has_order_one() {
        let report = find_order(
            &OrderProblem::new(1, 7).unwrap(),
            &mut Prng::seed_from_u64(0),
        )
        .unwrap();
        assert_eq!((report.r, report.trials), (1, 1));
    }

    #[test]
    fn order_of_four_mod_fifteen() {
        let report = find_order(
            &OrderProblem::new(4, 15).unwrap(),
            &mut Prng::seed_from_u64(7),
        )
        .unwrap();
        assert_eq!(report.r, 2);
        assert!(report.verified);
    }

    #[test]
    fn two_mod_five_concentrates_on_quarter_multiples() {
        let problem = OrderProblem::new(2, 5)
            .unwrap()
            .with_control_bits(6)
            .unwrap();
        let dist =
            control_distribution(&problem, &ModMultOracle::from_one(&problem).unwrap()).unwrap();
        for (x, p) in dist.iter().enumerate() {
            let expected = if x % 16 == 0 { 0.25 } else { 0.0 };
            assert!((p - expected).abs() < 1e-10, "x={x} p={p}");
        }
        let report = find_order(&problem, &mut Prng::seed_from_u64(1)).unwrap();
        assert_eq!(report.r, 4);
        assert!(report.measured_x.iter().all(|x| x % 16 == 0));
    }

    #[test]
    fn reduce_handles_multiples() {
        assert_eq!(reduce_to_order(4, 6, 15).unwrap(), 2);
        assert!(is_order(2, 4, 5).unwrap());
        assert!(!is_order(2, 8, 5).unwrap());
    }

    #[test]
    fn coprime_pairs_small() {
        assert_eq!(coprime_pair_probability(1).unwrap(), 1.0);
        assert_eq!(coprime_pair_probability(2).unwrap(), 0.75);
        assert!(coprime_pair_probability(0).is_err());
    }

    #[test]
    fn rsa_examples() {
        let mut rng = Prng::seed_from_u64(3);
        let inst = RsaInstance {
            modulus: 33,
            e: 1,
            ciphertext: 26,
        };
        let rep = rsa_crack(&inst, &mut rng).unwrap();
        assert_eq!((rep.plaintext, rep.trials), (26, 0));

        let key = totient_decrypt(&[3, 11], 3).unwrap();
        assert_eq!((key.modulus, key.phi, key.d), (33, 20, 7));
        assert_eq!(mod_exp(26, key.d, 33).unwrap(), 5);
        assert!(totient_decrypt(&[3, 11], 5).is_err());
        assert!(totient_decrypt(&[4, 11], 3).is_err());
        assert_eq!(totient_decrypt(&[2, 2, 3], 5).unwrap().phi, 4);

        assert!(rsa_crack(
            &RsaInstance {
                modulus: 33,
                e: 3,
                ciphertext: 9
            },
            &mut rng
        )
        .is_err());
    }
}

//! Reference checks that do not go through the gate ladders: dense operator
//! matrices, the cross-minor product-state test, the two-dimensional Grover
//! rotation model and sweeps of the phase-estimation bounds.

use std::io;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::phase_estimation::{
    analytic_distribution, outcome_probability, tail_bound, SUCCESS_BOUND,
};
use crate::statevec::{Amplitude, StateVector};

/// Shared tolerance policy.
pub mod tol {
    /// Entrywise equality of states and operators.
    pub const STATE_EQ: f64 = 1e-10;
    /// Deviation of a probability vector's sum from 1.
    pub const PROB_SUM: f64 = 1e-10;
    /// Total-variation distance allowed between sampled and exact
    /// distributions at [`SAMPLING_SHOTS`].
    pub const SAMPLING_TV: f64 = 0.01;
    pub const SAMPLING_SHOTS: usize = 100_000;
    /// Slack on analytic lower bounds evaluated in floating point.
    pub const BOUND_SLACK: f64 = 1e-12;
}

/// Largest `|M[i][j] M[k][l] - M[i][l] M[k][j]|` of the amplitude matrix
/// with rows indexed by the qubits in `side_a` and columns by the rest.
/// Zero exactly when the state is a product across the cut.
pub fn cross_minor_entanglement(state: &StateVector, side_a: &[usize]) -> Result<f64> {
    state.check_span(side_a)?;
    let n = state.num_qubits();
    let side_b: Vec<usize> = (0..n).filter(|q| !side_a.contains(q)).collect();
    if side_a.is_empty() || side_b.is_empty() {
        return Ok(0.0);
    }
    let cols = 1usize << side_b.len();
    let mut matrix = vec![vec![Amplitude::new(0.0, 0.0); cols]; 1 << side_a.len()];
    for (i, &a) in state.amplitudes().iter().enumerate() {
        let r = state.span_value(i, side_a) as usize;
        let c = state.span_value(i, &side_b) as usize;
        matrix[r][c] = a;
    }
    let mut worst = 0.0f64;
    for (i, r1) in matrix.iter().enumerate() {
        for r2 in &matrix[i + 1..] {
            for j in 0..cols {
                let (a, b) = (r1[j], r2[j]);
                for l in j + 1..cols {
                    let minor = (a * r2[l] - r1[l] * b).norm_sqr();
                    worst = worst.max(minor);
                }
            }
        }
    }
    Ok(worst.sqrt())
}

/// Columns of the operator `op` on `n` qubits, obtained by applying it to
/// every basis state: `matrix[col][row]`.
pub fn operator_columns(
    n: usize,
    op: impl Fn(&mut StateVector) -> Result<()>,
) -> Result<Vec<Vec<Amplitude>>> {
    (0..1u64 << n)
        .map(|b| {
            let mut s = StateVector::basis_state(n, b)?;
            op(&mut s)?;
            Ok(s.into_amplitudes())
        })
        .collect()
}

/// Largest entry of `U†U - I`.
pub fn unitarity_defect(columns: &[Vec<Amplitude>]) -> f64 {
    let mut worst = 0.0f64;
    for (i, ci) in columns.iter().enumerate() {
        for (j, cj) in columns.iter().enumerate() {
            let dot: Amplitude = ci.iter().zip(cj).map(|(a, b)| a.conj() * b).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).norm());
        }
    }
    worst
}

/// Success probability after `t` Grover iterations from the rotation
/// picture: `sin^2((2t+1)θ)` with `sin θ = 2^{-n/2}`.
pub fn grover_rotation_probability(n: usize, t: u64) -> f64 {
    let theta = (-(n as f64) / 2.0).exp2().asin();
    ((2 * t + 1) as f64 * theta).sin().powi(2)
}

/// One evaluated grid point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundPoint {
    pub m: u32,
    /// Phase, or the worst phase of the grid for tail sweeps.
    pub phi: f64,
    pub k: Option<u64>,
    pub value: f64,
    pub bound: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundSweepReport {
    pub description: String,
    pub points: Vec<BoundPoint>,
    pub worst_margin: f64,
}

impl BoundSweepReport {
    fn from_points(description: String, points: Vec<BoundPoint>) -> Self {
        let worst_margin = points
            .iter()
            .map(|p| p.margin)
            .fold(f64::INFINITY, f64::min);
        BoundSweepReport {
            description,
            points,
            worst_margin,
        }
    }

    pub fn passed(&self) -> bool {
        self.worst_margin > 0.0
    }

    pub fn worst_point(&self) -> Option<&BoundPoint> {
        self.points
            .iter()
            .min_by(|a, b| a.margin.total_cmp(&b.margin))
    }

    /// One row per point: `m,phi,k,value,bound,margin`.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for p in &self.points {
            w.serialize(p).map_err(|e| Error::Internal(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::Internal(e.to_string()))?;
        Ok(())
    }
}

/// Evenly spaced grid `i / points`, `i = 0..points`.
pub fn phase_grid(points: usize) -> Vec<f64> {
    (0..points).map(|i| i as f64 / points as f64).collect()
}

/// Margin `success_prob - 4/π²` of the best-estimate readout at every
/// `(m, φ)`.
pub fn sweep_success_bound(m_list: &[u32], phi_grid: &[f64]) -> Result<BoundSweepReport> {
    let mut points = Vec::with_capacity(m_list.len() * phi_grid.len());
    for &m in m_list {
        for &phi in phi_grid {
            let analysis = analytic_distribution(phi, m)?;
            points.push(BoundPoint {
                m,
                phi,
                k: None,
                value: analysis.success_prob,
                bound: SUCCESS_BOUND,
                margin: analysis.success_prob - SUCCESS_BOUND,
            });
        }
    }
    Ok(BoundSweepReport::from_points(
        format!(
            "best-estimate probability vs 4/pi^2, m in {m_list:?}, {} phases",
            phi_grid.len()
        ),
        points,
    ))
}

/// For every `m` and every `k` in `2..=2^(m-1)` (optionally clipped to
/// `k_range`), the worst tail mass over `phi_grid` of readouts more than
/// `k/2^m` from `φ`, against `1/(2k-1)`.
pub fn sweep_tail_bound(
    m_list: &[u32],
    k_range: Option<(u64, u64)>,
    phi_grid: &[f64],
) -> Result<BoundSweepReport> {
    let mut points = Vec::new();
    for &m in m_list {
        if !(2..=20).contains(&m) {
            return Err(domain!("tail sweep needs 2 <= m <= 20, got {m}"));
        }
        let half = 1u64 << (m - 1);
        let (k_lo, k_hi) = k_range.unwrap_or((2, half));
        let (k_lo, k_hi) = (k_lo.max(2), k_hi.min(half));
        if k_lo > k_hi {
            continue;
        }
        let span = (k_hi - k_lo + 1) as usize;
        let mut worst = vec![(0.0f64, 0.0f64); span];
        for &phi in phi_grid {
            let tails = tail_masses(phi, m, half);
            for (slot, k) in worst.iter_mut().zip(k_lo..=k_hi) {
                let t = tails[k as usize];
                if t > slot.0 {
                    *slot = (t, phi);
                }
            }
        }
        for ((value, phi), k) in worst.into_iter().zip(k_lo..=k_hi) {
            let bound = tail_bound(k);
            points.push(BoundPoint {
                m,
                phi,
                k: Some(k),
                value,
                bound,
                margin: bound - value,
            });
        }
    }
    Ok(BoundSweepReport::from_points(
        format!(
            "tail mass beyond k/2^m vs 1/(2k-1), m in {m_list:?}, {} phases",
            phi_grid.len()
        ),
        points,
    ))
}

/// `tails[k]` = probability that the readout is more than `k/2^m` from `φ`,
/// for `k = 0..=max_k`.
fn tail_masses(phi: f64, m: u32, max_k: u64) -> Vec<f64> {
    let dim = (m as f64).exp2();
    let x = phi * dim;
    let mut by_distance: Vec<(f64, f64)> = (0..1u64 << m)
        .map(|t| {
            let d = (x - t as f64).rem_euclid(dim);
            (d.min(dim - d), outcome_probability(phi, m, t))
        })
        .collect();
    by_distance.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut tails = vec![0.0; max_k as usize + 1];
    let mut acc = 0.0;
    let mut idx = 0;
    // walk k downwards, accumulating every outcome strictly beyond k
    for k in (0..=max_k).rev() {
        while idx < by_distance.len() && by_distance[idx].0 > k as f64 {
            acc += by_distance[idx].1;
            idx += 1;
        }
        tails[k as usize] = acc;
    }
    tails
}

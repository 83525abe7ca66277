//! CGLMP Bell expression for two qudits with the Fourier-basis settings
//! that are optimal for `|psi_d>`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::qmat::{c, DensityMatrix, StateVector};

pub const CGLMP_LOCAL_BOUND: f64 = 2.0;
pub const CGLMP_MAX_DIM: usize = 6;

const ALICE_SHIFTS: [f64; 2] = [0.0, 0.5];
const BOB_SHIFTS: [f64; 2] = [0.25, -0.25];

fn alice_vector(d: usize, outcome: usize, shift: f64) -> StateVector {
    let norm = 1.0 / (d as f64).sqrt();
    StateVector::from_fn(d, |j, _| {
        let phase = 2.0 * PI * j as f64 * (outcome as f64 + shift) / d as f64;
        c(norm * phase.cos(), norm * phase.sin())
    })
}

fn bob_vector(d: usize, outcome: usize, shift: f64) -> StateVector {
    let norm = 1.0 / (d as f64).sqrt();
    StateVector::from_fn(d, |j, _| {
        let phase = 2.0 * PI * j as f64 * (-(outcome as f64) + shift) / d as f64;
        c(norm * phase.cos(), norm * phase.sin())
    })
}

/// `probs[x][y][a * d + b] = P(A_x = a, B_y = b)`.
pub fn joint_probabilities(rho: &DensityMatrix) -> Result<[[Vec<f64>; 2]; 2]> {
    let dims = rho.dims();
    if dims.len() != 2 || dims[0] != dims[1] {
        return Err(Error::DimensionMismatch(format!(
            "CGLMP needs a d x d state, got {dims:?}"
        )));
    }
    let d = dims[0];
    if !(2..=CGLMP_MAX_DIM).contains(&d) {
        return Err(Error::UnsupportedDimension(format!(
            "CGLMP supports 2 <= d <= {CGLMP_MAX_DIM}, got {d}"
        )));
    }
    let alice: Vec<Vec<StateVector>> = ALICE_SHIFTS
        .iter()
        .map(|&s| (0..d).map(|a| alice_vector(d, a, s)).collect())
        .collect();
    let bob: Vec<Vec<StateVector>> = BOB_SHIFTS
        .iter()
        .map(|&s| (0..d).map(|b| bob_vector(d, b, s)).collect())
        .collect();
    Ok(std::array::from_fn(|x| {
        std::array::from_fn(|y| {
            let mut probs = vec![0.0; d * d];
            for a in 0..d {
                for b in 0..d {
                    let v = alice[x][a].kronecker(&bob[y][b]);
                    probs[a * d + b] = (v.adjoint() * rho.matrix() * &v)[(0, 0)].re;
                }
            }
            probs
        })
    }))
}

/// `P(A = B + k mod d)` from a joint table.
fn prob_diff(table: &[f64], d: usize, k: isize) -> f64 {
    let dd = d as isize;
    (0..d)
        .map(|b| {
            let a = ((b as isize + k) % dd + dd) % dd;
            table[a as usize * d + b]
        })
        .sum()
}

/// `P(B = A + k mod d)`.
fn prob_diff_rev(table: &[f64], d: usize, k: isize) -> f64 {
    let dd = d as isize;
    (0..d)
        .map(|a| {
            let b = ((a as isize + k) % dd + dd) % dd;
            table[a * d + b as usize]
        })
        .sum()
}

/// The CGLMP score `I_d`; local models satisfy `I_d <= 2`.
pub fn cglmp_value(rho: &DensityMatrix) -> Result<f64> {
    let probs = joint_probabilities(rho)?;
    let d = rho.dims()[0];
    let mut total = 0.0;
    for k in 0..(d / 2) {
        let weight = 1.0 - 2.0 * k as f64 / (d as f64 - 1.0);
        let ki = k as isize;
        let plus = prob_diff(&probs[0][0], d, ki)
            + prob_diff_rev(&probs[1][0], d, ki + 1)
            + prob_diff(&probs[1][1], d, ki)
            + prob_diff_rev(&probs[0][1], d, ki);
        let minus = prob_diff(&probs[0][0], d, -ki - 1)
            + prob_diff_rev(&probs[1][0], d, -ki)
            + prob_diff(&probs[1][1], d, -ki - 1)
            + prob_diff_rev(&probs[0][1], d, -ki - 1);
        total += weight * (plus - minus);
    }
    Ok(total)
}

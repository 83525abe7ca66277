//! State families and fixed operators.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{c, identity, kron, pauli, ComplexMatrix, DensityMatrix, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Two-qubit Werner state, `p psi_- + (1-p) I/4`.
    Wi,
    Werner,
    Isotropic,
    /// Hirsch state with `q = 1`, `sigma = |0><0|`.
    Hirsch1,
    Hirsch2,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Wi,
        Family::Werner,
        Family::Isotropic,
        Family::Hirsch1,
        Family::Hirsch2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Wi => "wi",
            Family::Werner => "werner",
            Family::Isotropic => "isotropic",
            Family::Hirsch1 => "hirsch1",
            Family::Hirsch2 => "hirsch2",
        }
    }

    /// Whether the family takes a local dimension `d`.
    pub fn is_qudit(self) -> bool {
        matches!(self, Family::Werner | Family::Isotropic)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

/// A one-parameter slice through a state family; `state(p)` builds the member.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpec {
    pub family: Family,
    /// Local dimension; always 2 for the two-qubit families.
    pub d: usize,
    /// Hirsch mixing weight (hirsch2 only).
    pub q: f64,
    /// Hirsch single-qubit state (hirsch2 only).
    pub sigma: DensityMatrix,
}

impl FamilySpec {
    pub fn new(family: Family) -> Self {
        Self {
            family,
            d: 2,
            q: 1.0,
            sigma: ket0_state(),
        }
    }

    pub fn qudit(family: Family, d: usize) -> Result<Self> {
        check_dim(d)?;
        if !family.is_qudit() && d != 2 {
            return Err(Error::UnsupportedDimension(format!(
                "{family} is a two-qubit family, got d = {d}"
            )));
        }
        Ok(Self {
            d,
            ..Self::new(family)
        })
    }

    pub fn hirsch(q: f64, sigma: DensityMatrix) -> Result<Self> {
        check_range("q", q, 0.0, 1.0)?;
        sigma.expect_dims(&[2])?;
        Ok(Self {
            q,
            sigma,
            ..Self::new(Family::Hirsch2)
        })
    }

    /// Range of `p` for which the family yields a valid state.
    pub fn p_range(&self) -> (f64, f64) {
        match self.family {
            Family::Werner => (werner_p_min(self.d), 1.0),
            _ => (0.0, 1.0),
        }
    }

    pub fn state(&self, p: f64) -> Result<DensityMatrix> {
        match self.family {
            Family::Wi => wi_state(p),
            Family::Werner => werner_state(self.d, p),
            Family::Isotropic => isotropic_state(self.d, p),
            Family::Hirsch1 => hirsch_state(p, 1.0, &ket0_state()),
            Family::Hirsch2 => hirsch_state(p, self.q, &self.sigma),
        }
    }

    pub fn label(&self) -> String {
        match self.family {
            Family::Werner | Family::Isotropic => format!("{}(d={})", self.family, self.d),
            Family::Hirsch2 => format!("hirsch2(q={})", self.q),
            f => f.to_string(),
        }
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::UnsupportedDimension(format!(
            "local dimension {d} < 2"
        )));
    }
    Ok(())
}

fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if !(lo..=hi).contains(&value) {
        return Err(Error::ParameterOutOfRange {
            name,
            value,
            lo,
            hi,
        });
    }
    Ok(())
}

pub fn werner_p_min(d: usize) -> f64 {
    1.0 - 2.0 * d as f64 / (d as f64 + 1.0)
}

pub fn ket(d: usize, i: usize) -> StateVector {
    let mut v = StateVector::zeros(d);
    v[i] = c(1.0, 0.0);
    v
}

pub fn ket0_state() -> DensityMatrix {
    DensityMatrix::from_pure(&ket(2, 0), vec![2]).expect("basis state")
}

/// `(|01> - |10>)/sqrt(2)`.
pub fn psi_minus() -> StateVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    StateVector::from_vec(vec![c(0., 0.), c(s, 0.), c(-s, 0.), c(0., 0.)])
}

pub fn psi_minus_state() -> DensityMatrix {
    DensityMatrix::from_pure(&psi_minus(), vec![2, 2]).expect("normalized")
}

fn projector(v: &StateVector) -> ComplexMatrix {
    v * v.adjoint()
}

pub fn wi_state(p: f64) -> Result<DensityMatrix> {
    check_range("p", p, 0.0, 1.0)?;
    let mat = projector(&psi_minus()) * c(p, 0.0) + identity(4) * c((1.0 - p) / 4.0, 0.0);
    Ok(DensityMatrix::from_parts(mat, vec![2, 2]))
}

/// The flip operator `sum_ij |i><j| (x) |j><i|`.
pub fn swap_operator(d: usize) -> ComplexMatrix {
    let mut f = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            f[(i * d + j, j * d + i)] = c(1.0, 0.0);
        }
    }
    f
}

pub fn antisymmetric_projector(d: usize) -> ComplexMatrix {
    (identity(d * d) - swap_operator(d)) * c(0.5, 0.0)
}

pub fn werner_state(d: usize, p: f64) -> Result<DensityMatrix> {
    check_dim(d)?;
    check_range("p", p, werner_p_min(d), 1.0)?;
    let df = d as f64;
    let mat = antisymmetric_projector(d) * c(2.0 * p / (df * (df - 1.0)), 0.0)
        + identity(d * d) * c((1.0 - p) / (df * df), 0.0);
    Ok(DensityMatrix::from_parts(mat, vec![d, d]))
}

/// `(1/sqrt(d)) sum_i |ii>`.
pub fn max_entangled(d: usize) -> StateVector {
    let mut v = StateVector::zeros(d * d);
    let amp = 1.0 / (d as f64).sqrt();
    for i in 0..d {
        v[i * d + i] = c(amp, 0.0);
    }
    v
}

pub fn isotropic_state(d: usize, p: f64) -> Result<DensityMatrix> {
    check_dim(d)?;
    check_range("p", p, 0.0, 1.0)?;
    let df = d as f64;
    let mat =
        projector(&max_entangled(d)) * c(p, 0.0) + identity(d * d) * c((1.0 - p) / (df * df), 0.0);
    Ok(DensityMatrix::from_parts(mat, vec![d, d]))
}

/// `p psi_- + (1-p) [q sigma + (1-q) I/2] (x) I/2`.
pub fn hirsch_state(p: f64, q: f64, sigma: &DensityMatrix) -> Result<DensityMatrix> {
    check_range("p", p, 0.0, 1.0)?;
    check_range("q", q, 0.0, 1.0)?;
    sigma.expect_dims(&[2])?;
    let local = sigma.matrix() * c(q, 0.0) + identity(2) * c((1.0 - q) / 2.0, 0.0);
    let mat = projector(&psi_minus()) * c(p, 0.0)
        + kron(&local, &(identity(2) * c(0.5, 0.0))) * c(1.0 - p, 0.0);
    Ok(DensityMatrix::from_parts(mat, vec![2, 2]))
}

/// `|psi_ab> = i^(a+b) (|0,b> + (-1)^a |1,1+b>)/sqrt(2)`, ordered by `2a + b`.
pub fn magic_basis() -> [StateVector; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let phase = [c(1., 0.), c(0., 1.), c(-1., 0.), c(0., -1.)];
    std::array::from_fn(|n| {
        let (a, b) = (n / 2, n % 2);
        let mut v = StateVector::zeros(4);
        v[b] = c(s, 0.0);
        v[2 + (1 ^ b)] = c(if a == 0 { s } else { -s }, 0.0);
        v * phase[a + b]
    })
}

/// `H_theta = I (x) I - cos(theta) X (x) X - sin(theta) Z (x) Z`.
pub fn h_theta(theta: f64) -> ComplexMatrix {
    identity(4)
        - kron(&pauli(1), &pauli(1)) * c(theta.cos(), 0.0)
        - kron(&pauli(3), &pauli(3)) * c(theta.sin(), 0.0)
}

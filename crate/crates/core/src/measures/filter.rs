//! Fixed local filter onto the `{|0>, |1>}` subspace of each qudit.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qmat::{c, ComplexMatrix, DensityMatrix};
use crate::states::werner_state;

use super::chsh::{chsh_m, max_chsh_expression};

#[derive(Debug, Clone, PartialEq)]
pub struct FilteredWerner {
    pub filtered: DensityMatrix,
    /// Largest CHSH expression of the filtered state.
    pub max_b: f64,
    /// Closed-form onset of the filtered CHSH violation.
    pub p_nl: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilteredChsh {
    pub m: f64,
    pub indicator: bool,
}

/// `(P (x) Q) rho (P (x) Q)`, renormalized, as a two-qubit state.
pub fn filter_to_qubits(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let dims = rho.dims();
    if dims.len() != 2 || dims[0] < 2 || dims[1] < 2 {
        return Err(Error::DimensionMismatch(format!(
            "filter needs a bipartite state with local dimensions >= 2, got {dims:?}"
        )));
    }
    let db = dims[1];
    let idx = |k: usize| (k / 2) * db + (k % 2);
    let block = ComplexMatrix::from_fn(4, 4, |r, col| rho.matrix()[(idx(r), idx(col))]);
    let tr = block.trace().re;
    if tr <= 1e-15 {
        return Err(Error::ZeroFilteredTrace);
    }
    Ok(DensityMatrix::from_parts(
        block * c(1.0 / tr, 0.0),
        vec![2, 2],
    ))
}

/// `4(d-1) / (2d(sqrt(2)-1) + 4(d-1))`.
pub fn popescu_threshold(d: usize) -> f64 {
    let df = d as f64;
    4.0 * (df - 1.0) / (2.0 * df * (2f64.sqrt() - 1.0) + 4.0 * (df - 1.0))
}

pub fn popescu_filter(d: usize, p: f64) -> Result<FilteredWerner> {
    let filtered = filter_to_qubits(&werner_state(d, p)?)?;
    let max_b = max_chsh_expression(&filtered)?;
    Ok(FilteredWerner {
        filtered,
        max_b,
        p_nl: popescu_threshold(d),
    })
}

/// CHSH quantity of the filtered Werner state; violated iff `m > 1`.
pub fn filtered_chsh(d: usize, p: f64) -> Result<FilteredChsh> {
    let f = filter_to_qubits(&werner_state(d, p)?)?;
    let m = chsh_m(&f)?;
    Ok(FilteredChsh {
        m,
        indicator: m > 1.0,
    })
}

use crate::error::Result;
use crate::qmat::{c, entropy_bits, herm_eig, kron, pauli, DensityMatrix, StateVector};

use super::binary_entropy;

/// Wootters concurrence of a two-qubit state.
///
/// The `lambda_i` (square roots of the eigenvalues of `rho * rho_tilde`) are
/// taken as the singular values of `sqrt(rho) (Y (x) Y) conj(sqrt(rho))`,
/// which avoids square roots of round-off-sized eigenvalues.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    rho.expect_dims(&[2, 2])?;
    let yy = kron(&pauli(2), &pauli(2));
    let eig = herm_eig(rho.matrix())?;
    let mut root = eig.vectors.clone();
    for (j, &v) in eig.values.iter().enumerate() {
        let s = if v > 1e-14 { v.sqrt() } else { 0.0 };
        for i in 0..4 {
            root[(i, j)] *= c(s, 0.0);
        }
    }
    let sqrt_rho = &root * eig.vectors.adjoint();
    let product = &sqrt_rho * yy * sqrt_rho.conjugate();
    let mut lambdas: Vec<f64> = product.singular_values().iter().copied().collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// Entanglement of formation from the concurrence, in ebits.
pub fn eof_from_concurrence(conc: f64) -> f64 {
    let conc = conc.clamp(0.0, 1.0);
    binary_entropy((1.0 + (1.0 - conc * conc).sqrt()) / 2.0)
}

pub fn eof(rho: &DensityMatrix) -> Result<f64> {
    Ok(eof_from_concurrence(concurrence(rho)?))
}

/// Entropy of entanglement of a pure bipartite state, `S(Tr_B |psi><psi|)`.
pub fn pure_eof(psi: &StateVector, dims: [usize; 2]) -> Result<f64> {
    let rho = DensityMatrix::from_pure(psi, dims.to_vec())?;
    let reduced = crate::qmat::partial_trace(&rho, &[0])?;
    entropy_bits(&reduced)
}

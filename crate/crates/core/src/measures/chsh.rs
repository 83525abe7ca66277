//! CHSH nonlocality of two-qubit states and its local-filtering extension.

use nalgebra::{Matrix3, Matrix4};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qmat::{kron, pauli, DensityMatrix};

use super::binary_entropy;

/// Pauli correlation table `t[n][m] = Tr[rho (sigma_n (x) sigma_m)]`,
/// `sigma_0 = I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub t: [[f64; 4]; 4],
}

impl CorrelationMatrix {
    pub fn as_matrix4(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|n, m| self.t[n][m])
    }

    /// The spin-spin block, `n, m` in `1..=3`.
    pub fn spin_block(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|n, m| self.t[n + 1][m + 1])
    }
}

pub fn correlation_matrix(rho: &DensityMatrix) -> Result<CorrelationMatrix> {
    rho.expect_dims(&[2, 2])?;
    let paulis: [_; 4] = std::array::from_fn(pauli);
    let mut t = [[0.0; 4]; 4];
    for (n, sn) in paulis.iter().enumerate() {
        for (m, sm) in paulis.iter().enumerate() {
            t[n][m] = rho.expectation(&kron(sn, sm));
        }
    }
    Ok(CorrelationMatrix { t })
}

/// Sum of the two largest eigenvalues of `T^T T` (spin block); CHSH is
/// violated iff this exceeds 1.
pub fn chsh_m(rho: &DensityMatrix) -> Result<f64> {
    let t = correlation_matrix(rho)?.spin_block();
    let u = t.transpose() * t;
    let mut ev: Vec<f64> = u.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    Ok(ev[0] + ev[1])
}

/// Largest CHSH expression value over all measurement settings.
pub fn max_chsh_expression(rho: &DensityMatrix) -> Result<f64> {
    Ok(2.0 * chsh_m(rho)?.max(0.0).sqrt())
}

/// `h((1 + sqrt(1 - B^2))/2)` with `B = sqrt(max(0, m - 1))`; zero when
/// `m <= 1`.
pub fn violation_entropy(m: f64) -> f64 {
    let b2 = (m - 1.0).clamp(0.0, 1.0);
    binary_entropy((1.0 + (1.0 - b2).sqrt()) / 2.0)
}

pub fn chsh_value(rho: &DensityMatrix) -> Result<f64> {
    Ok(violation_entropy(chsh_m(rho)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HiddenNonlocality {
    /// CHSH quantity `M` of the optimally filtered state.
    pub m_prime: f64,
    pub value: f64,
    pub indicator: bool,
    /// Real eigenvalues of `eta T eta T^T`, descending.
    pub lambdas: [f64; 4],
}

/// Eigenvalues `lambda_0 >= lambda_1 >= ...` of `eta T eta T^T` with
/// `eta = diag(1, -1, -1, -1)`.
pub fn filtering_spectrum(rho: &DensityMatrix) -> Result<[f64; 4]> {
    let t = correlation_matrix(rho)?.as_matrix4();
    let eta = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, -1.0, -1.0, -1.0));
    let cmat = eta * t * eta * t.transpose();
    let scale = cmat.norm().max(1.0);
    let eig = general_eigenvalues(&cmat)?;
    let worst_im = eig.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if worst_im > 1e-8 * scale {
        return Err(Error::NonLorentzianSpectrum(worst_im));
    }
    let mut re: Vec<f64> = eig.iter().map(|z| z.re).collect();
    re.sort_by(|a, b| b.total_cmp(a));
    Ok([re[0], re[1], re[2], re[3]])
}

/// Eigenvalues of a general real 4x4 matrix. The Schur iteration stalls on
/// matrices within round-off of a multiple of the identity (pure states give
/// exactly that), so deflation uses a relative threshold and the iteration
/// count is capped.
fn general_eigenvalues(m: &Matrix4<f64>) -> Result<nalgebra::Vector4<num_complex::Complex64>> {
    for eps in [1e-14, 1e-12, 1e-10] {
        if let Some(schur) = nalgebra::Schur::try_new(*m, eps, 10_000) {
            return Ok(schur.complex_eigenvalues());
        }
    }
    Err(Error::NoConvergence)
}

/// Relative margin by which `lambda_1 + lambda_2` must exceed `lambda_0`;
/// mixtures of two product states sit exactly on the boundary.
const HN_SLACK: f64 = 1e-9;

/// Hidden nonlocality: CHSH violation reachable by local filtering.
pub fn hidden_nonlocality(rho: &DensityMatrix) -> Result<HiddenNonlocality> {
    let lambdas = filtering_spectrum(rho)?;
    if lambdas[0] <= 1e-12 {
        return Err(Error::DegenerateCorrelation);
    }
    let m_prime = (lambdas[1] + lambdas[2]) / lambdas[0];
    Ok(HiddenNonlocality {
        m_prime,
        value: violation_entropy(m_prime),
        indicator: m_prime > 1.0 + HN_SLACK,
        lambdas,
    })
}

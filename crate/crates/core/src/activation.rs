//! Activation of CHSH nonlocality by tensoring with a PPT ancilla and local
//! filtering: `tau` is activated when some PPT state `rho` on
//! `(A_d A_q)(B_d B_q)` has `Tr[rho (tau^T (x) H_{pi/4})] < 0`.

use std::f64::consts::FRAC_PI_4;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qmat::{
    c, kron, min_eig, partial_transpose_matrix, pauli, permute_matrix, ComplexMatrix, DensityMatrix,
};
use crate::sdp::{solve, SdpOptions, SdpProblem, SdpSolution};
use crate::states::h_theta;

/// `sigma` must fall below `-ACTIVATION_TOL` to count as activation.
pub const ACTIVATION_TOL: f64 = 1e-6;

/// Takes `[A_d, B_d, A_q, B_q]` to the variable order `[A_d, A_q, B_d, B_q]`.
const TO_CANONICAL: [usize; 4] = [0, 2, 1, 3];

#[derive(Debug, Clone)]
pub struct ActivationResult {
    /// Optimal `Tr[rho_tau (tau^T (x) H_{pi/4})]`.
    pub sigma: f64,
    pub witness: SdpSolution,
    pub activated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AncillaCheck {
    pub trace_value: f64,
    pub activated: bool,
}

fn bipartite_dims(tau: &DensityMatrix) -> Result<(usize, usize)> {
    match tau.dims() {
        &[da, db] => Ok((da, db)),
        other => Err(Error::DimensionMismatch(format!(
            "expected a bipartite state, got dims {other:?}"
        ))),
    }
}

/// `tau^T (x) H_{pi/4}` in the variable order `[A_d, A_q, B_d, B_q]`.
pub fn activation_operator(tau: &DensityMatrix) -> Result<ComplexMatrix> {
    let (da, db) = bipartite_dims(tau)?;
    let op = kron(&tau.matrix().transpose(), &h_theta(FRAC_PI_4));
    permute_matrix(&op, &[da, db, 2, 2], &TO_CANONICAL)
}

pub fn build_cost(tau: &DensityMatrix) -> Result<SdpProblem> {
    let (da, db) = bipartite_dims(tau)?;
    SdpProblem::new(activation_operator(tau)?, vec![da, 2, db, 2], vec![0, 1])
}

pub fn sigma_min(tau: &DensityMatrix) -> Result<ActivationResult> {
    sigma_min_with(tau, SdpOptions::default())
}

/// Activation requires a certified solve (converged, or with the certified
/// interval already below `-ACTIVATION_TOL`) and feasible residuals.
pub fn sigma_min_with(tau: &DensityMatrix, options: SdpOptions) -> Result<ActivationResult> {
    let feasibility = options.tol_feasibility;
    let witness = solve(&build_cost(tau)?.with_options(options));
    let r = &witness.residuals;
    let feasible =
        r.psd_slack <= feasibility && r.ppt_slack <= feasibility && r.trace_err <= feasibility;
    Ok(ActivationResult {
        sigma: witness.objective,
        activated: witness.is_certified() && feasible && witness.objective < -ACTIVATION_TOL,
        witness,
    })
}

const R_NUMERATORS: [[f64; 4]; 4] = [
    [9.0, 3.0, 3.0, 3.0],
    [1.0, -1.0, 3.0, -1.0],
    [1.0, -1.0, 3.0, -1.0],
    [1.0, -1.0, 3.0, -1.0],
];

/// Four-qubit ancilla `(1/16) sum R_ij s_i (x) s_i (x) s_j (x) s_j`, whose
/// factors are `[A_d, B_d, A_q, B_q]`; returned in the variable order.
pub fn ancilla_r() -> DensityMatrix {
    let mut m = ComplexMatrix::zeros(16, 16);
    for (i, row) in R_NUMERATORS.iter().enumerate() {
        let pair_i = kron(&pauli(i), &pauli(i));
        for (j, &r) in row.iter().enumerate() {
            let pair_j = kron(&pauli(j), &pauli(j));
            m += kron(&pair_i, &pair_j) * c(r / (9.0 * 16.0), 0.0);
        }
    }
    let canonical = permute_matrix(&m, &[2, 2, 2, 2], &TO_CANONICAL).expect("fixed dims");
    DensityMatrix::new(canonical, vec![2, 2, 2, 2]).expect("ancilla is a valid state")
}

/// `Tr[rho (tau^T (x) H_{pi/4})]` for a fixed ancilla in variable order.
pub fn verify_ancilla(tau: &DensityMatrix, rho: &DensityMatrix) -> Result<AncillaCheck> {
    let (da, db) = bipartite_dims(tau)?;
    rho.expect_dims(&[da, 2, db, 2])?;
    let trace_value = rho.expectation(&activation_operator(tau)?);
    Ok(AncillaCheck {
        trace_value,
        activated: trace_value < 0.0,
    })
}

/// Smallest eigenvalues of `rho` and of its partial transpose over `A_d A_q`.
pub fn ancilla_spectrum_bounds(rho: &DensityMatrix) -> Result<(f64, f64)> {
    let pt = partial_transpose_matrix(rho.matrix(), rho.dims(), &[0, 1])?;
    Ok((min_eig(rho.matrix())?, min_eig(&pt)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{partial_trace, permute_systems};
    use crate::sdp::SdpStatus;
    use crate::states::{isotropic_state, werner_state, wi_state};
    use crate::testutil::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::time::Instant;

    #[test]
    fn problem_shapes() {
        let p = build_cost(&wi_state(0.5).unwrap()).unwrap();
        assert_eq!(p.side(), 16);
        assert_eq!(p.dims, vec![2, 2, 2, 2]);
        assert_eq!(p.t1_split, vec![0, 1]);
        let p6 = build_cost(&isotropic_state(6, 0.5).unwrap()).unwrap();
        assert_eq!(p6.side(), 144);
        for tau in [
            werner_state(3, 0.7).unwrap(),
            isotropic_state(4, 0.3).unwrap(),
        ] {
            let cost = build_cost(&tau).unwrap().cost;
            assert!(cost.iter().all(|z| z.im == 0.0));
            assert!(max_abs_diff(&cost, &cost.adjoint()) == 0.0);
        }
        let tri = DensityMatrix::maximally_mixed(vec![2, 2, 2]);
        assert!(build_cost(&tri).is_err());
    }

    #[test]
    fn wi_examples() {
        let hi = sigma_min(&wi_state(0.9).unwrap()).unwrap();
        assert_eq!(hi.witness.status, SdpStatus::Converged);
        assert!(hi.sigma < 0.0 && hi.activated);
        let lo = sigma_min(&wi_state(0.3).unwrap()).unwrap();
        assert!(lo.sigma >= -ACTIVATION_TOL);
        assert!(!lo.activated);
    }

    #[test]
    fn isotropic_d4_is_activated() {
        let start = Instant::now();
        let res = sigma_min(&isotropic_state(4, 0.6).unwrap()).unwrap();
        eprintln!(
            "iso d=4: sigma {} in {} iterations, {:?}",
            res.sigma,
            res.witness.iterations,
            start.elapsed()
        );
        assert!(res.sigma < 0.0 && res.activated);
    }

    #[test]
    fn ancilla_is_a_ppt_state() {
        let rho = ancilla_r();
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
        assert!(max_abs_diff(rho.matrix(), &rho.matrix().adjoint()) < 1e-15);
        let (psd, ppt) = ancilla_spectrum_bounds(&rho).unwrap();
        assert!(psd >= -1e-10 && ppt >= -1e-10);
    }

    #[test]
    fn ancilla_trace_values() {
        let rho = ancilla_r();
        for p in [0.66, 0.99] {
            let check = verify_ancilla(&wi_state(p).unwrap(), &rho).unwrap();
            assert!(check.trace_value < 0.0 && check.activated, "p={p}");
        }
        let sep = verify_ancilla(&wi_state(0.3).unwrap(), &rho).unwrap();
        assert!(sep.trace_value >= 0.0 && !sep.activated);
        assert!(verify_ancilla(&isotropic_state(3, 0.5).unwrap(), &rho).is_err());
    }

    #[test]
    fn sdp_optimum_is_below_the_ancilla() {
        let rho = ancilla_r();
        for k in 0..=10 {
            let p = k as f64 / 10.0;
            let tau = wi_state(p).unwrap();
            let sigma = sigma_min(&tau).unwrap().sigma;
            let fixed = verify_ancilla(&tau, &rho).unwrap().trace_value;
            assert!(sigma <= fixed + 1e-6, "p={p}: {sigma} > {fixed}");
        }
    }

    #[test]
    fn separable_inputs_are_never_certified() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..40 {
            let tau = random_separable(&mut rng, 2, 2, 3);
            let res = sigma_min(&tau).unwrap();
            assert!(res.sigma >= -1e-5, "sigma {}", res.sigma);
            assert!(!res.activated);
        }
    }

    #[test]
    fn permutation_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let tau = random_state(&mut rng, &[2, 3]);
        let rho = random_state(&mut rng, &[2, 2, 3, 2]);
        let direct = rho.expectation(&activation_operator(&tau).unwrap());
        // back to [A_d, B_d, A_q, B_q]: the inverse of TO_CANONICAL is itself
        let natural = permute_systems(&rho, &TO_CANONICAL).unwrap();
        assert_eq!(natural.dims(), &[2, 3, 2, 2]);
        let op = kron(&tau.matrix().transpose(), &h_theta(FRAC_PI_4));
        assert!((direct - natural.expectation(&op)).abs() < 1e-12);
        // the data block of the canonical variable is tau's partner
        let reduced = partial_trace(&natural, &[0, 1]).unwrap();
        assert_eq!(reduced.dims(), &[2, 3]);
    }
}

//! Fully entangled fraction, teleportation fidelity and the k-copy
//! superactivation factor.

use nalgebra::Matrix4;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qmat::DensityMatrix;
use crate::states::magic_basis;

/// Fully entangled fraction of a two-qubit state via the magic basis.
pub fn fef2(rho: &DensityMatrix) -> Result<f64> {
    rho.expect_dims(&[2, 2])?;
    let basis = magic_basis();
    let m = Matrix4::from_fn(|i, j| (basis[i].adjoint() * rho.matrix() * &basis[j])[(0, 0)].re);
    let m = (m + m.transpose()) * 0.5;
    let top = m
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::MIN, f64::max);
    Ok(top.max(0.0))
}

/// Teleportation fidelity `F_d = (d f + 1)/(d + 1)`.
pub fn teleportation_fidelity(d: usize, fef: f64) -> f64 {
    let df = d as f64;
    (df * fef + 1.0) / (df + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Superactivation {
    pub fef: f64,
    pub fidelity: f64,
    /// Excess fidelity over the classical limit `2/(d+1)`.
    pub value: f64,
    /// Useful for teleportation, hence k-copy nonlocal.
    pub indicator: bool,
}

/// Separable states reach `f = 1/d` exactly; round-off must not flip them.
const USEFULNESS_SLACK: f64 = 1e-12;

fn superactivation(d: usize, fef: f64) -> Superactivation {
    let fidelity = teleportation_fidelity(d, fef);
    let classical = 2.0 / (d as f64 + 1.0);
    Superactivation {
        fef,
        fidelity,
        value: (fidelity - classical).max(0.0),
        indicator: fef > 1.0 / d as f64 + USEFULNESS_SLACK,
    }
}

pub fn sa_value(rho: &DensityMatrix) -> Result<Superactivation> {
    Ok(superactivation(2, fef2(rho)?))
}

/// FEF of the isotropic state: its overlap with `|psi_d>`.
pub fn fef_isotropic(d: usize, p: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::UnsupportedDimension(format!(
            "local dimension {d} < 2"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ParameterOutOfRange {
            name: "p",
            value: p,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let df = d as f64;
    Ok(p + (1.0 - p) / (df * df))
}

pub fn sa_isotropic(d: usize, p: f64) -> Result<Superactivation> {
    Ok(superactivation(d, fef_isotropic(d, p)?))
}

const K_CONST_C: f64 = 54.598_150_033_144_236; // e^4
const K_CONST_C_PRIME: f64 = 4.0;

/// Smallest number of copies `k` for which `rho^(x)k` is guaranteed to be
/// nonlocal given its FEF `f`, i.e. the least `k >= 1` with
/// `[C'/(C ln(d)^2)] (f d)^k / k^2 > 1`. `None` when `f d <= 1`.
pub fn k_factor(d: usize, f: f64) -> Option<u64> {
    let base = f * d as f64;
    if d < 2 || base <= 1.0 {
        return None;
    }
    let ln_base = base.ln();
    let offset = (K_CONST_C_PRIME / K_CONST_C).ln() - 2.0 * (d as f64).ln().ln();
    let holds = |k: u64| {
        let kf = k as f64;
        offset + kf * ln_base - 2.0 * kf.ln() > 0.0
    };
    if holds(1) {
        return Some(1);
    }
    // k ln(base) - 2 ln(k) falls until k = 2/ln(base) and rises after it
    let turn = (2.0 / ln_base).floor().clamp(1.0, 1e18) as u64;
    let mut lo = turn.max(1);
    if holds(lo) {
        return Some(lo);
    }
    let mut hi = lo.saturating_mul(2).max(2);
    while !holds(hi) {
        lo = hi;
        hi = hi.checked_mul(2)?;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{isotropic_state, psi_minus_state, wi_state, Family, FamilySpec};

    /// Direct scan of the defining inequality.
    fn k_oracle(d: usize, f: f64) -> Option<u64> {
        let pre = 4.0 / (std::f64::consts::E.powi(4) * (d as f64).ln().powi(2));
        (1..=1_000_000u64).find(|&k| pre * (f * d as f64).powf(k as f64) / (k as f64).powi(2) > 1.0)
    }

    #[test]
    fn fef2_cases() {
        assert!((fef2(&psi_minus_state()).unwrap() - 1.0).abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(vec![2, 2]);
        assert!((fef2(&mixed).unwrap() - 0.25).abs() < 1e-14);
        for k in 0..=20 {
            let p = k as f64 / 20.0;
            let f = fef2(&wi_state(p).unwrap()).unwrap();
            assert!((f - (1.0 + 3.0 * p) / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sa_cases() {
        let sa = sa_value(&psi_minus_state()).unwrap();
        assert!((sa.fidelity - 1.0).abs() < 1e-12);
        assert!((sa.value - 1.0 / 3.0).abs() < 1e-12);
        assert!(sa.indicator);
        let prod = crate::states::ket0_state().tensor(&crate::states::ket0_state());
        assert!(!sa_value(&prod).unwrap().indicator);

        let h1 = FamilySpec::new(Family::Hirsch1);
        assert!(!sa_value(&h1.state(0.33).unwrap()).unwrap().indicator);
        assert!(sa_value(&h1.state(0.34).unwrap()).unwrap().indicator);
    }

    #[test]
    fn fef_isotropic_cases() {
        for d in 2..=6 {
            let df = d as f64;
            let f = fef_isotropic(d, 1.0 / (df + 1.0)).unwrap();
            assert!((f - 1.0 / df).abs() < 1e-15);
            assert_eq!(fef_isotropic(d, 1.0).unwrap(), 1.0);
        }
        for k in 0..=50 {
            let p = k as f64 / 50.0;
            let via_magic = fef2(&isotropic_state(2, p).unwrap()).unwrap();
            assert!((via_magic - fef_isotropic(2, p).unwrap()).abs() < 1e-10);
        }
        assert!(fef_isotropic(3, 1.5).is_err());
    }

    #[test]
    fn k_factor_matches_scan() {
        assert_eq!(k_factor(2, 0.5), None);
        assert_eq!(k_factor(2, 0.75), Some(20));
        assert_eq!(k_factor(2, 1.0), Some(10));
        assert_eq!(k_oracle(2, 0.75), Some(20));
        assert_eq!(k_oracle(2, 1.0), Some(10));
        for d in 2..=6 {
            for step in 1..=40 {
                let f = 1.0 / d as f64 + step as f64 * (1.0 - 1.0 / d as f64) / 40.0;
                assert_eq!(k_factor(d, f), k_oracle(d, f), "d={d} f={f}");
            }
        }
    }

    #[test]
    fn k_factor_is_monotone_in_f() {
        for d in 2..=6 {
            let lo = 1.0 / d as f64;
            let ks: Vec<u64> = (1..=100)
                .map(|i| k_factor(d, lo + (1.0 - lo) * i as f64 / 100.0).unwrap())
                .collect();
            assert!(ks.windows(2).all(|w| w[0] >= w[1]), "d={d}: {ks:?}");
        }
    }
}

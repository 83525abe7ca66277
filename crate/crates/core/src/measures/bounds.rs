//! Stored threshold constants: analytic onsets, cited locality bounds and
//! the published threshold tables used as comparison references.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::states::Family;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceConstant {
    pub name: &'static str,
    pub value: f64,
    pub source: &'static str,
}

const PROJECTIVE_LOCALITY_QUBIT: f64 = 0.6595;
const REFINED_NONLOCALITY_QUBIT: f64 = 0.7054;

fn constant(name: &'static str, value: f64, source: &'static str) -> ReferenceConstant {
    ReferenceConstant {
        name,
        value,
        source,
    }
}

fn harmonic(d: usize) -> f64 {
    (1..=d).map(|k| 1.0 / k as f64).sum()
}

/// Entanglement onset `1/(d+1)` shared by the Werner and isotropic families.
pub fn entanglement_onset(d: usize) -> f64 {
    1.0 / (d as f64 + 1.0)
}

pub fn werner_locality(d: usize) -> f64 {
    (d as f64 - 1.0) / d as f64
}

pub fn isotropic_locality(d: usize) -> f64 {
    (harmonic(d) - 1.0) / (d as f64 - 1.0)
}

/// Constants that this crate does not compute (locality bounds, refined
/// nonlocality bounds) plus the analytic entanglement onsets.
pub fn reference_bounds(family: Family, d: usize) -> Result<Vec<ReferenceConstant>> {
    if d < 2 {
        return Err(Error::UnsupportedDimension(format!(
            "local dimension {d} < 2"
        )));
    }
    let qubit_extras = |out: &mut Vec<ReferenceConstant>| {
        out.push(constant(
            "p_NL_refined",
            REFINED_NONLOCALITY_QUBIT,
            "cited refined two-qubit nonlocality bound",
        ));
    };
    let mut out = Vec::new();
    match family {
        Family::Wi => {
            out.push(constant("p_E", entanglement_onset(2), "formula 1/(d+1)"));
            out.push(constant(
                "p_L",
                PROJECTIVE_LOCALITY_QUBIT,
                "cited projective-locality bound",
            ));
            qubit_extras(&mut out);
        }
        Family::Werner => {
            out.push(constant("p_E", entanglement_onset(d), "formula 1/(d+1)"));
            if d == 2 {
                out.push(constant(
                    "p_L",
                    PROJECTIVE_LOCALITY_QUBIT,
                    "cited projective-locality bound",
                ));
                qubit_extras(&mut out);
            } else {
                out.push(constant("p_L", werner_locality(d), "formula (d-1)/d"));
            }
        }
        Family::Isotropic => {
            out.push(constant("p_E", entanglement_onset(d), "formula 1/(d+1)"));
            if d == 2 {
                out.push(constant(
                    "p_L",
                    PROJECTIVE_LOCALITY_QUBIT,
                    "cited projective-locality bound",
                ));
                qubit_extras(&mut out);
            } else {
                out.push(constant(
                    "p_L",
                    isotropic_locality(d),
                    "formula (H_d - 1)/(d-1)",
                ));
            }
        }
        Family::Hirsch1 => {
            out.push(constant("p_L", 0.5, "published locality bound"));
        }
        Family::Hirsch2 => {
            return Err(Error::Unsupported(
                "no reference constants for the two-parameter Hirsch family".into(),
            ))
        }
    }
    Ok(out)
}

/// Published threshold for `(family, d, column)`; `column` is one of
/// `p_E`, `p_SA`, `p_TLF`, `p_L`, `p_HN`, `p_NL`.
#[allow(clippy::approx_constant)] // rounded published values
pub fn published_threshold(family: Family, d: usize, column: &str) -> Option<f64> {
    const E: [f64; 5] = [0.3333, 0.2500, 0.2000, 0.1429, 0.1667];
    const W_TLF: [f64; 5] = [0.6569, 0.6360, 0.6247, 0.6174, 0.6127];
    const W_L: [f64; 5] = [0.6595, 0.6667, 0.7500, 0.8000, 0.8333];
    const W_HN: [f64; 5] = [0.7054, 0.7630, 0.7837, 0.7944, 0.8009];
    const I_TLF: [f64; 5] = [0.6569, 0.5606, 0.4890, 0.4337, 0.3895];
    const I_L: [f64; 5] = [0.6595, 0.4167, 0.3611, 0.3208, 0.2900];
    const I_NL: [f64; 5] = [0.7054, 0.6961, 0.6905, 0.6872, 0.6849];
    let row = |table: &[f64; 5]| (2..=6).contains(&d).then(|| table[d - 2]);
    match (family, column) {
        (Family::Wi, "p_E" | "p_SA") => Some(0.3333),
        (Family::Wi, "p_TLF") => Some(0.6569),
        (Family::Wi, "p_L") => Some(PROJECTIVE_LOCALITY_QUBIT),
        (Family::Wi, "p_HN" | "p_NL") => Some(REFINED_NONLOCALITY_QUBIT),
        (Family::Werner, "p_E") => row(&E),
        (Family::Werner, "p_SA") => (d == 2).then_some(0.3333),
        (Family::Werner, "p_TLF") => row(&W_TLF),
        (Family::Werner, "p_L") => row(&W_L),
        (Family::Werner, "p_HN") => row(&W_HN),
        (Family::Isotropic, "p_E" | "p_SA") => row(&E),
        (Family::Isotropic, "p_TLF") => row(&I_TLF),
        (Family::Isotropic, "p_L") => row(&I_L),
        (Family::Isotropic, "p_NL") => row(&I_NL),
        (Family::Hirsch1, "p_E" | "p_HN") => Some(0.0),
        (Family::Hirsch1, "p_TLF") => Some(0.1716),
        (Family::Hirsch1, "p_SA") => Some(0.333),
        (Family::Hirsch1, "p_L") => Some(0.5),
        (Family::Hirsch1, "p_NL") => Some(0.7071),
        _ => None,
    }
}

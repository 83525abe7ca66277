//! Closed-form property evaluators.

pub mod bounds;
pub mod cglmp;
pub mod chsh;
pub mod entanglement;
pub mod filter;
pub mod teleport;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

pub use bounds::{published_threshold, reference_bounds, ReferenceConstant};
pub use cglmp::{cglmp_value, CGLMP_LOCAL_BOUND};
pub use chsh::{
    chsh_m, chsh_value, correlation_matrix, hidden_nonlocality, CorrelationMatrix,
    HiddenNonlocality,
};
pub use entanglement::{concurrence, eof, pure_eof};
pub use filter::{filtered_chsh, popescu_filter, popescu_threshold, FilteredWerner};
pub use teleport::{fef2, fef_isotropic, k_factor, sa_value, Superactivation};

/// Binary entropy in bits.
pub fn binary_entropy(x: f64) -> f64 {
    let term = |v: f64| if v <= 0.0 { 0.0 } else { -v * v.log2() };
    term(x) + term(1.0 - x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropertyKind {
    Eof,
    Chsh,
    Hn,
    Sa,
    /// Optimal value of the tensoring-and-filtering program.
    Tlf,
    Cglmp,
}

impl PropertyKind {
    pub const ALL: [PropertyKind; 6] = [
        PropertyKind::Eof,
        PropertyKind::Chsh,
        PropertyKind::Hn,
        PropertyKind::Sa,
        PropertyKind::Tlf,
        PropertyKind::Cglmp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PropertyKind::Eof => "eof",
            PropertyKind::Chsh => "chsh",
            PropertyKind::Hn => "hn",
            PropertyKind::Sa => "sa",
            PropertyKind::Tlf => "tlf",
            PropertyKind::Cglmp => "cglmp",
        }
    }
}

impl fmt::Display for PropertyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PropertyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "tlf_sigma" => Ok(PropertyKind::Tlf),
            _ => PropertyKind::ALL
                .into_iter()
                .find(|k| k.name() == s)
                .ok_or_else(|| Error::UnknownProperty(s.to_string())),
        }
    }
}

/// One property evaluated at one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropertyValue {
    pub kind: PropertyKind,
    pub value: f64,
    /// Whether the property is present.
    pub indicator: bool,
}

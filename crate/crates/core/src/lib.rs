//! Entanglement and nonlocality properties of two-qudit states, and a search
//! for activation of CHSH nonlocality through tensoring and local filtering.

pub mod activation;
pub mod error;
pub mod measures;
pub mod qmat;
pub mod sdp;
pub mod states;
pub mod sweep;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use qmat::{ComplexMatrix, DensityMatrix, StateVector};
pub use states::{Family, FamilySpec};

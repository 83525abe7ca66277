//! Random matrices and states for unit tests.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::qmat::{c, ComplexMatrix, DensityMatrix, StateVector};

pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_complex<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    DMatrix::from_fn(n, n, |_, _| c(gaussian(rng), gaussian(rng)))
}

pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = random_complex(rng, n);
    (&g + g.adjoint()) * c(0.5, 0.0)
}

/// Hilbert-Schmidt random mixed state.
pub fn random_state<R: Rng>(rng: &mut R, dims: &[usize]) -> DensityMatrix {
    let n: usize = dims.iter().product();
    let g = random_complex(rng, n);
    let w = &g * g.adjoint();
    let tr = w.trace();
    DensityMatrix::new(w / tr, dims.to_vec()).unwrap()
}

pub fn random_pure<R: Rng>(rng: &mut R, n: usize) -> StateVector {
    let v = StateVector::from_fn(n, |_, _| c(gaussian(rng), gaussian(rng)));
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    random_complex(rng, n).qr().q()
}

/// Convex mixture of `terms` random product states.
pub fn random_separable<R: Rng>(rng: &mut R, da: usize, db: usize, terms: usize) -> DensityMatrix {
    let weights: Vec<f64> = (0..terms).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    let mut acc = ComplexMatrix::zeros(da * db, da * db);
    for w in weights {
        let a = random_state(rng, &[da]);
        let b = random_state(rng, &[db]);
        acc += a.tensor(&b).matrix() * c(w / total, 0.0);
    }
    DensityMatrix::new(acc, vec![da, db]).unwrap()
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

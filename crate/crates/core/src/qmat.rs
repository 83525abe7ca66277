//! Dense complex-matrix kernel for multipartite operators.
//!
//! Subsystems are big-endian: the first entry of a dimension list is the
//! leftmost tensor factor, so the basis index of `|i_0 i_1 ... i_{m-1}>` is
//! `((i_0 * d_1 + i_1) * d_2 + ...)`.

use nalgebra::{ComplexField, DMatrix, DVector, Scalar};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type StateVector = DVector<Complex64>;

/// Maximum entrywise `|rho - rho^dagger|` accepted for a density matrix.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Maximum `|Tr rho - 1|` accepted for a density matrix.
pub const TRACE_TOL: f64 = 1e-12;
/// Eigenvalues above `-PSD_TOL` count as non-negative.
pub const PSD_TOL: f64 = 1e-10;
/// Hermiticity slack accepted by the eigensolver.
pub const EIG_HERMITIAN_TOL: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn pauli(index: usize) -> ComplexMatrix {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match index {
        0 => ComplexMatrix::from_row_slice(2, 2, &[one, z, z, one]),
        1 => ComplexMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        2 => ComplexMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        3 => ComplexMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
        _ => panic!("Pauli index {index} out of range"),
    }
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermitian_deviation(h: &ComplexMatrix) -> f64 {
    let n = h.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn trace(h: &ComplexMatrix) -> Complex64 {
    h.trace()
}

/// A Hermitian, positive semidefinite, trace-one operator with an explicit
/// tensor-factor structure.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity before wrapping.
    pub fn new(mat: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        check_dims(&mat, &dims)?;
        let dev = hermitian_deviation(&mat);
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::TraceNotOne(tr.re));
        }
        let lo = min_eig(&mat)?;
        if lo < -PSD_TOL {
            return Err(Error::NotPsd(lo));
        }
        Ok(Self { mat, dims })
    }

    /// Wraps a matrix whose validity follows from its construction. The matrix
    /// is symmetrized to remove round-off anti-Hermitian parts.
    pub(crate) fn from_parts(mat: ComplexMatrix, dims: Vec<usize>) -> Self {
        debug_assert_eq!(mat.nrows(), dims.iter().product::<usize>());
        let sym = (&mat + mat.adjoint()) * c(0.5, 0.0);
        Self { mat: sym, dims }
    }

    pub fn from_pure(psi: &StateVector, dims: Vec<usize>) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized(norm));
        }
        let mat = psi * psi.adjoint();
        check_dims(&mat, &dims)?;
        Ok(Self::from_parts(mat, dims))
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let n: usize = dims.iter().product();
        Self::from_parts(identity(n) * c(1.0 / n as f64, 0.0), dims)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Side length of the matrix.
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn is_two_qubit(&self) -> bool {
        self.dims == [2, 2]
    }

    pub fn expect_dims(&self, dims: &[usize]) -> Result<()> {
        if self.dims != dims {
            return Err(Error::DimensionMismatch(format!(
                "expected subsystems {dims:?}, got {:?}",
                self.dims
            )));
        }
        Ok(())
    }

    /// `Tr[rho * op]`, real part.
    pub fn expectation(&self, op: &ComplexMatrix) -> f64 {
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.mat[(i, j)] * op[(j, i)];
            }
        }
        acc.re
    }

    /// Conjugation by a unitary acting on the whole space.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "unitary of side {} on state of side {}",
                u.nrows(),
                self.dim()
            )));
        }
        Ok(Self::from_parts(
            u * &self.mat * u.adjoint(),
            self.dims.clone(),
        ))
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::from_parts(kron(&self.mat, &other.mat), dims)
    }
}

fn check_dims(mat: &ComplexMatrix, dims: &[usize]) -> Result<()> {
    if !mat.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, not square",
            mat.nrows(),
            mat.ncols()
        )));
    }
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::DimensionMismatch(format!("invalid dims {dims:?}")));
    }
    let n: usize = dims.iter().product();
    if n != mat.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "dims {dims:?} have product {n}, matrix side is {}",
            mat.nrows()
        )));
    }
    Ok(())
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &v) in self.values.iter().enumerate() {
            for i in 0..n {
                scaled[(i, j)] *= v;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Kronecker product of a state-vector list, left to right.
pub fn kron_vectors(parts: &[&StateVector]) -> StateVector {
    let mut out = StateVector::from_element(1, c(1.0, 0.0));
    for p in parts {
        out = out.kronecker(*p);
    }
    out
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn validate_permutation(perm: &[usize], count: usize) -> Result<()> {
    let mut seen = vec![false; count];
    if perm.len() != count {
        return Err(Error::BadPermutation(perm.to_vec()));
    }
    for &p in perm {
        if p >= count || seen[p] {
            return Err(Error::BadPermutation(perm.to_vec()));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Index map for reordering subsystems: output factor `k` is input factor
/// `perm[k]`. Returns `map` with `out[r] = in[map[r]]`.
fn permutation_index_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let in_strides = strides(dims);
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let n: usize = dims.iter().product();
    let mut map = vec![0usize; n];
    let mut digits = vec![0usize; dims.len()];
    for (out_idx, slot) in map.iter_mut().enumerate() {
        let mut rem = out_idx;
        for k in (0..new_dims.len()).rev() {
            digits[k] = rem % new_dims[k];
            rem /= new_dims[k];
        }
        *slot = perm
            .iter()
            .zip(&digits)
            .map(|(&p, &digit)| digit * in_strides[p])
            .sum();
    }
    map
}

/// Reorders the tensor factors of an operator on `dims`; output factor `k`
/// is input factor `perm[k]`.
pub fn permute_matrix<T: Scalar + Copy>(
    mat: &DMatrix<T>,
    dims: &[usize],
    perm: &[usize],
) -> Result<DMatrix<T>> {
    validate_permutation(perm, dims.len())?;
    let map = permutation_index_map(dims, perm);
    let n = map.len();
    if mat.nrows() != n || mat.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "matrix side {} does not match dims {dims:?}",
            mat.nrows()
        )));
    }
    Ok(DMatrix::from_fn(n, n, |r, col| mat[(map[r], map[col])]))
}

pub fn permute_systems(rho: &DensityMatrix, perm: &[usize]) -> Result<DensityMatrix> {
    let mat = permute_matrix(&rho.mat, &rho.dims, perm)?;
    let dims = perm.iter().map(|&p| rho.dims[p]).collect();
    Ok(DensityMatrix { mat, dims })
}

pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let dims = rho.dims();
    if keep.is_empty() {
        return Err(Error::EmptySelection);
    }
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::SubsystemOutOfRange {
            index: bad,
            count: dims.len(),
        });
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let st = strides(dims);
    let offsets = |subs: &[usize]| -> Vec<usize> {
        let sub_dims: Vec<usize> = subs.iter().map(|&k| dims[k]).collect();
        let total: usize = sub_dims.iter().product();
        (0..total)
            .map(|mut idx| {
                let mut off = 0;
                for (pos, &k) in subs.iter().enumerate().rev() {
                    off += (idx % sub_dims[pos]) * st[k];
                    idx /= sub_dims[pos];
                }
                off
            })
            .collect()
    };
    let kept_off = offsets(&keep);
    let traced_off = offsets(&traced);
    let m = kept_off.len();
    let mut out = ComplexMatrix::zeros(m, m);
    for (r, &ro) in kept_off.iter().enumerate() {
        for (col, &co) in kept_off.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for &t in &traced_off {
                acc += rho.mat[(ro + t, co + t)];
            }
            out[(r, col)] = acc;
        }
    }
    let new_dims = keep.iter().map(|&k| dims[k]).collect();
    Ok(DensityMatrix::from_parts(out, new_dims))
}

/// Partial transpose over an arbitrary set of subsystems.
pub fn partial_transpose_matrix<T: Scalar + Copy>(
    mat: &DMatrix<T>,
    dims: &[usize],
    systems: &[usize],
) -> Result<DMatrix<T>> {
    if let Some(&bad) = systems.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::SubsystemOutOfRange {
            index: bad,
            count: dims.len(),
        });
    }
    let n: usize = dims.iter().product();
    if mat.nrows() != n || mat.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "matrix side {} does not match dims {dims:?}",
            mat.nrows()
        )));
    }
    let st = strides(dims);
    // part[i]: contribution of the transposed factors to flat index i
    let part: Vec<usize> = (0..n)
        .map(|i| {
            systems
                .iter()
                .map(|&k| ((i / st[k]) % dims[k]) * st[k])
                .sum()
        })
        .collect();
    Ok(DMatrix::from_fn(n, n, |r, col| {
        let rr = r - part[r] + part[col];
        let cc = col - part[col] + part[r];
        mat[(rr, cc)]
    }))
}

pub fn partial_transpose(rho: &DensityMatrix, subsystem: usize) -> Result<ComplexMatrix> {
    partial_transpose_matrix(&rho.mat, &rho.dims, &[subsystem])
}

fn check_hermitian(h: &ComplexMatrix) -> Result<()> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(
            "eigensolver needs a square matrix".into(),
        ));
    }
    let dev = hermitian_deviation(h);
    let scale = h.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    if dev > EIG_HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

pub fn herm_eig(h: &ComplexMatrix) -> Result<EigenDecomposition> {
    check_hermitian(h)?;
    let sym = (h + h.adjoint()) * c(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(EigenDecomposition { values, vectors })
}

/// Eigenvalues only, descending.
pub fn herm_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(h)?;
    let sym = (h + h.adjoint()) * c(0.5, 0.0);
    let mut values: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

pub fn min_eig(h: &ComplexMatrix) -> Result<f64> {
    Ok(*herm_eigenvalues(h)?.last().expect("non-empty matrix"))
}

/// Smallest eigenvalue of a real-or-complex Hermitian matrix, no checks.
pub(crate) fn min_eig_generic<T: ComplexField<RealField = f64>>(h: &DMatrix<T>) -> f64 {
    h.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Von Neumann entropy in bits.
pub fn entropy_bits(rho: &DensityMatrix) -> Result<f64> {
    let values = herm_eigenvalues(rho.matrix())?;
    Ok(values
        .into_iter()
        .filter(|&v| v > 1e-15)
        .map(|v| -v * v.log2())
        .sum())
}

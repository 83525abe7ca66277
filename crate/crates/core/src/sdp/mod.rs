//! Dense solver for `min <C, X>` over `{X >= 0, X^{T_S} >= 0, Tr X = 1}`,
//! where `T_S` is the partial transpose over a subset `S` of tensor factors.
//!
//! Consensus ADMM: `X` is projected onto the spectral simplex and `Y` onto the
//! cone of operators with positive partial transpose, coupled by `X = Y`.
//! Every few iterations the current `X` is mixed with `I/n` just enough to be
//! exactly feasible, giving an upper bound on the optimum, and the scaled
//! multiplier `U` yields the lower bound `lambda_min(C + rho U)` (its partial
//! transpose is negative semidefinite by construction). The run converges
//! when the two bounds meet.

use nalgebra::{ComplexField, DMatrix};
use serde::Serialize;

mod barrier;

use crate::error::{Error, Result};
use crate::qmat::{
    c, hermitian_deviation, min_eig_generic, partial_transpose_matrix, ComplexMatrix, DensityMatrix,
};

/// Iterations over which the splitting method must halve its certified gap
/// before a stalled run is handed to the Newton stage.
const STALL_WINDOW: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct SdpOptions {
    pub max_iters: usize,
    /// Target width of the certified `[lower, upper]` objective interval.
    pub tol_objective: f64,
    /// Bound on the reported feasibility residuals of the minimizer.
    pub tol_feasibility: f64,
    /// Initial ADMM penalty.
    pub penalty: f64,
    /// Residual balancing period, in iterations.
    pub adapt_every: usize,
    /// Bound evaluation period, in iterations.
    pub check_every: usize,
    /// Stop as soon as the certified interval excludes this value.
    pub sign_threshold: Option<f64>,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            max_iters: 50_000,
            tol_objective: 1e-6,
            tol_feasibility: 1e-8,
            penalty: 1.0,
            adapt_every: 100,
            check_every: 10,
            sign_threshold: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub cost: ComplexMatrix,
    pub dims: Vec<usize>,
    /// Subsystems transposed by the PPT constraint.
    pub t1_split: Vec<usize>,
    pub options: SdpOptions,
}

impl SdpProblem {
    pub fn new(cost: ComplexMatrix, dims: Vec<usize>, t1_split: Vec<usize>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if !cost.is_square() || cost.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "cost is {}x{}, dims {dims:?}",
                cost.nrows(),
                cost.ncols()
            )));
        }
        if let Some(&bad) = t1_split.iter().find(|&&k| k >= dims.len()) {
            return Err(Error::SubsystemOutOfRange {
                index: bad,
                count: dims.len(),
            });
        }
        let scale = cost.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
        let dev = hermitian_deviation(&cost);
        if dev > 1e-10 * scale {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self {
            cost,
            dims,
            t1_split,
            options: SdpOptions::default(),
        })
    }

    pub fn with_options(mut self, options: SdpOptions) -> Self {
        self.options = options;
        self
    }

    pub fn side(&self) -> usize {
        self.cost.nrows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    /// Certified interval narrower than `tol_objective`.
    Converged,
    /// The certified interval excludes `sign_threshold`.
    SignCertified,
    MaxIters,
    InfeasibleNumerics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residuals {
    /// `-lambda_min(X)`, clamped at zero.
    pub psd_slack: f64,
    /// `-lambda_min(X^{T_S})`, clamped at zero.
    pub ppt_slack: f64,
    pub trace_err: f64,
    /// Frobenius distance between the two ADMM blocks.
    pub consensus_gap: f64,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub minimizer: DensityMatrix,
    /// `<C, minimizer>`, an upper bound on the optimum.
    pub objective: f64,
    /// Certified lower bound on the optimum.
    pub lower_bound: f64,
    pub iterations: usize,
    pub status: SdpStatus,
    pub residuals: Residuals,
}

impl SdpSolution {
    pub fn is_certified(&self) -> bool {
        matches!(self.status, SdpStatus::Converged | SdpStatus::SignCertified)
    }
}

/// Scalars the solver runs over: `f64` for real symmetric costs, `Complex64`
/// otherwise.
trait Field: ComplexField<RealField = f64> + Copy {}

impl<T: ComplexField<RealField = f64> + Copy> Field for T {}

fn symmetrize<T: Field>(h: &DMatrix<T>) -> DMatrix<T> {
    (h + h.adjoint()) * T::from_real(0.5)
}

/// `V diag(values) V^dagger`, skipping zero weights.
fn reassemble<T: Field>(vectors: &DMatrix<T>, values: &[f64]) -> DMatrix<T> {
    let n = vectors.nrows();
    let keep: Vec<usize> = (0..values.len()).filter(|&k| values[k] != 0.0).collect();
    if keep.is_empty() {
        return DMatrix::zeros(n, n);
    }
    let scaled = DMatrix::from_fn(n, keep.len(), |i, j| {
        vectors[(i, keep[j])] * T::from_real(values[keep[j]])
    });
    let basis = DMatrix::from_fn(n, keep.len(), |i, j| vectors[(i, keep[j])]);
    symmetrize(&(scaled * basis.adjoint()))
}

fn project_psd_generic<T: Field>(h: &DMatrix<T>) -> DMatrix<T> {
    let eig = symmetrize(h).symmetric_eigen();
    let values: Vec<f64> = eig.eigenvalues.iter().map(|&v| v.max(0.0)).collect();
    reassemble(&eig.eigenvectors, &values)
}

/// Euclidean projection of `values` onto the probability simplex.
fn simplex_projection(values: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        cumulative += v;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if v - candidate > 0.0 {
            shift = candidate;
        }
    }
    values.iter().map(|&v| (v - shift).max(0.0)).collect()
}

fn project_density_generic<T: Field>(h: &DMatrix<T>) -> DMatrix<T> {
    let eig = symmetrize(h).symmetric_eigen();
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    reassemble(&eig.eigenvectors, &simplex_projection(&values))
}

/// Nearest positive semidefinite matrix in Frobenius norm.
pub fn project_psd(h: &ComplexMatrix) -> ComplexMatrix {
    project_psd_generic(h)
}

/// Nearest trace-one positive semidefinite matrix in Frobenius norm.
pub fn project_density(h: &ComplexMatrix, dims: Vec<usize>) -> Result<DensityMatrix> {
    let n: usize = dims.iter().product();
    if !h.is_square() || h.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "matrix side {} does not match dims {dims:?}",
            h.nrows()
        )));
    }
    Ok(DensityMatrix::from_parts(project_density_generic(h), dims))
}

fn inner<T: Field>(a: &DMatrix<T>, b: &DMatrix<T>) -> f64 {
    // Re Tr(A^dagger B) for Hermitian A
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x.conjugate() * *y).real())
        .sum()
}

struct Bounds<T> {
    upper: f64,
    lower: f64,
    feasible: DMatrix<T>,
    ppt_slack: f64,
}

struct Engine<'a, T> {
    cost: &'a DMatrix<T>,
    dims: &'a [usize],
    split: &'a [usize],
    n: usize,
}

impl<T: Field> Engine<'_, T> {
    fn pt(&self, m: &DMatrix<T>) -> DMatrix<T> {
        partial_transpose_matrix(m, self.dims, self.split).expect("validated dims")
    }

    /// Mixes `x` (PSD, unit trace) with `I/n` until its partial transpose is
    /// PSD, and evaluates both bounds.
    fn bounds(&self, x: &DMatrix<T>, u: &DMatrix<T>, penalty: f64) -> Bounds<T> {
        let lam = min_eig_generic(&self.pt(x));
        let feasible = if lam < 0.0 {
            let t = -lam / (-lam + 1.0 / self.n as f64);
            x * T::from_real(1.0 - t)
                + DMatrix::identity(self.n, self.n) * T::from_real(t / self.n as f64)
        } else {
            x.clone()
        };
        let ppt_after = min_eig_generic(&self.pt(&feasible));
        let upper = inner(self.cost, &feasible);
        let lower = min_eig_generic(&symmetrize(&(self.cost + u * T::from_real(penalty))));
        Bounds {
            upper,
            lower,
            feasible,
            ppt_slack: (-ppt_after).max(0.0),
        }
    }

    /// With `stall_exit`, gives up (status `MaxIters`) once the certified gap
    /// stops halving over `STALL_WINDOW` iterations.
    fn run(&self, opts: &SdpOptions, stall_exit: bool) -> RawSolution<T> {
        let n = self.n;
        let mut penalty = opts.penalty;
        let mut x = DMatrix::<T>::identity(n, n) * T::from_real(1.0 / n as f64);
        let mut y = x.clone();
        let mut u = DMatrix::<T>::zeros(n, n);
        let mut best: Option<(f64, DMatrix<T>, f64)> = None;
        let mut lower = f64::NEG_INFINITY;
        let mut consensus = f64::INFINITY;
        let mut status = SdpStatus::MaxIters;
        let mut window_gap = f64::INFINITY;
        let mut iterations = 0;

        for it in 1..=opts.max_iters {
            iterations = it;
            let target = &y - &u - self.cost * T::from_real(1.0 / penalty);
            x = project_density_generic(&target);
            let z = &x + &u;
            let y_prev = y;
            y = self.pt(&project_psd_generic(&self.pt(&z)));
            u = z - &y;

            if !x.iter().all(|v| v.real().is_finite()) || !u.iter().all(|v| v.real().is_finite()) {
                status = SdpStatus::InfeasibleNumerics;
                break;
            }

            let primal = (&x - &y).norm();
            let dual = penalty * (&y - &y_prev).norm();
            consensus = primal;

            if it % opts.check_every == 0 || it == opts.max_iters {
                let b = self.bounds(&x, &u, penalty);
                lower = lower.max(b.lower);
                if best.as_ref().is_none_or(|(ub, _, _)| b.upper < *ub) {
                    best = Some((b.upper, b.feasible, b.ppt_slack));
                }
                let upper = best.as_ref().map(|(ub, _, _)| *ub).unwrap();
                if stall_exit && it % STALL_WINDOW == 0 {
                    let gap = upper - lower;
                    if gap > 0.5 * window_gap {
                        break;
                    }
                    window_gap = gap;
                }
                if upper - lower <= opts.tol_objective {
                    status = SdpStatus::Converged;
                    break;
                }
                if let Some(threshold) = opts.sign_threshold {
                    if upper < threshold || lower > threshold {
                        status = SdpStatus::SignCertified;
                        break;
                    }
                }
            }

            if it % opts.adapt_every == 0 {
                if primal > 10.0 * dual {
                    penalty *= 2.0;
                    u *= T::from_real(0.5);
                } else if dual > 10.0 * primal {
                    penalty *= 0.5;
                    u *= T::from_real(2.0);
                }
            }
        }

        let (upper, feasible, ppt_slack) = match best {
            Some(b) => b,
            None => {
                let b = self.bounds(&x, &u, penalty);
                lower = lower.max(b.lower);
                (b.upper, b.feasible, b.ppt_slack)
            }
        };
        RawSolution {
            minimizer: feasible,
            objective: upper,
            lower_bound: lower,
            iterations,
            status,
            ppt_slack,
            consensus_gap: consensus,
        }
    }
}

struct RawSolution<T> {
    minimizer: DMatrix<T>,
    objective: f64,
    lower_bound: f64,
    iterations: usize,
    status: SdpStatus,
    ppt_slack: f64,
    consensus_gap: f64,
}

fn finish<T: Field>(
    raw: RawSolution<T>,
    dims: &[usize],
    to_complex: impl Fn(T) -> num_complex::Complex64,
) -> SdpSolution {
    let mat = raw.minimizer.map(to_complex);
    let minimizer = DensityMatrix::from_parts(mat, dims.to_vec());
    let psd_slack = (-min_eig_generic(minimizer.matrix())).max(0.0);
    let trace_err = (minimizer.matrix().trace().re - 1.0).abs();
    SdpSolution {
        minimizer,
        objective: raw.objective,
        lower_bound: raw.lower_bound,
        iterations: raw.iterations,
        status: raw.status,
        residuals: Residuals {
            psd_slack,
            ppt_slack: raw.ppt_slack,
            trace_err,
            consensus_gap: raw.consensus_gap,
        },
    }
}

/// Solves the problem; real symmetric costs run in real arithmetic, which
/// loses nothing because the real part of any feasible point is feasible
/// with the same objective.
pub fn solve(problem: &SdpProblem) -> SdpSolution {
    let opts = &problem.options;
    let is_real = problem.cost.iter().all(|z| z.im == 0.0);
    if is_real {
        let cost = symmetrize(&problem.cost.map(|z| z.re));
        let engine = Engine {
            cost: &cost,
            dims: &problem.dims,
            split: &problem.t1_split,
            n: problem.side(),
        };
        let newton = problem.side() <= barrier::MAX_SIDE;
        let mut raw = engine.run(opts, newton);
        if newton && raw.status == SdpStatus::MaxIters {
            refine(&engine, opts, &mut raw);
        }
        finish(raw, &problem.dims, |v| c(v, 0.0))
    } else {
        let cost = symmetrize(&problem.cost);
        let engine = Engine {
            cost: &cost,
            dims: &problem.dims,
            split: &problem.t1_split,
            n: problem.side(),
        };
        finish(engine.run(opts, false), &problem.dims, |v| v)
    }
}

/// Continues a stalled run with the barrier method and merges the bounds.
fn refine(engine: &Engine<'_, f64>, opts: &SdpOptions, raw: &mut RawSolution<f64>) {
    let out = barrier::solve(
        engine.cost,
        engine.dims,
        engine.split,
        opts.tol_objective,
        opts.sign_threshold,
    );
    raw.iterations += out.steps;
    raw.lower_bound = raw.lower_bound.max(out.lower);
    if out.upper < raw.objective {
        let ppt = min_eig_generic(&engine.pt(&out.x));
        raw.minimizer = out.x;
        raw.objective = out.upper;
        raw.ppt_slack = (-ppt).max(0.0);
    }
    if raw.objective - raw.lower_bound <= opts.tol_objective {
        raw.status = SdpStatus::Converged;
    } else if opts
        .sign_threshold
        .is_some_and(|s| raw.objective < s || raw.lower_bound > s)
    {
        raw.status = SdpStatus::SignCertified;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{herm_eigenvalues, identity, min_eig, StateVector};
    use crate::states::{psi_minus, wi_state};
    use crate::testutil::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(values: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&StateVector::from_iterator(
            values.len(),
            values.iter().map(|&v| c(v, 0.0)),
        ))
    }

    fn qubit_problem(cost: ComplexMatrix) -> SdpProblem {
        SdpProblem::new(cost, vec![2, 2], vec![0]).unwrap()
    }

    #[test]
    fn constant_objective() {
        let sol = solve(&qubit_problem(identity(4)));
        assert_eq!(sol.status, SdpStatus::Converged);
        assert!((sol.objective - 1.0).abs() < 1e-6);
    }

    #[test]
    fn diagonal_cost_picks_lowest_basis_state() {
        let sol = solve(&qubit_problem(diag(&[1.0, 2.0, 3.0, 4.0])));
        assert_eq!(sol.status, SdpStatus::Converged);
        assert!((sol.objective - 1.0).abs() < 1e-6);
        let mut e1 = ComplexMatrix::zeros(4, 4);
        e1[(0, 0)] = c(1.0, 0.0);
        assert!(max_abs_diff(sol.minimizer.matrix(), &e1) < 1e-3);
    }

    /// Brute-force oracle for `max <psi_-|X|psi_->` over two-qubit PPT states:
    /// scan Werner-like mixtures `w psi_- + (1-w) I/4` (the twirl of any
    /// feasible point lies in this family and keeps the overlap).
    fn singlet_overlap_oracle() -> f64 {
        let proj = psi_minus() * psi_minus().adjoint();
        let mut best = f64::NEG_INFINITY;
        for k in 0..=100_000 {
            let w = k as f64 / 100_000.0;
            let rho = wi_state(w).unwrap();
            let pt = partial_transpose_matrix(rho.matrix(), &[2, 2], &[0]).unwrap();
            if min_eig(&pt).unwrap() >= -1e-12 {
                best = best.max(rho.expectation(&proj));
            }
        }
        best
    }

    #[test]
    fn singlet_cost_hits_ppt_bound() {
        let oracle = singlet_overlap_oracle();
        assert!((oracle - 0.5).abs() < 1e-4);
        let proj = psi_minus() * psi_minus().adjoint();
        let sol = solve(&qubit_problem(-proj));
        assert_eq!(sol.status, SdpStatus::Converged);
        assert!((sol.objective + 0.5).abs() < 1e-6, "{}", sol.objective);
        assert!(sol.objective >= -oracle - 1e-4);
        assert!(sol.residuals.psd_slack <= 1e-8);
        assert!(sol.residuals.ppt_slack <= 1e-8);
        assert!(sol.residuals.trace_err <= 1e-8);
    }

    #[test]
    fn complex_costs_are_supported() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let cost = random_hermitian(&mut rng, 4);
        let sol = solve(&qubit_problem(cost.clone()));
        assert_eq!(sol.status, SdpStatus::Converged);
        assert!(sol.objective >= min_eig(&cost).unwrap() - 1e-8);
        assert!(sol.objective - sol.lower_bound <= 1e-6);
    }

    #[test]
    fn bounds_enclose_and_respect_psd_relaxation() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..5 {
            let cost = random_hermitian(&mut rng, 6).map(|z| c(z.re, 0.0));
            let problem = SdpProblem::new(cost.clone(), vec![2, 3], vec![0]).unwrap();
            let sol = solve(&problem);
            assert_eq!(sol.status, SdpStatus::Converged);
            assert!(sol.lower_bound <= sol.objective);
            assert!(sol.objective >= min_eig(&cost).unwrap() - 1e-8);
            let pt = partial_transpose_matrix(sol.minimizer.matrix(), &[2, 3], &[0]).unwrap();
            assert!(min_eig(&pt).unwrap() >= -1e-8);
        }
    }

    #[test]
    fn solves_are_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let cost = random_hermitian(&mut rng, 4).map(|z| c(z.re, 0.0));
        let a = solve(&qubit_problem(cost.clone()));
        let b = solve(&qubit_problem(cost));
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    }

    #[test]
    fn objective_scales_with_cost() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let cost = random_hermitian(&mut rng, 4).map(|z| c(z.re, 0.0));
        let opts = SdpOptions {
            tol_objective: 1e-10,
            ..SdpOptions::default()
        };
        let base = solve(&qubit_problem(cost.clone()).with_options(opts.clone())).objective;
        for alpha in [0.5, 2.0] {
            let scaled = solve(&qubit_problem(&cost * c(alpha, 0.0)).with_options(opts.clone()));
            assert!((scaled.objective - alpha * base).abs() <= 1e-8);
        }
    }

    #[test]
    fn sign_threshold_stops_early() {
        let proj = psi_minus() * psi_minus().adjoint();
        let opts = SdpOptions {
            sign_threshold: Some(0.0),
            ..SdpOptions::default()
        };
        let sol = solve(&qubit_problem(-proj).with_options(opts));
        assert_eq!(sol.status, SdpStatus::SignCertified);
        assert!(sol.objective < 0.0);
    }

    #[test]
    fn iteration_cap_reports_best_iterate() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let cost = random_hermitian(&mut rng, 6);
        let opts = SdpOptions {
            max_iters: 3,
            ..SdpOptions::default()
        };
        let problem = SdpProblem::new(cost, vec![2, 3], vec![0])
            .unwrap()
            .with_options(opts);
        let sol = solve(&problem);
        assert_eq!(sol.status, SdpStatus::MaxIters);
        assert_eq!(sol.iterations, 3);
        assert!(sol.residuals.ppt_slack <= 1e-8);
    }

    #[test]
    fn rejects_bad_problems() {
        let mut m = identity(4);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(
            SdpProblem::new(m, vec![2, 2], vec![0]),
            Err(Error::NotHermitian(_))
        ));
        assert!(SdpProblem::new(identity(4), vec![2, 3], vec![0]).is_err());
        assert!(SdpProblem::new(identity(4), vec![2, 2], vec![2]).is_err());
    }

    #[test]
    fn psd_projection() {
        let p = diag(&[1.0, 0.5]);
        assert!(max_abs_diff(&project_psd(&p), &p) < 1e-12);
        assert!(max_abs_diff(&project_psd(&diag(&[1.0, -1.0])), &diag(&[1.0, 0.0])) < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        let h = random_hermitian(&mut rng, 16);
        assert!(min_eig(&project_psd(&h)).unwrap() >= -1e-12);
    }

    #[test]
    fn density_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let rho = random_state(&mut rng, &[2, 2]);
        let same = project_density(rho.matrix(), vec![2, 2]).unwrap();
        assert!(max_abs_diff(same.matrix(), rho.matrix()) < 1e-12);
        let center = project_density(&ComplexMatrix::zeros(4, 4), vec![2, 2]).unwrap();
        assert!(max_abs_diff(center.matrix(), &(identity(4) * c(0.25, 0.0))) < 1e-15);
        for _ in 0..10 {
            let h = random_hermitian(&mut rng, 6);
            let out = project_density(&h, vec![2, 3]).unwrap();
            assert!((out.matrix().trace().re - 1.0).abs() < 1e-12);
            assert!(*herm_eigenvalues(out.matrix()).unwrap().last().unwrap() >= -1e-12);
        }
    }

    #[test]
    fn simplex_projection_cases() {
        assert_eq!(simplex_projection(&[0.0, 0.0]), vec![0.5, 0.5]);
        assert_eq!(simplex_projection(&[2.0, 0.0]), vec![1.0, 0.0]);
        let out = simplex_projection(&[0.3, 0.2, 0.5]);
        assert!(out
            .iter()
            .zip([0.3, 0.2, 0.5])
            .all(|(a, b)| (a - b).abs() < 1e-15));
    }
}

//! Iterative solves with SPD systems of the form `shift·I + scale·L`.
//!
//! The contract is the energy-norm one: the returned `v` satisfies
//! `‖v − H⁻¹u‖_H ≤ ε‖H⁻¹u‖_H`.
//!
//! The default method is Chebyshev semi-iteration on a certified spectral
//! interval `[lo, hi]`. Its iteration count depends only on `(lo, hi, ε)`,
//! so for a fixed handle the solve is a fixed linear map of `u`. The
//! preconditioner analysis relies on that: `X ↦ Solve(X)` must be linear for
//! the sketched Gram to approximate the true one. Conjugate gradients with
//! Jacobi scaling is available as an alternative; it converges faster but is
//! not linear in `u`.

use rayon::prelude::*;

use crate::dense::{axpy, dot, norm, DenseMatrix};
use crate::error::{dim_mismatch, HertaError, Result};
use crate::sparse::SparseSymmetric;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverMethod {
    #[default]
    Chebyshev,
    ConjugateGradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveStats {
    pub iterations: usize,
    pub final_rel_residual: f64,
}

/// Anything that approximately applies `H⁻¹`.
pub trait LinearSolver: Sync {
    fn dim(&self) -> usize;
    fn solve(&self, u: &[f64]) -> Result<Vec<f64>>;

    fn solve_multi(&self, u: &DenseMatrix) -> Result<DenseMatrix> {
        if u.rows() != self.dim() {
            return Err(dim_mismatch(self.dim(), u.rows()));
        }
        let cols: Vec<Vec<f64>> = (0..u.cols())
            .into_par_iter()
            .map(|j| self.solve(&u.col(j)))
            .collect::<Result<_>>()?;
        Ok(columns_to_matrix(u.rows(), &cols))
    }
}

pub(crate) fn columns_to_matrix(rows: usize, cols: &[Vec<f64>]) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i])
}

#[derive(Debug, Clone)]
pub struct SolverHandle {
    h: SparseSymmetric,
    eps: f64,
    lo: f64,
    hi: f64,
    max_iter: usize,
    method: SolverMethod,
}

impl SolverHandle {
    /// `lo ≤ λ_min(H)` and `hi ≥ λ_max(H)` must hold; they are trusted.
    pub fn new(h: SparseSymmetric, eps: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(HertaError::InvalidConfig(format!("solver rate must be positive, got {eps}")));
        }
        if !(lo > 0.0) || !(hi >= lo) || !hi.is_finite() {
            return Err(HertaError::InvalidConfig(format!("bad spectral interval [{lo}, {hi}]")));
        }
        let kappa = hi / lo;
        let max_iter = (10.0 * kappa.sqrt() * (1.0 / eps.min(0.5)).ln()).ceil() as usize + 100;
        Ok(Self {
            h,
            eps,
            lo,
            hi,
            max_iter,
            method: SolverMethod::default(),
        })
    }

    /// Handle for `I + λL` with `L ⪰ 0`. `scaling` sharpens the
    /// Gershgorin bound on `λ_max(L)`; see [`crate::graph::GraphData::degree_scaling`].
    pub fn regularized(l: &SparseSymmetric, lambda: f64, eps: f64, scaling: Option<&[f64]>) -> Result<Self> {
        let h = crate::graph::regularized_operator(l, lambda)?;
        let ub = l.gershgorin_upper_bound(scaling).max(0.0);
        Self::new(h, eps, 1.0, 1.0 + lambda * ub)
    }

    /// Handle for `L + shift·I` with `L ⪰ 0`.
    pub fn shifted(l: &SparseSymmetric, shift: f64, eps: f64, scaling: Option<&[f64]>) -> Result<Self> {
        if !(shift > 0.0) {
            return Err(HertaError::InvalidConfig(format!("shift must be positive, got {shift}")));
        }
        let ub = l.gershgorin_upper_bound(scaling).max(0.0);
        Self::new(l.scaled_plus_identity(1.0, shift), eps, shift, shift + ub)
    }

    pub fn with_method(mut self, method: SolverMethod) -> Self {
        self.method = method;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    /// Same operator, different rate.
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        let mut out = Self::new(self.h.clone(), eps, self.lo, self.hi)?;
        out.method = self.method;
        Ok(out)
    }

    pub fn operator(&self) -> &SparseSymmetric {
        &self.h
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn spectral_bounds(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn cond_hint(&self) -> f64 {
        self.hi / self.lo
    }

    pub fn max_iter(&self) -> usize {
        self.max_iter
    }

    pub fn method(&self) -> SolverMethod {
        self.method
    }

    /// Row diagonal dominance of the operator. Diagnostic only: `I + λL̂`
    /// can fail it when a high-degree node meets low-degree neighbours.
    pub fn is_sdd(&self) -> bool {
        self.h.is_diagonally_dominant(1e-12)
    }

    /// Chebyshev steps needed for rate `eps`: smallest `k` with
    /// `T_k((hi+lo)/(hi−lo)) ≥ 1/eps`.
    pub fn chebyshev_iterations(&self) -> usize {
        if self.eps >= 1.0 {
            return 0;
        }
        if self.hi <= self.lo * (1.0 + 1e-15) {
            return 1;
        }
        let sigma = (self.hi + self.lo) / (self.hi - self.lo);
        ((1.0 / self.eps).acosh() / sigma.acosh()).ceil().max(1.0) as usize
    }
}

impl LinearSolver for SolverHandle {
    fn dim(&self) -> usize {
        self.h.n()
    }

    fn solve(&self, u: &[f64]) -> Result<Vec<f64>> {
        sdd_solve(self, u).map(|(v, _)| v)
    }
}

pub fn sdd_solve(h: &SolverHandle, u: &[f64]) -> Result<(Vec<f64>, SolveStats)> {
    let n = h.h.n();
    if u.len() != n {
        return Err(dim_mismatch(n, u.len()));
    }
    let unorm = norm(u);
    if unorm == 0.0 {
        return Ok((vec![0.0; n], SolveStats::default()));
    }
    let (v, iterations) = match h.method {
        SolverMethod::Chebyshev => chebyshev(h, u)?,
        SolverMethod::ConjugateGradient => jacobi_cg(h, u, unorm)?,
    };
    let mut r = vec![0.0; n];
    h.h.matvec_into(&v, &mut r);
    let res: f64 = r.iter().zip(u).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    Ok((
        v,
        SolveStats {
            iterations,
            final_rel_residual: res / unorm,
        },
    ))
}

fn chebyshev(h: &SolverHandle, u: &[f64]) -> Result<(Vec<f64>, usize)> {
    let n = u.len();
    let k = h.chebyshev_iterations();
    if k == 0 {
        return Ok((vec![0.0; n], 0));
    }
    if k > h.max_iter {
        return Err(HertaError::NoConvergence { iterations: h.max_iter });
    }
    if h.hi <= h.lo * (1.0 + 1e-15) {
        return Ok((u.iter().map(|x| x / h.lo).collect(), 1));
    }
    let theta = 0.5 * (h.hi + h.lo);
    let delta = 0.5 * (h.hi - h.lo);
    let sigma = theta / delta;
    let mut rho = 1.0 / sigma;
    let mut x = vec![0.0; n];
    let mut r = u.to_vec();
    let mut d: Vec<f64> = r.iter().map(|v| v / theta).collect();
    let mut hd = vec![0.0; n];
    for it in 0..k {
        axpy(1.0, &d, &mut x);
        if it + 1 == k {
            break;
        }
        h.h.matvec_into(&d, &mut hd);
        axpy(-1.0, &hd, &mut r);
        let rho_next = 1.0 / (2.0 * sigma - rho);
        let c = 2.0 * rho_next / delta;
        for (di, ri) in d.iter_mut().zip(&r) {
            *di = rho_next * rho * *di + c * ri;
        }
        rho = rho_next;
    }
    Ok((x, k))
}

/// Residual target `‖Hv − u‖/‖u‖ ≤ ε/√κ` implies the energy-norm contract
/// since `‖e‖_H ≤ ‖r‖/√lo` and `‖H⁻¹u‖_H ≥ ‖u‖/√hi`.
fn jacobi_cg(h: &SolverHandle, u: &[f64], unorm: f64) -> Result<(Vec<f64>, usize)> {
    let n = u.len();
    if h.eps >= 1.0 {
        return Ok((vec![0.0; n], 0));
    }
    let target = h.eps / h.cond_hint().sqrt() * unorm;
    let inv_diag: Vec<f64> = h.h.diagonal().iter().map(|d| if *d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let mut x = vec![0.0; n];
    let mut r = u.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut hp = vec![0.0; n];
    for it in 1..=h.max_iter {
        h.h.matvec_into(&p, &mut hp);
        let alpha = rz / dot(&p, &hp);
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &hp, &mut r);
        if norm(&r) <= target {
            return Ok((x, it));
        }
        for ((zi, ri), di) in z.iter_mut().zip(&r).zip(&inv_diag) {
            *zi = ri * di;
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Err(HertaError::NoConvergence { iterations: h.max_iter })
}

/// Column-wise [`sdd_solve`], parallel over columns.
pub fn sdd_solve_multi(h: &SolverHandle, u: &DenseMatrix) -> Result<DenseMatrix> {
    h.solve_multi(u)
}

/// Exact `H⁻¹` held densely. Reference solver for tests and small runs.
#[derive(Debug, Clone)]
pub struct DenseInverse {
    inv: DenseMatrix,
}

impl DenseInverse {
    pub fn new(h: &SparseSymmetric) -> Result<Self> {
        Ok(Self {
            inv: h.to_dense().spd_inverse()?,
        })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.inv
    }
}

impl LinearSolver for DenseInverse {
    fn dim(&self) -> usize {
        self.inv.rows()
    }

    fn solve(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.inv.matvec(u)
    }
}

/// `‖x‖_A` for symmetric `A`.
pub fn energy_norm(a: &SparseSymmetric, x: &[f64]) -> f64 {
    a.quadratic_form(x).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphData;
    use crate::sparse::SparseSymmetric;

    fn triangle_l() -> (SparseSymmetric, Vec<f64>) {
        let g = GraphData::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap().add_self_loops();
        (g.normalized_laplacian().unwrap(), g.degree_scaling())
    }

    fn h_error(h: &SparseSymmetric, v: &[f64], u: &[f64]) -> f64 {
        let exact = h.to_dense().spd_inverse().unwrap().matvec(u).unwrap();
        let diff: Vec<f64> = v.iter().zip(&exact).map(|(a, b)| a - b).collect();
        energy_norm(h, &diff) / energy_norm(h, &exact)
    }

    #[test]
    fn identity_is_one_exact_step() {
        let l = SparseSymmetric::zero(1);
        let h = SolverHandle::regularized(&l, 1.0, 1e-6, None).unwrap();
        let (v, st) = sdd_solve(&h, &[3.5]).unwrap();
        assert_eq!(v, vec![3.5]);
        assert_eq!(st.iterations, 1);
    }

    #[test]
    fn triangle_matches_dense() {
        let (l, s) = triangle_l();
        for method in [SolverMethod::Chebyshev, SolverMethod::ConjugateGradient] {
            let h = SolverHandle::regularized(&l, 1.0, 1e-8, Some(&s)).unwrap().with_method(method);
            let u = [1.0, 0.0, 0.0];
            let (v, _) = sdd_solve(&h, &u).unwrap();
            assert!(h_error(h.operator(), &v, &u) <= 1e-8);
        }
    }

    #[test]
    fn tighter_rate_is_no_worse() {
        let (l, s) = triangle_l();
        let u = [0.3, -1.0, 2.0];
        let coarse = SolverHandle::regularized(&l, 3.0, 1e-2, Some(&s)).unwrap();
        let fine = coarse.with_eps(1e-3).unwrap();
        let e1 = h_error(fine.operator(), &sdd_solve(&fine, &u).unwrap().0, &u);
        let e2 = h_error(coarse.operator(), &sdd_solve(&coarse, &u).unwrap().0, &u);
        assert!(e1 <= e2 && e2 <= 1e-2);
    }

    #[test]
    fn chebyshev_is_linear() {
        let (l, s) = triangle_l();
        let h = SolverHandle::regularized(&l, 2.0, 1e-3, Some(&s)).unwrap();
        let a = [1.0, 2.0, -1.0];
        let b = [0.5, 0.0, 4.0];
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 2.0 * x + y).collect();
        let va = h.solve(&a).unwrap();
        let vb = h.solve(&b).unwrap();
        let vs = h.solve(&sum).unwrap();
        for i in 0..3 {
            assert!((vs[i] - 2.0 * va[i] - vb[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn rate_at_least_one_returns_zero() {
        let (l, _) = triangle_l();
        let h = SolverHandle::regularized(&l, 1.0, 1.5, None).unwrap();
        assert_eq!(h.solve(&[1.0, 1.0, 1.0]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn multi_zero_and_identity() {
        let g = GraphData::new(5, (0..4).map(|i| (i, i + 1))).unwrap().add_self_loops();
        let l = g.normalized_laplacian().unwrap();
        let h = SolverHandle::regularized(&l, 2.0, 1e-10, Some(&g.degree_scaling())).unwrap();
        let zero = sdd_solve_multi(&h, &DenseMatrix::zeros(5, 3)).unwrap();
        assert!(zero.data().iter().all(|v| *v == 0.0));
        let inv = sdd_solve_multi(&h, &DenseMatrix::identity(5)).unwrap();
        let want = h.operator().to_dense().spd_inverse().unwrap();
        assert!(inv.max_abs_diff(&want) < 1e-8);
        assert!(sdd_solve_multi(&h, &DenseMatrix::zeros(4, 1)).is_err());
    }

    #[test]
    fn shifted_handle_bounds() {
        let (l, s) = triangle_l();
        let h = SolverHandle::shifted(&l, 0.25, 1e-9, Some(&s)).unwrap();
        let (lo, hi) = h.spectral_bounds();
        assert_eq!(lo, 0.25);
        assert!(hi >= 1.25 - 1e-12);
        let u = [1.0, -1.0, 0.5];
        let v = h.solve(&u).unwrap();
        assert!(h_error(h.operator(), &v, &u) <= 1e-9);
    }

    #[test]
    fn dimension_checked() {
        let (l, _) = triangle_l();
        let h = SolverHandle::regularized(&l, 1.0, 1e-3, None).unwrap();
        assert!(matches!(sdd_solve(&h, &[1.0]), Err(HertaError::DimensionMismatch { .. })));
    }

    #[test]
    fn sdd_diagnostic_on_star() {
        let (l, _) = triangle_l();
        assert!(SolverHandle::regularized(&l, 1.0, 0.1, None).unwrap().is_sdd());
        // star with 20 leaves: the hub row stops being dominant for large λ
        let g = GraphData::new(21, (1..21).map(|i| (0, i))).unwrap().add_self_loops();
        let star = g.normalized_laplacian().unwrap();
        assert!(!SolverHandle::regularized(&star, 10.0, 0.1, None).unwrap().is_sdd());
        let d = g.degrees();
        let scaled = star.scaled_plus_identity(10.0, 1.0).diagonal_congruence(&g.degree_scaling());
        assert!(scaled.is_diagonally_dominant(1e-9));
        assert!((scaled.get(0, 0) - (d[0] + 10.0 * (d[0] - 1.0))).abs() < 1e-9);
    }
}

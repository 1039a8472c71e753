//! The linear unfolded model `Z*(W) = H⁻¹XW`, `H = I + λL̂`, its losses and
//! their derivatives.
//!
//! The MSE loss splits over label columns: with `ŷ_i = Hy_i`,
//! `ℓ_i(w_i) = ½‖M H⁻¹(Xw_i − ŷ_i)‖²` where `M` is the optional 0/1
//! training mask.

use rayon::prelude::*;

use crate::dense::{norm, DenseMatrix};
use crate::error::{dim_mismatch, HertaError, Result};
use crate::oracle::DenseOracle;
use crate::solver::{LinearSolver, SolverHandle};
use crate::sparse::SparseSymmetric;
use crate::sparsifier::laplacian_scaling;

#[derive(Debug, Clone)]
pub struct ModelSpec {
    l_hat: SparseSymmetric,
    lambda: f64,
    x: DenseMatrix,
    y: DenseMatrix,
    h: SparseSymmetric,
    scaling: Vec<f64>,
    mask: Option<Vec<bool>>,
}

impl ModelSpec {
    pub fn new(l_hat: SparseSymmetric, lambda: f64, x: DenseMatrix, y: DenseMatrix) -> Result<Self> {
        let n = l_hat.n();
        if x.rows() != n {
            return Err(dim_mismatch(format!("{n} feature rows"), x.rows()));
        }
        if y.rows() != n {
            return Err(dim_mismatch(format!("{n} label rows"), y.rows()));
        }
        if x.cols() == 0 || y.cols() == 0 {
            return Err(HertaError::InvalidConfig("features and labels need at least one column".into()));
        }
        if !x.is_finite() || !y.is_finite() {
            return Err(HertaError::InvalidConfig("non-finite feature or label entry".into()));
        }
        let h = crate::graph::regularized_operator(&l_hat, lambda)?;
        if x.cols() <= 64 && n <= 5000 {
            let sv = x.singular_values();
            let top = sv.first().copied().unwrap_or(0.0);
            if sv.last().is_none_or(|lo| *lo <= top * 1e-12) {
                log::warn!("feature matrix is rank deficient; conditioning guarantees do not apply");
            }
        }
        let scaling = laplacian_scaling(&l_hat);
        Ok(Self {
            l_hat,
            lambda,
            x,
            y,
            h,
            scaling,
            mask: None,
        })
    }

    /// Restrict the loss to nodes with `mask[u] = true`.
    pub fn with_mask(mut self, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != self.n() {
            return Err(dim_mismatch(self.n(), mask.len()));
        }
        self.mask = Some(mask);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn d(&self) -> usize {
        self.x.cols()
    }

    pub fn c(&self) -> usize {
        self.y.cols()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn l_hat(&self) -> &SparseSymmetric {
        &self.l_hat
    }

    pub fn x(&self) -> &DenseMatrix {
        &self.x
    }

    pub fn y(&self) -> &DenseMatrix {
        &self.y
    }

    pub fn h(&self) -> &SparseSymmetric {
        &self.h
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    /// `√d_u` node scaling used for spectral bounds.
    pub fn scaling(&self) -> &[f64] {
        &self.scaling
    }

    pub fn masked_y(&self) -> DenseMatrix {
        let mut y = self.y.clone();
        self.apply_mask_rows(&mut y);
        y
    }

    pub fn apply_mask(&self, v: &mut [f64]) {
        if let Some(mask) = &self.mask {
            for (x, keep) in v.iter_mut().zip(mask) {
                if !keep {
                    *x = 0.0;
                }
            }
        }
    }

    pub fn apply_mask_rows(&self, m: &mut DenseMatrix) {
        if let Some(mask) = &self.mask {
            for (i, keep) in mask.iter().enumerate() {
                if !keep {
                    m.row_mut(i).iter_mut().for_each(|v| *v = 0.0);
                }
            }
        }
    }

    /// Solver for `H` at relative rate `eps`.
    pub fn solver(&self, eps: f64) -> Result<SolverHandle> {
        SolverHandle::regularized(&self.l_hat, self.lambda, eps, Some(&self.scaling))
    }

    pub fn sub_problem(&self, i: usize) -> Result<SubProblem> {
        if i >= self.c() {
            return Err(dim_mismatch(format!("class index < {}", self.c()), i));
        }
        Ok(SubProblem {
            index: i,
            y_hat: self.h.matvec(&self.y.col(i))?,
        })
    }

    pub fn sub_problems(&self) -> Result<Vec<SubProblem>> {
        (0..self.c()).map(|i| self.sub_problem(i)).collect()
    }
}

/// One label column in the form `ℓ_i = ½‖MH⁻¹(Xw − ŷ_i)‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubProblem {
    pub index: usize,
    /// `(I + λL̂)y_i`.
    pub y_hat: Vec<f64>,
}

/// `H⁻¹XW` column by column at solver rate `eps`.
pub fn forward_exact(spec: &ModelSpec, w: &DenseMatrix, eps: f64) -> Result<DenseMatrix> {
    let xw = spec.x.matmul(w)?;
    spec.solver(eps)?.solve_multi(&xw)
}

/// `T` gradient steps on the energy, `Z ← Z − α(HZ − XW)` from `Z = 0`.
/// Expanded this is `(1 − α − αλ)Z + αλÂZ + αXW`; contraction needs
/// `0 < α < 2/(1 + 2λ)`.
pub fn unfold_forward(spec: &ModelSpec, w: &DenseMatrix, alpha: f64, t: usize) -> Result<DenseMatrix> {
    let limit = 2.0 / (1.0 + 2.0 * spec.lambda);
    if !(alpha > 0.0 && alpha < limit) {
        return Err(HertaError::InvalidConfig(format!("unfolding step {alpha} outside (0, {limit})")));
    }
    let xw = spec.x.matmul(w)?;
    let mut z = DenseMatrix::zeros(xw.rows(), xw.cols());
    for _ in 0..t {
        let hz = spec.h.matmul_dense(&z)?;
        for ((zi, hzi), bi) in z.data_mut().iter_mut().zip(hz.data()).zip(xw.data()) {
            *zi -= alpha * (hzi - bi);
        }
    }
    Ok(z)
}

/// `½‖Z − Y‖²_F`.
pub fn mse_loss(z: &DenseMatrix, y: &DenseMatrix) -> Result<f64> {
    if z.shape() != y.shape() {
        return Err(dim_mismatch(format!("{:?}", y.shape()), format!("{:?}", z.shape())));
    }
    Ok(0.5 * z.data().iter().zip(y.data()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
}

/// Masked full-model MSE from a forward pass.
pub fn model_mse(spec: &ModelSpec, w: &DenseMatrix, eps: f64) -> Result<f64> {
    let mut z = forward_exact(spec, w, eps)?;
    spec.apply_mask_rows(&mut z);
    mse_loss(&z, &spec.masked_y())
}

/// `ℓ_i(w)` with solver-induced relative error at most `3·eps`.
pub fn sub_loss(spec: &ModelSpec, sub: &SubProblem, w: &[f64], eps: f64) -> Result<f64> {
    // a 2-norm rate eps needs energy-norm rate eps/√κ(H)
    let solver = spec.solver(eps / (1.0 + 2.0 * spec.lambda).sqrt())?;
    sub_loss_with(spec, sub, w, &solver)
}

pub fn sub_loss_with(spec: &ModelSpec, sub: &SubProblem, w: &[f64], solver: &dyn LinearSolver) -> Result<f64> {
    let mut r = spec.x.matvec(w)?;
    r.iter_mut().zip(&sub.y_hat).for_each(|(a, b)| *a -= b);
    let mut v = solver.solve(&r)?;
    spec.apply_mask(&mut v);
    Ok(0.5 * norm(&v).powi(2))
}

/// `XᵀH⁻¹MH⁻¹(Xw − ŷ_i)`, dense and exact.
pub fn exact_gradient(spec: &ModelSpec, sub: &SubProblem, w: &[f64]) -> Result<Vec<f64>> {
    exact_gradient_with(&DenseOracle::new(spec)?, spec, sub, w)
}

pub fn exact_gradient_with(oracle: &DenseOracle, spec: &ModelSpec, sub: &SubProblem, w: &[f64]) -> Result<Vec<f64>> {
    let mut r = spec.x.matvec(w)?;
    r.iter_mut().zip(&sub.y_hat).for_each(|(a, b)| *a -= b);
    let v = oracle.h_inv.matvec(&r)?;
    oracle.masked_a.t_matvec(&v)
}

/// Row-wise softmax.
pub fn softmax_rows(z: &DenseMatrix) -> DenseMatrix {
    let mut s = z.clone();
    for i in 0..s.rows() {
        let row = s.row_mut(i);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            total += *v;
        }
        row.iter_mut().for_each(|v| *v /= total);
    }
    s
}

/// Class index per row, or `NotOneHot`.
pub fn one_hot_classes(y: &DenseMatrix) -> Result<Vec<usize>> {
    (0..y.rows())
        .map(|i| {
            let row = y.row(i);
            let ones: Vec<usize> = (0..row.len()).filter(|&j| row[j] == 1.0).collect();
            let zeros = row.iter().filter(|v| **v == 0.0).count();
            if ones.len() == 1 && zeros + 1 == row.len() {
                Ok(ones[0])
            } else {
                Err(HertaError::NotOneHot { row: i })
            }
        })
        .collect()
}

/// Summed cross-entropy over (unmasked) nodes and its gradient
/// `XᵀH⁻¹M(softmax(H⁻¹XW) − Y)`.
pub fn ce_loss_and_grad(spec: &ModelSpec, w: &DenseMatrix, eps: f64) -> Result<(f64, DenseMatrix)> {
    let classes = one_hot_classes(&spec.y)?;
    let solver = spec.solver(eps)?;
    let z = solver.solve_multi(&spec.x.matmul(w)?)?;
    let s = softmax_rows(&z);
    let mut loss = 0.0;
    let mut resid = s.sub(&spec.y)?;
    for (u, &k) in classes.iter().enumerate() {
        if spec.mask.as_ref().is_some_and(|m| !m[u]) {
            continue;
        }
        let row = z.row(u);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        loss += lse - row[k];
    }
    spec.apply_mask_rows(&mut resid);
    let back = solver.solve_multi(&resid)?;
    Ok((loss, spec.x.t_matmul(&back)?))
}

/// Per-node weights `s_i(1 − s_i)` of class `i` at `W`, dense.
pub fn ce_weights(oracle: &DenseOracle, spec: &ModelSpec, w: &DenseMatrix, i: usize) -> Result<Vec<f64>> {
    let s = softmax_rows(&oracle.a.matmul(w)?);
    let mut out: Vec<f64> = (0..s.rows()).map(|u| s.get(u, i) * (1.0 - s.get(u, i))).collect();
    spec.apply_mask(&mut out);
    Ok(out)
}

/// Diagonal Hessian block `Σ_u ω_u·Xᵀh_u h_uᵀX` applied to `v`, with
/// the given per-node weights `ω`.
pub fn weighted_hessian_action(oracle: &DenseOracle, weights: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let mut q = oracle.a.matvec(v)?;
    if weights.len() != q.len() {
        return Err(dim_mismatch(q.len(), weights.len()));
    }
    q.iter_mut().zip(weights).for_each(|(a, w)| *a *= w);
    oracle.a.t_matvec(&q)
}

/// Hessian of the CE loss with respect to column `i` of `W`, applied to `v`.
pub fn ce_hessian_action(spec: &ModelSpec, w: &DenseMatrix, i: usize, v: &[f64]) -> Result<Vec<f64>> {
    let oracle = DenseOracle::new(spec)?;
    let weights = ce_weights(&oracle, spec, w, i)?;
    weighted_hessian_action(&oracle, &weights, v)
}

/// Per-class losses summed, evaluated in parallel over classes.
pub fn total_sub_loss(spec: &ModelSpec, subs: &[SubProblem], w: &DenseMatrix, solver: &dyn LinearSolver) -> Result<f64> {
    let parts: Vec<f64> = subs
        .par_iter()
        .map(|sub| sub_loss_with(spec, sub, &w.col(sub.index), solver))
        .collect::<Result<_>>()?;
    Ok(parts.iter().sum())
}

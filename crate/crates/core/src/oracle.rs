//! Dense brute-force references. Everything here is `O(n³)` and refuses
//! inputs above [`DENSE_LIMIT`].

use crate::dense::DenseMatrix;
use crate::error::{HertaError, Result};
use crate::graph::IncidenceMatrix;
use crate::model::ModelSpec;
use crate::sparse::SparseSymmetric;

pub const DENSE_LIMIT: usize = 2000;

pub fn check_dense(n: usize) -> Result<()> {
    if n > DENSE_LIMIT {
        Err(HertaError::TooLargeForDense { n, limit: DENSE_LIMIT })
    } else {
        Ok(())
    }
}

/// Dense `H⁻¹` for a model, plus the products built from it.
#[derive(Debug, Clone)]
pub struct DenseOracle {
    pub h_inv: DenseMatrix,
    /// `H⁻¹X`.
    pub a: DenseMatrix,
    /// `M·H⁻¹X` with the training mask applied (equal to `a` unmasked).
    pub masked_a: DenseMatrix,
}

impl DenseOracle {
    pub fn new(spec: &ModelSpec) -> Result<Self> {
        check_dense(spec.n())?;
        let h_inv = spec.h().to_dense().spd_inverse()?;
        let a = h_inv.matmul(spec.x())?;
        let mut masked_a = a.clone();
        if let Some(mask) = spec.mask() {
            for (i, keep) in mask.iter().enumerate() {
                if !keep {
                    masked_a.row_mut(i).iter_mut().for_each(|v| *v = 0.0);
                }
            }
        }
        Ok(Self { h_inv, a, masked_a })
    }

    /// MSE Hessian `XᵀH⁻¹MH⁻¹X` (`XᵀH⁻²X` without a mask).
    pub fn hessian(&self) -> DenseMatrix {
        self.masked_a.gram()
    }

    /// Minimizer and minimum of `½‖M(H⁻¹XW − Y)‖²` by SVD least squares.
    pub fn optimum(&self, spec: &ModelSpec) -> Result<(DenseMatrix, f64)> {
        let y = spec.masked_y();
        let svd = self.masked_a.to_nalgebra().svd(true, true);
        let top = svd.singular_values.max();
        let w = svd
            .solve(&y.to_nalgebra(), top * 1e-13)
            .map_err(|e| HertaError::InvalidConfig(e.to_string()))?;
        let w = DenseMatrix::from_nalgebra(&w);
        let loss = self.mse(spec, &w)?;
        Ok((w, loss))
    }

    pub fn mse(&self, spec: &ModelSpec, w: &DenseMatrix) -> Result<f64> {
        let z = self.masked_a.matmul(w)?;
        crate::model::mse_loss(&z, &spec.masked_y())
    }
}

/// `l_i = b̂_iᵀ(L̂ + λ⁻¹I)⁻¹b̂_i` for every edge.
pub fn exact_leverage_scores(l_hat: &SparseSymmetric, b_hat: &IncidenceMatrix, lambda: f64) -> Result<Vec<f64>> {
    check_dense(l_hat.n())?;
    let inv = l_hat.scaled_plus_identity(1.0, 1.0 / lambda).to_dense().spd_inverse()?;
    Ok(b_hat
        .rows()
        .iter()
        .map(|r| {
            inv.get(r.u, r.u) * r.wu * r.wu + inv.get(r.v, r.v) * r.wv * r.wv - 2.0 * inv.get(r.u, r.v) * r.wu * r.wv
        })
        .collect())
}

/// `n_λ = Tr[L̂(L̂ + λ⁻¹I)⁻¹] = Σ μ/(μ + λ⁻¹)` over the spectrum of `L̂`.
pub fn exact_effective_dim(l_hat: &SparseSymmetric, lambda: f64) -> Result<f64> {
    check_dense(l_hat.n())?;
    let eig = l_hat.to_dense().symmetric_eigenvalues()?;
    Ok(eig.iter().map(|m| m.max(0.0) / (m.max(0.0) + 1.0 / lambda)).sum())
}

/// `σ_max/σ_min` of a tall matrix.
pub fn condition_number(x: &DenseMatrix) -> f64 {
    let sv = if x.rows() <= 5000 {
        x.singular_values()
    } else {
        let mut e = x.gram().symmetric_eigenvalues().unwrap_or_default();
        e.reverse();
        e.iter().map(|v| v.max(0.0).sqrt()).collect()
    };
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphData;

    #[test]
    fn triangle_effective_dim_and_scores() {
        let g = GraphData::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap().add_self_loops();
        let l = g.normalized_laplacian().unwrap();
        let b = g.normalized_incidence().unwrap();
        assert!((exact_effective_dim(&l, 1.0).unwrap() - 1.0).abs() < 1e-12);
        let s = exact_leverage_scores(&l, &b, 1.0).unwrap();
        assert!(s.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-12));
    }

    #[test]
    fn refuses_large() {
        assert!(matches!(check_dense(DENSE_LIMIT + 1), Err(HertaError::TooLargeForDense { .. })));
    }

    #[test]
    fn condition_of_diag() {
        let x = DenseMatrix::from_rows(&[vec![10.0, 0.0], vec![0.0, 0.1], vec![0.0, 0.0]]).unwrap();
        assert!((condition_number(&x) - 100.0).abs() < 1e-9);
    }
}

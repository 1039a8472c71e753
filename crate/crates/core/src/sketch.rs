//! Randomized sketches and spectral-approximation measurement.

use rand::Rng;
use rand::distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::dense::DenseMatrix;
use crate::error::{dim_mismatch, HertaError, Result};
use crate::rng::{tags, RngHandle};

/// In-place unnormalized Walsh–Hadamard butterfly. `x.len()` must be a
/// power of two.
pub fn fwht_in_place(x: &mut [f64]) {
    let n = x.len();
    assert!(n.is_power_of_two() || n == 0, "fwht length {n} is not a power of two");
    let mut h = 1;
    while h < n {
        for block in x.chunks_mut(2 * h) {
            let (a, b) = block.split_at_mut(h);
            for (p, q) in a.iter_mut().zip(b.iter_mut()) {
                let (s, t) = (*p, *q);
                *p = s + t;
                *q = s - t;
            }
        }
        h *= 2;
    }
}

/// Zero-pad to the next power of two, then apply `(1/√n)H_n`.
pub fn fwht(x: &[f64]) -> Vec<f64> {
    let n_pad = x.len().max(1).next_power_of_two();
    let mut buf = x.to_vec();
    buf.resize(n_pad, 0.0);
    fwht_in_place(&mut buf);
    let scale = 1.0 / (n_pad as f64).sqrt();
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// Row selection policy for [`srht_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrhtRows {
    /// `s` rows drawn uniformly with replacement.
    Sampled(usize),
    /// Every padded row exactly once; `Q̃ᵀQ̃ = QᵀQ`.
    Exhaustive,
}

/// `S · (1/√n_pad)H · R · Q`.
pub fn srht(q: &DenseMatrix, s: usize, rng: RngHandle) -> Result<DenseMatrix> {
    srht_with(q, SrhtRows::Sampled(s), rng)
}

pub fn srht_with(q: &DenseMatrix, rows: SrhtRows, rng: RngHandle) -> Result<DenseMatrix> {
    let (n, d) = q.shape();
    if n == 0 || d == 0 {
        return Err(HertaError::InvalidConfig("srht needs a nonempty matrix".into()));
    }
    if let SrhtRows::Sampled(0) = rows {
        return Err(HertaError::InvalidConfig("srht needs s ≥ 1".into()));
    }
    let n_pad = n.next_power_of_two();
    let mut sign_rng = rng.substream(tags::SRHT_SIGNS).rng();
    let signs: Vec<f64> = (0..n)
        .map(|_| if sign_rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();

    let mixed: Vec<Vec<f64>> = (0..d)
        .into_par_iter()
        .map(|j| {
            let mut col = vec![0.0; n_pad];
            for i in 0..n {
                col[i] = signs[i] * q.get(i, j);
            }
            fwht_in_place(&mut col);
            let scale = 1.0 / (n_pad as f64).sqrt();
            col.iter_mut().for_each(|v| *v *= scale);
            col
        })
        .collect();

    let (picked, scale): (Vec<usize>, f64) = match rows {
        SrhtRows::Exhaustive => ((0..n_pad).collect(), 1.0),
        SrhtRows::Sampled(s) => {
            let mut row_rng = rng.substream(tags::SRHT_ROWS).rng();
            let picked = (0..s).map(|_| row_rng.random_range(0..n_pad)).collect();
            (picked, (n_pad as f64 / s as f64).sqrt())
        }
    };
    Ok(DenseMatrix::from_fn(picked.len(), d, |r, j| scale * mixed[j][picked[r]]))
}

/// `k × n` matrix of i.i.d. `N(0, 1/k)` entries.
pub fn gaussian_sketch(k: usize, n: usize, rng: RngHandle) -> Result<DenseMatrix> {
    if k == 0 || n == 0 {
        return Err(HertaError::InvalidConfig(format!("gaussian sketch shape ({k}, {n})")));
    }
    let normal = Normal::new(0.0, 1.0 / (k as f64).sqrt()).expect("finite std dev");
    let mut r = rng.rng();
    let data = (0..k * n).map(|_| normal.sample(&mut r)).collect();
    DenseMatrix::from_vec(k, n, data)
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowProbabilities {
    Uniform,
    Weights(Vec<f64>),
}

/// `s` i.i.d. rows of `m`; row `k` has probability `p_k` and is scaled by
/// `1/√(s·p_k)`, so that `E[M̃ᵀM̃] = MᵀM`.
pub fn subsample_rows(
    m: &DenseMatrix,
    s: usize,
    probs: &RowProbabilities,
    rng: RngHandle,
) -> Result<DenseMatrix> {
    let n = m.rows();
    if s == 0 || n == 0 {
        return Err(HertaError::BadDistribution("need s ≥ 1 and a nonempty matrix".into()));
    }
    let p: Vec<f64> = match probs {
        RowProbabilities::Uniform => vec![1.0 / n as f64; n],
        RowProbabilities::Weights(w) => {
            if w.len() != n {
                return Err(dim_mismatch(n, w.len()));
            }
            if w.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
                return Err(HertaError::BadDistribution("negative or non-finite probability".into()));
            }
            let total: f64 = w.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(HertaError::BadDistribution(format!("probabilities sum to {total}")));
            }
            w.clone()
        }
    };
    let dist = WeightedIndex::new(&p).map_err(|e| HertaError::BadDistribution(e.to_string()))?;
    let mut r = rng.rng();
    let mut out = DenseMatrix::zeros(s, m.cols());
    for row in 0..s {
        let k = dist.sample(&mut r);
        let scale = 1.0 / (s as f64 * p[k]).sqrt();
        for (o, v) in out.row_mut(row).iter_mut().zip(m.row(k)) {
            *o = scale * v;
        }
    }
    Ok(out)
}

fn spd_eigen(p: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    if p.rows() != p.cols() {
        return Err(dim_mismatch("square", format!("{:?}", p.shape())));
    }
    if !p.is_symmetric(1e-10) {
        return Err(HertaError::InvalidConfig("matrix is not symmetric".into()));
    }
    let (vals, vecs) = p.symmetric_eigen()?;
    let top = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = vals.first().copied().unwrap_or(1.0);
    if min <= 1e-12 * top || min <= 0.0 {
        return Err(HertaError::NotPositiveDefinite { min_eig: min });
    }
    Ok((vals, vecs))
}

/// `P^t` for symmetric positive-definite `P` through its eigendecomposition.
pub fn spd_power(p: &DenseMatrix, t: f64) -> Result<DenseMatrix> {
    let (vals, vecs) = spd_eigen(p)?;
    let n = vals.len();
    let f: Vec<f64> = vals.iter().map(|v| v.powf(t)).collect();
    let mut out = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v: f64 = (0..n).map(|k| vecs.get(i, k) * f[k] * vecs.get(j, k)).sum();
            out.set(i, j, v);
            out.set(j, i, v);
        }
    }
    Ok(out)
}

pub fn spd_inverse_sqrt(p: &DenseMatrix) -> Result<DenseMatrix> {
    spd_power(p, -0.5)
}

/// Eigenvalues of the symmetric-definite pencil `(a, b)`, ascending, i.e.
/// of `b^{-1/2} a b^{-1/2}`. Computed as `L⁻¹ a L⁻ᵀ` with `b = LLᵀ`.
pub fn pencil_eigenvalues(a: &DenseMatrix, b: &DenseMatrix) -> Result<Vec<f64>> {
    if a.shape() != b.shape() || a.rows() != a.cols() {
        return Err(dim_mismatch(format!("{:?}", b.shape()), format!("{:?}", a.shape())));
    }
    let bn = b.to_nalgebra();
    let bs = (&bn + bn.transpose()) * 0.5;
    let chol = bs.cholesky().ok_or_else(|| HertaError::NotPositiveDefinite {
        min_eig: b.symmetric_eigenvalues().ok().and_then(|v| v.first().copied()).unwrap_or(f64::NAN),
    })?;
    let l = chol.l();
    let an = a.to_nalgebra();
    let left = l
        .solve_lower_triangular(&an)
        .ok_or(HertaError::NotPositiveDefinite { min_eig: 0.0 })?;
    let both = l
        .solve_lower_triangular(&left.transpose())
        .ok_or(HertaError::NotPositiveDefinite { min_eig: 0.0 })?;
    DenseMatrix::from_nalgebra(&both).symmetric_eigenvalues()
}

/// Two-sided spectral comparison of `Σ̃` against `Σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SketchReport {
    /// `‖Σ^{-1/2} Σ̃ Σ^{-1/2}‖`.
    pub psi_forward: f64,
    /// `‖Σ̃^{-1/2} Σ Σ̃^{-1/2}‖`.
    pub psi_backward: f64,
    pub min_pencil: f64,
    pub max_pencil: f64,
}

impl SketchReport {
    pub fn psi(&self) -> f64 {
        self.psi_forward.max(self.psi_backward)
    }

    /// All pencil eigenvalues of `(Σ̃, Σ)` inside `[1−ε, 1+ε]`.
    pub fn check_approx(&self, eps: f64) -> bool {
        self.min_pencil >= 1.0 - eps && self.max_pencil <= 1.0 + eps
    }
}

pub fn psi_approx(sigma: &DenseMatrix, sigma_tilde: &DenseMatrix) -> Result<SketchReport> {
    if sigma.shape() != sigma_tilde.shape() {
        return Err(dim_mismatch(format!("{:?}", sigma.shape()), format!("{:?}", sigma_tilde.shape())));
    }
    let eig = pencil_eigenvalues(sigma_tilde, sigma)?;
    let min = eig[0];
    let max = *eig.last().unwrap();
    if min <= 0.0 {
        return Err(HertaError::NotPositiveDefinite { min_eig: min });
    }
    Ok(SketchReport {
        psi_forward: max,
        psi_backward: 1.0 / min,
        min_pencil: min,
        max_pencil: max,
    })
}

/// Ratio of extreme eigenvalues of a symmetric positive-definite matrix.
pub fn spd_condition_number(a: &DenseMatrix) -> Result<f64> {
    let eig = a.symmetric_eigenvalues()?;
    let (lo, hi) = (eig[0], *eig.last().unwrap());
    if lo <= 0.0 {
        return Err(HertaError::NotPositiveDefinite { min_eig: lo });
    }
    Ok(hi / lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::norm;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut r = RngHandle::new(seed).rng();
        DenseMatrix::from_fn(rows, cols, |_, _| r.random::<f64>() * 2.0 - 1.0)
    }

    fn random_spd(d: usize, seed: u64) -> DenseMatrix {
        let a = random_matrix(d + 4, d, seed);
        a.gram().add(&DenseMatrix::identity(d).scale(0.1)).unwrap()
    }

    #[test]
    fn fwht_small_cases() {
        let y = fwht(&[1.0, 1.0]);
        assert!((y[0] - 2f64.sqrt()).abs() < 1e-15 && y[1].abs() < 1e-15);
        let y = fwht(&[1.0, 0.0, 0.0]);
        assert_eq!(y.len(), 4);
        assert!(y.iter().all(|v| (v - 0.5).abs() < 1e-15));
        assert_eq!(fwht(&[]), vec![0.0]);
    }

    #[test]
    fn fwht_involution_and_norm() {
        let mut r = RngHandle::new(5).rng();
        for len in [1usize, 3, 8, 13, 64] {
            let x: Vec<f64> = (0..len).map(|_| r.random::<f64>() - 0.5).collect();
            let y = fwht(&x);
            assert!((norm(&y) - norm(&x)).abs() < 1e-12);
            let back = fwht(&y);
            for (i, v) in back.iter().enumerate() {
                let want = x.get(i).copied().unwrap_or(0.0);
                assert!((v - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn srht_shapes_and_exhaustive_gram() {
        let q = random_matrix(1024, 8, 1);
        assert_eq!(srht(&q, 200, RngHandle::new(3)).unwrap().shape(), (200, 8));
        let q = random_matrix(37, 5, 2);
        let full = srht_with(&q, SrhtRows::Exhaustive, RngHandle::new(9)).unwrap();
        assert_eq!(full.rows(), 64);
        assert!(full.gram().max_abs_diff(&q.gram()) < 1e-10);
        assert!(srht(&q, 0, RngHandle::new(1)).is_err());
    }

    #[test]
    fn srht_deterministic_given_handle() {
        let q = random_matrix(50, 3, 4);
        let a = srht(&q, 20, RngHandle::new(11)).unwrap();
        let b = srht(&q, 20, RngHandle::new(11)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gaussian_shape_and_mean() {
        assert_eq!(gaussian_sketch(5, 7, RngHandle::new(0)).unwrap().shape(), (5, 7));
        let g = gaussian_sketch(1000, 1000, RngHandle::new(1)).unwrap();
        let mean: f64 = g.data().iter().sum::<f64>() / 1e6;
        assert!(mean.abs() < 3e-3);
        let var: f64 = g.data().iter().map(|v| v * v).sum::<f64>() / 1e6;
        assert!((var * 1000.0 - 1.0).abs() < 0.01);
    }

    #[test]
    fn subsample_point_mass_and_identity() {
        let m = random_matrix(4, 2, 3);
        let p = RowProbabilities::Weights(vec![1.0, 0.0, 0.0, 0.0]);
        let out = subsample_rows(&m, 3, &p, RngHandle::new(1)).unwrap();
        for r in 0..3 {
            for j in 0..2 {
                assert!((out.get(r, j) - m.get(0, j) / 3f64.sqrt()).abs() < 1e-15);
            }
        }
        let bad = RowProbabilities::Weights(vec![0.5, 0.2, 0.2, 0.0]);
        assert!(matches!(subsample_rows(&m, 3, &bad, RngHandle::new(1)), Err(HertaError::BadDistribution(_))));
        let neg = RowProbabilities::Weights(vec![1.5, -0.5, 0.0, 0.0]);
        assert!(subsample_rows(&m, 3, &neg, RngHandle::new(1)).is_err());
    }

    #[test]
    fn inverse_sqrt_cases() {
        let i = DenseMatrix::identity(3);
        assert!(spd_inverse_sqrt(&i).unwrap().max_abs_diff(&i) < 1e-14);
        let d = spd_inverse_sqrt(&DenseMatrix::diag(&[4.0, 9.0])).unwrap();
        assert!(d.max_abs_diff(&DenseMatrix::diag(&[0.5, 1.0 / 3.0])) < 1e-14);
        let p = random_spd(16, 8);
        let r = spd_inverse_sqrt(&p).unwrap();
        let prod = r.matmul(&p).unwrap().matmul(&r).unwrap();
        assert!(prod.max_abs_diff(&DenseMatrix::identity(16)) < 1e-9);
        assert!(r.is_symmetric(1e-12));
        let comm = r.matmul(&p).unwrap().sub(&p.matmul(&r).unwrap()).unwrap();
        assert!(comm.frobenius_norm() < 1e-9 * p.frobenius_norm());
        let singular = DenseMatrix::diag(&[1.0, 0.0]);
        assert!(matches!(spd_inverse_sqrt(&singular), Err(HertaError::NotPositiveDefinite { .. })));
    }

    #[test]
    fn psi_of_identical_pair_is_one() {
        let s = random_spd(6, 2);
        let rep = psi_approx(&s, &s).unwrap();
        assert!((rep.psi_forward - 1.0).abs() < 1e-10);
        assert!((rep.psi_backward - 1.0).abs() < 1e-10);
        assert!(rep.check_approx(1e-8));
        assert!(psi_approx(&s, &DenseMatrix::identity(3)).is_err());
    }

    #[test]
    fn pencil_of_scaled_matrix() {
        let s = random_spd(5, 4);
        let eig = pencil_eigenvalues(&s.scale(1.2), &s).unwrap();
        assert!(eig.iter().all(|v| (v - 1.2).abs() < 1e-10));
        let rep = psi_approx(&s, &s.scale(1.2)).unwrap();
        assert!(rep.check_approx(0.2 + 1e-9) && !rep.check_approx(0.19));
    }
}

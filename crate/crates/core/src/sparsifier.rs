//! Regularized spectral sparsification of a normalized Laplacian.
//!
//! Edges are sampled with probability proportional to sketched ridge
//! leverage scores `l_i = b̂_iᵀ(L̂ + λ⁻¹I)⁻¹b̂_i`. The sampled
//! `L̃ = Σ_e w_e b̂_e b̂_eᵀ` then satisfies `L̃ + λ⁻¹I ≈_ε L̂ + λ⁻¹I` with
//! high probability.

use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::dense::DenseMatrix;
use crate::error::{dim_mismatch, HertaError, Result};
use crate::graph::IncidenceMatrix;
use crate::rng::{tags, RngHandle};
use crate::sketch::gaussian_sketch;
use crate::solver::{LinearSolver, SolverHandle};
use crate::sparse::SparseSymmetric;

/// Upper limit on the sample count. Beyond this the multinomial draw is
/// numerically indistinguishable from the expectation anyway.
const MAX_SAMPLES: u64 = 1_000_000_000_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SparsifyConfig {
    pub eps: f64,
    pub lambda: f64,
    /// Oversampling constant `C`.
    pub c: f64,
    /// JL dimension; `None` means `max(⌈C·ln m⌉, 64)`.
    pub k_jl: Option<usize>,
    /// Relative rate of the solves inside the score sketch.
    pub solver_rate: f64,
    pub rng: RngHandle,
}

impl SparsifyConfig {
    pub fn new(eps: f64, lambda: f64, seed: u64) -> Self {
        Self {
            eps,
            lambda,
            c: 8.0,
            k_jl: None,
            solver_rate: 2f64.powf(0.25) - 1.0,
            rng: RngHandle::new(seed),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) {
            return Err(HertaError::NonPositiveLambda(self.lambda));
        }
        if !(self.eps > 0.0 && self.eps <= 0.5) {
            return Err(HertaError::InvalidConfig(format!(
                "sparsifier eps must lie in (0, 1/2], got {}",
                self.eps
            )));
        }
        if !(self.c > 0.0) {
            return Err(HertaError::InvalidConfig(format!("sampling constant must be positive, got {}", self.c)));
        }
        if !(self.solver_rate > 0.0 && self.solver_rate < 1.0) {
            return Err(HertaError::InvalidConfig(format!("solver rate {} outside (0, 1)", self.solver_rate)));
        }
        Ok(())
    }

    pub fn jl_dim(&self, m: usize) -> usize {
        self.k_jl
            .unwrap_or_else(|| ((self.c * (m.max(2) as f64).ln()).ceil() as usize).max(64))
            .max(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeverageScores {
    pub l_tilde: Vec<f64>,
    pub z: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveDim {
    pub n_lambda_estimate: f64,
}

/// `√d_u` recovered from a normalized Laplacian's diagonal `1 − 1/d_u`.
pub fn laplacian_scaling(l: &SparseSymmetric) -> Vec<f64> {
    l.diagonal()
        .iter()
        .map(|a| if *a < 1.0 { 1.0 / (1.0 - a).sqrt() } else { 1.0 })
        .collect()
}

/// Sketched ridge leverage scores of every row of `b̂`.
pub fn ridge_leverage_scores(l_hat: &SparseSymmetric, b_hat: &IncidenceMatrix, cfg: &SparsifyConfig) -> Result<LeverageScores> {
    cfg.validate()?;
    let n = b_hat.n();
    if l_hat.n() != n {
        return Err(dim_mismatch(n, l_hat.n()));
    }
    let m = b_hat.m();
    if m == 0 {
        return Ok(LeverageScores { l_tilde: Vec::new(), z: 0.0, n });
    }
    let inv_lambda = 1.0 / cfg.lambda;
    let scaling = laplacian_scaling(l_hat);
    let solver = SolverHandle::shifted(l_hat, inv_lambda, cfg.solver_rate, Some(&scaling))?;
    let k = cfg.jl_dim(m);

    let pi1 = gaussian_sketch(k, m, cfg.rng.substream(tags::SPARSIFY_PI1))?;
    let pi1_b = DenseMatrix::from_vec(k, n, b_hat.left_multiply(k, pi1.data()))?;
    let pi2 = gaussian_sketch(k, n, cfg.rng.substream(tags::SPARSIFY_PI2))?;

    // rows of B_S and Π_S are solves against rows of Π₁B̂ and Π₂
    let b_s = solve_rows(&solver, &pi1_b)?;
    let pi_s = solve_rows(&solver, &pi2)?;

    let l_tilde: Vec<f64> = b_hat
        .rows()
        .par_iter()
        .map(|row| {
            let a: f64 = b_s.iter().map(|r| row.dot(r).powi(2)).sum();
            let b: f64 = pi_s.iter().map(|r| row.dot(r).powi(2)).sum();
            a + inv_lambda * b
        })
        .collect();
    let z = l_tilde.iter().sum();
    Ok(LeverageScores { l_tilde, z, n })
}

fn solve_rows(solver: &SolverHandle, m: &DenseMatrix) -> Result<Vec<Vec<f64>>> {
    (0..m.rows()).into_par_iter().map(|r| solver.solve(m.row(r))).collect()
}

/// `Z = Σ l̃_i` clamped to `[0, n]`. Exact scores give exactly
/// `n_λ = Tr[L̂(L̂ + λ⁻¹I)⁻¹]`.
pub fn effective_dim(scores: &LeverageScores) -> EffectiveDim {
    EffectiveDim {
        n_lambda_estimate: scores.z.clamp(0.0, scores.n as f64),
    }
}

#[derive(Debug, Clone)]
pub struct SparsifyOutput {
    pub laplacian: SparseSymmetric,
    /// `(edge index, weight)` for every edge drawn at least once.
    pub sampled: Vec<(usize, f64)>,
    pub samples: u64,
    pub n_lambda_estimate: f64,
    pub scores: LeverageScores,
}

impl SparsifyOutput {
    pub fn edge_count(&self) -> usize {
        self.sampled.len()
    }

    /// `(u, v, w)` such that `L̃ = Σ w·b̂_{uv}b̂_{uv}ᵀ`.
    pub fn weighted_edges<'a>(&'a self, b_hat: &'a IncidenceMatrix) -> impl Iterator<Item = (usize, usize, f64)> + 'a {
        self.sampled.iter().map(move |&(e, w)| {
            let r = b_hat.rows()[e];
            (r.u, r.v, w)
        })
    }
}

/// Sample count `⌈C·max(n̂_λ, 1)·ln n / ε²⌉`, at least one.
pub fn sample_count(cfg: &SparsifyConfig, n_lambda: f64, n: usize) -> u64 {
    let raw = cfg.c * n_lambda.max(1.0) * (n.max(1) as f64).ln() / (cfg.eps * cfg.eps);
    (raw.ceil() as u64).clamp(1, MAX_SAMPLES)
}

pub fn sparsify(l_hat: &SparseSymmetric, b_hat: &IncidenceMatrix, cfg: &SparsifyConfig) -> Result<SparsifyOutput> {
    let scores = ridge_leverage_scores(l_hat, b_hat, cfg)?;
    let n = b_hat.n();
    if b_hat.m() == 0 {
        return Ok(SparsifyOutput {
            laplacian: SparseSymmetric::zero(n),
            sampled: Vec::new(),
            samples: 0,
            n_lambda_estimate: 0.0,
            scores,
        });
    }
    if !(scores.z > 0.0) || !scores.z.is_finite() {
        return Err(HertaError::DegenerateScores(scores.z));
    }
    let n_lambda = effective_dim(&scores).n_lambda_estimate;
    let s = sample_count(cfg, n_lambda, n);
    let counts = multinomial(s, &scores.l_tilde, scores.z, cfg.rng.substream(tags::SPARSIFY_SAMPLE))?;

    let mut weights = vec![0.0; b_hat.m()];
    let mut sampled = Vec::new();
    for (e, &c) in counts.iter().enumerate() {
        if c > 0 {
            let p = scores.l_tilde[e] / scores.z;
            let w = c as f64 / (s as f64 * p);
            weights[e] = w;
            sampled.push((e, w));
        }
    }
    Ok(SparsifyOutput {
        laplacian: b_hat.weighted_gram(&weights),
        sampled,
        samples: s,
        n_lambda_estimate: n_lambda,
        scores,
    })
}

/// Counts of `s` i.i.d. draws with probabilities `weights / total`, via a
/// chain of conditional binomials (one pass, independent of `s`).
fn multinomial(s: u64, weights: &[f64], total: f64, rng: RngHandle) -> Result<Vec<u64>> {
    let mut r = rng.rng();
    let mut remaining = s;
    let mut mass_left = total;
    let mut out = vec![0u64; weights.len()];
    for (i, &w) in weights.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == weights.len() {
            out[i] = remaining;
            break;
        }
        let p = if mass_left > 0.0 { (w / mass_left).clamp(0.0, 1.0) } else { 1.0 };
        let c = Binomial::new(remaining, p)
            .map_err(|e| HertaError::BadDistribution(e.to_string()))?
            .sample(&mut r);
        out[i] = c;
        remaining -= c;
        mass_left -= w;
    }
    Ok(out)
}

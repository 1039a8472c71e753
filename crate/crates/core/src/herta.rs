//! Preconditioned trainer.
//!
//! A preconditioner `P ≈ XᵀH⁻²X` is built once from a sparsified graph,
//! a column-wise solve and an SRHT sketch. Gradient descent then runs on
//! `ℓ′(w) = ℓ(P^{-1/2}w)`, whose Hessian has condition number close to one
//! regardless of how badly conditioned `X` is.

use std::time::Instant;

use crate::dense::{norm, DenseMatrix};
use crate::error::{HertaError, Result};
use crate::graph::IncidenceMatrix;
use crate::model::{ModelSpec, SubProblem};
use crate::optim::{run, LoopConfig, LossKind, Optimizer, Problem, StepSize};
use crate::oracle::{condition_number, DenseOracle};
use crate::rng::{tags, RngHandle};
use crate::sketch::{psi_approx, spd_condition_number, spd_inverse_sqrt, srht_with, SketchReport, SrhtRows};
use crate::solver::{LinearSolver, SolverHandle};
use crate::sparsifier::{sparsify, SparsifyConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct HertaConfig {
    pub target_eps: f64,
    /// SRHT constant `K` in `s = ⌈K·d·ln n/β²⌉`.
    pub k_srht: f64,
    pub beta: f64,
    /// Inner solver rate; `None` means `min{ε^{1/2}/(50·κ(X)·λ̄²), 1}`.
    pub mu: Option<f64>,
    pub eta: StepSize,
    pub max_iter: usize,
    pub optimizer: Optimizer,
    pub loss: LossKind,
    /// Oversampling constant of the sparsifier.
    pub sparsify_c: f64,
    /// Row policy override for the SRHT; `None` uses `s` above and falls
    /// back to exhaustive mode once `s` reaches the padded row count.
    pub sketch_rows: Option<SrhtRows>,
    pub reference: Option<f64>,
    pub exact_trace: bool,
    pub seed: u64,
}

impl HertaConfig {
    pub fn new(target_eps: f64, seed: u64) -> Self {
        Self {
            target_eps,
            k_srht: 4.0,
            beta: 1.0 / 64.0,
            mu: None,
            eta: StepSize::Auto,
            max_iter: 1000,
            optimizer: Optimizer::Gd,
            loss: LossKind::Mse,
            sparsify_c: 8.0,
            sketch_rows: None,
            reference: None,
            exact_trace: false,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target_eps > 0.0) {
            return Err(HertaError::InvalidConfig(format!("target eps must be positive, got {}", self.target_eps)));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(HertaError::InvalidConfig(format!("beta {} outside (0, 1)", self.beta)));
        }
        if !(self.k_srht > 0.0) {
            return Err(HertaError::InvalidConfig("SRHT constant must be positive".into()));
        }
        if let Some(mu) = self.mu {
            if !(mu > 0.0 && mu <= 1.0) {
                return Err(HertaError::InvalidConfig(format!("mu {mu} outside (0, 1]")));
            }
        }
        Ok(())
    }

    /// `⌈K·d·ln n/β²⌉`.
    pub fn sketch_size(&self, n: usize, d: usize) -> usize {
        let raw = self.k_srht * d as f64 * (n.max(2) as f64).ln() / (self.beta * self.beta);
        raw.ceil().min(usize::MAX as f64 / 2.0) as usize
    }

    fn row_policy(&self, n: usize, d: usize) -> SrhtRows {
        self.sketch_rows.unwrap_or_else(|| {
            let s = self.sketch_size(n, d);
            if s >= n.next_power_of_two() {
                SrhtRows::Exhaustive
            } else {
                SrhtRows::Sampled(s)
            }
        })
    }
}

#[derive(Debug, Clone)]
pub struct Preconditioner {
    pub p: DenseMatrix,
    /// `P′ = P^{-1/2}`.
    pub p_inv_sqrt: DenseMatrix,
    pub sketch_rows: usize,
    pub sparsifier_edges: usize,
    pub build_ns: u64,
}

impl Preconditioner {
    pub fn identity(d: usize) -> Self {
        Self {
            p: DenseMatrix::identity(d),
            p_inv_sqrt: DenseMatrix::identity(d),
            sketch_rows: 0,
            sparsifier_edges: 0,
            build_ns: 0,
        }
    }

    /// `P` set to the exact Hessian; dense.
    pub fn exact(spec: &ModelSpec) -> Result<Self> {
        Self::from_p(DenseOracle::new(spec)?.hessian())
    }

    pub fn from_p(p: DenseMatrix) -> Result<Self> {
        let p_inv_sqrt = spd_inverse_sqrt(&p)?;
        Ok(Self {
            p,
            p_inv_sqrt,
            sketch_rows: 0,
            sparsifier_edges: 0,
            build_ns: 0,
        })
    }
}

pub fn build_preconditioner(spec: &ModelSpec, cfg: &HertaConfig) -> Result<Preconditioner> {
    cfg.validate()?;
    let (n, d) = (spec.n(), spec.d());
    if d > n {
        return Err(HertaError::InvalidConfig(format!("need d ≤ n, got d = {d}, n = {n}")));
    }
    let start = Instant::now();
    let lambda = spec.lambda();
    let rng = RngHandle::new(cfg.seed).substream(tags::PRECONDITIONER);

    let b_hat = IncidenceMatrix::from_laplacian(spec.l_hat());
    let mut sp_cfg = SparsifyConfig::new((cfg.beta / (3.0 * lambda)).min(0.5), lambda, 0);
    sp_cfg.c = cfg.sparsify_c;
    sp_cfg.rng = rng.substream(tags::SPARSIFIER);
    let sparse = sparsify(spec.l_hat(), &b_hat, &sp_cfg)?;

    let rate = (cfg.beta / (3.0 * lambda).sqrt()).min(0.5);
    let solver = SolverHandle::regularized(&sparse.laplacian, lambda, rate, Some(spec.scaling()))?;
    let mut q = solver.solve_multi(spec.x())?;
    spec.apply_mask_rows(&mut q);

    let policy = cfg.row_policy(n, d);
    let q_tilde = srht_with(&q, policy, rng)?;
    let p = q_tilde.gram();
    let p_inv_sqrt = spd_inverse_sqrt(&p)?;
    Ok(Preconditioner {
        p,
        p_inv_sqrt,
        sketch_rows: q_tilde.rows(),
        sparsifier_edges: sparse.edge_count(),
        build_ns: start.elapsed().as_nanos() as u64,
    })
}

/// Spectral comparison of `P` against the dense Hessian.
/// `check_approx(1/2)` is the preconditioner certificate.
pub fn certify_preconditioner(spec: &ModelSpec, pre: &Preconditioner) -> Result<SketchReport> {
    let t = DenseOracle::new(spec)?.hessian();
    psi_approx(&t, &pre.p)
}

/// `κ(P′·XᵀH⁻²X·P′)`, dense.
pub fn conditioned_hessian_check(spec: &ModelSpec, p_inv_sqrt: &DenseMatrix) -> Result<f64> {
    let t = DenseOracle::new(spec)?.hessian();
    let c = p_inv_sqrt.matmul(&t)?.matmul(p_inv_sqrt)?;
    spd_condition_number(&c)
}

/// One preconditioned step for one label column:
/// `g = P′Xᵀ𝒮(M𝒮(XP′w − ŷ_i))`, `w ← w − ηg`. Returns the new iterate and `‖g‖`.
pub fn herta_step(
    spec: &ModelSpec,
    sub: &SubProblem,
    p_inv_sqrt: &DenseMatrix,
    w: &[f64],
    eta: f64,
    mu: f64,
) -> Result<(Vec<f64>, f64)> {
    let solver = spec.solver(mu)?;
    let w_orig = p_inv_sqrt.matvec(w)?;
    let mut u = spec.x().matvec(&w_orig)?;
    u.iter_mut().zip(&sub.y_hat).for_each(|(a, b)| *a -= b);
    let mut u1 = solver.solve(&u)?;
    spec.apply_mask(&mut u1);
    let u2 = solver.solve(&u1)?;
    let g = p_inv_sqrt.matvec(&spec.x().t_matvec(&u2)?)?;
    let next = w.iter().zip(&g).map(|(a, b)| a - eta * b).collect();
    Ok((next, norm(&g)))
}

/// Solver rate and gradient-error ratio used for training.
pub fn training_rates(spec: &ModelSpec, cfg: &HertaConfig) -> (f64, f64) {
    let kappa = condition_number(spec.x());
    let mu = cfg
        .mu
        .unwrap_or_else(|| crate::baseline::auto_mu(cfg.target_eps, kappa, spec.lambda()));
    let gamma = crate::baseline::gradient_error_ratio(mu, cfg.target_eps, kappa, spec.lambda());
    (mu, gamma)
}

pub fn herta_train(spec: &ModelSpec, cfg: &HertaConfig) -> Result<crate::trace::TrainResult> {
    let pre = build_preconditioner(spec, cfg)?;
    herta_train_with(spec, cfg, &pre)
}

/// Train with a given preconditioner.
pub fn herta_train_with(spec: &ModelSpec, cfg: &HertaConfig, pre: &Preconditioner) -> Result<crate::trace::TrainResult> {
    cfg.validate()?;
    if pre.p_inv_sqrt.shape() != (spec.d(), spec.d()) {
        return Err(crate::error::dim_mismatch(spec.d(), pre.p_inv_sqrt.rows()));
    }
    let (mu, gamma) = training_rates(spec, cfg);
    let solver = spec.solver(mu)?;
    let loop_cfg = LoopConfig {
        loss: cfg.loss,
        eta: cfg.eta,
        gamma,
        max_iter: cfg.max_iter,
        target_eps: cfg.target_eps,
        reference: cfg.reference,
        exact_trace: cfg.exact_trace,
        optimizer: cfg.optimizer,
        power_iterations: 30,
        rng: RngHandle::new(cfg.seed),
    };
    let mut result = run(
        &Problem {
            spec,
            precond: Some(&pre.p_inv_sqrt),
            solver: &solver,
        },
        &loop_cfg,
    )?;
    result.precond_build_ns = pre.build_ns;
    Ok(result)
}

/// [`herta_train`] with the Adam update on the preconditioned gradients.
pub fn herta_train_adam(spec: &ModelSpec, cfg: &HertaConfig) -> Result<crate::trace::TrainResult> {
    if !matches!(cfg.optimizer, Optimizer::Adam(_)) {
        return Err(HertaError::InvalidConfig("herta_train_adam needs an Adam optimizer".into()));
    }
    herta_train(spec, cfg)
}

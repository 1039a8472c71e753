//! Reference trainer: plain gradient descent on the MSE (or CE) loss with
//! approximate gradients `Xᵀ𝒮[𝒮(Xw − ŷ)]`, where the inner solver `𝒮` is
//! either gradient descent on `½‖Hv − u‖²` or the Chebyshev solver.

use serde::{Deserialize, Serialize};

use crate::dense::norm;
use crate::error::{dim_mismatch, HertaError, Result};
use crate::model::{ModelSpec, SubProblem};
use crate::optim::{run, LoopConfig, LossKind, Optimizer, Problem, StepSize};
use crate::oracle::condition_number;
use crate::rng::RngHandle;
use crate::solver::LinearSolver;
use crate::sparse::SparseSymmetric;
use crate::trace::TrainResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum InnerSolverKind {
    #[default]
    GradientDescent,
    Sdd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig {
    /// Inner solver rate `μ`; `None` derives it from the target.
    pub inner_eps: Option<f64>,
    pub outer_eta: StepSize,
    pub t_outer: usize,
    pub t_inner: usize,
    pub inner: InnerSolverKind,
    pub loss: LossKind,
    pub optimizer: Optimizer,
    /// Known optimum for the stopping rule.
    pub reference: Option<f64>,
    pub exact_trace: bool,
    pub seed: u64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            inner_eps: None,
            outer_eta: StepSize::Auto,
            t_outer: 1000,
            t_inner: 1_000_000,
            inner: InnerSolverKind::GradientDescent,
            loss: LossKind::Mse,
            optimizer: Optimizer::Gd,
            reference: None,
            exact_trace: false,
            seed: 0,
        }
    }
}

/// `λ̄ = max(λ, 1)`; the analysis assumes `λ ≥ 1`.
pub fn lambda_bar(lambda: f64) -> f64 {
    lambda.max(1.0)
}

/// `min{ε^{1/2}/(50·κ(X)·λ̄²), 1}`.
pub fn auto_mu(target_eps: f64, kappa_x: f64, lambda: f64) -> f64 {
    (target_eps.sqrt() / (50.0 * kappa_x * lambda_bar(lambda).powi(2))).min(1.0)
}

/// Relative gradient-error bound `25·ε^{-1/2}·κ(X)·μ·λ̄²`, capped at 1/2.
pub fn gradient_error_ratio(mu: f64, target_eps: f64, kappa_x: f64, lambda: f64) -> f64 {
    (25.0 * mu * kappa_x * lambda_bar(lambda).powi(2) / target_eps.sqrt()).min(0.5)
}

/// `σ̄ ≥ σ_max(I + λL̂)`; equals `3λ` for `λ ≥ 1`.
fn sigma_bar(lambda: f64) -> f64 {
    (3.0 * lambda).max(1.0 + 2.0 * lambda)
}

/// Iteration bound `(ln(1/(1 − 1/(9λ²))))⁻¹·ln(3λ/ε²) + 1`.
pub fn inner_iteration_bound(lambda: f64, eps: f64) -> f64 {
    let l = sigma_bar(lambda).powi(2);
    (3.0 * lambda / (eps * eps)).ln() / (1.0 / (1.0 - 1.0 / l)).ln() + 1.0
}

/// Gradient descent `v ← v − (1/L)·H(Hv − u)` from `v = 0`, `L = 9λ²`.
/// Stops when `‖Hv − u‖/‖u‖ ≤ eps/√(1+2λ)`, which certifies the
/// energy-norm rate `eps`. Returns the iterate and the number of updates.
pub fn inner_gd_solve(h: &SparseSymmetric, lambda: f64, u: &[f64], eps: f64, t_cap: usize) -> Result<(Vec<f64>, usize)> {
    let n = h.n();
    if u.len() != n {
        return Err(dim_mismatch(n, u.len()));
    }
    let unorm = norm(u);
    if unorm == 0.0 || eps >= 1.0 {
        return Ok((vec![0.0; n], 0));
    }
    let step = 1.0 / sigma_bar(lambda).powi(2);
    let target = eps / (1.0 + 2.0 * lambda).sqrt() * unorm;
    let mut v = vec![0.0; n];
    let mut r: Vec<f64> = u.iter().map(|x| -x).collect();
    let mut hr = vec![0.0; n];
    for t in 0..=t_cap {
        if norm(&r) <= target {
            return Ok((v, t));
        }
        if t == t_cap {
            break;
        }
        h.matvec_into(&r, &mut hr);
        crate::dense::axpy(-step, &hr, &mut v);
        h.matvec_into(&v, &mut r);
        r.iter_mut().zip(u).for_each(|(a, b)| *a -= b);
    }
    Err(HertaError::NoConvergence { iterations: t_cap })
}

/// [`inner_gd_solve`] as a [`LinearSolver`].
#[derive(Debug, Clone)]
pub struct InnerGd {
    h: SparseSymmetric,
    lambda: f64,
    eps: f64,
    t_cap: usize,
}

impl InnerGd {
    pub fn new(spec: &ModelSpec, eps: f64, t_cap: usize) -> Self {
        Self {
            h: spec.h().clone(),
            lambda: spec.lambda(),
            eps,
            t_cap,
        }
    }
}

impl LinearSolver for InnerGd {
    fn dim(&self) -> usize {
        self.h.n()
    }

    fn solve(&self, u: &[f64]) -> Result<Vec<f64>> {
        inner_gd_solve(&self.h, self.lambda, u, self.eps, self.t_cap).map(|(v, _)| v)
    }
}

/// `Xᵀ𝒮[M𝒮(Xw − ŷ_i)]`.
pub fn approx_gradient(spec: &ModelSpec, sub: &SubProblem, w: &[f64], solver: &dyn LinearSolver) -> Result<Vec<f64>> {
    let mut u = spec.x().matvec(w)?;
    u.iter_mut().zip(&sub.y_hat).for_each(|(a, b)| *a -= b);
    let mut u1 = solver.solve(&u)?;
    spec.apply_mask(&mut u1);
    let u2 = solver.solve(&u1)?;
    spec.x().t_matvec(&u2)
}

pub fn train_baseline(spec: &ModelSpec, cfg: &BaselineConfig, target_eps: f64) -> Result<TrainResult> {
    if !(target_eps > 0.0) {
        return Err(HertaError::InvalidConfig(format!("target eps must be positive, got {target_eps}")));
    }
    let kappa = condition_number(spec.x());
    let mu = cfg
        .inner_eps
        .unwrap_or_else(|| auto_mu(target_eps, kappa, spec.lambda()));
    let gamma = gradient_error_ratio(mu, target_eps, kappa, spec.lambda());
    let gd;
    let sdd;
    let solver: &dyn LinearSolver = match cfg.inner {
        InnerSolverKind::GradientDescent => {
            gd = InnerGd::new(spec, mu, cfg.t_inner);
            &gd
        }
        InnerSolverKind::Sdd => {
            sdd = spec.solver(mu)?;
            &sdd
        }
    };
    let loop_cfg = LoopConfig {
        loss: cfg.loss,
        eta: cfg.outer_eta,
        gamma,
        max_iter: cfg.t_outer,
        target_eps,
        reference: cfg.reference,
        exact_trace: cfg.exact_trace,
        optimizer: cfg.optimizer,
        power_iterations: 30,
        rng: RngHandle::new(cfg.seed),
    };
    run(
        &Problem {
            spec,
            precond: None,
            solver,
        },
        &loop_cfg,
    )
}

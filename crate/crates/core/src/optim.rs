//! Outer training loop shared by both trainers.
//!
//! Iterates live in coordinates `w` with `W = P′w`; `P′ = I` gives plain
//! gradient descent on the original problem. Each step solves with `H`
//! twice per label column, once forward and once backward.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dense::{norm, DenseMatrix};
use crate::error::{HertaError, Result};
use crate::model::{one_hot_classes, softmax_rows, ModelSpec};
use crate::oracle::DenseOracle;
use crate::rng::{tags, RngHandle};
use crate::solver::LinearSolver;
use crate::trace::{LossTrace, TrainResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    #[default]
    Mse,
    Ce,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum StepSize {
    /// `η = (1−γ)/((1+γ)²L)` with `L` from power iteration.
    #[default]
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// `None` picks `0.05·‖g₀‖∞/L`.
    pub lr: Option<f64>,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            lr: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum Optimizer {
    #[default]
    Gd,
    Adam(AdamParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopConfig {
    pub loss: LossKind,
    pub eta: StepSize,
    /// Upper bound on the relative gradient error, `≤ 1/2`.
    pub gamma: f64,
    pub max_iter: usize,
    pub target_eps: f64,
    /// Known optimum. When set the loop stops once
    /// `ℓ − ℓ* ≤ ε·max(ℓ*, ε·ℓ⁽⁰⁾)`.
    pub reference: Option<f64>,
    /// Record dense-oracle losses instead of the solver-evaluated ones.
    pub exact_trace: bool,
    pub optimizer: Optimizer,
    pub power_iterations: usize,
    pub rng: RngHandle,
}

/// Whether `loss` meets the stopping rule for optimum `best`.
pub fn reached_target(loss: f64, best: f64, initial: f64, eps: f64) -> bool {
    loss - best <= eps * best.max(eps * initial)
}

pub(crate) struct Problem<'a> {
    pub spec: &'a ModelSpec,
    /// `P′`; `None` means the identity.
    pub precond: Option<&'a DenseMatrix>,
    pub solver: &'a dyn LinearSolver,
}

impl Problem<'_> {
    fn to_original(&self, w: &DenseMatrix) -> Result<DenseMatrix> {
        match self.precond {
            Some(p) => p.matmul(w),
            None => Ok(w.clone()),
        }
    }

    fn precondition_grad(&self, g: DenseMatrix) -> Result<DenseMatrix> {
        match self.precond {
            Some(p) => p.matmul(&g),
            None => Ok(g),
        }
    }

    /// Loss and gradient at `w`, both from the approximate solver.
    pub fn loss_and_grad(&self, w: &DenseMatrix, kind: LossKind, y_hat: &DenseMatrix) -> Result<(f64, DenseMatrix)> {
        let spec = self.spec;
        let w_orig = self.to_original(w)?;
        let xw = spec.x().matmul(&w_orig)?;
        let (loss, back) = match kind {
            LossKind::Mse => {
                let u = xw.sub(y_hat)?;
                let mut u1 = self.solver.solve_multi(&u)?;
                spec.apply_mask_rows(&mut u1);
                let loss = 0.5 * u1.frobenius_norm().powi(2);
                (loss, self.solver.solve_multi(&u1)?)
            }
            LossKind::Ce => {
                let classes = one_hot_classes(spec.y())?;
                let z = self.solver.solve_multi(&xw)?;
                let loss = ce_value(spec, &z, &classes);
                let mut r = softmax_rows(&z).sub(spec.y())?;
                spec.apply_mask_rows(&mut r);
                (loss, self.solver.solve_multi(&r)?)
            }
        };
        let g = spec.x().t_matmul(&back)?;
        Ok((loss, self.precondition_grad(g)?))
    }

    /// Largest eigenvalue of the (preconditioned) MSE Hessian.
    pub fn power_iteration(&self, iters: usize, rng: RngHandle) -> Result<f64> {
        use rand::Rng;
        let d = self.spec.d();
        let mut r = rng.substream(tags::POWER_ITERATION).rng();
        let mut v: Vec<f64> = (0..d).map(|_| r.random::<f64>() + 0.5).collect();
        let nv = norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        let mut est = 0.0;
        for _ in 0..iters.max(1) {
            let w = DenseMatrix::from_vec(d, 1, v.clone())?;
            let w_orig = self.to_original(&w)?;
            let mut u = self.solver.solve_multi(&self.spec.x().matmul(&w_orig)?)?;
            self.spec.apply_mask_rows(&mut u);
            let back = self.solver.solve_multi(&u)?;
            let av = self.precondition_grad(self.spec.x().t_matmul(&back)?)?;
            let av = av.col(0);
            est = crate::dense::dot(&v, &av);
            let n = norm(&av);
            if n == 0.0 {
                break;
            }
            v = av.iter().map(|x| x / n).collect();
        }
        Ok(est)
    }
}

fn ce_value(spec: &ModelSpec, z: &DenseMatrix, classes: &[usize]) -> f64 {
    let mask = spec.mask();
    classes
        .iter()
        .enumerate()
        .filter(|(u, _)| mask.is_none_or(|m| m[*u]))
        .map(|(u, &k)| {
            let row = z.row(u);
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln() - row[k]
        })
        .sum()
}

/// `(1−γ)/((1+γ)²L)`.
pub fn auto_step(gamma: f64, lipschitz: f64) -> f64 {
    let g = gamma.clamp(0.0, 0.5);
    (1.0 - g) / ((1.0 + g).powi(2) * lipschitz)
}

fn exact_loss(oracle: &DenseOracle, spec: &ModelSpec, w_orig: &DenseMatrix, kind: LossKind) -> Result<f64> {
    match kind {
        LossKind::Mse => oracle.mse(spec, w_orig),
        LossKind::Ce => {
            let classes = one_hot_classes(spec.y())?;
            Ok(ce_value(spec, &oracle.a.matmul(w_orig)?, &classes))
        }
    }
}

struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

pub(crate) fn run(problem: &Problem<'_>, cfg: &LoopConfig) -> Result<TrainResult> {
    let spec = problem.spec;
    let (d, c) = (spec.d(), spec.c());
    let y_hat = spec.h().matmul_dense(spec.y())?;
    let oracle = if cfg.exact_trace { Some(DenseOracle::new(spec)?) } else { None };

    let l_mse = problem.power_iteration(cfg.power_iterations, cfg.rng)?;
    if !(l_mse > 0.0) || !l_mse.is_finite() {
        return Err(HertaError::InvalidConfig(format!("Hessian norm estimate {l_mse} is not positive")));
    }
    // the cross-entropy Hessian is at most half the MSE one
    let lipschitz = match cfg.loss {
        LossKind::Mse => l_mse,
        LossKind::Ce => 0.5 * l_mse,
    };
    let eta = match cfg.eta {
        StepSize::Auto => auto_step(cfg.gamma, lipschitz),
        StepSize::Fixed(e) => e,
    };

    let start = Instant::now();
    let mut w = DenseMatrix::zeros(d, c);
    let mut trace = LossTrace::new();
    let mut adam = AdamState {
        m: vec![0.0; d * c],
        v: vec![0.0; d * c],
        t: 0,
    };
    let mut adam_lr = None;
    let mut initial = None;
    let mut converged = false;
    let mut iterations = 0;

    for t in 0..=cfg.max_iter {
        let (approx_loss, g) = problem.loss_and_grad(&w, cfg.loss, &y_hat)?;
        let loss = match &oracle {
            Some(o) => exact_loss(o, spec, &problem.to_original(&w)?, cfg.loss)?,
            None => approx_loss,
        };
        if !loss.is_finite() {
            return Err(HertaError::NoConvergence { iterations: t });
        }
        trace.push(t, start.elapsed().as_nanos() as u64, loss);
        let l0 = *initial.get_or_insert(loss);
        iterations = t;
        if let Some(best) = cfg.reference {
            if reached_target(loss, best, l0, cfg.target_eps) {
                converged = true;
                break;
            }
        }
        if t == cfg.max_iter {
            break;
        }
        match cfg.optimizer {
            Optimizer::Gd => {
                for (wi, gi) in w.data_mut().iter_mut().zip(g.data()) {
                    *wi -= eta * gi;
                }
            }
            Optimizer::Adam(p) => {
                let lr = *adam_lr.get_or_insert_with(|| {
                    p.lr.unwrap_or_else(|| {
                        let ginf = g.data().iter().fold(0.0f64, |m, x| m.max(x.abs()));
                        0.05 * ginf / lipschitz
                    })
                });
                adam.t += 1;
                let b1t = 1.0 - p.beta1.powi(adam.t);
                let b2t = 1.0 - p.beta2.powi(adam.t);
                for (k, (wi, gi)) in w.data_mut().iter_mut().zip(g.data()).enumerate() {
                    adam.m[k] = p.beta1 * adam.m[k] + (1.0 - p.beta1) * gi;
                    adam.v[k] = p.beta2 * adam.v[k] + (1.0 - p.beta2) * gi * gi;
                    let m_hat = if b1t > 0.0 { adam.m[k] / b1t } else { adam.m[k] };
                    let v_hat = if b2t > 0.0 { adam.v[k] / b2t } else { adam.v[k] };
                    *wi -= lr * m_hat / (v_hat.sqrt() + p.eps);
                }
            }
        }
    }

    Ok(TrainResult {
        w: problem.to_original(&w)?,
        trace,
        iterations,
        converged,
        step_size: eta,
        lipschitz,
        precond_build_ns: 0,
        train_ns: start.elapsed().as_nanos() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stop_rule() {
        assert!(reached_target(1.0 + 1e-7, 1.0, 10.0, 1e-6));
        assert!(!reached_target(1.0 + 1e-5, 1.0, 10.0, 1e-6));
        // zero optimum falls back to a relative floor
        assert!(reached_target(5e-12, 0.0, 10.0, 1e-6));
        assert!(!reached_target(5e-11, 0.0, 10.0, 1e-6));
    }

    #[test]
    fn auto_step_formula() {
        assert!((auto_step(0.0, 2.0) - 0.5).abs() < 1e-15);
        assert!((auto_step(0.5, 1.0) - 0.5 / 2.25).abs() < 1e-15);
        assert_eq!(auto_step(3.0, 1.0), auto_step(0.5, 1.0));
    }
}

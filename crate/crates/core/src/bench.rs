//! Paired runs at a fixed iteration budget.
//!
//! Each trainer gets its own step size chosen from a half-decade grid around its
//! automatic step: runs whose loss ends above where it started, or turns
//! non-finite, are discarded and the lowest final loss wins.

use crate::baseline::{train_baseline, BaselineConfig, InnerSolverKind};
use crate::error::{HertaError, Result};
use crate::herta::{build_preconditioner, herta_train_with, HertaConfig};
use crate::model::ModelSpec;
use crate::optim::{LossKind, StepSize};
use crate::trace::TrainResult;

/// Multipliers of the automatic step.
pub const STEP_GRID: [f64; 8] = [0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0];

#[derive(Debug, Clone)]
pub struct SweepPick {
    pub multiplier: f64,
    pub result: TrainResult,
}

impl SweepPick {
    pub fn final_loss(&self) -> f64 {
        self.result.final_loss()
    }
}

/// Run `train` with `Auto` to learn the automatic step, then with every
/// multiple of it in `grid`, and keep the best stable run.
pub fn best_of_sweep(grid: &[f64], mut train: impl FnMut(StepSize) -> Result<TrainResult>) -> Result<SweepPick> {
    let auto = train(StepSize::Auto)?;
    let eta = auto.step_size;
    let mut best: Option<SweepPick> = None;
    for &m in grid {
        let result = if m == 1.0 {
            auto.clone()
        } else {
            match train(StepSize::Fixed(m * eta)) {
                Ok(r) => r,
                Err(HertaError::NoConvergence { .. }) => continue,
                Err(e) => return Err(e),
            }
        };
        let (first, last) = (result.trace.losses()[0], result.final_loss());
        if !last.is_finite() || last > first {
            continue;
        }
        if best.as_ref().is_none_or(|b| last < b.final_loss()) {
            best = Some(SweepPick { multiplier: m, result });
        }
    }
    best.ok_or(HertaError::NoConvergence { iterations: 0 })
}

/// Best HERTA and baseline runs at `iters` outer iterations.
pub fn paired_budget_run(spec: &ModelSpec, loss: LossKind, iters: usize, eps: f64, seed: u64) -> Result<(SweepPick, SweepPick)> {
    let mut hcfg = HertaConfig::new(eps, seed);
    hcfg.loss = loss;
    hcfg.max_iter = iters;
    let pre = build_preconditioner(spec, &hcfg)?;
    let herta = best_of_sweep(&STEP_GRID, |eta| {
        let mut c = hcfg.clone();
        c.eta = eta;
        herta_train_with(spec, &c, &pre)
    })?;
    let bcfg = BaselineConfig {
        t_outer: iters,
        inner: InnerSolverKind::Sdd,
        loss,
        seed,
        ..BaselineConfig::default()
    };
    let baseline = best_of_sweep(&STEP_GRID, |eta| {
        train_baseline(
            spec,
            &BaselineConfig {
                outer_eta: eta,
                ..bcfg.clone()
            },
            eps,
        )
    })?;
    Ok((herta, baseline))
}

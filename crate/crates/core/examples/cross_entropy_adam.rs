//! Adam with and without the preconditioner on a classification fixture.
//!
//! cargo run --release --example cross_entropy_adam

use std::path::Path;

use herta::baseline::{train_baseline, BaselineConfig, InnerSolverKind};
use herta::cli::load_dataset_dir;
use herta::data::LabelKind;
use herta::herta::{herta_train_adam, HertaConfig};
use herta::optim::{AdamParams, LossKind, Optimizer};

fn main() -> herta::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/ill_conditioned_ce_l1");
    let spec = load_dataset_dir(&dir, 1.0, LabelKind::Class)?;
    let iters = 50;
    println!("{:>10} {:>12} {:>12}", "lr", "herta+adam", "adam");
    for lr in [1e-3, 1e-2, 1e-1, 1.0, 10.0] {
        let adam = Optimizer::Adam(AdamParams {
            lr: Some(lr),
            ..AdamParams::default()
        });
        let mut cfg = HertaConfig::new(1e-6, 0);
        cfg.loss = LossKind::Ce;
        cfg.max_iter = iters;
        cfg.optimizer = adam;
        let h = herta_train_adam(&spec, &cfg)?;
        let b = train_baseline(
            &spec,
            &BaselineConfig {
                t_outer: iters,
                inner: InnerSolverKind::Sdd,
                loss: LossKind::Ce,
                optimizer: adam,
                ..BaselineConfig::default()
            },
            1e-6,
        )?;
        println!("{lr:>10.0e} {:>12.4} {:>12.4}", h.final_loss(), b.final_loss());
    }
    Ok(())
}

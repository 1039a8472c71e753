//! HERTA against plain gradient descent on an ill-conditioned fixture,
//! both losses, equal budget of 50 outer iterations.
//!
//! cargo run --release --example train_herta_vs_baseline

use std::path::Path;

use herta::bench::paired_budget_run;
use herta::cli::load_dataset_dir;
use herta::data::LabelKind;
use herta::optim::LossKind;

fn main() -> herta::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    println!("{:>6} {:>4} {:>14} {:>14} {:>8}", "lambda", "loss", "herta", "baseline", "ratio");
    for lambda in [1.0, 20.0] {
        for (loss, dir, kind) in [
            (LossKind::Mse, "ill_conditioned", LabelKind::Numeric),
            (LossKind::Ce, "ill_conditioned_ce", LabelKind::Class),
        ] {
            let spec = load_dataset_dir(&data.join(format!("{dir}_l{lambda}")), lambda, kind)?;
            let (h, b) = paired_budget_run(&spec, loss, 50, 1e-6, 0)?;
            println!(
                "{lambda:>6} {:>4} {:>14.6e} {:>14.6e} {:>8.4}   (step x{} / x{})",
                format!("{loss:?}").to_lowercase(),
                h.final_loss(),
                b.final_loss(),
                h.final_loss() / b.final_loss(),
                h.multiplier,
                b.multiplier
            );
        }
    }
    Ok(())
}

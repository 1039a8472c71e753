//! Where HERTA spends its time as the graph grows: preconditioner
//! construction against the training loop.
//!
//! cargo run --release --example runtime_breakdown

use std::time::Instant;

use herta::data::{generate_features, generate_graph, generate_labels, GenLabels, GraphModel};
use herta::herta::{build_preconditioner, herta_train_with, HertaConfig};
use herta::model::ModelSpec;
use herta::RngHandle;

fn main() -> herta::Result<()> {
    let lambda = 1.0;
    println!("{:>7} {:>8} {:>12} {:>12} {:>6} {:>12}", "n", "m", "build ms", "train ms", "iters", "final loss");
    for n in [500, 2000, 8000, 32000] {
        let rng = RngHandle::new(n as u64);
        let g = generate_graph(GraphModel::ErdosRenyi { n, p: 8.0 / n as f64 }, rng)?;
        let (x, f) = generate_features(n, 16, 100.0, rng)?;
        let (y, _) = generate_labels(&g, lambda, &x, &f, GenLabels::Planted, 2, 0.0, rng)?;
        let spec = ModelSpec::new(g.normalized_laplacian()?, lambda, x, y)?;
        let mut cfg = HertaConfig::new(1e-6, 0);
        cfg.max_iter = 30;
        let t = Instant::now();
        let pre = build_preconditioner(&spec, &cfg)?;
        let build = t.elapsed();
        let r = herta_train_with(&spec, &cfg, &pre)?;
        println!(
            "{n:>7} {:>8} {:>12.1} {:>12.1} {:>6} {:>12.3e}",
            g.m(),
            build.as_secs_f64() * 1e3,
            r.train_ns as f64 / 1e6,
            r.iterations,
            r.final_loss()
        );
    }
    Ok(())
}

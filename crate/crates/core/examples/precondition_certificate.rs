//! Preconditioner quality on a generated problem: pencil range against the
//! dense Hessian and the conditioning of the preconditioned Hessian.
//!
//! cargo run --release --example precondition_certificate

use herta::data::{generate_features, generate_graph, GraphModel};
use herta::herta::{build_preconditioner, certify_preconditioner, conditioned_hessian_check, HertaConfig};
use herta::model::ModelSpec;
use herta::oracle::DenseOracle;
use herta::sketch::spd_condition_number;
use herta::{DenseMatrix, RngHandle};

fn main() -> herta::Result<()> {
    let rng = RngHandle::new(11);
    let g = generate_graph(GraphModel::ErdosRenyi { n: 400, p: 0.03 }, rng)?;
    let (x, _) = generate_features(g.n(), 12, 1e4, rng)?;
    for lambda in [1.0, 8.0] {
        let spec = ModelSpec::new(g.normalized_laplacian()?, lambda, x.clone(), DenseMatrix::zeros(g.n(), 1))?;
        let raw = spd_condition_number(&DenseOracle::new(&spec)?.hessian())?;
        println!("lambda {lambda}: Hessian condition number {raw:.3e}");
        for seed in 0..5 {
            let pre = build_preconditioner(&spec, &HertaConfig::new(1e-6, seed))?;
            let rep = certify_preconditioner(&spec, &pre)?;
            let k = conditioned_hessian_check(&spec, &pre.p_inv_sqrt)?;
            println!(
                "  seed {seed}: sketch rows {:>4}, sparsifier edges {:>5}, pencil [{:.4}, {:.4}], preconditioned κ {k:.4}",
                pre.sketch_rows, pre.sparsifier_edges, rep.min_pencil, rep.max_pencil
            );
        }
    }
    Ok(())
}

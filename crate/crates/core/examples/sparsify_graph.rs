//! Regularized spectral sparsifier of a random graph, checked densely.
//!
//! cargo run --example sparsify_graph

use herta::data::{generate_graph, GraphModel};
use herta::oracle::exact_effective_dim;
use herta::sketch::pencil_eigenvalues;
use herta::sparsifier::{sample_count, sparsify, SparsifyConfig};
use herta::RngHandle;

fn main() -> herta::Result<()> {
    let (lambda, eps) = (4.0, 0.25);
    let g = generate_graph(GraphModel::ErdosRenyi { n: 200, p: 0.1 }, RngHandle::new(1))?;
    let l = g.normalized_laplacian()?;
    let b = g.normalized_incidence()?;
    let cfg = SparsifyConfig::new(eps, lambda, 1);
    let out = sparsify(&l, &b, &cfg)?;

    let shift = 1.0 / lambda;
    let ev = pencil_eigenvalues(
        &out.laplacian.scaled_plus_identity(1.0, shift).to_dense(),
        &l.scaled_plus_identity(1.0, shift).to_dense(),
    )?;
    println!("edges in / out      {} / {}", g.m(), out.edge_count());
    println!("samples             {} (bound {})", out.samples, sample_count(&cfg, out.n_lambda_estimate, g.n()));
    println!("n_lambda estimate   {:.3}", out.n_lambda_estimate);
    println!("n_lambda exact      {:.3}", exact_effective_dim(&l, lambda)?);
    println!("pencil range        [{:.4}, {:.4}]  target [{}, {}]", ev[0], ev[ev.len() - 1], 1.0 - eps, 1.0 + eps);
    Ok(())
}

//! Iterations of the gradient-descent inner solver against its bound.
//!
//! cargo run --release --example inner_solver_rates

use herta::baseline::{inner_gd_solve, inner_iteration_bound};
use herta::data::{generate_graph, GraphModel};
use herta::solver::{energy_norm, DenseInverse};
use herta::RngHandle;

fn main() -> herta::Result<()> {
    let g = generate_graph(GraphModel::ErdosRenyi { n: 120, p: 0.05 }, RngHandle::new(2))?;
    let l = g.normalized_laplacian()?;
    let u: Vec<f64> = (0..g.n()).map(|i| (i as f64 * 0.7).sin()).collect();
    println!("{:>6} {:>8} {:>10} {:>10} {:>12}", "lambda", "eps", "iters", "bound", "H-error");
    for lambda in [1.0, 2.0, 4.0] {
        let h = l.scaled_plus_identity(lambda, 1.0);
        let exact = DenseInverse::new(&h)?.matrix().matvec(&u)?;
        for eps in [1e-4, 1e-8] {
            let (v, iters) = inner_gd_solve(&h, lambda, &u, eps, 10_000_000)?;
            let e: Vec<f64> = v.iter().zip(&exact).map(|(a, b)| a - b).collect();
            println!(
                "{lambda:>6} {eps:>8.0e} {iters:>10} {:>10.0} {:>12.2e}",
                inner_iteration_bound(lambda, eps),
                energy_norm(&h, &e) / energy_norm(&h, &exact)
            );
        }
    }
    Ok(())
}

//! Solving with I + λL̂ at a chosen energy-norm accuracy.
//!
//! cargo run --example sdd_solve

use herta::data::{generate_graph, GraphModel};
use herta::solver::{energy_norm, sdd_solve, DenseInverse, SolverHandle, SolverMethod};
use herta::RngHandle;

fn main() -> herta::Result<()> {
    let g = generate_graph(GraphModel::Sbm { n: 300, k: 3, p: 0.1, q: 0.01 }, RngHandle::new(4))?;
    let l = g.normalized_laplacian()?;
    let u: Vec<f64> = (0..g.n()).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
    for lambda in [1.0, 10.0, 100.0] {
        let exact_h = l.scaled_plus_identity(lambda, 1.0);
        let exact = DenseInverse::new(&exact_h)?.matrix().matvec(&u)?;
        for method in [SolverMethod::Chebyshev, SolverMethod::ConjugateGradient] {
            for eps in [1e-3, 1e-8] {
                let h = SolverHandle::regularized(&l, lambda, eps, Some(&g.degree_scaling()))?.with_method(method);
                let (v, stats) = sdd_solve(&h, &u)?;
                let err: Vec<f64> = v.iter().zip(&exact).map(|(a, b)| a - b).collect();
                println!(
                    "lambda {lambda:>5}  {method:?}  eps {eps:.0e}  iters {:>4}  H-norm error {:.2e}",
                    stats.iterations,
                    energy_norm(&exact_h, &err) / energy_norm(&exact_h, &exact)
                );
            }
        }
    }
    Ok(())
}

#![allow(dead_code, clippy::too_many_arguments)]

use herta::data::{generate_features, generate_graph, generate_labels, GenLabels, GraphModel};
use herta::model::ModelSpec;
use herta::{DenseMatrix, GraphData, RngHandle};

pub struct Instance {
    pub graph: GraphData,
    pub spec: ModelSpec,
}

/// Generated problem with `d` features of condition number `cond`.
pub fn instance(model: GraphModel, d: usize, cond: f64, lambda: f64, labels: GenLabels, c: usize, noise: f64, seed: u64) -> Instance {
    let rng = RngHandle::new(seed);
    let graph = generate_graph(model, rng).unwrap();
    let (x, f) = generate_features(graph.n(), d, cond, rng).unwrap();
    let (y, _) = generate_labels(&graph, lambda, &x, &f, labels, c, noise, rng).unwrap();
    let spec = ModelSpec::new(graph.normalized_laplacian().unwrap(), lambda, x, y).unwrap();
    Instance { graph, spec }
}

pub fn er(n: usize, p: f64) -> GraphModel {
    GraphModel::ErdosRenyi { n, p }
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    use rand::Rng;
    let mut r = RngHandle::new(seed).rng();
    DenseMatrix::from_fn(rows, cols, |_, _| r.random::<f64>() * 2.0 - 1.0)
}

pub fn random_spd(d: usize, cond: f64, seed: u64) -> DenseMatrix {
    let q = random_matrix(d, d, seed).to_nalgebra().qr().q();
    let q = DenseMatrix::from_nalgebra(&q);
    let eig: Vec<f64> = (0..d).map(|i| cond.powf(i as f64 / (d - 1) as f64)).collect();
    let qd = DenseMatrix::from_fn(d, d, |i, j| q.get(i, j) * eig[j]);
    let a = qd.matmul(&q.transpose()).unwrap();
    // exact symmetry
    DenseMatrix::from_fn(d, d, |i, j| 0.5 * (a.get(i, j) + a.get(j, i)))
}

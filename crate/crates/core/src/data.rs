//! Dataset files and synthetic instance generators.

use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dense::DenseMatrix;
use crate::error::{HertaError, Result};
use crate::graph::{load_edge_list, GraphData};
use crate::rng::{tags, RngHandle};
use crate::solver::{LinearSolver, SolverHandle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LabelKind {
    /// Class ids when the file is one column of non-negative integers.
    #[default]
    Auto,
    Class,
    Numeric,
}

fn csv_err(e: csv::Error) -> HertaError {
    HertaError::Parse {
        line: e.position().map_or(0, |p| p.line() as usize),
        msg: e.to_string(),
    }
}

/// Numeric CSV without header. A first row that does not parse is taken
/// as a header and skipped.
pub fn read_matrix_csv(r: impl std::io::Read) -> Result<DenseMatrix> {
    let mut rd = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(r);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(|t| t.parse::<f64>()).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if idx == 0 => continue,
            Err(e) => {
                return Err(HertaError::Parse {
                    line: idx + 1,
                    msg: e.to_string(),
                })
            }
        }
    }
    if rows.is_empty() {
        return Err(HertaError::Parse {
            line: 0,
            msg: "no numeric rows".into(),
        });
    }
    DenseMatrix::from_rows(&rows)
}

pub fn load_matrix_csv(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    read_matrix_csv(std::fs::File::open(path)?)
}

/// `Y` as a matrix, one-hot encoded when the labels are class ids.
pub fn labels_from_matrix(raw: DenseMatrix, kind: LabelKind) -> Result<(DenseMatrix, bool)> {
    let looks_like_ids = raw.cols() == 1 && raw.data().iter().all(|v| *v >= 0.0 && v.fract() == 0.0 && *v < 1e6);
    let as_class = match kind {
        LabelKind::Class => {
            if !looks_like_ids {
                return Err(HertaError::InvalidConfig("class labels must be one column of non-negative integers".into()));
            }
            true
        }
        LabelKind::Numeric => false,
        LabelKind::Auto => looks_like_ids,
    };
    if !as_class {
        return Ok((raw, false));
    }
    let ids: Vec<usize> = raw.data().iter().map(|v| *v as usize).collect();
    Ok((one_hot(&ids, ids.iter().max().map_or(1, |m| m + 1)), true))
}

pub fn one_hot(classes: &[usize], c: usize) -> DenseMatrix {
    DenseMatrix::from_fn(classes.len(), c, |i, j| if classes[i] == j { 1.0 } else { 0.0 })
}

/// Plain CSV; floats use the shortest round-trip representation.
pub fn write_matrix_csv(m: &DenseMatrix, w: impl std::io::Write) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for i in 0..m.rows() {
        wr.write_record(m.row(i).iter().map(|v| v.to_string())).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_class_csv(classes: &[usize], mut w: impl std::io::Write) -> Result<()> {
    for c in classes {
        writeln!(w, "{c}")?;
    }
    Ok(())
}

/// Graph, features, labels and an optional training mask.
#[derive(Debug, Clone)]
pub struct DatasetBundle {
    pub graph: GraphData,
    pub x: DenseMatrix,
    pub y: DenseMatrix,
    pub classes: bool,
    pub mask: Option<Vec<bool>>,
}

impl DatasetBundle {
    pub fn load(graph: &Path, features: &Path, labels: Option<&Path>, kind: LabelKind) -> Result<Self> {
        let x = load_matrix_csv(features)?;
        let graph = load_edge_list(graph, Some(x.rows()))?.add_self_loops();
        if graph.n() != x.rows() {
            return Err(crate::error::dim_mismatch(format!("{} feature rows", graph.n()), x.rows()));
        }
        let (y, classes) = match labels {
            Some(p) => labels_from_matrix(load_matrix_csv(p)?, kind)?,
            None => (DenseMatrix::zeros(x.rows(), 1), false),
        };
        if y.rows() != x.rows() {
            return Err(crate::error::dim_mismatch(format!("{} label rows", x.rows()), y.rows()));
        }
        Ok(Self {
            graph,
            x,
            y,
            classes,
            mask: None,
        })
    }

    /// Random training mask with `⌈frac·n⌉` nodes.
    pub fn with_train_fraction(mut self, frac: f64, rng: RngHandle) -> Result<Self> {
        if !(frac > 0.0 && frac <= 1.0) {
            return Err(HertaError::InvalidConfig(format!("train fraction {frac} outside (0, 1]")));
        }
        let n = self.x.rows();
        let keep = ((frac * n as f64).ceil() as usize).min(n);
        let mut order: Vec<usize> = (0..n).collect();
        let mut r = rng.substream(tags::TRAIN_MASK).rng();
        for i in (1..n).rev() {
            order.swap(i, r.random_range(0..=i));
        }
        let mut mask = vec![false; n];
        order[..keep].iter().for_each(|&i| mask[i] = true);
        self.mask = Some(mask);
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GraphModel {
    ErdosRenyi { n: usize, p: f64 },
    /// `k` equal blocks; within-block probability `p`, across `q`.
    Sbm { n: usize, k: usize, p: f64, q: f64 },
    Path { n: usize },
    Triangle,
}

pub fn generate_graph(model: GraphModel, rng: RngHandle) -> Result<GraphData> {
    let mut r = rng.substream(tags::GEN_GRAPH).rng();
    let check_p = |p: f64| {
        if (0.0..=1.0).contains(&p) {
            Ok(())
        } else {
            Err(HertaError::InvalidConfig(format!("edge probability {p} outside [0, 1]")))
        }
    };
    let g = match model {
        GraphModel::Triangle => GraphData::new(3, [(0, 1), (1, 2), (0, 2)])?,
        GraphModel::Path { n } => GraphData::new(n, (1..n).map(|i| (i - 1, i)))?,
        GraphModel::ErdosRenyi { n, p } => {
            check_p(p)?;
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if r.random::<f64>() < p {
                        edges.push((u, v));
                    }
                }
            }
            GraphData::new(n, edges)?
        }
        GraphModel::Sbm { n, k, p, q } => {
            check_p(p)?;
            check_p(q)?;
            if k == 0 {
                return Err(HertaError::InvalidConfig("block count must be positive".into()));
            }
            let block = |u: usize| u * k / n.max(1);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    let prob = if block(u) == block(v) { p } else { q };
                    if r.random::<f64>() < prob {
                        edges.push((u, v));
                    }
                }
            }
            GraphData::new(n, edges)?
        }
    };
    if g.n() == 0 {
        return Err(HertaError::InvalidConfig("graph needs at least one node".into()));
    }
    Ok(g.add_self_loops())
}

/// Singular values geometrically spaced from `cond` down to 1.
pub fn singular_profile(d: usize, cond: f64) -> Vec<f64> {
    if d == 1 {
        return vec![1.0];
    }
    (0..d).map(|i| cond.powf(1.0 - i as f64 / (d - 1) as f64)).collect()
}

fn gauss(r: &mut impl Rng) -> f64 {
    StandardNormal.sample(r)
}

fn orthonormal_columns(rows: usize, cols: usize, r: &mut impl Rng) -> DenseMatrix {
    let g = DenseMatrix::from_fn(rows, cols, |_, _| gauss(r));
    let q = g.to_nalgebra().qr().q();
    DenseMatrix::from_nalgebra(&q)
}

/// `X = U·diag(σ)·Vᵀ` with exact singular values [`singular_profile`];
/// square requests give `diag(σ)` directly.
pub fn generate_features(n: usize, d: usize, cond: f64, rng: RngHandle) -> Result<(DenseMatrix, FeatureFactors)> {
    if d == 0 || d > n {
        return Err(HertaError::InvalidConfig(format!("need 1 ≤ d ≤ n, got d = {d}, n = {n}")));
    }
    if !(cond >= 1.0) || !cond.is_finite() {
        return Err(HertaError::InvalidConfig(format!("condition number {cond} must be ≥ 1")));
    }
    let sigma = singular_profile(d, cond);
    if n == d {
        let x = DenseMatrix::diag(&sigma);
        return Ok((
            x,
            FeatureFactors {
                v: DenseMatrix::identity(d),
                sigma,
            },
        ));
    }
    let mut r = rng.substream(tags::GEN_FEATURES).rng();
    let u = orthonormal_columns(n, d, &mut r);
    let v = orthonormal_columns(d, d, &mut r);
    let us = DenseMatrix::from_fn(n, d, |i, j| u.get(i, j) * sigma[j]);
    Ok((us.matmul(&v.transpose())?, FeatureFactors { v, sigma }))
}

/// Right singular vectors and singular values of generated features.
#[derive(Debug, Clone)]
pub struct FeatureFactors {
    pub v: DenseMatrix,
    pub sigma: Vec<f64>,
}

impl FeatureFactors {
    /// `V·diag(σ)⁻¹·G`: weights whose contribution `XW` is spread evenly
    /// over all singular directions.
    pub fn balanced_weights(&self, c: usize, rng: &mut impl Rng) -> DenseMatrix {
        let d = self.sigma.len();
        let g = DenseMatrix::from_fn(d, c, |i, _| gauss(rng) / self.sigma[i]);
        self.v.matmul(&g).expect("shapes agree")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GenLabels {
    /// `Y = H⁻¹XW₀ + noise`.
    Planted,
    /// Uniform random classes.
    Onehot,
    /// `argmax` of planted logits.
    PlantedClass,
}

/// Labels for a generated instance. Returns `(Y, class ids if any)`.
pub fn generate_labels(
    graph: &GraphData,
    lambda: f64,
    x: &DenseMatrix,
    factors: &FeatureFactors,
    kind: GenLabels,
    c: usize,
    noise: f64,
    rng: RngHandle,
) -> Result<(DenseMatrix, Option<Vec<usize>>)> {
    if c == 0 {
        return Err(HertaError::InvalidConfig("need at least one label column".into()));
    }
    let n = x.rows();
    let mut r = rng.substream(tags::GEN_LABELS).rng();
    match kind {
        GenLabels::Onehot => {
            let ids: Vec<usize> = (0..n).map(|_| r.random_range(0..c)).collect();
            Ok((one_hot(&ids, c), Some(ids)))
        }
        GenLabels::Planted | GenLabels::PlantedClass => {
            let w0 = factors.balanced_weights(c, &mut r);
            let l = graph.normalized_laplacian()?;
            let solver = SolverHandle::regularized(&l, lambda, 1e-14, Some(&graph.degree_scaling()))?;
            let mut z = solver.solve_multi(&x.matmul(&w0)?)?;
            if kind == GenLabels::PlantedClass {
                let ids: Vec<usize> = (0..n)
                    .map(|i| {
                        let row = z.row(i);
                        (0..c).fold(0, |best, j| if row[j] > row[best] { j } else { best })
                    })
                    .collect();
                return Ok((one_hot(&ids, c), Some(ids)));
            }
            if noise > 0.0 {
                let scale = noise * z.frobenius_norm() / ((n * c) as f64).sqrt();
                for v in z.data_mut() {
                    *v += scale * gauss(&mut r);
                }
            }
            Ok((z, None))
        }
    }
}

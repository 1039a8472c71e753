//! Commands behind the `herta` binary.
//!
//! Every command writes into an `--out` directory and leaves a
//! `manifest.json` there holding the exact argument vector, so
//! `herta --from-manifest out/manifest.json` repeats the run.
//! Exit codes: 0 success, 1 usage or input error, 2 convergence failure.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::baseline::{train_baseline, BaselineConfig, InnerSolverKind};
use crate::data::{
    generate_features, generate_graph, generate_labels, write_class_csv, write_matrix_csv, DatasetBundle, GenLabels,
    GraphModel, LabelKind,
};
use crate::error::{HertaError, Result};
use crate::graph::load_edge_list;
use crate::herta::{build_preconditioner, certify_preconditioner, conditioned_hessian_check, herta_train_with, HertaConfig, Preconditioner};
use crate::model::ModelSpec;
use crate::optim::{AdamParams, LossKind, Optimizer, StepSize};
use crate::oracle::DenseOracle;
use crate::rng::RngHandle;
use crate::sketch::{pencil_eigenvalues, SrhtRows};
use crate::sparsifier::{sample_count, sparsify, SparsifyConfig};
use crate::trace::RunSummary;

/// Largest graph `sparsify --certify` will densify.
pub const SPARSIFY_CERTIFY_LIMIT: usize = 500;

pub const BUILD_ID: &str = env!("HERTA_BUILD_ID");

#[derive(Debug, Parser)]
#[command(name = "herta", version, about = "Preconditioned training of linear unfolded GNNs")]
pub struct Cli {
    /// Worker threads for internal parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Zero all wall-clock fields in outputs. Implied by `--threads 1`.
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// Re-run the argument vector stored in a manifest.
    #[arg(long)]
    pub from_manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model and write its loss trace.
    Train(TrainArgs),
    /// Sparsify a graph Laplacian.
    Sparsify(SparsifyArgs),
    /// Repeat the preconditioner certificate on a small dataset.
    Certify(CertifyArgs),
    /// Generate a synthetic dataset.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Herta,
    Baseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LossArg {
    Mse,
    Ce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerArg {
    Gd,
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum InnerArg {
    Gd,
    Sdd,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DatasetArgs {
    /// Edge list, one "u v" pair per line.
    #[arg(long)]
    pub graph: PathBuf,
    /// Feature matrix as CSV, one row per node.
    #[arg(long)]
    pub features: PathBuf,
    /// Labels as CSV: one column of class ids or a numeric target matrix.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = LabelKind::Auto)]
    pub label_kind: LabelKind,
    /// Train on a random fraction of nodes; the rest only enter the forward pass.
    #[arg(long)]
    pub train_frac: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[arg(long, value_enum, default_value_t = Algo::Herta)]
    pub algo: Algo,
    #[arg(long, value_enum, default_value_t = LossArg::Mse)]
    pub loss: LossArg,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    /// Outer iteration budget.
    #[arg(long, default_value_t = 1000)]
    pub iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = OptimizerArg::Gd)]
    pub optimizer: OptimizerArg,
    /// Fixed step size (GD) or learning rate (Adam).
    #[arg(long)]
    pub lr: Option<f64>,
    /// Inner solver rate; derived from `--eps` when absent.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Inner solver of the baseline.
    #[arg(long, value_enum, default_value_t = InnerArg::Gd)]
    pub inner: InnerArg,
    #[arg(long, default_value_t = 1_000_000)]
    pub inner_cap: usize,
    /// Compute the optimum densely and stop once within `eps` of it.
    /// Exit 2 if the budget runs out first.
    #[arg(long)]
    pub oracle: bool,
    /// Record dense-oracle losses in the trace.
    #[arg(long)]
    pub exact_trace: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SparsifyArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Node count when trailing nodes are isolated.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Oversampling constant.
    #[arg(long, default_value_t = 8.0)]
    pub c: f64,
    /// Check the spectral guarantee densely.
    #[arg(long)]
    pub certify: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Use the exact Hessian as preconditioner.
    #[arg(long)]
    pub exact: bool,
    #[arg(long, default_value_t = 1.0 / 64.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 4.0)]
    pub k_srht: f64,
    /// Fixed number of sketch rows.
    #[arg(long)]
    pub sketch_rows: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelArg {
    Er,
    Sbm,
    Path,
    Triangle,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Edge probability (within blocks for sbm).
    #[arg(long, default_value_t = 0.1)]
    pub p: f64,
    /// Block count for sbm.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Across-block probability for sbm.
    #[arg(long, default_value_t = 0.01)]
    pub q: f64,
    #[arg(long, default_value_t = 8)]
    pub d: usize,
    /// Target condition number of the features.
    #[arg(long, default_value_t = 1.0)]
    pub cond: f64,
    #[arg(long, value_enum, default_value_t = GenLabels::Planted)]
    pub labels: GenLabels,
    /// Label columns or classes.
    #[arg(long, default_value_t = 1)]
    pub c: usize,
    /// Relative noise added to planted labels.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Regularization used to plant labels.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name.
    pub argv: Vec<String>,
    pub dataset: Vec<PathBuf>,
    pub config: serde_json::Value,
    pub seed: u64,
    pub build: String,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        serde_json::from_reader(File::open(path)?).map_err(|e| HertaError::Parse {
            line: e.line(),
            msg: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    #[serde(flatten)]
    pub summary: RunSummary,
    pub loss: LossArg,
    pub converged: bool,
    pub reference_loss: Option<f64>,
    pub step_size: f64,
    pub lipschitz: f64,
    pub sketch_rows: usize,
    pub sparsifier_edges: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsifyReport {
    pub n: usize,
    pub m_in: usize,
    pub m_out: usize,
    pub samples: u64,
    pub sample_bound: u64,
    pub n_lambda_estimate: f64,
    pub certified: Option<bool>,
    pub pencil_min: Option<f64>,
    pub pencil_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyTrial {
    pub seed: u64,
    pub pencil_min: f64,
    pub pencil_max: f64,
    pub kappa: f64,
    pub pencil_ok: bool,
    pub kappa_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    pub n: usize,
    pub d: usize,
    pub lambda: f64,
    pub exact: bool,
    pub trials: Vec<CertifyTrial>,
    pub pass_rate_lemma4: f64,
    pub pass_rate_kappa: f64,
    /// Trials where the pencil check passed but `κ > 2.25`.
    pub kappa_exceptions: usize,
    pub kappa_max: f64,
}

/// Upper bound on `κ` for a certified preconditioner, with slack.
pub const KAPPA_LIMIT: f64 = 2.25 + 1e-6;

struct Context {
    argv: Vec<String>,
    deterministic: bool,
}

fn exit_code(e: &HertaError) -> i32 {
    match e {
        HertaError::NoConvergence { .. } => 2,
        _ => 1,
    }
}

/// Parse `args` (including the program name) and run. Returns the exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(path) = &cli.from_manifest {
        if cli.command.is_some() {
            eprintln!("error: --from-manifest cannot be combined with a command");
            return 1;
        }
        return match RunManifest::load(path) {
            Ok(m) => {
                let mut again = vec![OsString::from("herta")];
                again.extend(m.argv.into_iter().map(OsString::from));
                run_from_args(again)
            }
            Err(e) => {
                eprintln!("error: {path:?}: {e}");
                1
            }
        };
    }
    let Some(command) = cli.command else {
        eprintln!("error: no command given; see --help");
        return 1;
    };
    let ctx = Context {
        argv: args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect(),
        deterministic: cli.deterministic || cli.threads == Some(1),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return 1;
        }
    };
    let result = pool.install(|| match &command {
        Command::Train(a) => cmd_train(a, &ctx),
        Command::Sparsify(a) => cmd_sparsify(a, &ctx),
        Command::Certify(a) => cmd_certify(a, &ctx),
        Command::Gen(a) => cmd_gen(a, &ctx),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| HertaError::Io(e.into()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_manifest<T: Serialize>(
    ctx: &Context,
    out: &Path,
    command: &str,
    config: &T,
    dataset: Vec<PathBuf>,
    seed: u64,
    mut outputs: Vec<PathBuf>,
) -> Result<()> {
    let path = out.join("manifest.json");
    outputs.push(path.clone());
    let manifest = RunManifest {
        command: command.into(),
        argv: ctx.argv.clone(),
        dataset,
        config: serde_json::to_value(config).map_err(|e| HertaError::Io(e.into()))?,
        seed,
        build: BUILD_ID.into(),
        outputs,
    };
    write_json(&path, &manifest)
}

fn load_spec(data: &DatasetArgs, lambda: f64, seed: u64) -> Result<(DatasetBundle, ModelSpec)> {
    let mut bundle = DatasetBundle::load(&data.graph, &data.features, data.labels.as_deref(), data.label_kind)?;
    if let Some(frac) = data.train_frac {
        bundle = bundle.with_train_fraction(frac, RngHandle::new(seed))?;
    }
    let mut spec = ModelSpec::new(bundle.graph.normalized_laplacian()?, lambda, bundle.x.clone(), bundle.y.clone())?;
    if let Some(mask) = &bundle.mask {
        spec = spec.with_mask(mask.clone())?;
    }
    Ok((bundle, spec))
}

fn dataset_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| "dataset".into(), |s| s.to_string_lossy().into_owned())
}

fn dataset_paths(data: &DatasetArgs) -> Vec<PathBuf> {
    let mut v = vec![data.graph.clone(), data.features.clone()];
    v.extend(data.labels.clone());
    v
}

fn cmd_train(a: &TrainArgs, ctx: &Context) -> Result<i32> {
    let (_, spec) = load_spec(&a.data, a.lambda, a.seed)?;
    let loss = match a.loss {
        LossArg::Mse => LossKind::Mse,
        LossArg::Ce => LossKind::Ce,
    };
    let reference = if a.oracle {
        if loss != LossKind::Mse {
            return Err(HertaError::InvalidConfig("--oracle needs --loss mse".into()));
        }
        Some(DenseOracle::new(&spec)?.optimum(&spec)?.1)
    } else {
        None
    };
    let optimizer = match a.optimizer {
        OptimizerArg::Gd => Optimizer::Gd,
        OptimizerArg::Adam => Optimizer::Adam(AdamParams {
            lr: a.lr,
            ..AdamParams::default()
        }),
    };
    let eta = match (a.optimizer, a.lr) {
        (OptimizerArg::Gd, Some(lr)) => StepSize::Fixed(lr),
        _ => StepSize::Auto,
    };
    let (mut result, pre) = match a.algo {
        Algo::Herta => {
            let mut cfg = HertaConfig::new(a.eps, a.seed);
            cfg.mu = a.mu;
            cfg.eta = eta;
            cfg.max_iter = a.iters;
            cfg.optimizer = optimizer;
            cfg.loss = loss;
            cfg.reference = reference;
            cfg.exact_trace = a.exact_trace;
            let pre = build_preconditioner(&spec, &cfg)?;
            (herta_train_with(&spec, &cfg, &pre)?, Some(pre))
        }
        Algo::Baseline => {
            let cfg = BaselineConfig {
                inner_eps: a.mu,
                outer_eta: eta,
                t_outer: a.iters,
                t_inner: a.inner_cap,
                inner: match a.inner {
                    InnerArg::Gd => InnerSolverKind::GradientDescent,
                    InnerArg::Sdd => InnerSolverKind::Sdd,
                },
                loss,
                optimizer,
                reference,
                exact_trace: a.exact_trace,
                seed: a.seed,
            };
            (train_baseline(&spec, &cfg, a.eps)?, None)
        }
    };
    if ctx.deterministic {
        result.trace.zero_timing();
        result.precond_build_ns = 0;
        result.train_ns = 0;
    }
    fs::create_dir_all(&a.out)?;
    let trace_path = a.out.join("loss.csv");
    let mut w = create(&trace_path)?;
    result.trace.write_csv(&mut w)?;
    w.flush()?;
    let weights_path = a.out.join("weights.csv");
    let mut w = create(&weights_path)?;
    write_matrix_csv(&result.w, &mut w)?;
    w.flush()?;

    let report = TrainReport {
        summary: RunSummary {
            algo: match a.algo {
                Algo::Herta => "herta".into(),
                Algo::Baseline => "baseline".into(),
            },
            dataset: dataset_name(&a.data.graph),
            lambda: a.lambda,
            eps: a.eps,
            seed: a.seed,
            iterations: result.iterations,
            final_loss: result.final_loss(),
            precond_build_ns: result.precond_build_ns,
            train_ns: result.train_ns,
        },
        loss: a.loss,
        converged: result.converged,
        reference_loss: reference,
        step_size: result.step_size,
        lipschitz: result.lipschitz,
        sketch_rows: pre.as_ref().map_or(0, |p| p.sketch_rows),
        sparsifier_edges: pre.as_ref().map_or(0, |p| p.sparsifier_edges),
    };
    let summary_path = a.out.join("summary.json");
    write_json(&summary_path, &report)?;
    write_manifest(
        ctx,
        &a.out,
        "train",
        a,
        dataset_paths(&a.data),
        a.seed,
        vec![trace_path, weights_path, summary_path],
    )?;
    if reference.is_some() && !result.converged {
        eprintln!("error: target not reached within {} iterations", a.iters);
        return Ok(2);
    }
    Ok(0)
}

fn cmd_sparsify(a: &SparsifyArgs, ctx: &Context) -> Result<i32> {
    let graph = load_edge_list(&a.graph, a.n)?.add_self_loops();
    let mut cfg = SparsifyConfig::new(a.eps, a.lambda, a.seed);
    cfg.c = a.c;
    cfg.validate()?;
    if a.certify && graph.n() > SPARSIFY_CERTIFY_LIMIT {
        return Err(HertaError::TooLargeForDense {
            n: graph.n(),
            limit: SPARSIFY_CERTIFY_LIMIT,
        });
    }
    let l_hat = graph.normalized_laplacian()?;
    let b_hat = graph.normalized_incidence()?;
    let out = sparsify(&l_hat, &b_hat, &cfg)?;

    let (mut certified, mut pencil_min, mut pencil_max) = (None, None, None);
    if a.certify {
        let shift = 1.0 / a.lambda;
        let lt = out.laplacian.scaled_plus_identity(1.0, shift).to_dense();
        let lh = l_hat.scaled_plus_identity(1.0, shift).to_dense();
        let ev = pencil_eigenvalues(&lt, &lh)?;
        let (lo, hi) = (ev[0], ev[ev.len() - 1]);
        certified = Some(lo >= 1.0 - a.eps && hi <= 1.0 + a.eps);
        pencil_min = Some(lo);
        pencil_max = Some(hi);
    }

    fs::create_dir_all(&a.out)?;
    let edges_path = a.out.join("sparsifier.txt");
    let mut w = create(&edges_path)?;
    for (u, v, wt) in out.weighted_edges(&b_hat) {
        writeln!(w, "{u} {v} {wt}")?;
    }
    w.flush()?;
    let report = SparsifyReport {
        n: graph.n(),
        m_in: graph.m(),
        m_out: out.edge_count(),
        samples: out.samples,
        sample_bound: sample_count(&cfg, out.n_lambda_estimate, graph.n()),
        n_lambda_estimate: out.n_lambda_estimate,
        certified,
        pencil_min,
        pencil_max,
    };
    let report_path = a.out.join("sparsify.json");
    write_json(&report_path, &report)?;
    write_manifest(ctx, &a.out, "sparsify", a, vec![a.graph.clone()], a.seed, vec![edges_path, report_path])?;
    if certified == Some(false) {
        eprintln!("warning: sparsifier certificate failed for this seed");
    }
    Ok(0)
}

fn cmd_certify(a: &CertifyArgs, ctx: &Context) -> Result<i32> {
    let x = crate::data::load_matrix_csv(&a.data.features)?;
    crate::oracle::check_dense(x.rows())?;
    let (_, spec) = load_spec(&a.data, a.lambda, a.seed)?;
    let trials = if a.exact { 1 } else { a.trials.max(1) };
    let mut rows = Vec::with_capacity(trials);
    for t in 0..trials {
        let seed = a.seed + t as u64;
        let pre = if a.exact {
            Preconditioner::exact(&spec)?
        } else {
            let mut cfg = HertaConfig::new(1e-6, seed);
            cfg.beta = a.beta;
            cfg.k_srht = a.k_srht;
            cfg.sketch_rows = a.sketch_rows.map(SrhtRows::Sampled);
            build_preconditioner(&spec, &cfg)?
        };
        let rep = certify_preconditioner(&spec, &pre)?;
        let kappa = conditioned_hessian_check(&spec, &pre.p_inv_sqrt)?;
        rows.push(CertifyTrial {
            seed,
            pencil_min: rep.min_pencil,
            pencil_max: rep.max_pencil,
            kappa,
            pencil_ok: rep.min_pencil >= 0.5 && rep.max_pencil <= 1.5,
            kappa_ok: kappa <= KAPPA_LIMIT,
        });
    }
    let rate = |f: fn(&CertifyTrial) -> bool| rows.iter().filter(|r| f(r)).count() as f64 / rows.len() as f64;
    let report = CertifyReport {
        n: spec.n(),
        d: spec.d(),
        lambda: a.lambda,
        exact: a.exact,
        pass_rate_lemma4: rate(|r| r.pencil_ok),
        pass_rate_kappa: rate(|r| r.kappa_ok),
        kappa_exceptions: rows.iter().filter(|r| r.pencil_ok && !r.kappa_ok).count(),
        kappa_max: rows.iter().map(|r| r.kappa).fold(0.0, f64::max),
        trials: rows,
    };
    fs::create_dir_all(&a.out)?;
    let path = a.out.join("certify.json");
    write_json(&path, &report)?;
    write_manifest(ctx, &a.out, "certify", a, dataset_paths(&a.data), a.seed, vec![path])?;
    Ok(0)
}

fn cmd_gen(a: &GenArgs, ctx: &Context) -> Result<i32> {
    let model = match a.model {
        ModelArg::Er => GraphModel::ErdosRenyi { n: a.n, p: a.p },
        ModelArg::Sbm => GraphModel::Sbm {
            n: a.n,
            k: a.k,
            p: a.p,
            q: a.q,
        },
        ModelArg::Path => GraphModel::Path { n: a.n },
        ModelArg::Triangle => GraphModel::Triangle,
    };
    if !(a.noise >= 0.0) {
        return Err(HertaError::InvalidConfig(format!("noise {} must be non-negative", a.noise)));
    }
    let rng = RngHandle::new(a.seed);
    let graph = generate_graph(model, rng)?;
    let (x, factors) = generate_features(graph.n(), a.d, a.cond, rng)?;
    let (y, classes) = generate_labels(&graph, a.lambda, &x, &factors, a.labels, a.c, a.noise, rng)?;

    fs::create_dir_all(&a.out)?;
    let graph_path = a.out.join("graph.txt");
    let mut w = create(&graph_path)?;
    graph.write_edge_list(&mut w)?;
    w.flush()?;
    let features_path = a.out.join("features.csv");
    let mut w = create(&features_path)?;
    write_matrix_csv(&x, &mut w)?;
    w.flush()?;
    let labels_path = a.out.join("labels.csv");
    let mut w = create(&labels_path)?;
    match &classes {
        Some(ids) => write_class_csv(ids, &mut w)?,
        None => write_matrix_csv(&y, &mut w)?,
    }
    w.flush()?;
    write_manifest(ctx, &a.out, "gen", a, Vec::new(), a.seed, vec![graph_path, features_path, labels_path])?;
    Ok(0)
}

/// Dense training problem for a generated dataset directory.
pub fn load_dataset_dir(dir: &Path, lambda: f64, kind: LabelKind) -> Result<ModelSpec> {
    let b = DatasetBundle::load(&dir.join("graph.txt"), &dir.join("features.csv"), Some(&dir.join("labels.csv")), kind)?;
    ModelSpec::new(b.graph.normalized_laplacian()?, lambda, b.x, b.y)
}

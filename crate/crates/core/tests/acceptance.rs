//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use common::{er, instance, random_matrix, random_spd};
use herta::baseline::{approx_gradient, inner_gd_solve, inner_iteration_bound, train_baseline, BaselineConfig, InnerSolverKind};
use herta::bench::paired_budget_run;
use herta::cli::load_dataset_dir;
use herta::data::{generate_graph, GenLabels, GraphModel, LabelKind};
use herta::herta::{build_preconditioner, herta_train, HertaConfig};
use herta::model::{ce_hessian_action, ce_loss_and_grad, exact_gradient, softmax_rows, ModelSpec};
use herta::optim::LossKind;
use herta::oracle::{exact_effective_dim, exact_leverage_scores, DenseOracle};
use herta::sketch::{pencil_eigenvalues, psi_approx, spd_condition_number, spd_power};
use herta::solver::{energy_norm, DenseInverse};
use herta::sparsifier::{sample_count, sparsify, SparsifyConfig};
use herta::{DenseMatrix, RngHandle};

type Verdict = (bool, String);
type Criterion<'a> = (u32, &'static str, Box<dyn Fn() -> Verdict + 'a>);

fn main() {
    let c3 = std::cell::OnceCell::new();
    let criteria: Vec<Criterion> = vec![
        (1, "sparsifier guarantee", Box::new(c1_sparsifier)),
        (2, "leverage scores sum to n_lambda", Box::new(c2_leverage_identity)),
        (3, "preconditioner certificate", Box::new(|| c3.get_or_init(certificate_trials).verdict3())),
        (4, "conditioned Hessian", Box::new(|| c3.get_or_init(certificate_trials).verdict4())),
        (5, "terminal loss within (1+eps) of optimum", Box::new(c5_main_guarantee)),
        (6, "robustness to feature conditioning", Box::new(c6_kappa_robustness)),
        (7, "log(1/eps) iteration scaling", Box::new(c7_log_eps)),
        (8, "inner solver rate", Box::new(c8_inner_rate)),
        (9, "gradient fidelity", Box::new(c9_gradients)),
        (10, "squared approximation", Box::new(c10_squaring)),
        (11, "50-iteration benchmark", Box::new(c11_benchmark)),
        (12, "CLI determinism", Box::new(c12_determinism)),
    ];
    let mut failed = 0;
    for (id, name, f) in &criteria {
        let t = Instant::now();
        let (pass, detail) = match std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)) {
            Ok(v) => v,
            Err(e) => (false, format!("panicked: {:?}", e.downcast_ref::<String>().map(String::as_str).or(e.downcast_ref::<&str>().copied()))),
        };
        failed += usize::from(!pass);
        println!(
            "criterion {id:>2} {} {name}: {detail} [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

fn shifted_dense(l: &herta::SparseSymmetric, shift: f64) -> DenseMatrix {
    l.scaled_plus_identity(1.0, shift).to_dense()
}

fn c1_sparsifier() -> Verdict {
    let (lambda, eps) = (4.0, 0.25);
    let start = Instant::now();
    let mut spectral_ok = 0;
    let mut over_bound = 0;
    let mut worst = (f64::INFINITY, 0.0f64);
    for seed in 0..100u64 {
        let g = generate_graph(er(200, 0.1), RngHandle::new(1000 + seed)).unwrap();
        let l = g.normalized_laplacian().unwrap();
        let b = g.normalized_incidence().unwrap();
        let cfg = SparsifyConfig::new(eps, lambda, seed);
        let out = sparsify(&l, &b, &cfg).unwrap();
        let ev = pencil_eigenvalues(&shifted_dense(&out.laplacian, 1.0 / lambda), &shifted_dense(&l, 1.0 / lambda)).unwrap();
        let (lo, hi) = (ev[0], ev[ev.len() - 1]);
        worst = (worst.0.min(lo), worst.1.max(hi));
        spectral_ok += usize::from(lo >= 1.0 - eps && hi <= 1.0 + eps);
        over_bound += usize::from(out.edge_count() as u64 > sample_count(&cfg, out.n_lambda_estimate, g.n()));
    }
    let secs = start.elapsed().as_secs_f64();
    (
        spectral_ok >= 95 && over_bound == 0 && secs <= 10.0,
        format!(
            "{spectral_ok}/100 seeds in [0.75, 1.25] (extremes {:.4}, {:.4}), {over_bound} over the edge bound, {secs:.2}s total",
            worst.0, worst.1
        ),
    )
}

fn c2_leverage_identity() -> Verdict {
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let n = 20 + 9 * seed as usize;
        let p = 0.02 + 0.01 * (seed % 7) as f64;
        let lambda = [0.5, 1.0, 4.0, 20.0][seed as usize % 4];
        let g = generate_graph(er(n, p), RngHandle::new(seed)).unwrap();
        let l = g.normalized_laplacian().unwrap();
        let scores = exact_leverage_scores(&l, &g.normalized_incidence().unwrap(), lambda).unwrap();
        let diff = (scores.iter().sum::<f64>() - exact_effective_dim(&l, lambda).unwrap()).abs();
        worst = worst.max(diff);
    }
    (worst <= 1e-9, format!("max |sum l - n_lambda| = {worst:.2e} over 20 graphs"))
}

struct FixtureTrials {
    name: &'static str,
    rows: usize,
    n_pad: usize,
    pencil_ok: usize,
    kappa_exceptions: usize,
    kappa_max_when_ok: f64,
}

struct CertificateTrials {
    fixtures: Vec<FixtureTrials>,
    secs: f64,
}

fn certificate_trials() -> CertificateTrials {
    let start = Instant::now();
    let fixtures: [(&str, GraphModel, usize, f64, f64); 5] = [
        ("triangle", GraphModel::Triangle, 3, 1.0, 1.0),
        ("er200", er(200, 0.1), 8, 1e3, 1.0),
        ("sbm300", GraphModel::Sbm { n: 300, k: 3, p: 0.1, q: 0.01 }, 16, 1e2, 4.0),
        ("path100", GraphModel::Path { n: 100 }, 4, 10.0, 2.0),
        ("er500", er(500, 0.02), 12, 1e4, 8.0),
    ];
    let mut out = Vec::new();
    for (k, (name, model, d, cond, lambda)) in fixtures.into_iter().enumerate() {
        let inst = instance(model, d, cond, lambda, GenLabels::Onehot, 1, 0.0, 50 + k as u64);
        let t = DenseOracle::new(&inst.spec).unwrap().hessian();
        let mut f = FixtureTrials {
            name,
            rows: 0,
            n_pad: inst.spec.n().next_power_of_two(),
            pencil_ok: 0,
            kappa_exceptions: 0,
            kappa_max_when_ok: 0.0,
        };
        for seed in 0..100u64 {
            let pre = build_preconditioner(&inst.spec, &HertaConfig::new(1e-6, seed)).unwrap();
            f.rows = pre.sketch_rows;
            let rep = psi_approx(&t, &pre.p).unwrap();
            if rep.min_pencil >= 0.5 && rep.max_pencil <= 1.5 {
                f.pencil_ok += 1;
                let c = pre.p_inv_sqrt.matmul(&t).unwrap().matmul(&pre.p_inv_sqrt).unwrap();
                let kappa = spd_condition_number(&c).unwrap();
                f.kappa_max_when_ok = f.kappa_max_when_ok.max(kappa);
                f.kappa_exceptions += usize::from(kappa > 2.25 + 1e-6);
            }
        }
        out.push(f);
    }
    CertificateTrials {
        fixtures: out,
        secs: start.elapsed().as_secs_f64(),
    }
}

impl CertificateTrials {
    fn verdict3(&self) -> Verdict {
        let pass = self.fixtures.iter().all(|f| f.pencil_ok >= 95) && self.secs <= 30.0;
        let parts: Vec<String> = self
            .fixtures
            .iter()
            .map(|f| format!("{} {}/100 ({} sketch rows, padded n {})", f.name, f.pencil_ok, f.rows, f.n_pad))
            .collect();
        (pass, format!("{}; {:.1}s", parts.join(", "), self.secs))
    }

    fn verdict4(&self) -> Verdict {
        let exceptions: usize = self.fixtures.iter().map(|f| f.kappa_exceptions).sum();
        let worst = self.fixtures.iter().map(|f| f.kappa_max_when_ok).fold(0.0, f64::max);
        (exceptions == 0, format!("{exceptions} exceptions, max kappa {worst:.6}"))
    }
}

fn optimum(spec: &ModelSpec) -> (DenseOracle, f64) {
    let o = DenseOracle::new(spec).unwrap();
    let best = o.optimum(spec).unwrap().1;
    (o, best)
}

/// HERTA to target `eps` against a dense optimum; returns
/// `(iterations, final dense loss, optimum, initial loss)`.
fn herta_to_target(spec: &ModelSpec, eps: f64, seed: u64) -> (usize, f64, f64, f64, bool) {
    let (o, best) = optimum(spec);
    let mut cfg = HertaConfig::new(eps, seed);
    cfg.reference = Some(best);
    cfg.exact_trace = true;
    let r = herta_train(spec, &cfg).unwrap();
    let fin = o.mse(spec, &r.w).unwrap();
    (r.iterations, fin, best, r.trace.losses()[0], r.converged)
}

fn c5_main_guarantee() -> Verdict {
    let mut runs = 0;
    let mut failures = 0;
    let mut worst_rel = 0.0f64;
    for (kind, labels, noise) in [("planted", GenLabels::Planted, 0.0), ("random", GenLabels::Onehot, 0.0)] {
        for seed in 0..10u64 {
            let inst = instance(er(150, 0.05), 8, 100.0, 2.0, labels, 2, noise, 300 + seed);
            for eps in [1e-3, 1e-6] {
                runs += 1;
                let (_, fin, best, l0, _) = herta_to_target(&inst.spec, eps, seed);
                let allowed = eps * best.max(eps * l0);
                if fin - best > allowed {
                    failures += 1;
                    eprintln!("  {kind} seed {seed} eps {eps}: loss {fin:.3e} optimum {best:.3e}");
                }
                worst_rel = worst_rel.max((fin - best) / allowed);
            }
        }
    }
    (
        failures == 0,
        format!(
            "{failures}/{runs} runs outside l* + eps*max(l*, eps*l0) (l* = 0 floors at eps^2*l0); worst excess/allowed {worst_rel:.3}"
        ),
    )
}

fn c6_kappa_robustness() -> Verdict {
    const CAP: usize = 100_000;
    let kappas = [1.0, 1e2, 1e3];
    let mut herta_iters = Vec::new();
    let mut base = [Vec::new(), Vec::new(), Vec::new()];
    let mut censored = 0;
    for seed in 0..3u64 {
        for (k, &kappa) in kappas.iter().enumerate() {
            let inst = instance(er(100, 0.1), 8, kappa, 1.0, GenLabels::Planted, 1, 0.01, 600 + seed);
            let (it, _, best, _, conv) = herta_to_target(&inst.spec, 1e-6, seed);
            assert!(conv, "HERTA missed the target at kappa {kappa}");
            herta_iters.push(it);
            if k == 1 {
                continue;
            }
            let r = train_baseline(
                &inst.spec,
                &BaselineConfig {
                    t_outer: CAP,
                    inner: InnerSolverKind::Sdd,
                    reference: Some(best),
                    exact_trace: true,
                    seed,
                    ..BaselineConfig::default()
                },
                1e-6,
            )
            .unwrap();
            censored += usize::from(!r.converged);
            base[k].push(r.iterations);
        }
    }
    let hmax = *herta_iters.iter().max().unwrap() as f64;
    let hmin = *herta_iters.iter().min().unwrap() as f64;
    let b1 = *base[0].iter().max().unwrap() as f64;
    let b3 = *base[2].iter().min().unwrap() as f64;
    (
        hmax / hmin <= 3.0 && b3 / b1 >= 50.0,
        format!(
            "HERTA iterations {:?} (spread {:.2}x); baseline kappa=1 {:?}, kappa=1e3 {:?} (ratio >= {:.0}x, {censored} runs stopped at the {CAP} cap)",
            herta_iters,
            hmax / hmin,
            base[0],
            base[2],
            b3 / b1
        ),
    )
}

fn c7_log_eps() -> Verdict {
    let mut worst = 0.0f64;
    let mut pairs = Vec::new();
    for seed in 0..10u64 {
        let inst = instance(er(200, 0.05), 8, 100.0, 1.0, GenLabels::Planted, 1, 0.05, 700 + seed);
        let (a, ..) = herta_to_target(&inst.spec, 1e-3, seed);
        let (b, ..) = herta_to_target(&inst.spec, 1e-6, seed);
        worst = worst.max(b as f64 / a.max(1) as f64);
        pairs.push((a, b));
    }
    (worst <= 2.5, format!("iterations (1e-3, 1e-6) {pairs:?}; max ratio {worst:.2}"))
}

fn c8_inner_rate() -> Verdict {
    let mut runs = 0;
    let mut over = 0;
    let mut worst_err = 0.0f64;
    let mut worst_frac = 0.0f64;
    for seed in 0..20u64 {
        let g = generate_graph(er(60 + 5 * seed as usize, 0.08), RngHandle::new(800 + seed)).unwrap();
        let l = g.normalized_laplacian().unwrap();
        let u = random_matrix(g.n(), 1, seed).col(0);
        for lambda in [1.0, 2.0, 4.0] {
            let h = l.scaled_plus_identity(lambda, 1.0);
            let exact = DenseInverse::new(&h).unwrap().matrix().matvec(&u).unwrap();
            for eps in [1e-4, 1e-8] {
                runs += 1;
                let (v, iters) = inner_gd_solve(&h, lambda, &u, eps, 100_000_000).unwrap();
                let e: Vec<f64> = v.iter().zip(&exact).map(|(a, b)| a - b).collect();
                let rel = energy_norm(&h, &e) / energy_norm(&h, &exact);
                let bound = inner_iteration_bound(lambda, eps);
                over += usize::from(iters as f64 > bound || rel > eps);
                worst_err = worst_err.max(rel / eps);
                worst_frac = worst_frac.max(iters as f64 / bound);
            }
        }
    }
    (
        over == 0,
        format!("{over}/{runs} violations; max iterations/bound {worst_frac:.3}, max H-error/eps {worst_err:.3}"),
    )
}

fn dense_sub_loss(o: &DenseOracle, spec: &ModelSpec, i: usize, w: &[f64]) -> f64 {
    let z = o.masked_a.matvec(w).unwrap();
    let y = spec.masked_y().col(i);
    0.5 * z.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
}

fn dense_ce(o: &DenseOracle, spec: &ModelSpec, w: &DenseMatrix) -> f64 {
    let z = o.a.matmul(w).unwrap();
    let s = softmax_rows(&z);
    (0..z.rows())
        .map(|u| {
            let k = (0..spec.c()).find(|&j| spec.y().get(u, j) == 1.0).unwrap();
            -s.get(u, k).ln()
        })
        .sum()
}

fn c9_gradients() -> Verdict {
    let mut worst9 = 0.0f64;
    let mut worst11 = 0.0f64;
    let mut worst_ce = 0.0f64;
    let mut worst_hv = 0.0f64;
    for probe in 0..50u64 {
        let inst = instance(er(40, 0.15), 4, 10.0, 1.0 + (probe % 3) as f64, GenLabels::Planted, 2, 0.3, 900 + probe);
        let spec = match probe % 2 {
            0 => inst.spec,
            _ => {
                let mask = (0..40).map(|u| u % 5 != 0).collect();
                inst.spec.with_mask(mask).unwrap()
            }
        };
        let o = DenseOracle::new(&spec).unwrap();
        let w = random_matrix(4, 1, probe).col(0);
        let dir = random_matrix(4, 1, probe + 10_000).col(0);
        let sub = spec.sub_problem(0).unwrap();
        let g = exact_gradient(&spec, &sub, &w).unwrap();
        let h = 1e-4;
        let shift = |s: f64| -> Vec<f64> { w.iter().zip(&dir).map(|(a, b)| a + s * b).collect() };
        let fd = (dense_sub_loss(&o, &spec, 0, &shift(h)) - dense_sub_loss(&o, &spec, 0, &shift(-h))) / (2.0 * h);
        let gd: f64 = g.iter().zip(&dir).map(|(a, b)| a * b).sum();
        let scale = herta::dense::norm(&g) * herta::dense::norm(&dir);
        worst9 = worst9.max((fd - gd).abs() / scale);

        let approx = approx_gradient(&spec, &sub, &w, &DenseInverse::new(spec.h()).unwrap()).unwrap();
        let diff = approx.iter().zip(&g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst11 = worst11.max(diff / herta::dense::norm(&g));

        // cross-entropy on one-hot labels
        let ce = instance(er(40, 0.15), 4, 10.0, 1.0, GenLabels::Onehot, 3, 0.0, 950 + probe);
        let co = DenseOracle::new(&ce.spec).unwrap();
        let wm = random_matrix(4, 3, probe + 20_000);
        let (_, grad) = ce_loss_and_grad(&ce.spec, &wm, 1e-13).unwrap();
        let dm = random_matrix(4, 3, probe + 30_000);
        let plus = wm.add(&dm.scale(h)).unwrap();
        let minus = wm.sub(&dm.scale(h)).unwrap();
        let fd = (dense_ce(&co, &ce.spec, &plus) - dense_ce(&co, &ce.spec, &minus)) / (2.0 * h);
        let gd: f64 = grad.data().iter().zip(dm.data()).map(|(a, b)| a * b).sum();
        worst_ce = worst_ce.max((fd - gd).abs() / (grad.frobenius_norm() * dm.frobenius_norm()));

        let i = (probe % 3) as usize;
        let v = dm.col(i);
        let hv = ce_hessian_action(&ce.spec, &wm, i, &v).unwrap();
        let mut wp = wm.clone();
        let mut wn = wm.clone();
        for (r, vr) in v.iter().enumerate() {
            wp.set(r, i, wm.get(r, i) + h * vr);
            wn.set(r, i, wm.get(r, i) - h * vr);
        }
        let gp = ce_loss_and_grad(&ce.spec, &wp, 1e-13).unwrap().1.col(i);
        let gn = ce_loss_and_grad(&ce.spec, &wn, 1e-13).unwrap().1.col(i);
        let fd_hv: Vec<f64> = gp.iter().zip(&gn).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        let err = fd_hv.iter().zip(&hv).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        worst_hv = worst_hv.max(err / herta::dense::norm(&hv).max(1e-300));
    }
    (
        worst9 <= 1e-5 && worst11 <= 1e-12 && worst_ce <= 1e-5 && worst_hv <= 1e-4,
        format!(
            "50 probes: MSE grad vs FD {worst9:.1e}, solver grad vs dense {worst11:.1e}, CE grad vs FD {worst_ce:.1e}, CE Hessian action vs FD {worst_hv:.1e}"
        ),
    )
}

fn c10_squaring() -> Verdict {
    let mut failures = 0;
    let mut worst = 0.0f64;
    for t in 0..100u64 {
        let d = 8;
        let kappa_target = 10f64.powf(3.0 * (t % 10) as f64 / 9.0);
        let sigma = random_spd(d, kappa_target, 2000 + t);
        let kappa = spd_condition_number(&sigma).unwrap();
        let beta = (1.0 / 16.0) * (1.0 - (t % 4) as f64 / 4.0);
        let e_rate = beta / kappa;
        // symmetric perturbation with spectral norm at most e/(1+e) so that
        // both orientations of the pencil stay inside [1-e, 1+e]
        let raw = random_matrix(d, d, 3000 + t);
        let sym = DenseMatrix::from_fn(d, d, |i, j| raw.get(i, j) + raw.get(j, i));
        let top = sym.symmetric_eigenvalues().unwrap().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let pert = sym.scale(e_rate / (1.0 + e_rate) / top);
        let half = spd_power(&sigma, 0.5).unwrap();
        let tilde = half.matmul(&DenseMatrix::identity(d).add(&pert).unwrap()).unwrap().matmul(&half).unwrap();
        let tilde = DenseMatrix::from_fn(d, d, |i, j| 0.5 * (tilde.get(i, j) + tilde.get(j, i)));
        let before = psi_approx(&sigma, &tilde).unwrap();
        let before_rev = psi_approx(&tilde, &sigma).unwrap();
        assert!(before.check_approx(e_rate * (1.0 + 1e-9)) && before_rev.check_approx(e_rate * (1.0 + 1e-9)));
        let s2 = sigma.matmul(&sigma).unwrap();
        let t2 = tilde.matmul(&tilde).unwrap();
        let after = psi_approx(&s2, &t2).unwrap();
        let after_rev = psi_approx(&t2, &s2).unwrap();
        let dev = [1.0 - after.min_pencil, after.max_pencil - 1.0, 1.0 - after_rev.min_pencil, after_rev.max_pencil - 1.0]
            .into_iter()
            .fold(0.0f64, f64::max);
        worst = worst.max(dev / (8.0 * beta));
        failures += usize::from(!(after.check_approx(8.0 * beta) && after_rev.check_approx(8.0 * beta)));
    }
    let (gamma, delta) = (1e4, 1e-2);
    let c = (1.0f64 - delta * delta).sqrt();
    let rot = DenseMatrix::from_rows(&[vec![c, -delta], vec![delta, c]]).unwrap();
    let sigma = DenseMatrix::diag(&[gamma, 1.0]);
    let tilde = rot.matmul(&sigma).unwrap().matmul(&rot.transpose()).unwrap();
    let tilde = DenseMatrix::from_fn(2, 2, |i, j| 0.5 * (tilde.get(i, j) + tilde.get(j, i)));
    let psi1 = psi_approx(&sigma, &tilde).unwrap().psi();
    let psi2 = psi_approx(&sigma.matmul(&sigma).unwrap(), &tilde.matmul(&tilde).unwrap()).unwrap().psi();
    let ratio = psi2 / psi1;
    (
        failures == 0 && ratio >= gamma / 10.0,
        format!(
            "{failures}/100 squared pairs outside 8*beta (max deviation/(8*beta) {worst:.3}); worst case psi ratio {ratio:.1} vs gamma/10 = {}",
            gamma / 10.0
        ),
    )
}

fn c11_benchmark() -> Verdict {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let mut ok = true;
    let mut parts = Vec::new();
    for lambda in [1.0, 20.0] {
        for (loss, dir, kind) in [
            (LossKind::Mse, "ill_conditioned", LabelKind::Numeric),
            (LossKind::Ce, "ill_conditioned_ce", LabelKind::Class),
        ] {
            let spec = load_dataset_dir(&data.join(format!("{dir}_l{lambda}")), lambda, kind).unwrap();
            let (h, b) = paired_budget_run(&spec, loss, 50, 1e-6, 0).unwrap();
            let ratio = h.final_loss() / b.final_loss();
            ok &= ratio <= 0.1;
            parts.push(format!("{loss:?} lambda {lambda}: {ratio:.2e}"));
        }
    }
    (ok, format!("HERTA/baseline final loss {}", parts.join(", ")))
}

fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| {
            let bytes = std::fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    files.sort();
    files
}

fn herta_cmd(args: &[&str], cwd: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_herta"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap_or(-1)
}

fn c12_determinism() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let cwd = tmp.path();
    let data = ["--graph", "gen/graph.txt", "--features", "gen/features.csv", "--labels", "gen/labels.csv"];
    let with = |head: &[&'static str], tail: &[&'static str]| -> Vec<&'static str> {
        let mut v = vec!["--threads", "1"];
        v.extend_from_slice(head);
        v.extend_from_slice(tail);
        v
    };
    let commands: Vec<(&str, Vec<&str>)> = vec![
        ("gen", with(&["gen", "--model", "sbm", "--n", "80", "--k", "2", "--p", "0.2", "--d", "5", "--cond", "50", "--labels", "planted-class", "--c", "3", "--seed", "4", "--out", "gen"], &[])),
        ("sparsify", with(&["sparsify", "--graph", "gen/graph.txt", "--lambda", "2", "--eps", "0.25", "--seed", "3", "--certify", "--out", "sp"], &[])),
        ("certify", with(&["certify", "--lambda", "2", "--trials", "5", "--out", "cert"], &data)),
        ("train", with(&["train", "--algo", "herta", "--loss", "ce", "--lambda", "2", "--iters", "30", "--seed", "7", "--out", "th"], &data)),
        ("train", with(&["train", "--algo", "baseline", "--loss", "mse", "--label-kind", "numeric", "--lambda", "2", "--iters", "30", "--seed", "7", "--out", "tb"], &data)),
        ("train", with(&["train", "--algo", "herta", "--optimizer", "adam", "--loss", "ce", "--train-frac", "0.8", "--iters", "30", "--out", "ta"], &data)),
    ];
    let mut problems = Vec::new();
    for (name, args) in &commands {
        let out = cwd.join(args[args.iter().position(|a| *a == "--out").unwrap() + 1]);
        let code = herta_cmd(args, cwd);
        if code != 0 {
            problems.push(format!("{name} exited {code}"));
            continue;
        }
        let first = snapshot(&out);
        herta_cmd(args, cwd);
        if snapshot(&out) != first {
            problems.push(format!("{name} differs on rerun"));
        }
        let manifest = out.join("manifest.json");
        let code = herta_cmd(&["--from-manifest", manifest.to_str().unwrap()], cwd);
        if code != 0 || snapshot(&out) != first {
            problems.push(format!("{name} differs when replayed from its manifest"));
        }
    }
    (
        problems.is_empty(),
        if problems.is_empty() {
            format!("{} commands byte-identical on rerun and manifest replay", commands.len())
        } else {
            problems.join("; ")
        },
    )
}

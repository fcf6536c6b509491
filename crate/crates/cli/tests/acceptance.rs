//! Acceptance checks, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so every line is printed even when all
//! checks pass; exits non-zero if any check fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::Instant;

use qru_cli::config::RunConfig;
use qru_cli::pipeline::train_run;
use qru_core::analysis::{ensemble_kl, evenness_gap, hypothesis_curve, spectrum_fit};
use qru_core::circuit::{forward, gradient, CircuitSpec, EncodingScheme};
use qru_core::dataio::{generate_synthetic, SynthConfig};
use qru_core::hpo::{bracket_schedule, gp_posterior, hyperband_search, GpModel, HpoConfig, HpoSpace, HyperbandOptions, SquaredExponential};
use qru_core::qcore::{haar_state_from_rng, PureState};
use qru_core::training::{optimizer_step, trainability, Optimizer, OptimizerKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn gradient_suite() -> Check {
    let start = Instant::now();
    let layouts = ["xyx", "yzy", "zxz", "xzx", "xyz", "zyx", "yxz"];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let axes = layouts[case % layouts.len()];
        let ppi = 1 + case % 5;
        let depth = rng.random_range(1..=6);
        let n_features = rng.random_range(1..=3);
        let spec = CircuitSpec::new(depth, n_features, EncodingScheme::from_axes(axes, ppi).unwrap()).unwrap();
        let params: Vec<f64> = (0..spec.param_count()).map(|_| rng.random_range(-PI..PI)).collect();
        let x: Vec<f64> = (0..n_features).map(|_| rng.random_range(-PI..PI)).collect();
        let g = gradient(&spec, &params, &x).unwrap();
        let eps = 1e-6;
        for k in 0..params.len() {
            let mut hi = params.clone();
            let mut lo = params.clone();
            hi[k] += eps;
            lo[k] -= eps;
            let fd = (forward(&spec, &hi, &x).unwrap() - forward(&spec, &lo, &x).unwrap()) / (2.0 * eps);
            worst = worst.max((g[k] - fd).abs() / fd.abs().max(1.0));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst < 1e-5 && secs < 10.0, format!("worst relative error {worst:.2e}, {secs:.2}s"))
}

fn evenness() -> Check {
    let start = Instant::now();
    let spec = CircuitSpec::new(10, 1, EncodingScheme::from_axes("xyx", 3).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let p: Vec<f64> = (0..spec.param_count()).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        worst = worst.max(evenness_gap(&spec, &p, (-PI, PI), 101).unwrap());
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst < 1e-9 && secs < 5.0, format!("largest gap {worst:.2e}, {secs:.2}s"))
}

fn two_steps(kind: OptimizerKind) -> [f64; 2] {
    let opt = Optimizer::new(kind);
    let mut st = opt.init_state(1);
    let mut p = vec![1.0];
    optimizer_step(&opt, &mut st, &mut p, &[0.5], 0.1).unwrap();
    let first = p[0];
    optimizer_step(&opt, &mut st, &mut p, &[-0.25], 0.1).unwrap();
    [first, p[0]]
}

/// θ₀ = 1, lr = 0.1, g = 0.5 then −0.25, default constants.
fn optimizer_oracles() -> Check {
    let e: f64 = 1e-8;
    let (lr, g1, g2) = (0.1, 0.5, -0.25);
    let adam_v2: f64 = (0.999 * 0.00025 + 0.001 * 0.0625) / (1.0 - 0.998001);
    let adam_m2 = 0.02 / 0.19;

    let rms1 = 1.0 - lr * g1 / (0.025f64 + e).sqrt();
    let adam1 = 1.0 - lr * 0.5 / (0.5 + e);
    let adamw1 = 0.999 - lr * 0.5 / (0.5 + e);
    let adamax1 = 1.0 - lr / 0.1 * 0.05 / (0.5 + e);
    let nadam1 = 1.0 - lr * (0.9 * 0.05 / 0.19 + 0.5) / (0.25f64.sqrt() + e);
    let adagrad1 = 1.0 - lr * 0.5 / (0.5 + e);
    let eg1 = 0.025;
    let d1 = -(e.sqrt() / (eg1 + e).sqrt()) * g1;
    let eg2 = 0.9 * eg1 + 0.1 * 0.0625;
    let d2 = -((0.1 * d1 * d1 + e).sqrt() / (eg2 + e).sqrt()) * g2;

    let expected = [
        (OptimizerKind::Sgd, [0.95, 0.975]),
        (OptimizerKind::RmsProp, [rms1, rms1 - lr * g2 / (0.9 * 0.025 + 0.1 * 0.0625 + e).sqrt()]),
        (OptimizerKind::Adam, [adam1, adam1 - lr * adam_m2 / (adam_v2.sqrt() + e)]),
        (OptimizerKind::AdamW, [adamw1, adamw1 * 0.999 - lr * adam_m2 / (adam_v2.sqrt() + e)]),
        (OptimizerKind::Adamax, [adamax1, adamax1 - lr / 0.19 * 0.02 / (0.4995 + e)]),
        (OptimizerKind::Nadam, [nadam1, nadam1 - lr * (0.9 * 0.02 / 0.271 + 0.1 * g2 / 0.19) / (adam_v2.sqrt() + e)]),
        (OptimizerKind::Adagrad, [adagrad1, adagrad1 + lr * 0.25 / (0.3125f64.sqrt() + e)]),
        (OptimizerKind::Adadelta, [1.0 + d1, 1.0 + d1 + d2]),
    ];
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for (kind, want) in expected {
        let got = two_steps(kind);
        let err = (got[0] - want[0]).abs().max((got[1] - want[1]).abs());
        worst = worst.max(err);
        if err >= 1e-10 {
            bad.push(kind.name());
        }
    }
    let adam_sign = (1.0 - two_steps(OptimizerKind::Adam)[0] - 0.1).abs() < 1e-8;
    ensure(bad.is_empty() && adam_sign, format!("8 optimizers, worst error {worst:.1e}{}", if bad.is_empty() { String::new() } else { format!(", off: {bad:?}") }))
}

fn trainability_check() -> Check {
    let mut ok = true;
    for e in 1usize..=100 {
        let curve: Vec<f64> = (0..=e).map(|i| 1.0 - i as f64 / e as f64).collect();
        ok &= trainability(&curve).unwrap() == e as f64 / 2.0;
    }
    ensure(ok, "linear 1 -> 0 over E = 1..100 epochs gives E/2 exactly".into())
}

fn gp_closed_forms() -> Check {
    let k = SquaredExponential::default();
    let j = 1e-8;
    let prior = gp_posterior(&GpModel::prior(k, j).unwrap(), &[0.2, 0.4]).unwrap();
    let x = vec![0.3, 0.6];
    let one = GpModel::condition(k, j, vec![x.clone()], vec![0.7]).unwrap();
    let (mu1, _) = gp_posterior(&one, &x).unwrap();

    let xs = vec![vec![0.1, 0.9], vec![0.5, 0.2]];
    let ys = [0.4, -0.3];
    let two = GpModel::condition(k, j, xs.clone(), ys.to_vec()).unwrap();
    let q = [0.35, 0.5];
    let (a, b, d) = (k.eval(&xs[0], &xs[0]) + j, k.eval(&xs[0], &xs[1]), k.eval(&xs[1], &xs[1]) + j);
    let det = a * d - b * b;
    let kx = [k.eval(&xs[0], &q), k.eval(&xs[1], &q)];
    let w = [(d * kx[0] - b * kx[1]) / det, (a * kx[1] - b * kx[0]) / det];
    let mu = w[0] * ys[0] + w[1] * ys[1];
    let var = k.eval(&q, &q) - (w[0] * kx[0] + w[1] * kx[1]);
    let (pm, pv) = gp_posterior(&two, &q).unwrap();
    let err2 = (pm - mu).abs().max((pv - var).abs());
    ensure(
        prior == (0.0, k.signal_var) && (mu1 - 0.7).abs() < 1e-6 && err2 < 1e-10,
        format!("prior {prior:?}, one-point error {:.1e}, two-point error {err2:.1e}", (mu1 - 0.7).abs()),
    )
}

fn hyperband_accounting() -> Check {
    let plans: Vec<(usize, usize)> = bracket_schedule(30, 3).unwrap().iter().map(|p| (p.n, p.r)).collect();
    let obj = |c: &HpoConfig, budget: usize| Ok(c.depth as f64 + c.lr + 1.0 / budget as f64);
    let h = hyperband_search(&HpoSpace::standard(), obj, &HyperbandOptions::default()).unwrap();
    let max_budget = h.trials.iter().map(|t| t.budget).max().unwrap_or(0);
    ensure(
        plans == [(27, 1), (12, 3), (6, 10), (4, 30)] && max_budget <= 30,
        format!("brackets {plans:?}, {} evaluations, largest budget {max_budget}", h.trials.len()),
    )
}

fn expressibility_anchors() -> Check {
    let start = Instant::now();
    let haar: f64 = ensemble_kl(5000, 75, 0, |rng| Ok(haar_state_from_rng(rng))).unwrap();
    let fixed: f64 = ensemble_kl(5000, 75, 0, |_| Ok(PureState::zero())).unwrap();
    let secs = start.elapsed().as_secs_f64();
    ensure(
        haar < 0.05 && (fixed - 75f64.ln()).abs() < 1e-6 && secs < 30.0,
        format!("Haar KL {haar:.4}, fixed-state KL {fixed:.6} (ln 75 = {:.6}), {secs:.2}s", 75f64.ln()),
    )
}

fn spectrum() -> Check {
    let spec = CircuitSpec::new(3, 1, EncodingScheme::from_axes("xyx", 3).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut p: Vec<f64> = (0..spec.param_count()).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    for l in 0..3 {
        p[3 * l + 1] = 1.0;
    }
    let curve = hypothesis_curve(&spec, &p, (-PI, PI), 129).unwrap();
    let r3 = spectrum_fit(&curve, 3).unwrap().residual_rms;
    let r2 = spectrum_fit(&curve, 2).unwrap().residual_rms;
    ensure(r3 < 1e-8 && r2 >= 10.0 * r3, format!("residual {r3:.1e} at F = 3, {r2:.1e} at F = 2"))
}

fn baseline_acc(depth: usize, seed: u64, norm: (f64, f64)) -> f64 {
    let ds = generate_synthetic(&SynthConfig::default(), 42).unwrap();
    let mut cfg = RunConfig { depth, seed, ..Default::default() };
    cfg.normalization.lo = norm.0;
    cfg.normalization.hi = norm.1;
    train_run(&ds, &cfg).unwrap().1.final_test_acc()
}

fn learning_trend() -> (Check, Vec<f64>) {
    let start = Instant::now();
    let d4: Vec<f64> = (0..3).map(|s| baseline_acc(4, s, (-PI, PI))).collect();
    let d1: Vec<f64> = (0..3).map(|s| baseline_acc(1, s, (-PI, PI))).collect();
    let (m4, m1) = (median(d4.clone()), median(d1));
    let secs = start.elapsed().as_secs_f64();
    (
        ensure(
            m4 >= 0.90 && m4 - m1 >= 0.03 && secs < 900.0,
            format!("median test accuracy depth 4 {m4:.4}, depth 1 {m1:.4}, {secs:.1}s"),
        ),
        d4,
    )
}

fn normalization_equivalence(pm_pi: &[f64]) -> Check {
    let shifted: Vec<f64> = (0..3).map(|s| baseline_acc(4, s as u64, (0.0, 2.0 * PI))).collect();
    let diffs: Vec<f64> = pm_pi.iter().zip(&shifted).map(|(a, b)| (a - b).abs()).collect();
    let m = median(diffs);
    ensure(m <= 0.02, format!("median |acc[-pi,pi] - acc[0,2pi]| = {m:.4} at depth 4"))
}

fn qru(args: &[&str]) {
    let status = Command::new(env!("CARGO_BIN_EXE_qru"))
        .args(args)
        .stdout(Stdio::null())
        .status()
        .expect("spawn qru");
    assert!(status.success(), "qru {args:?} failed");
}

fn determinism() -> Check {
    let mut bodies: Vec<Vec<Vec<u8>>> = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
        let data = p("d.csv");
        qru(&["gen-data", "--out", &data, "--n", "60", "--seed", "42"]);
        qru(&["train", "--data", &data, "--out", &p("r.json"), "--curves", &p("c.csv"), "--seed", "3"]);
        qru(&["sweep", "--data", &data, "--dim", "depth", "--values", "1,2", "--repeats", "2", "--out", &p("s.csv"), "--threads", "2"]);
        qru(&["variability", "--data", &data, "--runs", "3", "--out", &p("v.csv"), "--threads", "3"]);
        qru(&["bayes", "--data", &data, "--n-calls", "6", "--n-initial", "3", "--epochs", "2", "--out", &p("b.csv"), "--threads", "2"]);
        qru(&["hyperband", "--data", &data, "--max-budget", "3", "--out", &p("h.csv"), "--threads", "2"]);
        qru(&["analyze", "--kind", "expressibility", "--pairs", "500", "--out", &p("e.csv"), "--threads", "2"]);
        qru(&["analyze", "--kind", "spectrum", "--out", &p("f.csv")]);
        let files = ["d.csv", "c.csv", "s.csv", "v.csv", "b.csv", "h.csv", "e.csv", "f.csv"];
        bodies.push(files.iter().map(|f| std::fs::read(Path::new(&p(f))).unwrap()).collect());
    }
    let same = bodies[0] == bodies[1];
    ensure(same, format!("8 CSV outputs from 7 commands identical across two runs: {same}"))
}

fn main() {
    let mut failures = 0;
    let mut report = |n: usize, name: &str, r: Check| {
        let (tag, detail) = match r {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} [{n:2}] {name}: {detail}");
    };
    report(1, "gradient vs finite differences", gradient_suite());
    report(2, "sandwich evenness", evenness());
    report(3, "optimizer two-step oracles", optimizer_oracles());
    report(4, "trainability of a linear curve", trainability_check());
    report(5, "GP closed forms", gp_closed_forms());
    report(6, "Hyperband accounting", hyperband_accounting());
    report(7, "expressibility anchors", expressibility_anchors());
    report(8, "integer spectrum of a unit-scaling circuit", spectrum());
    let (trend, d4) = learning_trend();
    report(9, "depth learning trend", trend);
    report(10, "normalization equivalence", normalization_equivalence(&d4));
    report(11, "byte-identical reruns", determinism());
    if failures > 0 {
        println!("{failures} acceptance check(s) failed");
        std::process::exit(1);
    }
    println!("all 11 acceptance checks passed");
}

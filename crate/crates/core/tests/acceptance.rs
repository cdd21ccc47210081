//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Criterion 9 runs at full scale when `DKPCA_INTEREST_TSV` points to the
//! `interest` dataset in TSV form; build with `--release` for that, since
//! the 2368×2368 eigendecomposition is slow unoptimized.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use common::*;
use dkpca::corpus::{build_doc_term_matrix, build_vocabulary, load_dataset, DatasetFormat, StopWords, TargetWord};
use dkpca::eval::{compute_metrics, run_experiment, Embedding, EmbeddingConfig, PipelineConfig, SplitPlan};
use dkpca::kernels::{build_kernel, validate_mercer, CooccurrenceSource, KernelParams};
use dkpca::kpca::{center_gram, eigendecompose, project};
use dkpca::linalg::frobenius_norm;
use nalgebra::DMatrix;
use ndarray::{Array1, Array2};
use rand::Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn embed(corpus: &dkpca::corpus::LabeledCorpus, kernel: KernelParams) -> Embedding<f64> {
    let config = EmbeddingConfig {
        kernel,
        ..EmbeddingConfig::default()
    };
    Embedding::build("synthetic", corpus, &config).unwrap()
}

fn degeneration_identity() -> Outcome {
    let corpus = synthetic_corpus(20, 1);
    let linear = embed(&corpus, KernelParams::Linear);
    let plan = SplitPlan::new(0.5, 5, 9).unwrap();
    for steps in [0, 1, 3, 8] {
        let diffusion = embed(&corpus, KernelParams::diffusion(0.0, steps));
        if diffusion.projection().coordinates() != linear.projection().coordinates() {
            return Err(format!("projection differs at steps={steps}"));
        }
        for split in linear.splits(&plan).unwrap() {
            if diffusion.predict_split(&split, 3).unwrap() != linear.predict_split(&split, 3).unwrap() {
                return Err(format!("predictions differ at steps={steps}"));
            }
        }
        let a = diffusion.evaluate(3, &plan, 1).unwrap();
        let b = linear.evaluate(3, &plan, 1).unwrap();
        if a.per_repeat != b.per_repeat || a.mean != b.mean {
            return Err(format!("metrics differ at steps={steps}"));
        }
    }
    Ok("bitwise equal projection, predictions and metrics for steps 0, 1, 3, 8".into())
}

fn diffusion_oracle() -> Outcome {
    let mut rng = rng(2);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let m = rng.random_range(2..=8);
        let vocab = rng.random_range(1..=8);
        let corpus = random_corpus(&mut rng, m, vocab);
        let lambda = if case % 2 == 0 { 0.1 } else { 1.0 };
        let steps = rng.random_range(0..=3);
        let vocabulary = build_vocabulary(&corpus, &StopWords::empty()).unwrap();
        let (dtm, inc) = build_doc_term_matrix::<f64>(&corpus, &vocabulary).unwrap();
        let k = build_kernel(&dtm, &inc, &KernelParams::diffusion(lambda, steps)).unwrap();
        let oracle = brute_force_diffusion(dtm.values(), inc.values(), lambda, steps);
        worst = worst.max(max_abs_diff(k.values(), &oracle));
    }
    check(worst <= 1e-10, format!("100 cases, max |K - oracle| = {worst:.3e} (tol 1e-10)"))
}

fn kernel_zoo() -> Vec<KernelParams> {
    vec![
        KernelParams::Linear,
        KernelParams::Rbf { sigma: None, squared: true },
        KernelParams::Rbf { sigma: Some(0.7), squared: false },
        KernelParams::Poly { degree: 3 },
        KernelParams::diffusion(0.0039, 3),
        KernelParams::diffusion(0.01, 8),
        KernelParams::Diffusion {
            lambda: 0.01,
            steps: 3,
            cooccurrence: CooccurrenceSource::TermFrequency,
        },
    ]
}

/// Every kernel of [`kernel_zoo`] over 100 random corpora.
fn random_kernels(seed: u64) -> Vec<Array2<f64>> {
    let mut rng = rng(seed);
    let zoo = kernel_zoo();
    let mut out = Vec::new();
    for _ in 0..100 {
        let m = rng.random_range(2..=12);
        let vocab = rng.random_range(1..=8);
        let corpus = random_corpus(&mut rng, m, vocab);
        let vocabulary = build_vocabulary(&corpus, &StopWords::empty()).unwrap();
        let (dtm, inc) = build_doc_term_matrix::<f64>(&corpus, &vocabulary).unwrap();
        for params in &zoo {
            out.push(build_kernel(&dtm, &inc, params).unwrap().into_values());
        }
    }
    out
}

fn mercer() -> Outcome {
    let kernels = random_kernels(3);
    let failed = kernels
        .iter()
        .filter(|k| !validate_mercer(k.view(), f64::INFINITY).passes_relative(1e-9, 1e-8))
        .count();
    check(
        failed == 0,
        format!("{} kernels (7 kinds x 100 inputs), {failed} failed", kernels.len()),
    )
}

fn centering() -> Outcome {
    let mut worst_sum = 0.0f64;
    let mut worst_idem = 0.0f64;
    let mut largest = 0.0f64;
    let kernels = random_kernels(4);
    for k in &kernels {
        let m = k.nrows() as f64;
        let c = center_gram(k.view()).unwrap();
        largest = largest.max(max_abs(k));
        let scale = m * max_abs(k).max(f64::MIN_POSITIVE);
        let sums = c.values().rows().into_iter().map(|r| r.sum().abs());
        let sums = sums.chain(c.values().columns().into_iter().map(|r| r.sum().abs()));
        worst_sum = worst_sum.max(sums.fold(0.0, f64::max) / scale);
        let again = center_gram(c.values().view()).unwrap();
        worst_idem = worst_idem.max(max_abs_diff(again.values(), c.values()));
    }
    check(
        worst_sum <= 1e-8 && worst_idem <= 1e-10,
        format!(
            "{} kernels up to |K| = {largest:.1e}, max |sum|/(m max|K|) = {worst_sum:.3e}, idempotence {worst_idem:.3e}",
            kernels.len()
        ),
    )
}

fn eigensolver() -> Outcome {
    let mut rng = rng(5);
    let mut worst_res = 0.0f64;
    let mut worst_orth = 0.0f64;
    for _ in 0..5 {
        let a = random_symmetric(&mut rng, 50);
        let spectrum = eigendecompose(a.view()).unwrap();
        let w = spectrum.eigenvectors();
        let norm = frobenius_norm(a.view());
        for (i, &l) in spectrum.eigenvalues().iter().enumerate() {
            let v = w.column(i);
            let r = a.dot(&v) - &v.mapv(|x| x * l);
            worst_res = worst_res.max(r.dot(&r).sqrt() / norm);
        }
        let wtw = w.t().dot(w);
        worst_orth = worst_orth.max(max_abs_diff(&wtw, &Array2::eye(50)));
    }
    let hand = ndarray::arr2(&[[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 5.0]]);
    let vals = eigendecompose(hand.view()).unwrap().eigenvalues().clone();
    let hand_err = (&vals - &Array1::from(vec![5.0, 3.0, 1.0])).mapv(f64::abs).fold(0.0, |a: f64, &b| a.max(b));
    check(
        worst_res <= 1e-8 && worst_orth <= 1e-9 && hand_err <= 1e-10,
        format!(
            "50x50: residual/|K|_F {worst_res:.3e}, |WᵀW - I| {worst_orth:.3e}; 3x3 eigenvalue error {hand_err:.3e}"
        ),
    )
}

fn projection_identity() -> Outcome {
    let mut rng = rng(6);
    let mut worst_diag = 0.0f64;
    let mut worst_dist = 0.0f64;
    for _ in 0..20 {
        let m = rng.random_range(3..=30);
        let rank = rng.random_range(1..=m);
        let c = center_gram(random_psd(&mut rng, m, rank).view()).unwrap();
        let spectrum = eigendecompose(c.values().view()).unwrap();
        let d = spectrum.positive_count();
        let y = project(&spectrum, d).unwrap();
        let coords = y.coordinates();
        let yyt = coords.dot(&coords.t());
        let lmax = spectrum.eigenvalues()[0];
        let diag = Array2::from_diag(&spectrum.eigenvalues().slice(ndarray::s![..d]).to_owned());
        worst_diag = worst_diag.max(max_abs_diff(&yyt, &diag) / lmax);
        let k = c.values();
        let scale = max_abs(k);
        for i in 0..m {
            for j in 0..m {
                let diff = &coords.column(i) - &coords.column(j);
                let lhs = diff.dot(&diff);
                let rhs = k[[i, i]] + k[[j, j]] - 2.0 * k[[i, j]];
                worst_dist = worst_dist.max((lhs - rhs).abs() / scale);
            }
        }
    }
    check(
        worst_diag <= 1e-6 && worst_dist <= 1e-6,
        format!("YYᵀ vs Λ {worst_diag:.3e} rel, distance identity {worst_dist:.3e} rel"),
    )
}

fn pca_equivalence() -> Outcome {
    let mut rng = rng(7);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let x = random_matrix(&mut rng, 6, 4);
        let k = x.dot(&x.t());
        let spectrum = eigendecompose(center_gram(k.view()).unwrap().values().view()).unwrap();
        let d = spectrum.positive_count();
        let scores = project(&spectrum, d).unwrap().points();

        let means = x.mean_axis(ndarray::Axis(0)).unwrap();
        let xc = &x - &means;
        let xc_na = DMatrix::from_fn(6, 4, |i, j| xc[[i, j]]);
        let eig = (xc_na.transpose() * &xc_na).symmetric_eigen();
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
        for (c, &j) in order.iter().take(d).enumerate() {
            let oracle = &xc_na * eig.eigenvectors.column(j);
            let plus = (0..6).map(|i| (scores[[i, c]] - oracle[i]).abs()).fold(0.0, f64::max);
            let minus = (0..6).map(|i| (scores[[i, c]] + oracle[i]).abs()).fold(0.0, f64::max);
            worst = worst.max(plus.min(minus));
        }
    }
    check(worst <= 1e-6, format!("50 random 6x4 inputs, max score error {worst:.3e} up to sign"))
}

fn metric_identity() -> Outcome {
    let mut rng = rng(8);
    let inventory: BTreeSet<u8> = (0..5).collect();
    let mut mismatches = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=60);
        let truth: Vec<u8> = (0..n).map(|_| rng.random_range(0..5)).collect();
        let pred: Vec<u8> = (0..n).map(|_| rng.random_range(0..5)).collect();
        let m = compute_metrics(&pred, &truth, &inventory).unwrap();
        if (m.f1_micro - m.accuracy).abs() > f64::EPSILON {
            mismatches += 1;
        }
    }
    let inv: BTreeSet<&str> = ["A", "B"].into_iter().collect();
    let hand = compute_metrics(&["A", "A", "A", "A"], &["A", "A", "B", "B"], &inv).unwrap();
    let hand_ok = hand.accuracy == 0.5 && hand.f1_micro == 0.5 && hand.f1_macro == 1.0 / 3.0;
    check(
        mismatches == 0 && hand_ok,
        format!(
            "1000 vectors, {mismatches} micro/accuracy mismatches; hand example accuracy {} macro {}",
            hand.accuracy, hand.f1_macro
        ),
    )
}

fn paper_scale(path: &Path) -> Outcome {
    let corpus = load_dataset(path, DatasetFormat::Tsv, TargetWord::with_plural("interest")).map_err(|e| e.to_string())?;
    let diffusion = Embedding::<f64>::build("interest", &corpus, &EmbeddingConfig::default()).map_err(|e| e.to_string())?;
    let linear = Embedding::<f64>::build(
        "interest",
        &corpus,
        &EmbeddingConfig {
            kernel: KernelParams::Linear,
            ..EmbeddingConfig::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let at = |e: &Embedding<f64>, ratio| {
        let plan = SplitPlan::new(ratio, 10, dkpca::eval::DEFAULT_SEED).unwrap();
        e.evaluate(6, &plan, 1).map(|r| 100.0 * r.mean.accuracy).map_err(|e| e.to_string())
    };
    let acc30 = at(&diffusion, 0.30)?;
    let acc5 = at(&diffusion, 0.05)?;
    let lin5 = at(&linear, 0.05)?;
    check(
        (acc30 - 81.68).abs() <= 3.0 && acc5 - lin5 >= 5.0,
        format!("interest: 30% accuracy {acc30:.2} (target 81.68 ± 3); 5% diffusion {acc5:.2} vs linear {lin5:.2}"),
    )
}

fn second_order_fallback() -> Outcome {
    let corpus = toy_corpus();
    let vocabulary = build_vocabulary(&corpus, &StopWords::empty()).unwrap();
    let (dtm, inc) = build_doc_term_matrix::<f64>(&corpus, &vocabulary).unwrap();
    let lin = build_kernel(&dtm, &inc, &KernelParams::Linear).unwrap();
    let dif = build_kernel(&dtm, &inc, &KernelParams::diffusion(0.0039, 3)).unwrap();
    let (l13, d13) = (lin.values()[[0, 2]], dif.values()[[0, 2]]);
    check(
        l13 == 0.0 && d13 > 0.0,
        format!("dataset not provided (set DKPCA_INTEREST_TSV); toy corpus K[d1][d3]: linear {l13}, diffusion {d13:.6e}"),
    )
}

fn reproduction() -> Outcome {
    match std::env::var_os("DKPCA_INTEREST_TSV") {
        Some(path) => paper_scale(Path::new(&path)),
        None => second_order_fallback(),
    }
}

fn determinism() -> Outcome {
    let corpus = synthetic_corpus(40, 11);
    let config = PipelineConfig {
        k: 3,
        ..PipelineConfig::default()
    };
    let plan = SplitPlan::new(0.3, 4, 5).unwrap();
    let run = || run_experiment::<f64>("synthetic", &corpus, &config, &plan).unwrap().to_csv_string();
    let (a, b) = (run(), run());
    check(a == b, format!("{} bytes, identical = {}", a.len(), a == b))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("degeneration identity (lambda = 0 equals linear)", degeneration_identity),
        ("diffusion kernel vs brute-force oracle", diffusion_oracle),
        ("Mercer validation of constructed kernels", mercer),
        ("kernel centering", centering),
        ("Jacobi eigensolver", eigensolver),
        ("projection identities", projection_identity),
        ("linear KPCA equals covariance PCA", pca_equivalence),
        ("micro-F1 equals accuracy", metric_identity),
        ("interest reproduction / second-order correlation", reproduction),
        ("byte-identical reports", determinism),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2}: {name}: {detail} [{secs:.2}s]", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL criterion {:>2}: {name}: {detail} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}

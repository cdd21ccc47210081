#![allow(dead_code)]

use dkpca::corpus::{Instance, LabeledCorpus, TargetWord};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const WORDS: [&str; 8] = [
    "harbor", "ledger", "violin", "meadow", "copper", "lantern", "orchid", "glacier",
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random labeled corpus drawn from the first `vocab` words of [`WORDS`].
pub fn random_corpus(rng: &mut ChaCha8Rng, docs: usize, vocab: usize) -> LabeledCorpus {
    let instances = (0..docs)
        .map(|i| {
            let len = rng.random_range(1..=4);
            let text: Vec<&str> = (0..len).map(|_| WORDS[rng.random_range(0..vocab)]).collect();
            Instance::new(if i % 2 == 0 { "even" } else { "odd" }, text.join(" ")).unwrap()
        })
        .collect();
    LabeledCorpus::new(TargetWord::new("target"), instances).unwrap()
}

/// Two-sense corpus whose senses use mostly disjoint vocabularies.
pub fn synthetic_corpus(docs: usize, seed: u64) -> LabeledCorpus {
    let mut rng = rng(seed);
    let river = ["river", "water", "fishing", "shore", "muddy", "boat", "current"];
    let money = ["money", "loan", "account", "deposit", "interest", "credit", "cash"];
    let instances = (0..docs)
        .map(|i| {
            let (label, pool) = if i % 2 == 0 { ("shore", &river) } else { ("finance", &money) };
            let len = rng.random_range(3..=7);
            let mut words: Vec<&str> = (0..len).map(|_| pool[rng.random_range(0..pool.len())]).collect();
            if rng.random_bool(0.3) {
                let other = if i % 2 == 0 { &money } else { &river };
                words.push(other[rng.random_range(0..other.len())]);
            }
            words.insert(len / 2, "bank");
            Instance::new(label, words.join(" ")).unwrap()
        })
        .collect();
    LabeledCorpus::new(TargetWord::with_plural("bank"), instances).unwrap()
}

/// The three documents about cold, dark, mold and sickness.
pub fn toy_corpus() -> LabeledCorpus {
    let texts = [
        ("a", "cold dark"),
        ("a", "dark mold"),
        ("b", "mold sickness"),
    ];
    let instances = texts.iter().map(|(l, t)| Instance::new(*l, *t).unwrap()).collect();
    LabeledCorpus::new(TargetWord::new("cellar"), instances).unwrap()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-1.0..1.0))
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Array2<f64> {
    let a = random_matrix(rng, n, n);
    Array2::from_shape_fn((n, n), |(i, j)| a[[i.min(j), i.max(j)]])
}

/// Random positive semi-definite matrix of rank at most `rank`.
pub fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> Array2<f64> {
    let x = random_matrix(rng, n, rank);
    naive_matmul(&x, &x.t().to_owned())
}

pub fn naive_matmul(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    assert_eq!(a.ncols(), b.nrows());
    let mut out = Array2::zeros((a.nrows(), b.ncols()));
    for i in 0..a.nrows() {
        for j in 0..b.ncols() {
            let mut acc = 0.0;
            for k in 0..a.ncols() {
                acc += a[[i, k]] * b[[k, j]];
            }
            out[[i, j]] = acc;
        }
    }
    out
}

/// `D (Σ_{p≤steps} λᵖ Gᵖ / p!)² Dᵀ` with `G = BᵀB`, all by explicit loops.
pub fn brute_force_diffusion(d: &Array2<f64>, b: &Array2<f64>, lambda: f64, steps: usize) -> Array2<f64> {
    let g = naive_matmul(&b.t().to_owned(), b);
    let n = g.nrows();
    let mut s = Array2::<f64>::eye(n);
    for p in 1..=steps {
        let mut power = Array2::<f64>::eye(n);
        for _ in 0..p {
            power = naive_matmul(&power, &g);
        }
        let factorial: f64 = (1..=p).map(|i| i as f64).product();
        let coef = lambda.powi(p as i32) / factorial;
        s = s + power.mapv(|x| x * coef);
    }
    let ds = naive_matmul(d, &s);
    naive_matmul(&ds, &ds.t().to_owned())
}

pub fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use dkpca::corpus::{load_dataset, DatasetFormat, LabeledCorpus};
use dkpca::eval::{corpus_kernel, fingerprint, EmbeddingConfig, EvaluationReport};
use dkpca::kernels::{cache, KernelMatrix};
use dkpca::kpca::{center_kernel, select_dimension, symmetric_eigendecomposition, write_spectrum_csv};
use dkpca::{Embedding64, KernelMatrix64};

use crate::config::{self, Grid, GridArgs, RunConfig, Settings};
use crate::error::CliError;

pub fn run(flags: Settings) -> Result<(), CliError> {
    let (settings, _) = config::load(flags, None)?;
    let cfg = RunConfig::resolve(&settings)?;
    let plans = cfg.plans()?;
    let corpus = load_corpus(&cfg)?;
    let embedding = embed(&cfg, &corpus, &cfg.embedding)?;
    let mut report = EvaluationReport::default();
    for plan in &plans {
        report.push(embedding.evaluate(cfg.k, plan, cfg.threads)?);
    }
    eprint!("{}", report.summary_table());
    emit(cfg.out.as_deref(), &report.to_csv_string())
}

pub fn spectrum(flags: Settings) -> Result<(), CliError> {
    let (settings, _) = config::load(flags, None)?;
    let cfg = RunConfig::resolve(&settings)?;
    let corpus = load_corpus(&cfg)?;
    let kernel = kernel(&cfg, &corpus, &cfg.embedding)?;
    let spectrum = symmetric_eigendecomposition(&center_kernel(&kernel)?)?;
    let d = select_dimension(&spectrum, cfg.embedding.dimension)?;
    log::info!(
        "{} positive eigenvalues; configured dimension policy keeps {d}",
        spectrum.positive_count()
    );
    let mut buf = Vec::new();
    write_spectrum_csv(&mut buf, &spectrum).expect("writing to a Vec cannot fail");
    emit(cfg.out.as_deref(), &String::from_utf8(buf).expect("spectrum is UTF-8"))
}

pub fn sweep(flags: Settings, grid: GridArgs) -> Result<(), CliError> {
    let (settings, grid) = config::load(flags, Some(grid))?;
    let cfg = RunConfig::resolve(&settings)?;
    let grid = Grid::resolve(&grid.expect("sweep always has grid arguments"), &cfg)?;
    let plans = cfg.plans()?;
    let corpus = load_corpus(&cfg)?;
    log::info!("sweeping {} combinations", grid.combinations());

    let mut report = EvaluationReport::default();
    for params in grid.kernels() {
        let base = EmbeddingConfig {
            kernel: *params,
            ..cfg.embedding.clone()
        };
        let full = embed(&cfg, &corpus, &base)?;
        for &dim in grid.dims() {
            let embedding = full.with_dimension(dim)?;
            for &k in &grid.ks {
                for plan in &plans {
                    let row = embedding.evaluate(k, plan, cfg.threads)?;
                    log::info!(
                        "{} {} k={k} ratio={} accuracy={:.4} fingerprint={}",
                        params.canonical(),
                        dim.canonical(),
                        plan.ratio,
                        row.mean.accuracy,
                        row.fingerprint
                    );
                    report.push(row);
                }
            }
        }
    }
    eprint!("{}", report.summary_table());
    emit(cfg.out.as_deref(), &report.to_csv_string())
}

fn load_corpus(cfg: &RunConfig) -> Result<LabeledCorpus, CliError> {
    let corpus = load_dataset(&cfg.dataset, DatasetFormat::Tsv, cfg.target.clone()).map_err(CliError::Dataset)?;
    let senses: Vec<String> = corpus
        .sense_counts()
        .into_iter()
        .map(|(s, n)| format!("{s}={n}"))
        .collect();
    log::info!(
        "{}: {} instances, senses {}",
        cfg.dataset.display(),
        corpus.len(),
        senses.join(" ")
    );
    Ok(corpus)
}

fn embed(cfg: &RunConfig, corpus: &LabeledCorpus, config: &EmbeddingConfig) -> Result<Embedding64, CliError> {
    let kernel = kernel(cfg, corpus, config)?;
    Ok(Embedding64::from_kernel(&cfg.dataset_name, corpus, &kernel, config)?)
}

fn kernel(cfg: &RunConfig, corpus: &LabeledCorpus, config: &EmbeddingConfig) -> Result<KernelMatrix64, CliError> {
    let Some(dir) = &cfg.kernel_cache else {
        return Ok(corpus_kernel(corpus, config)?);
    };
    let path = cache_path(dir, cfg, corpus, config);
    if path.exists() {
        match cache::load::<f64>(&path) {
            Ok(c) if c.kind == config.kernel.kind() && c.values.nrows() == corpus.len() => {
                log::info!("kernel loaded from {}", path.display());
                return Ok(KernelMatrix::from_values(c.values, config.kernel)?);
            }
            Ok(_) => log::warn!("{} does not match this corpus; rebuilding", path.display()),
            Err(e) => log::warn!("ignoring unreadable cache {}: {e}", path.display()),
        }
    }
    let kernel = corpus_kernel(corpus, config)?;
    fs::create_dir_all(dir).map_err(|source| CliError::Output {
        path: dir.clone(),
        source,
    })?;
    cache::save(&path, kernel.kind(), kernel.values())?;
    log::info!("kernel cached at {}", path.display());
    Ok(kernel)
}

/// Cache files are keyed on everything the kernel depends on.
fn cache_path(dir: &Path, cfg: &RunConfig, corpus: &LabeledCorpus, config: &EmbeddingConfig) -> PathBuf {
    let mut key = String::new();
    for inst in corpus.instances() {
        key.push_str(&inst.label);
        key.push('\t');
        key.push_str(&inst.text);
        key.push('\n');
    }
    let forms: Vec<&str> = corpus.target().forms().iter().map(String::as_str).collect();
    let words: Vec<&str> = config.stopwords.iter().collect();
    key.push_str(&format!(
        "{}|{}|{}",
        forms.join(","),
        words.join(","),
        config.kernel.canonical()
    ));
    dir.join(format!(
        "{}-{}-{}.dkpk",
        cfg.dataset_name,
        config.kernel.kind(),
        fingerprint(&key)
    ))
}

/// Writes to `out` in one step, or to standard output.
fn emit(out: Option<&Path>, contents: &str) -> Result<(), CliError> {
    let Some(path) = out else {
        let mut stdout = std::io::stdout().lock();
        return stdout
            .write_all(contents.as_bytes())
            .and_then(|_| stdout.flush())
            .map_err(|source| CliError::Output {
                path: "<stdout>".into(),
                source,
            });
    };
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let partial = path.with_file_name(format!(".{name}.partial"));
    let written = fs::write(&partial, contents).and_then(|_| fs::rename(&partial, path));
    written.map_err(|source| {
        let _ = fs::remove_file(&partial);
        CliError::Output {
            path: path.to_path_buf(),
            source,
        }
    })?;
    log::info!("wrote {}", path.display());
    Ok(())
}

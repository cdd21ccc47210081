//! Run settings from flags and an optional `key = value` file.
//!
//! File keys are the long flag names without dashes (`lambda = 0.0039`,
//! `dim-threshold = 0.9`); underscores and dashes are interchangeable and
//! `#` starts a comment. Flags override file values.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use dkpca::classify::DEFAULT_K;
use dkpca::corpus::{StopWords, TargetWord, DEFAULT_MAX_CELLS};
use dkpca::eval::{EmbeddingConfig, SplitPlan, DEFAULT_DIMENSION, DEFAULT_RATIOS, DEFAULT_REPEATS, DEFAULT_SEED};
use dkpca::kernels::{
    CooccurrenceSource, KernelKind, KernelParams, DEFAULT_LAMBDA, DEFAULT_MAX_STEPS, DEFAULT_POLY_DEGREE,
    DEFAULT_STEPS,
};
use dkpca::kpca::DimensionPolicy;

use crate::error::CliError;

#[derive(Debug, Clone, Default, Args)]
pub struct Settings {
    /// Plain-text `key = value` settings; flags take precedence.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Labeled contexts, one `sense<TAB>text` per line.
    #[arg(long, value_name = "FILE")]
    pub dataset: Option<PathBuf>,
    /// Ambiguous word removed from the vocabulary [default: dataset file stem].
    #[arg(long, value_name = "WORD")]
    pub target: Option<String>,
    /// Comma-separated surface forms of the target [default: WORD and WORDs].
    #[arg(long, value_delimiter = ',', value_name = "FORMS")]
    pub target_forms: Option<Vec<String>>,
    /// linear, rbf, poly or diffusion [default: diffusion].
    #[arg(long, value_name = "KIND")]
    pub kernel: Option<KernelKind>,
    /// RBF bandwidth [default: sqrt(N/2) for N vocabulary terms].
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Polynomial degree [default: 3].
    #[arg(long)]
    pub degree: Option<u32>,
    /// Diffusion decay factor [default: 0.0039].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Terms of the diffusion series, at most 8 [default: 3].
    #[arg(long)]
    pub steps: Option<usize>,
    /// Principal components kept [default: 1710, capped by the spectrum].
    #[arg(long, conflicts_with = "dim_threshold")]
    pub dim: Option<usize>,
    /// Keep the fewest components reaching this share of the spectrum.
    #[arg(long, value_name = "TAU")]
    pub dim_threshold: Option<f64>,
    /// Neighbors voting in KNN [default: 6].
    #[arg(short, long)]
    pub k: Option<usize>,
    /// Comma-separated labeled fractions [default: 0.05,0.10,0.30].
    #[arg(long, value_delimiter = ',')]
    pub ratios: Option<Vec<f64>>,
    /// Random splits per ratio [default: 10].
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Seed of every split [default: 42].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Stopword list, one word per line [default: bundled English list].
    #[arg(long, value_name = "FILE")]
    pub stopwords: Option<PathBuf>,
    /// Output file [default: standard output].
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Directory for cached kernel matrices.
    #[arg(long, value_name = "DIR")]
    pub kernel_cache: Option<PathBuf>,
    /// Put the plain Euclidean distance in the RBF exponent.
    #[arg(long)]
    pub rbf_unsquared: bool,
    /// Split every sense in proportion instead of uniformly.
    #[arg(long)]
    pub stratified: bool,
    /// Count co-occurrences from term frequencies instead of incidence.
    #[arg(long)]
    pub g_from_tf: bool,
}

/// Value lists for `sweep`. Integer lists accept inclusive ranges (`1..10`).
#[derive(Debug, Clone, Default, Args)]
pub struct GridArgs {
    /// Diffusion decay factors, e.g. `0,0.0039,0.01`.
    #[arg(long, value_name = "LIST")]
    pub grid_lambda: Option<String>,
    /// Diffusion series lengths, e.g. `2,3`.
    #[arg(long, value_name = "LIST")]
    pub grid_steps: Option<String>,
    /// Neighbor counts, e.g. `1..10`.
    #[arg(long, value_name = "LIST")]
    pub grid_k: Option<String>,
    /// Explicit dimensions, e.g. `100,500,1710`.
    #[arg(long, value_name = "LIST")]
    pub grid_dim: Option<String>,
    /// RBF bandwidths.
    #[arg(long, value_name = "LIST")]
    pub grid_sigma: Option<String>,
    /// Polynomial degrees, e.g. `2..4`.
    #[arg(long, value_name = "LIST")]
    pub grid_degree: Option<String>,
}

struct FileValues {
    path: PathBuf,
    entries: BTreeMap<String, (String, usize)>,
}

impl FileValues {
    fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config("config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(path, &text)
    }

    fn parse(path: &Path, text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = format!("{}:{}", path.display(), idx + 1);
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(line, format!("{at}: expected `key = value`")))?;
            let key = key.trim().replace('_', "-");
            if key == "config" {
                return Err(CliError::config(&key, format!("{at}: config files cannot include others")));
            }
            if entries.insert(key.clone(), (value.trim().to_string(), idx + 1)).is_some() {
                return Err(CliError::config(&key, format!("{at}: key given twice")));
            }
        }
        Ok(FileValues {
            path: path.to_path_buf(),
            entries,
        })
    }

    fn take_raw(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.remove(key)
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        let Some((value, line)) = self.take_raw(key) else {
            return Ok(None);
        };
        value.parse().map(Some).map_err(|e| {
            CliError::config(
                key,
                format!("{}:{line}: cannot parse {value:?}: {e}", self.path.display()),
            )
        })
    }

    fn take_list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        let Some((value, line)) = self.take_raw(key) else {
            return Ok(None);
        };
        value
            .split(',')
            .map(|item| {
                item.trim().parse().map_err(|e| {
                    CliError::config(
                        key,
                        format!("{}:{line}: cannot parse {item:?}: {e}", self.path.display()),
                    )
                })
            })
            .collect::<Result<Vec<T>, _>>()
            .map(Some)
    }

    fn take_bool(&mut self, key: &str) -> Result<bool, CliError> {
        let Some((value, line)) = self.take_raw(key) else {
            return Ok(false);
        };
        match value.to_ascii_lowercase().as_str() {
            "true" | "yes" | "on" | "1" => Ok(true),
            "false" | "no" | "off" | "0" => Ok(false),
            _ => Err(CliError::config(
                key,
                format!("{}:{line}: expected true or false, got {value:?}", self.path.display()),
            )),
        }
    }

    fn settings(&mut self) -> Result<Settings, CliError> {
        Ok(Settings {
            config: None,
            dataset: self.take("dataset")?,
            target: self.take("target")?,
            target_forms: self.take_list("target-forms")?,
            kernel: self.take("kernel")?,
            sigma: self.take("sigma")?,
            degree: self.take("degree")?,
            lambda: self.take("lambda")?,
            steps: self.take("steps")?,
            dim: self.take("dim")?,
            dim_threshold: self.take("dim-threshold")?,
            k: self.take("k")?,
            ratios: self.take_list("ratios")?,
            repeats: self.take("repeats")?,
            seed: self.take("seed")?,
            stopwords: self.take("stopwords")?,
            out: self.take("out")?,
            kernel_cache: self.take("kernel-cache")?,
            rbf_unsquared: self.take_bool("rbf-unsquared")?,
            stratified: self.take_bool("stratified")?,
            g_from_tf: self.take_bool("g-from-tf")?,
        })
    }

    fn grid(&mut self) -> GridArgs {
        let mut raw = |key: &str| self.take_raw(key).map(|(v, _)| v);
        GridArgs {
            grid_lambda: raw("grid-lambda"),
            grid_steps: raw("grid-steps"),
            grid_k: raw("grid-k"),
            grid_dim: raw("grid-dim"),
            grid_sigma: raw("grid-sigma"),
            grid_degree: raw("grid-degree"),
        }
    }

    fn finish(self) -> Result<(), CliError> {
        match self.entries.into_iter().next() {
            None => Ok(()),
            Some((key, (_, line))) => Err(CliError::config(
                &key,
                format!("{}:{line}: unknown key", self.path.display()),
            )),
        }
    }
}

impl Settings {
    /// `self` wins wherever it is set.
    fn over(self, file: Settings) -> Settings {
        let dim_from_flags = self.dim.is_some() || self.dim_threshold.is_some();
        let (dim, dim_threshold) = if dim_from_flags {
            (self.dim, self.dim_threshold)
        } else {
            (file.dim, file.dim_threshold)
        };
        Settings {
            config: self.config,
            dataset: self.dataset.or(file.dataset),
            target: self.target.or(file.target),
            target_forms: self.target_forms.or(file.target_forms),
            kernel: self.kernel.or(file.kernel),
            sigma: self.sigma.or(file.sigma),
            degree: self.degree.or(file.degree),
            lambda: self.lambda.or(file.lambda),
            steps: self.steps.or(file.steps),
            dim,
            dim_threshold,
            k: self.k.or(file.k),
            ratios: self.ratios.or(file.ratios),
            repeats: self.repeats.or(file.repeats),
            seed: self.seed.or(file.seed),
            stopwords: self.stopwords.or(file.stopwords),
            out: self.out.or(file.out),
            kernel_cache: self.kernel_cache.or(file.kernel_cache),
            rbf_unsquared: self.rbf_unsquared || file.rbf_unsquared,
            stratified: self.stratified || file.stratified,
            g_from_tf: self.g_from_tf || file.g_from_tf,
        }
    }
}

impl GridArgs {
    fn over(self, file: GridArgs) -> GridArgs {
        GridArgs {
            grid_lambda: self.grid_lambda.or(file.grid_lambda),
            grid_steps: self.grid_steps.or(file.grid_steps),
            grid_k: self.grid_k.or(file.grid_k),
            grid_dim: self.grid_dim.or(file.grid_dim),
            grid_sigma: self.grid_sigma.or(file.grid_sigma),
            grid_degree: self.grid_degree.or(file.grid_degree),
        }
    }
}

/// Merges the config file named by `flags.config`, if any, under the flags.
pub fn load(flags: Settings, grid: Option<GridArgs>) -> Result<(Settings, Option<GridArgs>), CliError> {
    let Some(path) = flags.config.clone() else {
        return Ok((flags, grid));
    };
    let mut file = FileValues::read(&path)?;
    let settings = flags.over(file.settings()?);
    let grid = grid.map(|g| g.over(file.grid()));
    file.finish()?;
    Ok((settings, grid))
}

/// Fully validated settings of one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dataset: PathBuf,
    pub dataset_name: String,
    pub target: TargetWord,
    pub embedding: EmbeddingConfig,
    pub k: usize,
    pub ratios: Vec<f64>,
    pub repeats: usize,
    pub seed: u64,
    pub stratified: bool,
    pub out: Option<PathBuf>,
    pub kernel_cache: Option<PathBuf>,
    pub threads: usize,
}

impl RunConfig {
    pub fn resolve(s: &Settings) -> Result<Self, CliError> {
        let dataset = s
            .dataset
            .clone()
            .ok_or_else(|| CliError::config("dataset", "required (flag --dataset or config key)"))?;
        let dataset_name = dataset
            .file_stem()
            .map(|f| f.to_string_lossy().into_owned())
            .filter(|f| !f.is_empty())
            .ok_or_else(|| CliError::config("dataset", format!("{} has no file name", dataset.display())))?;

        let lemma = s.target.clone().unwrap_or_else(|| dataset_name.clone());
        let target = match &s.target_forms {
            Some(forms) if forms.iter().all(|f| f.trim().is_empty()) => {
                return Err(CliError::config("target-forms", "list is empty"));
            }
            Some(forms) => TargetWord::new(&lemma).with_forms(forms.iter().map(|f| f.trim())),
            None => TargetWord::with_plural(&lemma),
        };

        let stopwords = match &s.stopwords {
            Some(path) => StopWords::load(path).map_err(|e| CliError::config("stopwords", e.to_string()))?,
            None => StopWords::bundled(),
        };

        let dimension = match (s.dim, s.dim_threshold) {
            (Some(_), Some(_)) => {
                return Err(CliError::config("dim", "give either dim or dim-threshold, not both"));
            }
            (Some(0), None) => return Err(CliError::config("dim", "must be at least 1")),
            (Some(d), None) => DimensionPolicy::Explicit(d),
            (None, Some(t)) if !(t > 0.0 && t <= 1.0) => {
                return Err(CliError::config("dim-threshold", format!("must lie in (0, 1], got {t}")));
            }
            (None, Some(t)) => DimensionPolicy::VarianceThreshold(t),
            (None, None) => DimensionPolicy::Explicit(DEFAULT_DIMENSION),
        };

        let k = s.k.unwrap_or(DEFAULT_K);
        if k == 0 {
            return Err(CliError::config("k", "must be at least 1"));
        }
        let ratios = s.ratios.clone().unwrap_or_else(|| DEFAULT_RATIOS.to_vec());
        if ratios.is_empty() {
            return Err(CliError::config("ratios", "list is empty"));
        }
        if let Some(r) = ratios.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
            return Err(CliError::config("ratios", format!("every ratio must lie in (0, 1), got {r}")));
        }
        let repeats = s.repeats.unwrap_or(DEFAULT_REPEATS);
        if repeats == 0 {
            return Err(CliError::config("repeats", "must be at least 1"));
        }

        Ok(RunConfig {
            dataset,
            dataset_name,
            target,
            embedding: EmbeddingConfig {
                kernel: kernel_params(s)?,
                dimension,
                stopwords,
                max_cells: DEFAULT_MAX_CELLS,
            },
            k,
            ratios,
            repeats,
            seed: s.seed.unwrap_or(DEFAULT_SEED),
            stratified: s.stratified,
            out: s.out.clone(),
            kernel_cache: s.kernel_cache.clone(),
            threads: threads_from_env()?,
        })
    }

    pub fn plans(&self) -> Result<Vec<SplitPlan>, CliError> {
        self.ratios
            .iter()
            .map(|&r| {
                SplitPlan::new(r, self.repeats, self.seed)
                    .map(|p| p.stratified(self.stratified))
                    .map_err(|e| CliError::config("ratios", e.to_string()))
            })
            .collect()
    }
}

fn kernel_params(s: &Settings) -> Result<KernelParams, CliError> {
    let kind = s.kernel.unwrap_or(KernelKind::Diffusion);
    let foreign = |key: &str, owner: KernelKind| {
        Err(CliError::config(
            key,
            format!("only applies to the {owner} kernel, but the kernel is {kind}"),
        ))
    };
    if kind != KernelKind::Rbf {
        if s.sigma.is_some() {
            return foreign("sigma", KernelKind::Rbf);
        }
        if s.rbf_unsquared {
            return foreign("rbf-unsquared", KernelKind::Rbf);
        }
    }
    if kind != KernelKind::Poly && s.degree.is_some() {
        return foreign("degree", KernelKind::Poly);
    }
    if kind != KernelKind::Diffusion {
        if s.lambda.is_some() {
            return foreign("lambda", KernelKind::Diffusion);
        }
        if s.steps.is_some() {
            return foreign("steps", KernelKind::Diffusion);
        }
        if s.g_from_tf {
            return foreign("g-from-tf", KernelKind::Diffusion);
        }
    }
    Ok(match kind {
        KernelKind::Linear => KernelParams::Linear,
        KernelKind::Rbf => KernelParams::Rbf {
            sigma: s.sigma.map(check_sigma).transpose()?,
            squared: !s.rbf_unsquared,
        },
        KernelKind::Poly => KernelParams::Poly {
            degree: check_degree(s.degree.unwrap_or(DEFAULT_POLY_DEGREE))?,
        },
        KernelKind::Diffusion => KernelParams::Diffusion {
            lambda: check_lambda(s.lambda.unwrap_or(DEFAULT_LAMBDA))?,
            steps: check_steps(s.steps.unwrap_or(DEFAULT_STEPS))?,
            cooccurrence: if s.g_from_tf {
                CooccurrenceSource::TermFrequency
            } else {
                CooccurrenceSource::Incidence
            },
        },
    })
}

fn check_sigma(v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config("sigma", format!("must be positive, got {v}")))
    }
}

fn check_degree(v: u32) -> Result<u32, CliError> {
    if v >= 1 {
        Ok(v)
    } else {
        Err(CliError::config("degree", "must be at least 1"))
    }
}

fn check_lambda(v: f64) -> Result<f64, CliError> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config("lambda", format!("must be non-negative, got {v}")))
    }
}

fn check_steps(v: usize) -> Result<usize, CliError> {
    if v <= DEFAULT_MAX_STEPS {
        Ok(v)
    } else {
        Err(CliError::config("steps", format!("at most {DEFAULT_MAX_STEPS}, got {v}")))
    }
}

/// `DKPCA_THREADS`, defaulting to the available cores; 0 means 1.
pub fn threads_from_env() -> Result<usize, CliError> {
    match std::env::var("DKPCA_THREADS") {
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
        Ok(v) => v.trim().parse::<usize>().map(|n| n.max(1)).map_err(|_| {
            CliError::config("DKPCA_THREADS", format!("expected a non-negative integer, got {v:?}"))
        }),
    }
}

/// Resolved sweep axes; absent grids hold the base value only.
#[derive(Debug, Clone)]
pub struct Grid {
    kernels: Vec<KernelParams>,
    dims: Vec<DimensionPolicy>,
    pub ks: Vec<usize>,
}

impl Grid {
    pub fn resolve(args: &GridArgs, base: &RunConfig) -> Result<Self, CliError> {
        let kind = base.embedding.kernel.kind();
        let given = [
            ("grid-lambda", &args.grid_lambda, Some(KernelKind::Diffusion)),
            ("grid-steps", &args.grid_steps, Some(KernelKind::Diffusion)),
            ("grid-sigma", &args.grid_sigma, Some(KernelKind::Rbf)),
            ("grid-degree", &args.grid_degree, Some(KernelKind::Poly)),
            ("grid-k", &args.grid_k, None),
            ("grid-dim", &args.grid_dim, None),
        ];
        if given.iter().all(|(_, v, _)| v.is_none()) {
            return Err(CliError::config("grid", "sweep needs at least one --grid-* list"));
        }
        for (key, value, owner) in &given {
            if let (Some(_), Some(owner)) = (value, owner) {
                if *owner != kind {
                    return Err(CliError::config(
                        key,
                        format!("only applies to the {owner} kernel, but the kernel is {kind}"),
                    ));
                }
            }
        }

        let kernels = match base.embedding.kernel {
            KernelParams::Diffusion {
                lambda,
                steps,
                cooccurrence,
            } => {
                let lambdas = float_grid("grid-lambda", &args.grid_lambda)?
                    .map(|v| v.into_iter().map(check_lambda).collect::<Result<Vec<_>, _>>())
                    .transpose()?
                    .unwrap_or_else(|| vec![lambda]);
                let steps = int_grid("grid-steps", &args.grid_steps)?
                    .map(|v| v.into_iter().map(check_steps).collect::<Result<Vec<_>, _>>())
                    .transpose()?
                    .unwrap_or_else(|| vec![steps]);
                lambdas
                    .iter()
                    .flat_map(|&lambda| {
                        steps.iter().map(move |&steps| KernelParams::Diffusion {
                            lambda,
                            steps,
                            cooccurrence,
                        })
                    })
                    .collect()
            }
            KernelParams::Rbf { sigma, squared } => match float_grid("grid-sigma", &args.grid_sigma)? {
                Some(v) => v
                    .into_iter()
                    .map(|s| check_sigma(s).map(|s| KernelParams::Rbf { sigma: Some(s), squared }))
                    .collect::<Result<_, _>>()?,
                None => vec![KernelParams::Rbf { sigma, squared }],
            },
            KernelParams::Poly { degree } => match int_grid("grid-degree", &args.grid_degree)? {
                Some(v) => v
                    .into_iter()
                    .map(|d| {
                        u32::try_from(d)
                            .map_err(|_| CliError::config("grid-degree", format!("{d} is too large")))
                            .and_then(check_degree)
                            .map(|degree| KernelParams::Poly { degree })
                    })
                    .collect::<Result<_, _>>()?,
                None => vec![KernelParams::Poly { degree }],
            },
            KernelParams::Linear => vec![KernelParams::Linear],
        };

        let dims = match int_grid("grid-dim", &args.grid_dim)? {
            Some(v) if v.contains(&0) => return Err(CliError::config("grid-dim", "dimensions must be at least 1")),
            Some(v) => v.into_iter().map(DimensionPolicy::Explicit).collect(),
            None => vec![base.embedding.dimension],
        };
        let ks = match int_grid("grid-k", &args.grid_k)? {
            Some(v) if v.contains(&0) => return Err(CliError::config("grid-k", "k must be at least 1")),
            Some(v) => v,
            None => vec![base.k],
        };
        Ok(Grid { kernels, dims, ks })
    }

    /// Kernel parameter sets, each paired with every dimension policy.
    pub fn kernels(&self) -> &[KernelParams] {
        &self.kernels
    }

    pub fn dims(&self) -> &[DimensionPolicy] {
        &self.dims
    }

    pub fn combinations(&self) -> usize {
        self.kernels.len() * self.dims.len() * self.ks.len()
    }
}

fn split_items<'a>(key: &str, raw: &'a str) -> Result<Vec<&'a str>, CliError> {
    let items: Vec<&str> = raw.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(CliError::config(key, "empty grid"));
    }
    Ok(items)
}

fn float_grid(key: &str, raw: &Option<String>) -> Result<Option<Vec<f64>>, CliError> {
    let Some(raw) = raw else { return Ok(None) };
    split_items(key, raw)?
        .into_iter()
        .map(|item| {
            item.parse::<f64>()
                .map_err(|e| CliError::config(key, format!("cannot parse {item:?}: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

/// Comma list of integers or inclusive `a..b` ranges.
fn int_grid(key: &str, raw: &Option<String>) -> Result<Option<Vec<usize>>, CliError> {
    let Some(raw) = raw else { return Ok(None) };
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|e| CliError::config(key, format!("cannot parse {s:?}: {e}")))
    };
    let mut out = Vec::new();
    for item in split_items(key, raw)? {
        match item.split_once("..") {
            Some((lo, hi)) => {
                let (lo, hi) = (parse(lo)?, parse(hi.trim_start_matches('='))?);
                if lo > hi {
                    return Err(CliError::config(key, format!("empty range {item:?}")));
                }
                out.extend(lo..=hi);
            }
            None => out.push(parse(item)?),
        }
    }
    Ok(Some(out))
}

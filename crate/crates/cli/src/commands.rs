//! Subcommand implementations. Each returns the lines to print on stdout.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use ndarray::array;
use serde_json::json;
use ssgmix::io::ModelRecord;
use ssgmix::rng::Stream;
use ssgmix::{FitConfig, McPool, MixtureModel};

use crate::error::{CliError, CliResult};
use crate::manifest::{digest, RunManifest};
use crate::table::{read_bytes, read_labels, read_table, write_grid, write_labels, write_matrix, write_text, write_trace, HeaderMode};

/// Fitting constants shared by commands that evaluate densities.
#[derive(Debug, Clone, Args)]
pub struct NumericArgs {
    /// Master RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo pool size per component.
    #[arg(long)]
    pub n_mc: Option<usize>,
    /// Number of series terms.
    #[arg(long)]
    pub n_terms: Option<usize>,
}

impl NumericArgs {
    /// Starts from `base` (e.g. the configuration stored with a model) and
    /// applies explicit flags.
    fn apply(&self, mut base: FitConfig) -> FitConfig {
        if let Some(s) = self.seed {
            base.seed = s;
        }
        if let Some(n) = self.n_mc {
            base.n_mc = n;
        }
        if let Some(n) = self.n_terms {
            base.n_terms = n;
        }
        base
    }
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Input CSV (n rows, d numeric columns; a `label` column is ignored).
    pub input: PathBuf,
    /// Number of mixture components.
    #[arg(long)]
    pub k: usize,
    #[command(flatten)]
    pub numeric: NumericArgs,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Iterations before the stopping rule is consulted.
    #[arg(long)]
    pub min_iter: Option<usize>,
    /// Stopping tolerance on the difference of block slopes.
    #[arg(long)]
    pub eps: Option<f64>,
    /// CM-step repeats.
    #[arg(long)]
    pub m_repeats: Option<usize>,
    /// Lower bound for the tail indices.
    #[arg(long)]
    pub alpha_min: Option<f64>,
    /// Upper bound for the tail indices (equal bounds fix α).
    #[arg(long)]
    pub alpha_max: Option<f64>,
    #[arg(long, value_enum, default_value = "auto")]
    pub header: HeaderMode,
    /// Model JSON output.
    #[arg(long)]
    pub out: PathBuf,
    /// Hard labels CSV (default: `<out>` with extension `labels.csv`).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Log-likelihood trace CSV (default: `<out>` with extension `trace.csv`).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Manifest path (default: `<out>.manifest.json`).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

fn sibling(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

pub fn fit(args: &FitArgs) -> CliResult<Vec<String>> {
    let start = Instant::now();
    if args.k == 0 {
        return Err(CliError::Input("--k must be at least 1".into()));
    }
    let table = read_table(&args.input, args.header)?;
    let mut cfg = args.numeric.apply(FitConfig::default());
    if let Some(v) = args.max_iter {
        cfg.max_iter = v;
    }
    if let Some(v) = args.min_iter {
        cfg.min_iter = v;
    }
    if let Some(v) = args.eps {
        cfg.eps = v;
    }
    if let Some(v) = args.m_repeats {
        cfg.m_repeats = v;
    }
    if let Some(v) = args.alpha_min {
        cfg.alpha_bounds.0 = v;
    }
    if let Some(v) = args.alpha_max {
        cfg.alpha_bounds.1 = v;
    }
    cfg.validate().map_err(|e| CliError::Input(e.to_string()))?;

    let result = ssgmix::fit(table.data.view(), args.k, &cfg)?;
    let n = table.data.nrows();
    let labels_path = args.labels.clone().unwrap_or_else(|| sibling(&args.out, "labels.csv"));
    let trace_path = args.trace.clone().unwrap_or_else(|| sibling(&args.out, "trace.csv"));
    write_text(&args.out, &ModelRecord::from_fit(&result, &cfg, n).to_json())?;
    write_labels(&labels_path, &result.labels)?;
    write_trace(&trace_path, &result.loglik_trace)?;

    let mut manifest = RunManifest::new("fit", json!({ "k": args.k, "fit": cfg }), Some(cfg.seed));
    manifest.inputs.push(digest(&args.input, &table.bytes));
    for p in [&args.out, &labels_path, &trace_path] {
        manifest.output(p);
    }
    manifest.write(&args.out, args.manifest.as_deref(), start.elapsed())?;
    Ok(vec![
        format!("loglik {}", result.loglik),
        format!("bic {}", result.bic),
        format!("iterations {}", result.n_iter),
        format!("converged {}", result.converged),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// Two-component bivariate design: ω = (0.25, 0.75), α = 1.5.
    SimStudy,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Model JSON to sample from.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub model: Option<PathBuf>,
    /// Built-in parameter set.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Number of rows.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV (features plus `label`).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

fn load_model(path: &Path) -> CliResult<(ModelRecord, MixtureModel<f64>, Vec<u8>)> {
    let bytes = read_bytes(path)?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let model_err = |source| CliError::Model { path: path.display().to_string(), source };
    let record = ModelRecord::from_json(&text).map_err(model_err)?;
    let model = record.to_model().map_err(model_err)?;
    Ok((record, model, bytes))
}

pub fn simulate(args: &SimulateArgs) -> CliResult<Vec<String>> {
    let start = Instant::now();
    if args.n == 0 {
        return Err(CliError::Input("--n must be at least 1 (empty data)".into()));
    }
    let mut manifest = RunManifest::new("simulate", json!({ "n": args.n, "preset": args.preset.map(|_| "sim-study") }), Some(args.seed));
    let model = match (&args.model, args.preset) {
        (Some(path), _) => {
            let (_, model, bytes) = load_model(path)?;
            manifest.inputs.push(digest(path, &bytes));
            model
        }
        (None, Some(Preset::SimStudy)) => ssgmix::sim_study_design(),
        (None, None) => return Err(CliError::Input("one of --model or --preset is required".into())),
    };
    let sample = ssgmix::sample_mixture(args.n, &model, args.seed)?;
    write_matrix(&args.out, &sample.data, Some(&sample.labels))?;
    manifest.output(&args.out);
    manifest.write(&args.out, args.manifest.as_deref(), start.elapsed())?;
    Ok(vec![format!("rows {} columns {}", args.n, model.dim())])
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Bivariate model JSON.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], allow_hyphen_values = true)]
    pub xlim: Vec<f64>,
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], allow_hyphen_values = true)]
    pub ylim: Vec<f64>,
    /// Points per axis.
    #[arg(long)]
    pub res: usize,
    #[command(flatten)]
    pub numeric: NumericArgs,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

/// Configuration stored with a model, or the defaults.
fn stored_config(record: &ModelRecord) -> FitConfig {
    record.meta.as_ref().map(|m| m.config).unwrap_or_default()
}

fn axis(lim: &[f64], res: usize) -> Vec<f64> {
    if res == 1 {
        return vec![0.5 * (lim[0] + lim[1])];
    }
    (0..res).map(|i| lim[0] + (lim[1] - lim[0]) * i as f64 / (res - 1) as f64).collect()
}

pub fn density_grid(args: &GridArgs) -> CliResult<Vec<String>> {
    let start = Instant::now();
    let (record, model, bytes) = load_model(&args.model)?;
    if model.dim() != 2 {
        return Err(CliError::Input(format!("density-grid needs a bivariate model, got d = {}", model.dim())));
    }
    if args.res == 0 {
        return Err(CliError::Input("--res must be at least 1".into()));
    }
    for lim in [&args.xlim, &args.ylim] {
        if !(lim[0] < lim[1]) {
            return Err(CliError::Input(format!("limits must be increasing, got {} {}", lim[0], lim[1])));
        }
    }
    let cfg = args.numeric.apply(stored_config(&record));
    cfg.validate().map_err(|e| CliError::Input(e.to_string()))?;
    let pools = (0..model.k())
        .map(|k| McPool::from_stream(model.components[k].alpha, cfg.n_mc, cfg.seed, Stream::Classify { component: k }))
        .collect::<ssgmix::Result<Vec<_>>>()?;
    let series = cfg.series();
    let (xs, ys) = (axis(&args.xlim, args.res), axis(&args.ylim, args.res));
    let mut cells = Vec::with_capacity(args.res * args.res);
    for &x in &xs {
        for &y in &ys {
            let f = ssgmix::mixture_pdf(array![x, y].view(), &model, &pools, &series)?;
            cells.push((x, y, f));
        }
    }
    write_grid(&args.out, &cells)?;
    let mut manifest = RunManifest::new(
        "density-grid",
        json!({ "xlim": args.xlim, "ylim": args.ylim, "res": args.res, "n_mc": cfg.n_mc, "n_terms": cfg.n_terms }),
        Some(cfg.seed),
    );
    manifest.inputs.push(digest(&args.model, &bytes));
    manifest.output(&args.out);
    manifest.write(&args.out, args.manifest.as_deref(), start.elapsed())?;
    Ok(vec![format!("cells {}", cells.len())])
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Input CSV.
    pub input: PathBuf,
    #[command(flatten)]
    pub numeric: NumericArgs,
    #[arg(long, value_enum, default_value = "auto")]
    pub header: HeaderMode,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

fn check_dim(model: &MixtureModel<f64>, d: usize) -> CliResult<()> {
    if model.dim() != d {
        return Err(CliError::Input(format!("model has d = {} but the data has {d} columns", model.dim())));
    }
    Ok(())
}

pub fn classify(args: &ClassifyArgs) -> CliResult<Vec<String>> {
    let start = Instant::now();
    let (record, model, bytes) = load_model(&args.model)?;
    let table = read_table(&args.input, args.header)?;
    check_dim(&model, table.data.ncols())?;
    let cfg = args.numeric.apply(stored_config(&record));
    cfg.validate().map_err(|e| CliError::Input(e.to_string()))?;
    let part = ssgmix::classify(table.data.view(), &model, &cfg)?;
    write_labels(&args.out, &part.labels)?;
    let mut manifest = RunManifest::new("classify", json!({ "n_mc": cfg.n_mc, "n_terms": cfg.n_terms }), Some(cfg.seed));
    manifest.inputs.push(digest(&args.model, &bytes));
    manifest.inputs.push(digest(&args.input, &table.bytes));
    manifest.output(&args.out);
    manifest.write(&args.out, args.manifest.as_deref(), start.elapsed())?;
    Ok(vec![format!("rows {}", part.labels.len())])
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Predicted labels CSV.
    #[arg(long, requires = "truth", conflicts_with = "model")]
    pub labels: Option<PathBuf>,
    /// Reference labels CSV (a `label` column, or `row_index,label`).
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Model JSON to score on `--data`.
    #[arg(long, requires = "data", required_unless_present = "labels")]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub numeric: NumericArgs,
    #[arg(long, value_enum, default_value = "auto")]
    pub header: HeaderMode,
}

pub fn eval(args: &EvalArgs) -> CliResult<Vec<String>> {
    if let (Some(a), Some(b)) = (&args.labels, &args.truth) {
        let ari = ssgmix::adjusted_rand_index(&read_labels(a)?, &read_labels(b)?)?;
        return Ok(vec![format!("ari {ari}")]);
    }
    let (Some(model_path), Some(data_path)) = (&args.model, &args.data) else {
        return Err(CliError::Input("use --labels with --truth, or --model with --data".into()));
    };
    let (record, model, _) = load_model(model_path)?;
    let table = read_table(data_path, args.header)?;
    check_dim(&model, table.data.ncols())?;
    let cfg = args.numeric.apply(stored_config(&record));
    cfg.validate().map_err(|e| CliError::Input(e.to_string()))?;
    let loglik = ssgmix::eval::log_likelihood(table.data.view(), &model, &cfg)?;
    let (n, d) = table.data.dim();
    Ok(vec![format!("loglik {loglik}"), format!("bic {}", ssgmix::bic(loglik, n, model.k(), d))])
}

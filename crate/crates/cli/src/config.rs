//! Flag parsing and the optional JSON config file. Flags override the file.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use depthpress::features::{FeatureConfig, SchemeSet};
use depthpress::learn::{ModelKind, TrainConfig};
use depthpress::roi::DepthReducer;
use depthpress::synth::CorpusOptions;

/// Only the classic 8-neighbour 3x3 operator is implemented.
const LBP_VARIANTS: [&str; 1] = ["classic"];

#[derive(Debug, Parser)]
#[command(
    name = "depthpress",
    version,
    about = "Palpation depth labelling and texture-based pressure classification"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Seed for corpus generation and training.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (for `generate`, the dataset directory).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Dataset directory or manifest path.
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    #[arg(long, short, global = true)]
    pub verbose: bool,
    /// JSON file with defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Shadow feature intensity threshold.
    #[arg(long, global = true)]
    pub shadow_threshold: Option<u8>,
    /// Histogram bins per Laws energy map.
    #[arg(long, global = true)]
    pub laws_bins: Option<usize>,
    #[arg(long, global = true)]
    pub lbp_variant: Option<String>,
    /// Scalar depth reducer: median, mean or min.
    #[arg(long, global = true)]
    pub reducer: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a synthetic corpus and its manifest.
    Generate(GenerateArgs),
    /// Compute depth ranges and per-frame pressure labels.
    Label,
    /// Extract texture features for labeled frames.
    Extract(SchemesArg),
    /// Train one model on one scheme set.
    Train(TrainArgs),
    /// Evaluate a trained model on the train and test splits.
    Eval(EvalArgs),
    /// Benchmark scheme sets against models.
    Bench(BenchArgs),
    /// Render a saved benchmark report.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Frames per clip for every train and test clip (default: reference counts).
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub frames: Option<u64>,
    #[arg(long)]
    pub frame_size: Option<usize>,
    #[arg(long)]
    pub noise_sigma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SchemesArg {
    /// Comma-separated scheme sets such as `law,lbp,lawlbp`, or `all`.
    #[arg(long)]
    pub schemes: Option<String>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub scheme: Option<String>,
    /// reg, svm, gbt or ann.
    #[arg(long)]
    pub model: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Trained model (default: <out>/model.json).
    #[arg(long)]
    pub model_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub schemes: Option<String>,
    /// Comma-separated models, or `all`.
    #[arg(long)]
    pub models: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Benchmark JSON (default: <out>/report.json).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Config file contents; every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub verbose: Option<bool>,
    pub shadow_threshold: Option<u8>,
    pub laws_bins: Option<usize>,
    pub lbp_variant: Option<String>,
    pub reducer: Option<String>,
    pub frames: Option<u64>,
    pub frame_size: Option<usize>,
    pub noise_sigma: Option<f64>,
    pub schemes: Option<String>,
    pub models: Option<String>,
    pub scheme: Option<String>,
    pub model: Option<String>,
    pub model_file: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub train: Option<TrainConfig>,
}

/// Fully resolved and validated settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub data: PathBuf,
    pub verbose: bool,
    pub features: FeatureConfig,
    pub reducer: DepthReducer,
    pub frames: Option<usize>,
    pub frame_size: usize,
    pub noise_sigma: f64,
    pub schemes: Vec<SchemeSet>,
    pub models: Vec<ModelKind>,
    pub scheme: SchemeSet,
    pub model: ModelKind,
    pub model_file: PathBuf,
    pub report_file: PathBuf,
    pub train: TrainConfig,
}

fn parse_list<T>(s: &str, all: impl FnOnce() -> Vec<T>, parse: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(all());
    }
    let items = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(parse)
        .collect::<Result<Vec<_>>>()?;
    if items.is_empty() {
        bail!("empty list {s:?}");
    }
    Ok(items)
}

pub fn parse_schemes(s: &str) -> Result<Vec<SchemeSet>> {
    parse_list(s, SchemeSet::benchmark_sets, |t| Ok(t.parse::<SchemeSet>()?))
}

pub fn parse_models(s: &str) -> Result<Vec<ModelKind>> {
    parse_list(s, || ModelKind::ALL.to_vec(), |t| Ok(t.parse::<ModelKind>()?))
}

fn read_file_config(path: &Path) -> Result<FileConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

impl RunConfig {
    pub fn resolve(cli: &Cli) -> Result<Self> {
        let g = &cli.global;
        let file = match &g.config {
            Some(p) => read_file_config(p)?,
            None => FileConfig::default(),
        };
        let (mut frames, mut frame_size, mut noise_sigma) = (None, None, None);
        let (mut schemes, mut models, mut scheme, mut model) = (None, None, None, None);
        let (mut model_file, mut report_file) = (None, None);
        match &cli.command {
            Command::Generate(a) => {
                frames = a.frames;
                frame_size = a.frame_size;
                noise_sigma = a.noise_sigma;
            }
            Command::Extract(a) => schemes = a.schemes.clone(),
            Command::Train(a) => {
                scheme = a.scheme.clone();
                model = a.model.clone();
            }
            Command::Eval(a) => model_file = a.model_file.clone(),
            Command::Bench(a) => {
                schemes = a.schemes.clone();
                models = a.models.clone();
            }
            Command::Report(a) => report_file = a.report.clone(),
            Command::Label => {}
        }

        let seed = g.seed.or(file.seed).unwrap_or(0);
        let default_out = match cli.command {
            Command::Generate(_) => "data",
            _ => "out",
        };
        let out = g.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from(default_out));
        let data = g.data.clone().or(file.data).unwrap_or_else(|| PathBuf::from("data"));

        let defaults = FeatureConfig::default();
        let features = FeatureConfig {
            shadow_threshold: g
                .shadow_threshold
                .or(file.shadow_threshold)
                .unwrap_or(defaults.shadow_threshold),
            laws_bins: g.laws_bins.or(file.laws_bins).unwrap_or(defaults.laws_bins),
        };
        if !(1..=256).contains(&features.laws_bins) {
            bail!("--laws-bins must be in 1..=256, got {}", features.laws_bins);
        }
        let variant = g
            .lbp_variant
            .clone()
            .or(file.lbp_variant)
            .unwrap_or_else(|| "classic".into());
        if !LBP_VARIANTS.contains(&variant.as_str()) {
            bail!(
                "unsupported --lbp-variant {variant:?} (supported: {})",
                LBP_VARIANTS.join(", ")
            );
        }
        let reducer = match g.reducer.as_deref().or(file.reducer.as_deref()) {
            Some(s) => s.parse()?,
            None => DepthReducer::default(),
        };

        let frames = match frames.or(file.frames) {
            Some(n) if n < 2 => bail!("--frames must be at least 2, got {n}"),
            Some(n) => Some(usize::try_from(n).context("--frames too large")?),
            None => None,
        };
        let corpus = CorpusOptions::default();
        let frame_size = frame_size.or(file.frame_size).unwrap_or(corpus.frame_size);
        if frame_size < 64 {
            bail!("--frame-size must be at least 64, got {frame_size}");
        }
        let noise_sigma = noise_sigma.or(file.noise_sigma).unwrap_or(corpus.noise_sigma);
        if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
            bail!("--noise-sigma must be a non-negative number, got {noise_sigma}");
        }

        let schemes = parse_schemes(schemes.or(file.schemes).as_deref().unwrap_or("all"))?;
        let models = parse_models(models.or(file.models).as_deref().unwrap_or("all"))?;
        let scheme = scheme
            .or(file.scheme)
            .as_deref()
            .unwrap_or("LawLBP")
            .parse::<SchemeSet>()?;
        let model = model.or(file.model).as_deref().unwrap_or("svm").parse::<ModelKind>()?;
        let model_file = model_file.or(file.model_file).unwrap_or_else(|| out.join("model.json"));
        let report_file = report_file.or(file.report).unwrap_or_else(|| out.join("report.json"));

        let mut train = file.train.unwrap_or_default();
        train.seed = seed;

        Ok(RunConfig {
            seed,
            out,
            data,
            verbose: g.verbose || file.verbose.unwrap_or(false),
            features,
            reducer,
            frames,
            frame_size,
            noise_sigma,
            schemes,
            models,
            scheme,
            model,
            model_file,
            report_file,
            train,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(args: &[&str]) -> Result<RunConfig> {
        let cli = Cli::try_parse_from(std::iter::once("depthpress").chain(args.iter().copied()))?;
        RunConfig::resolve(&cli)
    }

    #[test]
    fn defaults() {
        let c = resolve(&["bench"]).unwrap();
        assert_eq!(c.seed, 0);
        assert_eq!(c.out, PathBuf::from("out"));
        assert_eq!(c.schemes.len(), 10);
        assert_eq!(c.models.len(), 4);
        assert_eq!(resolve(&["generate"]).unwrap().out, PathBuf::from("data"));
    }

    #[test]
    fn zero_frames_is_a_usage_error() {
        let err = Cli::try_parse_from(["depthpress", "generate", "--frames", "0"]).unwrap_err();
        assert_eq!(err.kind(), clap::error::ErrorKind::ValueValidation);
    }

    #[test]
    fn filters_parse() {
        let c = resolve(&["bench", "--models", "svm", "--schemes", "lawlbp"]).unwrap();
        assert_eq!(c.models, vec![ModelKind::Svm]);
        assert_eq!(c.schemes, vec!["LawLBP".parse().unwrap()]);
        assert!(resolve(&["bench", "--schemes", "lbplaw"]).is_err());
        assert!(resolve(&["bench", "--models", "knn"]).is_err());
        assert!(resolve(&["label", "--lbp-variant", "uniform"]).is_err());
        assert!(resolve(&["label", "--reducer", "max"]).is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(
            &path,
            r#"{"seed": 9, "laws_bins": 8, "models": "gbt", "train": {"gbt_rounds": 7}}"#,
        )
        .unwrap();
        let p = path.to_str().unwrap();
        let c = resolve(&["bench", "--config", p, "--seed", "3"]).unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.train.seed, 3);
        assert_eq!(c.features.laws_bins, 8);
        assert_eq!(c.models, vec![ModelKind::Gbt]);
        assert_eq!(c.train.gbt_rounds, 7);
        fs::write(&path, r#"{"sed": 1}"#).unwrap();
        assert!(resolve(&["bench", "--config", p]).is_err());
        fs::write(&path, r#"{"frames": 0}"#).unwrap();
        assert!(resolve(&["generate", "--config", p]).is_err());
    }
}

//! `depthpress` command-line front end.

mod config;

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::Parser;
use serde::{Deserialize, Serialize};

use depthpress::dataio::{load_dataset, manifest_path, save_dataset, split_view, Clip};
use depthpress::features::{FeatureConfig, SchemeSet};
use depthpress::learn::{benchmark, evaluate, train, BenchmarkTable, EvalReport, ModelKind, TrainedModel};
use depthpress::pipeline::{build_datasets, feature_rows, label_clips, FeatureRow, Labeling};
use depthpress::reference::{CellCounts, DATASET_COUNTS};
use depthpress::synth::{generate_corpus_with, CorpusOptions};

use config::{Cli, Command, RunConfig};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("error: {}", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match RunConfig::resolve(&cli).and_then(|cfg| run(&cli.command, &cfg)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", one_line(&e));
            ExitCode::FAILURE
        }
    }
}

/// Joins the error chain on one line, skipping causes already quoted by
/// their parent's message.
fn one_line(e: &anyhow::Error) -> String {
    let mut msg = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !msg.contains(&text) {
            if !msg.is_empty() {
                msg.push_str(": ");
            }
            msg.push_str(&text);
        }
    }
    msg.replace('\n', " ")
}

/// Prints to stdout; a closed pipe is not an error.
fn emit(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn run(command: &Command, cfg: &RunConfig) -> Result<()> {
    match command {
        Command::Generate(_) => cmd_generate(cfg),
        Command::Label => cmd_label(cfg),
        Command::Extract(_) => cmd_extract(cfg),
        Command::Train(_) => cmd_train(cfg),
        Command::Eval(_) => cmd_eval(cfg),
        Command::Bench(_) => cmd_bench(cfg),
        Command::Report(_) => cmd_report(cfg),
    }
}

fn progress(cfg: &RunConfig, msg: impl AsRef<str>) {
    if cfg.verbose {
        eprintln!("{}", msg.as_ref());
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load(cfg: &RunConfig) -> Result<Vec<Clip>> {
    let path = manifest_path(&cfg.data);
    progress(cfg, format!("loading {}", path.display()));
    let clips = load_dataset(&path).with_context(|| format!("loading dataset {}", cfg.data.display()))?;
    if clips.is_empty() {
        bail!("dataset {} has no clips", cfg.data.display());
    }
    Ok(clips)
}

fn load_labeled(cfg: &RunConfig) -> Result<(Vec<Clip>, Labeling)> {
    let clips = load(cfg)?;
    let labeling = label_clips(&clips, cfg.reducer)?;
    progress(
        cfg,
        format!(
            "labeled {} of {} frames",
            labeling.labeled_count(),
            labeling.frames.len()
        ),
    );
    Ok((clips, labeling))
}

fn cmd_generate(cfg: &RunConfig) -> Result<()> {
    let plan: Vec<CellCounts> = match cfg.frames {
        Some(n) => DATASET_COUNTS
            .iter()
            .map(|c| CellCounts {
                train: n,
                test: n,
                ..*c
            })
            .collect(),
        None => DATASET_COUNTS.to_vec(),
    };
    let options = CorpusOptions {
        frame_size: cfg.frame_size,
        noise_sigma: cfg.noise_sigma,
    };
    progress(cfg, format!("rendering {} clips", 2 * plan.len()));
    let clips = generate_corpus_with(&plan, cfg.seed, &options)?;
    save_dataset(&clips, &cfg.out).with_context(|| format!("writing dataset to {}", cfg.out.display()))?;
    let mut text = format!("{:<6} {:<9} {:>6} {:>6}\n", "cup", "quadrant", "train", "test");
    for ((cup, quadrant), cell) in split_view(&clips) {
        let _ = writeln!(
            text,
            "{:<6} {:<9} {:>6} {:>6}",
            cup.to_string(),
            quadrant.name(),
            cell.train.len(),
            cell.test.len()
        );
    }
    emit(&text)
}

fn cmd_label(cfg: &RunConfig) -> Result<()> {
    let (_, labeling) = load_labeled(cfg)?;
    write_json(&cfg.out.join("labels.json"), &labeling)?;
    let mut text = labeling.render_ranges();
    let _ = writeln!(
        text,
        "labeled {} of {} frames",
        labeling.labeled_count(),
        labeling.frames.len()
    );
    emit(&text)
}

#[derive(Serialize)]
struct FeatureFile<'a> {
    feature_config: &'a FeatureConfig,
    rows: Vec<FeatureRow>,
}

fn cmd_extract(cfg: &RunConfig) -> Result<()> {
    let (clips, labeling) = load_labeled(cfg)?;
    let rows = feature_rows(&clips, &labeling, &cfg.schemes, &cfg.features)?;
    let n = rows.len();
    write_json(
        &cfg.out.join("features.json"),
        &FeatureFile {
            feature_config: &cfg.features,
            rows,
        },
    )?;
    emit(&format!("extracted {n} feature rows\n"))
}

fn cmd_train(cfg: &RunConfig) -> Result<()> {
    let (clips, labeling) = load_labeled(cfg)?;
    let data = build_datasets(&clips, &labeling, &[cfg.scheme], &cfg.features)?
        .pop()
        .expect("one scheme requested");
    progress(cfg, format!("training {} on {}", cfg.model.name(), cfg.scheme));
    let model = train(cfg.model, &data, &cfg.train)?;
    let acc = evaluate(&model, &data.train)?.accuracy;
    write_json(
        &cfg.out.join("model.json"),
        &ModelFile {
            feature_config: cfg.features,
            model,
        },
    )?;
    emit(&format!(
        "{} {} train accuracy {:.4}\n",
        cfg.scheme,
        cfg.model.name(),
        acc
    ))
}

/// A trained model together with the feature settings it was trained on.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    feature_config: FeatureConfig,
    model: TrainedModel,
}

#[derive(Serialize)]
struct EvalFile {
    scheme: SchemeSet,
    model: ModelKind,
    train: EvalReport,
    test: EvalReport,
}

fn cmd_eval(cfg: &RunConfig) -> Result<()> {
    let file: ModelFile = read_json(&cfg.model_file)?;
    let (clips, labeling) = load_labeled(cfg)?;
    let scheme = file.model.scheme;
    let data = build_datasets(&clips, &labeling, &[scheme], &file.feature_config)?
        .pop()
        .expect("one scheme requested");
    let out = EvalFile {
        scheme,
        model: file.model.kind(),
        train: evaluate(&file.model, &data.train)?,
        test: evaluate(&file.model, &data.test)?,
    };
    write_json(&cfg.out.join("eval.json"), &out)?;
    emit(&format!(
        "{} {} train {:.4} test {:.4}\n",
        scheme,
        out.model.name(),
        out.train.accuracy,
        out.test.accuracy
    ))
}

fn cmd_bench(cfg: &RunConfig) -> Result<()> {
    let (clips, labeling) = load_labeled(cfg)?;
    progress(
        cfg,
        format!("extracting features for {} scheme sets", cfg.schemes.len()),
    );
    let datasets = build_datasets(&clips, &labeling, &cfg.schemes, &cfg.features)?;
    progress(cfg, format!("running {} cells", datasets.len() * cfg.models.len()));
    let table = benchmark(&datasets, &cfg.models, &cfg.train)?;
    write_text(&cfg.out.join("report.csv"), &table.to_csv())?;
    write_json(&cfg.out.join("report.json"), &table)?;
    emit(&table.render())
}

fn cmd_report(cfg: &RunConfig) -> Result<()> {
    let table: BenchmarkTable = read_json(&cfg.report_file)?;
    let text = table.render();
    write_text(&cfg.out.join("report.txt"), &text)?;
    emit(&text)
}

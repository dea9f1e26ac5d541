//! Implementations behind the `credence` binary's subcommands: `run`,
//! `replay`, `report`, and `plot-data`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::domain::{CalibrationReport, GameState, PredictionRecord, RoundRecord, ScoringRuleId};
use crate::metrics;
use crate::scoring::ScoringRule;

use super::experiment::{
    bins_csv, report_csv, run_experiment, summary_csv, trajectory_csv, write_json, write_string,
};
use super::manifest::ExperimentManifest;
use super::{jsonl, PipelineError};

#[derive(Debug, Parser)]
#[command(
    name = "credence",
    about = "Confidence calibration harness built around the Credence Calibration Game",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment from a manifest.
    Run(RunArgs),
    /// Recompute reports from persisted records or game rounds.
    Replay(ReplayArgs),
    /// Compute metric tables from a prediction-record JSONL file.
    Report(ReportArgs),
    /// Emit trajectory or reliability CSVs for plotting.
    PlotData(PlotDataArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Path to the experiment manifest (TOML).
    pub manifest: PathBuf,
    /// Override the manifest's output directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Override the dataset path.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Override the subject filter.
    #[arg(long)]
    pub subject: Option<String>,
    /// Override the evaluation question count.
    #[arg(long)]
    pub n_eval: Option<usize>,
    /// Override the game round count.
    #[arg(long)]
    pub n_game: Option<usize>,
    /// Replace the manifest's seed list (repeatable).
    #[arg(long = "seed")]
    pub seeds: Vec<u64>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// JSONL transcript: prediction records or game rounds.
    pub transcript: PathBuf,
    /// Scoring rule for round transcripts: `symmetric` or `exponential`.
    #[arg(long)]
    pub rule: Option<String>,
    /// Model name printed in the replayed history.
    #[arg(long, default_value = "unknown-model")]
    pub model_name: String,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Prediction-record JSONL file.
    pub records: PathBuf,
    /// Write the full-precision report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write the report as CSV (4 decimal places).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Write the reliability bins as CSV.
    #[arg(long)]
    pub bins: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotDataArgs {
    /// Round JSONL file; emits a (round, cumulative score) trajectory.
    #[arg(long, conflicts_with = "records")]
    pub rounds: Option<PathBuf>,
    /// Record JSONL file; emits the reliability-bin table.
    #[arg(long)]
    pub records: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn execute(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Run(args) => run_cmd(args),
        Command::Replay(args) => replay_cmd(args),
        Command::Report(args) => report_cmd(args),
        Command::PlotData(args) => plot_data_cmd(args),
    }
}

fn apply_overrides(manifest: &mut ExperimentManifest, args: &RunArgs) {
    if let Some(out_dir) = &args.out_dir {
        manifest.out_dir = out_dir.clone();
    }
    if let Some(dataset) = &args.dataset {
        manifest.dataset.path = dataset.clone();
    }
    if let Some(subject) = &args.subject {
        manifest.dataset.subject = Some(subject.clone());
    }
    if let Some(n_eval) = args.n_eval {
        manifest.n_eval = n_eval;
    }
    if let Some(n_game) = args.n_game {
        manifest.n_game = n_game;
    }
    if !args.seeds.is_empty() {
        manifest.seeds = args.seeds.clone();
    }
}

fn run_cmd(args: RunArgs) -> Result<(), PipelineError> {
    let mut manifest = ExperimentManifest::load(&args.manifest)?;
    apply_overrides(&mut manifest, &args);
    let report = run_experiment(&manifest)?;

    println!("mode: {}", report.mode.as_str());
    println!("model: {}", report.model);
    println!("manifest hash: {}", report.manifest_hash);
    println!();
    print!("{}", summary_csv(&report.summary).replace(',', "\t"));
    if let Some(cmp) = &report.comparison {
        println!();
        println!(
            "{}: ECE {} -> {} ({})",
            cmp.method.label,
            format_metric(cmp.baseline.ece),
            format_metric(cmp.method.ece),
            cmp.delta.formatted_ece()
        );
    }
    for failure in &report.failures {
        eprintln!("seed {} failed: {}", failure.seed, failure.error);
    }
    println!();
    println!("artifacts: {}", manifest.out_dir.display());
    Ok(())
}

fn format_metric(value: f64) -> String {
    format!("{value:.4}")
}

fn print_report(report: &CalibrationReport) {
    println!("n\t{}", report.n);
    println!("invalid\t{}", report.invalid);
    println!("accuracy\t{}", format_metric(report.accuracy));
    println!("ece\t{}", format_metric(report.ece));
    println!("brier\t{}", format_metric(report.brier));
    match report.auroc {
        Some(auroc) => println!("auroc\t{}", format_metric(auroc)),
        None => println!("auroc\tn/a"),
    }
}

/// True when the first JSON object in the file looks like a round record.
fn is_round_transcript(path: &std::path::Path) -> Result<bool, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| super::io_error(path, e))?;
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("{}");
    let value: serde_json::Value =
        serde_json::from_str(first).map_err(|e| super::io_error(path, e))?;
    Ok(value.get("round_index").is_some())
}

fn replay_rounds(args: &ReplayArgs) -> Result<(), PipelineError> {
    let rule_token = args.rule.as_deref().ok_or_else(|| {
        PipelineError::Manifest(
            "round transcripts need --rule symmetric|exponential".into(),
        )
    })?;
    let rule_id: ScoringRuleId = rule_token
        .parse()
        .map_err(|e: crate::domain::ValidationError| PipelineError::Manifest(e.to_string()))?;
    let rule = ScoringRule::from_id(rule_id);

    let stored: Vec<RoundRecord> = jsonl::read_jsonl(&args.transcript)?;
    if stored.is_empty() {
        return Err(PipelineError::Replay("transcript has no rounds".into()));
    }
    let mut state = GameState::new(rule_id);
    for recorded in &stored {
        let replayed = state.apply_round(recorded.prediction.clone(), &rule)?.clone();
        if replayed != *recorded {
            return Err(PipelineError::Replay(format!(
                "round {} diverges: stored score {} (cumulative {}), replayed {} (cumulative {})",
                recorded.round_index,
                recorded.score_delta,
                recorded.cumulative_score,
                replayed.score_delta,
                replayed.cumulative_score,
            )));
        }
    }
    println!("replay verified: {} rounds reproduce exactly", stored.len());
    println!();
    print!("{}", crate::game::render_history(&state, &args.model_name)?);
    Ok(())
}

fn replay_cmd(args: ReplayArgs) -> Result<(), PipelineError> {
    if is_round_transcript(&args.transcript)? {
        return replay_rounds(&args);
    }
    let records: Vec<PredictionRecord> = jsonl::read_jsonl(&args.transcript)?;
    let report = metrics::report(&records)?;
    println!("recomputed report over {} records", records.len());
    print_report(&report);
    Ok(())
}

fn report_cmd(args: ReportArgs) -> Result<(), PipelineError> {
    let records: Vec<PredictionRecord> = jsonl::read_jsonl(&args.records)?;
    let report = metrics::report(&records)?;
    print_report(&report);
    if let Some(path) = &args.json {
        write_json(path, &report)?;
    }
    if let Some(path) = &args.csv {
        write_string(path, &report_csv(&report))?;
    }
    if let Some(path) = &args.bins {
        write_string(path, &bins_csv(&report.bins))?;
    }
    Ok(())
}

fn plot_data_cmd(args: PlotDataArgs) -> Result<(), PipelineError> {
    match (&args.rounds, &args.records) {
        (Some(rounds_path), None) => {
            let rounds: Vec<RoundRecord> = jsonl::read_jsonl(rounds_path)?;
            write_string(&args.out, &trajectory_csv(&rounds))
        }
        (None, Some(records_path)) => {
            let records: Vec<PredictionRecord> = jsonl::read_jsonl(records_path)?;
            let report = metrics::report(&records)?;
            write_string(&args.out, &bins_csv(&report.bins))
        }
        _ => Err(PipelineError::Manifest(
            "plot-data needs exactly one of --rounds or --records".into(),
        )),
    }
}

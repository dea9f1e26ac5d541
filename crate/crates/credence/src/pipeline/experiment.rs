//! Repeat-run experiment orchestration: per-seed sampling, stage
//! execution, artifact persistence, and mean/std summaries.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::client::{HttpBackend, ModelBackend, SimulatedAgent};
use crate::data;
use crate::domain::{CalibrationReport, GameTotals, Question, ReliabilityBin, RoundRecord};
use crate::game;
use crate::metrics::{self, MetricsDelta};
use crate::protocol;
use crate::scoring::ScoringRule;
use crate::seeded;

use super::manifest::{BackendChoice, DatasetKind, ExperimentManifest, Mode};
use super::{
    io_error, jsonl, run_game, run_post_eval, run_pre_eval, run_self_cal, EvalOutcome,
    PipelineError, StageOptions,
};

/// One seed's reports. `post` is absent for the uncalibrated mode;
/// `delta` is absent when pre and post cover disjoint question sets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    pub pre: CalibrationReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post: Option<CalibrationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<MetricsDelta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game_totals: Option<GameTotals>,
}

impl SeedRun {
    /// The report the method is judged by: post when present, else pre.
    pub fn final_report(&self) -> &CalibrationReport {
        self.post.as_ref().unwrap_or(&self.pre)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedFailure {
    pub seed: u64,
    pub error: String,
}

/// One line of the repeat-run table: a seed, or the Mean/Std rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryRow {
    pub label: String,
    pub ece: f64,
    pub brier: f64,
    pub accuracy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auroc: Option<f64>,
}

/// Mean before/after metrics plus their percentage-point deltas.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub baseline: SummaryRow,
    pub method: SummaryRow,
    pub delta: MetricsDelta,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub manifest_hash: String,
    pub template_version: String,
    pub mode: Mode,
    pub model: String,
    pub seeds: Vec<u64>,
    pub runs: Vec<SeedRun>,
    pub failures: Vec<SeedFailure>,
    /// Per-seed rows plus Mean and Std over the final reports.
    pub summary: Vec<SummaryRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonSummary>,
}

/// Sample mean and (n-1) standard deviation; std is `None` below n = 2.
pub(crate) fn mean_std(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, None);
    }
    let variance =
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
    (mean, Some(variance.sqrt()))
}

fn metric_column<F: Fn(&CalibrationReport) -> f64>(
    runs: &[SeedRun],
    f: F,
) -> Vec<f64> {
    runs.iter().map(|r| f(r.final_report())).collect()
}

fn auroc_column(runs: &[SeedRun]) -> Option<Vec<f64>> {
    runs.iter().map(|r| r.final_report().auroc).collect()
}

fn summary_rows(runs: &[SeedRun]) -> Vec<SummaryRow> {
    let mut rows: Vec<SummaryRow> = runs
        .iter()
        .map(|run| {
            let report = run.final_report();
            SummaryRow {
                label: run.seed.to_string(),
                ece: report.ece,
                brier: report.brier,
                accuracy: report.accuracy,
                auroc: report.auroc,
            }
        })
        .collect();

    let ece = metric_column(runs, |r| r.ece);
    let brier = metric_column(runs, |r| r.brier);
    let accuracy = metric_column(runs, |r| r.accuracy);
    let auroc = auroc_column(runs);

    let (ece_mean, ece_std) = mean_std(&ece);
    let (brier_mean, brier_std) = mean_std(&brier);
    let (acc_mean, acc_std) = mean_std(&accuracy);
    let auroc_stats = auroc.as_deref().map(mean_std);

    rows.push(SummaryRow {
        label: "Mean".into(),
        ece: ece_mean,
        brier: brier_mean,
        accuracy: acc_mean,
        auroc: auroc_stats.map(|(m, _)| m),
    });
    if let (Some(e), Some(b), Some(a)) = (ece_std, brier_std, acc_std) {
        rows.push(SummaryRow {
            label: "Std".into(),
            ece: e,
            brier: b,
            accuracy: a,
            auroc: auroc_stats.and_then(|(_, s)| s),
        });
    }
    rows
}

fn mean_report_row(label: &str, reports: Vec<&CalibrationReport>) -> SummaryRow {
    let ece: Vec<f64> = reports.iter().map(|r| r.ece).collect();
    let brier: Vec<f64> = reports.iter().map(|r| r.brier).collect();
    let accuracy: Vec<f64> = reports.iter().map(|r| r.accuracy).collect();
    let auroc: Option<Vec<f64>> = reports.iter().map(|r| r.auroc).collect();
    SummaryRow {
        label: label.to_string(),
        ece: mean_std(&ece).0,
        brier: mean_std(&brier).0,
        accuracy: mean_std(&accuracy).0,
        auroc: auroc.as_deref().map(|v| mean_std(v).0),
    }
}

fn build_comparison(mode: Mode, runs: &[SeedRun]) -> Option<ComparisonSummary> {
    if runs.iter().any(|r| r.post.is_none()) {
        return None;
    }
    let baseline = mean_report_row("uncalibrated", runs.iter().map(|r| &r.pre).collect());
    let method = mean_report_row(
        mode.as_str(),
        runs.iter().map(|r| r.post.as_ref().expect("checked above")).collect(),
    );
    let delta = MetricsDelta {
        ece_pp: (method.ece - baseline.ece) * 100.0,
        brier_pp: (method.brier - baseline.brier) * 100.0,
        auroc_pp: match (baseline.auroc, method.auroc) {
            (Some(b), Some(a)) => Some((a - b) * 100.0),
            _ => None,
        },
        accuracy_pp: (method.accuracy - baseline.accuracy) * 100.0,
    };
    Some(ComparisonSummary { baseline, method, delta })
}

fn fmt4(value: f64) -> String {
    format!("{value:.4}")
}

fn fmt4_opt(value: Option<f64>) -> String {
    value.map(fmt4).unwrap_or_default()
}

fn csv_into_string(builder: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    builder(&mut writer).expect("csv rows are well formed");
    let bytes = writer.into_inner().expect("csv writer flushes");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

/// Reliability bins as CSV for external plotting.
pub fn bins_csv(bins: &[ReliabilityBin]) -> String {
    csv_into_string(|w| {
        w.write_record(["lower", "upper", "count", "mean_confidence", "mean_accuracy"])?;
        for bin in bins {
            w.write_record([
                format!("{:.2}", bin.lower),
                format!("{:.2}", bin.upper),
                bin.count.to_string(),
                fmt4_opt(bin.mean_confidence),
                fmt4_opt(bin.mean_accuracy),
            ])?;
        }
        Ok(())
    })
}

/// (round index, cumulative score) trajectory for score plots.
pub fn trajectory_csv(rounds: &[RoundRecord]) -> String {
    csv_into_string(|w| {
        w.write_record(["round_index", "cumulative_score"])?;
        for round in rounds {
            w.write_record([round.round_index.to_string(), round.cumulative_score.to_string()])?;
        }
        Ok(())
    })
}

/// Single-report metrics at table precision.
pub fn report_csv(report: &CalibrationReport) -> String {
    csv_into_string(|w| {
        w.write_record(["n", "invalid", "accuracy", "ece", "brier", "auroc"])?;
        w.write_record([
            report.n.to_string(),
            report.invalid.to_string(),
            fmt4(report.accuracy),
            fmt4(report.ece),
            fmt4(report.brier),
            fmt4_opt(report.auroc),
        ])?;
        Ok(())
    })
}

/// Repeat-run table: one row per seed plus Mean and Std.
pub fn summary_csv(rows: &[SummaryRow]) -> String {
    csv_into_string(|w| {
        w.write_record(["run", "ece", "brier", "accuracy", "auroc"])?;
        for row in rows {
            w.write_record([
                row.label.clone(),
                fmt4(row.ece),
                fmt4(row.brier),
                fmt4(row.accuracy),
                fmt4_opt(row.auroc),
            ])?;
        }
        Ok(())
    })
}

fn cell_with_delta(value: f64, delta_pp: f64) -> String {
    format!("{} ({}%)", fmt4(value), MetricsDelta::format_pp(delta_pp))
}

/// Before/after comparison table with parenthetical percentage-point
/// deltas on the method row.
pub fn comparison_csv(cmp: &ComparisonSummary) -> String {
    csv_into_string(|w| {
        w.write_record(["method", "ece", "brier", "auroc", "accuracy"])?;
        w.write_record([
            cmp.baseline.label.clone(),
            fmt4(cmp.baseline.ece),
            fmt4(cmp.baseline.brier),
            fmt4_opt(cmp.baseline.auroc),
            fmt4(cmp.baseline.accuracy),
        ])?;
        let auroc_cell = match (cmp.method.auroc, cmp.delta.auroc_pp) {
            (Some(v), Some(d)) => cell_with_delta(v, d),
            (Some(v), None) => fmt4(v),
            _ => String::new(),
        };
        w.write_record([
            cmp.method.label.clone(),
            cell_with_delta(cmp.method.ece, cmp.delta.ece_pp),
            cell_with_delta(cmp.method.brier, cmp.delta.brier_pp),
            auroc_cell,
            cell_with_delta(cmp.method.accuracy, cmp.delta.accuracy_pp),
        ])?;
        Ok(())
    })
}

pub(crate) fn write_string(path: &Path, content: &str) -> Result<(), PipelineError> {
    fs::write(path, content).map_err(|e| io_error(path, e))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| io_error(path, e))?;
    write_string(path, &(text + "\n"))
}

fn load_pool(manifest: &ExperimentManifest) -> Result<Vec<Question>, PipelineError> {
    let pool = match manifest.dataset.kind {
        DatasetKind::Mcq => data::load_mcq(&manifest.dataset.path)?,
        DatasetKind::OpenEnded => data::load_open_ended(&manifest.dataset.path)?,
    };
    let pool = match &manifest.dataset.subject {
        Some(subject) => data::filter_category(&pool, subject),
        None => pool,
    };
    if pool.is_empty() {
        return Err(PipelineError::Manifest(
            "dataset is empty after subject filtering".into(),
        ));
    }
    Ok(pool)
}

fn prepare_bank(
    manifest: &ExperimentManifest,
    pool: &[Question],
    bank_pool: Option<&[Question]>,
    seed: u64,
) -> Result<Vec<Question>, PipelineError> {
    let game_seed = seeded::tagged_seed(seed, "game-bank");
    if manifest.dataset.game_from_mcq {
        let base = data::sample(pool, manifest.n_game, game_seed)?;
        let reduced: Result<Vec<Question>, _> =
            base.iter().map(|q| data::reduce_to_two_choice(q, seed)).collect();
        return Ok(reduced?);
    }
    let bank_pool = bank_pool.ok_or_else(|| {
        PipelineError::Manifest("game mode without a game bank".into())
    })?;
    Ok(data::sample(bank_pool, manifest.n_game, game_seed)?)
}

struct SeedExecution {
    run: SeedRun,
    pre: EvalOutcome,
    post: Option<EvalOutcome>,
    rounds: Vec<RoundRecord>,
    history: Option<String>,
    game_state_json: Option<crate::domain::GameState>,
}

fn execute_seed(
    manifest: &ExperimentManifest,
    pool: &[Question],
    bank_pool: Option<&[Question]>,
    http_backend: Option<&HttpBackend>,
    opts: &StageOptions,
    seed: u64,
) -> Result<SeedExecution, PipelineError> {
    let simulated;
    let backend: &dyn ModelBackend = match manifest.backend {
        BackendChoice::Simulated => {
            let policy = manifest.agent.expect("validated").for_run(seed);
            simulated = SimulatedAgent::new(policy);
            &simulated
        }
        BackendChoice::Http => http_backend.expect("validated"),
    };

    let (eval_questions, post_questions) = if manifest.disjoint_eval {
        let both = data::sample(pool, 2 * manifest.n_eval, seed)?;
        let (pre, post) = both.split_at(manifest.n_eval);
        (pre.to_vec(), Some(post.to_vec()))
    } else {
        (data::sample(pool, manifest.n_eval, seed)?, None)
    };

    let pre = run_pre_eval(&eval_questions, backend, opts)?;

    let mut post = None;
    let mut rounds = Vec::new();
    let mut history = None;
    let mut game_state_json = None;
    let mut game_totals = None;

    if let Some(rule_id) = manifest.mode.scoring_rule() {
        let rule = ScoringRule::from_id(rule_id);
        let bank = prepare_bank(manifest, pool, bank_pool, seed)?;
        let state = run_game(&bank, manifest.n_game, &rule, backend, opts)?;
        rounds = state.rounds.clone();
        history = Some(game::render_history(&state, backend.model_name())?);
        game_totals = Some(state.totals);
        let post_set = post_questions.as_deref().unwrap_or(&eval_questions);
        post = Some(run_post_eval(post_set, &state, backend, opts)?);
        game_state_json = Some(state);
    } else if manifest.mode == Mode::SelfCal {
        post = Some(run_self_cal(&eval_questions, backend, opts)?);
    }

    let delta = match (&post, manifest.disjoint_eval) {
        (Some(p), false) => Some(metrics::compare(&pre.report, &p.report)?),
        _ => None,
    };

    Ok(SeedExecution {
        run: SeedRun {
            seed,
            pre: pre.report.clone(),
            post: post.as_ref().map(|p| p.report.clone()),
            delta,
            game_totals,
        },
        pre,
        post,
        rounds,
        history,
        game_state_json,
    })
}

fn persist_seed(dir: &Path, execution: &SeedExecution) -> Result<(), PipelineError> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    jsonl::write_jsonl(&dir.join("pre_records.jsonl"), &execution.pre.records)?;
    write_json(&dir.join("pre_report.json"), &execution.pre.report)?;
    write_string(&dir.join("reliability_pre.csv"), &bins_csv(&execution.pre.report.bins))?;

    if !execution.rounds.is_empty() {
        jsonl::write_jsonl(&dir.join("rounds.jsonl"), &execution.rounds)?;
        write_string(&dir.join("trajectory.csv"), &trajectory_csv(&execution.rounds))?;
    }
    if let Some(state) = &execution.game_state_json {
        write_json(&dir.join("game_state.json"), state)?;
    }
    if let Some(history) = &execution.history {
        write_string(&dir.join("game_history.txt"), history)?;
    }
    if let Some(post) = &execution.post {
        jsonl::write_jsonl(&dir.join("post_records.jsonl"), &post.records)?;
        write_json(&dir.join("post_report.json"), &post.report)?;
        write_string(&dir.join("reliability_post.csv"), &bins_csv(&post.report.bins))?;
    }
    if let Some(delta) = &execution.run.delta {
        write_json(&dir.join("delta.json"), delta)?;
    }
    Ok(())
}

/// Runs the configured mode once per seed, persists all artifacts under
/// the manifest's out_dir, and returns the aggregate report. Individual
/// seed failures are collected rather than fatal; only a run where every
/// seed failed errors out.
pub fn run_experiment(manifest: &ExperimentManifest) -> Result<ExperimentReport, PipelineError> {
    manifest.validate()?;
    let pool = load_pool(manifest)?;
    let bank_pool = match (&manifest.dataset.game_bank_path, manifest.mode.is_game()) {
        (Some(path), true) => Some(data::load_game_bank(path)?),
        _ => None,
    };
    let http_backend = match manifest.backend {
        BackendChoice::Http => Some(HttpBackend::new(
            manifest.generation.clone().expect("validated"),
        )?),
        BackendChoice::Simulated => None,
    };
    let opts = StageOptions { parse_retries: manifest.parse_retries, in_flight: None };

    fs::create_dir_all(&manifest.out_dir).map_err(|e| io_error(&manifest.out_dir, e))?;
    write_string(&manifest.out_dir.join("manifest.toml"), &manifest.to_toml()?)?;

    let model = match manifest.backend {
        BackendChoice::Simulated => "simulated-agent".to_string(),
        BackendChoice::Http => http_backend.as_ref().expect("built above").model_name().into(),
    };

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for &seed in &manifest.seeds {
        match execute_seed(manifest, &pool, bank_pool.as_deref(), http_backend.as_ref(), &opts, seed)
        {
            Ok(execution) => {
                persist_seed(&manifest.out_dir.join(format!("seed-{seed}")), &execution)?;
                runs.push(execution.run);
            }
            Err(err) => failures.push(SeedFailure { seed, error: err.to_string() }),
        }
    }
    if runs.is_empty() {
        let first = failures.first().map(|f| f.error.clone()).unwrap_or_default();
        return Err(PipelineError::AllSeedsFailed(failures.len(), first));
    }

    let summary = summary_rows(&runs);
    let comparison = build_comparison(manifest.mode, &runs);
    let report = ExperimentReport {
        manifest_hash: manifest.content_hash(),
        template_version: protocol::TEMPLATE_VERSION.to_string(),
        mode: manifest.mode,
        model,
        seeds: manifest.seeds.clone(),
        runs,
        failures,
        summary,
        comparison,
    };

    write_json(&manifest.out_dir.join("experiment.json"), &report)?;
    write_string(&manifest.out_dir.join("summary.csv"), &summary_csv(&report.summary))?;
    if let Some(cmp) = &report.comparison {
        write_string(&manifest.out_dir.join("comparison.csv"), &comparison_csv(cmp))?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_sample_std_match_the_published_repeat_table() {
        // Five repeated runs and their published Mean/Std at 4 decimals.
        let ece = [0.5713, 0.5746, 0.5741, 0.5746, 0.5597];
        let brier = [0.5294, 0.5324, 0.5280, 0.5290, 0.5180];
        let accuracy = [0.2848, 0.2758, 0.2768, 0.2754, 0.2908];
        let auroc = [0.5473, 0.5263, 0.5506, 0.5531, 0.5549];

        let cases = [
            (&ece[..], "0.5709", "0.0064"),
            (&brier[..], "0.5274", "0.0055"),
            (&accuracy[..], "0.2807", "0.0068"),
            (&auroc[..], "0.5464", "0.0116"),
        ];
        for (values, mean_expected, std_expected) in cases {
            let (mean, std) = mean_std(values);
            assert_eq!(fmt4(mean), mean_expected);
            assert_eq!(fmt4(std.unwrap()), std_expected);
        }
    }

    #[test]
    fn sample_std_matches_brute_force() {
        let values = [0.2, 0.4, 0.9, 0.3];
        let (mean, std) = mean_std(&values);
        let brute_mean = values.iter().sum::<f64>() / 4.0;
        let brute_var: f64 =
            values.iter().map(|v| (v - brute_mean).powi(2)).sum::<f64>() / 3.0;
        assert_eq!(mean, brute_mean);
        assert!((std.unwrap() - brute_var.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn std_is_undefined_for_a_single_run() {
        let (mean, std) = mean_std(&[0.4]);
        assert_eq!(mean, 0.4);
        assert_eq!(std, None);
    }

    #[test]
    fn comparison_csv_prints_parenthetical_deltas() {
        let cmp = ComparisonSummary {
            baseline: SummaryRow {
                label: "uncalibrated".into(),
                ece: 0.6171,
                brier: 0.5924,
                accuracy: 0.2972,
                auroc: Some(0.5441),
            },
            method: SummaryRow {
                label: "self_cal".into(),
                ece: 0.5993,
                brier: 0.5755,
                accuracy: 0.3162,
                auroc: Some(0.5596),
            },
            delta: MetricsDelta {
                ece_pp: -1.78,
                brier_pp: -1.69,
                auroc_pp: Some(1.55),
                accuracy_pp: 1.90,
            },
        };
        let csv = comparison_csv(&cmp);
        assert!(csv.contains("0.5993 (-1.78%)"));
        assert!(csv.contains("0.3162 (+1.90%)"));
        assert!(csv.contains("uncalibrated,0.6171,0.5924,0.5441,0.2972"));
    }

    #[test]
    fn trajectory_csv_lists_rounds_in_order() {
        use crate::domain::{CalibrationStatus, ConfidenceLevel, Gold, PredictionRecord};
        let rounds: Vec<RoundRecord> = [(1usize, 68i64), (2, 136)]
            .iter()
            .map(|&(i, score)| RoundRecord {
                round_index: i,
                prediction: PredictionRecord {
                    question_id: format!("q{i}"),
                    raw_answer: "A".into(),
                    canonical_answer: "A".into(),
                    verbalized_confidence: 80,
                    normalized_confidence: 0.8,
                    correct: true,
                    gold: Gold::Label("A".into()),
                    valid: true,
                },
                game_confidence: ConfidenceLevel::from_percent(80).unwrap(),
                snapped: false,
                score_delta: 68,
                cumulative_score: score,
                cumulative_accuracy_pct: 100.0,
                cumulative_mean_confidence_pct: 80.0,
                status: CalibrationStatus::Underconfident,
            })
            .collect();
        let csv = trajectory_csv(&rounds);
        assert_eq!(csv, "round_index,cumulative_score\n1,68\n2,136\n");
    }
}

//! Game-state bookkeeping: snapping reported confidences onto the six
//! levels, applying scored rounds, and rendering the feedback, history,
//! and final-digest texts.
//!
//! The rendered history layout is frozen; transcript replays must
//! reproduce it byte for byte.

use std::fmt::Write as _;

use thiserror::Error;

use crate::domain::{
    CalibrationStatus, ConfidenceLevel, GameState, GameTotals, PredictionRecord, RoundRecord,
    ScoringRuleId,
};
use crate::scoring::ScoringRule;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("game has no rounds")]
    EmptyState,
    #[error("prediction for question `{question_id}` is invalid and cannot be scored")]
    InvalidPrediction { question_id: String },
    #[error("game uses the {state} rule but was scored with the {rule} rule")]
    RuleMismatch { state: ScoringRuleId, rule: ScoringRuleId },
}

/// Nearest game level to a reported confidence. Reports below 50 snap up
/// to 50; equidistant ties snap to the lower level. The flag is true iff
/// the report was off-level.
pub fn snap_confidence(reported: u8) -> (ConfidenceLevel, bool) {
    let reported = reported.min(100);
    let mut best = ConfidenceLevel::ALL[0];
    let mut best_gap = u8::MAX;
    for level in ConfidenceLevel::ALL {
        let gap = reported.abs_diff(level.percent());
        if gap < best_gap {
            best = level;
            best_gap = gap;
        }
    }
    (best, best.percent() != reported)
}

impl GameState {
    pub fn new(scoring_rule_id: ScoringRuleId) -> Self {
        Self {
            scoring_rule_id,
            rounds: Vec::new(),
            totals: GameTotals {
                questions: 0,
                correct: 0,
                accuracy_pct: 0.0,
                mean_confidence_pct: 0.0,
                total_score: 0,
            },
        }
    }

    /// Scores one valid prediction and appends the resulting round.
    /// Cumulative fields are recomputed from the full round prefix, so
    /// stored values always equal their recomputation.
    pub fn apply_round(
        &mut self,
        prediction: PredictionRecord,
        rule: &ScoringRule,
    ) -> Result<&RoundRecord, GameError> {
        if !prediction.valid {
            return Err(GameError::InvalidPrediction {
                question_id: prediction.question_id,
            });
        }
        if rule.id() != self.scoring_rule_id {
            return Err(GameError::RuleMismatch {
                state: self.scoring_rule_id,
                rule: rule.id(),
            });
        }

        let (game_confidence, snapped) = snap_confidence(prediction.verbalized_confidence);
        let score_delta = rule.score(game_confidence, prediction.correct);

        let n = self.rounds.len() + 1;
        let correct = self.totals.correct + usize::from(prediction.correct);
        let confidence_sum: u64 = self
            .rounds
            .iter()
            .map(|r| u64::from(r.game_confidence.percent()))
            .sum::<u64>()
            + u64::from(game_confidence.percent());
        let cumulative_score = self.totals.total_score + score_delta;
        let cumulative_accuracy_pct = 100.0 * correct as f64 / n as f64;
        let cumulative_mean_confidence_pct = confidence_sum as f64 / n as f64;

        self.rounds.push(RoundRecord {
            round_index: n,
            prediction,
            game_confidence,
            snapped,
            score_delta,
            cumulative_score,
            cumulative_accuracy_pct,
            cumulative_mean_confidence_pct,
            status: CalibrationStatus::from_percentages(
                cumulative_mean_confidence_pct,
                cumulative_accuracy_pct,
            ),
        });
        self.totals = GameTotals {
            questions: n,
            correct,
            accuracy_pct: cumulative_accuracy_pct,
            mean_confidence_pct: cumulative_mean_confidence_pct,
            total_score: cumulative_score,
        };
        Ok(self.rounds.last().expect("round was just pushed"))
    }

    pub fn last_round(&self) -> Option<&RoundRecord> {
        self.rounds.last()
    }
}

fn status_sentence(status: CalibrationStatus) -> &'static str {
    match status {
        CalibrationStatus::Overconfident => "You are currently overconfident.",
        CalibrationStatus::Underconfident => "You are currently underconfident.",
        CalibrationStatus::WellCalibrated => "You are currently well calibrated.",
    }
}

fn trend_sentence(status: CalibrationStatus) -> &'static str {
    match status {
        CalibrationStatus::Overconfident => "You were overconfident overall.",
        CalibrationStatus::Underconfident => "You were underconfident overall.",
        CalibrationStatus::WellCalibrated => "You were well calibrated overall.",
    }
}

/// The feedback message shown to the player after one round: the score
/// feedback line, the running totals, and the status sentence.
pub fn round_feedback(round: &RoundRecord) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Feedback: {}, Score: {}",
        if round.prediction.correct { "Correct" } else { "Incorrect" },
        round.score_delta
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "Total Score: {}, Total Accuracy: {:.2}",
        round.cumulative_score, round.cumulative_accuracy_pct
    );
    out.push_str(status_sentence(round.status));
    out
}

/// Renders the full past-results text: header, one block per round, and
/// the final summary.
pub fn render_history(state: &GameState, model_name: &str) -> Result<String, GameError> {
    if state.rounds.is_empty() {
        return Err(GameError::EmptyState);
    }

    let mut out = String::new();
    let _ = writeln!(
        out,
        "You previously played The Credence Calibration Game. Here are your past results:"
    );
    let _ = writeln!(out);
    let _ = writeln!(out, "Model: {model_name}");
    let _ = writeln!(out);

    for round in &state.rounds {
        let _ = writeln!(out, "Question {}", round.round_index);
        let _ = writeln!(
            out,
            "Your Answer: {}, Confidence: {}%",
            round.prediction.canonical_answer,
            round.game_confidence.percent()
        );
        let _ = writeln!(out, "Correct Answer: {}", round.prediction.gold.display_primary());
        let _ = writeln!(out, "{}", round_feedback(round));
    }

    let totals = &state.totals;
    let _ = writeln!(out);
    let _ = writeln!(out, "Final Summary:");
    let _ = writeln!(out, "Total Questions: {}", totals.questions);
    let _ = writeln!(out, "Correct Answers: {}", totals.correct);
    let _ = writeln!(out, "Accuracy: {:.2}%", totals.accuracy_pct);
    let _ = writeln!(out, "Average Confidence: {:.2}%", totals.mean_confidence_pct);
    let _ = writeln!(out, "Total Score: {}", totals.total_score);
    Ok(out)
}

/// Compact summary of a finished game, used as the post-game prompt
/// prefix: accuracy, average confidence, total score, and the trend.
pub fn render_final_digest(state: &GameState) -> Result<String, GameError> {
    if state.rounds.is_empty() {
        return Err(GameError::EmptyState);
    }
    let totals = &state.totals;
    let status =
        CalibrationStatus::from_percentages(totals.mean_confidence_pct, totals.accuracy_pct);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "You previously played The Credence Calibration Game. Summary of your performance:"
    );
    let _ = writeln!(out, "Accuracy: {:.2}%", totals.accuracy_pct);
    let _ = writeln!(out, "Average Confidence: {:.2}%", totals.mean_confidence_pct);
    let _ = writeln!(out, "Total Score: {}", totals.total_score);
    out.push_str(trend_sentence(status));
    Ok(out)
}

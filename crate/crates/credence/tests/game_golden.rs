//! Golden-transcript replay: the five-round symmetric game must
//! reproduce every intermediate total, status label, and the rendered
//! history byte for byte.

mod common;

use std::collections::VecDeque;
use std::sync::Mutex;

use common::{golden_questions, golden_replies, golden_state, GOLDEN_MODEL};
use credence::client::{ClientError, Message, ModelBackend, TurnContext};
use credence::domain::CalibrationStatus;
use credence::game::{render_final_digest, render_history};
use credence::pipeline::{run_game, StageOptions};
use credence::scoring::ScoringRule;

const GOLDEN_HISTORY: &str = "\
You previously played The Credence Calibration Game. Here are your past results:

Model: meta-llama/Meta-Llama-3.1-8B-Instruct-Turbo

Question 1
Your Answer: B, Confidence: 80%
Correct Answer: B
Feedback: Correct, Score: 68

Total Score: 68, Total Accuracy: 100.00
You are currently underconfident.
Question 2
Your Answer: A, Confidence: 80%
Correct Answer: A
Feedback: Correct, Score: 68

Total Score: 136, Total Accuracy: 100.00
You are currently underconfident.
Question 3
Your Answer: B, Confidence: 90%
Correct Answer: A
Feedback: Incorrect, Score: -85

Total Score: 51, Total Accuracy: 66.67
You are currently overconfident.
Question 4
Your Answer: B, Confidence: 90%
Correct Answer: B
Feedback: Correct, Score: 85

Total Score: 136, Total Accuracy: 75.00
You are currently overconfident.
Question 5
Your Answer: A, Confidence: 90%
Correct Answer: A
Feedback: Correct, Score: 85

Total Score: 221, Total Accuracy: 80.00
You are currently overconfident.

Final Summary:
Total Questions: 5
Correct Answers: 4
Accuracy: 80.00%
Average Confidence: 86.00%
Total Score: 221
";

struct Scripted {
    replies: Mutex<VecDeque<String>>,
}

impl ModelBackend for Scripted {
    fn model_name(&self) -> &str {
        GOLDEN_MODEL
    }

    fn reply(&self, _c: &[Message], _ctx: &TurnContext<'_>) -> Result<String, ClientError> {
        self.replies
            .lock()
            .unwrap()
            .pop_front()
            .ok_or_else(|| ClientError::InvalidRequest("script exhausted".into()))
    }
}

#[test]
fn rendered_history_is_byte_exact() {
    let text = render_history(&golden_state(), GOLDEN_MODEL).unwrap();
    assert_eq!(text, GOLDEN_HISTORY);
}

#[test]
fn scripted_game_reproduces_every_intermediate_value() {
    let backend = Scripted { replies: Mutex::new(golden_replies().into()) };
    let state = run_game(
        &golden_questions(),
        5,
        &ScoringRule::symmetric(),
        &backend,
        &StageOptions::default(),
    )
    .unwrap();

    let scores: Vec<i64> = state.rounds.iter().map(|r| r.cumulative_score).collect();
    assert_eq!(scores, vec![68, 136, 51, 136, 221]);

    let accuracies: Vec<String> =
        state.rounds.iter().map(|r| format!("{:.2}", r.cumulative_accuracy_pct)).collect();
    assert_eq!(accuracies, vec!["100.00", "100.00", "66.67", "75.00", "80.00"]);

    use CalibrationStatus::*;
    let statuses: Vec<CalibrationStatus> = state.rounds.iter().map(|r| r.status).collect();
    assert_eq!(
        statuses,
        vec![Underconfident, Underconfident, Overconfident, Overconfident, Overconfident]
    );

    assert_eq!(state.totals.correct, 4);
    assert_eq!(state.totals.questions, 5);
    assert_eq!(format!("{:.2}", state.totals.mean_confidence_pct), "86.00");

    // The state built through the pipeline renders the same bytes.
    assert_eq!(render_history(&state, GOLDEN_MODEL).unwrap(), GOLDEN_HISTORY);
}

#[test]
fn digest_of_the_golden_game() {
    let digest = render_final_digest(&golden_state()).unwrap();
    assert!(digest.contains("Accuracy: 80.00%"));
    assert!(digest.contains("Average Confidence: 86.00%"));
    assert!(digest.contains("Total Score: 221"));
    assert!(digest.contains("You were overconfident overall."));
}

#[test]
fn history_round_trips_through_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rounds.jsonl");
    let state = golden_state();
    credence::pipeline::write_jsonl(&path, &state.rounds).unwrap();
    let rounds: Vec<credence::domain::RoundRecord> =
        credence::pipeline::read_jsonl(&path).unwrap();
    assert_eq!(rounds, state.rounds);
}

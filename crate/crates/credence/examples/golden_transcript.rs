//! Replays a fixed five-round symmetric game and renders the history
//! text and final digest, round by round.
//!
//! ```bash
//! cargo run -p credence --example golden_transcript
//! ```

use credence::domain::{GameState, Gold, PredictionRecord, ScoringRuleId};
use credence::game::{render_final_digest, render_history};
use credence::scoring::ScoringRule;

fn main() {
    // (answer, gold, reported confidence) per round.
    let plays = [("B", "B", 80u8), ("A", "A", 80), ("B", "A", 90), ("B", "B", 90), ("A", "A", 90)];

    let rule = ScoringRule::symmetric();
    let mut state = GameState::new(ScoringRuleId::Symmetric);
    for (i, (answer, gold, confidence)) in plays.iter().enumerate() {
        let prediction = PredictionRecord {
            question_id: format!("q{}", i + 1),
            raw_answer: answer.to_string(),
            canonical_answer: answer.to_string(),
            verbalized_confidence: *confidence,
            normalized_confidence: f64::from(*confidence) / 100.0,
            correct: answer == gold,
            gold: Gold::Label(gold.to_string()),
            valid: true,
        };
        let round = state.apply_round(prediction, &rule).unwrap();
        println!(
            "round {}: {} at {}% -> {:+} points (total {})",
            round.round_index,
            if round.prediction.correct { "correct" } else { "incorrect" },
            round.game_confidence.percent(),
            round.score_delta,
            round.cumulative_score
        );
    }

    println!();
    println!("--- rendered history ---");
    print!("{}", render_history(&state, "meta-llama/Meta-Llama-3.1-8B-Instruct-Turbo").unwrap());
    println!();
    println!("--- post-game digest ---");
    println!("{}", render_final_digest(&state).unwrap());
}

//! Shared test support: brute-force metric oracles kept independent of
//! the library's implementations, fixture builders, and the golden
//! five-round game transcript.

#![allow(dead_code)]

use std::collections::BTreeSet;

use credence::domain::{
    Choice, GameState, Gold, PredictionRecord, Question, QuestionKind, ScoringRuleId,
};
use credence::scoring::ScoringRule;

// ---------------------------------------------------------------------
// Brute-force oracles. Each takes (confidence, correct) pairs directly
// so it shares no filtering or binning code with the implementation.
// ---------------------------------------------------------------------

pub fn accuracy_oracle(samples: &[(f64, bool)]) -> f64 {
    let mut hits = 0usize;
    for &(_, correct) in samples {
        if correct {
            hits += 1;
        }
    }
    hits as f64 / samples.len() as f64
}

pub fn brier_oracle(samples: &[(f64, bool)]) -> f64 {
    let mut total = 0.0;
    for &(p, correct) in samples {
        let outcome = if correct { 1.0 } else { 0.0 };
        total += (p - outcome) * (p - outcome);
    }
    total / samples.len() as f64
}

/// Scans each bin's half-open range explicitly (last bin closed) rather
/// than computing bin indices.
pub fn ece_oracle(samples: &[(f64, bool)], num_bins: usize) -> f64 {
    let n = samples.len() as f64;
    let mut total = 0.0;
    for m in 0..num_bins {
        let lower = m as f64 / num_bins as f64;
        let upper = (m + 1) as f64 / num_bins as f64;
        let last = m == num_bins - 1;
        let members: Vec<&(f64, bool)> = samples
            .iter()
            .filter(|(p, _)| *p >= lower && (*p < upper || (last && *p <= upper)))
            .collect();
        if members.is_empty() {
            continue;
        }
        let count = members.len() as f64;
        let conf = members.iter().map(|(p, _)| *p).sum::<f64>() / count;
        let acc = members.iter().filter(|(_, c)| *c).count() as f64 / count;
        total += count / n * (acc - conf).abs();
    }
    total
}

/// All (correct, incorrect) pairs enumerated; ties count one half.
pub fn auroc_oracle(samples: &[(f64, bool)]) -> Option<f64> {
    let pos: Vec<f64> = samples.iter().filter(|(_, c)| *c).map(|(p, _)| *p).collect();
    let neg: Vec<f64> = samples.iter().filter(|(_, c)| !*c).map(|(p, _)| *p).collect();
    if pos.is_empty() || neg.is_empty() {
        return None;
    }
    let mut wins = 0.0;
    for &p in &pos {
        for &q in &neg {
            if p > q {
                wins += 1.0;
            } else if p == q {
                wins += 0.5;
            }
        }
    }
    Some(wins / (pos.len() as f64 * neg.len() as f64))
}

// ---------------------------------------------------------------------
// Fixture builders.
// ---------------------------------------------------------------------

/// Valid record with the given confidence and correctness; ids are made
/// unique by index so question-set digests stay comparable.
pub fn record(index: usize, confidence: f64, correct: bool) -> PredictionRecord {
    PredictionRecord {
        question_id: format!("q{index:04}"),
        raw_answer: "A".into(),
        canonical_answer: "A".into(),
        verbalized_confidence: (confidence * 100.0).round().clamp(0.0, 100.0) as u8,
        normalized_confidence: confidence,
        correct,
        gold: Gold::Label("A".into()),
        valid: true,
    }
}

pub fn records_from_samples(samples: &[(f64, bool)]) -> Vec<PredictionRecord> {
    samples.iter().enumerate().map(|(i, &(p, c))| record(i, p, c)).collect()
}

pub fn two_choice_question(id: &str, gold: &str) -> Question {
    Question {
        id: id.to_string(),
        kind: QuestionKind::TwoChoiceGame,
        prompt_text: format!("two-choice question {id}"),
        choices: vec![Choice::new("A", "first option"), Choice::new("B", "second option")],
        gold: Gold::Label(gold.to_string()),
        context: None,
        category: None,
    }
}

pub fn mcq_question(id: &str, n_choices: usize, gold_index: usize, category: &str) -> Question {
    let choices: Vec<Choice> = (0..n_choices)
        .map(|i| Choice::new(char::from(b'A' + i as u8).to_string(), format!("option {i}")))
        .collect();
    let gold = choices[gold_index].label.clone();
    Question {
        id: id.to_string(),
        kind: QuestionKind::MultipleChoice,
        prompt_text: format!("mcq {id}"),
        choices,
        gold: Gold::Label(gold),
        context: None,
        category: Some(category.to_string()),
    }
}

pub fn open_question(id: &str, aliases: &[&str]) -> Question {
    Question {
        id: id.to_string(),
        kind: QuestionKind::OpenEnded,
        prompt_text: format!("open question {id}"),
        choices: vec![],
        gold: Gold::Aliases(aliases.iter().map(|a| a.to_string()).collect::<BTreeSet<_>>()),
        context: None,
        category: None,
    }
}

// ---------------------------------------------------------------------
// The golden five-round symmetric game.
// ---------------------------------------------------------------------

/// (answer, gold, confidence) per round.
pub const GOLDEN_PLAYS: [(&str, &str, u8); 5] =
    [("B", "B", 80), ("A", "A", 80), ("B", "A", 90), ("B", "B", 90), ("A", "A", 90)];

pub const GOLDEN_MODEL: &str = "meta-llama/Meta-Llama-3.1-8B-Instruct-Turbo";

pub fn golden_questions() -> Vec<Question> {
    GOLDEN_PLAYS
        .iter()
        .enumerate()
        .map(|(i, (_, gold, _))| two_choice_question(&format!("q{}", i + 1), gold))
        .collect()
}

/// Scripted assistant replies: the handshake plus five answers.
pub fn golden_replies() -> Vec<String> {
    let mut replies = vec!["Okay, I'm ready!".to_string()];
    replies.extend(
        GOLDEN_PLAYS
            .iter()
            .map(|(answer, _, confidence)| format!("Answer: {answer}\nConfidence: {confidence}")),
    );
    replies
}

pub fn golden_state() -> GameState {
    let rule = ScoringRule::symmetric();
    let mut state = GameState::new(ScoringRuleId::Symmetric);
    for (i, (answer, gold, confidence)) in GOLDEN_PLAYS.iter().enumerate() {
        let rec = PredictionRecord {
            question_id: format!("q{}", i + 1),
            raw_answer: answer.to_string(),
            canonical_answer: answer.to_string(),
            verbalized_confidence: *confidence,
            normalized_confidence: f64::from(*confidence) / 100.0,
            correct: answer == gold,
            gold: Gold::Label(gold.to_string()),
            valid: true,
        };
        state.apply_round(rec, &rule).expect("golden rounds are valid");
    }
    state
}

/// Malformed replies with the parse-error category each must produce.
pub fn malformed_reply_corpus() -> Vec<(&'static str, &'static str)> {
    vec![
        ("", "missing_answer"),
        ("I think the answer is B.", "missing_answer"),
        ("Confidence: 80", "missing_answer"),
        ("Answer:\nConfidence: 80", "missing_answer"),
        ("answer B confidence 80", "missing_answer"),
        ("ANSWER - B\nConfidence: 80", "missing_answer"),
        ("Answer: B", "missing_confidence"),
        ("Answer: B\nConfidence:", "missing_confidence"),
        ("Answer: B\nConfidence: very high", "missing_confidence"),
        ("Answer: B\nConfidence: eighty", "missing_confidence"),
        ("Answer: B\nConfidence: NaN", "missing_confidence"),
        ("Answer: B\nConfidence: 0.8 probability-ish", "missing_confidence"),
        ("Answer: B\nCONFIDENCE LEVEL 80", "missing_confidence"),
        ("Answer: B\nConfidence: 101", "confidence_out_of_range"),
        ("Answer: B\nConfidence: -1", "confidence_out_of_range"),
        ("Answer: B\nConfidence: 800", "confidence_out_of_range"),
        ("Answer: B\nConfidence: -40", "confidence_out_of_range"),
        ("Answer: Z\nConfidence: 80", "unknown_label"),
        ("Answer: 7\nConfidence: 80", "unknown_label"),
        ("Answer: maybe B or A\nConfidence: 80", "unknown_label"),
        ("Answer: AB\nConfidence: 80", "unknown_label"),
        ("Answer: ?\nConfidence: 60", "unknown_label"),
    ]
}

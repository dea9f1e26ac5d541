//! Prompt construction for every stage and strict parsing of model
//! replies into prediction records.
//!
//! The reply format is two labeled lines, `Answer:` and `Confidence:`.
//! Surrounding prose is tolerated; when a line appears more than once
//! the last occurrence wins, since models often restate before deciding.

use std::sync::LazyLock;

use regex::Regex;
use thiserror::Error;

use crate::domain::{Gold, PredictionRecord, Question, QuestionKind};
use crate::scoring::ScoringRule;

/// Version tag of the prompt templates, recorded in run manifests.
pub const TEMPLATE_VERSION: &str = "v1";

const RULES_TEMPLATE: &str = include_str!("protocol/templates/rules.txt");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("missing_answer: no `Answer:` line found")]
    MissingAnswer,
    #[error("missing_confidence: no parseable `Confidence:` line found")]
    MissingConfidence,
    #[error("confidence_out_of_range: {got} is outside 0..=100")]
    ConfidenceOutOfRange { got: i64 },
    #[error("unknown_label: `{got}` is not a listed choice label")]
    UnknownLabel { got: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("self-calibration follow-up requires a non-empty prior answer")]
    EmptyPriorAnswer,
}

fn format_cell(points: i64) -> String {
    if points == 0 {
        "0".to_string()
    } else {
        format!("{points:+}")
    }
}

fn score_table(rule: &ScoringRule) -> String {
    let header: Vec<String> = crate::domain::ConfidenceLevel::ALL
        .iter()
        .map(|l| format!("{}%", l.percent()))
        .collect();
    let rewards: Vec<String> = crate::domain::ConfidenceLevel::ALL
        .iter()
        .map(|l| format_cell(rule.reward(*l)))
        .collect();
    let penalties: Vec<String> = crate::domain::ConfidenceLevel::ALL
        .iter()
        .map(|l| format_cell(rule.penalty(*l)))
        .collect();
    format!(
        "Reported Confidence | {}\nIf correct | {}\nIf incorrect | {}",
        header.join(" | "),
        rewards.join(" | "),
        penalties.join(" | ")
    )
}

/// The game-rules instruction block, with the scoring table of the
/// selected rule substituted in. Ends with the readiness handshake line.
pub fn rules_prompt(rule: &ScoringRule) -> String {
    RULES_TEMPLATE.replace("{{score_table}}", &score_table(rule))
}

fn answer_placeholder(kind: QuestionKind) -> &'static str {
    match kind {
        QuestionKind::MultipleChoice | QuestionKind::TwoChoiceGame => "Answer: <option label>",
        QuestionKind::OpenEnded => "Answer: <your answer>",
    }
}

fn question_block(q: &Question) -> String {
    let mut out = String::new();
    if let Some(context) = &q.context {
        if !context.is_empty() {
            out.push_str("Context: ");
            out.push_str(context);
            out.push_str("\n\n");
        }
    }
    out.push_str("Question: ");
    out.push_str(&q.prompt_text);
    out.push('\n');
    if !q.choices.is_empty() {
        out.push_str("Options:\n");
        for choice in &q.choices {
            out.push_str(&format!("{}. {}\n", choice.label, choice.text));
        }
    }
    out
}

/// Evaluation prompt for one question. Pre-game calls pass no digest;
/// post-game calls prefix the game-history digest.
pub fn eval_prompt(q: &Question, digest: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(digest) = digest {
        out.push_str(digest);
        out.push_str("\n\n");
    }
    out.push_str(&question_block(q));
    out.push('\n');
    out.push_str(
        "Answer the question, then report how confident you are that your answer is correct, \
         as an integer between 0 and 100.\n",
    );
    out.push_str("Respond in exactly this format:\n");
    out.push_str(answer_placeholder(q.kind));
    out.push_str("\nConfidence: <integer 0-100>");
    out
}

/// In-game prompt for one round.
pub fn game_round_prompt(q: &Question, round_index: usize) -> String {
    let mut out = format!("Question {round_index}\n");
    out.push_str(&question_block(q));
    out.push('\n');
    out.push_str("Report your confidence as one of: 50, 60, 70, 80, 90, 99.\n");
    out.push_str("Respond in exactly this format:\n");
    out.push_str(answer_placeholder(q.kind));
    out.push_str("\nConfidence: <confidence>");
    out
}

/// Reflection query of the self-calibration baseline. The confidence it
/// elicits replaces the first-turn confidence in the record.
pub fn self_cal_followup(prior_answer: &str) -> Result<String, ProtocolError> {
    if prior_answer.trim().is_empty() {
        return Err(ProtocolError::EmptyPriorAnswer);
    }
    Ok("Is your previous answer correct? Report your confidence that your previous answer \
        is correct as an integer between 0 and 100.\n\
        Respond in exactly this format:\n\
        Judgment: <yes or no>\n\
        Confidence: <integer 0-100>"
        .to_string())
}

/// Re-ask message appended after an unparseable reply.
pub fn format_reminder(q: &Question) -> String {
    format!(
        "Your previous reply could not be parsed.\n\
         Respond in exactly this format:\n\
         {}\nConfidence: <integer 0-100>",
        answer_placeholder(q.kind)
    )
}

/// Re-ask message for an unparseable reflection reply.
pub fn reflection_reminder() -> String {
    "Your previous reply could not be parsed.\n\
     Respond in exactly this format:\n\
     Judgment: <yes or no>\n\
     Confidence: <integer 0-100>"
        .to_string()
}

/// A reply in the declared format, as backends and tests synthesize it.
pub fn synth_reply(answer: &str, confidence: u8) -> String {
    format!("Answer: {answer}\nConfidence: {confidence}")
}

/// Canonical form for open-ended answer matching: lowercase, punctuation
/// stripped, whitespace collapsed, one leading article dropped.
pub fn normalize_answer(text: &str) -> String {
    let lowered: String = text
        .to_lowercase()
        .chars()
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .collect();
    let mut tokens: Vec<&str> = lowered.split_whitespace().collect();
    if matches!(tokens.first(), Some(&"a") | Some(&"an") | Some(&"the")) && tokens.len() > 1 {
        tokens.remove(0);
    }
    tokens.join(" ")
}

// Horizontal whitespace only: `\s` would swallow the newline and read
// the next line as the field value.
static ANSWER_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?im)^[ \t]*answer[ \t]*:[ \t]*(.*)$").expect("static regex"));
static CONFIDENCE_LINE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?im)^[ \t]*confidence[ \t]*:[ \t]*(.*)$").expect("static regex")
});

fn last_capture<'t>(re: &Regex, text: &'t str) -> Option<&'t str> {
    re.captures_iter(text)
        .last()
        .and_then(|c| c.get(1))
        .map(|m| m.as_str().trim())
}

fn parse_confidence_value(text: &str) -> Result<u8, ParseError> {
    let token = text
        .split_whitespace()
        .next()
        .unwrap_or("")
        .trim_end_matches(['%', '.', ',']);
    let value: i64 = token.parse().map_err(|_| ParseError::MissingConfidence)?;
    if !(0..=100).contains(&value) {
        return Err(ParseError::ConfidenceOutOfRange { got: value });
    }
    Ok(value as u8)
}

fn match_label<'q>(candidate: &str, q: &'q Question) -> Result<&'q str, ParseError> {
    let exact = q
        .choices
        .iter()
        .find(|c| c.label.eq_ignore_ascii_case(candidate));
    if let Some(choice) = exact {
        return Ok(&choice.label);
    }
    // Tolerate forms like "B." or "B) Paris": match the leading token.
    let leading: String = candidate
        .chars()
        .take_while(|c| c.is_alphanumeric())
        .collect();
    if !leading.is_empty() {
        if let Some(choice) = q
            .choices
            .iter()
            .find(|c| c.label.eq_ignore_ascii_case(&leading))
        {
            return Ok(&choice.label);
        }
    }
    Err(ParseError::UnknownLabel {
        got: candidate.to_string(),
    })
}

/// Extracts the answer and integer confidence from a model reply and
/// grades the answer against the question's gold.
pub fn parse_reply(raw: &str, q: &Question) -> Result<PredictionRecord, ParseError> {
    let answer_text = last_capture(&ANSWER_LINE, raw).ok_or(ParseError::MissingAnswer)?;
    if answer_text.is_empty() {
        return Err(ParseError::MissingAnswer);
    }
    let confidence_text =
        last_capture(&CONFIDENCE_LINE, raw).ok_or(ParseError::MissingConfidence)?;
    let confidence = parse_confidence_value(confidence_text)?;

    let (canonical, correct) = match q.kind {
        QuestionKind::MultipleChoice | QuestionKind::TwoChoiceGame => {
            let label = match_label(answer_text, q)?;
            let correct = matches!(&q.gold, Gold::Label(gold) if gold == label);
            (label.to_string(), correct)
        }
        QuestionKind::OpenEnded => {
            let canonical = normalize_answer(answer_text);
            let correct = matches!(
                &q.gold,
                Gold::Aliases(aliases) if aliases.iter().any(|a| normalize_answer(a) == canonical)
            );
            (canonical, correct)
        }
    };

    Ok(PredictionRecord {
        question_id: q.id.clone(),
        raw_answer: answer_text.to_string(),
        canonical_answer: canonical,
        verbalized_confidence: confidence,
        normalized_confidence: f64::from(confidence) / 100.0,
        correct,
        gold: q.gold.clone(),
        valid: true,
    })
}

/// Extracts the confidence from a self-calibration reflection reply.
pub fn parse_reflection_confidence(raw: &str) -> Result<u8, ParseError> {
    let confidence_text =
        last_capture(&CONFIDENCE_LINE, raw).ok_or(ParseError::MissingConfidence)?;
    parse_confidence_value(confidence_text)
}

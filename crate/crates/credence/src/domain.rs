//! Core data types shared by every other module: questions, confidence
//! levels, prediction records, game state, and calibration reports.
//!
//! Values are immutable after construction and safe to share across
//! threads. The canonical on-disk form for [`PredictionRecord`] and
//! [`RoundRecord`] is one JSON object per line (JSONL) with field names
//! exactly as declared here.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Violation of a domain invariant, named after the broken rule.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ValidationError {
    #[error("too few choices: question `{id}` has {got}, needs at least 2")]
    TooFewChoices { id: String, got: usize },
    #[error("wrong choice count: two-choice question `{id}` has {got}, needs exactly 2")]
    WrongChoiceCount { id: String, got: usize },
    #[error("open-ended question `{id}` must not carry choices (has {got})")]
    UnexpectedChoices { id: String, got: usize },
    #[error("gold label `{label}` of question `{id}` is not among the choice labels")]
    GoldLabelNotInChoices { id: String, label: String },
    #[error("no accepted answers: open-ended question `{id}` has an empty alias set")]
    NoAcceptedAnswers { id: String },
    #[error("gold kind mismatch for question `{id}`: {expected} expected")]
    GoldKindMismatch { id: String, expected: &'static str },
    #[error("`{got}` is not a confidence level (expected one of 50, 60, 70, 80, 90, 99)")]
    NotAConfidenceLevel { got: u8 },
    #[error("unknown scoring rule `{got}` (expected `symmetric` or `exponential`)")]
    UnknownScoringRule { got: String },
}

/// What shape of answer a question expects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionKind {
    MultipleChoice,
    OpenEnded,
    TwoChoiceGame,
}

/// One labeled answer option.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Choice {
    pub label: String,
    pub text: String,
}

impl Choice {
    pub fn new(label: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            text: text.into(),
        }
    }
}

/// Ground truth for a question: a single choice label, or the set of
/// accepted alias strings for open-ended answers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Gold {
    Label(String),
    Aliases(BTreeSet<String>),
}

impl Gold {
    /// A single display string for rendering: the label itself, or the
    /// first alias in set order.
    pub fn display_primary(&self) -> &str {
        match self {
            Gold::Label(label) => label,
            Gold::Aliases(aliases) => aliases.iter().next().map(String::as_str).unwrap_or(""),
        }
    }
}

/// One evaluation or game item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub kind: QuestionKind,
    pub prompt_text: String,
    /// Ordered answer options; empty for open-ended questions.
    pub choices: Vec<Choice>,
    pub gold: Gold,
    /// Optional supporting context; `None` models the no-context setting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
    /// Dataset subject tag, kept for subject filtering.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
}

impl Question {
    /// Checks every `Question` invariant, returning the first violation.
    pub fn validate(&self) -> Result<(), ValidationError> {
        match self.kind {
            QuestionKind::MultipleChoice => {
                if self.choices.len() < 2 {
                    return Err(ValidationError::TooFewChoices {
                        id: self.id.clone(),
                        got: self.choices.len(),
                    });
                }
                self.validate_gold_label()
            }
            QuestionKind::TwoChoiceGame => {
                if self.choices.len() != 2 {
                    return Err(ValidationError::WrongChoiceCount {
                        id: self.id.clone(),
                        got: self.choices.len(),
                    });
                }
                self.validate_gold_label()
            }
            QuestionKind::OpenEnded => {
                if !self.choices.is_empty() {
                    return Err(ValidationError::UnexpectedChoices {
                        id: self.id.clone(),
                        got: self.choices.len(),
                    });
                }
                match &self.gold {
                    Gold::Aliases(aliases) if !aliases.is_empty() => Ok(()),
                    Gold::Aliases(_) => Err(ValidationError::NoAcceptedAnswers {
                        id: self.id.clone(),
                    }),
                    Gold::Label(_) => Err(ValidationError::GoldKindMismatch {
                        id: self.id.clone(),
                        expected: "alias set",
                    }),
                }
            }
        }
    }

    fn validate_gold_label(&self) -> Result<(), ValidationError> {
        match &self.gold {
            Gold::Label(label) => {
                if self.choices.iter().any(|c| &c.label == label) {
                    Ok(())
                } else {
                    Err(ValidationError::GoldLabelNotInChoices {
                        id: self.id.clone(),
                        label: label.clone(),
                    })
                }
            }
            Gold::Aliases(_) => Err(ValidationError::GoldKindMismatch {
                id: self.id.clone(),
                expected: "choice label",
            }),
        }
    }
}

/// One of the six confidence levels the game accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct ConfidenceLevel(u8);

impl ConfidenceLevel {
    /// All levels in ascending order.
    pub const ALL: [ConfidenceLevel; 6] = [
        ConfidenceLevel(50),
        ConfidenceLevel(60),
        ConfidenceLevel(70),
        ConfidenceLevel(80),
        ConfidenceLevel(90),
        ConfidenceLevel(99),
    ];

    pub fn from_percent(percent: u8) -> Result<Self, ValidationError> {
        Self::ALL
            .into_iter()
            .find(|level| level.0 == percent)
            .ok_or(ValidationError::NotAConfidenceLevel { got: percent })
    }

    pub const fn percent(self) -> u8 {
        self.0
    }

    /// Position of this level within [`Self::ALL`].
    pub fn index(self) -> usize {
        Self::ALL.iter().position(|l| *l == self).expect("level is one of ALL")
    }
}

impl TryFrom<u8> for ConfidenceLevel {
    type Error = ValidationError;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        Self::from_percent(value)
    }
}

impl From<ConfidenceLevel> for u8 {
    fn from(level: ConfidenceLevel) -> u8 {
        level.0
    }
}

impl fmt::Display for ConfidenceLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which scoring rule a game runs under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoringRuleId {
    Symmetric,
    Exponential,
}

impl fmt::Display for ScoringRuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoringRuleId::Symmetric => write!(f, "symmetric"),
            ScoringRuleId::Exponential => write!(f, "exponential"),
        }
    }
}

impl FromStr for ScoringRuleId {
    type Err = ValidationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "symmetric" => Ok(ScoringRuleId::Symmetric),
            "exponential" => Ok(ScoringRuleId::Exponential),
            other => Err(ValidationError::UnknownScoringRule {
                got: other.to_string(),
            }),
        }
    }
}

/// One parsed model response to one question.
///
/// Unparseable replies are retained with `valid = false` rather than
/// dropped; metrics exclude them and report the count separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub question_id: String,
    /// The answer text as the model emitted it.
    pub raw_answer: String,
    /// Parsed choice label, or normalized open-ended answer text.
    pub canonical_answer: String,
    /// Confidence as reported, an integer in 0..=100.
    pub verbalized_confidence: u8,
    /// `verbalized_confidence / 100`, exactly.
    pub normalized_confidence: f64,
    /// Meaningful only when `valid` is true.
    pub correct: bool,
    /// Copy of the ground truth the answer was graded against.
    pub gold: Gold,
    pub valid: bool,
}

impl PredictionRecord {
    /// Record for a reply that could not be parsed after retries.
    pub fn invalid(question: &Question, raw: impl Into<String>) -> Self {
        Self {
            question_id: question.id.clone(),
            raw_answer: raw.into(),
            canonical_answer: String::new(),
            verbalized_confidence: 0,
            normalized_confidence: 0.0,
            correct: false,
            gold: question.gold.clone(),
            valid: false,
        }
    }
}

/// Calibration trend of a game in progress.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationStatus {
    Overconfident,
    Underconfident,
    WellCalibrated,
}

impl CalibrationStatus {
    /// Literal comparison of the two running percentages, no tolerance.
    pub fn from_percentages(mean_confidence_pct: f64, accuracy_pct: f64) -> Self {
        if mean_confidence_pct > accuracy_pct {
            CalibrationStatus::Overconfident
        } else if mean_confidence_pct < accuracy_pct {
            CalibrationStatus::Underconfident
        } else {
            CalibrationStatus::WellCalibrated
        }
    }
}

/// One completed game round with its score and running aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// 1-based round number.
    pub round_index: usize,
    pub prediction: PredictionRecord,
    /// The level the reported confidence snapped to for scoring.
    pub game_confidence: ConfidenceLevel,
    /// True when the reported confidence was off-level.
    pub snapped: bool,
    pub score_delta: i64,
    pub cumulative_score: i64,
    pub cumulative_accuracy_pct: f64,
    pub cumulative_mean_confidence_pct: f64,
    pub status: CalibrationStatus,
}

/// Aggregates over a whole game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameTotals {
    pub questions: usize,
    pub correct: usize,
    pub accuracy_pct: f64,
    pub mean_confidence_pct: f64,
    pub total_score: i64,
}

/// Full state of one calibration game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    pub scoring_rule_id: ScoringRuleId,
    pub rounds: Vec<RoundRecord>,
    pub totals: GameTotals,
}

/// One confidence interval's occupancy and means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    /// Defined only when the bin is occupied.
    pub mean_confidence: Option<f64>,
    pub mean_accuracy: Option<f64>,
}

/// Calibration metrics over a set of prediction records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    /// Count of valid records the metrics were computed over.
    pub n: usize,
    /// Count of excluded invalid records, disclosed alongside.
    pub invalid: usize,
    pub accuracy: f64,
    pub ece: f64,
    pub brier: f64,
    /// `None` when the records contain no correct or no incorrect
    /// predictions: a ranking probability would be fabricated.
    pub auroc: Option<f64>,
    pub bins: Vec<ReliabilityBin>,
    /// Digest of the sorted question-id set, used to reject comparisons
    /// across different question sets. `None` for reports built from
    /// bare metric values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question_set_digest: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_choice(gold: &str) -> Question {
        Question {
            id: "g1".into(),
            kind: QuestionKind::TwoChoiceGame,
            prompt_text: "Is the Atlantic larger than the Pacific?".into(),
            choices: vec![Choice::new("A", "Yes"), Choice::new("B", "No")],
            gold: Gold::Label(gold.into()),
            context: None,
            category: None,
        }
    }

    #[test]
    fn valid_two_choice_question_passes() {
        assert_eq!(two_choice("A").validate(), Ok(()));
    }

    #[test]
    fn multiple_choice_with_one_option_is_rejected() {
        let q = Question {
            id: "m1".into(),
            kind: QuestionKind::MultipleChoice,
            prompt_text: "Pick one".into(),
            choices: vec![Choice::new("A", "only option")],
            gold: Gold::Label("A".into()),
            context: None,
            category: None,
        };
        assert_eq!(
            q.validate(),
            Err(ValidationError::TooFewChoices {
                id: "m1".into(),
                got: 1
            })
        );
    }

    #[test]
    fn open_ended_with_empty_alias_set_is_rejected() {
        let q = Question {
            id: "o1".into(),
            kind: QuestionKind::OpenEnded,
            prompt_text: "Capital of France?".into(),
            choices: vec![],
            gold: Gold::Aliases(BTreeSet::new()),
            context: None,
            category: None,
        };
        assert_eq!(
            q.validate(),
            Err(ValidationError::NoAcceptedAnswers { id: "o1".into() })
        );
    }

    #[test]
    fn gold_label_must_be_a_listed_choice() {
        let q = two_choice("C");
        assert_eq!(
            q.validate(),
            Err(ValidationError::GoldLabelNotInChoices {
                id: "g1".into(),
                label: "C".into()
            })
        );
    }

    #[test]
    fn two_choice_needs_exactly_two_options() {
        let mut q = two_choice("A");
        q.choices.push(Choice::new("C", "Maybe"));
        assert_eq!(
            q.validate(),
            Err(ValidationError::WrongChoiceCount {
                id: "g1".into(),
                got: 3
            })
        );
    }

    #[test]
    fn confidence_level_rejects_off_level_values() {
        assert!(ConfidenceLevel::from_percent(85).is_err());
        assert_eq!(ConfidenceLevel::from_percent(99).unwrap().percent(), 99);
    }

    #[test]
    fn confidence_level_serde_enforces_levels() {
        let ok: ConfidenceLevel = serde_json::from_str("90").unwrap();
        assert_eq!(ok.percent(), 90);
        assert!(serde_json::from_str::<ConfidenceLevel>("85").is_err());
    }

    #[test]
    fn scoring_rule_id_parses_cli_tokens() {
        assert_eq!("symmetric".parse(), Ok(ScoringRuleId::Symmetric));
        assert_eq!("exponential".parse(), Ok(ScoringRuleId::Exponential));
        assert!("quadratic".parse::<ScoringRuleId>().is_err());
    }

    #[test]
    fn status_comparison_is_literal() {
        use CalibrationStatus::*;
        assert_eq!(CalibrationStatus::from_percentages(86.0, 80.0), Overconfident);
        assert_eq!(CalibrationStatus::from_percentages(80.0, 100.0), Underconfident);
        assert_eq!(CalibrationStatus::from_percentages(80.0, 80.0), WellCalibrated);
    }

    #[test]
    fn gold_serializes_as_string_or_array() {
        let label = Gold::Label("B".into());
        assert_eq!(serde_json::to_string(&label).unwrap(), "\"B\"");
        let aliases = Gold::Aliases(["paris".to_string()].into_iter().collect());
        assert_eq!(serde_json::to_string(&aliases).unwrap(), "[\"paris\"]");
        let back: Gold = serde_json::from_str("[\"paris\"]").unwrap();
        assert_eq!(back, aliases);
    }

    #[test]
    fn invalid_record_copies_gold_and_clears_confidence() {
        let q = two_choice("B");
        let rec = PredictionRecord::invalid(&q, "garbled");
        assert!(!rec.valid);
        assert!(!rec.correct);
        assert_eq!(rec.verbalized_confidence, 0);
        assert_eq!(rec.gold, Gold::Label("B".into()));
    }
}

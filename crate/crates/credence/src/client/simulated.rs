//! Deterministic simulated agent: answers correctly with a configured
//! probability and reports a confidence that drifts toward its running
//! accuracy when feedback is supplied.
//!
//! Correctness draws are keyed by (seed, question id), so replies are
//! reproducible and independent of the order questions arrive in.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{Gold, Question, QuestionKind};
use crate::protocol;
use crate::seeded::{combine_seeds, keyed_rng};

use super::{ClientError, Message, ModelBackend, FeedbackSnapshot, TurnContext, TurnKind};

/// Behavioral parameters of a simulated agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentPolicy {
    /// Probability of answering any question correctly.
    pub true_accuracy: f64,
    /// Offset in percentage points added to the reported confidence.
    pub confidence_bias: f64,
    /// How strongly feedback shifts the report toward running accuracy,
    /// in [0, 1].
    pub responsiveness: f64,
    #[serde(default)]
    pub seed: u64,
}

impl AgentPolicy {
    /// Policy for one experiment run: the run seed folded into the
    /// policy seed so repeat runs draw independent streams.
    pub fn for_run(mut self, run_seed: u64) -> Self {
        self.seed = combine_seeds(self.seed, run_seed);
        self
    }
}

pub struct SimulatedAgent {
    policy: AgentPolicy,
    name: String,
}

impl SimulatedAgent {
    pub fn new(policy: AgentPolicy) -> Self {
        Self { policy, name: "simulated-agent".to_string() }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn policy(&self) -> &AgentPolicy {
        &self.policy
    }

    /// Whether this agent answers the given question correctly. A pure
    /// function of (policy seed, question id).
    pub fn draws_correct(&self, question_id: &str) -> bool {
        keyed_rng(self.policy.seed, question_id).gen::<f64>() < self.policy.true_accuracy
    }

    /// Unconditioned report level: what the agent says absent feedback.
    fn base_confidence(&self) -> f64 {
        100.0 * self.policy.true_accuracy + self.policy.confidence_bias
    }

    /// Feedback shifts the report from the agent's own level toward the
    /// running accuracy, linearly in responsiveness. At responsiveness 1
    /// the report tracks running accuracy outright.
    fn reported_confidence(&self, feedback: Option<&FeedbackSnapshot>) -> u8 {
        let base = self.base_confidence();
        let mut value = base;
        if let Some(fb) = feedback {
            value += self.policy.responsiveness * (fb.accuracy_pct - base);
        }
        value.round().clamp(0.0, 100.0) as u8
    }

    fn answer_text(&self, q: &Question, correct: bool) -> String {
        let mut rng = keyed_rng(self.policy.seed, &q.id);
        let _: f64 = rng.gen(); // skip the correctness draw
        match q.kind {
            QuestionKind::MultipleChoice | QuestionKind::TwoChoiceGame => {
                let gold_label = match &q.gold {
                    Gold::Label(label) => label.as_str(),
                    Gold::Aliases(_) => "",
                };
                if correct {
                    gold_label.to_string()
                } else {
                    let wrong: Vec<&str> = q
                        .choices
                        .iter()
                        .map(|c| c.label.as_str())
                        .filter(|l| *l != gold_label)
                        .collect();
                    if wrong.is_empty() {
                        gold_label.to_string()
                    } else {
                        wrong[rng.gen_range(0..wrong.len())].to_string()
                    }
                }
            }
            QuestionKind::OpenEnded => {
                if correct {
                    q.gold.display_primary().to_string()
                } else {
                    // A marker that cannot collide with any real alias.
                    format!("deliberately-wrong-{:016x}", rng.gen::<u64>())
                }
            }
        }
    }

    /// One reply in the declared format: answers correctly with
    /// probability `true_accuracy`, confidence per the policy formula.
    pub fn simulate_reply(&self, q: &Question, feedback: Option<&FeedbackSnapshot>) -> String {
        let correct = self.draws_correct(&q.id);
        protocol::synth_reply(&self.answer_text(q, correct), self.reported_confidence(feedback))
    }

    fn reflection_reply(&self, q: &Question) -> String {
        let judgment = if self.draws_correct(&q.id) { "yes" } else { "no" };
        format!("Judgment: {judgment}\nConfidence: {}", self.reported_confidence(None))
    }
}

impl ModelBackend for SimulatedAgent {
    fn model_name(&self) -> &str {
        &self.name
    }

    fn reply(&self, _conversation: &[Message], ctx: &TurnContext<'_>) -> Result<String, ClientError> {
        match ctx.kind {
            TurnKind::GameHandshake => Ok("Okay, I'm ready!".to_string()),
            TurnKind::SelfCalReflection => {
                let q = ctx.question.ok_or_else(|| {
                    ClientError::InvalidRequest("reflection turn without a question".into())
                })?;
                Ok(self.reflection_reply(q))
            }
            TurnKind::Evaluation | TurnKind::GameRound | TurnKind::SelfCalAnswer => {
                let q = ctx.question.ok_or_else(|| {
                    ClientError::InvalidRequest("answer turn without a question".into())
                })?;
                Ok(self.simulate_reply(q, ctx.feedback.as_ref()))
            }
        }
    }

    fn max_in_flight(&self) -> usize {
        8
    }
}

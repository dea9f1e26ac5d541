//! The two game scoring rules and their closed-form cross-checks.
//!
//! The table constants are authoritative; the logarithmic closed forms
//! exist to cross-check them. Both rules share the reward column; they
//! differ in how hard they punish confident mistakes.

use thiserror::Error;

use crate::domain::{ConfidenceLevel, ScoringRuleId};

/// Reward for a correct answer at each level, shared by both rules.
const REWARDS: [i64; 6] = [0, 26, 49, 68, 85, 99];
/// Symmetric penalties mirror the rewards.
const SYMMETRIC_PENALTIES: [i64; 6] = [0, -26, -49, -68, -85, -99];
/// Exponential penalties grow with the information content of the error.
const EXPONENTIAL_PENALTIES: [i64; 6] = [0, -32, -74, -132, -232, -564];

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum ScoringError {
    #[error("confidence {got} outside the open interval (0.5, 1.0)")]
    OutOfDomain { got: f64 },
}

/// A confidence-level -> (reward, penalty) table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScoringRule {
    id: ScoringRuleId,
    rewards: [i64; 6],
    penalties: [i64; 6],
}

impl ScoringRule {
    pub const fn symmetric() -> Self {
        Self {
            id: ScoringRuleId::Symmetric,
            rewards: REWARDS,
            penalties: SYMMETRIC_PENALTIES,
        }
    }

    pub const fn exponential() -> Self {
        Self {
            id: ScoringRuleId::Exponential,
            rewards: REWARDS,
            penalties: EXPONENTIAL_PENALTIES,
        }
    }

    pub const fn from_id(id: ScoringRuleId) -> Self {
        match id {
            ScoringRuleId::Symmetric => Self::symmetric(),
            ScoringRuleId::Exponential => Self::exponential(),
        }
    }

    pub const fn id(&self) -> ScoringRuleId {
        self.id
    }

    pub fn reward(&self, confidence: ConfidenceLevel) -> i64 {
        self.rewards[confidence.index()]
    }

    /// Stored as a negative number (or zero at the 50% guess anchor).
    pub fn penalty(&self, confidence: ConfidenceLevel) -> i64 {
        self.penalties[confidence.index()]
    }

    /// Points for one answer: the table cell for (level, correctness).
    pub fn score(&self, confidence: ConfidenceLevel, correct: bool) -> i64 {
        if correct {
            self.reward(confidence)
        } else {
            self.penalty(confidence)
        }
    }
}

fn check_domain(c: f64) -> Result<(), ScoringError> {
    if c > 0.5 && c < 1.0 {
        Ok(())
    } else {
        Err(ScoringError::OutOfDomain { got: c })
    }
}

/// Round half away from zero, the convention that reproduces the table.
fn round_magnitude(x: f64) -> i64 {
    x.round() as i64
}

/// Reward implied by the information gained over a 50% prior:
/// `round(100 * log2(c / 0.5))`.
pub fn closed_form_reward(c: f64) -> Result<i64, ScoringError> {
    check_domain(c)?;
    Ok(round_magnitude(100.0 * (c / 0.5).log2()))
}

/// Penalty implied by the misleading information of a confident error:
/// the negative of `round(100 * -log2((1 - c) / 0.5))`.
pub fn closed_form_penalty(c: f64) -> Result<i64, ScoringError> {
    check_domain(c)?;
    Ok(-round_magnitude(100.0 * -((1.0 - c) / 0.5).log2()))
}

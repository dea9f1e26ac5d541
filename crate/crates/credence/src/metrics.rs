//! Calibration metrics over prediction records: accuracy, expected
//! calibration error with reliability bins, Brier score, and AUROC.
//!
//! Invalid records are excluded everywhere and surfaced as a count.
//! AUROC uses the rank form of the Mann-Whitney U estimator, so tied
//! confidences contribute 0.5 per (correct, incorrect) pair.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::domain::{CalibrationReport, PredictionRecord, ReliabilityBin};

pub const DEFAULT_NUM_BINS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("no valid records to compute metrics over")]
    EmptyInput,
    #[error("bin count must be at least 1")]
    InvalidBinCount,
    #[error("reports cover different question sets and cannot be compared")]
    MismatchedQuestionSets,
}

fn valid(records: &[PredictionRecord]) -> Vec<&PredictionRecord> {
    records.iter().filter(|r| r.valid).collect()
}

/// Fraction of valid records answered correctly.
pub fn accuracy(records: &[PredictionRecord]) -> Result<f64, MetricsError> {
    let valid = valid(records);
    if valid.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let correct = valid.iter().filter(|r| r.correct).count();
    Ok(correct as f64 / valid.len() as f64)
}

/// Expected calibration error over equal-width confidence bins, plus the
/// bin table itself. Bins are `[m/k, (m+1)/k)` with the last bin closed
/// on the right.
pub fn ece(
    records: &[PredictionRecord],
    num_bins: usize,
) -> Result<(f64, Vec<ReliabilityBin>), MetricsError> {
    if num_bins == 0 {
        return Err(MetricsError::InvalidBinCount);
    }
    let valid = valid(records);
    if valid.is_empty() {
        return Err(MetricsError::EmptyInput);
    }

    let mut counts = vec![0usize; num_bins];
    let mut conf_sums = vec![0.0f64; num_bins];
    let mut correct_counts = vec![0usize; num_bins];
    for record in &valid {
        let p = record.normalized_confidence;
        let idx = ((p * num_bins as f64).floor() as usize).min(num_bins - 1);
        counts[idx] += 1;
        conf_sums[idx] += p;
        correct_counts[idx] += usize::from(record.correct);
    }

    let n = valid.len() as f64;
    let mut total = 0.0;
    let mut bins = Vec::with_capacity(num_bins);
    for m in 0..num_bins {
        let (mean_confidence, mean_accuracy) = if counts[m] > 0 {
            let conf = conf_sums[m] / counts[m] as f64;
            let acc = correct_counts[m] as f64 / counts[m] as f64;
            total += counts[m] as f64 / n * (acc - conf).abs();
            (Some(conf), Some(acc))
        } else {
            (None, None)
        };
        bins.push(ReliabilityBin {
            lower: m as f64 / num_bins as f64,
            upper: (m + 1) as f64 / num_bins as f64,
            count: counts[m],
            mean_confidence,
            mean_accuracy,
        });
    }
    Ok((total, bins))
}

/// Mean squared gap between confidence and the 0/1 correctness indicator.
pub fn brier(records: &[PredictionRecord]) -> Result<f64, MetricsError> {
    let valid = valid(records);
    if valid.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let sum: f64 = valid
        .iter()
        .map(|r| {
            let outcome = if r.correct { 1.0 } else { 0.0 };
            (r.normalized_confidence - outcome).powi(2)
        })
        .sum();
    Ok(sum / valid.len() as f64)
}

/// Probability that a correct prediction carries higher confidence than
/// an incorrect one, computed via tie-averaged ranks. `None` when either
/// class is empty: reporting 0.5 there would fabricate a ranking claim.
pub fn auroc(records: &[PredictionRecord]) -> Option<f64> {
    let valid = valid(records);
    let num_pos = valid.iter().filter(|r| r.correct).count();
    let num_neg = valid.len() - num_pos;
    if num_pos == 0 || num_neg == 0 {
        return None;
    }

    let mut scored: Vec<(f64, bool)> = valid
        .iter()
        .map(|r| (r.normalized_confidence, r.correct))
        .collect();
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));

    // Tied groups share the average of their 1-based ranks.
    let mut rank_sum_pos = 0.0f64;
    let mut start = 0;
    while start < scored.len() {
        let mut end = start;
        while end < scored.len() && scored[end].0 == scored[start].0 {
            end += 1;
        }
        let avg_rank = (start + 1 + end) as f64 / 2.0;
        for item in &scored[start..end] {
            if item.1 {
                rank_sum_pos += avg_rank;
            }
        }
        start = end;
    }

    let p = num_pos as f64;
    let u = rank_sum_pos - p * (p + 1.0) / 2.0;
    Some(u / (p * num_neg as f64))
}

/// Hex digest of the sorted question-id set, for paired-comparison checks.
pub fn question_set_digest(records: &[PredictionRecord]) -> String {
    let ids: BTreeSet<&str> = records.iter().map(|r| r.question_id.as_str()).collect();
    let mut hasher = Sha256::new();
    for id in ids {
        hasher.update(id.as_bytes());
        hasher.update(b"\n");
    }
    hex::encode(hasher.finalize())
}

/// Builds the full report over a record set.
pub fn report(records: &[PredictionRecord]) -> Result<CalibrationReport, MetricsError> {
    let (ece_value, bins) = ece(records, DEFAULT_NUM_BINS)?;
    let n = records.iter().filter(|r| r.valid).count();
    Ok(CalibrationReport {
        n,
        invalid: records.len() - n,
        accuracy: accuracy(records)?,
        ece: ece_value,
        brier: brier(records)?,
        auroc: auroc(records),
        bins,
        question_set_digest: Some(question_set_digest(records)),
    })
}

/// Report assembled from bare metric values, e.g. numbers published
/// elsewhere. Carries no bins and no question-set digest, so comparisons
/// against it skip the paired-set check.
pub fn report_from_values(
    n: usize,
    accuracy: f64,
    ece: f64,
    brier: f64,
    auroc: Option<f64>,
) -> CalibrationReport {
    CalibrationReport {
        n,
        invalid: 0,
        accuracy,
        ece,
        brier,
        auroc,
        bins: Vec::new(),
        question_set_digest: None,
    }
}

/// Signed per-metric differences (after - before) in percentage points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsDelta {
    pub ece_pp: f64,
    pub brier_pp: f64,
    pub auroc_pp: Option<f64>,
    pub accuracy_pp: f64,
}

impl MetricsDelta {
    /// Renders one delta the way comparison tables print it: signed,
    /// two decimals, e.g. `-1.78` or `+1.90`.
    pub fn format_pp(value: f64) -> String {
        format!("{value:+.2}")
    }

    pub fn formatted_ece(&self) -> String {
        Self::format_pp(self.ece_pp)
    }

    pub fn formatted_brier(&self) -> String {
        Self::format_pp(self.brier_pp)
    }

    pub fn formatted_accuracy(&self) -> String {
        Self::format_pp(self.accuracy_pp)
    }

    pub fn formatted_auroc(&self) -> String {
        match self.auroc_pp {
            Some(v) => Self::format_pp(v),
            None => "n/a".to_string(),
        }
    }
}

/// Per-metric change between two reports over the same question set.
pub fn compare(
    before: &CalibrationReport,
    after: &CalibrationReport,
) -> Result<MetricsDelta, MetricsError> {
    if let (Some(a), Some(b)) = (&before.question_set_digest, &after.question_set_digest) {
        if a != b {
            return Err(MetricsError::MismatchedQuestionSets);
        }
    }
    Ok(MetricsDelta {
        ece_pp: (after.ece - before.ece) * 100.0,
        brier_pp: (after.brier - before.brier) * 100.0,
        auroc_pp: match (before.auroc, after.auroc) {
            (Some(b), Some(a)) => Some((a - b) * 100.0),
            _ => None,
        },
        accuracy_pp: (after.accuracy - before.accuracy) * 100.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Gold;

    pub(crate) fn rec(confidence: f64, correct: bool) -> PredictionRecord {
        rec_with_id("q", confidence, correct)
    }

    pub(crate) fn rec_with_id(id: &str, confidence: f64, correct: bool) -> PredictionRecord {
        PredictionRecord {
            question_id: id.to_string(),
            raw_answer: "A".into(),
            canonical_answer: "A".into(),
            verbalized_confidence: (confidence * 100.0).round() as u8,
            normalized_confidence: confidence,
            correct,
            gold: Gold::Label("A".into()),
            valid: true,
        }
    }

    #[test]
    fn accuracy_counts_correct_fraction() {
        let records = vec![
            rec(0.8, true),
            rec(0.8, true),
            rec(0.8, true),
            rec(0.8, true),
            rec(0.8, false),
        ];
        assert_eq!(accuracy(&records).unwrap(), 0.80);
        assert_eq!(accuracy(&[rec(0.9, true)]).unwrap(), 1.0);
        assert_eq!(accuracy(&[rec(0.9, false)]).unwrap(), 0.0);
    }

    #[test]
    fn accuracy_errors_on_empty_or_all_invalid() {
        assert_eq!(accuracy(&[]), Err(MetricsError::EmptyInput));
        let mut r = rec(0.5, true);
        r.valid = false;
        assert_eq!(accuracy(&[r]), Err(MetricsError::EmptyInput));
    }

    #[test]
    fn perfectly_calibrated_certainty_has_zero_ece() {
        let records = vec![rec(1.0, true), rec(1.0, true)];
        let (value, _) = ece(&records, 10).unwrap();
        assert_eq!(value, 0.0);
    }

    #[test]
    fn ece_single_record_is_its_own_gap() {
        let (value, bins) = ece(&[rec(0.70, true)], 10).unwrap();
        assert!((value - 0.30).abs() < 1e-9);
        assert_eq!(bins.len(), 10);
        assert_eq!(bins[7].count, 1);
        assert_eq!(bins[7].mean_accuracy, Some(1.0));
    }

    #[test]
    fn last_bin_is_right_closed() {
        let (_, bins) = ece(&[rec(1.0, true)], 10).unwrap();
        assert_eq!(bins[9].count, 1);
    }

    #[test]
    fn bin_weights_sum_to_one() {
        let records = vec![rec(0.95, true), rec(0.95, false), rec(0.65, true), rec(0.1, false)];
        let (_, bins) = ece(&records, 10).unwrap();
        let total: usize = bins.iter().map(|b| b.count).sum();
        assert_eq!(total, 4);
    }

    #[test]
    fn brier_matches_hand_values() {
        assert_eq!(brier(&[rec(1.0, true)]).unwrap(), 0.0);
        assert_eq!(brier(&[rec(0.5, true)]).unwrap(), 0.25);
        assert_eq!(brier(&[rec(0.5, false)]).unwrap(), 0.25);
    }

    #[test]
    fn brier_decomposes_for_constant_confidence() {
        // For constant p with empirical accuracy a:
        // brier = a (1-p)^2 + (1-a) p^2.
        let p = 0.8;
        let records: Vec<_> = (0..10).map(|i| rec(p, i < 7)).collect();
        let a = 0.7;
        let expected = a * (1.0 - p) * (1.0 - p) + (1.0 - a) * p * p;
        assert!((brier(&records).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn auroc_perfect_separation() {
        let records = vec![rec(0.9, true), rec(0.8, true), rec(0.7, false)];
        assert_eq!(auroc(&records), Some(1.0));
    }

    #[test]
    fn auroc_pure_tie_is_half() {
        let records = vec![rec(0.8, true), rec(0.8, false)];
        assert_eq!(auroc(&records), Some(0.5));
    }

    #[test]
    fn auroc_single_class_is_undefined() {
        assert_eq!(auroc(&[rec(0.9, true), rec(0.8, true)]), None);
        assert_eq!(auroc(&[rec(0.9, false)]), None);
        assert_eq!(auroc(&[]), None);
    }

    #[test]
    fn compare_rejects_mismatched_question_sets() {
        let before = report(&[rec_with_id("a", 0.9, true), rec_with_id("b", 0.4, false)]).unwrap();
        let after = report(&[rec_with_id("a", 0.9, true), rec_with_id("c", 0.4, false)]).unwrap();
        assert_eq!(compare(&before, &after), Err(MetricsError::MismatchedQuestionSets));
    }

    #[test]
    fn compare_of_identical_reports_is_all_zero() {
        let r = report(&[rec_with_id("a", 0.9, true), rec_with_id("b", 0.4, false)]).unwrap();
        let delta = compare(&r, &r).unwrap();
        assert_eq!(delta.ece_pp, 0.0);
        assert_eq!(delta.brier_pp, 0.0);
        assert_eq!(delta.accuracy_pp, 0.0);
        assert_eq!(delta.auroc_pp, Some(0.0));
    }

    #[test]
    fn published_ece_pair_prints_its_delta() {
        let before = report_from_values(500, 0.2972, 0.6171, 0.5924, Some(0.5441));
        let after = report_from_values(500, 0.3162, 0.5993, 0.5755, Some(0.5596));
        let delta = compare(&before, &after).unwrap();
        assert_eq!(delta.formatted_ece(), "-1.78");
        assert_eq!(delta.formatted_accuracy(), "+1.90");
        assert_eq!(delta.formatted_brier(), "-1.69");
        assert_eq!(delta.formatted_auroc(), "+1.55");
    }

    #[test]
    fn second_published_pair_from_the_open_domain_block() {
        let before = report_from_values(500, 0.6654, 0.2581, 0.2743, None);
        let after = report_from_values(500, 0.6478, 0.2066, 0.2547, None);
        let delta = compare(&before, &after).unwrap();
        assert_eq!(delta.formatted_ece(), "-5.15");
        assert_eq!(delta.formatted_auroc(), "n/a");
    }

    #[test]
    fn report_excludes_invalid_records_but_counts_them() {
        let mut bad = rec(0.9, true);
        bad.valid = false;
        let records = vec![rec(1.0, true), bad];
        let r = report(&records).unwrap();
        assert_eq!(r.n, 1);
        assert_eq!(r.invalid, 1);
        assert_eq!(r.accuracy, 1.0);
    }
}

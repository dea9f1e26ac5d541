//! Computes ECE, Brier, AUROC, and accuracy over a small synthetic
//! record set and prints the reliability bins and a before/after delta.
//!
//! ```bash
//! cargo run -p credence --example calibration_metrics
//! ```

use credence::domain::{Gold, PredictionRecord};
use credence::metrics;

fn record(index: usize, confidence: f64, correct: bool) -> PredictionRecord {
    PredictionRecord {
        question_id: format!("q{index:03}"),
        raw_answer: "A".into(),
        canonical_answer: "A".into(),
        verbalized_confidence: (confidence * 100.0).round() as u8,
        normalized_confidence: confidence,
        correct,
        gold: Gold::Label("A".into()),
        valid: true,
    }
}

fn main() {
    // An overconfident profile: high stated confidence, mixed outcomes.
    let records: Vec<PredictionRecord> = (0..60)
        .map(|i| {
            let confidence = [0.95, 0.9, 0.9, 0.8, 0.7, 0.6][i % 6];
            let correct = i % 3 == 0;
            record(i, confidence, correct)
        })
        .collect();

    let report = metrics::report(&records).unwrap();
    println!("n        {}", report.n);
    println!("accuracy {:.4}", report.accuracy);
    println!("ece      {:.4}", report.ece);
    println!("brier    {:.4}", report.brier);
    match report.auroc {
        Some(auroc) => println!("auroc    {auroc:.4}"),
        None => println!("auroc    undefined (single class)"),
    }

    println!();
    println!("{:>12} {:>6} {:>10} {:>10}", "bin", "count", "conf", "acc");
    for bin in &report.bins {
        match (bin.mean_confidence, bin.mean_accuracy) {
            (Some(conf), Some(acc)) => println!(
                "[{:.1}, {:.1}{} {:>6} {:>10.4} {:>10.4}",
                bin.lower,
                bin.upper,
                if bin.upper == 1.0 { "]" } else { ")" },
                bin.count,
                conf,
                acc
            ),
            _ => println!(
                "[{:.1}, {:.1}{} {:>6} {:>10} {:>10}",
                bin.lower,
                bin.upper,
                if bin.upper == 1.0 { "]" } else { ")" },
                bin.count,
                "-",
                "-"
            ),
        }
    }

    // A better-calibrated follow-up over the same questions.
    let improved: Vec<PredictionRecord> = (0..60)
        .map(|i| {
            let correct = i % 3 == 0;
            record(i, if correct { 0.6 } else { 0.4 }, correct)
        })
        .collect();
    let after = metrics::report(&improved).unwrap();
    let delta = metrics::compare(&report, &after).unwrap();
    println!();
    println!(
        "after intervention: ECE {:.4} -> {:.4} ({} pp), Brier {:.4} -> {:.4} ({} pp)",
        report.ece,
        after.ece,
        delta.formatted_ece(),
        report.brier,
        after.brier,
        delta.formatted_brier()
    );
}

//! Prints both scoring tables, cross-checks them against the closed
//! forms, and shows the rules prompt the game opens with.
//!
//! ```bash
//! cargo run -p credence --example scoring_rules
//! ```

use credence::domain::ConfidenceLevel;
use credence::protocol::rules_prompt;
use credence::scoring::{closed_form_penalty, closed_form_reward, ScoringRule};

fn cell(points: i64) -> String {
    if points == 0 { "0".into() } else { format!("{points:+}") }
}

fn main() {
    for rule in [ScoringRule::symmetric(), ScoringRule::exponential()] {
        println!("{} scoring", rule.id());
        println!("{:>12} {:>8} {:>8}", "confidence", "correct", "wrong");
        for level in ConfidenceLevel::ALL {
            println!(
                "{:>11}% {:>8} {:>8}",
                level.percent(),
                cell(rule.score(level, true)),
                cell(rule.score(level, false))
            );
        }
        println!();
    }

    println!("closed-form cross-check (reward = round(100 * log2(c / 0.5))):");
    for level in ConfidenceLevel::ALL.into_iter().skip(1) {
        let c = f64::from(level.percent()) / 100.0;
        println!(
            "  c = {c:.2}: reward {:>3}, exponential penalty {:>4}",
            closed_form_reward(c).unwrap(),
            closed_form_penalty(c).unwrap()
        );
    }
    println!();

    println!("--- rules prompt (symmetric) ---");
    println!("{}", rules_prompt(&ScoringRule::symmetric()));
}

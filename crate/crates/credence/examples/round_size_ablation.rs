//! Round-size ablation: the same simulated agent plays 5-question and
//! 50-question games, and the mean post-game ECE reduction is compared.
//! Longer games give the digest tighter running statistics, so the
//! reduction is larger at 50 rounds.
//!
//! ```bash
//! cargo run -p credence --example round_size_ablation
//! ```

use credence::client::{AgentPolicy, SimulatedAgent};
use credence::domain::{Choice, Gold, Question, QuestionKind};
use credence::pipeline::{run_game, run_post_eval, run_pre_eval, StageOptions};
use credence::scoring::ScoringRule;

fn two_choice(prefix: &str, n: usize) -> Vec<Question> {
    (0..n)
        .map(|i| Question {
            id: format!("{prefix}{i:04}"),
            kind: QuestionKind::TwoChoiceGame,
            prompt_text: format!("{prefix} question {i}"),
            choices: vec![Choice::new("A", "yes"), Choice::new("B", "no")],
            gold: Gold::Label(if i % 2 == 0 { "A".into() } else { "B".into() }),
            context: None,
            category: None,
        })
        .collect()
}

fn main() {
    let opts = StageOptions::default();
    let eval_questions = two_choice("eval", 500);
    let bank = two_choice("game", 50);
    let seeds: Vec<u64> = (1..=5).collect();

    println!(
        "agent: accuracy 0.5, bias +40 (reports ~90% uncalibrated), responsiveness 1.0"
    );
    println!();

    let mut means = Vec::new();
    for n_game in [5usize, 50] {
        let mut reductions = Vec::new();
        for &seed in &seeds {
            let policy = AgentPolicy {
                true_accuracy: 0.5,
                confidence_bias: 40.0,
                responsiveness: 1.0,
                seed: 0,
            }
            .for_run(seed);
            let agent = SimulatedAgent::new(policy);

            let pre = run_pre_eval(&eval_questions, &agent, &opts).unwrap();
            let state =
                run_game(&bank, n_game, &ScoringRule::symmetric(), &agent, &opts).unwrap();
            let post = run_post_eval(&eval_questions, &state, &agent, &opts).unwrap();

            let reduction = pre.report.ece - post.report.ece;
            reductions.push(reduction);
            println!(
                "n_game {n_game:>2} seed {seed}: pre ECE {:.4}, post ECE {:.4}, reduction {:+.4}",
                pre.report.ece, post.report.ece, reduction
            );
        }
        let mean = reductions.iter().sum::<f64>() / reductions.len() as f64;
        println!("n_game {n_game:>2}: mean ECE reduction {mean:+.4}");
        println!();
        means.push(mean);
    }

    println!(
        "longer games reduce ECE more: {:+.4} (50 rounds) vs {:+.4} (5 rounds)",
        means[1], means[0]
    );
}

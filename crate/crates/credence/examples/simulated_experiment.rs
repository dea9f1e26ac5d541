//! Full three-stage workflow on the simulated backend: pre-game
//! evaluation, a 50-round symmetric game, post-game evaluation, and the
//! before/after comparison, repeated over five seeds.
//!
//! ```bash
//! cargo run -p credence --example simulated_experiment
//! ```

use std::io::Write as _;

use credence::client::AgentPolicy;
use credence::pipeline::{
    run_experiment, BackendChoice, DatasetKind, DatasetSpec, ExperimentManifest, Mode,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;

    let dataset_path = dir.path().join("eval.jsonl");
    let mut file = std::fs::File::create(&dataset_path)?;
    for i in 0..600 {
        let options: Vec<String> = (0..10).map(|j| format!("\"option {j}\"")).collect();
        writeln!(
            file,
            "{{\"question\": \"question {i}\", \"options\": [{}], \"answer_index\": {}, \"category\": \"synthetic\"}}",
            options.join(", "),
            i % 10
        )?;
    }
    let bank_path = dir.path().join("bank.jsonl");
    let mut file = std::fs::File::create(&bank_path)?;
    for i in 0..60 {
        writeln!(
            file,
            "{{\"question\": \"game question {i}\", \"options\": [\"yes\", \"no\"], \"answer_index\": {}}}",
            i % 2
        )?;
    }

    // An overconfident agent: half right, stating ~90% confidence, fully
    // responsive to game feedback.
    let manifest = ExperimentManifest {
        mode: Mode::GameSym,
        backend: BackendChoice::Simulated,
        n_eval: 500,
        n_game: 50,
        seeds: vec![1, 2, 3, 4, 5],
        out_dir: dir.path().join("out"),
        dataset: DatasetSpec {
            kind: DatasetKind::Mcq,
            path: dataset_path,
            subject: None,
            game_bank_path: Some(bank_path),
            game_from_mcq: false,
        },
        agent: Some(AgentPolicy {
            true_accuracy: 0.5,
            confidence_bias: 40.0,
            responsiveness: 1.0,
            seed: 0,
        }),
        generation: None,
        disjoint_eval: false,
        parse_retries: 3,
    };

    let report = run_experiment(&manifest)?;
    println!("mode: {} | model: {}", report.mode.as_str(), report.model);
    println!("manifest hash: {}", &report.manifest_hash[..16]);
    println!();
    println!("{:>6} {:>8} {:>8} {:>10} {:>8}", "run", "ece", "brier", "accuracy", "auroc");
    for row in &report.summary {
        println!(
            "{:>6} {:>8.4} {:>8.4} {:>10.4} {:>8}",
            row.label,
            row.ece,
            row.brier,
            row.accuracy,
            row.auroc.map(|a| format!("{a:.4}")).unwrap_or_else(|| "n/a".into())
        );
    }
    println!();
    for run in &report.runs {
        let post = run.post.as_ref().unwrap();
        let delta = run.delta.as_ref().unwrap();
        println!(
            "seed {}: ECE {:.4} -> {:.4} ({} pp), game score {}",
            run.seed,
            run.pre.ece,
            post.ece,
            delta.formatted_ece(),
            run.game_totals.unwrap().total_score
        );
    }
    println!();
    println!("artifacts under {}", manifest.out_dir.display());
    for entry in std::fs::read_dir(manifest.out_dir.join("seed-1"))? {
        println!("  seed-1/{}", entry?.file_name().to_string_lossy());
    }
    Ok(())
}

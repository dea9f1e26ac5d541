//! Writes small JSONL fixtures, loads them through the three loaders,
//! and demonstrates subject filtering and prefix-stable sampling.
//!
//! ```bash
//! cargo run -p credence --example dataset_loading
//! ```

use std::io::Write as _;

use credence::data::{filter_category, load_game_bank, load_mcq, load_open_ended, sample};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;

    let mcq_path = dir.path().join("mcq.jsonl");
    let mut file = std::fs::File::create(&mcq_path)?;
    for i in 0..20 {
        let category = if i % 2 == 0 { "chemistry" } else { "computer science" };
        let options: Vec<String> = (0..10).map(|j| format!("\"option {j}\"")).collect();
        writeln!(
            file,
            "{{\"question\": \"mcq question {i}\", \"options\": [{}], \"answer_index\": {}, \"category\": \"{category}\"}}",
            options.join(", "),
            i % 10
        )?;
    }
    let mcq = load_mcq(&mcq_path)?;
    println!("loaded {} multiple-choice questions", mcq.len());
    println!("first gold label: {:?}", mcq[0].gold);

    let chemistry = filter_category(&mcq, "chemistry");
    println!("chemistry subset: {} questions", chemistry.len());

    let open_path = dir.path().join("open.jsonl");
    let mut file = std::fs::File::create(&open_path)?;
    writeln!(
        file,
        "{{\"question\": \"Capital of France?\", \"answer\": {{\"value\": \"Paris\", \"aliases\": [\"paris, france\", \"PARIS\"]}}}}"
    )?;
    let open = load_open_ended(&open_path)?;
    println!("open-ended alias set: {:?}", open[0].gold);

    let bank_path = dir.path().join("bank.jsonl");
    let mut file = std::fs::File::create(&bank_path)?;
    for i in 0..10 {
        writeln!(
            file,
            "{{\"question\": \"game question {i}\", \"options\": [\"yes\", \"no\"], \"answer_index\": {}}}",
            i % 2
        )?;
    }
    let bank = load_game_bank(&bank_path)?;
    println!("game bank: {} two-choice questions", bank.len());

    // Prefix-stable sampling: the 5-sample is the 10-sample's prefix.
    let five = sample(&mcq, 5, 42)?;
    let ten = sample(&mcq, 10, 42)?;
    assert_eq!(five[..], ten[..5]);
    println!(
        "seeded sample ids: {:?} (prefix of the larger sample: {:?})",
        five.iter().map(|q| q.id.as_str()).collect::<Vec<_>>(),
        ten.iter().map(|q| q.id.as_str()).collect::<Vec<_>>()
    );
    Ok(())
}

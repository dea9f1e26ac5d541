//! Shows the evaluation prompt format and how model replies parse into
//! prediction records, including the failure categories.
//!
//! ```bash
//! cargo run -p credence --example parse_replies
//! ```

use std::collections::BTreeSet;

use credence::domain::{Choice, Gold, Question, QuestionKind};
use credence::protocol::{eval_prompt, parse_reply, self_cal_followup};

fn main() {
    let mcq = Question {
        id: "demo-mcq".into(),
        kind: QuestionKind::MultipleChoice,
        prompt_text: "Which planet is known as the Red Planet?".into(),
        choices: vec![
            Choice::new("A", "Venus"),
            Choice::new("B", "Mars"),
            Choice::new("C", "Jupiter"),
            Choice::new("D", "Mercury"),
        ],
        gold: Gold::Label("B".into()),
        context: None,
        category: Some("astronomy".into()),
    };

    println!("--- evaluation prompt ---");
    println!("{}", eval_prompt(&mcq, None));
    println!();

    let replies = [
        "Answer: B\nConfidence: 85",
        "Let me think. Mars is red.\nAnswer: B. Mars\nConfidence: 90%\nFinal.",
        "Answer: A\nConfidence: 30\nWait, actually:\nAnswer: B\nConfidence: 75",
        "Answer: E\nConfidence: 80",
        "Answer: B\nConfidence: one hundred",
        "Answer: B\nConfidence: 140",
        "I refuse to answer in the requested format.",
    ];
    println!("--- parsing ---");
    for raw in replies {
        match parse_reply(raw, &mcq) {
            Ok(rec) => println!(
                "{raw:?}\n  -> answer {} at {}%, correct: {}",
                rec.canonical_answer, rec.verbalized_confidence, rec.correct
            ),
            Err(err) => println!("{raw:?}\n  -> {err}"),
        }
        println!();
    }

    let open = Question {
        id: "demo-open".into(),
        kind: QuestionKind::OpenEnded,
        prompt_text: "Which Paris landmark was built for the 1889 World's Fair?".into(),
        choices: vec![],
        gold: Gold::Aliases(
            ["eiffel tower", "tour eiffel"].iter().map(|s| s.to_string()).collect::<BTreeSet<_>>(),
        ),
        context: None,
        category: None,
    };
    println!("--- open-ended alias matching ---");
    for raw in ["Answer: The Eiffel Tower.\nConfidence: 95", "Answer: the Louvre\nConfidence: 60"] {
        let rec = parse_reply(raw, &open).unwrap();
        println!(
            "{:?} -> normalized {:?}, correct: {}",
            rec.raw_answer, rec.canonical_answer, rec.correct
        );
    }

    println!();
    println!("--- self-calibration follow-up ---");
    println!("{}", self_cal_followup("B").unwrap());
}

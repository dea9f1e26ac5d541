//! JSONL dataset loaders for multiple-choice, open-ended, and two-choice
//! game fixtures, plus deterministic prefix-stable sampling.
//!
//! Every row becomes exactly one validated question or one error carrying
//! its line number.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use thiserror::Error;

use crate::domain::{Choice, Gold, Question, QuestionKind, ValidationError};
use crate::protocol::normalize_answer;
use crate::seeded::keyed_rng;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DataError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}:{line}: malformed row: {message}")]
    MalformedRow { path: String, line: usize, message: String },
    #[error("{path}:{line}: answer_index {index} out of range for {len} options")]
    AnswerIndexOutOfRange { path: String, line: usize, index: usize, len: usize },
    #[error("{path}:{line}: expected exactly 2 options, found {got}")]
    WrongArity { path: String, line: usize, got: usize },
    #[error("{path}:{line}: no usable answer aliases")]
    EmptyAliases { path: String, line: usize },
    #[error("{path}:{line}: {source}")]
    InvalidQuestion { path: String, line: usize, source: ValidationError },
    #[error("sample of {requested} requested from a pool of {available}")]
    InsufficientPool { requested: usize, available: usize },
    #[error("cannot reduce question `{id}` to two choices: {message}")]
    Reduce { id: String, message: String },
}

#[derive(Deserialize)]
struct McqRow {
    question: String,
    options: Vec<String>,
    answer_index: usize,
    #[serde(default)]
    category: Option<String>,
    #[serde(default)]
    id: Option<String>,
    #[serde(default)]
    context: Option<String>,
}

#[derive(Deserialize)]
struct OpenEndedAnswer {
    value: String,
    #[serde(default)]
    aliases: Vec<String>,
}

#[derive(Deserialize)]
struct OpenEndedRow {
    question: String,
    answer: OpenEndedAnswer,
    #[serde(default)]
    category: Option<String>,
    #[serde(default)]
    id: Option<String>,
}

fn read_rows<T: serde::de::DeserializeOwned>(
    path: &Path,
) -> Result<Vec<(usize, T)>, DataError> {
    let display = path.display().to_string();
    let file = File::open(path).map_err(|e| DataError::Io {
        path: display.clone(),
        message: e.to_string(),
    })?;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| DataError::Io {
            path: display.clone(),
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let row: T = serde_json::from_str(&line).map_err(|e| DataError::MalformedRow {
            path: display.clone(),
            line: line_no,
            message: e.to_string(),
        })?;
        rows.push((line_no, row));
    }
    Ok(rows)
}

fn option_label(index: usize) -> String {
    char::from(b'A' + index as u8).to_string()
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "dataset".into())
}

fn build_choices(
    path: &Path,
    line: usize,
    options: &[String],
) -> Result<Vec<Choice>, DataError> {
    if options.len() > 26 {
        return Err(DataError::MalformedRow {
            path: path.display().to_string(),
            line,
            message: format!("{} options exceed the 26 supported labels", options.len()),
        });
    }
    Ok(options
        .iter()
        .enumerate()
        .map(|(i, text)| Choice::new(option_label(i), text.clone()))
        .collect())
}

fn check_answer_index(
    path: &Path,
    line: usize,
    index: usize,
    len: usize,
) -> Result<(), DataError> {
    if index >= len {
        return Err(DataError::AnswerIndexOutOfRange {
            path: path.display().to_string(),
            line,
            index,
            len,
        });
    }
    Ok(())
}

fn validated(path: &Path, line: usize, q: Question) -> Result<Question, DataError> {
    q.validate().map_err(|source| DataError::InvalidQuestion {
        path: path.display().to_string(),
        line,
        source,
    })?;
    Ok(q)
}

/// Loads multiple-choice questions with labels A, B, C, ... in option
/// order. Category is retained for subject filtering.
pub fn load_mcq(path: &Path) -> Result<Vec<Question>, DataError> {
    let stem = file_stem(path);
    read_rows::<McqRow>(path)?
        .into_iter()
        .map(|(line, row)| {
            let choices = build_choices(path, line, &row.options)?;
            check_answer_index(path, line, row.answer_index, row.options.len())?;
            let q = Question {
                id: row.id.unwrap_or_else(|| format!("{stem}:{line}")),
                kind: QuestionKind::MultipleChoice,
                prompt_text: row.question,
                gold: Gold::Label(option_label(row.answer_index)),
                choices,
                context: row.context.filter(|c| !c.is_empty()),
                category: row.category,
            };
            validated(path, line, q)
        })
        .collect()
}

/// Loads open-ended questions. The alias set is the normalized union of
/// the answer value and its aliases; duplicates collapse.
pub fn load_open_ended(path: &Path) -> Result<Vec<Question>, DataError> {
    let stem = file_stem(path);
    read_rows::<OpenEndedRow>(path)?
        .into_iter()
        .map(|(line, row)| {
            let aliases: BTreeSet<String> = std::iter::once(&row.answer.value)
                .chain(row.answer.aliases.iter())
                .map(|a| normalize_answer(a))
                .filter(|a| !a.is_empty())
                .collect();
            if aliases.is_empty() {
                return Err(DataError::EmptyAliases {
                    path: path.display().to_string(),
                    line,
                });
            }
            let q = Question {
                id: row.id.unwrap_or_else(|| format!("{stem}:{line}")),
                kind: QuestionKind::OpenEnded,
                prompt_text: row.question,
                choices: Vec::new(),
                gold: Gold::Aliases(aliases),
                context: None,
                category: row.category,
            };
            validated(path, line, q)
        })
        .collect()
}

/// Loads the two-choice game bank; rows must have exactly two options.
pub fn load_game_bank(path: &Path) -> Result<Vec<Question>, DataError> {
    let stem = file_stem(path);
    read_rows::<McqRow>(path)?
        .into_iter()
        .map(|(line, row)| {
            if row.options.len() != 2 {
                return Err(DataError::WrongArity {
                    path: path.display().to_string(),
                    line,
                    got: row.options.len(),
                });
            }
            let choices = build_choices(path, line, &row.options)?;
            check_answer_index(path, line, row.answer_index, 2)?;
            let q = Question {
                id: row.id.unwrap_or_else(|| format!("{stem}:{line}")),
                kind: QuestionKind::TwoChoiceGame,
                prompt_text: row.question,
                gold: Gold::Label(option_label(row.answer_index)),
                choices,
                context: row.context.filter(|c| !c.is_empty()),
                category: row.category,
            };
            validated(path, line, q)
        })
        .collect()
}

/// Questions whose category matches the subject exactly.
pub fn filter_category(questions: &[Question], subject: &str) -> Vec<Question> {
    questions
        .iter()
        .filter(|q| q.category.as_deref() == Some(subject))
        .cloned()
        .collect()
}

/// Uniform sample without replacement: one seeded shuffle of the pool,
/// then the first `n`. Prefix-stable, so samples of different sizes from
/// the same seed share their leading elements.
pub fn sample(questions: &[Question], n: usize, seed: u64) -> Result<Vec<Question>, DataError> {
    if n > questions.len() {
        return Err(DataError::InsufficientPool {
            requested: n,
            available: questions.len(),
        });
    }
    let mut shuffled = questions.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);
    shuffled.truncate(n);
    Ok(shuffled)
}

/// Reduces a multiple-choice question to a two-choice game question:
/// the gold option plus one seeded distractor, in seeded order.
pub fn reduce_to_two_choice(q: &Question, seed: u64) -> Result<Question, DataError> {
    if q.kind != QuestionKind::MultipleChoice {
        return Err(DataError::Reduce {
            id: q.id.clone(),
            message: "only multiple-choice questions can be reduced".into(),
        });
    }
    let Gold::Label(gold_label) = &q.gold else {
        return Err(DataError::Reduce {
            id: q.id.clone(),
            message: "question has no gold label".into(),
        });
    };
    let gold_choice = q
        .choices
        .iter()
        .find(|c| &c.label == gold_label)
        .ok_or_else(|| DataError::Reduce {
            id: q.id.clone(),
            message: "gold label missing from choices".into(),
        })?;
    let distractors: Vec<&Choice> =
        q.choices.iter().filter(|c| &c.label != gold_label).collect();
    if distractors.is_empty() {
        return Err(DataError::Reduce {
            id: q.id.clone(),
            message: "no distractor available".into(),
        });
    }

    let mut rng = keyed_rng(seed, &q.id);
    let distractor = distractors[rng.gen_range(0..distractors.len())];
    let gold_first = rng.gen_range(0..2) == 0;
    let (first, second) =
        if gold_first { (gold_choice, distractor) } else { (distractor, gold_choice) };
    Ok(Question {
        id: format!("{}#2c", q.id),
        kind: QuestionKind::TwoChoiceGame,
        prompt_text: q.prompt_text.clone(),
        choices: vec![Choice::new("A", first.text.clone()), Choice::new("B", second.text.clone())],
        gold: Gold::Label(if gold_first { "A".into() } else { "B".into() }),
        context: q.context.clone(),
        category: q.category.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;
    use tempfile::NamedTempFile;

    fn fixture(lines: &[&str]) -> NamedTempFile {
        let mut file = NamedTempFile::new().unwrap();
        for line in lines {
            writeln!(file, "{line}").unwrap();
        }
        file
    }

    fn mcq_line(n_options: usize, answer_index: usize, category: &str) -> String {
        let options: Vec<String> = (0..n_options).map(|i| format!("\"opt {i}\"")).collect();
        format!(
            "{{\"question\": \"pick\", \"options\": [{}], \"answer_index\": {answer_index}, \"category\": \"{category}\"}}",
            options.join(", ")
        )
    }

    #[test]
    fn mcq_rows_map_answer_index_to_label() {
        let file = fixture(&[&mcq_line(10, 3, "chemistry")]);
        let questions = load_mcq(file.path()).unwrap();
        assert_eq!(questions.len(), 1);
        assert_eq!(questions[0].gold, Gold::Label("D".into()));
        assert_eq!(questions[0].choices.len(), 10);
        assert_eq!(questions[0].category.as_deref(), Some("chemistry"));
    }

    #[test]
    fn mcq_answer_index_out_of_range_is_positioned() {
        let file = fixture(&[&mcq_line(10, 3, "x"), &mcq_line(10, 10, "x")]);
        let err = load_mcq(file.path()).unwrap_err();
        assert!(matches!(
            err,
            DataError::AnswerIndexOutOfRange { line: 2, index: 10, len: 10, .. }
        ));
    }

    #[test]
    fn mcq_malformed_row_reports_its_line() {
        let file = fixture(&[&mcq_line(4, 0, "x"), "{\"question\": \"no options\"}"]);
        let err = load_mcq(file.path()).unwrap_err();
        assert!(matches!(err, DataError::MalformedRow { line: 2, .. }));
    }

    #[test]
    fn category_filter_keeps_only_the_subject() {
        let file = fixture(&[
            &mcq_line(4, 0, "chemistry"),
            &mcq_line(4, 1, "computer science"),
            &mcq_line(4, 2, "chemistry"),
        ]);
        let questions = load_mcq(file.path()).unwrap();
        let filtered = filter_category(&questions, "chemistry");
        assert_eq!(filtered.len(), 2);
        assert!(filtered.iter().all(|q| q.category.as_deref() == Some("chemistry")));
    }

    #[test]
    fn open_ended_aliases_normalize_and_dedupe() {
        let file = fixture(&[
            "{\"question\": \"capital?\", \"answer\": {\"value\": \"Paris\", \"aliases\": [\"paris, france\", \"PARIS\"]}}",
        ]);
        let questions = load_open_ended(file.path()).unwrap();
        let Gold::Aliases(aliases) = &questions[0].gold else { panic!("expected aliases") };
        assert_eq!(aliases.len(), 2);
        assert!(aliases.contains("paris"));
        assert!(aliases.contains("paris france"));
        assert!(questions[0].context.is_none());
    }

    #[test]
    fn open_ended_missing_value_is_malformed() {
        let file = fixture(&["{\"question\": \"capital?\", \"answer\": {\"aliases\": [\"x\"]}}"]);
        assert!(matches!(
            load_open_ended(file.path()).unwrap_err(),
            DataError::MalformedRow { line: 1, .. }
        ));
    }

    #[test]
    fn open_ended_unusable_aliases_error() {
        let file =
            fixture(&["{\"question\": \"??\", \"answer\": {\"value\": \"!!!\", \"aliases\": []}}"]);
        assert!(matches!(
            load_open_ended(file.path()).unwrap_err(),
            DataError::EmptyAliases { line: 1, .. }
        ));
    }

    #[test]
    fn game_bank_requires_two_options() {
        let good = fixture(&[&mcq_line(2, 1, "any")]);
        let questions = load_game_bank(good.path()).unwrap();
        assert_eq!(questions[0].kind, QuestionKind::TwoChoiceGame);
        assert_eq!(questions[0].gold, Gold::Label("B".into()));

        let bad = fixture(&[&mcq_line(4, 1, "any")]);
        assert!(matches!(
            load_game_bank(bad.path()).unwrap_err(),
            DataError::WrongArity { line: 1, got: 4, .. }
        ));
    }

    #[test]
    fn empty_file_loads_as_empty_list() {
        let file = fixture(&[]);
        assert!(load_game_bank(file.path()).unwrap().is_empty());
    }

    fn pool(n: usize) -> Vec<Question> {
        (0..n)
            .map(|i| Question {
                id: format!("p{i}"),
                kind: QuestionKind::TwoChoiceGame,
                prompt_text: format!("q {i}"),
                choices: vec![Choice::new("A", "yes"), Choice::new("B", "no")],
                gold: Gold::Label("A".into()),
                context: None,
                category: None,
            })
            .collect()
    }

    #[test]
    fn sample_is_deterministic_in_the_seed() {
        let pool = pool(100);
        let a = sample(&pool, 20, 7).unwrap();
        let b = sample(&pool, 20, 7).unwrap();
        assert_eq!(a, b);
        let c = sample(&pool, 20, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sample_is_prefix_stable_across_sizes() {
        let pool = pool(100);
        let small = sample(&pool, 5, 42).unwrap();
        let large = sample(&pool, 50, 42).unwrap();
        assert_eq!(small[..], large[..5]);
    }

    #[test]
    fn full_size_sample_is_a_permutation() {
        let pool = pool(30);
        let permuted = sample(&pool, 30, 3).unwrap();
        let mut ids: Vec<&str> = permuted.iter().map(|q| q.id.as_str()).collect();
        ids.sort_unstable();
        let mut expected: Vec<&str> = pool.iter().map(|q| q.id.as_str()).collect();
        expected.sort_unstable();
        assert_eq!(ids, expected);
    }

    #[test]
    fn oversized_sample_is_rejected() {
        let pool = pool(3);
        assert_eq!(
            sample(&pool, 4, 0).unwrap_err(),
            DataError::InsufficientPool { requested: 4, available: 3 }
        );
    }

    #[test]
    fn reduction_keeps_the_gold_text_and_is_seeded() {
        let file = fixture(&[&mcq_line(10, 3, "chemistry")]);
        let q = &load_mcq(file.path()).unwrap()[0];
        let reduced = reduce_to_two_choice(q, 1).unwrap();
        assert_eq!(reduced.kind, QuestionKind::TwoChoiceGame);
        assert_eq!(reduced.choices.len(), 2);
        let Gold::Label(gold) = &reduced.gold else { panic!() };
        let gold_text =
            &reduced.choices.iter().find(|c| &c.label == gold).unwrap().text;
        assert_eq!(gold_text, "opt 3");
        assert!(reduced.id.ends_with("#2c"));
        assert_eq!(reduce_to_two_choice(q, 1).unwrap(), reduced);
    }
}

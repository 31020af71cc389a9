//! Dataset ingestion and accuracy reports.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{answer_polar, answer_wh, derive_seed, Example, Label, Settings};
use crate::proof::Logic;

/// A parsed line, or the reason it was skipped.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetLine {
    Example(Example),
    Malformed { line: usize, message: String },
}

/// JSONL, one example per non-blank line.
pub fn load_dataset(text: &str) -> Vec<DatasetLine> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let line = i + 1;
            match serde_json::from_str::<Example>(l) {
                Ok(ex) if ex.context.is_empty() => DatasetLine::Malformed { line, message: "empty context".into() },
                Ok(ex) if ex.label.is_none() == ex.answers.is_none() => {
                    DatasetLine::Malformed { line, message: "exactly one of `label` and `answers` is required".into() }
                }
                Ok(ex) => DatasetLine::Example(ex),
                Err(e) => DatasetLine::Malformed { line, message: e.to_string() },
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Answer {
    Label(Label),
    Answers(BTreeSet<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub id: String,
    pub section: String,
    pub gold: Answer,
    pub predicted: Option<Answer>,
    pub correct: bool,
    pub seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SectionReport {
    pub examples: usize,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub seed: u64,
    pub logic: Logic,
    pub overall: SectionReport,
    pub sections: BTreeMap<String, SectionReport>,
    pub mean_seconds: f64,
    pub malformed: Vec<(usize, String)>,
    pub outcomes: Vec<Outcome>,
}

fn run_one(ex: &Example, settings: &Settings, seed: u64) -> Outcome {
    let start = Instant::now();
    let seed = derive_seed(seed, &ex.id);
    let (gold, result) = match (&ex.label, &ex.answers) {
        (Some(l), _) => (Answer::Label(*l), answer_polar(ex, settings, seed).map(|v| Answer::Label(v.label))),
        (None, Some(a)) => (Answer::Answers(a.iter().cloned().collect()), answer_wh(ex, settings, seed).map(Answer::Answers)),
        (None, None) => unreachable!("checked on load"),
    };
    let (predicted, error) = match result {
        Ok(a) => (Some(a), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Outcome {
        id: ex.id.clone(),
        section: ex.section().to_string(),
        correct: predicted.as_ref() == Some(&gold),
        gold,
        predicted,
        seconds: start.elapsed().as_secs_f64(),
        error,
    }
}

fn tally<'a>(it: impl Iterator<Item = &'a Outcome>) -> SectionReport {
    let mut r = SectionReport::default();
    for o in it {
        r.examples += 1;
        r.correct += usize::from(o.correct);
    }
    r.accuracy = if r.examples == 0 { 0.0 } else { r.correct as f64 / r.examples as f64 };
    r
}

/// Answer every example, `jobs` at a time (0 = rayon's default). Each
/// example's chains are seeded from `(seed, id)`, so results do not depend
/// on scheduling.
pub fn evaluate(lines: &[DatasetLine], settings: &Settings, seed: u64, jobs: usize) -> Report {
    let examples: Vec<&Example> = lines
        .iter()
        .filter_map(|l| match l {
            DatasetLine::Example(e) => Some(e),
            DatasetLine::Malformed { .. } => None,
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().expect("thread pool");
    let outcomes: Vec<Outcome> = pool.install(|| examples.par_iter().map(|ex| run_one(ex, settings, seed)).collect());
    let sections: BTreeSet<&str> = outcomes.iter().map(|o| o.section.as_str()).collect();
    let sections = sections.into_iter().map(|s| (s.to_string(), tally(outcomes.iter().filter(|o| o.section == s)))).collect();
    let mean_seconds = if outcomes.is_empty() { 0.0 } else { outcomes.iter().map(|o| o.seconds).sum::<f64>() / outcomes.len() as f64 };
    let malformed = lines
        .iter()
        .filter_map(|l| match l {
            DatasetLine::Malformed { line, message } => Some((*line, message.clone())),
            DatasetLine::Example(_) => None,
        })
        .collect();
    Report { seed, logic: settings.logic, overall: tally(outcomes.iter()), sections, mean_seconds, malformed, outcomes }
}

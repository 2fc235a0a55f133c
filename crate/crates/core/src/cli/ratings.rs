use std::collections::BTreeMap;
use std::io::Read;

use serde::Deserialize;

use super::scenario_file::ScenarioFile;
use crate::error::{Error, Result};
use crate::model::{empirical_distribution, Scenario};
use crate::production::ValueFunction;

pub const RATINGS_HEADER: [&str; 3] = ["coder_id", "task_id", "rating"];

/// Inclusive range of a rating score.
pub const RATING_RANGE: (f64, f64) = (0.0, 100.0);

#[derive(Debug, Deserialize)]
struct Row {
    coder_id: String,
    #[allow(dead_code)]
    task_id: String,
    rating: String,
}

/// Ratings grouped by coder, in coder-id order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Ratings {
    pub by_coder: BTreeMap<String, Vec<f64>>,
    pub rows: usize,
}

/// Parses a ratings CSV. Every malformed row is reported with its line
/// number, the header being line 1.
pub fn read_ratings<R: Read>(input: R) -> Result<Ratings> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| Error::InvalidArgument(format!("line 1: {e}")))?
        .clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(Error::InvalidArgument("ratings file is empty".into()));
    }
    if headers.iter().ne(RATINGS_HEADER) {
        return Err(Error::InvalidArgument(format!(
            "line 1: expected header {}, found {}",
            RATINGS_HEADER.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut ratings = Ratings::default();
    let mut problems = Vec::new();
    for (idx, record) in reader.deserialize::<Row>().enumerate() {
        let line = idx + 2;
        let row = match record {
            Ok(row) => row,
            Err(e) => {
                problems.push(format!("line {line}: {e}"));
                continue;
            }
        };
        if row.coder_id.is_empty() {
            problems.push(format!("line {line}: empty coder_id"));
            continue;
        }
        match row.rating.parse::<f64>() {
            Ok(v) if (RATING_RANGE.0..=RATING_RANGE.1).contains(&v) => {
                ratings.by_coder.entry(row.coder_id).or_default().push(v);
                ratings.rows += 1;
            }
            Ok(v) => problems.push(format!("line {line}: rating {v} outside [0, 100]")),
            Err(_) => problems.push(format!("line {line}: rating {:?} is not a number", row.rating)),
        }
    }
    if !problems.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{} malformed row(s):\n{}",
            problems.len(),
            problems.join("\n")
        )));
    }
    if ratings.rows == 0 {
        return Err(Error::InvalidArgument("ratings file has no rows".into()));
    }
    Ok(ratings)
}

/// Single-project best-shot scenario with one empirical distribution per
/// coder having at least `min_solutions` ratings.
pub fn ratings_scenario(ratings: &Ratings, min_solutions: usize, k: usize) -> Result<ScenarioFile> {
    let kept: Vec<(&String, &Vec<f64>)> = ratings
        .by_coder
        .iter()
        .filter(|(_, v)| v.len() >= min_solutions)
        .collect();
    if kept.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no coder has at least {min_solutions} ratings"
        )));
    }
    let dists = kept
        .iter()
        .map(|(_, v)| empirical_distribution(v))
        .collect::<Result<Vec<_>>>()?;
    let scn = Scenario::single_project(dists, ValueFunction::BestShot, k.min(kept.len()))?;
    Ok(ScenarioFile::from_scenario(
        &scn,
        Some(kept.iter().map(|(id, _)| (*id).clone()).collect()),
        Some(vec!["contest".into()]),
    ))
}

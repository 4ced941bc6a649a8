//! Dataset records and JSONL I/O.
//!
//! One record per problem. The world model is stored in the canonical
//! textual encoding so datasets can be re-verified and re-ordered without
//! regenerating them.

use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{LogicalForm, ParseError, WorldModel};
use crate::problem::Problem;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    BadRecord { line: usize, message: String },
}

/// Canonical encoding of a world model, split into body and question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldModelText {
    pub body: Vec<String>,
    pub question: String,
}

impl WorldModelText {
    pub fn encode(world: &WorldModel) -> Self {
        WorldModelText {
            body: world.body.iter().map(LogicalForm::encode).collect(),
            question: world.question.encode(),
        }
    }

    pub fn decode(&self) -> Result<WorldModel, ParseError> {
        let body = self
            .body
            .iter()
            .map(|s| LogicalForm::parse(s))
            .collect::<Result<Vec<_>, _>>()?;
        let question = LogicalForm::parse(&self.question)?;
        Ok(WorldModel::new(body, question))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub family: String,
    pub depth: usize,
    pub width: usize,
    pub distance: usize,
    pub body_text: String,
    pub question_text: String,
    pub cot_text: String,
    pub answer: i64,
    pub world_model: WorldModelText,
    pub seed: u64,
}

impl DatasetRecord {
    pub fn from_problem(problem: &Problem) -> Self {
        DatasetRecord {
            id: problem.meta.id.clone(),
            family: problem.meta.family.name().to_string(),
            depth: problem.meta.depth,
            width: problem.meta.width,
            distance: problem.meta.distance,
            body_text: problem.body_text(),
            question_text: problem.question_text(),
            cot_text: problem.cot_text(),
            answer: problem.answer,
            world_model: WorldModelText::encode(&problem.world),
            seed: problem.meta.seed,
        }
    }

    pub fn world_model(&self) -> Result<WorldModel, ParseError> {
        self.world_model.decode()
    }

    /// Body and question joined; the form used inside prompts.
    pub fn problem_text(&self) -> String {
        format!("{} {}", self.body_text, self.question_text)
    }

    /// Body text split back into sentences. Templates never contain an
    /// internal ". ", so sentence boundaries are unambiguous.
    pub fn body_sentences(&self) -> Vec<String> {
        split_sentences(&self.body_text)
    }
}

/// Split text into sentences at ". " boundaries, keeping the periods.
pub fn split_sentences(text: &str) -> Vec<String> {
    if text.is_empty() {
        return Vec::new();
    }
    text.split_inclusive(". ")
        .map(|s| s.trim_end().to_string())
        .collect()
}

pub fn write_jsonl(path: &Path, records: &[DatasetRecord]) -> Result<(), DatasetError> {
    let io_err = |source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut out = BufWriter::new(file);
    for record in records {
        let line = serde_json::to_string(record).expect("records serialize");
        writeln!(out, "{line}").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Strict read: the first malformed line fails with its line number.
pub fn read_jsonl(path: &Path) -> Result<Vec<DatasetRecord>, DatasetError> {
    let (records, errors) = read_jsonl_lenient(path)?;
    if let Some((line, message)) = errors.into_iter().next() {
        return Err(DatasetError::BadRecord { line, message });
    }
    Ok(records.into_iter().map(|(_, r)| r).collect())
}

/// Records and errors from a lenient read, each tagged with a 1-based
/// line number.
pub type LenientRead = (Vec<(usize, DatasetRecord)>, Vec<(usize, String)>);

/// Lenient read: collect good records and per-line errors separately.
pub fn read_jsonl_lenient(path: &Path) -> Result<LenientRead, DatasetError> {
    let file = std::fs::File::open(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let reader = std::io::BufReader::new(file);
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|source| DatasetError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<DatasetRecord>(&line) {
            Ok(record) => records.push((line_no, record)),
            Err(e) => errors.push((line_no, e.to_string())),
        }
    }
    Ok((records, errors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::generate_problem;
    use crate::realize::TemplateSet;
    use crate::sampler::TreeSpec;
    use crate::vocab::Vocab;

    fn sample_record() -> DatasetRecord {
        let problem = generate_problem(
            &TreeSpec::linear_depth(3, 5),
            "rec-0",
            Vocab::builtin(),
            &TemplateSet::builtin(),
        )
        .unwrap();
        DatasetRecord::from_problem(&problem)
    }

    #[test]
    fn jsonl_round_trip_preserves_records() {
        let record = sample_record();
        let dir = std::env::temp_dir().join(format!("ds-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("data.jsonl");
        write_jsonl(&path, std::slice::from_ref(&record)).unwrap();
        let read = read_jsonl(&path).unwrap();
        assert_eq!(read, vec![record]);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn world_model_text_round_trips() {
        let record = sample_record();
        let world = record.world_model().unwrap();
        assert_eq!(WorldModelText::encode(&world), record.world_model);
        assert_eq!(world.body.len(), record.width);
    }

    #[test]
    fn body_splits_into_width_sentences() {
        let record = sample_record();
        assert_eq!(record.body_sentences().len(), record.width);
        assert!(record.body_sentences().iter().all(|s| s.ends_with('.')));
    }

    #[test]
    fn lenient_read_reports_line_numbers() {
        let dir = std::env::temp_dir().join(format!("ds-lenient-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("mixed.jsonl");
        let good = serde_json::to_string(&sample_record()).unwrap();
        std::fs::write(&path, format!("{good}\nnot json\n{good}\n")).unwrap();
        let (records, errors) = read_jsonl_lenient(&path).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].0, 2);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}

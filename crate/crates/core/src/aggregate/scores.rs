//! Sentence-score files produced by an external classifier.
//!
//! Newline-delimited JSON. The first line is a header naming the model and
//! the record count; each further line scores one sentence.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{AggregateError, SentenceScore};
use crate::transcript::SpeakerRole;

#[derive(Debug, Error)]
pub enum ScoresError {
    #[error("scores line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("scores header declares {declared} records, file has {found}")]
    CountMismatch { declared: usize, found: usize },
    #[error("scores line {line}: {source}")]
    Invalid {
        line: usize,
        #[source]
        source: AggregateError,
    },
    #[error("scores i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreHeader {
    pub model: String,
    pub revision: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSentenceRecord {
    pub call_id: String,
    pub role: SpeakerRole,
    pub text_hash: String,
    pub p_pos: f64,
    pub p_neg: f64,
    pub p_neu: f64,
}

impl ScoredSentenceRecord {
    pub fn to_score(&self) -> Result<SentenceScore, AggregateError> {
        SentenceScore::new(self.call_id.clone(), self.role, self.p_pos, self.p_neg, self.p_neu)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoresFile {
    pub header: ScoreHeader,
    pub records: Vec<ScoredSentenceRecord>,
}

/// Lowercase hex SHA-256 of the sentence text.
pub fn text_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Read and validate a scores file. A completely empty input is an empty
/// file with a default header.
pub fn read_scores<R: BufRead>(r: R) -> Result<ScoresFile, ScoresError> {
    let mut header: Option<ScoreHeader> = None;
    let mut records = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 1;
        let malformed = |e: serde_json::Error| ScoresError::Malformed {
            line: lineno,
            message: e.to_string(),
        };
        if header.is_none() {
            header = Some(serde_json::from_str(&line).map_err(malformed)?);
            continue;
        }
        let rec: ScoredSentenceRecord = serde_json::from_str(&line).map_err(malformed)?;
        rec.to_score().map_err(|source| ScoresError::Invalid { line: lineno, source })?;
        records.push(rec);
    }
    let header = header.unwrap_or_default();
    if header.count != records.len() {
        return Err(ScoresError::CountMismatch {
            declared: header.count,
            found: records.len(),
        });
    }
    Ok(ScoresFile { header, records })
}

pub fn write_scores<W: Write>(mut w: W, model: &str, revision: &str, records: &[ScoredSentenceRecord]) -> std::io::Result<()> {
    let header = ScoreHeader {
        model: model.to_string(),
        revision: revision.to_string(),
        count: records.len(),
    };
    serde_json::to_writer(&mut w, &header)?;
    writeln!(w)?;
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        writeln!(w)?;
    }
    Ok(())
}

//! Transcript ingestion: raw records, speaker roles, and sentence segmentation.
//!
//! A transcript arrives as one JSON object per line. Each speaker turn is
//! classified into a [`SpeakerRole`] from its name and title, then split into
//! [`RawSentence`]s. Operator turns never produce sentences.

mod classify;
mod parse;
mod segment;

pub use classify::{classify_speaker, KeywordConfig, SpeakerClassifier};
pub use parse::{parse_transcript, read_transcripts, RawTurn, Timing, Transcript, TranscriptRecord};
pub use segment::{char_length, segment_sentences, segment_text, MIN_SENTENCE_CHARS};

use serde::{Deserialize, Serialize};
use std::fmt;

use thiserror::Error;

/// Role of the person speaking a turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeakerRole {
    Analyst,
    Cfo,
    Executive,
    Other,
    Operator,
}

impl SpeakerRole {
    /// The four roles that carry sentiment, in reporting order.
    pub const GROUPS: [SpeakerRole; 4] = [
        SpeakerRole::Analyst,
        SpeakerRole::Cfo,
        SpeakerRole::Executive,
        SpeakerRole::Other,
    ];

    /// Position in [`SpeakerRole::GROUPS`], or `None` for the operator.
    pub fn group_index(self) -> Option<usize> {
        match self {
            SpeakerRole::Analyst => Some(0),
            SpeakerRole::Cfo => Some(1),
            SpeakerRole::Executive => Some(2),
            SpeakerRole::Other => Some(3),
            SpeakerRole::Operator => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SpeakerRole::Analyst => "analyst",
            SpeakerRole::Cfo => "cfo",
            SpeakerRole::Executive => "executive",
            SpeakerRole::Other => "other",
            SpeakerRole::Operator => "operator",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SpeakerRole::Analyst => "Analyst",
            SpeakerRole::Cfo => "CFO",
            SpeakerRole::Executive => "Executive",
            SpeakerRole::Other => "Other",
            SpeakerRole::Operator => "Operator",
        }
    }
}

impl fmt::Display for SpeakerRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SpeakerRole {
    type Err = TranscriptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "analyst" => Ok(SpeakerRole::Analyst),
            "cfo" => Ok(SpeakerRole::Cfo),
            "executive" => Ok(SpeakerRole::Executive),
            "other" => Ok(SpeakerRole::Other),
            "operator" => Ok(SpeakerRole::Operator),
            other => Err(TranscriptError::UnknownRole(other.to_string())),
        }
    }
}

/// One speaker turn after classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeakerTurn {
    pub speaker_name: String,
    pub speaker_title: String,
    pub role: SpeakerRole,
    pub text: String,
    pub sequence_index: usize,
}

/// A sentence that survived segmentation and filtering.
///
/// `char_length` is at least [`MIN_SENTENCE_CHARS`] and `role` is never
/// [`SpeakerRole::Operator`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawSentence {
    pub call_id: String,
    pub role: SpeakerRole,
    pub text: String,
    pub char_length: usize,
}

#[derive(Debug, Error)]
pub enum TranscriptError {
    #[error("malformed transcript record at line {line}, column {column}: {message}")]
    Malformed {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("empty transcript: call {call_id} has no speaker turns")]
    EmptyTranscript { call_id: String },
    #[error("invalid call_datetime {value:?} for call {call_id}: {message}")]
    BadDatetime {
        call_id: String,
        value: String,
        message: String,
    },
    #[error("unknown speaker role {0:?}")]
    UnknownRole(String),
    #[error("i/o error reading transcripts: {0}")]
    Io(#[from] std::io::Error),
}

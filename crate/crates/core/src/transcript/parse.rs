use std::io::BufRead;

use chrono::{DateTime, FixedOffset, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{segment_sentences, RawSentence, SpeakerClassifier, SpeakerTurn, TranscriptError};

/// Announcement timing relative to the trading session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Timing {
    /// After market close.
    #[serde(rename = "AMC")]
    Amc,
    /// Before market open.
    #[serde(rename = "BMO")]
    Bmo,
}

impl Timing {
    pub fn as_str(self) -> &'static str {
        match self {
            Timing::Amc => "AMC",
            Timing::Bmo => "BMO",
        }
    }
}

impl std::str::FromStr for Timing {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "AMC" => Ok(Timing::Amc),
            "BMO" => Ok(Timing::Bmo),
            other => Err(format!("timing must be AMC or BMO, got {other:?}")),
        }
    }
}

/// Turn as it appears in the ingestion file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawTurn {
    pub name: String,
    #[serde(default)]
    pub title: String,
    pub text: String,
}

/// One line of the transcript ingestion file. Field names are normative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub call_id: String,
    pub ticker: String,
    pub call_datetime: String,
    pub timing: Timing,
    pub turns: Vec<RawTurn>,
}

/// A parsed transcript with classified turns.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub call_id: String,
    pub ticker: String,
    pub call_datetime: DateTime<FixedOffset>,
    pub timing: Timing,
    pub turns: Vec<SpeakerTurn>,
}

impl Transcript {
    /// Calendar date of the call in its own UTC offset.
    pub fn call_date(&self) -> NaiveDate {
        self.call_datetime.date_naive()
    }

    /// All filtered, non-operator sentences in document order.
    pub fn sentences(&self) -> Vec<RawSentence> {
        self.turns
            .iter()
            .flat_map(|t| segment_sentences(&self.call_id, t))
            .collect()
    }
}

fn classify_record(
    record: TranscriptRecord,
    classifier: &SpeakerClassifier,
) -> Result<Transcript, TranscriptError> {
    if record.turns.is_empty() {
        return Err(TranscriptError::EmptyTranscript {
            call_id: record.call_id,
        });
    }
    let call_datetime = DateTime::parse_from_rfc3339(&record.call_datetime).map_err(|e| {
        TranscriptError::BadDatetime {
            call_id: record.call_id.clone(),
            value: record.call_datetime.clone(),
            message: e.to_string(),
        }
    })?;
    let turns = record
        .turns
        .into_iter()
        .enumerate()
        .map(|(i, t)| SpeakerTurn {
            role: classifier.classify(&t.name, &t.title),
            speaker_name: t.name,
            speaker_title: t.title,
            text: t.text,
            sequence_index: i,
        })
        .collect();
    Ok(Transcript {
        call_id: record.call_id,
        ticker: record.ticker,
        call_datetime,
        timing: record.timing,
        turns,
    })
}

/// Parse a single record. `line` is the 1-based line number used in errors.
pub fn parse_transcript(
    raw: &str,
    line: usize,
    classifier: &SpeakerClassifier,
) -> Result<Transcript, TranscriptError> {
    let record: TranscriptRecord =
        serde_json::from_str(raw).map_err(|e| TranscriptError::Malformed {
            line: line + e.line().saturating_sub(1),
            column: e.column(),
            message: e.to_string(),
        })?;
    classify_record(record, classifier)
}

/// Read a newline-delimited transcript file. Blank lines are skipped.
pub fn read_transcripts<R: BufRead>(
    reader: R,
    classifier: &SpeakerClassifier,
) -> Result<Vec<Transcript>, TranscriptError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_transcript(&line, i + 1, classifier)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transcript::SpeakerRole;

    fn parse(s: &str) -> Result<Transcript, TranscriptError> {
        parse_transcript(s, 1, &SpeakerClassifier::default())
    }

    #[test]
    fn three_turns_in_order() {
        let rec = r#"{"call_id":"c1","ticker":"ABC","call_datetime":"2021-04-22T16:30:00-04:00","timing":"AMC","turns":[
            {"name":"Operator","title":"","text":"Welcome everyone to the call."},
            {"name":"Jane","title":"Chief Financial Officer","text":"Revenue grew nicely this quarter."},
            {"name":"Bob","title":"Analyst, UBS","text":"Can you talk about margins going forward?"}]}"#
            .replace('\n', " ");
        let t = parse(&rec).unwrap();
        assert_eq!(t.turns.len(), 3);
        let roles: Vec<_> = t.turns.iter().map(|t| t.role).collect();
        assert_eq!(roles, [SpeakerRole::Operator, SpeakerRole::Cfo, SpeakerRole::Analyst]);
        assert_eq!(t.turns.iter().map(|t| t.sequence_index).collect::<Vec<_>>(), [0, 1, 2]);
        assert_eq!(t.call_date(), NaiveDate::from_ymd_opt(2021, 4, 22).unwrap());
        assert_eq!(t.sentences().len(), 2);
    }

    #[test]
    fn missing_title_defaults_to_empty() {
        let rec = r#"{"call_id":"c2","ticker":"ABC","call_datetime":"2021-04-22T08:00:00Z","timing":"BMO","turns":[{"name":"Pat","text":"We remain confident in our plan."}]}"#;
        let t = parse(rec).unwrap();
        assert_eq!(t.turns[0].speaker_title, "");
        assert_eq!(t.turns[0].role, SpeakerRole::Other);
    }

    #[test]
    fn empty_transcript_is_distinct_error() {
        let rec = r#"{"call_id":"c3","ticker":"ABC","call_datetime":"2021-04-22T08:00:00Z","timing":"BMO","turns":[]}"#;
        assert!(matches!(parse(rec), Err(TranscriptError::EmptyTranscript { call_id }) if call_id == "c3"));
    }

    #[test]
    fn malformed_reports_position() {
        let input = "\n{\"call_id\": \"c\", \"ticker\": 5}\n";
        let err = read_transcripts(input.as_bytes(), &SpeakerClassifier::default()).unwrap_err();
        match err {
            TranscriptError::Malformed { line, column, .. } => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_timing_is_malformed() {
        let rec = r#"{"call_id":"c","ticker":"A","call_datetime":"2021-04-22T08:00:00Z","timing":"NOON","turns":[{"name":"a","title":"","text":"x"}]}"#;
        assert!(matches!(parse(rec), Err(TranscriptError::Malformed { .. })));
    }
}

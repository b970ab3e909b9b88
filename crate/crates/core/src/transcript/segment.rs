use super::{RawSentence, SpeakerRole, SpeakerTurn};

/// Sentences shorter than this many characters are dropped.
pub const MIN_SENTENCE_CHARS: usize = 10;

const ABBREVIATIONS: &[&str] = &["inc.", "corp.", "mr.", "ms.", "q1.", "q2.", "q3.", "q4.", "u.s."];

/// Character count used by the length filter: interior whitespace counts,
/// leading and trailing whitespace does not.
pub fn char_length(s: &str) -> usize {
    s.trim().chars().count()
}

fn is_guarded(before: &str) -> bool {
    let word = before
        .rsplit(char::is_whitespace)
        .next()
        .unwrap_or("")
        .trim_start_matches(|c: char| !c.is_alphanumeric());
    ABBREVIATIONS.iter().any(|a| word.eq_ignore_ascii_case(a))
}

/// Split text at `.`, `?` or `!` followed by whitespace, and at end of text.
///
/// A period closing one of the guarded abbreviations does not end a sentence.
/// Returned pieces are trimmed and never empty; no length filter is applied.
pub fn segment_text(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut iter = text.char_indices().peekable();
    while let Some((i, c)) = iter.next() {
        if !matches!(c, '.' | '?' | '!') {
            continue;
        }
        let next_is_space = match iter.peek() {
            Some(&(_, n)) => n.is_whitespace(),
            None => false,
        };
        if !next_is_space {
            continue;
        }
        let end = i + c.len_utf8();
        if c == '.' && is_guarded(&text[start..end]) {
            continue;
        }
        let piece = text[start..end].trim();
        if !piece.is_empty() {
            out.push(piece);
        }
        start = end;
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        out.push(tail);
    }
    out
}

/// Segment a turn into filtered sentences tagged with the turn's role.
///
/// Operator turns yield nothing.
pub fn segment_sentences(call_id: &str, turn: &SpeakerTurn) -> Vec<RawSentence> {
    if turn.role == SpeakerRole::Operator {
        return Vec::new();
    }
    segment_text(&turn.text)
        .into_iter()
        .filter_map(|s| {
            let n = char_length(s);
            (n >= MIN_SENTENCE_CHARS).then(|| RawSentence {
                call_id: call_id.to_string(),
                role: turn.role,
                text: s.to_string(),
                char_length: n,
            })
        })
        .collect()
}

//! Dictionary tone scoring with Loughran-McDonald style word lists.
//!
//! Tone for a sentence is `(positive hits − negative hits) / total tokens`.
//! There is no negation handling and no n-gram matching: the measure is
//! deliberately context-blind so it can serve as the benchmark scorer.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Term counts of the official master-dictionary lists.
pub const REFERENCE_POSITIVE_COUNT: usize = 347;
pub const REFERENCE_NEGATIVE_COUNT: usize = 2345;

const SHIPPED_POSITIVE: &str = include_str!("../data/lm_positive.txt");
const SHIPPED_NEGATIVE: &str = include_str!("../data/lm_negative.txt");

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("{} term(s) appear in both lists, e.g. {:?}", .0.len(), .0.first())]
    Overlap(Vec<String>),
    #[error("word list {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("word lists hold {positive} positive / {negative} negative terms, reference lists hold {REFERENCE_POSITIVE_COUNT} / {REFERENCE_NEGATIVE_COUNT}")]
    ReferenceCount { positive: usize, negative: usize },
}

/// Immutable pair of word lists plus the SHA-256 of each source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    positive: BTreeSet<String>,
    negative: BTreeSet<String>,
    positive_sha256: String,
    negative_sha256: String,
}

fn parse_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl Lexicon {
    /// Build from list file contents (one term per line, `#` comments).
    pub fn from_lists(positive: &str, negative: &str) -> Result<Self, LexiconError> {
        let pos = parse_list(positive);
        let neg = parse_list(negative);
        let overlap: Vec<String> = pos.intersection(&neg).cloned().collect();
        if !overlap.is_empty() {
            return Err(LexiconError::Overlap(overlap));
        }
        Ok(Self {
            positive: pos,
            negative: neg,
            positive_sha256: sha256_hex(positive),
            negative_sha256: sha256_hex(negative),
        })
    }

    pub fn load(positive: &Path, negative: &Path) -> Result<Self, LexiconError> {
        let read = |p: &Path| {
            std::fs::read_to_string(p).map_err(|source| LexiconError::Io {
                path: p.display().to_string(),
                source,
            })
        };
        Self::from_lists(&read(positive)?, &read(negative)?)
    }

    /// The word lists bundled with the crate.
    pub fn shipped() -> Self {
        Self::from_lists(SHIPPED_POSITIVE, SHIPPED_NEGATIVE).expect("bundled word lists are disjoint")
    }

    /// Check that the loaded lists have the official master-dictionary sizes.
    pub fn verify_reference_counts(&self) -> Result<(), LexiconError> {
        if self.positive.len() == REFERENCE_POSITIVE_COUNT && self.negative.len() == REFERENCE_NEGATIVE_COUNT {
            Ok(())
        } else {
            Err(LexiconError::ReferenceCount {
                positive: self.positive.len(),
                negative: self.negative.len(),
            })
        }
    }

    pub fn positive_count(&self) -> usize {
        self.positive.len()
    }

    pub fn negative_count(&self) -> usize {
        self.negative.len()
    }

    pub fn is_positive(&self, token: &str) -> bool {
        self.positive.contains(token)
    }

    pub fn is_negative(&self, token: &str) -> bool {
        self.negative.contains(token)
    }

    pub fn positive_sha256(&self) -> &str {
        &self.positive_sha256
    }

    pub fn negative_sha256(&self) -> &str {
        &self.negative_sha256
    }

    /// Same lexicon with the two lists exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            positive: self.negative.clone(),
            negative: self.positive.clone(),
            positive_sha256: self.negative_sha256.clone(),
            negative_sha256: self.positive_sha256.clone(),
        }
    }

    /// Add a term to one list. Fails if that would make the lists overlap.
    pub fn with_term(mut self, term: &str, positive: bool) -> Result<Self, LexiconError> {
        let term = term.trim().to_lowercase();
        let (target, other) = if positive {
            (&mut self.positive, &self.negative)
        } else {
            (&mut self.negative, &self.positive)
        };
        if other.contains(&term) {
            return Err(LexiconError::Overlap(vec![term]));
        }
        target.insert(term);
        Ok(self)
    }

    pub fn score(&self, sentence: &str) -> LmScore {
        lm_score(sentence, self)
    }
}

/// Dictionary counts for one sentence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmScore {
    pub n_pos: usize,
    pub n_neg: usize,
    pub n_words: usize,
    pub tone: f64,
}

impl LmScore {
    /// Share of tokens that hit either list; plays the role of a confidence
    /// weight when the dictionary score is aggregated.
    pub fn coverage(&self) -> f64 {
        if self.n_words == 0 {
            0.0
        } else {
            (self.n_pos + self.n_neg) as f64 / self.n_words as f64
        }
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Lowercase word tokens: maximal alphabetic runs, keeping apostrophes that
/// sit between two letters. Digits and punctuation separate tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphabetic() {
            current.extend(c.to_lowercase());
        } else if is_apostrophe(c)
            && !current.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_alphabetic())
        {
            current.push('\'');
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

pub fn lm_score(sentence: &str, lexicon: &Lexicon) -> LmScore {
    let tokens = tokenize(sentence);
    let n_pos = tokens.iter().filter(|t| lexicon.is_positive(t)).count();
    let n_neg = tokens.iter().filter(|t| lexicon.is_negative(t)).count();
    let n_words = tokens.len();
    let tone = if n_words == 0 {
        0.0
    } else {
        (n_pos as f64 - n_neg as f64) / n_words as f64
    };
    LmScore {
        n_pos,
        n_neg,
        n_words,
        tone,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Revenue grew 15% YoY."), ["revenue", "grew", "yoy"]);
        assert_eq!(tokenize("We're confident."), ["we're", "confident"]);
        assert_eq!(tokenize("We\u{2019}re 'quoted' end-user"), ["we're", "quoted", "end", "user"]);
        assert!(tokenize("").is_empty());
        assert!(tokenize("123 %$ 4.5").is_empty());
    }

    #[test]
    fn tone_formula() {
        let lex = Lexicon::from_lists("good\n", "bad\n").unwrap();
        let s = lm_score("good one two three four five six seven eight nine", &lex);
        assert_eq!((s.n_pos, s.n_neg, s.n_words), (1, 0, 10));
        assert!((s.tone - 0.1).abs() < 1e-15);
        assert_eq!(lm_score("", &lex).tone, 0.0);
        assert_eq!(lm_score("42%", &lex).n_words, 0);
    }

    #[test]
    fn list_parsing_ignores_comments_and_blanks() {
        let lex = Lexicon::from_lists("# header\n\n  Good \nGREAT\n", "bad\n# x\n").unwrap();
        assert_eq!(lex.positive_count(), 2);
        assert!(lex.is_positive("great"));
        assert_eq!(lex.negative_count(), 1);
    }

    #[test]
    fn overlap_rejected() {
        let err = Lexicon::from_lists("good\nfine\n", "fine\n").unwrap_err();
        assert!(matches!(err, LexiconError::Overlap(v) if v == ["fine"]));
        let lex = Lexicon::from_lists("good\n", "bad\n").unwrap();
        assert!(lex.with_term("good", false).is_err());
    }

    #[test]
    fn reference_count_check() {
        let pos: String = (0..REFERENCE_POSITIVE_COUNT).map(|i| format!("p{}\n", word(i))).collect();
        let neg: String = (0..REFERENCE_NEGATIVE_COUNT).map(|i| format!("n{}\n", word(i))).collect();
        let lex = Lexicon::from_lists(&pos, &neg).unwrap();
        assert!(lex.verify_reference_counts().is_ok());
        let short = Lexicon::from_lists("a\n", &neg).unwrap();
        assert!(matches!(
            short.verify_reference_counts(),
            Err(LexiconError::ReferenceCount { positive: 1, .. })
        ));
    }

    fn word(mut i: usize) -> String {
        let mut s = String::new();
        loop {
            s.push((b'a' + (i % 26) as u8) as char);
            i /= 26;
            if i == 0 {
                break s;
            }
        }
    }

    #[test]
    fn shipped_lists_load() {
        let lex = Lexicon::shipped();
        assert!(lex.positive_count() > 300);
        assert!(lex.negative_count() > 2000);
        assert_eq!(lex.positive_sha256().len(), 64);
    }

    proptest! {
        #[test]
        fn swapping_lists_negates_tone(s in "[a-zA-Z ',.%0-9]{0,120}") {
            let lex = Lexicon::shipped();
            let a = lm_score(&s, &lex);
            let b = lm_score(&s, &lex.swapped());
            prop_assert_eq!(a.tone, -b.tone);
            prop_assert!(a.tone.abs() <= 1.0);
            prop_assert!(a.n_pos + a.n_neg <= a.n_words);
        }

        #[test]
        fn absent_terms_do_not_change_score(s in "[a-z ]{0,80}", extra in "[a-z]{3,9}", positive: bool) {
            let lex = Lexicon::shipped();
            prop_assume!(!tokenize(&s).contains(&extra));
            prop_assume!(!lex.is_positive(&extra) && !lex.is_negative(&extra));
            let grown = lex.clone().with_term(&extra, positive).unwrap();
            prop_assert_eq!(lm_score(&s, &lex), lm_score(&s, &grown));
        }
    }
}

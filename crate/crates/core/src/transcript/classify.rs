use serde::{Deserialize, Serialize};

use super::SpeakerRole;

/// Frozen keyword lists for speaker classification.
///
/// Every cue is matched as a whole-word phrase against the lowercased title,
/// so `"cto"` does not fire inside `"director"`. The sell-side firm list is a
/// documented default; extend it through configuration rather than code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct KeywordConfig {
    pub analyst: Vec<String>,
    pub sell_side_firms: Vec<String>,
    pub cfo: Vec<String>,
    pub executive: Vec<String>,
    pub operator: String,
}

const DEFAULT_FIRMS: &[&str] = &[
    "goldman sachs",
    "morgan stanley",
    "jpmorgan",
    "j.p. morgan",
    "jp morgan",
    "bank of america",
    "bofa",
    "merrill lynch",
    "citigroup",
    "citi",
    "barclays",
    "ubs",
    "credit suisse",
    "deutsche bank",
    "wells fargo",
    "evercore",
    "jefferies",
    "bernstein",
    "raymond james",
    "rbc capital markets",
    "cowen",
    "td cowen",
    "piper sandler",
    "keybanc",
    "oppenheimer",
    "wolfe research",
    "stifel",
    "baird",
    "truist",
    "mizuho",
    "bmo capital markets",
    "wedbush",
    "needham",
    "guggenheim",
    "bernstein research",
    "macquarie",
    "nomura",
    "hsbc",
    "bnp paribas",
    "societe generale",
    "jp morgan securities",
    "william blair",
    "cantor fitzgerald",
    "loop capital",
    "melius research",
    "redburn",
    "scotiabank",
    "susquehanna",
    "tigress financial",
    "argus research",
];

impl Default for KeywordConfig {
    fn default() -> Self {
        let owned = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        Self {
            analyst: owned(&["analyst"]),
            sell_side_firms: owned(DEFAULT_FIRMS),
            cfo: owned(&["cfo", "chief financial officer", "treasurer"]),
            executive: owned(&[
                "ceo",
                "chief executive",
                "president",
                "chairman",
                "coo",
                "cto",
                "managing director",
            ]),
            operator: "operator".to_string(),
        }
    }
}

/// Compiled classifier: keyword phrases pre-split into word sequences.
#[derive(Debug, Clone)]
pub struct SpeakerClassifier {
    analyst: Vec<Vec<String>>,
    cfo: Vec<Vec<String>>,
    executive: Vec<Vec<String>>,
    operator: String,
}

fn words(s: &str) -> Vec<String> {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| w.to_lowercase())
        .collect()
}

fn contains_phrase(haystack: &[String], phrase: &[String]) -> bool {
    !phrase.is_empty()
        && haystack.len() >= phrase.len()
        && haystack.windows(phrase.len()).any(|w| w == phrase)
}

impl SpeakerClassifier {
    pub fn new(config: &KeywordConfig) -> Self {
        let compile = |xs: &[String]| xs.iter().map(|x| words(x)).filter(|p| !p.is_empty()).collect();
        let mut analyst: Vec<Vec<String>> = compile(&config.analyst);
        analyst.extend(compile(&config.sell_side_firms));
        Self {
            analyst,
            cfo: compile(&config.cfo),
            executive: compile(&config.executive),
            operator: config.operator.trim().to_lowercase(),
        }
    }

    /// Precedence on multiple matches: Operator > Analyst > CFO > Executive > Other.
    pub fn classify(&self, name: &str, title: &str) -> SpeakerRole {
        let is_operator =
            |s: &str| !self.operator.is_empty() && s.trim().to_lowercase() == self.operator;
        if is_operator(name) || is_operator(title) {
            return SpeakerRole::Operator;
        }
        let title_words = words(title);
        let any = |cues: &[Vec<String>]| cues.iter().any(|p| contains_phrase(&title_words, p));
        if any(&self.analyst) {
            SpeakerRole::Analyst
        } else if any(&self.cfo) {
            SpeakerRole::Cfo
        } else if any(&self.executive) {
            SpeakerRole::Executive
        } else {
            SpeakerRole::Other
        }
    }
}

impl Default for SpeakerClassifier {
    fn default() -> Self {
        Self::new(&KeywordConfig::default())
    }
}

/// Classify with the default keyword configuration.
pub fn classify_speaker(name: &str, title: &str) -> SpeakerRole {
    thread_local! {
        static DEFAULT: SpeakerClassifier = SpeakerClassifier::default();
    }
    DEFAULT.with(|c| c.classify(name, title))
}

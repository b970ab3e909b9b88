//! Call-level sentiment from sentence scores.
//!
//! Every aggregate is generic over [`ScoredSentence`], so the same formulas
//! serve model probabilities and dictionary tone. Sums are taken over sorted
//! terms, which makes each aggregate exactly invariant to sentence order.

mod scores;
mod weights;

pub use scores::{read_scores, text_hash, write_scores, ScoreHeader, ScoredSentenceRecord, ScoresError, ScoresFile};
pub use weights::{fit_ic_weights, ic_p_value, normalize_ics, SectionWeights, WeightError};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::LmScore;
use crate::transcript::SpeakerRole;

/// `|τ|` must exceed this for a sentence to count as extreme.
pub const EXTREME_THRESHOLD: f64 = 0.5;
const SIMPLEX_TOL: f64 = 1e-6;

/// A sentence with a role, a net score in [−1, 1] and a confidence in [0, 1].
pub trait ScoredSentence {
    fn role(&self) -> SpeakerRole;
    fn net(&self) -> f64;
    fn confidence(&self) -> f64;
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AggregateError {
    #[error("call {call_id}: probabilities ({p_pos}, {p_neg}, {p_neu}) are not a distribution")]
    NotADistribution {
        call_id: String,
        p_pos: f64,
        p_neg: f64,
        p_neu: f64,
    },
    #[error("call {call_id}: operator sentences carry no sentiment")]
    OperatorSentence { call_id: String },
}

/// Model output for one sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceScore {
    pub call_id: String,
    pub role: SpeakerRole,
    pub p_pos: f64,
    pub p_neg: f64,
    pub p_neu: f64,
}

impl SentenceScore {
    pub fn new(call_id: impl Into<String>, role: SpeakerRole, p_pos: f64, p_neg: f64, p_neu: f64) -> Result<Self, AggregateError> {
        let call_id = call_id.into();
        let in_unit = |p: f64| (0.0..=1.0).contains(&p);
        if !(in_unit(p_pos) && in_unit(p_neg) && in_unit(p_neu)) || (p_pos + p_neg + p_neu - 1.0).abs() > SIMPLEX_TOL {
            return Err(AggregateError::NotADistribution {
                call_id,
                p_pos,
                p_neg,
                p_neu,
            });
        }
        if role == SpeakerRole::Operator {
            return Err(AggregateError::OperatorSentence { call_id });
        }
        Ok(Self {
            call_id,
            role,
            p_pos,
            p_neg,
            p_neu,
        })
    }
}

impl ScoredSentence for SentenceScore {
    fn role(&self) -> SpeakerRole {
        self.role
    }

    /// `p_pos − p_neg`.
    fn net(&self) -> f64 {
        self.p_pos - self.p_neg
    }

    /// `1 − p_neu`.
    fn confidence(&self) -> f64 {
        1.0 - self.p_neu
    }
}

/// Dictionary tone for one sentence, aggregated like a model score with
/// dictionary coverage as the confidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmSentence {
    pub role: SpeakerRole,
    pub score: LmScore,
}

impl ScoredSentence for LmSentence {
    fn role(&self) -> SpeakerRole {
        self.role
    }

    fn net(&self) -> f64 {
        self.score.tone
    }

    fn confidence(&self) -> f64 {
        self.score.coverage()
    }
}

fn sorted_sum(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v.iter().sum()
}

fn mean_of(v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let n = v.len() as f64;
    Some(sorted_sum(v) / n)
}

/// M1: mean net score.
pub fn agg_simple_mean<S: ScoredSentence>(s: &[S]) -> Option<f64> {
    mean_of(s.iter().map(|x| x.net()).collect())
}

/// M2: `Σ c·τ / Σ c`; missing when every confidence is zero.
pub fn agg_confidence_weighted<S: ScoredSentence>(s: &[S]) -> Option<f64> {
    let den = sorted_sum(s.iter().map(|x| x.confidence()).collect());
    if !(den > 0.0) {
        return None;
    }
    let num = sorted_sum(s.iter().map(|x| x.confidence() * x.net()).collect());
    Some(num / den)
}

/// M3: share of sentences with `τ > threshold` minus share with `τ < −threshold`.
pub fn agg_extreme_fraction<S: ScoredSentence>(s: &[S], threshold: f64) -> Option<f64> {
    if s.is_empty() {
        return None;
    }
    let pos = s.iter().filter(|x| x.net() > threshold).count() as f64;
    let neg = s.iter().filter(|x| x.net() < -threshold).count() as f64;
    Some((pos - neg) / s.len() as f64)
}

/// Mean net score per role, indexed like [`SpeakerRole::GROUPS`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RoleMeans(pub [Option<f64>; 4]);

impl RoleMeans {
    pub fn get(&self, role: SpeakerRole) -> Option<f64> {
        role.group_index().and_then(|i| self.0[i])
    }
}

pub fn category_means<S: ScoredSentence>(s: &[S]) -> RoleMeans {
    let mut by_role: [Vec<f64>; 4] = Default::default();
    for x in s {
        if let Some(i) = x.role().group_index() {
            by_role[i].push(x.net());
        }
    }
    RoleMeans(by_role.map(mean_of))
}

/// M4: weighted mean of the role means present, renormalized over them.
/// Missing when no role with positive weight is present.
pub fn agg_section_weighted(means: &RoleMeans, weights: &[f64; 4]) -> Option<f64> {
    let present: Vec<(f64, f64)> = means
        .0
        .iter()
        .zip(weights)
        .filter_map(|(m, w)| m.filter(|_| *w > 0.0).map(|m| (*w, m)))
        .collect();
    if present.is_empty() {
        return None;
    }
    let den: f64 = present.iter().map(|(w, _)| w).sum();
    let num: f64 = present.iter().map(|(w, m)| w * m).sum();
    Some(num / den)
}

/// M5: mean net score over analyst sentences.
pub fn agg_analyst_only<S: ScoredSentence>(s: &[S]) -> Option<f64> {
    mean_of(s.iter().filter(|x| x.role() == SpeakerRole::Analyst).map(|x| x.net()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    M1,
    M2,
    M3,
    M4,
    M5,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::M1, Method::M2, Method::M3, Method::M4, Method::M5];

    /// Panel column name.
    pub fn column(self) -> &'static str {
        match self {
            Method::M1 => "m1",
            Method::M2 => "m2",
            Method::M3 => "m3",
            Method::M4 => "m4",
            Method::M5 => "m5",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::M1 => "Simple mean (M1)",
            Method::M2 => "Confidence-weighted (M2)",
            Method::M3 => "Extreme fraction (M3)",
            Method::M4 => "Section-weighted (M4)",
            Method::M5 => "Analyst (M5)",
        }
    }
}

/// One aggregate by method. `weights` is only read by M4, which is missing
/// without it.
pub fn aggregate<S: ScoredSentence>(method: Method, s: &[S], weights: Option<&[f64; 4]>, threshold: f64) -> Option<f64> {
    match method {
        Method::M1 => agg_simple_mean(s),
        Method::M2 => agg_confidence_weighted(s),
        Method::M3 => agg_extreme_fraction(s, threshold),
        Method::M4 => weights.and_then(|w| agg_section_weighted(&category_means(s), w)),
        Method::M5 => agg_analyst_only(s),
    }
}

/// Dictionary-tone counterpart of [`aggregate`].
pub fn lm_call_aggregates(sentences: &[LmSentence], method: Method, weights: Option<&SectionWeights>) -> Option<f64> {
    aggregate(method, sentences, weights.map(|w| w.weights()), EXTREME_THRESHOLD)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallSentiment {
    pub call_id: String,
    pub m1: Option<f64>,
    pub m2: Option<f64>,
    pub m3: Option<f64>,
    pub m4: Option<f64>,
    pub m5: Option<f64>,
    pub n_sentences: usize,
    pub role_means: RoleMeans,
}

impl CallSentiment {
    pub fn compute<S: ScoredSentence>(call_id: &str, s: &[S], weights: Option<&[f64; 4]>, threshold: f64) -> Self {
        let role_means = category_means(s);
        Self {
            call_id: call_id.to_string(),
            m1: agg_simple_mean(s),
            m2: agg_confidence_weighted(s),
            m3: agg_extreme_fraction(s, threshold),
            m4: weights.and_then(|w| agg_section_weighted(&role_means, w)),
            m5: agg_analyst_only(s),
            n_sentences: s.len(),
            role_means,
        }
    }

    pub fn get(&self, method: Method) -> Option<f64> {
        match method {
            Method::M1 => self.m1,
            Method::M2 => self.m2,
            Method::M3 => self.m3,
            Method::M4 => self.m4,
            Method::M5 => self.m5,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use SpeakerRole::*;

    /// Sentence with net τ and confidence c.
    #[derive(Clone, Debug)]
    struct T(SpeakerRole, f64, f64);

    impl ScoredSentence for T {
        fn role(&self) -> SpeakerRole {
            self.0
        }
        fn net(&self) -> f64 {
            self.1
        }
        fn confidence(&self) -> f64 {
            self.2
        }
    }

    fn taus(v: &[f64]) -> Vec<T> {
        v.iter().map(|t| T(Executive, *t, 1.0)).collect()
    }

    const TABLE_WEIGHTS: [f64; 4] = [0.488, 0.295, 0.159, 0.058];

    #[test]
    fn simple_mean() {
        assert_eq!(agg_simple_mean(&taus(&[0.5, -0.5])), Some(0.0));
        assert_eq!(agg_simple_mean(&taus(&[0.95])), Some(0.95));
        assert!((agg_simple_mean(&taus(&[0.9, 0.1, -0.2, 0.2])).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(agg_simple_mean::<T>(&[]), None);
    }

    #[test]
    fn confidence_weighted() {
        let s = [T(Cfo, 1.0, 1.0), T(Cfo, 0.0, 0.0)];
        assert_eq!(agg_confidence_weighted(&s), Some(1.0));
        let s = [T(Cfo, 0.8, 0.9), T(Cfo, -0.4, 0.3)];
        assert!((agg_confidence_weighted(&s).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(agg_confidence_weighted(&[T(Cfo, 0.0, 0.0)]), None);
    }

    #[test]
    fn extreme_fraction() {
        assert_eq!(agg_extreme_fraction(&taus(&[0.6; 3]), EXTREME_THRESHOLD), Some(1.0));
        assert_eq!(agg_extreme_fraction(&taus(&[0.5; 3]), EXTREME_THRESHOLD), Some(0.0));
        assert_eq!(agg_extreme_fraction(&taus(&[-0.5; 3]), EXTREME_THRESHOLD), Some(0.0));
        assert_eq!(agg_extreme_fraction(&taus(&[0.9, -0.9, 0.1, 0.2]), EXTREME_THRESHOLD), Some(0.0));
    }

    #[test]
    fn role_means_and_m4() {
        let s = [T(Analyst, 0.2, 1.0), T(Analyst, 0.4, 1.0), T(Cfo, -0.1, 1.0)];
        let m = category_means(&s);
        assert!((m.get(Analyst).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(m.get(Cfo), Some(-0.1));
        assert_eq!(m.get(Executive), None);
        assert_eq!(category_means::<T>(&[]), RoleMeans::default());

        let two = RoleMeans([Some(0.2), Some(0.0), None, None]);
        let want = (0.488 * 0.2) / (0.488 + 0.295);
        assert!((agg_section_weighted(&two, &TABLE_WEIGHTS).unwrap() - want).abs() < 1e-15);
        assert!((want - 0.12464).abs() < 1e-5);
        let only = RoleMeans([Some(0.3), None, None, None]);
        assert_eq!(agg_section_weighted(&only, &TABLE_WEIGHTS), Some(0.3));
        let zero_weighted = RoleMeans([None, Some(0.3), None, None]);
        assert_eq!(agg_section_weighted(&zero_weighted, &[1.0, 0.0, 0.0, 0.0]), None);
    }

    #[test]
    fn analyst_only() {
        let s = [T(Analyst, 0.1, 1.0), T(Analyst, 0.3, 1.0), T(Executive, -0.9, 1.0)];
        assert!((agg_analyst_only(&s).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(agg_analyst_only(&[T(Cfo, 0.3, 1.0)]), None);
    }

    #[test]
    fn sentence_score_validation() {
        assert!(SentenceScore::new("c", Cfo, 0.7, 0.2, 0.1).is_ok());
        assert!(SentenceScore::new("c", Cfo, 0.7, 0.2, 0.2).is_err());
        assert!(SentenceScore::new("c", Cfo, 1.1, -0.1, 0.0).is_err());
        assert!(SentenceScore::new("c", Operator, 0.7, 0.2, 0.1).is_err());
        let s = SentenceScore::new("c", Cfo, 0.7, 0.2, 0.1).unwrap();
        assert!((s.net() - 0.5).abs() < 1e-15);
        assert!((s.confidence() - 0.9).abs() < 1e-15);
    }

    #[test]
    fn lm_aggregates() {
        let balanced = LmScore {
            n_pos: 1,
            n_neg: 1,
            n_words: 8,
            tone: 0.0,
        };
        let s: Vec<LmSentence> = GROUPS.iter().map(|r| LmSentence { role: *r, score: balanced }).collect();
        let w = SectionWeights::from_ics([Some(0.1); 4], [10; 4], chrono::NaiveDate::from_ymd_opt(2023, 1, 1).unwrap()).unwrap();
        for m in Method::ALL {
            assert_eq!(lm_call_aggregates(&s, m, Some(&w)), Some(0.0), "{m:?}");
        }
        // no dictionary hits at all: zero confidence everywhere
        let blank: Vec<LmSentence> = s
            .iter()
            .map(|x| LmSentence {
                role: x.role,
                score: LmScore { n_pos: 0, n_neg: 0, n_words: 8, tone: 0.0 },
            })
            .collect();
        assert_eq!(lm_call_aggregates(&blank, Method::M1, Some(&w)), Some(0.0));
        assert_eq!(lm_call_aggregates(&blank, Method::M2, Some(&w)), None);
        let one = [LmSentence {
            role: Cfo,
            score: LmScore {
                n_pos: 1,
                n_neg: 0,
                n_words: 10,
                tone: 0.1,
            },
        }];
        assert_eq!(lm_call_aggregates(&one, Method::M1, None), Some(0.1));
        assert_eq!(lm_call_aggregates(&one, Method::M5, None), None);
        assert_eq!(lm_call_aggregates(&one, Method::M4, None), None);
    }

    const GROUPS: [SpeakerRole; 4] = SpeakerRole::GROUPS;

    fn sentence() -> impl Strategy<Value = T> {
        (0usize..4, -1.0f64..1.0, 0.0f64..1.0).prop_map(|(r, t, c)| T(GROUPS[r], t, c))
    }

    proptest! {
        #[test]
        fn permutation_invariance(mut s in prop::collection::vec(sentence(), 1..30), seed in any::<u64>()) {
            let before = CallSentiment::compute("c", &s, Some(&TABLE_WEIGHTS), EXTREME_THRESHOLD);
            // deterministic shuffle
            let n = s.len();
            let mut state = seed;
            for i in (1..n).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                s.swap(i, (state >> 33) as usize % (i + 1));
            }
            let after = CallSentiment::compute("c", &s, Some(&TABLE_WEIGHTS), EXTREME_THRESHOLD);
            prop_assert_eq!(before, after);
        }

        #[test]
        fn identities(s in prop::collection::vec(sentence(), 1..30), c in 0.01f64..1.0, mean in -1.0f64..1.0) {
            let equal_c: Vec<T> = s.iter().map(|x| T(x.0, x.1, c)).collect();
            let m1 = agg_simple_mean(&equal_c).unwrap();
            prop_assert!((agg_confidence_weighted(&equal_c).unwrap() - m1).abs() < 1e-12);

            let flat: Vec<T> = s.iter().map(|x| T(x.0, mean, x.2)).collect();
            let m4 = agg_section_weighted(&category_means(&flat), &TABLE_WEIGHTS).unwrap();
            prop_assert!((m4 - agg_simple_mean(&flat).unwrap()).abs() < 1e-12);

            let analyst_w = [1.0, 0.0, 0.0, 0.0];
            let m4a = agg_section_weighted(&category_means(&s), &analyst_w);
            prop_assert_eq!(m4a, agg_analyst_only(&s));

            for v in [agg_simple_mean(&s), agg_confidence_weighted(&s), agg_extreme_fraction(&s, 0.5), agg_analyst_only(&s)]
                .into_iter()
                .flatten()
            {
                prop_assert!((-1.0..=1.0).contains(&v));
            }
        }
    }
}

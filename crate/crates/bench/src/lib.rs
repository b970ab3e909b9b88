//! Fixtures shared by the benchmarks.

use callvoice::synth::{generate_panel, SynthConfig};
use callvoice::{Panel, SentenceScore, SpeakerRole};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SENTENCES: &[&str] = &[
    "Revenue grew 12% year over year and margins improved in every segment.",
    "We saw weaker demand in Europe and expect the headwinds to persist.",
    "Can you talk about pricing in the U.S. market?",
    "Mr. Smith will take the next question.",
    "Operating cash flow was 1.2 billion dollars for the quarter.",
    "The impairment charge reflects a decline in expected volumes!",
    "Backlog remains strong and we are raising our full year outlook.",
];

/// Synthetic call panel with the default generating parameters.
pub fn panel(months: usize, calls_per_month: usize) -> Panel {
    let cfg = SynthConfig {
        n_months: months,
        calls_per_month,
        seed: 7,
        ..SynthConfig::default()
    };
    generate_panel(&cfg).expect("bench config is valid").0
}

/// Two uniform vectors of length `n`.
pub fn pairs(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = (0..n).map(|_| rng.random()).collect();
    let y = (0..n).map(|_| rng.random()).collect();
    (x, y)
}

/// A speaker turn of roughly `n` sentences.
pub fn turn_text(n: usize) -> String {
    (0..n).map(|i| SENTENCES[i % SENTENCES.len()]).collect::<Vec<_>>().join(" ")
}

pub fn sentence_scores(n: usize, seed: u64) -> Vec<SentenceScore> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let role = SpeakerRole::GROUPS[rng.random_range(0..4)];
            let p_neu: f64 = rng.random();
            let p_pos = (1.0 - p_neu) * rng.random::<f64>();
            SentenceScore::new("bench", role, p_pos, 1.0 - p_neu - p_pos, p_neu).unwrap()
        })
        .collect()
}

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use super::PipelineError;
use crate::aggregate::{read_scores, ScoresFile};
use crate::lexicon::Lexicon;
use crate::market::{compound_monthly, read_earnings, read_factors, read_prices, EarningsRow, FactorMonth, PriceSeries};
use crate::transcript::{read_transcripts, SpeakerClassifier, Transcript};

/// Locations of the ingestion files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputPaths {
    pub transcripts: PathBuf,
    pub scores: PathBuf,
    pub prices: PathBuf,
    pub earnings: PathBuf,
    pub factors: PathBuf,
    /// Positive and negative word lists; the bundled lists when `None`.
    pub lexicon: Option<(PathBuf, PathBuf)>,
}

impl InputPaths {
    /// Every file the inputs read, in a fixed order.
    pub fn files(&self) -> Vec<&Path> {
        let mut v: Vec<&Path> = vec![&self.transcripts, &self.scores, &self.prices, &self.earnings, &self.factors];
        if let Some((p, n)) = &self.lexicon {
            v.push(p);
            v.push(n);
        }
        v
    }
}

/// Parsed ingestion files.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub transcripts: Vec<Transcript>,
    pub scores: ScoresFile,
    pub prices: BTreeMap<String, PriceSeries>,
    pub earnings: Vec<EarningsRow>,
    /// Factors compounded to calendar months.
    pub factors: Vec<FactorMonth>,
    pub lexicon: Lexicon,
}

fn input_err(path: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Input {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn open(path: &Path) -> Result<BufReader<File>, PipelineError> {
    File::open(path).map(BufReader::new).map_err(|e| input_err(path, e))
}

pub fn load_inputs(paths: &InputPaths) -> Result<Inputs, PipelineError> {
    let transcripts =
        read_transcripts(open(&paths.transcripts)?, &SpeakerClassifier::default()).map_err(|e| input_err(&paths.transcripts, e))?;
    let scores = read_scores(open(&paths.scores)?).map_err(|e| input_err(&paths.scores, e))?;
    let prices = read_prices(open(&paths.prices)?).map_err(|e| input_err(&paths.prices, e))?;
    let earnings = read_earnings(open(&paths.earnings)?).map_err(|e| input_err(&paths.earnings, e))?;
    let daily = read_factors(open(&paths.factors)?).map_err(|e| input_err(&paths.factors, e))?;
    let factors = compound_monthly(&daily).map_err(|e| input_err(&paths.factors, e))?;
    let lexicon = match &paths.lexicon {
        Some((p, n)) => Lexicon::load(p, n).map_err(|e| input_err(p, e))?,
        None => Lexicon::shipped(),
    };
    Ok(Inputs {
        transcripts,
        scores,
        prices,
        earnings,
        factors,
        lexicon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_file_names_its_path() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("absent.jsonl");
        let paths = InputPaths {
            transcripts: missing.clone(),
            scores: missing.clone(),
            prices: missing.clone(),
            earnings: missing.clone(),
            factors: missing.clone(),
            lexicon: None,
        };
        let err = load_inputs(&paths).unwrap_err().to_string();
        assert!(err.contains("absent.jsonl"), "{err}");
    }
}

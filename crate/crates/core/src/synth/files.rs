use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{month_offset, normal, simulate, to_panel, GroundTruth, Stratum, SynthCall, SynthConfig, SynthError};
use crate::aggregate::{text_hash, write_scores, ScoredSentenceRecord};
use crate::panel::Panel;
use crate::transcript::{RawTurn, SpeakerRole, Timing, TranscriptRecord};

pub const BENCHMARK_TICKER: &str = "SPX";
const SCORE_MODEL: &str = "synthetic";

const POSITIVE: &[&str] = &[
    "We achieved strong results across every region this quarter",
    "Margins improved and we are pleased with the progress of the team",
    "Customer demand was excellent and our execution was successful",
    "We gained share and the new products benefited from favorable pricing",
    "Our balance sheet strength gives us attractive opportunities to invest",
];
const NEGATIVE: &[&str] = &[
    "Orders declined sharply and the slowdown in the region was disappointing",
    "We recorded an impairment after losses in the legacy business",
    "Results were weaker because of adverse weather and supply delays",
    "The downturn in industrial markets negatively affected volumes",
    "We saw deterioration in credit and remain concerned about the outlook",
];
const NEUTRAL: &[&str] = &[
    "Let me walk through the segment detail for the quarter",
    "Capital allocation priorities are unchanged from our prior update",
    "We will provide more detail on pricing at the investor day",
    "The timing of shipments follows the usual seasonal pattern",
    "Turning to the next slide on operating expenses",
];
/// Extreme sentences a word list misreads: no dictionary terms, or terms
/// of the opposite sign.
const CONTEXT_POSITIVE: &[&str] = &[
    "This 15% year over year growth in net product sales reflects higher patient demand across all indications",
    "Excluding negative currency effects revenue grew 4% while earnings per share increased 14%",
    "Bookings rose 12% and backlog reached a record level",
];
const CONTEXT_NEGATIVE: &[&str] = &[
    "Revenues were 545 million dollars, down 5% versus the prior year, while adjusted revenues fell 4%",
    "Trading revenues were 2 billion dollars, down 24% from strong performance last year",
    "Same store sales fell 6% and traffic was down in every region",
];
/// Share of non-analyst extreme sentences drawn from the context pools.
const CONTEXT_SHARE: f64 = 0.5;
const ANALYST_POSITIVE: &[&str] = &[
    "Congratulations on the strong quarter and the excellent margin performance",
    "The improvement in returns looks great and I wanted to follow up on it",
];
const ANALYST_NEGATIVE: &[&str] = &[
    "Can you talk about the weakness in orders and the concerns on pricing",
    "Why did volumes decline so much and how worried should we be about losses",
];
const ANALYST_NEUTRAL: &[&str] = &[
    "Can you give us some color on the capital spending plans",
    "How should we think about the timing of the next product cycle",
];

/// Paths written by [`write_ingestion_files`], plus the in-memory panel of
/// the same simulation.
#[derive(Debug, Clone)]
pub struct SynthFiles {
    pub transcripts: PathBuf,
    pub scores: PathBuf,
    pub prices: PathBuf,
    pub earnings: PathBuf,
    pub factors: PathBuf,
    pub ground_truth: PathBuf,
    pub truth: GroundTruth,
    pub panel: Panel,
}

fn sentence_text(rng: &mut ChaCha8Rng, role: SpeakerRole, stratum: Stratum) -> String {
    let analyst = role == SpeakerRole::Analyst;
    let context = !analyst && stratum != Stratum::Neutral && rng.random::<f64>() < CONTEXT_SHARE;
    let pool = match (stratum, analyst) {
        (Stratum::Positive, false) if context => CONTEXT_POSITIVE,
        (Stratum::Negative, false) if context => CONTEXT_NEGATIVE,
        (Stratum::Positive, false) => POSITIVE,
        (Stratum::Negative, false) => NEGATIVE,
        (Stratum::Neutral, false) => NEUTRAL,
        (Stratum::Positive, true) => ANALYST_POSITIVE,
        (Stratum::Negative, true) => ANALYST_NEGATIVE,
        (Stratum::Neutral, true) => ANALYST_NEUTRAL,
    };
    let base = pool[rng.random_range(0..pool.len())];
    let end = if analyst && stratum != Stratum::Positive { '?' } else { '.' };
    format!("{base}{end}")
}

struct Speaker {
    role: SpeakerRole,
    name: &'static str,
    title: &'static str,
}

const SPEAKERS: [Speaker; 4] = [
    Speaker {
        role: SpeakerRole::Other,
        name: "Dana Reyes",
        title: "Director of Investor Relations",
    },
    Speaker {
        role: SpeakerRole::Executive,
        name: "Alex Morgan",
        title: "Chief Executive Officer",
    },
    Speaker {
        role: SpeakerRole::Cfo,
        name: "Jordan Lee",
        title: "Chief Financial Officer",
    },
    Speaker {
        role: SpeakerRole::Analyst,
        name: "Sam Patel",
        title: "Analyst, Morgan Stanley",
    },
];

fn transcript(rng: &mut ChaCha8Rng, call: &SynthCall) -> (TranscriptRecord, Vec<ScoredSentenceRecord>) {
    let time = match call.timing {
        Timing::Amc => "16:30:00",
        Timing::Bmo => "08:30:00",
    };
    let mut turns = vec![RawTurn {
        name: "Operator".into(),
        title: String::new(),
        text: "Good day and welcome to the quarterly earnings conference call. All lines are in listen-only mode.".into(),
    }];
    let mut scores = Vec::with_capacity(call.sentences.len());
    for sp in &SPEAKERS {
        let mine: Vec<_> = call.sentences.iter().filter(|s| s.role == sp.role).collect();
        if mine.is_empty() {
            continue;
        }
        if sp.role == SpeakerRole::Analyst {
            turns.push(RawTurn {
                name: "Operator".into(),
                title: String::new(),
                text: format!("Our first question comes from {} with Morgan Stanley.", sp.name),
            });
        }
        let mut text = Vec::with_capacity(mine.len());
        for s in mine {
            let t = sentence_text(rng, sp.role, s.stratum);
            scores.push(ScoredSentenceRecord {
                call_id: call.call_id.clone(),
                role: sp.role,
                text_hash: text_hash(&t),
                p_pos: s.p_pos,
                p_neg: s.p_neg,
                p_neu: s.p_neu,
            });
            text.push(t);
        }
        turns.push(RawTurn {
            name: sp.name.into(),
            title: sp.title.into(),
            text: text.join(" "),
        });
    }
    let record = TranscriptRecord {
        call_id: call.call_id.clone(),
        ticker: call.ticker.clone(),
        call_datetime: format!("{}T{time}-05:00", call.date),
        timing: call.timing,
        turns,
    };
    (record, scores)
}

fn calendar(first: NaiveDate, last: NaiveDate) -> Vec<NaiveDate> {
    first
        .iter_days()
        .take_while(|d| *d <= last)
        .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
        .collect()
}

#[derive(Serialize)]
struct PriceRow<'a> {
    ticker: &'a str,
    date: NaiveDate,
    close: f64,
}

fn write_prices(path: &Path, rng: &mut ChaCha8Rng, days: &[NaiveDate], calls: &[SynthCall], bench: &[f64]) -> Result<(), SynthError> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    let index = |d: NaiveDate| days.binary_search(&d).expect("call dates are weekdays inside the calendar");
    let mut tickers: Vec<&str> = calls.iter().map(|c| c.ticker.as_str()).collect();
    tickers.sort_unstable();
    tickers.dedup();
    let mut write_series = |ticker: &str, gross: &[f64]| -> Result<(), SynthError> {
        let mut close = 50.0;
        for (i, d) in days.iter().enumerate() {
            if i > 0 {
                close *= gross[i];
            }
            w.serialize(PriceRow { ticker, date: *d, close }).map_err(std::io::Error::other)?;
        }
        Ok(())
    };
    write_series(BENCHMARK_TICKER, &bench.iter().map(|r| 1.0 + r).collect::<Vec<_>>())?;
    for ticker in tickers {
        let mut gross: Vec<f64> = bench.iter().map(|b| 1.0 + b + 0.015 * normal(rng)).collect();
        for call in calls.iter().filter(|c| c.ticker == ticker) {
            let t = index(call.date);
            let first = match call.timing {
                Timing::Amc => {
                    gross[t] = 1.0;
                    t + 1
                }
                Timing::Bmo => t,
            };
            let mut prev = 1.0;
            for (k, r) in call.returns.iter().enumerate() {
                gross[first + k] = (1.0 + r) / prev;
                prev = 1.0 + r;
            }
        }
        write_series(ticker, &gross)?;
    }
    w.flush()?;
    Ok(())
}

fn write_earnings(path: &Path, sim: &super::Simulation) -> Result<(), SynthError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "ticker,fiscal_quarter_end,report_date,eps_actual,eps_estimate")?;
    let mut rows: Vec<(&str, NaiveDate, NaiveDate, (f64, f64))> = sim
        .warmup
        .iter()
        .map(|q| (q.ticker.as_str(), q.quarter_end, q.report_date, q.eps))
        .chain(sim.calls.iter().map(|c| (c.ticker.as_str(), c.quarter_end, c.date, c.eps)))
        .collect();
    rows.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    for (t, q, d, (a, e)) in rows {
        writeln!(w, "{t},{q},{d},{a},{e}")?;
    }
    w.flush()?;
    Ok(())
}

fn write_factors(path: &Path, rng: &mut ChaCha8Rng, days: &[NaiveDate], bench: &[f64]) -> Result<(), SynthError> {
    const RF_DAILY_PCT: f64 = 0.004;
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "date,MktRF,SMB,HML,RMW,CMA,RF")?;
    for (d, b) in days.iter().zip(bench) {
        let mkt = 100.0 * b - RF_DAILY_PCT;
        let f: [f64; 4] = [0.5, 0.5, 0.3, 0.3].map(|sd| sd * normal(rng));
        writeln!(w, "{},{mkt},{},{},{},{},{RF_DAILY_PCT}", d.format("%Y%m%d"), f[0], f[1], f[2], f[3])?;
    }
    w.flush()?;
    Ok(())
}

/// Simulate a panel and write it as raw ingestion files under `dir`:
/// `transcripts.jsonl`, `scores.jsonl`, `prices.csv` (with benchmark
/// `SPX`), `earnings.csv`, `factors.csv` and `ground_truth.json`.
///
/// Event-window daily returns are set so that every window return computed
/// from the closes reproduces the in-memory panel's return.
pub fn write_ingestion_files(cfg: &SynthConfig, dir: &Path) -> Result<SynthFiles, SynthError> {
    let sim = simulate(cfg)?;
    std::fs::create_dir_all(dir)?;
    let files = SynthFiles {
        transcripts: dir.join("transcripts.jsonl"),
        scores: dir.join("scores.jsonl"),
        prices: dir.join("prices.csv"),
        earnings: dir.join("earnings.csv"),
        factors: dir.join("factors.csv"),
        ground_truth: dir.join("ground_truth.json"),
        truth: sim.truth.clone(),
        panel: to_panel(&sim.calls),
    };

    let mut text_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    text_rng.set_stream(2);
    let mut tw = BufWriter::new(File::create(&files.transcripts)?);
    let mut all_scores = Vec::new();
    for call in &sim.calls {
        let (record, scores) = transcript(&mut text_rng, call);
        serde_json::to_writer(&mut tw, &record).map_err(std::io::Error::other)?;
        writeln!(tw)?;
        all_scores.extend(scores);
    }
    tw.flush()?;
    write_scores(BufWriter::new(File::create(&files.scores)?), SCORE_MODEL, &format!("seed-{}", cfg.seed), &all_scores)?;

    let first = month_offset(cfg.start_month, -1).first_day();
    let last = month_offset(cfg.start_month, cfg.n_months as i64 + 3).first_day().pred_opt().unwrap();
    let days = calendar(first, last);
    let mut px_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    px_rng.set_stream(3);
    let bench: Vec<f64> = days.iter().map(|_| 0.0003 + 0.01 * normal(&mut px_rng)).collect();
    write_prices(&files.prices, &mut px_rng, &days, &sim.calls, &bench)?;
    write_earnings(&files.earnings, &sim)?;
    write_factors(&files.factors, &mut px_rng, &days, &bench)?;

    let mut gw = BufWriter::new(File::create(&files.ground_truth)?);
    serde_json::to_writer_pretty(&mut gw, &sim.truth).map_err(std::io::Error::other)?;
    writeln!(gw)?;
    gw.flush()?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::Lexicon;
    use crate::transcript::{read_transcripts, segment_text, SpeakerClassifier};
    use std::io::BufReader;

    #[test]
    fn templates_have_the_intended_dictionary_sign() {
        let lex = Lexicon::shipped();
        for (pool, sign) in [
            (POSITIVE, 1),
            (ANALYST_POSITIVE, 1),
            (NEGATIVE, -1),
            (ANALYST_NEGATIVE, -1),
            (NEUTRAL, 0),
            (ANALYST_NEUTRAL, 0),
        ] {
            for s in pool {
                let sc = lex.score(s);
                match sign {
                    1 => assert!(sc.n_pos > 0 && sc.n_neg == 0, "{s}"),
                    -1 => assert!(sc.n_neg > 0 && sc.n_pos == 0, "{s}"),
                    _ => assert!(sc.n_pos + sc.n_neg == 0, "{s}"),
                }
                assert_eq!(segment_text(&format!("{s}. {s}.")).len(), 2, "{s}");
            }
        }
        for (pool, sign) in [(CONTEXT_POSITIVE, 1.0), (CONTEXT_NEGATIVE, -1.0)] {
            for s in pool {
                assert!(sign * lex.score(s).tone <= 0.0, "{s}");
                assert_eq!(segment_text(&format!("{s}. {s}.")).len(), 2, "{s}");
            }
        }
    }

    #[test]
    fn files_round_trip_through_the_readers() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SynthConfig {
            n_months: 4,
            calls_per_month: 6,
            mean_sentences: 12,
            ..SynthConfig::small(3)
        };
        let f = write_ingestion_files(&cfg, dir.path()).unwrap();
        let ts = read_transcripts(BufReader::new(File::open(&f.transcripts).unwrap()), &SpeakerClassifier::default()).unwrap();
        assert_eq!(ts.len(), 24);
        let scores = crate::aggregate::read_scores(BufReader::new(File::open(&f.scores).unwrap())).unwrap();
        let sentences: Vec<_> = ts.iter().flat_map(|t| t.sentences()).collect();
        assert_eq!(sentences.len(), scores.records.len());
        for (s, r) in sentences.iter().zip(&scores.records) {
            assert_eq!(s.role, r.role);
            assert_eq!(text_hash(&s.text), r.text_hash);
        }
        let prices = crate::market::read_prices(File::open(&f.prices).unwrap()).unwrap();
        assert_eq!(prices.len(), 3 * 6 + 1);
        for row in f.panel.rows() {
            let p = &prices[&row.ticker];
            for h in [1u32, 5, 21] {
                let r = crate::market::event_return(p, row.event_date, row.timing, h).unwrap();
                assert!((r - row.ret(h).unwrap()).abs() < 1e-9);
            }
        }
        let earnings = crate::market::read_earnings(File::open(&f.earnings).unwrap()).unwrap();
        assert_eq!(earnings.len(), 24 + 18 * 4);
        let factors = crate::market::read_factors(File::open(&f.factors).unwrap()).unwrap();
        assert!(crate::market::compound_monthly(&factors).unwrap().len() >= 4);
    }
}

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use callvoice::aggregate::{SectionWeights, WeightError};
use callvoice::econ::EconError;
use callvoice::market::{compound_monthly, read_factors, read_prices, FactorMonth, PriceSeries};
use callvoice::pipeline::{
    self, apply_weights, build_panel, check_frozen, fit_weights, load_inputs, Artifact, PipelineError, ReportError,
    LM_ROLE_PREFIX, ROLE_PREFIX,
};
use callvoice::synth::{calibrate_to_table3, write_ingestion_files, SynthConfig, SynthError};
use callvoice::{Panel, YearMonth};
use clap::{Args, ValueEnum};
use log::{info, warn};

use crate::config::{InputsSection, RunConfig, RunSection};
use crate::manifest::Manifest;
use crate::{CliError, Stage};

fn input_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Weights(WeightError::TemporalLeak { .. }) | PipelineError::FrozenWeightsLeak { .. } => {
                CliError::Leak(e.to_string())
            }
            PipelineError::Weights(WeightError::NoAdmissibleWeights) => CliError::Degenerate(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Econ(EconError::UnknownSignal(s)) => CliError::Config(format!("signal {s} not present in the panel")),
            ReportError::Econ(e) => CliError::Degenerate(e.to_string()),
            ReportError::MissingBenchmark(_) => CliError::Input(e.to_string()),
        }
    }
}

/// Files touched by one invocation, for the manifest.
struct Run<'a> {
    cfg: &'a RunConfig,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl Run<'_> {
    fn read_panel(&mut self, path: &Path) -> Result<Panel, CliError> {
        let f = File::open(path).map_err(|e| input_err(path, e))?;
        let p = Panel::read_csv(BufReader::new(f)).map_err(|e| input_err(path, e))?;
        self.inputs.push(path.to_path_buf());
        Ok(p)
    }

    fn write_panel(&mut self, panel: &Panel, name: &str) -> Result<PathBuf, CliError> {
        let path = self.cfg.out(name);
        let f = File::create(&path).map_err(|e| input_err(&path, e))?;
        panel.write_csv(std::io::BufWriter::new(f)).map_err(|e| input_err(&path, e))?;
        self.outputs.push(path.clone());
        Ok(path)
    }

    fn write_artifact(&mut self, a: &Artifact) -> Result<(), CliError> {
        let dir = &self.cfg.run.output_dir;
        a.write(dir).map_err(|e| input_err(dir, e))?;
        for ext in ["txt", "json"] {
            self.outputs.push(dir.join(format!("{}.{ext}", a.name)));
        }
        Ok(())
    }

    fn factors(&mut self) -> Result<Vec<FactorMonth>, CliError> {
        let path = self.cfg.input_paths()?.factors;
        let f = File::open(&path).map_err(|e| input_err(&path, e))?;
        let daily = read_factors(BufReader::new(f)).map_err(|e| input_err(&path, e))?;
        self.inputs.push(path.clone());
        compound_monthly(&daily).map_err(|e| input_err(&path, e))
    }

    fn prices(&mut self) -> Result<BTreeMap<String, PriceSeries>, CliError> {
        let path = self.cfg.input_paths()?.prices;
        let f = File::open(&path).map_err(|e| input_err(&path, e))?;
        let p = read_prices(BufReader::new(f)).map_err(|e| input_err(&path, e))?;
        self.inputs.push(path);
        Ok(p)
    }

    fn ingest(&mut self) -> Result<PathBuf, CliError> {
        let paths = self.cfg.input_paths()?;
        let inputs = load_inputs(&paths)?;
        self.inputs.extend(paths.files().into_iter().map(Path::to_path_buf));
        let panel = build_panel(&inputs, &self.cfg.panel_options())?;
        info!("ingested {} calls", panel.len());
        self.write_panel(&panel, "panel.csv")
    }

    fn fit_weights(&mut self, panel_path: &Path) -> Result<(), CliError> {
        let panel = self.read_panel(panel_path)?;
        let (h, cutoff) = (self.cfg.run.weight_horizon, self.cfg.run.training_cutoff);
        let model = fit_weights(&panel, ROLE_PREFIX, h, cutoff)?;
        let save = |w: &SectionWeights, path: &Path| w.save(path).map_err(|e| CliError::Input(e.to_string()));
        let path = self.cfg.out("weights.toml");
        save(&model, &path)?;
        self.outputs.push(path);
        let lm = match fit_weights(&panel, LM_ROLE_PREFIX, h, cutoff) {
            Ok(w) => {
                let path = self.cfg.out("lm_weights.toml");
                save(&w, &path)?;
                self.outputs.push(path);
                Some(w)
            }
            Err(PipelineError::Weights(WeightError::NoAdmissibleWeights)) => {
                warn!("dictionary tone has no positive role IC; no dictionary weights written");
                None
            }
            Err(e) => return Err(e.into()),
        };
        self.write_artifact(&pipeline::weights_report(&model, lm.as_ref()))
    }

    fn load_weights(&mut self, path: &Path) -> Result<SectionWeights, CliError> {
        let w = SectionWeights::load(path).map_err(|e| CliError::Input(e.to_string()))?;
        self.inputs.push(path.to_path_buf());
        check_frozen(&w, self.cfg.run.training_cutoff)?;
        Ok(w)
    }

    fn signals(&mut self, panel_path: &Path, weights: &Path, lm_weights: &Path) -> Result<PathBuf, CliError> {
        let panel = self.read_panel(panel_path)?;
        let w = self.load_weights(weights)?;
        let mut panel = apply_weights(&panel, &w, "m4");
        if lm_weights.exists() {
            let w = self.load_weights(lm_weights)?;
            panel = apply_weights(&panel, &w, "lm_m4");
        }
        self.write_panel(&panel, "signals.csv")
    }

    fn analysis(&mut self, stage: Stage, signals: &Panel) -> Result<(), CliError> {
        let s = self.cfg.analysis();
        let a = match stage {
            Stage::Ic => pipeline::ic_report(signals, &s)?,
            Stage::Fm => pipeline::fm_report(signals, &s)?,
            Stage::Ff5 => {
                let f = self.factors()?;
                pipeline::ff5_report(signals, &f, &s)?
            }
            Stage::Sorts => pipeline::sorts_report(signals, &s)?,
            Stage::Doublesort => pipeline::double_sort_report(signals, &s)?,
            Stage::Car => {
                let p = self.prices()?;
                pipeline::car_report(signals, &p, &self.cfg.run.benchmark, &s)?
            }
            Stage::Decay => pipeline::decay_report(signals, &s)?,
            other => unreachable!("{} is not an analysis stage", other.name()),
        };
        self.write_artifact(&a)
    }
}

const ANALYSES: [Stage; 7] = [Stage::Ic, Stage::Fm, Stage::Ff5, Stage::Sorts, Stage::Doublesort, Stage::Car, Stage::Decay];

pub fn run_stage(stage: Stage, cfg: &RunConfig) -> Result<(), CliError> {
    let dir = &cfg.run.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| input_err(dir, e))?;
    let mut run = Run {
        cfg,
        inputs: Vec::new(),
        outputs: Vec::new(),
    };
    let result = (|| match stage {
        Stage::Ingest => run.ingest().map(|_| ()),
        Stage::FitWeights => run.fit_weights(&cfg.panel_path()),
        Stage::Signals => run
            .signals(&cfg.panel_path(), &cfg.weights_path(), &cfg.lm_weights_path())
            .map(|_| ()),
        Stage::Report => {
            let panel = run.ingest()?;
            let weights = match &cfg.inputs.weights {
                Some(frozen) => frozen.clone(),
                None => {
                    run.fit_weights(&panel)?;
                    cfg.out("weights.toml")
                }
            };
            let signals = run.signals(&panel, &weights, &cfg.lm_weights_path())?;
            let p = run.read_panel(&signals)?;
            for a in ANALYSES {
                run.analysis(a, &p)?;
            }
            Ok(())
        }
        analysis => {
            let p = run.read_panel(&cfg.signals_path())?;
            run.analysis(analysis, &p)
        }
    })();
    result?;
    let config = serde_json::to_value(cfg).expect("config serializes");
    let mut m = Manifest::new(stage.name(), Some((&cfg.hash(), config)));
    run.inputs.retain(|p| !run.outputs.contains(p));
    m.record_inputs(&run.inputs)?;
    m.outputs = run.outputs.iter().map(|p| p.display().to_string()).collect();
    m.outputs.dedup();
    m.write(dir)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    /// 117 months of 140 calls.
    Full,
    /// 24 months of 40 calls.
    Small,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Directory for the fixture files and run.toml.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "full")]
    preset: Preset,
    #[arg(long)]
    seed: Option<u64>,
    /// Generator parameters (TOML); overrides the preset.
    #[arg(long)]
    synth_config: Option<PathBuf>,
    /// Re-tune sentence parameters to the reference moments before writing.
    #[arg(long)]
    calibrate: bool,
}

fn synth_err(e: SynthError) -> CliError {
    match e {
        SynthError::InvalidConfig(m) => CliError::Config(m),
        SynthError::Calibration(m) => CliError::Degenerate(m),
        SynthError::Io(e) => CliError::Input(e.to_string()),
    }
}

/// Training cutoff at the same fraction of the sample as the default
/// cutoff in a full-length panel (93 of 117 months).
fn fixture_cutoff(cfg: &SynthConfig) -> chrono::NaiveDate {
    let k = (cfg.n_months * 93 + 58) / 117;
    let mut m: YearMonth = cfg.start_month;
    for _ in 0..k {
        m = m.succ();
    }
    m.first_day()
}

pub fn synth(args: &SynthArgs) -> Result<(), CliError> {
    let mut cfg = match &args.synth_config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            SynthConfig::from_toml(&text).map_err(synth_err)?
        }
        None => match args.preset {
            Preset::Full => SynthConfig::default(),
            Preset::Small => SynthConfig::small(SynthConfig::default().seed),
        },
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.calibrate {
        cfg = calibrate_to_table3(&cfg).map_err(synth_err)?;
    }
    let files = write_ingestion_files(&cfg, &args.out).map_err(synth_err)?;
    let name = |p: &Path| PathBuf::from(p.file_name().expect("fixture files have names"));
    let run = RunConfig {
        inputs: InputsSection {
            transcripts: Some(name(&files.transcripts)),
            scores: Some(name(&files.scores)),
            prices: Some(name(&files.prices)),
            earnings: Some(name(&files.earnings)),
            factors: Some(name(&files.factors)),
            ..InputsSection::default()
        },
        run: RunSection {
            training_cutoff: fixture_cutoff(&cfg),
            ..RunSection::default()
        },
    };
    let run_path = args.out.join("run.toml");
    std::fs::write(&run_path, toml::to_string(&run).expect("config serializes")).map_err(|e| input_err(&run_path, e))?;
    let mut m = Manifest::new("synth", None);
    m.outputs = [&files.transcripts, &files.scores, &files.prices, &files.earnings, &files.factors, &files.ground_truth, &run_path]
        .iter()
        .map(|p| p.display().to_string())
        .collect();
    m.write(&args.out)?;
    println!("{}", run_path.display());
    Ok(())
}

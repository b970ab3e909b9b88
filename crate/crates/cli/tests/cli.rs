use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const ARTIFACTS: [&str; 8] = ["weights", "ic", "fm", "ff5", "sorts", "doublesort", "car", "decay"];

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_callvoice"));
    c.env_remove("CALLVOICE_THREADS").env("RUST_LOG", "error");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixture(dir: &Path) -> PathBuf {
    let out = run(&["synth", "--out", s(dir), "--preset", "small"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    dir.join("run.toml")
}

fn read(path: PathBuf) -> String {
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn synth_then_report_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path());
    let out = run(&["report", "-c", s(&cfg)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let o = dir.path().join("out");
    for f in ["panel.csv", "signals.csv", "weights.toml", "manifest-report.json"] {
        assert!(o.join(f).is_file(), "{f}");
    }
    for a in ARTIFACTS {
        assert!(!read(o.join(format!("{a}.txt"))).is_empty(), "{a}.txt");
        let j: serde_json::Value = serde_json::from_str(&read(o.join(format!("{a}.json")))).unwrap();
        assert!(j.is_object() || j.is_array(), "{a}.json");
    }
    let m: serde_json::Value = serde_json::from_str(&read(o.join("manifest-report.json"))).unwrap();
    assert_eq!(m["subcommand"], "report");
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
    assert!(m["inputs"].as_object().unwrap().keys().any(|k| k.ends_with("transcripts.jsonl")));
}

#[test]
fn stages_run_one_at_a_time_match_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path());
    let staged = dir.path().join("staged");
    for stage in ["ingest", "fit-weights", "signals", "ic", "fm", "ff5", "sorts", "doublesort", "car", "decay"] {
        let out = run(&[stage, "-c", s(&cfg), "--output-dir", s(&staged)]);
        assert!(out.status.success(), "{stage}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(staged.join(format!("manifest-{stage}.json")).is_file());
    }
    assert!(run(&["report", "-c", s(&cfg)]).status.success());
    for a in ARTIFACTS {
        let name = format!("{a}.txt");
        assert_eq!(read(staged.join(&name)), read(dir.path().join("out").join(&name)), "{name}");
    }
}

#[test]
fn report_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run(&["report", "-c", s(&cfg), "--output-dir", s(&a)]).status.success());
    let out = bin()
        .args(["report", "-c", s(&cfg), "--output-dir", s(&b)])
        .env("CALLVOICE_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    let mut names: Vec<String> = ARTIFACTS.iter().flat_map(|a| [format!("{a}.txt"), format!("{a}.json")]).collect();
    names.extend(["panel.csv", "signals.csv", "weights.toml"].map(String::from));
    for n in names {
        assert_eq!(std::fs::read(a.join(&n)).unwrap(), std::fs::read(b.join(&n)).unwrap(), "{n}");
    }
}

#[test]
fn fitted_weights_ignore_post_cutoff_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path());
    assert!(run(&["ingest", "-c", s(&cfg)]).status.success());
    let panel = read(dir.path().join("out/panel.csv"));
    let cutoff = "2022-08-01";
    let mut lines = panel.lines();
    let mut trimmed = format!("{}\n", lines.next().unwrap());
    let mut dropped = 0;
    for l in lines {
        if l.split(',').nth(2).unwrap() < cutoff {
            trimmed.push_str(l);
            trimmed.push('\n');
        } else {
            dropped += 1;
        }
    }
    assert!(dropped > 0);
    let tp = dir.path().join("trimmed.csv");
    std::fs::write(&tp, trimmed).unwrap();
    let (full, cut) = (dir.path().join("full"), dir.path().join("cut"));
    let p = dir.path().join("out/panel.csv");
    assert!(run(&["fit-weights", "-c", s(&cfg), "--output-dir", s(&full), "--panel", s(&p)]).status.success());
    assert!(run(&["fit-weights", "-c", s(&cfg), "--output-dir", s(&cut), "--panel", s(&tp)]).status.success());
    for f in ["weights.toml", "lm_weights.toml", "weights.txt"] {
        let (a, b) = (full.join(f), cut.join(f));
        if a.exists() || b.exists() {
            assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap(), "{f}");
        }
    }
}

#[test]
fn weights_fitted_past_the_cutoff_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path());
    assert!(run(&["ingest", "-c", s(&cfg)]).status.success());
    assert!(run(&["fit-weights", "-c", s(&cfg)]).status.success());
    let out = run(&["signals", "-c", s(&cfg), "--training-cutoff", "2022-01-01"]);
    assert_eq!(out.status.code(), Some(5), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn empty_panel_is_a_degenerate_ic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path());
    assert!(run(&["report", "-c", s(&cfg)]).status.success());
    let signals = read(dir.path().join("out/signals.csv"));
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, format!("{}\n", signals.lines().next().unwrap())).unwrap();
    let out = run(&["ic", "-c", s(&cfg), "--signals", s(&empty), "--output-dir", s(&dir.path().join("e"))]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no qualifying months"));
}

#[test]
fn missing_input_names_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path());
    std::fs::remove_file(dir.path().join("prices.csv")).unwrap();
    let out = run(&["ingest", "-c", s(&cfg)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("prices.csv"));
}

#[test]
fn bad_config_and_unknown_signal_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[run]\nwinsor_lower = 50.0\nwinsor_upper = 10.0\n").unwrap();
    assert_eq!(run(&["ingest", "-c", s(&bad)]).status.code(), Some(2));
    let cfg = fixture(dir.path());
    assert!(run(&["report", "-c", s(&cfg)]).status.success());
    let out = run(&["ic", "-c", s(&cfg), "--signal", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["ic", "-c", s(&cfg)]).env("CALLVOICE_THREADS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

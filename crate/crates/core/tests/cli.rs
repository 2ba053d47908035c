use std::path::{Path, PathBuf};
use std::process::Command;

use carnot_core::cli::{run, Outcome};
use carnot_core::report::{AnalysisReport, Payload};
use tempfile::TempDir;

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn carnot(args: &[&str]) -> Outcome {
    let mut full = vec!["carnot"];
    full.extend_from_slice(args);
    run(full)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn thermal_file(dir: &TempDir, name: &str, energies: &[f64], t: f64) -> PathBuf {
    let w: Vec<f64> = energies.iter().map(|e| (-(e - energies[0]) / t).exp()).collect();
    let z: f64 = w.iter().sum();
    let diag: Vec<f64> = w.iter().map(|x| x / z).collect();
    let text = serde_json::json!({"label": name, "energies": energies, "diag": diag}).to_string();
    write(dir, name, &text)
}

fn parse(out: &Outcome) -> AnalysisReport {
    AnalysisReport::from_json(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", out.stdout))
}

const SCULLY: &str = r#"{"label":"scully","energies":[1,0,0],"diag":[0.2,0.4,0.4],"offdiag":[{"i":1,"j":2,"re":0.1,"im":0.0}]}"#;
const PAIR: &str = r#"{"label":"pair","energies":[0,0],"diag":[0.5,0.5],"offdiag":[{"i":0,"j":1,"re":0.25,"im":0.0}]}"#;

#[test]
fn decompose_thermal_and_coherent() {
    let dir = TempDir::new().unwrap();
    let thermal = thermal_file(&dir, "t.json", &[0.0, 1.0, 2.5, 4.0], 1.5);
    let out = carnot(&["--json", "decompose", p(&thermal)]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let Payload::Decomposition(d) = parse(&out).payload else { panic!() };
    assert_eq!(d.channels.len(), 6);
    for c in &d.channels {
        assert!((c.temperature.unwrap() - 1.5).abs() < 1e-9);
    }

    let scully = write(&dir, "s.json", SCULLY);
    let out = carnot(&["--json", "decompose", p(&scully)]);
    let Payload::Decomposition(d) = parse(&out).payload else { panic!() };
    assert_eq!(d.channels.len(), 3);
    assert_eq!(
        d.channels.iter().filter(|c| c.kind == carnot_core::ChannelKind::ZeroTemp).count(),
        1
    );
    let text = carnot(&["decompose", p(&scully)]).stdout;
    assert!(text.contains("ZEROTEMP"), "{text}");
}

#[test]
fn malformed_files_exit_2_naming_the_field() {
    let dir = TempDir::new().unwrap();
    let missing = write(&dir, "m.json", r#"{"label":"x","diag":[1.0]}"#);
    let out = carnot(&["--json", "decompose", p(&missing)]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("energies"), "{}", out.stderr);

    let short = write(&dir, "d.json", r#"{"label":"x","energies":[0,1],"diag":[1.0]}"#);
    let out = carnot(&["--json", "decompose", p(&short)]);
    assert_eq!(out.code, 2);
    let err: serde_json::Value = serde_json::from_str(&out.stderr).unwrap();
    assert_eq!(err["error"]["field"], "diag");

    let moving = write(
        &dir,
        "n.json",
        r#"{"label":"x","energies":[0,1],"diag":[0.5,0.5],"offdiag":[{"i":0,"j":1,"re":0.1,"im":0}]}"#,
    );
    let out = carnot(&["--json", "decompose", p(&moving)]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("NOT_STATIONARY"), "{}", out.stderr);

    let out = carnot(&["decompose", "/nonexistent/file.json"]);
    assert_eq!(out.code, 2);
    let out = carnot(&["bound"]);
    assert_eq!(out.code, 2);
}

#[test]
fn bound_examples() {
    let dir = TempDir::new().unwrap();
    let hot = thermal_file(&dir, "h.json", &[0.0, 1.0, 3.0], 2.0);
    let cold = thermal_file(&dir, "c.json", &[0.0, 0.5], 1.0);
    let out = carnot(&["--json", "bound", p(&hot), p(&cold)]);
    assert_eq!(out.code, 0);
    let Payload::Bound(b) = parse(&out).payload else { panic!() };
    assert!((b.eta_max.unwrap() - 0.5).abs() < 1e-12);

    let pair = write(&dir, "pair.json", PAIR);
    let small_gap = thermal_file(&dir, "hs.json", &[0.0, 0.05], 1.0);
    let out = carnot(&["--json", "bound", p(&small_gap), p(&pair)]);
    let Payload::Bound(b) = parse(&out).payload else { panic!() };
    assert_eq!(b.eta_max, Some(1.0));
    assert_eq!(b.regime, Some(carnot_core::Regime::Unit));

    let inverted = write(&dir, "inv.json", r#"{"label":"inv","energies":[0,1],"diag":[0.3,0.7]}"#);
    let out = carnot(&["bound", p(&inverted), p(&cold)]);
    assert_eq!(out.code, 3);
    assert!(out.stdout.contains("INVERSION"), "{}", out.stdout);
}

#[test]
fn simulate_worked_example_and_empty_engine() {
    let dir = TempDir::new().unwrap();
    let hot = write(&dir, "h.json", r#"{"label":"h","energies":[0,3],"diag":[0.7,0.3]}"#);
    let cold = write(&dir, "c.json", r#"{"label":"c","energies":[0,1],"diag":[0.8,0.2]}"#);
    let engine = write(&dir, "e.json", r#"{"lambda":0.1,"entries":[{"m":1,"n":0,"p":0,"q":1,"weight":1}]}"#);
    let out = carnot(&["--json", "simulate", p(&hot), p(&cold), p(&engine)]);
    let Payload::Simulation(s) = parse(&out).payload else { panic!() };
    assert!((s.heat.q_hot - 0.003).abs() < 1e-15);
    assert!((s.heat.q_cold + 0.001).abs() < 1e-15);
    assert!((s.heat.work - 0.002).abs() < 1e-15);
    assert!((s.heat.efficiency.unwrap() - 2.0 / 3.0).abs() < 1e-12);

    let empty = write(&dir, "z.json", r#"{"lambda":1,"entries":[]}"#);
    let out = carnot(&["--json", "simulate", p(&hot), p(&cold), p(&empty)]);
    assert_eq!(out.code, 0);
    let Payload::Simulation(s) = parse(&out).payload else { panic!() };
    assert_eq!((s.heat.q_hot, s.heat.q_cold, s.heat.work), (0.0, 0.0, 0.0));
    assert!(s.heat.efficiency.is_none());

    let bad = write(&dir, "b.json", r#"{"lambda":1,"entries":[{"m":0,"n":1,"p":0,"q":1,"weight":1}]}"#);
    assert_eq!(carnot(&["simulate", p(&hot), p(&cold), p(&bad)]).code, 2);
}

#[test]
fn saturating_engine_replays_within_bound() {
    let dir = TempDir::new().unwrap();
    let hot = write(&dir, "h.json", r#"{"label":"h","energies":[0,1,2.5],"diag":[0.5,0.3,0.2]}"#);
    let cold = write(&dir, "c.json", r#"{"label":"c","energies":[0,0.4,1.2],"diag":[0.7,0.2,0.1]}"#);
    let engine = dir.path().join("sat.json");
    let out = carnot(&["--json", "bound", p(&hot), p(&cold), "--engine-out", p(&engine)]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let Payload::Bound(b) = parse(&out).payload else { panic!() };
    let out = carnot(&["--json", "simulate", p(&hot), p(&cold), p(&engine)]);
    assert_eq!(out.code, 0);
    let Payload::Simulation(s) = parse(&out).payload else { panic!() };
    assert!(s.heat.efficiency.unwrap() <= b.eta_max.unwrap() + 1e-12);
    assert_eq!(s.within_bound, Some(true));
}

#[test]
fn simulate_flags_bound_breach() {
    let dir = TempDir::new().unwrap();
    let hot = write(&dir, "h.json", r#"{"label":"h","energies":[0,6],"diag":[0.64,0.36]}"#);
    let cold = write(
        &dir,
        "c.json",
        r#"{"label":"c","energies":[0,2,3],"diag":[0.5,0.39473684210526316,0.10526315789473684]}"#,
    );
    let engine = write(
        &dir,
        "e.json",
        r#"{"lambda":1,"entries":[{"m":1,"n":0,"p":1,"q":2,"weight":1},{"m":1,"n":0,"p":0,"q":1,"weight":1}]}"#,
    );
    let out = carnot(&["simulate", p(&hot), p(&cold), p(&engine)]);
    assert_eq!(out.code, 4);
    assert!(out.stdout.contains("BOUND EXCEEDED"));
}

#[test]
fn verify_sweeps_and_vacuous_pass() {
    let dir = TempDir::new().unwrap();
    let hot = thermal_file(&dir, "h.json", &[0.0, 1.0, 1.7, 3.0], 3.0);
    let cold = thermal_file(&dir, "c.json", &[0.0, 0.6, 2.0], 1.0);
    let out = carnot(&["--json", "verify", p(&hot), p(&cold), "--trials", "10000", "--seed", "7"]);
    assert_eq!(out.code, 0);
    let report = parse(&out);
    assert_eq!(report.meta.seed, Some(7));
    let Payload::Verification(v) = report.payload else { panic!() };
    assert_eq!(v.sweep.trials, 10_000);
    assert_eq!(v.sweep.violations, 0);

    let out = carnot(&["--json", "verify", p(&hot), p(&cold), "--trials", "0"]);
    assert_eq!(out.code, 0);
    let Payload::Verification(v) = parse(&out).payload else { panic!() };
    assert_eq!((v.sweep.applicable, v.sweep.violations), (0, 0));
}

#[test]
fn oracle_resonant_cosine_agrees() {
    let dir = TempDir::new().unwrap();
    let hot = write(&dir, "h.json", r#"{"label":"h","energies":[0,3],"diag":[0.7,0.3]}"#);
    let cold = write(&dir, "c.json", PAIR.replace("[0,0]", "[0,1]").replace("0.25", "0").as_str());
    let proto = write(
        &dir,
        "p.json",
        r#"{"envelope":"cosine","omega":2,"t_final":6.283185307179586,"amplitudes":[{"m":1,"n":0,"p":0,"q":1,"re":1,"im":0}]}"#,
    );
    let out = carnot(&["--json", "oracle", p(&proto), p(&hot), p(&cold), "--lambda", "0.1"]);
    assert_eq!(out.code, 0, "{} {}", out.stdout, out.stderr);
    let Payload::Oracle(o) = parse(&out).payload else { panic!() };
    assert!(o.comparison.agree);
    assert!(o.comparison.discrepancy_hot <= o.comparison.tolerance_hot);
    assert_eq!(o.first_order_max, 0.0);

    let bad = write(&dir, "q.json", r#"{"envelope":"cosine","omega":2,"t_final":1.0,"amplitudes":[]}"#);
    assert_eq!(carnot(&["oracle", p(&bad), p(&hot), p(&cold)]).code, 2);
}

#[test]
fn scully_and_coherent_pair_commands() {
    let out = carnot(&["--json", "scully", "--pa", "0.2", "--pb", "0.4", "--rho-bc", "0.1", "--omega", "1"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let Payload::Scully(s) = parse(&out).payload else { panic!() };
    let expected = 1.0 - (0.3f64 / 0.2).ln() / (0.4f64 / 0.2).ln();
    assert!((s.bound.exact - expected).abs() < 1e-15);
    assert!((s.bound.pipeline - expected).abs() < 1e-12);

    let out = carnot(&["scully", "--pa", "0.3", "--pb", "0.35", "--rho-bc", "0.06", "--omega", "1"]);
    assert_eq!(out.code, 3);

    let out = carnot(&["--json", "coherent-pair", "--sigma", "0.5", "--temperature", "1", "--hot-gap", "0.05", "--pairs", "3"]);
    assert_eq!(out.code, 0);
    let Payload::CoherentPair(c) = parse(&out).payload else { panic!() };
    assert_eq!(c.bound.unwrap().eta_max, Some(1.0));
    let gap = std::f64::consts::LN_2 + 0.75 * 0.75f64.ln() + 0.25 * 0.25f64.ln();
    assert!((c.max_extractable_work.unwrap() - 3.0 * gap).abs() < 1e-14);
    assert_eq!(carnot(&["coherent-pair", "--sigma", "1.5"]).code, 2);
}

#[test]
fn reports_are_deterministic_and_reparse() {
    let dir = TempDir::new().unwrap();
    let hot = write(&dir, "h.json", r#"{"label":"h","energies":[0,1,2.5],"diag":[0.5,0.3,0.2]}"#);
    let cold = write(&dir, "c.json", r#"{"label":"c","energies":[0,0.4,1.2],"diag":[0.7,0.2,0.1]}"#);
    let args = ["--json", "verify", p(&hot), p(&cold), "--trials", "3000", "--seed", "11"];
    let a = carnot(&args);
    let b = carnot(&args);
    assert_eq!(a.stdout, b.stdout);
    let report = parse(&a);
    assert_eq!(report.to_json(), a.stdout);
}

#[test]
fn binary_exit_codes() {
    let dir = TempDir::new().unwrap();
    let hot = thermal_file(&dir, "h.json", &[0.0, 1.0], 2.0);
    let cold = thermal_file(&dir, "c.json", &[0.0, 1.0], 1.0);
    let inverted = write(&dir, "inv.json", r#"{"label":"inv","energies":[0,1],"diag":[0.3,0.7]}"#);
    let exe = env!("CARGO_BIN_EXE_carnot");
    let status = |args: &[&str]| Command::new(exe).args(args).output().unwrap();
    let ok = status(&["bound", p(&hot), p(&cold)]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("0.5000000000"));
    assert_eq!(status(&["bound", p(&inverted), p(&cold)]).status.code(), Some(3));
    assert_eq!(status(&["bound", "missing.json", p(&cold)]).status.code(), Some(2));
    assert_eq!(status(&["--help"]).status.code(), Some(0));
}

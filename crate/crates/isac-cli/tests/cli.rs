use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use isac_cli::output::{beampattern, parse_trace, trace_csv, trace_values, SUMMARY_COLUMNS, TRACE_COLUMNS};
use isac_cli::{canonical_text, config_hash, parse_config, parse_config_str, run_cli, CliError};
use isac_sim::array_geometry::{null_steer, steering, ArraySpec};
use isac_sim::engine::run_replication;
use isac_sim::{BeamWeights, ScenarioConfig, StrategyId};

const BIN: &str = env!("CARGO_BIN_EXE_isac-sim");

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> i32 {
    run_cli(std::iter::once("isac-sim").chain(args.iter().copied()))
}

fn files(dir: &Path) -> BTreeMap<String, String> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap())
        })
        .collect()
}

fn without_clock(manifest: &str) -> String {
    manifest.lines().filter(|l| !l.starts_with("wall_clock_s")).collect::<Vec<_>>().join("\n")
}

#[test]
fn empty_file_gives_defaults() {
    let cfg = parse_config_str("", "empty").unwrap();
    assert_eq!(cfg, ScenarioConfig::default());
    assert_eq!(cfg.bs.antennas, 128);
    assert_eq!(cfg.hn.count, 25);
    assert_eq!(cfg.radio.carrier_hz, 28e9);
}

#[test]
fn unknown_key_is_rejected_with_its_line() {
    let err = parse_config_str("slots = 3\n[bs]\nantenas = 64\n", "x.toml").unwrap_err();
    match err {
        CliError::Parse { message, .. } => {
            assert!(message.contains("antenas"));
            assert!(message.contains("line 3"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn negative_tolerance_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.toml");
    std::fs::write(&p, "gne.tolerance = -1\n").unwrap();
    match parse_config(&p).unwrap_err() {
        CliError::Validation(v) => assert!(v.iter().any(|m| m.starts_with("gne.tolerance"))),
        other => panic!("{other:?}"),
    }
}

#[test]
fn all_violations_are_listed_together() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.toml");
    std::fs::write(&p, "slots = 0\n[gne]\ntolerance = -1\n[hn]\np_max_w = 0.0\n").unwrap();
    match parse_config(&p).unwrap_err() {
        CliError::Validation(v) => {
            for field in ["slots", "gne.tolerance", "hn.p_max_w"] {
                assert!(v.iter().any(|m| m.starts_with(field)), "{field} missing from {v:?}");
            }
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn config_round_trips_through_text() {
    let mut cfg = ScenarioConfig::default();
    cfg.seed = 12345;
    cfg.belief.k_eff = 1.7;
    cfg.leader.k_s = 0.1 + 0.2;
    cfg.eve.mobility = isac_sim::engine::Mobility::Waypoint;
    let text = canonical_text(&cfg).unwrap();
    assert_eq!(parse_config_str(&text, "rt").unwrap(), cfg);
}

#[test]
fn hash_tracks_content_only() {
    let a = ScenarioConfig::default();
    let b = parse_config_str(&canonical_text(&a).unwrap(), "b").unwrap();
    assert_eq!(config_hash(&a).unwrap(), config_hash(&b).unwrap());
    assert_eq!(config_hash(&a).unwrap().len(), 64);
    let c = ScenarioConfig { seed: 2, ..a.clone() };
    assert_ne!(config_hash(&a).unwrap(), config_hash(&c).unwrap());
}

#[test]
fn shipped_configs_parse() {
    let mut n = 0;
    for e in std::fs::read_dir(configs_dir()).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "toml") {
            parse_config(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            n += 1;
        }
    }
    assert!(n >= 6);
}

#[test]
fn one_slot_trace_has_two_lines_and_21_columns() {
    let cfg = ScenarioConfig { slots: 1, ..ScenarioConfig::default() };
    let trace = run_replication(&cfg, StrategyId::Ibeams, 1).unwrap();
    let text = trace_csv(&trace).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert_eq!(TRACE_COLUMNS.len(), 21);
    for line in text.lines() {
        assert_eq!(line.split(',').count(), 21);
    }
    assert!(trace_csv(&[]).is_err());
}

#[test]
fn trace_values_survive_a_round_trip() {
    let cfg = ScenarioConfig { slots: 12, ..ScenarioConfig::default() };
    for s in [StrategyId::Ibeams, StrategyId::StackelbergOnly] {
        let trace = run_replication(&cfg, s, 3).unwrap();
        let rows = parse_trace(&trace_csv(&trace).unwrap()).unwrap();
        assert_eq!(rows.len(), trace.len());
        for (row, r) in rows.iter().zip(&trace) {
            let want = trace_values(r);
            for (a, b) in row.iter().zip(want) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}

#[test]
fn manifest_reports_max_power_in_dbm() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("c.toml");
    std::fs::write(&cfg_path, "slots = 2\n[bs]\np_max_w = 20\n").unwrap();
    let out = dir.path().join("out");
    assert_eq!(run(&["--config", cfg_path.to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
    let m: toml::Table = std::fs::read_to_string(out.join("manifest.toml")).unwrap().parse().unwrap();
    assert_eq!(m["bs_p_max_dbm"].as_float().unwrap(), 43.01);
    assert_eq!(m["seed"].as_integer().unwrap(), 1);
    assert_eq!(m["strategies"].as_array().unwrap()[0].as_str().unwrap(), "ibeams");
    let outputs: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    for name in &outputs {
        assert!(out.join(name).exists(), "{name}");
    }
    assert!(outputs.contains(&"trace_ibeams_rep0.csv"));
}

#[test]
fn same_flags_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let args = |o: &Path| {
        vec![
            "--slots".to_string(),
            "6".into(),
            "--replications".into(),
            "2".into(),
            "--emit".into(),
            "trace,summary,beliefs,beampattern,field".into(),
            "--out".into(),
            o.to_str().unwrap().into(),
        ]
    };
    for o in [&a, &b] {
        let v = args(o);
        assert_eq!(run(&v.iter().map(String::as_str).collect::<Vec<_>>()), 0);
    }
    let (fa, fb) = (files(&a), files(&b));
    assert_eq!(fa.keys().collect::<Vec<_>>(), fb.keys().collect::<Vec<_>>());
    for (name, text) in &fa {
        if name == "manifest.toml" {
            assert_eq!(without_clock(text), without_clock(&fb[name]));
        } else {
            assert_eq!(text, &fb[name], "{name}");
        }
    }
}

#[test]
fn compare_writes_five_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp");
    assert_eq!(run(&["--compare", "--slots", "3", "--out", out.to_str().unwrap()]), 0);
    let text = std::fs::read_to_string(out.join("compare.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[0].split(',').count(), SUMMARY_COLUMNS.len());
    let names: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names, ["baseline", "fixed_an", "stackelberg_only", "stackelberg_roleswitch", "ibeams"]);
}

#[test]
fn heatmap_rows_are_normalized_and_settle_near_truth() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("hm");
    let cfg = configs_dir().join("heatmap_static.toml");
    let code = run(&["--config", cfg.to_str().unwrap(), "--slots", "60", "--emit", "beliefs", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let heat = std::fs::read_to_string(out.join("beliefs_ibeams_eve0.csv")).unwrap();
    let bearings = std::fs::read_to_string(out.join("bearings_ibeams.csv")).unwrap();
    let mut lines = heat.lines();
    let angles: Vec<f64> = lines.next().unwrap().split(',').skip(1).map(|x| x.parse().unwrap()).collect();
    assert_eq!(angles.len(), 181);
    assert_eq!((angles[0], angles[180]), (-90.0, 90.0));
    let truth: Vec<f64> = bearings.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    for (t, line) in lines.enumerate() {
        let p: Vec<f64> = line.split(',').skip(1).map(|x| x.parse().unwrap()).collect();
        assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-6);
        if t > 15 {
            let i = isac_sim::belief::argmax(&p);
            assert!((angles[i] - truth[t]).abs() <= 10.0, "slot {t}");
        }
    }
}

#[test]
fn beampattern_file_peaks_at_zero_db() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bp");
    let cfg = configs_dir().join("beampattern.toml");
    let code = run(&["--config", cfg.to_str().unwrap(), "--slots", "3", "--emit", "beampattern,field", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(out.join("beampattern_ibeams.csv")).unwrap();
    let gains: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(gains.len(), 1801);
    assert_eq!(gains.iter().copied().fold(f64::NEG_INFINITY, f64::max), 0.0);
    let field = std::fs::read_to_string(out.join("field_ibeams.csv")).unwrap();
    assert_eq!(field.lines().next(), Some("angle_deg,watts"));
    assert_eq!(field.lines().count(), 182);
}

#[test]
fn beampattern_nulls_show_in_the_file_rows() {
    let spec = ArraySpec::for_carrier(128, 28e9).unwrap();
    let w = BeamWeights::from_vec(steering(&spec, 10f64.to_radians())).unwrap();
    let w = null_steer(&w, &[(-30f64).to_radians(), 40f64.to_radians()], &spec).unwrap();
    let rows = beampattern(&w, &spec, 0.1);
    let at = |deg: f64| rows.iter().find(|r| (r.0 - deg).abs() < 1e-9).unwrap().1;
    assert!(at(-30.0) <= -25.0);
    assert!(at(40.0) <= -25.0);
    assert!(at(10.0) > -0.5);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = out.to_str().unwrap();
    assert_eq!(run(&["--slots", "1", "--out", o]), 0);
    assert_eq!(run(&["--strategy", "nope", "--out", o]), 2);
    assert_eq!(run(&["--slots", "0", "--out", o]), 2);
    assert_eq!(run(&["--config", dir.path().join("missing.toml").to_str().unwrap(), "--out", o]), 3);
    assert_eq!(run(&["--strategy", "baseline", "--emit", "field", "--out", o]), 2);
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    assert_eq!(run(&["--slots", "1", "--out", blocker.join("sub").to_str().unwrap()]), 3);
}

#[test]
fn binary_uses_the_output_directory_variable() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from_env");
    let status = Command::new(BIN)
        .args(["--slots", "1", "--strategy", "fixed_an"])
        .env("ISAC_SIM_OUT", &target)
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));
    assert!(target.join("trace_fixed_an_rep0.csv").exists());
    assert!(target.join("manifest.toml").exists());
    let bad = Command::new(BIN).args(["--slots", "-4"]).current_dir(dir.path()).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn freq_override_reaches_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f");
    assert_eq!(run(&["--slots", "1", "--freq-hz", "3.5e9", "--out", out.to_str().unwrap()]), 0);
    let cfg = parse_config(&out.join("config.toml")).unwrap();
    assert_eq!(cfg.radio.carrier_hz, 3.5e9);
}

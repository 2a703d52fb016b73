use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chr_cli::config::{parse_config_str, ConfigError, RawConfig, ScenarioConfig, Study};
use chr_cli::{convert_units, Unit};
use proptest::prelude::*;
use tempfile::TempDir;

fn chr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chr"))
        .args(args)
        .env_remove("CHR_WORKERS")
        .output()
        .expect("binary runs")
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn read_table(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_owned).collect()).collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let idx = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[idx].parse().unwrap()).collect()
}

const BASE: &str = "\
electron.beta = 0.99
electron.sigma = 1e-4
photon.omega = 1e-5
medium.n = 1.7
";

fn issues(err: ConfigError) -> Vec<(Option<usize>, Option<String>, String)> {
    err.issues().iter().map(|i| (i.line, i.key.clone(), i.message.clone())).collect()
}

#[test]
fn duplicate_and_unknown_keys_are_line_anchored() {
    let text = format!("study = spreading-time\n{BASE}medium.n = 1.5\ngrid.colour = red\n");
    let found = issues(parse_config_str(&text, None).unwrap_err());
    assert_eq!(found.len(), 2);
    assert_eq!(found[0].0, Some(6));
    assert!(found[0].2.contains("duplicate") && found[0].2.contains("line 5"));
    assert_eq!((found[1].0, found[1].1.as_deref()), (Some(7), Some("grid.colour")));
}

#[test]
fn values_are_checked_against_their_dimension() {
    let text = format!("study = spreading-time\n{BASE}window.time = 3 eV\n");
    let found = issues(parse_config_str(&text, None).unwrap_err());
    assert_eq!(found[0].1.as_deref(), Some("window.time"));
    assert!(found[0].2.contains("expected a time"));
}

#[test]
fn missing_and_conflicting_keys_are_reported() {
    let text = "study = spreading-time\nelectron.beta = 0.9\nelectron.gamma = 3\n";
    let keys: Vec<_> = issues(parse_config_str(text, None).unwrap_err())
        .into_iter()
        .filter_map(|i| i.1)
        .collect();
    for key in ["electron.gamma", "electron.sigma", "photon.omega", "medium.n"] {
        assert!(keys.iter().any(|k| k == key), "{key} missing from {keys:?}");
    }
}

#[test]
fn subluminal_singular_angle_study_is_rejected() {
    let text = "electron.beta = 0.5\nelectron.sigma = 1e-4\nphoton.omega = 1e-5\nmedium.n = 1.5\n";
    let err = parse_config_str(text, Some(Study::SingularAngles)).unwrap_err();
    assert!(matches!(err, ConfigError::Validation(_)));
    let found = issues(err);
    assert_eq!(found[0].1.as_deref(), Some("medium.n"));
    assert!(found[0].2.contains("Cherenkov threshold"));
}

#[test]
fn map_studies_need_a_grid_and_refuse_sweeps() {
    let text = format!("{BASE}window.t_out = 1e5\nsweep.variable = medium.n\nsweep.from = 1.5\nsweep.to = 1.6\nsweep.samples = 3\n");
    let keys: Vec<_> = issues(parse_config_str(&text, Some(Study::WignerMap)).unwrap_err())
        .into_iter()
        .filter_map(|i| i.1)
        .collect();
    assert!(keys.contains(&"sweep.variable".to_owned()));
    assert!(keys.contains(&"grid.samples".to_owned()));
}

#[test]
fn requested_study_must_match_the_file() {
    let text = format!("study = flash-duration\n{BASE}");
    assert!(parse_config_str(&text, Some(Study::FlashDuration)).is_ok());
    let found = issues(parse_config_str(&text, Some(Study::SpreadingTime)).unwrap_err());
    assert_eq!(found[0].0, Some(1));
}

#[test]
fn bundled_configs_round_trip_through_the_canonical_form() {
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("cfg") {
            continue;
        }
        let config = ScenarioConfig::load(&path).unwrap();
        let again = ScenarioConfig::parse_str(&config.to_canonical()).unwrap();
        assert_eq!(config, again, "{}", path.display());
    }
}

fn config_text() -> impl Strategy<Value = String> {
    (
        0.2f64..0.999,
        1e-7f64..1e-3,
        1e-8f64..1e-4,
        1.0f64..2.5,
        proptest::option::of(0.0f64..180.0),
        any::<bool>(),
        proptest::option::of((1e-6f64..1e-4, 0.5f64..1.5, 0.5f64..0.99)),
        proptest::option::of(1e3f64..1e8),
    )
        .prop_map(|(beta, sigma, omega, n, theta, taylor, triangle, t_out)| {
            let mut text = format!(
                "study = spreading-time\nelectron.beta = {beta}\nelectron.sigma = {sigma}\nphoton.omega = {omega}\nmedium.n = {n}\n"
            );
            if let Some(t) = theta {
                text += &format!("photon.theta_deg = {t}\n");
            }
            if taylor {
                text += &format!("medium.kind = taylor\nmedium.d = {}\nmedium.e = {}\n", sigma * 1e3, -omega);
            }
            if let Some((p, ratio, frac)) = triangle {
                text += &format!("triangle.p_perp = {p}\ntriangle.pp_ratio = {ratio}\ntriangle.pp_z_fraction = {frac}\n");
            }
            if let Some(t) = t_out {
                text += &format!("window.t_out = {t} t_c\nsweep.variable = window.t_out\nsweep.from = 1 fs\nsweep.to = 2 fs\nsweep.samples = 4\n");
            }
            text
        })
}

proptest! {
    #[test]
    fn canonical_form_reparses_to_the_same_config(text in config_text()) {
        let config = ScenarioConfig::parse_str(&text).unwrap();
        let canonical = config.to_canonical();
        prop_assert_eq!(ScenarioConfig::parse_str(&canonical).unwrap(), config);
        prop_assert!(RawConfig::parse(&canonical).is_ok());
    }

    #[test]
    fn unit_conversion_round_trips(value in -1e12f64..1e12, a in 0usize..12, b in 0usize..12) {
        let (from, to) = (Unit::ALL[a], Unit::ALL[b]);
        match convert_units(value, from, to) {
            Ok(there) => {
                let back = convert_units(there, to, from).unwrap();
                prop_assert!((back - value).abs() <= 1e-12 * value.abs());
            }
            Err(_) => prop_assert_ne!(from.dimension(), to.dimension()),
        }
    }
}

#[test]
fn help_and_version_exit_cleanly() {
    assert_eq!(chr(&["--help"]).status.code(), Some(0));
    assert_eq!(chr(&["--version"]).status.code(), Some(0));
    assert_eq!(chr(&["wigner-map", "--help"]).status.code(), Some(0));
}

#[test]
fn usage_and_input_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    assert_eq!(chr(&["no-such-study"]).status.code(), Some(1));
    assert_eq!(chr(&["spreading-time"]).status.code(), Some(1));
    let missing = dir.path().join("absent.cfg");
    assert_eq!(chr(&["spreading-time", "--config", missing.to_str().unwrap()]).status.code(), Some(1));
    let bad = write(dir.path(), "bad.cfg", "electron.beta = fast\n");
    let out = chr(&["spreading-time", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
    assert_eq!(chr(&["convert", "1", "fs", "nm"]).status.code(), Some(1));
}

#[test]
fn exit_code_two_marks_flagged_results() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("out");
    let clean = write(dir.path(), "clean.cfg", &format!("{BASE}photon.theta_deg = 50\n"));
    let flagged = write(dir.path(), "flagged.cfg", &format!("{BASE}photon.theta_deg = 2\n"));
    let run = |cfg: &Path| {
        chr(&["spreading-time", "--config", cfg.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()])
            .status
            .code()
    };
    assert_eq!(run(&clean), Some(0));
    assert_eq!(run(&flagged), Some(2));
}

#[test]
fn single_sample_sweep_gives_one_row_and_no_plot() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "one.cfg",
        &format!("{BASE}sweep.variable = photon.theta_deg\nsweep.from = 40\nsweep.to = 60\nsweep.samples = 1\n"),
    );
    let out = chr(&["spreading-time", "--config", cfg.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let (_, rows) = read_table(&dir.path().join("one.csv"));
    assert_eq!(rows.len(), 1);
    assert!(!dir.path().join("one.svg").exists());
}

#[test]
fn spreading_time_sweep_has_two_sign_changes_and_extremum_at_cherenkov_angle() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "td.cfg",
        &format!("{BASE}sweep.variable = photon.theta_deg\nsweep.from = 53.3\nsweep.to = 53.8\nsweep.samples = 501\n"),
    );
    let out = chr(&["spreading-time", "--config", cfg.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = read_table(&dir.path().join("td.csv"));
    for name in ["theta_k_deg", "t_d_ps", "inv_t_d"] {
        assert!(header.iter().any(|h| h == name));
    }
    let theta = column(&header, &rows, "theta_k_deg");
    let inv = column(&header, &rows, "inv_t_d");
    let t_d = column(&header, &rows, "t_d_ps");
    let changes: Vec<usize> = (1..inv.len()).filter(|&i| inv[i].signum() != inv[i - 1].signum()).collect();
    assert_eq!(changes.len(), 2);
    let between = changes[0]..changes[1];
    let peak = between.clone().max_by(|&a, &b| t_d[a].total_cmp(&t_d[b])).unwrap();
    let cherenkov = (1.0f64 / (0.99 * 1.7)).acos().to_degrees();
    assert!((theta[peak] - cherenkov).abs() <= 0.0015, "{} vs {cherenkov}", theta[peak]);
}

#[test]
fn index_sweep_starts_at_the_cherenkov_threshold() {
    let dir = TempDir::new().unwrap();
    let cfg = configs_dir().join("arrival_shift_index.cfg");
    let out = chr(&["arrival-shift", "--config", cfg.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert!(matches!(out.status.code(), Some(0 | 2)));
    let (header, rows) = read_table(&dir.path().join("arrival_shift_index.csv"));
    let n = column(&header, &rows, "medium.n");
    assert!(n[0] >= 1.0 / 0.7 && n[0] < 1.0 / 0.7 + 0.005, "{}", n[0]);
    assert!(column(&header, &rows, "delta_t_tc").iter().all(|v| v.is_finite()));
}

#[test]
fn map_output_is_byte_identical_across_worker_counts() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "map.cfg",
        "electron.beta = 0.99\nelectron.sigma = 1e-5\nphoton.omega = 1e-5\nphoton.phi_deg = 90\nmedium.n = 1.4\nwindow.t_out = 1e5\ngrid.samples = 12\n",
    );
    let render = |workers: &str| {
        let out_dir = dir.path().join(format!("w{workers}"));
        let out = chr(&[
            "wigner-map",
            "--config",
            cfg.to_str().unwrap(),
            "--out-dir",
            out_dir.to_str().unwrap(),
            "--workers",
            workers,
        ]);
        assert!(matches!(out.status.code(), Some(0 | 2)));
        (fs::read(out_dir.join("map.csv")).unwrap(), fs::read(out_dir.join("map.svg")).unwrap())
    };
    let reference = render("1");
    for workers in ["2", "5"] {
        assert!(render(workers) == reference, "workers = {workers}");
    }
}

#[test]
fn check_prints_a_reparsable_canonical_form() {
    let cfg = configs_dir().join("spreading_time_silica.cfg");
    let out = chr(&["check", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let canonical = String::from_utf8(out.stdout).unwrap();
    let reparsed = ScenarioConfig::parse_str(&canonical).unwrap();
    assert_eq!(reparsed, ScenarioConfig::load(&cfg).unwrap());
}

#[test]
fn convert_prints_the_converted_value() {
    let out = chr(&["convert", "1e6", "t_c", "fs"]);
    assert_eq!(out.status.code(), Some(0));
    let value: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!((value - 1.2880886).abs() < 1e-6, "{value}");
}

#[test]
fn every_bundled_config_runs_to_completion() {
    let dir = TempDir::new().unwrap();
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("cfg") {
            continue;
        }
        let study = ScenarioConfig::load(&path).unwrap().study;
        let out = chr(&[
            study.name(),
            "--config",
            path.to_str().unwrap(),
            "--out-dir",
            dir.path().to_str().unwrap(),
            "--workers",
            "4",
        ]);
        assert!(
            matches!(out.status.code(), Some(0 | 2)),
            "{}: {}",
            path.display(),
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

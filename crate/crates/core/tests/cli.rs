//! End-to-end runs of the `riskkit` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn config(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("examples/configs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn riskkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riskkit"))
        .args(args)
        .env("RISKKIT_LOG", "warn")
        .output()
        .unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

#[test]
fn xl_summary_reports_the_premium() {
    let out = riskkit(&["cost", "--config", &config("xl_fft.json")]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert!(stdout.contains("Costing Summary: Layer 1"));
    assert!(stdout.contains("Pure premium            3.51"), "{stdout}");
}

#[test]
fn csv_and_json_formats() {
    let csv = riskkit(&["cost", "--config", &config("xl_fft.json"), "--format", "csv"]);
    assert!(csv.status.success());
    let body = text(&csv.stdout);
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    let col = headers.iter().position(|h| h == "pure_premium_dist").unwrap();
    let row = rdr.records().next().unwrap().unwrap();
    let p: f64 = row[col].parse().unwrap();
    assert!((p - 3.509346).abs() < 1e-5);

    let json = riskkit(&["cost", "--config", &config("xl_fft.json"), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert!(v.is_object());
}

#[test]
fn missing_method_prints_pipe_delimited_warnings() {
    let out = riskkit(&["cost", "--config", &config("multi_layer_no_method.json")]);
    assert!(out.status.success());
    let stderr = text(&out.stderr);
    let warnings: Vec<&str> = stderr.lines().filter(|l| l.starts_with("WARNING|lossmodel|")).collect();
    assert_eq!(warnings.len(), 3, "{stderr}");
    assert!(warnings.iter().any(|l| l.contains("Layer 2: costing is omitted")));
}

#[test]
fn unknown_parameter_fails_with_a_json_error() {
    let out = riskkit(&["cost", "--config", &config("invalid/unknown_parameter.json")]);
    assert_eq!(out.status.code(), Some(1));
    let line = text(&out.stderr);
    let v: serde_json::Value = serde_json::from_str(line.lines().last().unwrap()).unwrap();
    assert!(v["error"]["message"].as_str().unwrap().contains("mean"), "{line}");
    assert!(out.stdout.is_empty());
}

#[test]
fn invalid_configs_are_rejected_by_validate() {
    for name in [
        "unknown_parameter.json",
        "reinstatements_infinite_cover.json",
        "aep_dimension_six.json",
    ] {
        let out = riskkit(&["validate", "--config", &config(&format!("invalid/{name}"))]);
        assert_eq!(out.status.code(), Some(1), "{name}");
        assert!(text(&out.stderr).contains("\"error\""), "{name}");
    }
}

#[test]
fn validate_accepts_every_example_config() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let out = riskkit(&["validate", "--config", path.to_str().unwrap()]);
            assert!(out.status.success(), "{}: {}", path.display(), text(&out.stderr));
            assert!(text(&out.stdout).starts_with("configuration OK: "));
            n += 1;
        }
    }
    assert!(n >= 10);
}

#[test]
fn subcommand_must_match_the_configuration() {
    let out = riskkit(&["reserve", "--config", &config("xl_fft.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("not `reserve`"), "{}", text(&out.stderr));
}

#[test]
fn out_directory_receives_all_artifacts() {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-discretize");
    let _ = std::fs::remove_dir_all(&dir);
    let out = riskkit(&[
        "discretize",
        "--config",
        &config("discretize_gamma.json"),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    for f in ["summary.txt", "results.csv", "results.json", "plot_data.csv"] {
        assert!(dir.join(f).is_file(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.join("results.csv")).unwrap();
    assert!(csv.starts_with("x,fj\n"));
    let total: f64 = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn seed_flag_changes_simulations_reproducibly() {
    let run = |seed: &str| {
        text(
            &riskkit(&[
                "reserve",
                "--config",
                &config("reserve_crm.json"),
                "--format",
                "csv",
                "--seed",
                seed,
            ])
            .stdout,
        )
    };
    let (a, b, c) = (run("1"), run("1"), run("2"));
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn reserve_run_reports_totals() {
    let out = riskkit(&["reserve", "--config", &config("reserve_fisher_lange.json")]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let s = text(&out.stdout);
    assert!(s.contains("Loss Reserve Summary") && s.contains("Total"));
}

#[test]
fn aggregate_aep_matches_the_reference_probability() {
    let out = riskkit(&["aggregate", "--config", &config("aep_frank.json"), "--format", "csv"]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let body = text(&out.stdout);
    let line = body
        .lines()
        .find(|l| l.starts_with("cdf,300"))
        .unwrap_or_else(|| panic!("{body}"));
    let p: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
    assert!((p - 0.98116).abs() < 1e-5, "{p}");
}

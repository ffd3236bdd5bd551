use std::path::Path;
use std::process::{Command, Output};

use relay_scaling::output::{manifest_path, parse_csv, svg_region_vertices};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_relay-scaling"));
    c.env_remove("RELAY_SCALING_OUT_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Value column of the first row whose first two columns match.
fn lookup(text: &str, quantity: &str, label: Option<&str>) -> f64 {
    let (_, _, rows) = parse_csv(text).unwrap();
    let row = rows
        .iter()
        .find(|r| r[0] == quantity && label.is_none_or(|l| r[1] == l))
        .unwrap_or_else(|| panic!("no row {quantity}"));
    row.last().unwrap().parse().unwrap()
}

#[test]
fn bounds_case_a_example() {
    let o = run(&["bounds", "--case", "a", "--px", "15", "--pj", "15", "--c2", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!((lookup(&text, "cutset", None) - 1.4770981551934377).abs() < 1e-12);
    assert!((lookup(&text, "achievable", Some("case-a")) - 0.9125371587496606).abs() < 1e-12);
}

#[test]
fn bounds_case_c_reports_modulo_bound() {
    let o = run(&["bounds", "--case", "c", "--px", "1.5e1", "--pj", "15", "--c1", "1", "--c2", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!((lookup(&stdout(&o), "modulo", None) - 2.7735477925903202).abs() < 1e-12);
}

#[test]
fn bounds_json_embeds_manifest() {
    let o = run(&["bounds", "--case", "b", "--px", "15", "--pj", "15", "--c1", "2", "--c2", "1", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["manifest"]["command"], "bounds");
    assert!((doc["result"]["best"]["rate"].as_f64().unwrap() - 0.7595712474486127).abs() < 1e-12);
}

#[test]
fn invalid_parameters_exit_two() {
    assert_eq!(run(&["bounds", "--case", "a", "--px", "-1", "--pj", "15", "--c2", "1"]).status.code(), Some(2));
    assert_eq!(run(&["bounds", "--case", "a", "--px", "15", "--pj", "15", "--c1", "1", "--c2", "1"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--case", "b", "--px", "15", "--pj", "15", "--c1", "0", "--c2", "1", "--seed", "1"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--case", "b", "--px", "1e8", "--pj", "1e4", "--sum", "0:1:0"]).status.code(), Some(2));
}

#[test]
fn empty_sweep_is_header_only() {
    let o = run(&["sweep", "--case", "b", "--px", "1e8", "--pj", "1e4", "--sum", "5:1"]);
    assert_eq!(o.status.code(), Some(0));
    let (schema, header, rows) = parse_csv(&stdout(&o)).unwrap();
    assert_eq!(schema, "sweep/v1");
    assert_eq!(header[0], "sum_capacity");
    assert!(rows.is_empty());
}

#[test]
fn region_zero_rate_is_quadrant() {
    let o = run(&["region", "--rate", "0", "--px", "10", "--pj", "3"]);
    let (_, _, rows) = parse_csv(&stdout(&o)).unwrap();
    let vertices: Vec<_> = rows.iter().filter(|r| r[0] == "vertex").collect();
    assert_eq!(vertices.len(), 1);
    assert_eq!((vertices[0][2].as_str(), vertices[0][3].as_str()), ("0", "0"));
}

#[test]
fn region_svg_matches_csv() {
    let args = ["region", "--rate", "15", "--px", "1073741824", "--pj", "1073741824"];
    let csv = stdout(&run(&args));
    let (_, _, rows) = parse_csv(&csv).unwrap();
    let from_csv: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r[0] == "vertex")
        .map(|r| (r[2].parse().unwrap(), r[3].parse().unwrap()))
        .collect();
    assert_eq!(from_csv, vec![(14.5, 15.0), (15.0, 14.5)]);
    let mut svg_args = args.to_vec();
    svg_args.extend(["--format", "svg"]);
    let svg = stdout(&run(&svg_args));
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg_region_vertices(&svg).unwrap(), from_csv);
}

#[test]
fn gaps_exit_codes() {
    let ok = run(&["gaps", "--case", "b", "--grid", "default"]);
    assert_eq!(ok.status.code(), Some(0));
    let (_, header, rows) = parse_csv(&stdout(&ok)).unwrap();
    let max_gap: f64 = rows[0][header.iter().position(|h| h == "max_gap").unwrap()].parse().unwrap();
    assert!(max_gap <= 1.29);
    assert_eq!(run(&["gaps", "--case", "b", "--bound", "0.5"]).status.code(), Some(3));
}

#[test]
fn scaling_case_a() {
    let o = run(&["scaling", "--case", "a", "--coupling", "pj=px", "--exponents", "10:40"]);
    assert!((lookup(&stdout(&o), "prelog", None) - 0.5).abs() <= 0.02);
}

#[test]
fn simulate_case_b_variance() {
    let o = run(&["simulate", "--case", "b", "--px", "15", "--pj", "15", "--c1", "2", "--c2", "1", "--samples", "1e6", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let (_, _, rows) = parse_csv(&stdout(&o)).unwrap();
    let ratio: f64 = rows.iter().find(|r| r[0] == "var_ratio").unwrap()[1].parse().unwrap();
    assert!((0.98..=1.02).contains(&ratio), "{ratio}");
}

#[test]
fn simulate_without_seed_records_one() {
    let o = run(&["simulate", "--px", "15", "--pj", "15", "--samples", "1000", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(doc["manifest"]["seed"].is_u64());
    assert_eq!(doc["manifest"]["seed"], doc["result"]["stats"]["seed"]);
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

#[test]
fn files_are_reproducible_and_carry_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&a, &b] {
        let o = run(&["cover", "--trials", "64", "--seed", "3", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(read(&a), read(&b));
    let manifest: serde_json::Value = serde_json::from_slice(&read(&manifest_path(&a))).unwrap();
    assert_eq!(manifest["command"], "cover");
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["outputs"][0], a.to_str().unwrap());
}

#[test]
fn env_var_sets_default_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .env("RELAY_SCALING_OUT_DIR", dir.path())
        .args(["region", "--rate", "1", "--px", "100", "--pj", "10", "--format", "svg"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert!(dir.path().join("region.svg").exists());
    assert!(dir.path().join("region.svg.manifest.json").exists());
}

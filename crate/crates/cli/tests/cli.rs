#![allow(clippy::excessive_precision)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn rach(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rach")).args(args).output().expect("binary runs")
}

fn report(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.push("--json");
    let out = rach(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn analyze_proportional_pair() {
    let r = report(&["analyze", scenario("dc1_dc2.toml").to_str().unwrap()]);
    assert_eq!(r["command"], "analyze");
    assert_eq!(r["scenario_sha256"].as_str().unwrap().len(), 64);
    let classes = r["results"]["classes"].as_array().unwrap();
    assert_eq!(classes[0]["raos"], 3600);
    assert_eq!(classes[1]["raos"], 7200);
    assert!((f(&r["results"]["cell"]["total_collision_density"]) - 2.06893248841256733).abs() < 1e-12);
    assert!((f(&r["results"]["cell"]["collision_probability"]) - 0.875485528555877013).abs() < 1e-12);
}

#[test]
fn analyze_full_sharing_gives_one_rate() {
    let r = report(&["analyze", scenario("dc1_dc2_shared.toml").to_str().unwrap()]);
    for c in r["results"]["classes"].as_array().unwrap() {
        assert!((f(&c["collision_rate"]) - 0.0137928832560837821).abs() < 1e-15);
        assert_eq!(c["raos"], 10_800);
    }
}

#[test]
fn analyze_with_explicit_plan_and_partial_layout() {
    let path = scenario("dc1_dc3.toml");
    let r = report(&["analyze", path.to_str().unwrap(), "--plan", "1=982,3=9818"]);
    assert!((f(&r["results"]["cell"]["total_collision_density"]) - 27.3080148052368919).abs() < 1e-9);
    assert_eq!(r["results"]["layout_source"], "command line");

    let r = report(&["analyze", scenario("partial_overlap.toml").to_str().unwrap()]);
    let classes = r["results"]["classes"].as_array().unwrap();
    assert!((f(&classes[0]["collision_rate"]) - 0.0152948738198961747).abs() < 1e-14);
    assert!((f(&classes[1]["collision_rate"]) - 0.0153042636168832498).abs() < 1e-14);
}

#[test]
fn text_output_names_the_fingerprint() {
    let out = rach(&["analyze", scenario("dc1_dc2.toml").to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    let sha = report(&["analyze", scenario("dc1_dc2.toml").to_str().unwrap()])["scenario_sha256"].clone();
    assert!(text.contains(sha.as_str().unwrap()));
    assert!(text.contains("2.068932488"));
}

#[test]
fn malformed_files_exit_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let syntax = write(&dir, "syntax.toml", "total_raos = 10\nstrategy = \"full_sharing\"\n[[classes]\nid = 1\n");
    let out = rach(&["analyze", syntax.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("syntax.toml") && err.contains("line 3"), "{err}");

    let invalid = write(
        &dir,
        "invalid.toml",
        "total_raos = 10\nstrategy = \"full_sharing\"\n\n[[classes]]\nid = 7\nra_density = 0.0\nbackoff_s = 1.0\n",
    );
    let out = rach(&["analyze", invalid.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("invalid.toml:5:"), "{err}");

    let unknown = write(&dir, "unknown.toml", "total_raos = 10\nstrategy = \"full_sharing\"\ncolour = 1\n");
    assert_eq!(rach(&["analyze", unknown.to_str().unwrap()]).status.code(), Some(3));

    let missing = dir.path().join("absent.toml");
    assert_eq!(rach(&["analyze", missing.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(rach(&["analyze"]).status.code(), Some(2));
    assert_eq!(rach(&["frobnicate"]).status.code(), Some(2));
    let path = scenario("dc1_dc2.toml");
    assert_eq!(rach(&["sweep", path.to_str().unwrap(), "--range", "10"]).status.code(), Some(2));
}

#[test]
fn optimize_methods() {
    let r = report(&["optimize", scenario("dc1_dc2_dc3_qos.toml").to_str().unwrap()]);
    assert_eq!(r["parameters"]["method"], "reserve-and-divide");
    assert_eq!(r["results"]["residual"], 8325);
    assert_eq!(r["results"]["plan"]["raos"]["1"], 2475);
    assert_eq!(r["results"]["plan"]["raos"]["2"], 1388);
    assert_eq!(r["results"]["plan"]["raos"]["3"], 6937);
    assert!(f(&r["results"]["classes"][0]["collision_rate"]) <= 0.02);

    for (file, l1) in [("dc1_dc2.toml", 3600), ("dc1_dc3.toml", 982), ("dc1_dc4.toml", 514)] {
        let r = report(&["optimize", scenario(file).to_str().unwrap()]);
        assert_eq!(r["parameters"]["method"], "proportional");
        assert_eq!(r["results"]["plan"]["raos"]["1"], l1, "{file}");
    }

    let dir = tempfile::tempdir().unwrap();
    let small = write(
        &dir,
        "small.toml",
        "total_raos = 30\nstrategy = \"full_dedication\"\n[[classes]]\nid = 1\nra_density = 5.0\nbackoff_s = 1.0\n[[classes]]\nid = 2\nra_density = 10.0\nbackoff_s = 1.0\n",
    );
    let r = report(&["optimize", small.to_str().unwrap(), "--method", "brute-force"]);
    assert_eq!(r["results"]["plan"]["raos"]["1"], 10);
}

#[test]
fn infeasible_qos_is_an_overload() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        &dir,
        "overload.toml",
        "total_raos = 10800\nstrategy = \"full_dedication\"\n\n[[classes]]\nid = 4\nra_density = 1000.0\nbackoff_s = 1.0\nspecial = true\nqos = { max_collision_rate = 0.02 }\n\n[[classes]]\nid = 1\nra_density = 50.0\nbackoff_s = 1.0\n",
    );
    let path = path.to_str().unwrap();
    for args in [&["optimize", path][..], &["analyze", path], &["simulate", path, "--iterations", "1", "--seed", "1"]] {
        let out = rach(args);
        assert_eq!(out.status.code(), Some(4), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("RACH resource overload"));
    }
}

fn parse_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn fixed(v: &Value) -> String {
    format!("{:.9}", f(v))
}

#[test]
fn simulate_csv_matches_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("out.csv");
    let r = report(&[
        "simulate",
        scenario("dc1_dc2.toml").to_str().unwrap(),
        "--iterations",
        "40",
        "--seed",
        "17",
        "--horizon",
        "3",
        "--delay",
        "--csv",
        csv_path.to_str().unwrap(),
    ]);
    let (header, rows) = parse_csv(&csv_path);
    assert_eq!(
        &header[..8],
        ["class_id", "L_i", "gamma", "p_analytic", "p_empirical", "density_hz", "stderr", "delay_s"]
    );
    assert_eq!(rows.len(), 3);
    let stats = &r["results"]["stats"];
    for (i, row) in rows[..2].iter().enumerate() {
        let (an, sim) = (&r["results"]["analytic"][i], &stats["per_class"][i]);
        assert_eq!(row[0], sim["class_id"].to_string());
        assert_eq!(row[1], r["results"]["raos"][i].to_string());
        assert_eq!(row[2], fixed(&an["ra_density"]));
        assert_eq!(row[3], fixed(&an["collision_rate"]));
        assert_eq!(row[4], fixed(&sim["collision_rate"]["mean"]));
        assert_eq!(row[5], fixed(&sim["collision_density"]["mean"]));
        assert_eq!(row[6], fixed(&sim["collision_density"]["std_error"]));
        assert_eq!(row[7], fixed(&sim["delay"]["inclusive"]["mean"]));
        // the text parses back to the reported value at nine decimals
        let back: f64 = row[5].parse().unwrap();
        assert!((back - f(&sim["collision_density"]["mean"])).abs() <= 0.5e-9);
    }
    let cell = &rows[2];
    assert_eq!(cell[0], "cell");
    assert_eq!(cell[5], fixed(&stats["cell"]["collision_density"]["mean"]));
    assert_eq!(cell[9], fixed(&r["results"]["analytic_cell"]["total_collision_density"]));
}

#[test]
fn seeds_are_recorded_and_reproducible() {
    let path = scenario("dc1_dc2.toml");
    let args = ["simulate", path.to_str().unwrap(), "--iterations", "10"];
    let first = report(&args);
    assert_eq!(first["parameters"]["seed_generated"], true);
    let seed = first["parameters"]["seed"].as_u64().unwrap().to_string();

    let mut seeded = args.to_vec();
    seeded.extend(["--seed", &seed]);
    let again = report(&seeded);
    assert_eq!(again["parameters"]["seed_generated"], false);
    assert_eq!(first["results"], again["results"]);

    seeded.extend(["--workers", "1"]);
    assert_eq!(report(&seeded)["results"], first["results"]);
}

#[test]
fn simulate_delay_needs_dedication() {
    let path = scenario("dc1_dc2_shared.toml");
    let out = rach(&["simulate", path.to_str().unwrap(), "--iterations", "1", "--seed", "1", "--delay"]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn compare_strategies() {
    let path = scenario("dc1_dc2.toml");
    let r = report(&["compare", path.to_str().unwrap(), "--strategies", "proportional", "--iterations", "10", "--seed", "2"]);
    let results = r["results"].as_array().unwrap();
    assert_eq!(results.len(), 1);
    assert_eq!(results[0]["strategy"], "proportional");
    assert_eq!(results[0]["raos"][0], 3600);

    let r = report(&["compare", path.to_str().unwrap(), "--iterations", "10", "--seed", "2"]);
    assert_eq!(r["results"].as_array().unwrap().len(), 2);

    let out = rach(&["compare", path.to_str().unwrap(), "--strategies", "reserve-and-divide", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(3));

    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("cmp.csv");
    let qos = scenario("dc1_dc2_dc3_qos.toml");
    let r = report(&["compare", qos.to_str().unwrap(), "--iterations", "5", "--seed", "4", "--csv", csv_path.to_str().unwrap()]);
    assert_eq!(r["results"].as_array().unwrap().len(), 3);
    let (header, rows) = parse_csv(&csv_path);
    assert_eq!(header[0], "strategy");
    assert_eq!(rows.len(), 3 * 4);
    assert_eq!(rows[8][0], "reserve-and-divide");
    assert_eq!(rows[8][2], "2475");
}

#[test]
fn sweep_writes_one_row_per_split() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("sweep.csv");
    let path = scenario("dc1_dc2.toml");
    let r = report(&[
        "sweep",
        path.to_str().unwrap(),
        "--range",
        "600:10200",
        "--step",
        "1200",
        "--iterations",
        "5",
        "--seed",
        "9",
        "--csv",
        csv_path.to_str().unwrap(),
    ]);
    let (header, rows) = parse_csv(&csv_path);
    assert_eq!(header[0], "L_swept");
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[0][0], "600");
    assert_eq!(rows[0][1], "10200");
    assert_eq!(r["results"]["analytic_argmin"], 4200);
    assert_eq!(rows[2][10], fixed(&r["results"]["rows"][2]["analytic_total"]));

    let out = rach(&["sweep", path.to_str().unwrap(), "--range", "0:100", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(3));
    let out = rach(&["sweep", path.to_str().unwrap(), "--range", "100:200", "--class", "9"]);
    assert_eq!(out.status.code(), Some(3));
}

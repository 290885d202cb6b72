//! End-to-end runs of the `uavcov` binary.

use std::path::Path;
use std::process::{Command, Output};

fn uavcov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uavcov"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Data rows of a CSV table as `column -> value` lookups.
struct Csv {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn parse(text: &str) -> Self {
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        let columns = lines.next().unwrap().split(',').map(str::to_string).collect();
        let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
        Self { columns, rows }
    }

    fn column(&self, name: &str) -> Vec<f64> {
        let i = self.columns.iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r[i].parse().unwrap()).collect()
    }
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn epsilon_sweep_in_both_modes() {
    let out = uavcov(&["coverage", "--sweep", "epsilon_db:-10:10:21", "--mode", "both", "--drops", "2000", "--seed", "5"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("# sweep = epsilon_db:-10:10:21"));
    assert!(text.contains("# delta = 0.2"));
    let csv = Csv::parse(&text);
    assert_eq!(
        csv.columns,
        ["epsilon_db", "pc1", "pc2", "pc3", "total", "estimate", "ci_halfwidth", "scheme", "seed"]
    );
    assert_eq!(csv.rows.len(), 21);
    let total = csv.column("total");
    let estimate = csv.column("estimate");
    let hw = csv.column("ci_halfwidth");
    for i in 0..21 {
        assert!((total[i] - estimate[i]).abs() <= 0.03 + hw[i], "row {i}");
    }
    assert!(total.windows(2).all(|w| w[1] <= w[0]));
    assert!(estimate.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn coverage_at_the_centre_falls_with_altitude() {
    let out = uavcov(&["coverage", "--r0", "0", "--sweep", "H:0:1000:11"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let total = Csv::parse(&stdout(&out)).column("total");
    assert_eq!(total.len(), 11);
    assert!(total.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn benchmark_schemes_fill_their_own_column() {
    let uav = Csv::parse(&stdout(&uavcov(&["coverage", "--scheme", "uav-only", "--r0", "300"])));
    assert_eq!(uav.column("pc3"), uav.column("total"));
    assert_eq!(uav.column("pc1"), [0.0]);
    let ground = Csv::parse(&stdout(&uavcov(&["coverage", "--scheme", "ground-only", "--r0", "300"])));
    assert_eq!(ground.column("pc1"), ground.column("total"));
    assert_eq!(ground.rows[0][7], "ground-only");
}

#[test]
fn area_fractions_follow_delta_and_altitude() {
    let out = uavcov(&["area-fractions", "--sweep", "delta:0.05:0.95:10"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = Csv::parse(&stdout(&out));
    assert_eq!(csv.rows.len(), 10);
    assert!(csv.column("f2").windows(2).all(|w| w[1] <= w[0]));

    let out = uavcov(&["area-fractions", "--sweep", "H:0:1000:21"]);
    let f3 = Csv::parse(&stdout(&out)).column("f3");
    let peak = f3.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert!(peak > 0 && peak < f3.len() - 1, "f3 peaks at index {peak}: {f3:?}");
    assert!(f3[..=peak].windows(2).all(|w| w[1] >= w[0]));
    assert!(f3[peak..].windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn area_fractions_reject_position_sweeps() {
    let out = uavcov(&["area-fractions", "--sweep", "r0:0:500:3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn nse_ordering_and_convergence_in_radius() {
    let dir = tempfile::tempdir().unwrap();
    let low = uavcov(&["nse", "--sweep", "R_c:100:1000:4"]);
    assert!(low.status.success(), "{}", stderr(&low));
    let low = Csv::parse(&stdout(&low));
    assert_eq!(low.rows.len(), 4);
    let proposed = low.column("nse_proposed");
    for (i, p) in proposed.iter().enumerate() {
        assert!(*p >= low.column("nse_uav_only")[i]);
        assert!(*p >= low.column("nse_ground_only")[i]);
    }

    let config = write_config(dir.path(), "high.toml", "delta = 0.8\n");
    let high = Csv::parse(&stdout(&uavcov(&["nse", "--config", &config, "--sweep", "R_c:100:1000:2"])));
    assert_eq!(high.rows.len(), 2);
    let other = high.column("nse_proposed");
    let near = (proposed[0] - other[0]).abs();
    let far = (proposed[3] - other[1]).abs();
    assert!(far < 0.005 && far < near, "gap {near} at 100 m, {far} at 1000 m");
}

#[test]
fn json_output_mirrors_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("af.json");
    let out = uavcov(&["area-fractions", "--json", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["command"], "area-fractions");
    assert_eq!(doc["params"]["delta"], 0.2);
    let row = &doc["rows"][0];
    let sum: f64 = ["f1", "f2", "f3"].iter().map(|k| row[k].as_f64().unwrap()).sum();
    assert!((sum - 1.0).abs() < 1e-9);
    assert!(row["sim_f1"].is_null());
}

#[test]
fn outputs_are_deterministic() {
    let args = ["coverage", "--mode", "simulate", "--drops", "300", "--seed", "9", "--r0", "350"];
    assert_eq!(uavcov(&args).stdout, uavcov(&args).stdout);
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad_key = write_config(dir.path(), "bad.toml", "uav_heigth = 200.0\n");
    let out = uavcov(&["coverage", "--config", &bad_key]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("uav_heigth"));

    let bad_value = write_config(dir.path(), "neg.toml", "bs_density = -1.0\n");
    let out = uavcov(&["area-fractions", "--config", &bad_value]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bs_density"));

    let garbage = write_config(dir.path(), "junk.toml", "this is [not toml\n");
    assert_eq!(uavcov(&["validate", "--config", &garbage]).status.code(), Some(2));

    assert_eq!(uavcov(&["coverage", "--sweep", "H:5:1:3"]).status.code(), Some(2));
    assert_eq!(uavcov(&["coverage", "--r0", "600"]).status.code(), Some(2));
    assert_eq!(uavcov(&["coverage", "--scheme", "satellite"]).status.code(), Some(2));
    assert_eq!(uavcov(&["coverage", "--config", "/nonexistent/uavcov.toml"]).status.code(), Some(2));

    let out = uavcov(&["coverage", "--sweep", "delta:0:2:3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("delta = 2"), "{}", stderr(&out));
}

#[test]
fn validation_gate_rejects_a_tolerance_below_the_noise() {
    let out = uavcov(&["validate", "--drops", "500", "--tolerance", "1e-6"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("failed checks"));
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn validation_gate_passes_at_default_parameters() {
    let out = uavcov(&["validate", "--tolerance", "0.02", "--drops", "20000", "--seed", "3"]);
    let text = stdout(&out);
    println!("{text}");
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = Csv::parse(&text);
    assert_eq!(csv.rows.len(), 5 + 3 + 4 + 4);
    assert!(csv.rows.iter().all(|r| r[5] == "pass"));
}

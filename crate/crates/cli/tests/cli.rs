use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lchi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lchi"))
        .args(args)
        .output()
        .expect("lchi runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn schema_validator() -> jsonschema::Validator {
    let text = include_str!("../schema/report.schema.json");
    jsonschema::validator_for(&serde_json::from_str(text).unwrap()).unwrap()
}

/// CSV rows after the `#` preamble, header first.
fn csv_records(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn gauss_sum_of_the_character_mod_4() {
    let o = lchi(&["gauss", "--q", "4", "--chi", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let tau = v["tau"].as_array().unwrap();
    assert!(tau[0].as_f64().unwrap().abs() < 1e-12);
    assert!((tau[1].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(v["lchi_version"], env!("CARGO_PKG_VERSION"));
    assert!(v["config"].as_str().unwrap().contains("q=4\n"));
}

#[test]
fn imprimitive_gauss_has_no_root_number() {
    let o = lchi(&["gauss", "--q", "8", "--chi", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["primitive"], false);
    assert!(v["epsilon"].is_null());
}

#[test]
fn malformed_xi_is_a_usage_error() {
    let o = lchi(&["sums", "--q", "4", "--chi", "1", "--xi", "1/0", "--T", "50"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("malformed xi"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["gauss", "--q", "4", "--chi", "7"][..],
        &["zeros", "--q", "4", "--chi", "1", "--T", "5000"],
        &["sums", "--q", "4", "--chi", "1", "--xi", "1/3", "--smooth"],
        &["verify", "nonsense"],
        &["gauss", "--q", "4", "--chi", "1", "--X", "3"],
        &["frobnicate"],
    ] {
        let o = lchi(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
    }
    let o = lchi(&["sums", "--q", "4", "--chi", "1", "--xi", "1/3", "--smooth"]);
    assert!(stderr(&o).contains("--smooth requires --X"));
    assert_eq!(lchi(&["--help"]).status.code(), Some(0));
}

#[test]
fn thm31_report_has_slopes_and_validates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = lchi(&[
        "verify", "thm31", "--q", "4", "--chi", "1", "--xi", "1/1", "--Tmin", "32", "--Tmax", "300", "--points", "12",
        "--out", out.to_str().unwrap(),
    ]);
    let report = read_json(&out);
    assert_eq!(report["experiment"], "thm31");
    assert!(report["fits"]["slope"].is_f64());
    assert!(report["fits"]["slope_sigma2"].is_f64());
    let all_pass = report["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true);
    assert_eq!(o.status.code(), Some(if all_pass { 0 } else { 2 }), "{}", stderr(&o));
    assert_eq!(report["rows"].as_array().unwrap().len(), 12);
    let v = schema_validator();
    assert!(v.is_valid(&report), "{:?}", v.iter_errors(&report).map(|e| e.to_string()).collect::<Vec<_>>());
}

#[test]
fn failed_check_exits_two() {
    // Demanding k far below any realistic ratio forces the bound check to fail.
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = lchi(&[
        "verify", "lemma22", "--a", "50", "--b", "90", "--c", "0.75", "--u", "70", "--k", "1e-9", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let report = read_json(&out);
    assert!(report["checks"].as_array().unwrap().iter().any(|c| c["pass"] == false));
    assert!(schema_validator().is_valid(&report));
}

#[test]
fn every_experiment_report_validates() {
    let dir = tempfile::tempdir().unwrap();
    let v = schema_validator();
    for args in [
        &["corB", "--q", "4", "--chi", "1", "--xi", "1/3", "--Xmax", "60", "--points", "3"][..],
        &["superbound", "--q", "1", "--chi", "0", "--xi", "2/3", "--Xmax", "60", "--points", "3"],
        &["lemma23", "--q", "4", "--chi", "1", "--v", "3", "--c", "0.75", "--T", "60"],
        &["lemma22", "--a", "50", "--b", "90", "--c", "0.75", "--u", "90"],
        &["cross", "--q", "4", "--chi", "1", "--qt", "3", "--psi", "1", "--X", "50"],
        &["chebyshev", "--Xmax", "1000", "--points", "3"],
    ] {
        let out = dir.path().join(format!("{}.json", args[0]));
        let mut full = vec!["verify"];
        full.extend_from_slice(args);
        full.extend_from_slice(&["--out", out.to_str().unwrap()]);
        let o = lchi(&full);
        assert!(matches!(o.status.code(), Some(0 | 2)), "{args:?}: {}", stderr(&o));
        let report = read_json(&out);
        assert_eq!(report["experiment"], args[0]);
        assert!(v.is_valid(&report), "{args:?}: {:?}", v.iter_errors(&report).map(|e| e.to_string()).collect::<Vec<_>>());
    }
}

#[test]
fn zeros_csv_contract() {
    let o = lchi(&["zeros", "--q", "4", "--chi", "1", "--T", "40"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with(&format!("# lchi {}\n", env!("CARGO_PKG_VERSION"))));
    assert!(text.lines().any(|l| l == "# config T=40"));
    let first_data = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(first_data, "gamma,halfwidth,z_left,z_right,flag");
    let (_, rows) = csv_records(&text);
    let gammas: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(gammas.windows(2).all(|w| w[0] < w[1]));
    // Mirror symmetry for a real character.
    let pos: Vec<f64> = gammas.iter().cloned().filter(|g| *g > 0.0).collect();
    let neg: Vec<f64> = gammas.iter().rev().cloned().filter(|g| *g < 0.0).map(|g| -g).collect();
    assert_eq!(pos, neg);
    assert!((pos[0] - 6.020948904).abs() < 1e-8);
}

#[test]
fn csv_values_round_trip_bit_exactly() {
    let o = lchi(&["sums", "--q", "5", "--chi", "2", "--xi", "1/3", "--T", "60,90"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = csv_records(&stdout(&o));
    assert_eq!(
        header,
        ["abscissa", "re_s1", "im_s1", "re_s2", "im_s2", "re_comb", "im_comb", "normalizer", "ratio"]
    );
    for row in rows {
        let vals: Vec<f64> = row.iter().map(|s| s.parse().unwrap()).collect();
        for (s, v) in row.iter().zip(&vals) {
            assert_eq!(&format!("{v:.16e}"), s);
        }
        // The written columns are consistent with each other to the last bit.
        let comb = num_complex::Complex64::new(vals[1], vals[2]) + num_complex::Complex64::new(vals[3], vals[4]);
        assert_eq!(comb.re.to_bits(), vals[5].to_bits());
        assert_eq!(comb.im.to_bits(), vals[6].to_bits());
        assert_eq!((comb.norm() / vals[7]).to_bits(), vals[8].to_bits());
    }
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    std::fs::write(&cfg_path, "# corB smoke run\nq=4\nchi=1\nxi=1/3\nXmax=40\npoints=3\n").unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let run = |out: &Path, threads: &str| {
        lchi(&[
            "verify", "corB", "--config", cfg_path.to_str().unwrap(), "--threads", threads, "--out",
            out.to_str().unwrap(),
        ])
    };
    assert!(matches!(run(&a, "1").status.code(), Some(0 | 2)));
    assert!(matches!(run(&b, "3").status.code(), Some(0 | 2)));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    // The embedded canonical config reproduces the run on its own.
    let canonical = read_json(&a)["config"].as_str().unwrap().to_string();
    let replay_cfg = dir.path().join("replay.cfg");
    std::fs::write(&replay_cfg, &canonical).unwrap();
    let c = dir.path().join("c.json");
    lchi(&["verify", "corB", "--config", replay_cfg.to_str().unwrap(), "--out", c.to_str().unwrap()]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    std::fs::write(&cfg_path, "q=5\nchi=2\n").unwrap();
    let o = lchi(&["gauss", "--config", cfg_path.to_str().unwrap(), "--q", "4", "--chi", "1"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["modulus"], 4);

    std::fs::write(&cfg_path, "q=5\nwhatever=2\n").unwrap();
    let o = lchi(&["gauss", "--config", cfg_path.to_str().unwrap(), "--chi", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown key"));
}

#[test]
fn unwritable_output_reports_the_path() {
    let o = lchi(&["gauss", "--q", "4", "--chi", "1", "--out", "/nonexistent-dir/x.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/nonexistent-dir/x.json"));
}

#[test]
fn chars_table_lists_every_residue() {
    let o = lchi(&["chars", "--q", "5"]);
    let (header, rows) = csv_records(&stdout(&o));
    assert_eq!(header, ["chi", "a", "re", "im", "exponent_num", "exponent_den"]);
    assert_eq!(rows.len(), 4 * 5);
    let o = lchi(&["chars", "--q", "5", "--chi", "1"]);
    let (header, rows) = csv_records(&stdout(&o));
    assert_eq!(header, ["a", "re", "im", "exponent_num", "exponent_den"]);
    // chi(2) = i for the labelled generator exponent 1/4.
    let two = &rows[2];
    assert_eq!((two[3].as_str(), two[4].as_str()), ("1", "4"));
}

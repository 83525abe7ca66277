use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nonlocality"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> (Output, String) {
    let path = dir.join(name);
    let mut full = args.to_vec();
    let path_str = path.to_str().unwrap().to_string();
    full.extend(["--out", &path_str]);
    let out = run(&full);
    let contents = fs::read_to_string(&path).unwrap_or_default();
    (out, contents)
}

fn rows(csv: &str) -> Vec<Vec<&str>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect()
}

fn significant_digits(field: &str) -> usize {
    let mantissa = field.split('e').next().unwrap();
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    digits.trim_start_matches('0').len()
}

#[test]
fn chsh_sweep_has_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "sweep",
        "--family",
        "wi",
        "--property",
        "chsh",
        "--pmin",
        "0",
        "--pmax",
        "1",
        "--steps",
        "101",
    ];
    let (out, csv) = run_to(dir.path(), "chsh.csv", &args);
    assert_eq!(out.status.code(), Some(0));
    assert!(csv.starts_with("p,value,indicator\n"));
    assert!(!csv.contains('\r'));
    let rows = rows(&csv);
    assert_eq!(rows.len(), 101);
    for row in &rows {
        assert_eq!(row.len(), 3);
        for field in &row[..2] {
            assert!(significant_digits(field) <= 12, "{field}");
            field.parse::<f64>().unwrap();
        }
        let p: f64 = row[0].parse().unwrap();
        assert_eq!(row[2] == "true", 2.0 * p * p > 1.0, "p={p}");
    }
    // no temporary files are left behind
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "sweep",
        "--family",
        "isotropic",
        "--d",
        "3",
        "--property",
        "tlf",
        "--steps",
        "6",
    ];
    let (a, first) = run_to(dir.path(), "a.csv", &args);
    let (b, second) = run_to(dir.path(), "b.csv", &args);
    assert_eq!((a.status.code(), b.status.code()), (Some(0), Some(0)));
    assert!(!first.is_empty());
    assert_eq!(first, second);
}

#[test]
fn werner_tlf_curve_crosses_zero_near_the_threshold() {
    let out = run(&[
        "sweep",
        "--family",
        "werner",
        "--d",
        "3",
        "--property",
        "tlf",
        "--steps",
        "21",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    let points: Vec<(f64, f64)> = rows(&csv)
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
        .collect();
    let crossing = points
        .windows(2)
        .find(|w| w[0].1 >= 0.0 && w[1].1 < 0.0)
        .unwrap();
    assert!(
        crossing[0].0 <= 0.6360 && 0.6360 <= crossing[1].0,
        "{crossing:?}"
    );
}

#[test]
fn hirsch2_grid_export() {
    let out = run(&[
        "sweep",
        "--family",
        "hirsch2",
        "--property",
        "hn",
        "--q-grid",
        "41",
        "--p-grid",
        "41",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("p,q,value\n"));
    assert_eq!(rows(&csv).len(), 1681);
}

#[test]
fn single_point_sweep() {
    let out = run(&["sweep", "--family", "wi", "--property", "eof", "--p", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "p,value,indicator\n1,1,true\n"
    );
}

#[test]
#[allow(clippy::approx_constant)] // rounded published values
fn wi_table_matches_the_published_row() {
    let out = run(&["table", "--family", "wi"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["family"], "wi");
    let row = &doc["rows"][0];
    assert_eq!(row["d"], 2);
    let cell = |name: &str| &row["thresholds"][name];
    for (name, want, tol) in [
        ("p_E", 0.3333, 5e-4),
        ("p_SA", 0.3333, 5e-4),
        ("p_NL", 0.7071, 5e-4),
        ("p_TLF", 0.6569, 2e-3),
    ] {
        assert_eq!(cell(name)["provenance"], "computed");
        let v = cell(name)["value"].as_f64().unwrap();
        assert!((v - want).abs() <= tol, "{name} = {v}");
        assert!(cell(name)["tolerance"].as_f64().unwrap() > 0.0);
    }
    assert_eq!(cell("p_L")["provenance"], "paper-constant");
}

#[test]
fn qudit_tables() {
    let out = run(&["table", "--family", "isotropic", "--dmax", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 5);

    let out = run(&["table", "--family", "werner", "--dmax", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    for row in doc["rows"].as_array().unwrap() {
        let sa = &row["thresholds"]["p_SA"]["value"];
        if row["d"].as_u64().unwrap() >= 3 {
            assert_eq!(sa, "X");
        } else {
            assert!(sa.is_number());
        }
    }
}

#[test]
fn ancilla_checks() {
    let out = run(&["check-ancilla"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let values: Vec<f64> = text
        .lines()
        .skip_while(|l| *l != "p,trace_value")
        .skip(1)
        .take_while(|l| l.contains(','))
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 20);
    assert!(values.iter().all(|&v| v < 0.0));

    let low = run(&["check-ancilla", "--p", "0.3"]);
    assert_eq!(low.status.code(), Some(1));
    assert!(String::from_utf8(low.stderr).unwrap().contains("p = 0.3"));

    let high = run(&["check-ancilla", "--p", "0.99"]);
    assert_eq!(high.status.code(), Some(0));
    let line = String::from_utf8(high.stdout).unwrap();
    assert!(line.contains("0.99,-"));
}

#[test]
fn kfactor_map() {
    let out = run(&["kfactor", "--dmin", "2", "--dmax", "5", "--steps", "41"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("d,f,k\n"));
    let mut last: Option<(u64, u64)> = None;
    for row in rows(&csv) {
        let d: u64 = row[0].parse().unwrap();
        let f: f64 = row[1].parse().unwrap();
        if f <= 1.0 / d as f64 {
            assert_eq!(row[2], "", "d={d} f={f}");
            continue;
        }
        let k: u64 = row[2].parse().unwrap();
        if let Some((ld, lk)) = last {
            if ld == d {
                assert!(k <= lk);
            }
        }
        last = Some((d, k));
        if d == 2 && f == 1.0 {
            assert_eq!(k, 10);
        }
    }
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["sweep", "--family", "wi", "--property", "chsh", "--unknown"],
        vec!["sweep", "--family", "nope", "--property", "chsh"],
        vec!["sweep", "--family", "wi", "--property", "nope"],
        vec![
            "sweep",
            "--family",
            "werner",
            "--d",
            "3",
            "--property",
            "eof",
        ],
        vec![
            "sweep",
            "--family",
            "wi",
            "--property",
            "chsh",
            "--pmin",
            "0.5",
            "--pmax",
            "0.5",
        ],
        vec![
            "sweep",
            "--family",
            "wi",
            "--property",
            "chsh",
            "--steps",
            "1",
        ],
        vec![
            "sweep",
            "--family",
            "wi",
            "--property",
            "chsh",
            "--q-grid",
            "5",
        ],
        vec!["table", "--family", "hirsch2"],
        vec!["kfactor", "--fmax", "2"],
        vec!["frobnicate"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn unwritable_output_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("out.csv");
    let out = run(&["kfactor", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!path.exists());
}

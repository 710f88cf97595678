use std::path::Path;
use std::process::{Command, Output};

use depbound::copulas::{sample_copula, CopulaKind};
use depbound::stats::{rank_coskewness, SampleTriple};
use depbound::Grid;
use serde_json::Value;

const U: &str = "uniform:a=0,b=1";
const N: &str = "normal:mu=0,sigma=1";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_depbound"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn check_schema(name: &str, v: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(format!("{name}.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}\n{v:#}");
}

fn list(m: &str, d: usize) -> String {
    vec![m; d].join(";")
}

#[test]
fn bounds_outputs_match_schema() {
    let v = json(&["bounds", "product", "--marginals", &list(N, 3)]);
    check_schema("bounds", &v);
    assert_eq!(v["method"], "Quadrature");
    let v = json(&["bounds", "product", "--marginals", &list(U, 3)]);
    check_schema("bounds", &v);
    assert!((v["lower"].as_f64().unwrap() - 5.4803e-2).abs() < 1e-6);
    assert_eq!(v["upper"].as_f64().unwrap(), 0.25);
    let v = json(&[
        "bounds",
        "product",
        "--marginals",
        &format!("lognormal:mu=0,sigma=1;{U}"),
        "--method",
        "bra",
        "--n",
        "500",
    ]);
    check_schema("bounds", &v);
    assert_eq!(v["method"], "Rearrangement");
    let v = json(&["bounds", "coskewness", "--marginals", &list("laplace:mu=0,b=1", 3)]);
    check_schema("bounds", &v);
    assert!((v["upper"].as_f64().unwrap() - 3.0 * 2f64.sqrt() / 2.0).abs() < 1e-8);
}

#[test]
fn bra_output_and_matrix_dump() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("m.csv");
    let v = json(&[
        "bra",
        "--marginals",
        &list(U, 4),
        "--direction",
        "min",
        "--n",
        "300",
        "--dump-matrix",
        dump.to_str().unwrap(),
    ]);
    check_schema("bra", &v);
    assert_eq!(v["d"], 4);
    let text = std::fs::read_to_string(&dump).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,x2,x3,x4"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 300);
    let lambda = rows.iter().map(|r| r.iter().product::<f64>()).sum::<f64>() / 300.0;
    assert!((lambda - v["lambda"].as_f64().unwrap()).abs() < 1e-15);
}

#[test]
fn same_seed_same_output() {
    let args = [
        "bra",
        "--marginals",
        &list(N, 5),
        "--direction",
        "max",
        "--n",
        "400",
        "--random",
        "--seed",
        "9",
    ];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let dir = tempfile::tempdir().unwrap();
    let files: Vec<Vec<u8>> = ["a", "b", "c"]
        .iter()
        .zip(["3", "3", "4"])
        .map(|(name, seed)| {
            let p = dir.path().join(name);
            json(&[
                "sample-copula",
                "--kind",
                "independent",
                "--d",
                "3",
                "--n",
                "50",
                "--seed",
                seed,
                "--out",
                p.to_str().unwrap(),
            ]);
            std::fs::read(p).unwrap()
        })
        .collect();
    assert_eq!(files[0], files[1]);
    assert_ne!(files[0], files[2]);
}

#[test]
fn sample_then_rank_coskewness_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("u.csv");
    let path = p.to_str().unwrap();
    let v = json(&[
        "sample-copula",
        "--kind",
        "min-odd",
        "--d",
        "3",
        "--n",
        "2000",
        "--seed",
        "5",
        "--grid",
        "iid",
        "--out",
        path,
    ]);
    check_schema("sample-copula", &v);
    let rs = json(&["rank-coskewness", "--data", path]);
    check_schema("rank-coskewness", &rs);
    let rows = sample_copula(CopulaKind::MinOdd, 3, 2000, 5, Grid::Iid).unwrap();
    let s = SampleTriple::from_rows(&rows.into_iter().map(|r| r.0).collect::<Vec<_>>()).unwrap();
    assert!((rs["rs"].as_f64().unwrap() - rank_coskewness(&s)).abs() <= 1e-12);
    let c = json(&["coskewness", "--data", path]);
    check_schema("coskewness", &c);
    assert!(c["coskewness"].as_f64().unwrap() < 0.0);
}

#[test]
fn shifted_construction_from_support() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.csv");
    let v = json(&[
        "sample-copula",
        "--kind",
        "strong-positive",
        "--d",
        "3",
        "--n",
        "10",
        "--a",
        "-1",
        "--b",
        "3",
        "--out",
        p.to_str().unwrap(),
    ]);
    check_schema("sample-copula", &v);
    let v = json(&[
        "sample-copula",
        "--kind",
        "strong-negative",
        "--d",
        "3",
        "--n",
        "10",
        "--c",
        "0.4",
        "--out",
        p.to_str().unwrap(),
    ]);
    check_schema("sample-copula", &v);
}

#[test]
fn repro_outputs_match_schema() {
    let v = json(&["repro", "table1", "--d", "3,4", "--n", "2000", "--experiments", "2"]);
    check_schema("repro-table1", &v);
    let v = json(&["repro", "table2"]);
    check_schema("repro-table2", &v);
    assert_eq!(v.as_array().unwrap().len(), 6);
    let v = json(&["repro", "lognormal", "--n", "5000", "--restarts", "1"]);
    check_schema("repro-lognormal", &v);
}

#[test]
fn repro_csv_format() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t2.csv");
    let out = run(&["repro", "table2", "--format", "csv", "--out", p.to_str().unwrap()]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("family,closed,quadrature,abs_diff\n"));
    assert_eq!(stdout.trim_end(), std::fs::read_to_string(&p).unwrap().trim_end());
    let mut rdr = csv::Reader::from_reader(stdout.as_bytes());
    assert_eq!(rdr.records().count(), 6);
}

fn code(args: &[&str]) -> (i32, String) {
    let out = run(args);
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn exit_codes() {
    let (c, err) = code(&[
        "bounds",
        "product",
        "--marginals",
        "student:nu=3;student:nu=3;student:nu=3",
    ]);
    assert_eq!(c, 2);
    assert!(err.starts_with("error: --marginals:"), "{err}");
    assert_eq!(code(&["bounds", "product", "--marginals", "normal:mu=0"]).0, 2);
    assert_eq!(
        code(&["bra", "--marginals", &list(U, 3), "--direction", "max", "--n", "1"]).0,
        2
    );
    assert_eq!(
        code(&[
            "sample-copula",
            "--kind",
            "max-odd",
            "--d",
            "4",
            "--n",
            "5",
            "--out",
            "/dev/null"
        ])
        .0,
        2
    );
    assert_eq!(code(&["rank-coskewness", "--data", "/nonexistent/x.csv"]).0, 2);
    // Bad usage goes through clap.
    assert_eq!(code(&["bra"]).0, 2);

    let (c, err) = code(&[
        "bra",
        "--marginals",
        &list(N, 6),
        "--direction",
        "min",
        "--n",
        "2000",
        "--max-iters",
        "1",
    ]);
    assert_eq!(c, 3);
    assert!(err.contains("iteration limit"), "{err}");

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("flat.csv");
    std::fs::write(&p, "a,b,c\n1,2,3\n1,5,6\n1,0,1\n").unwrap();
    assert_eq!(code(&["coskewness", "--data", p.to_str().unwrap()]).0, 3);

    let out = Command::new(env!("CARGO_BIN_EXE_depbound"))
        .args(["repro", "table2"])
        .env("DEPBOUND_THREADS", "0")
        .output()
        .unwrap();
    assert!(out.status.success(), "table2 does not use the pool");
    let out = Command::new(env!("CARGO_BIN_EXE_depbound"))
        .args(["repro", "table1", "--d", "3", "--n", "100", "--experiments", "1"])
        .env("DEPBOUND_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

use std::process::{Command, Output};

use serde_json::Value;

fn ffvar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ffvar"))
        .args(args)
        .env_remove("FFVAR_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<csv::StringRecord> {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    csv::Reader::from_reader(body.as_bytes()).records().map(|r| r.unwrap()).collect()
}

#[test]
fn lattice_rows() {
    let out = ffvar(&["rmt", "lattice", "k=2", "R=5", "n=0..10"]);
    assert!(out.status.success());
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows.len(), 11);
    assert_eq!(&rows[2][3], "10");
}

#[test]
fn constant_count_variance_row() {
    let out = ffvar(&["variance", "model=trivial", "k=1", "q=5", "Q=[0,1]", "n=3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("# field_modulus.q5=[0,1]"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][10], "0");
}

#[test]
fn selftest_passes() {
    let out = ffvar(&["selftest"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(csv_rows(&stdout(&out)).iter().all(|r| &r[1] == "pass"));
}

#[test]
fn json_document() {
    let out = ffvar(&[
        "--format", "json", "variance", "model=legendre", "k=2", "q=3,4,5", "Q=[0,1,1]", "n=1..2",
    ]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["format_version"], 1);
    assert_eq!(v["config"]["k"], "2");
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    // q = 4 has even characteristic: recorded, and the sweep continues
    assert!(rows[2]["error"].as_str().unwrap().starts_with("EvenCharacteristic"));
    assert_eq!(rows[4]["predicted"], 10);
    assert!(rows[3]["variance"].as_str().unwrap().contains('/'));
}

#[test]
fn output_does_not_depend_on_workers() {
    let args = ["variance", "model=legendre", "k=3", "q=7", "Q=[0,1,1]", "n=1..4"];
    let one = ffvar(&[&["--workers", "1"][..], &args].concat());
    let many = ffvar(&[&["--workers", "4"][..], &args].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, many.stdout);
    let mc = ["rmt", "mc", "k=2", "R=3", "samples=5000", "seed=9"];
    assert_eq!(ffvar(&[&["--workers", "1"][..], &mc].concat()).stdout, ffvar(&[&["--workers", "3"][..], &mc].concat()).stdout);
}

#[test]
fn errors_are_machine_readable() {
    let out = ffvar(&["variance", "k=2", "q=5", "n=1"]);
    assert_eq!(out.status.code(), Some(2));
    let rec: Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(rec["error"]["kind"], "ConfigParse");
    assert_eq!(rec["error"]["module"], "cli-harness");

    let out = ffvar(&["rmt", "gamma", "k=2", "c=3.5", "samples=10000"]);
    assert_eq!(out.status.code(), Some(1));
    let rec: Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(rec["error"]["kind"], "COutOfRange");

    let out = ffvar(&["variance", "k=2", "q=17", "Q=[0,1,1]", "n=7"]);
    let rows = csv_rows(&stdout(&out));
    assert!(rows[0][15].starts_with("BudgetExceeded"));
    assert!(!ffvar(&["variance", "k=2", "q=5", "Q=[0,1,1]", "n=1", "bogus=1"]).status.success());
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_ffvar"))
        .args(["--format", "json", "rmt", "closed", "k=2", "R=3"])
        .env("FFVAR_OUT_DIR", dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let v: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("rmt-closed.json")).unwrap()).unwrap();
    assert!(v["rows"].as_array().unwrap().iter().all(|r| r["agree"] != false));

    let target = dir.path().join("sub").join("lattice.csv");
    let out = ffvar(&["--out", target.to_str().unwrap(), "rmt", "lattice", "k=3", "R=1"]);
    assert!(out.status.success() && out.stdout.is_empty());
    assert_eq!(csv_rows(&std::fs::read_to_string(target).unwrap()).len(), 4);
}

#[test]
fn custom_model_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zeta.txt");
    // the zeta function of the affine line over GF(3), written out by hand
    std::fs::write(
        &path,
        "dim=1 weight=0 R=1\n\
         pi=[0,1] coeffs=1,-1\npi=[1,1] coeffs=1,-1\npi=[2,1] coeffs=1,-1\n\
         pi=[1,0,1] coeffs=1,-1\npi=[2,1,1] coeffs=1,-1\npi=[2,2,1] coeffs=1,-1\n",
    )
    .unwrap();
    let model = format!("model=custom:{}", path.display());
    let custom = ffvar(&["divisor-table", &model, "k=2", "q=3", "n=0..2"]);
    let trivial = ffvar(&["divisor-table", "model=trivial", "k=2", "q=3", "n=0..2"]);
    assert!(custom.status.success(), "{}", String::from_utf8_lossy(&custom.stderr));
    let (a, b) = (csv_rows(&stdout(&custom)), csv_rows(&stdout(&trivial)));
    assert_eq!(a.len(), 13);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(&x[4], &y[4]);
    }

    let scan = ffvar(&["twist-scan", "model=trivial", "q=5", "Q=[0,1,1]"]);
    let text = stdout(&scan);
    assert!(text.contains("# summary.characters=15"));
    assert_eq!(csv_rows(&text).len(), 15);
}

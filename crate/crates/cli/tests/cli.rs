use std::process::Command;

use mdheston_cli::config::RunConfig;
use mdheston_cli::table::{Cell, Document, Format};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mdheston"))
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn column(doc: &Document, section: &str, col: &str) -> Vec<Cell> {
    let s = doc.sections.iter().find(|s| s.name == section).unwrap();
    let j = s.columns.iter().position(|c| c == col).unwrap();
    s.rows.iter().map(|r| r[j].clone()).collect()
}

fn num(c: &Cell) -> f64 {
    match c {
        Cell::Num(v) => *v,
        Cell::Text(t) => panic!("expected a number, got {t}"),
    }
}

#[test]
fn csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mgf.csv");
    let status = bin().args(["mgf", "--out"]).arg(&out).status().unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let doc = Document::from_csv(&text).unwrap();
    assert_eq!(doc.to_csv().unwrap(), text);
    assert_eq!(Document::from_csv(&doc.to_csv().unwrap()).unwrap(), doc);
    assert_eq!(doc.header["command"], "mgf");
    assert_eq!(doc.header["heston.kappa"], "1.0");
}

#[test]
fn numbers_keep_full_precision() {
    let mut doc = Document::default();
    let mut s = mdheston_cli::table::Section::new("s", &["a", "b"]);
    for v in [
        0.1 + 0.2,
        std::f64::consts::PI,
        -1e-300,
        5e-324,
        f64::MAX,
        f64::NAN,
        f64::INFINITY,
    ] {
        s.push(vec![v.into(), "note, with comma".into()]);
    }
    doc.sections.push(s);
    let back = Document::from_csv(&doc.to_csv().unwrap()).unwrap();
    assert_eq!(back, doc);
}

#[test]
fn mgf_unit_at_zero_and_point_mass_reduction() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(&dir, "c.toml", "t = [0.5]\nu = [0.0, 0.5]\n");
    let out = bin().args(["mgf", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success());
    let doc = Document::from_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let re = column(&doc, "mgf", "re");
    assert_eq!(num(&re[0]), 1.0);
    let p = mdheston::HestonParamsF64::new(1.0, 0.04, 0.5, -0.7).unwrap();
    let law = mdheston::LawF64::point_mass(0.04).unwrap();
    let direct = mdheston::heston::randomised_mgf(
        &p,
        &law,
        0.5,
        mdheston::num_complex::Complex::new(0.5, 0.0),
    )
    .unwrap();
    assert!((num(&re[1]) - direct.re).abs() < 1e-15);
}

#[test]
fn mgf_marks_explosion_per_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(&dir, "c.toml", "t = [1.0]\nu = [1.0, 50.0]\n");
    let out = bin().args(["mgf", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success());
    let doc = Document::from_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let defined = column(&doc, "mgf", "defined");
    assert_eq!((num(&defined[0]), num(&defined[1])), (1.0, 0.0));
}

#[test]
fn rate_rows() {
    let dir = tempfile::tempdir().unwrap();
    let bounded = write(
        &dir,
        "b.toml",
        "x = [1.0]\n[law]\nname = \"uniform\"\na = 1.0\nb = 2.0\n",
    );
    let out = bin()
        .args(["rate", "--config"])
        .arg(&bounded)
        .output()
        .unwrap();
    let doc = Document::from_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!((num(&column(&doc, "rate", "rate")[0]) - 0.25).abs() < 1e-15);

    let fat = write(
        &dir,
        "f.toml",
        "x = [1.0]\n[law]\nname = \"gamma\"\nshape = 2.0\nrate = 3.0\n",
    );
    let out = bin().args(["rate", "--config"]).arg(&fat).output().unwrap();
    let doc = Document::from_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!((num(&column(&doc, "rate", "rate")[0]) - 6f64.sqrt()).abs() < 1e-14);

    let thin = write(
        &dir,
        "t.toml",
        "x = [-1.0, 0.5, 2.0]\n[law]\nname = \"folded-gaussian\"\nsigma = 1.0\n",
    );
    let out = bin()
        .args(["rate", "--config"])
        .arg(&thin)
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc = Document::from_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(column(&doc, "rate", "duality")
        .iter()
        .all(|c| *c == Cell::Text("pass".into())));
}

#[test]
fn regime_mismatch_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        &dir,
        "c.toml",
        "[law]\nname = \"uniform\"\na = 1.0\nb = 2.0\n[regime]\ngamma = 1.5\n",
    );
    let out = bin().args(["rate", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("(0, 1)"));
}

#[test]
fn invalid_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for text in [
        "bogus = 1\n",
        "[heston]\nkappa = -1.0\n",
        "[law]\nname = \"gamma\"\nshape = 2.0\nrte = 3.0\n",
        "t = [0.0]\n",
        "[g]\nbeta = 0.7\n",
    ] {
        let cfg = write(&dir, "c.toml", text);
        let out = bin().args(["mgf", "--config"]).arg(&cfg).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{text}");
    }
    let out = bin()
        .args(["mgf", "--config", "/nonexistent.toml"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(RunConfig::parse("[verify]\ncriteria = [\"nope\"]\n").is_err());
}

#[test]
fn verify_exit_codes_and_failure_list() {
    let out = bin()
        .args(["verify", "-c", "9", "-c", "duality"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let doc = Document::from_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let verdicts = column(&doc, "verdicts", "verdict");
    assert_eq!(
        verdicts,
        vec![Cell::Text("pass".into()), Cell::Text("pass".into())]
    );

    let out = bin()
        .args(["verify", "-c", "2", "--format", "json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let failures: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(failures["failures"][0]["criterion"], 2);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["header"]["command"], "verify");
}

#[test]
fn price_is_reproducible_across_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        &dir,
        "c.toml",
        "t = [0.25]\nx = [-0.1, 0.0, 0.1]\n[mc]\nn_paths = 40000\n",
    );
    let run = |jobs: &str| {
        let out = bin()
            .args(["price", "--seed", "3", "--jobs", jobs, "--config"])
            .arg(&cfg)
            .output()
            .unwrap();
        assert!(out.status.success());
        let mut doc = Document::from_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
        doc.header.remove("jobs");
        doc
    };
    let doc = run("1");
    assert_eq!(doc, run("2"));
    for z in column(&doc, "price", "z") {
        assert!(num(&z).abs() < 4.0);
    }
}

#[test]
fn impvol_thin_tail_trend() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        &dir,
        "c.toml",
        "t = [1e-2, 1e-3, 1e-4]\nx = [1.0]\n[law]\nname = \"folded-gaussian\"\nsigma = 1.0\n",
    );
    let out = bin()
        .args(["impvol", "--format", "csv", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc = Document::from_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let scaled: Vec<f64> = column(&doc, "impvol", "scaled").iter().map(num).collect();
    let limit = num(&column(&doc, "impvol", "asymptote")[0]);
    assert!(
        scaled
            .windows(2)
            .all(|w| (w[1] - limit).abs() < (w[0] - limit).abs()),
        "{scaled:?}"
    );
}

#[test]
fn json_output_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.json");
    let status = bin()
        .args(["rate", "--format", "json", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["sections"][0]["name"], "rate");
    assert_eq!(Format::default(), Format::Csv);
}

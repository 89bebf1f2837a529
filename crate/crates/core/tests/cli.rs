use std::path::Path;
use std::process::{Command, Output};

use fairtax::frontier::read_sweep_csv;
use fairtax::io::Table;

fn fairtax(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fairtax"))
        .env_remove("FAIRTAX_OUT_DIR")
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn frontier_writes_interval_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let o = fairtax(dir.path(), &["frontier", "--marginal", "uniform", "--sweep", "5", "--with-monopoly"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&dir.path().join("frontier.json"));
    assert_eq!(v["k_low"], 0.666666666667);
    assert_eq!(v["k_high"], 0.75);
    let rows = read_sweep_csv(std::fs::File::open(dir.path().join("frontier_sweep.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows[..5].iter().all(|r| r.frontier) && !rows[5].frontier);
    // oracle: τ = ψ(k) = 2k − 1 for the uniform
    for r in &rows {
        assert!((r.tau - (2.0 * r.k - 1.0)).abs() < 1e-12);
    }
}

#[test]
fn json_format_embeds_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = fairtax(dir.path(), &["--format", "json", "analyze", "--marginal", "power:2", "--grid", "11"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!dir.path().join("analyze.csv").exists());
    let v = json(&dir.path().join("analyze.json"));
    let text = v.to_string();
    assert!(text.contains("\"psi\"") && text.contains("\"theta\""), "{text}");
}

#[test]
fn analyze_table_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fairtax(dir.path(), &["analyze", "--marginal", "uniform", "--grid", "21"]).status.code(), Some(0));
    let t = Table::from_csv_reader(std::fs::File::open(dir.path().join("analyze.csv")).unwrap()).unwrap();
    assert_eq!(t.rows.len(), 21);
    for (theta, w) in t.column("theta").unwrap().iter().zip(t.column("w").unwrap()) {
        assert!((w - (3.0 - 4.0 * theta)).abs() < 1e-9);
    }
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_fairtax"))
        .env("FAIRTAX_OUT_DIR", dir.path())
        .args(["frontier", "--marginal", "texp:-1"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("frontier.json").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(fairtax(p, &["analyze"]).status.code(), Some(2));
    assert_eq!(fairtax(p, &["analyze", "--marginal", "lognormal"]).status.code(), Some(2));
    assert_eq!(fairtax(p, &["oracle", "--marginal", "uniform", "--random", "500"]).status.code(), Some(2));
    let missing = p.join("missing.csv");
    assert_eq!(fairtax(p, &["analyze", "--marginal", &format!("table:{}", missing.display())]).status.code(), Some(2));
    // ψ is not monotone for F(θ) = √θ
    let o = fairtax(p, &["frontier", "--marginal", "power:0.5"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
}

#[test]
fn non_strongly_regular_marginal_warns() {
    let dir = tempfile::tempdir().unwrap();
    let o = fairtax(dir.path(), &["frontier", "--marginal", "texp:5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not strongly regular"));
    assert_eq!(json(&dir.path().join("frontier.json"))["strongly_regular"], false);
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["oracle", "--marginal", "uniform", "--grid", "16", "--random", "40", "--seed", "3"];
    assert_eq!(fairtax(a.path(), &args).status.code(), Some(0));
    assert_eq!(fairtax(b.path(), &args).status.code(), Some(0));
    let read = |d: &Path| std::fs::read(d.join("oracle.json")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    let v = json(&a.path().join("oracle.json"));
    assert_eq!(v["frontier_undominated"], true);
}

#[test]
fn couplings_reports_the_order() {
    let dir = tempfile::tempdir().unwrap();
    let o = fairtax(dir.path(), &["couplings", "--compare", "monotone", "independent", "--grid", "64"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("couplings.json")).unwrap();
    assert!(text.contains("monotone") && text.contains("independent"));
}

#[test]
fn uniform_example_reproduction_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = fairtax(dir.path(), &["reproduce-section5", "--grid", "512"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("uniform_example.json").exists());
    let first = std::fs::read(dir.path().join("uniform_example.json")).unwrap();
    assert_eq!(fairtax(dir.path(), &["reproduce-uniform", "--grid", "512"]).status.code(), Some(0));
    assert_eq!(std::fs::read(dir.path().join("uniform_example.json")).unwrap(), first);
}

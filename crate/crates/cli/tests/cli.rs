use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exclusion")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

fn csv_rows(o: &Output) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

fn header(o: &Output) -> String {
    stdout(o).lines().next().unwrap_or_default().to_string()
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("exclusion-cli-{}-{name}", std::process::id()))
}

#[test]
fn verify_ssep_passes() {
    let o = run(&[
        "verify", "--model", "ssep", "--alpha", "1", "--gamma", "1/2", "--beta", "1", "--delta", "1/3", "--samples",
        "5", "--seed", "7",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let doc = json(&o);
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["summary"]["fail"], 0);
    assert!(doc["summary"]["pass"].as_u64().unwrap() > 0);
    let first = &doc["reports"][0];
    for key in ["model", "check", "params", "points", "status"] {
        assert!(first.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn verify_tasep_skips_crossing_rows() {
    let o = run(&["verify", "--model", "tasep", "--samples", "2", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let doc = json(&o);
    let skipped: Vec<&serde_json::Value> =
        doc["reports"].as_array().unwrap().iter().filter(|r| r["status"] == "skipped").collect();
    assert!(skipped.iter().any(|r| r["check"] == "r.crossing"));
    assert!(skipped.iter().any(|r| r["check"] == "reflection.Ktilde"));
    for r in skipped.iter().filter(|r| r["check"] == "r.crossing" || r["check"] == "reflection.Ktilde") {
        assert!(r["message"].as_str().unwrap().contains("partial transpose singular"), "{r}");
    }
}

#[test]
fn malformed_rational_is_usage_error() {
    assert_eq!(run(&["verify", "--model", "asep", "--q", "1/0"]).status.code(), Some(2));
    assert_eq!(run(&["steady", "--model", "tasep", "--L", "2", "--gamma", "1"]).status.code(), Some(2));
    assert_eq!(run(&["steady", "--model", "ssep", "--L", "11"]).status.code(), Some(2));
}

#[test]
fn steady_tasep_exact_weights() {
    let o = run(&["steady", "--model", "tasep", "--L", "2", "--exact"]);
    assert_eq!(o.status.code(), Some(0));
    let weights: Vec<String> = csv_rows(&o).into_iter().filter(|r| r[0] == "weight").map(|r| r[2].clone()).collect();
    assert_eq!(weights, ["1/5", "1/5", "2/5", "1/5"]);
}

#[test]
fn steady_rd_both_methods_agree() {
    let o = run(&[
        "steady", "--model", "rd", "--gamma", "1/2", "--delta", "1/3", "--L", "4", "--method", "both",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(header(&o), "quantity,label,nullspace,ansatz,rel_diff");
    for r in csv_rows(&o) {
        let d: f64 = r[4].parse().unwrap();
        assert!(d <= 1e-10, "{r:?}");
    }
}

#[test]
fn steady_ssep_symmetric_density_is_half() {
    let o = run(&["steady", "--model", "ssep", "--gamma", "1", "--delta", "1", "--L", "4", "--exact"]);
    let dens: Vec<String> = csv_rows(&o).into_iter().filter(|r| r[0] == "density").map(|r| r[2].clone()).collect();
    assert_eq!(dens, vec!["1/2"; 4]);
}

#[test]
fn steady_reducible_chain_is_domain_error() {
    let o = run(&["steady", "--model", "ssep", "--alpha", "0", "--beta", "0", "--L", "2"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn steady_ansatz_unavailable_for_asep() {
    assert_eq!(run(&["steady", "--model", "asep", "--L", "2", "--method", "ansatz"]).status.code(), Some(3));
}

#[test]
fn profile_columns_and_regimes() {
    let o = run(&["profile", "--model", "rd", "--gamma", "1/2", "--delta", "1/3", "--kappa", "1/2", "--L", "60", "--asymptotics"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(header(&o), "site,density,current_lat,current_eva,density_asymptotic");
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 60);
    let dev: Vec<f64> = rows.iter().take(5).map(|r| r[1].parse::<f64>().unwrap() - 0.5).collect();
    assert!(dev.windows(2).all(|w| w[0] * w[1] < 0.0));
    for r in rows.iter().take(5) {
        let (a, b): (f64, f64) = (r[1].parse().unwrap(), r[4].parse().unwrap());
        assert!((a - b).abs() < 1e-6);
    }
    assert_eq!(rows[59][2], "");
}

#[test]
fn profile_exact_cells_and_degenerate_boundary() {
    let o = run(&["profile", "--model", "rd", "--L", "2", "--exact"]);
    assert_eq!(csv_rows(&o)[0][1], "10/19");
    assert_eq!(run(&["profile", "--model", "rd", "--gamma", "1", "--L", "4"]).status.code(), Some(3));
    assert_eq!(run(&["profile", "--model", "ssep", "--L", "4"]).status.code(), Some(2));
}

#[test]
fn transfer_commutation_and_eigenvalue() {
    let o = run(&["transfer", "--model", "asep", "--q", "2", "--L", "3", "--check", "commutation", "--x", "2", "--x2", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["reports"][0]["status"], "pass");

    let o = run(&["transfer", "--model", "ssep", "--L", "2", "--theta", "1/2,2/3", "--check", "eigenvalue", "--x", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let doc = json(&o);
    assert_eq!(doc["reports"][0]["detail"], "lambda=289/256");
    assert_eq!(doc["summary"]["fail"], 0);
}

#[test]
fn transfer_rd_inhomogeneous() {
    let o = run(&["transfer", "--model", "rd", "--L", "2", "--theta", "3,5/2", "--check", "inhomogeneous-eigenvector"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["summary"]["pass"], 4);
    // x = 1/θ₁ = 1/2 is a pole of the boundary matrix at κ = 3.
    let o = run(&["transfer", "--model", "rd", "--L", "2", "--theta", "2,3", "--check", "inhomogeneous-eigenvector"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Ktilde"));
}

#[test]
fn transfer_length_mismatch() {
    assert_eq!(run(&["transfer", "--model", "ssep", "--L", "3", "--theta", "1,2"]).status.code(), Some(2));
}

#[test]
fn same_seed_same_bytes() {
    let (a, b) = (scratch("a.json"), scratch("b.json"));
    for p in [&a, &b] {
        let o = run(&["verify", "--model", "rd", "--gamma", "1/2", "--samples", "2", "--seed", "3", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let _ = std::fs::remove_file(a);
    let _ = std::fs::remove_file(b);
}

#[test]
fn bench_reports_every_length() {
    let o = run(&["bench", "--model", "tasep", "--L", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(csv_rows(&o).len(), 3);
}

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fastmix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fastmix"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = fastmix(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn ok_csv(args: &[&str]) -> Vec<csv::StringRecord> {
    let mut full = vec!["--format", "csv"];
    full.extend_from_slice(args);
    let out = fastmix(&full);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    csv::Reader::from_reader(out.stdout.as_slice())
        .records()
        .collect::<Result<_, _>>()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn pipeline_on_k3k3() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("k3k3.json");
    let chain = dir.path().join("eq.csv");
    let solved = dir.path().join("solved.csv");
    let embedding = dir.path().join("embedding.json");

    let g = ok_json(&["gen", "knkn", "--n", "3", "-o", path(&graph)]);
    assert_eq!(g["n"], 6);
    assert_eq!(ok_csv(&["gen", "knkn", "--n", "3"]).len(), 7);

    let s = ok_json(&["spectral", "--graph", path(&graph)]);
    assert!((s["eigenvalues"][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(ok_csv(&["spectral", "--graph", path(&graph)]).len(), 6);

    let u = ok_json(&["upper", "--graph", path(&graph), "--chain-out", path(&chain)]);
    let rho = u["rho_bar"].as_f64().unwrap();
    assert!(chain.exists());
    let on_eq = ok_json(&["spectral", "--graph", path(&graph), "--chain", path(&chain)]);
    assert!(on_eq["relaxation_time"].as_f64().unwrap() <= rho);
    assert_eq!(ok_csv(&["upper", "--graph", path(&graph)]).len(), 7);

    std::fs::write(&embedding, fastmix::lower::knkn_embedding(3).unwrap().to_json().unwrap()).unwrap();
    let l = ok_json(&["lower", "--graph", path(&graph), "--embedding", path(&embedding)]);
    let lb = l["embedding"].as_f64().unwrap();
    assert!(lb > 0.0 && lb <= rho);
    let rows = ok_csv(&["lower", "--graph", path(&graph), "--embedding", path(&embedding), "--chain", path(&chain)]);
    assert_eq!(rows.iter().map(|r| r[0].to_string()).collect::<Vec<_>>(), ["expansion", "embedding", "specified_chain"]);

    let r = ok_json(&["solve", "--graph", path(&graph), "--iters", "2000", "--chain-out", path(&solved)]);
    let tau = r["tau2_star"].as_f64().unwrap();
    assert!(lb <= tau && tau <= rho * (1.0 + 1e-9));
    assert!(solved.exists());
    assert_eq!(ok_csv(&["solve", "--graph", path(&graph), "--iters", "50"]).len(), 50);
}

#[test]
fn glauber_command() {
    let j = ok_json(&["glauber", "--tree", "2,2", "--beta", "0.3", "--exact"]);
    let rates: Vec<f64> = j["rates"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(rates.len(), 7);
    assert!((rates.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(j["exact"]["tau2"].as_f64().unwrap() <= j["bounds"]["sum_b_over_v"].as_f64().unwrap());
    assert_eq!(ok_csv(&["glauber", "--tree", "3,2", "--beta", "0.1", "--rates", "uniform"]).len(), 13);
    assert!(ok_json(&["glauber", "--tree", "3,2", "--beta", "0.1"])["majority"].is_object());
}

#[test]
fn knkn_report_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("table.csv");
    let out = fastmix(&["--format", "csv", "report", "-o", path(&table)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_path(&table).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        ["family", "params", "n_states", "lb_embed", "lb_expansion", "tau2_solver", "ub_congestion", "ub_cheeger", "tau2_standard"]
    );
    let rows: Vec<csv::StringRecord> = reader.records().collect::<Result<_, _>>().unwrap();
    assert_eq!(rows.len(), 10);
    for row in &rows {
        let lb: f64 = row[3].parse().unwrap();
        let ub: f64 = row[6].parse().unwrap();
        let ratio = ub / lb;
        assert!((1.0..=1.04 / 0.97).contains(&ratio), "{row:?}: ratio {ratio}");
    }
    assert_eq!(String::from_utf8(out.stdout).unwrap(), std::fs::read_to_string(&table).unwrap());
}

#[test]
fn report_from_spec() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{"instances": [{"family": "cycle", "n": 6}, {"family": "ising_tree", "b": 2, "r": 1, "beta": 0.5}],
            "solver": {"max_iters": 1000, "step": 0.1, "projection_tol": 1e-10, "seed": 0}}"#,
    )
    .unwrap();
    let rows = ok_json(&["report", "--spec", path(&spec)]);
    assert_eq!(rows.as_array().unwrap().len(), 2);
    assert_eq!(rows[1]["n_states"], 8);
}

#[test]
fn invalid_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"n": 3, "edges": [[0, 1], [1, 5]]}"#).unwrap();
    for args in [
        vec!["spectral", "--graph", path(&bad)],
        vec!["upper", "--graph", path(&bad)],
        vec!["gen", "knkn"],
        vec!["gen", "cycle", "--n", "2"],
        vec!["glauber", "--tree", "2", "--beta", "1"],
        vec!["solve", "--graph", "/nonexistent.json"],
    ] {
        assert_eq!(fastmix(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn inversion_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{"instances": [{"family": "knkn", "n": 3}],
            "solver": {"max_iters": 1, "step": 1e-9, "projection_tol": 1e-10, "seed": 0}}"#,
    )
    .unwrap();
    let out = fastmix(&["report", "--spec", path(&spec)]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_gswl-ect"));
    c.env_remove("GSWL_QUANT_DIGITS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn gswl-ect")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("bad JSON ({e}): {}\nstderr: {}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
    })
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn generate(dir: &Path, name: &str, extra: &[&str]) -> std::path::PathBuf {
    let out = dir.join(name);
    let mut args = vec!["generate", "--out", p(&out)];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn generate_validate_refine() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = generate(
        dir.path(),
        "mesh.json",
        &["--kind", "grid", "--nx", "8", "--ny", "5", "--deform", "bend", "--amplitude", "0.2", "--seed", "3"],
    );
    let v = stdout_json(&run(&["validate", p(&mesh)]));
    assert_eq!(v["counts"], serde_json::json!([40, 95, 56]));
    assert_eq!(v["euler_characteristic"], 1);
    assert_eq!(v["valid"], true);

    let o = run(&["refine", "--mode", "gswl", "--depth", "2", "--phi", "derived", "--adjacency", "full", p(&mesh)]);
    assert!(o.status.success());
    let v = stdout_json(&o);
    let rounds = v["rounds"].as_array().unwrap();
    assert_eq!(rounds.len(), 3);
    let total: u64 = rounds[2]["histogram"].as_array().unwrap().iter().map(|h| h["count"].as_u64().unwrap()).sum();
    assert_eq!(total, 40 + 95 + 56);
}

#[test]
fn library_generation_records_spectral_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let torus = generate(dir.path(), "torus.json", &["--library", "torus_T2", "--embed", "spectral"]);
    let file: Value = serde_json::from_str(&std::fs::read_to_string(&torus).unwrap()).unwrap();
    assert_eq!(file["metadata"]["library"], "torus_T2");
    assert!(file["metadata"]["spectral"]["max_residual"].as_f64().unwrap() <= 1e-8);
    let v = stdout_json(&run(&["validate", p(&torus)]));
    assert_eq!(v["closed_surface"], true);
    assert_eq!(v["euler_characteristic"], 0);
}

#[test]
fn equiv_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let flat = generate(dir.path(), "flat.json", &["--kind", "grid", "--nx", "5", "--ny", "5"]);
    let bent = generate(dir.path(), "bent.json", &["--kind", "grid", "--nx", "5", "--ny", "5", "--deform", "bend"]);

    let o = run(&["equiv", p(&flat), p(&bent), "--depth", "4", "--mode", "swl"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["equivalent"], true);

    let o = run(&["equiv", p(&flat), p(&bent), "--depth", "0"]);
    assert_eq!(o.status.code(), Some(1));
    let v = stdout_json(&o);
    assert_eq!(v["equivalent"], false);
    assert_eq!(v["first_separating_round"], 0);

    let o = run(&["equiv", p(&flat), p(&dir.path().join("missing.json"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ect_csv_and_distance() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = generate(dir.path(), "m.json", &["--kind", "disk-fan"]);
    let moved = generate(dir.path(), "n.json", &["--kind", "disk-fan", "--perturb", "0.02", "--seed", "4"]);
    let csv = dir.path().join("ect.csv");
    assert!(run(&["ect", p(&mesh), "--directions", "8", "--thresholds", "10", "--out", p(&csv)]).status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "direction,threshold,chi");
    assert_eq!(lines.len(), 1 + 80);
    // the last threshold covers the whole disk
    assert!(lines.iter().skip(1).filter(|l| l.starts_with("0,")).next_back().unwrap().ends_with(",1"));

    let v = stdout_json(&run(&["ect-dist", p(&mesh), p(&mesh), "--quad", "64"]));
    assert_eq!(v["total"], 0.0);
    let v = stdout_json(&run(&["ect-dist", p(&mesh), p(&moved), "--quad", "64"]));
    assert!(v["total"].as_f64().unwrap() > 0.0);
    assert_eq!(v["per_direction"].as_array().unwrap().len(), 64);
}

#[test]
fn realize_ect_readout_matches() {
    let dir = tempfile::tempdir().unwrap();
    let fam = dir.path().join("family");
    std::fs::create_dir(&fam).unwrap();
    for (i, deform) in ["bend", "twist", "stretch", "random_smooth"].iter().enumerate() {
        generate(&fam, &format!("m{i}.json"), &["--kind", "grid", "--nx", "4", "--ny", "4", "--deform", deform]);
    }
    let o = run(&["realize", "--family", p(&fam), "--depth", "2", "--readout", "ect", "--directions", "8", "--thresholds", "10"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    let members = v["members"].as_array().unwrap();
    assert_eq!(members.len(), 4);
    assert!(members.iter().all(|m| m["matches_direct_ect"] == true && m["readout"].as_array().unwrap().len() == 80));
    assert_eq!(v["hidden_dim"].as_u64().unwrap(), 3 * v["block"].as_u64().unwrap());

    let o = run(&["realize", "--family", p(&fam), "--depth", "1", "--readout", "ect"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_upper_on_relabeled_pair() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    std::fs::write(&a, r#"{"ambient_dim":2,"vertices":{"0":[0,0],"1":[1,0],"2":[0,1]},"maximal_simplices":[[0,1,2]]}"#).unwrap();
    std::fs::write(&b, r#"{"ambient_dim":2,"vertices":{"7":[0,0],"3":[1,0],"5":[0,1]},"maximal_simplices":[[3,5,7]]}"#).unwrap();
    let o = run(&["check-upper", p(&a), p(&b), "--depth", "2", "--trials", "50", "--seed", "7"]);
    assert!(o.status.success());
    let v = stdout_json(&o);
    assert_eq!(v["trials"], 50);
    assert_eq!(v["violations"], 0);
    assert!(v["note"].as_str().unwrap().contains("statistical"));
}

#[test]
fn run_writes_reports_and_rejects_bad_configs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    std::fs::write(
        &cfg,
        r#"{"scenarios":["coboundary_ablation","deform_separation"],"seeds":[0,1],"grids":[{"nx":4,"ny":3}],"depths":[0,2]}"#,
    )
    .unwrap();
    let out = dir.path().join("reports");
    let o = run(&["run", p(&cfg), "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["summary.csv", "coboundary_ablation.csv", "deform_separation.csv", "report.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["fingerprint"]["quantization_digits"], 12);

    let o = bin().args(["run", p(&cfg), "--out", p(&out)]).env("GSWL_QUANT_DIGITS", "9").output().unwrap();
    assert!(o.status.success());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["fingerprint"]["quantization_digits"], 9);

    let o = bin().args(["run", p(&cfg)]).env("GSWL_QUANT_DIGITS", "lots").output().unwrap();
    assert_eq!(o.status.code(), Some(2));

    std::fs::write(&cfg, r#"{"scenarios":["stability_scan"],"deltas":[0.1,"big"]}"#).unwrap();
    let o = run(&["run", p(&cfg), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/deltas/1"));

    let o = run(&["validate", p(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/deltas/1"));
}

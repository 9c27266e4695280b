use std::fs;
use std::path::Path;

use freewalk::cli::{main_with_args, RunManifest};

fn run(out: &Path, args: &[&str]) -> i32 {
    let mut argv = vec!["freewalk".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    argv.extend(["--out".to_string(), out.display().to_string()]);
    main_with_args(argv)
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn validate_genfun_and_oracle_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert_eq!(run(out, &["validate", "--config", "PathxK3"]), 0);
    assert_eq!(json(&out.join("validation.json"))["passed"], true);

    assert_eq!(run(out, &["genfun"]), 0);
    let g = json(&out.join("genfun.json"));
    assert_eq!(g["meta"]["command"], "genfun");
    assert!(fs::read_to_string(out.join("genfun.csv")).unwrap().contains("factor,vertex,L"));

    assert_eq!(run(out, &["oracle-check", "--N", "10"]), 0);
    assert!(out.join("oracle_check.json").exists());
    assert!(out.join("oracle_check.csv").exists());
}

#[test]
fn small_simulation_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert_eq!(run(out, &["simulate", "--n", "4000", "--M", "20", "--buffer", "200", "--seed", "3"]), 0);
    let s = json(&out.join("simulate.json"));
    assert_eq!(s["report"]["M"], 20);

    assert_eq!(run(out, &["clt", "--stat", "dist", "--n", "2000", "--M", "200", "--seed", "3"]), 0);
    assert!(out.join("clt_dist.csv").exists());

    // With too few walks for the tail fit the command reports a statistical failure.
    assert_eq!(run(out, &["diagnostics", "--n", "2000", "--M", "20", "--buffer", "200"]), 5);

    let code = run(
        out,
        &["sweep", "--config", "PathxK3", "--grid", "0.4,0.5,0.6", "--n", "2000", "--M", "10", "--buffer", "200"],
    );
    assert!(code == 0 || code == 5);
    // No symmetry claim for distinct factors; the field is an explicit empty array.
    assert_eq!(json(&out.join("sweep.json"))["report"]["symmetry"], serde_json::json!([]));
}

#[test]
fn clt_at_one_step_is_pre_asymptotic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert_eq!(run(out, &["clt", "--n", "1", "--M", "50"]), 0);
    let report = &json(&out.join("clt_dist.json"))["report"];
    assert_eq!(report["pre_asymptotic"], true);
    assert!(report["ks_stat"].is_null());
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["simulate", "--n", "3000", "--M", "12", "--buffer", "200", "--seed", "9"];
    assert_eq!(run(a.path(), &args), 0);
    assert_eq!(run(b.path(), &args), 0);
    for name in ["simulate.json", "simulate.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert_eq!(run(out, &["frobnicate"]), 2);
    assert_eq!(run(out, &["clt", "--stat", "median"]), 2);
    assert_eq!(run(out, &["sweep", "--grid", "0.7:0.3:0.1"]), 2);

    let bad = out.join("bad.json");
    let mut cfg = freewalk::WalkConfig::k3_x_k3();
    cfg.alpha = freewalk::Prob::from_ratio(3, 2);
    fs::write(&bad, cfg.to_json_string()).unwrap();
    assert_eq!(run(out, &["validate", "--config", bad.to_str().unwrap()]), 3);
    assert_eq!(json(&out.join("validation.json"))["passed"], false);
    assert_eq!(run(out, &["genfun", "--config", bad.to_str().unwrap()]), 3);

    assert_eq!(run(out, &["genfun", "--config", "/nonexistent/cfg.json"]), 1);
}

#[test]
fn manifest_parsing() {
    let m = RunManifest::from_args(["freewalk", "sweep", "--grid", "0.3:0.5:0.1", "--seed", "4"]).unwrap();
    assert_eq!(m.overrides.grid, Some(vec![0.3, 0.4, 0.5]));
    assert_eq!(m.master_seed, 4);
    assert_eq!(m.config_path, "K3xK3");
    assert!(RunManifest::from_args(["freewalk"]).is_err());
}

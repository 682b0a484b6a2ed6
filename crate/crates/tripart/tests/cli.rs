use std::path::{Path, PathBuf};

use tripart::cli::{parse_rho_grid, run_cli, EXIT_FAIL, EXIT_OK, EXIT_USAGE};
use tripart::io::write_case;
use tripart::report::SolutionDocument;
use tripart_core::case::{synth_case, Scale};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("tripart").chain(args.iter().copied());
    let code = run_cli(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn desk3() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../cases/desk3.json")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn tiny(dir: &Path, seed: u64) -> PathBuf {
    let path = dir.join(format!("tiny{seed}.json"));
    write_case(&path, &synth_case(seed, Scale::Tiny)).unwrap();
    path
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(run(&["--help"]).0, EXIT_OK);
    assert_eq!(run(&["plan", "--help"]).0, EXIT_OK);
    let (code, _, err) = run(&["frobnicate"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("Usage"));
    assert_eq!(run(&["plan", "joint"]).0, EXIT_USAGE);
    assert_eq!(run(&["plan", "admm", "--case", "x.json", "--bogus"]).0, EXIT_USAGE);
}

#[test]
fn missing_case_file_exits_2() {
    let (code, _, err) = run(&["plan", "joint", "--case", "/definitely/not/here.json"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("cannot read"));
    assert_eq!(run(&["case", "validate", "/definitely/not/here.json"]).0, EXIT_USAGE);
}

#[test]
fn validate_reports_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["case", "validate", s(&desk3())]).0, EXIT_OK);
    let mut case = synth_case(1, Scale::Tiny);
    case.electric.slack_bus = 42;
    let bad = dir.path().join("bad.json");
    write_case(&bad, &case).unwrap();
    let (code, out, _) = run(&["case", "validate", s(&bad)]);
    assert_eq!(code, EXIT_FAIL);
    assert!(out.contains("slack"), "{out}");
    assert_eq!(run(&["plan", "joint", "--case", s(&bad)]).0, EXIT_USAGE);
}

#[test]
fn synth_writes_a_valid_case() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.json");
    assert_eq!(run(&["case", "synth", "--seed", "3", "--scale", "desk", "--out", s(&path)]).0, EXIT_OK);
    assert_eq!(run(&["case", "validate", s(&path)]).0, EXIT_OK);
    assert_eq!(run(&["case", "synth", "--scale", "huge", "--out", s(&path)]).0, EXIT_USAGE);
}

#[test]
fn joint_golden_run_on_shipped_case() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(&["plan", "joint", "--case", s(&desk3()), "--out", s(dir.path())]);
    assert_eq!(code, EXIT_OK);
    for agent in ["gas", "electric", "ries", "total"] {
        assert!(out.lines().any(|l| l.starts_with(agent)), "{out}");
    }
    let text = std::fs::read_to_string(dir.path().join("solution.json")).unwrap();
    let doc: SolutionDocument = serde_json::from_str(&text).unwrap();
    assert_eq!(doc.status, "optimal");
    let sum: f64 = doc.costs.iter().map(|r| r.total).sum();
    assert!((doc.total_cost - sum).abs() <= 1e-9);
    // regression value from the first verified run
    assert!((doc.total_cost - 0.492546).abs() < 1e-6, "{}", doc.total_cost);
    assert!(!text.contains("wall_time"));
    assert!(dir.path().join("timing.json").exists());
}

#[test]
fn admm_writes_trace_plot_and_solution() {
    let dir = tempfile::tempdir().unwrap();
    let case = tiny(dir.path(), 1);
    let out = dir.path().join("run");
    let (code, stdout, _) = run(&["plan", "admm", "--case", s(&case), "--out", s(&out)]);
    assert_eq!(code, EXIT_OK, "{stdout}");
    let trace = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("iter,res_gas,res_elec,obj_gn,obj_en,obj_ries"));
    assert!(lines.count() >= 1);
    let svg = std::fs::read_to_string(out.join("convergence.svg")).unwrap();
    assert!(svg.contains("res_gas") && svg.contains("threshold"));
    let doc: SolutionDocument =
        serde_json::from_str(&std::fs::read_to_string(out.join("solution.json")).unwrap()).unwrap();
    assert_eq!(doc.admm.unwrap().rho, [100.0; 4]);
}

#[test]
fn flags_override_case_settings() {
    let dir = tempfile::tempdir().unwrap();
    let mut case = synth_case(1, Scale::Tiny);
    case.admm.rho_gn = Some(10.0);
    case.admm.rho_en = Some(20.0);
    let path = dir.path().join("c.json");
    write_case(&path, &case).unwrap();
    let out = dir.path().join("run");
    let code = run(&["plan", "admm", "--case", s(&path), "--rho-en", "50", "--eps-g", "0.002", "--out", s(&out)]).0;
    assert_eq!(code, EXIT_OK);
    let doc: SolutionDocument =
        serde_json::from_str(&std::fs::read_to_string(out.join("solution.json")).unwrap()).unwrap();
    let admm = doc.admm.unwrap();
    assert_eq!(admm.rho, [10.0, 50.0, 100.0, 100.0]);
    assert_eq!(admm.eps_gas, 0.002);
    assert_eq!(admm.eps_elec, 1e-3);
}

#[test]
fn admm_without_convergence_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let case = tiny(dir.path(), 1);
    let out = dir.path().join("run");
    let (code, stdout, _) = run(&["plan", "admm", "--case", s(&case), "--max-iters", "2", "--out", s(&out)]);
    assert_eq!(code, EXIT_FAIL);
    assert!(stdout.contains("max_iters"), "{stdout}");
    assert_eq!(std::fs::read_to_string(out.join("trace.csv")).unwrap().lines().count(), 3);
    assert_eq!(run(&["plan", "admm", "--case", s(&case), "--rho-gn", "-1"]).0, EXIT_USAGE);
}

#[test]
fn sweep_writes_one_row_per_setting() {
    let dir = tempfile::tempdir().unwrap();
    let case = tiny(dir.path(), 2);
    let out = dir.path().join("sweep");
    let code = run(&["plan", "sweep", "--case", s(&case), "--rho-grid", "1,100,10:10:100:100", "--out", s(&out)]).0;
    assert_eq!(code, EXIT_OK);
    let text = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().nth(3).unwrap().starts_with("10.0,10.0,100.0,100.0,true,"));
    assert_eq!(run(&["plan", "sweep", "--case", s(&case), "--rho-grid", "1:2", "--out", s(&out)]).0, EXIT_USAGE);
}

#[test]
fn rho_grid_parsing() {
    assert_eq!(parse_rho_grid("0.1,200").unwrap(), vec![[0.1; 4], [200.0; 4]]);
    assert_eq!(parse_rho_grid("1:2:3:4").unwrap(), vec![[1.0, 2.0, 3.0, 4.0]]);
    assert!(parse_rho_grid("a").is_err());
    assert!(parse_rho_grid("1:2:3").is_err());
}

#[test]
fn oracle_on_tiny_and_too_large_cases() {
    let dir = tempfile::tempdir().unwrap();
    let case = tiny(dir.path(), 3);
    let (code, out, _) = run(&["plan", "oracle", "--case", s(&case)]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("pass"), "{out}");
    assert_eq!(run(&["plan", "oracle", "--case", s(&desk3())]).0, EXIT_USAGE);
}

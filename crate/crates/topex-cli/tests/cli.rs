use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::process::{Command, Output};

use topex_core::finite_topology::{interval_tree_encoding, FiniteSpace, TaggedSpace};
use topex_core::stretching::{build_tree, EpsilonSchedule, ExpansionTree, Interval, OpenBox};

fn topex() -> Command {
    Command::new(env!("CARGO_BIN_EXE_topex"))
}

fn run(args: &[&str]) -> Output {
    topex().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 output")
}

fn tmpfile(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("topex-cli-{}-{name}", std::process::id()))
}

fn write_tmp(name: &str, contents: &str) -> PathBuf {
    let path = tmpfile(name);
    std::fs::write(&path, contents).expect("temp file writable");
    path
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn lambda_lists_step_two() {
    let out = run(&["lambda", "--step", "2"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 8);
    assert_eq!(lines[0], "+++");
    assert_eq!(lines[7], "---");
}

#[test]
fn lambda_chart_table_has_compositions() {
    let out = run(&["lambda", "--step", "1", "--chart-table"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "sign_string,k,primed,composition");
    assert_eq!(lines.len(), 5);
    assert!(text.contains("--,3,true,T_3*phi_3*T_1*phi_1"), "{text}");
    assert!(text.contains("++,2,false,phi_2*phi_1"), "{text}");
}

#[test]
fn cap_env_var_limits_enumeration() {
    let out = topex()
        .args(["lambda", "--step", "10"])
        .env("TOPEX_CAP", "4")
        .output()
        .expect("binary runs");
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn stretch_json_emits_six_nodes() {
    let out = run(&["stretch", "--base", "0,1", "--eps", "0.5,0.25", "--depth", "1", "--format", "json"]);
    assert_eq!(exit_code(&out), 0);
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(value["nodes"].as_array().expect("nodes").len(), 6);
    assert_eq!(value["depth"], 1);
}

#[test]
fn stretch_json_round_trips_through_serde() {
    let out = run(&["stretch", "--base", "0,1;0,1", "--eps", "0.5,0.25,0.125", "--depth", "2"]);
    assert_eq!(exit_code(&out), 0);
    let parsed: ExpansionTree = serde_json::from_str(&stdout(&out)).expect("tree json");
    let base = OpenBox::new(vec![Interval::new(0.0, 1.0).unwrap(), Interval::new(0.0, 1.0).unwrap()]).unwrap();
    let expected = build_tree(base, EpsilonSchedule::new(vec![0.5, 0.25, 0.125]).unwrap(), 2).unwrap();
    assert_eq!(parsed, expected);
}

#[test]
fn stretch_dot_draws_the_depth_one_tree() {
    let out = run(&["stretch", "--base", "0,1", "--eps", "0.5,0.25", "--depth", "1", "--format", "dot"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.matches(" -> ").count(), 6);
    assert!(text.contains("root -> \"+\""));
    assert!(text.contains("\"+\" -> \"+-\""));
    assert!(text.contains("]0,1.5["));
}

#[test]
fn stretch_verify_passes_on_built_trees() {
    let out = run(&["stretch", "--base", "0,1", "--eps", "0.5,0.25", "--depth", "1", "--verify", "--format", "csv"]);
    assert_eq!(exit_code(&out), 0);
    assert!(stdout(&out).starts_with("sign_string,lo,hi\n"));
}

#[test]
fn stretch_rejects_bad_schedules() {
    let out = run(&["stretch", "--base", "0,1", "--eps", "0.25,0.5", "--depth", "1"]);
    assert_eq!(exit_code(&out), 1);
}

fn encoded_family_json() -> String {
    let base = OpenBox::from_interval(Interval::new(0.0, 1.0).unwrap());
    let tree = build_tree(base, EpsilonSchedule::new(vec![0.5, 0.25, 0.125]).unwrap(), 1).unwrap();
    let pres = interval_tree_encoding(&tree).unwrap();
    serde_json::to_string(&pres).expect("serializable")
}

#[test]
fn topology_verify_accepts_encoded_families() {
    let path = write_tmp("family-ok.json", &encoded_family_json());
    let out = run(&["topology", "verify", "--family", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("report json");
    assert!(value["family"]["axioms"].as_array().expect("axioms").len() >= 5);
}

#[test]
fn topology_verify_flags_broken_families() {
    // Keep only two level-1 spaces so both levels have equal index sets.
    let mut value: serde_json::Value = serde_json::from_str(&encoded_family_json()).unwrap();
    let level1 = value["levels"][1].as_object_mut().unwrap();
    let keep: Vec<String> = level1.keys().take(2).cloned().collect();
    level1.retain(|k, _| keep.contains(&k.to_string()));
    let pm = value["parent_maps"][0].as_object_mut().unwrap();
    pm.retain(|k, _| keep.contains(&k.to_string()));
    let path = write_tmp("family-broken.json", &value.to_string());
    let out = run(&["topology", "verify", "--family", path.to_str().unwrap(), "--format", "text"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn topology_coproduct_of_two_sierpinski_spaces() {
    let sierpinski = FiniteSpace::new(
        vec!["a".to_string(), "b".to_string()],
        vec![
            BTreeSet::new(),
            ["a".to_string()].into_iter().collect(),
            ["a".to_string(), "b".to_string()].into_iter().collect(),
        ],
    )
    .unwrap();
    let mut spaces = BTreeMap::new();
    spaces.insert("0".to_string(), sierpinski.clone());
    spaces.insert("1".to_string(), sierpinski);
    let tagged = TaggedSpace::new(spaces).unwrap();
    let path = write_tmp("spaces.json", &serde_json::to_string(&tagged).unwrap());
    let out = run(&["topology", "coproduct", "--spaces", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json");
    assert_eq!(value["open_count"], 9);
    assert_eq!(value["point_count"], 4);
}

#[test]
fn mean_csv_identity_closed_form() {
    let out = run(&["mean", "--signs", "+", "--deltas", "0.2", "--f", "identity", "--xs", "0.3:0.5:0.1"]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,F(x),err_bound");
    assert_eq!(lines.len(), 4);
    for line in &lines[1..] {
        let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        assert!((fields[1] - (fields[0] + 0.1)).abs() < 1e-10, "{line}");
    }
}

#[test]
fn mean_check_derivative_passes() {
    let out = run(&["mean", "--signs", "+", "--deltas", "0.1", "--check-derivative", "--xs", "0.2:0.4:0.1"]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).starts_with("x,numeric,analytic,rel_err\n"));
}

#[test]
fn mean_check_l1_passes() {
    let out = run(&["mean", "--signs", "+", "--deltas", "0.25", "--f", "identity", "--check-l1"]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.starts_with("delta_next,abs_error\n"));
    assert_eq!(text.lines().count(), 9); // header + 2^-3..2^-10
}

#[test]
fn mean_rejects_out_of_range_samples() {
    let out = run(&["mean", "--signs", "+", "--deltas", "0.2", "--f", "identity", "--xs", "0.9:0.95:0.05"]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn dimension_reports_slope_for_stretched_union() {
    let tree_path = tmpfile("tree2d.json");
    let out = run(&[
        "stretch",
        "--base",
        "0,1;0,1",
        "--eps",
        "0.5,0.25,0.125",
        "--depth",
        "2",
        "--out",
        tree_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    let out = run(&["dimension", "--tree", tree_path.to_str().unwrap(), "--step", "2", "--resolution", "256"]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.starts_with("scale,count\n"));
    assert!(text.contains("slope,r2\n"));
    let summary = text.lines().last().unwrap();
    let slope: f64 = summary.split(',').next().unwrap().parse().unwrap();
    assert!(slope > 1.5 && slope <= 2.1, "slope {slope}");
}

#[test]
fn diagram_chart_arrows_match_step_one_labels() {
    let out = run(&["diagram", "--chart-step", "1"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    for label in ["phi_1", "T_1*phi_1", "phi_2", "T_2*phi_2", "phi_3", "T_3*phi_3"] {
        assert!(text.contains(&format!("label=\"{label}\"")), "missing {label}\n{text}");
    }
}

#[test]
fn diagram_tree_matches_stretch_dot() {
    let tree_path = tmpfile("tree1d.json");
    let out = run(&["stretch", "--base", "0,1", "--eps", "0.5,0.25", "--depth", "1", "--out", tree_path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    let via_diagram = run(&["diagram", "--tree", tree_path.to_str().unwrap()]);
    let via_stretch = run(&["stretch", "--base", "0,1", "--eps", "0.5,0.25", "--depth", "1", "--format", "dot"]);
    assert_eq!(stdout(&via_diagram), stdout(&via_stretch));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let cfg = write_tmp("config.json", r#"{"step": 2}"#);
    let out = run(&["lambda", "--config", cfg.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(stdout(&out).lines().count(), 8);
    let out = run(&["lambda", "--config", cfg.to_str().unwrap(), "--step", "1"]);
    assert_eq!(stdout(&out).lines().count(), 4);
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let out = run(&["frobnicate"]);
    assert_eq!(exit_code(&out), 1);
}

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sparse-ld"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

#[test]
fn gen_round_trips_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = run(&["gen", "--family", r#"{"kind":"cycle","length":6}"#, "--out", "c6.json"], d);
    assert!(o.status.success());
    let o = run(&["gen", "--family", r#"{"kind":"cycle","length":6}"#, "--format", "csv", "--out", "c6.txt"], d);
    assert!(o.status.success());
    let a = sparse_ld::Graph::read(&d.join("c6.json")).unwrap();
    let b = sparse_ld::Graph::read(&d.join("c6.txt")).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.edge_count(), 6);
}

#[test]
fn hom_c4_gives_82() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "c4.json", r#"{"n":4,"edges":[[0,1],[1,2],[2,3],[3,0]],"degree_bound":2}"#);
    write(d, "h.json", r#"{"alpha":[1,1],"A":[[1,2],[2,1]]}"#);
    for alg in ["brute", "transfer", "components"] {
        let o = run(&["hom", "--graph", "c4.json", "--target", "h.json", "--algorithm", alg], d);
        assert!(o.status.success());
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert!((v["log_value"].as_f64().unwrap().exp() - 82.0).abs() < 1e-9, "{alg}");
    }
}

#[test]
fn quotient_and_partition_set() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "k2.txt", "# n=2\n0 1\n");
    let o = run(&["quotient", "--graph", "k2.txt", "--colors", "1,2", "--k", "2", "--format", "csv"], d);
    assert_eq!(stdout(&o), "x1,x2,X1_1,X1_2,X2_1,X2_2\n1/2,1/2,0/1,1/2,1/2,0/1\n");
    let o = run(&["partition-set", "--graph", "k2.txt", "--k", "2"], d);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["points"].as_array().unwrap().len(), 3);
    let o = run(&["partition-set", "--graph", "k2.txt", "--k", "2", "--against", "k2.txt"], d);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["distance"], "0/1");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "c5.txt", "# n=5\n0 1\n1 2\n2 3\n3 4\n4 0\n");
    write(d, "hc.json", r#"{"alpha":[1,1],"A":[[0,1],[1,0]]}"#);
    let o = run(&["witness", "--graph", "c5.txt", "--target", "hc.json", "--epsilon", "0.2", "--lambda", "0.01"], d);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["removed_edges"].as_array().unwrap().len(), 1);
    // One deleted edge on five vertices exceeds ε n when ε is tiny.
    let o = run(&["witness", "--graph", "c5.txt", "--target", "hc.json", "--epsilon", "0.01", "--lambda", "0.01"], d);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["partition-set", "--graph", "c5.txt", "--k", "3", "--budget", "10"], d);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["hom", "--graph", "missing.txt", "--target", "hc.json"], d);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["scenario", "no-such-scenario"], d);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["no-such-command"], d);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn scenario_bundle_with_config_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let config = "# union of paths\nseed = 5\nscenario = \"union-ld\"\n\n[params]\ncopies = [4, 8]\n";
    write(d, "run.toml", config);
    let a = run(&["scenario", "--config", "run.toml", "--out", "a"], d);
    let b = run(&["scenario", "--config", "run.toml", "--out", "b"], d);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(std::fs::read_to_string(d.join("a/config.toml")).unwrap(), config);
    let mut names: Vec<_> = std::fs::read_dir(d.join("a")).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    for name in &names {
        let x = std::fs::read(d.join("a").join(name)).unwrap();
        let y = std::fs::read(d.join("b").join(name)).unwrap();
        assert_eq!(x, y, "{name:?}");
    }
    assert!(names.len() > 2);
    let summary: serde_json::Value = serde_json::from_str(&stdout(&b)).unwrap();
    assert_eq!(summary["seed"], 5);
    assert_eq!(summary["passed"], true);
}

#[test]
fn scenario_out_of_budget_is_truncated() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["scenario", "c4c6-partition-not-left", "--budget", "2", "--out", "t"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let summary: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(summary["truncated"].is_string());
}

#[test]
fn scenario_list_names_all_eight() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["scenario", "--list"], dir.path());
    assert_eq!(stdout(&o).lines().count(), 8);
}

#[test]
fn neighborhood_frequencies_sum_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "p3.txt", "# n=3\n0 1\n1 2\n");
    let o = run(&["neighborhood", "--graph", "p3.txt", "--r", "1", "--table", "table.json"], d);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let entries = v["entries"].as_object().unwrap();
    let mut vals: Vec<&str> = entries.values().map(|x| x.as_str().unwrap()).collect();
    vals.sort();
    assert_eq!(vals, ["1/3", "2/3"]);
    assert!(d.join("table.json").exists());
}

#[test]
fn variational_and_gibbs_pass_on_soft_target() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "k2s.txt", "# n=8\n0 1\n2 3\n4 5\n6 7\n");
    write(d, "h.json", r#"{"alpha":[1,2],"A":[[1.5,0.5],[0.5,2]]}"#);
    let o = run(&["variational", "--graph", "k2s.txt", "--target", "h.json", "--delta", "1/8"], d);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["variational", "--graph", "k2s.txt", "--target", "h.json", "--delta", "1/8", "--gibbs", "--format", "csv"], d);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("lower,exact,upper"));
}

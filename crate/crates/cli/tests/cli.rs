use std::process::{Command, Output};

fn wb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wb"))
        .args(args)
        .env_remove("WB_SIZE_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn frame_json_has_five_layers_and_full_covers() {
    let o = wb(&["frame", "--p", "2", "--d", "2", "--trunc", "2", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let nodes = v["nodes"].as_array().unwrap();
    let mut sizes: Vec<&str> = nodes.iter().map(|n| n["size"].as_str().unwrap()).collect();
    sizes.dedup();
    assert_eq!(sizes, ["1", "2", "4", "8", "16"]);
    // Nodes whose quotient exponents stay below 2 have p + 1 = 3 covers.
    let covers = v["covers"].as_array().unwrap();
    for id in [0, 1, 2, 3, 5] {
        assert_eq!(covers[id].as_array().unwrap().len(), 3, "node {id}");
    }
}

#[test]
fn dot_output_is_a_digraph() {
    let o = wb(&["frame", "--dihedral", "3", "--format", "dot"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("digraph"));
    assert!(s.contains("->"));
}

#[test]
fn nondomain_suite_passes() {
    let o = wb(&["verify", "nondomain", "--p", "3", "--d", "2", "--trunc", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn failing_suite_exits_one() {
    // A cyclic frame has no linked pairs, so the suite cannot pass.
    let o = wb(&["verify", "linked", "--d", "1", "--trunc", "3", "--trials", "2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(wb(&["frame", "--p", "7"]).status.code(), Some(2));
    assert_eq!(wb(&["frame", "--p", "4", "--any-prime"]).status.code(), Some(2));
    assert_eq!(wb(&["verify", "nilpotent", "--p", "2"]).status.code(), Some(2));
    assert_eq!(wb(&["verify", "bogus"]).status.code(), Some(2));
    let o = wb(&["witt", "add", "--p", "2", "--d", "1", "--trunc", "1", "--a", "1,x", "--b", "0,0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--a"));
    assert_eq!(wb(&["frame", "--p", "7", "--any-prime", "--d", "1", "--trunc", "1"]).status.code(), Some(0));
}

#[test]
fn classical_sum_polynomials() {
    let o = wb(&["poly", "--p", "2", "--d", "1", "--trunc", "2", "--kind", "sum"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("S_0 = X0+Y0"));
    // Solves S_0^2 + 2 S_1 = X0^2 + 2 X1 + Y0^2 + 2 Y1.
    assert!(s.contains("S_1 = -X0*Y0+X1+Y1"));
}

#[test]
fn size_cap_from_environment() {
    let run = |cap: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_wb"));
        c.args(["poly", "--p", "2", "--d", "1", "--trunc", "3", "--kind", "product"]);
        match cap {
            Some(v) => c.env("WB_SIZE_CAP", v),
            None => c.env_remove("WB_SIZE_CAP"),
        };
        c.output().unwrap()
    };
    assert_eq!(stdout(&run(None)).lines().count(), 3);
    assert_eq!(stdout(&run(Some("8"))).lines().count(), 4);
    assert_eq!(run(Some("16")).status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let args = ["verify", "reduced", "--p", "2", "--trunc", "3", "--seed", "5", "--trials", "6", "--json"];
    assert_eq!(wb(&args).stdout, wb(&args).stdout);
    let args = ["frame", "--p", "3", "--d", "2", "--trunc", "2", "--json"];
    assert_eq!(wb(&args).stdout, wb(&args).stdout);
}

#[test]
fn witt_vectors_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.json");
    let p = path.to_str().unwrap();
    let o = wb(&[
        "witt", "mul", "--p", "3", "--d", "2", "--trunc", "1", "--a", "1,2,0,1,1,2", "--b", "2,2,1,0,0,1", "--json",
        "--out", p,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let written: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let at = format!("@{p}");
    let again = wb(&["witt", "add", "--p", "3", "--d", "2", "--trunc", "1", "--a", &at, "--b", "0,0,0,0,0,0", "--json"]);
    let reread: serde_json::Value = serde_json::from_str(&stdout(&again)).unwrap();
    assert_eq!(written, reread);
}

#[test]
fn witt_operations() {
    let o = wb(&["witt", "add", "--p", "2", "--d", "1", "--trunc", "3", "--a", "1,0,0,0", "--b", "1,0,0,0"]);
    assert_eq!(stdout(&o).trim(), "(0, 1, 0, 0)");
    let o = wb(&["witt", "ghost", "--ring", "z", "--p", "2", "--d", "1", "--trunc", "2", "--a", "1,1,1"]);
    assert_eq!(stdout(&o).trim(), "(1, 3, 7)");
    let o = wb(&["witt", "ghostinv", "--ring", "z", "--p", "2", "--d", "1", "--trunc", "1", "--a", "0,1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = wb(&["witt", "inv", "--p", "2", "--d", "1", "--trunc", "1", "--a", "1,1"]);
    assert_eq!(stdout(&o).trim(), "(1, 1)");
    let o = wb(&["witt", "teich", "--p", "3", "--d", "1", "--trunc", "2", "--node", "1", "--value", "5"]);
    assert_eq!(stdout(&o).trim(), "(0, 2, 0)");
    let o = wb(&["witt", "ideal", "--p", "2", "--d", "1", "--trunc", "2", "--a", "0,1,0", "--value", "2", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["member"], true);
}

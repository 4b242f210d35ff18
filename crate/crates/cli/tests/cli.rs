use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn iabc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iabc")).current_dir(dir).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn generate(dir: &Path, family: &str, n: &str, name: &str) {
    let o = iabc(dir, &["generate", family, "--n", n, "--out", name]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

fn setup() -> TempDir {
    let t = TempDir::new().unwrap();
    generate(t.path(), "complete", "4", "k4.json");
    generate(t.path(), "complete", "3", "k3.json");
    t
}

#[test]
fn check_exit_codes() {
    let t = setup();
    let ok = iabc(t.path(), &["check", "--graph", "k4.json", "--f-total", "1"]);
    assert_eq!(code(&ok), 0);
    assert_eq!(stdout_json(&ok)["holds"], true);

    let bad = iabc(t.path(), &["check", "--graph", "k3.json", "--f-total", "1"]);
    assert_eq!(code(&bad), 1);
    let w = &stdout_json(&bad)["witness"];
    assert_eq!(w["left"].as_array().unwrap().len(), 1);
    assert_eq!(w["right"].as_array().unwrap().len(), 1);
    assert_eq!(w["fault_set"].as_array().unwrap().len(), 1);
}

#[test]
fn malformed_input_exits_2() {
    let t = setup();
    fs::write(t.path().join("bad.json"), "{\"n\": 3, \"edges\": [[1, 2]").unwrap();
    assert_eq!(code(&iabc(t.path(), &["check", "--graph", "bad.json", "--f-total", "1"])), 2);
    fs::write(t.path().join("loop.json"), r#"{"n": 3, "edges": [[2, 2]]}"#).unwrap();
    assert_eq!(code(&iabc(t.path(), &["check", "--graph", "loop.json", "--f-total", "1"])), 2);
    assert_eq!(code(&iabc(t.path(), &["check", "--graph", "missing.json", "--f-total", "1"])), 2);
    assert_eq!(code(&iabc(t.path(), &["check", "--graph", "k4.json"])), 2);
    assert_eq!(code(&iabc(t.path(), &["check", "--graph", "k4.json", "--f-total", "1", "--f-local", "1"])), 2);
    assert_eq!(code(&iabc(t.path(), &["frobnicate"])), 2);
}

#[test]
fn four_node_example_domain() {
    let t = TempDir::new().unwrap();
    let o = iabc(t.path(), &["generate", "four-node-example", "--out", "g.json", "--domain-out", "d.json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(t.path().join("d.json"))["sets"], serde_json::json!([[1], [2, 3, 4]]));
    let o = iabc(t.path(), &["check", "--graph", "g.json", "--domain", "d.json"]);
    assert_eq!(code(&o), 1, "three simultaneous faults out of four cannot be tolerated");
}

#[test]
fn generate_families() {
    let t = TempDir::new().unwrap();
    generate(t.path(), "complete", "4", "k4.json");
    generate(t.path(), "cycle", "3", "c3.json");
    generate(t.path(), "random(0,7)", "5", "r0.json");
    generate(t.path(), "random(0.5,7)", "6", "ra.json");
    generate(t.path(), "random(0.5,7)", "6", "rb.json");
    let edges = |f: &str| json(t.path().join(f))["edges"].as_array().unwrap().len();
    assert_eq!(edges("k4.json"), 12);
    assert_eq!(edges("c3.json"), 3);
    assert_eq!(edges("r0.json"), 0);
    assert_eq!(fs::read(t.path().join("ra.json")).unwrap(), fs::read(t.path().join("rb.json")).unwrap());
    assert_eq!(code(&iabc(t.path(), &["generate", "path", "--n", "1"])), 1);
    assert_eq!(code(&iabc(t.path(), &["generate", "star", "--n", "4"])), 2);
}

#[test]
fn generated_graph_round_trips() {
    let t = TempDir::new().unwrap();
    generate(t.path(), "random(0.4,3)", "7", "g.json");
    let text = fs::read_to_string(t.path().join("g.json")).unwrap();
    let g = iabc::DirectedGraph::from_json(&text).unwrap();
    assert_eq!(g, iabc::DirectedGraph::random(7, 0.4, 3).unwrap());
    let again = iabc::json::to_string_pretty(&g).unwrap() + "\n";
    assert_eq!(again, text);
}

#[test]
fn mimic_matches_fault_free_run() {
    let t = setup();
    let common = ["--graph", "k4.json", "--f-total", "1", "--inputs", "3,-1,4,1.5", "--rounds", "40"];
    let run = |extra: &[&str], out: &str| {
        let mut args = vec!["simulate"];
        args.extend_from_slice(&common);
        args.extend_from_slice(extra);
        args.extend_from_slice(&["--out", out]);
        assert_eq!(code(&iabc(t.path(), &args)), 0);
        json(t.path().join(out).join("trace.json"))
    };
    let mimic = run(&["--faulty", "{2}", "--adversary", "mimic"], "mimic");
    let clean = run(&[], "clean");
    for r in 0..40 {
        let a = &mimic["records"][r]["states_after"];
        let b = &clean["records"][r]["states_after"];
        for (node, v) in a.as_object().unwrap() {
            assert_eq!(v, &b[node], "round {} node {node}", r + 1);
        }
    }
}

#[test]
fn splitter_from_witness_pins_spread() {
    let t = setup();
    let o = iabc(t.path(), &["check", "--graph", "k3.json", "--f-total", "1", "--out", "report.json"]);
    assert_eq!(code(&o), 1);
    let o = iabc(
        t.path(),
        &["simulate", "--graph", "k3.json", "--f-total", "1", "--from-witness", "report.json", "--out", "run"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = stdout_json(&o);
    assert_eq!(summary["final_spread"].as_f64().unwrap(), 1.0);
    assert!(summary["converged_at"].is_null());

    let cert = iabc(t.path(), &["certify", "--trace", "run/trace.json", "--out", "cert.json"]);
    assert_eq!(code(&cert), 1);
    let c = json(t.path().join("cert.json"));
    let status = |name: &str| {
        c["properties"].as_array().unwrap().iter().find(|p| p["name"] == name).unwrap()["status"].clone()
    };
    assert_eq!(status("validity"), "pass");
    assert_eq!(status("block_scrambling"), "not_applicable");
}

#[test]
fn zero_rounds_keeps_initial_states() {
    let t = setup();
    let o = iabc(t.path(), &["simulate", "--graph", "k4.json", "--f-total", "1", "--rounds", "0", "--out", "z"]);
    assert_eq!(code(&o), 0);
    let trace = json(t.path().join("z/trace.json"));
    assert!(trace["records"].as_array().unwrap().is_empty());
    let csv = fs::read_to_string(t.path().join("z/trace.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4);
    assert!(csv.lines().skip(1).all(|l| l.starts_with("0,")));
}

#[test]
fn infeasible_faulty_set_exits_1() {
    let t = setup();
    let o = iabc(t.path(), &["simulate", "--graph", "k4.json", "--f-total", "1", "--faulty", "{1,2}", "--out", "x"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not a feasible fault set"));
}

#[test]
fn runs_are_byte_reproducible() {
    let t = setup();
    let args = |out: &'static str| {
        vec![
            "simulate", "--graph", "k4.json", "--f-total", "1", "--faulty", "3", "--adversary", "random(-5,5)",
            "--seed", "42", "--rounds", "30", "--out", out,
        ]
    };
    assert_eq!(code(&iabc(t.path(), &args("a"))), 0);
    assert_eq!(code(&iabc(t.path(), &args("a2"))), 0);
    for f in ["trace.json", "trace.csv"] {
        assert_eq!(fs::read(t.path().join("a").join(f)).unwrap(), fs::read(t.path().join("a2").join(f)).unwrap());
    }
    let m = json(t.path().join("a/manifest.json"));
    assert_eq!(m["command"], "simulate");
    assert_eq!(m["seed"], 42);
    assert_eq!(m["inputs"]["graph"], "k4.json");
}

#[test]
fn certify_pass_short_and_tampered() {
    let t = setup();
    let o = iabc(
        t.path(),
        &["simulate", "--graph", "k4.json", "--f-total", "1", "--faulty", "4", "--adversary", "constant(10)",
          "--rounds", "300", "--out", "long"],
    );
    assert_eq!(code(&o), 0);
    let ok = iabc(t.path(), &["certify", "--trace", "long/trace.json"]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    let c = stdout_json(&ok);
    assert_eq!(c["passed"], true);
    let bound = 1.0 - c["beta"].as_f64().unwrap().powi(c["block_length"].as_u64().unwrap() as i32);
    for b in c["blocks"].as_array().unwrap() {
        let l = b["lambda"].as_f64().unwrap();
        assert!(l < 1.0 && l <= bound + 1e-9);
    }

    let o = iabc(
        t.path(),
        &["simulate", "--graph", "k4.json", "--f-total", "1", "--faulty", "4", "--rounds", "2", "--out", "short"],
    );
    assert_eq!(code(&o), 0);
    let short = iabc(t.path(), &["certify", "--trace", "short/trace.json"]);
    assert_eq!(code(&short), 1);
    let msg = String::from_utf8_lossy(&short.stderr);
    assert!(msg.contains("needs at least"), "{msg}");

    let path = t.path().join("long/trace.json");
    let mut trace = json(path.clone());
    let v = trace["records"][3]["states_after"]["2"].as_f64().unwrap();
    trace["records"][3]["states_after"]["2"] = serde_json::json!(v + 0.25);
    fs::write(&path, serde_json::to_string(&trace).unwrap()).unwrap();
    let bad = iabc(t.path(), &["certify", "--trace", "long/trace.json", "--out", "bad.json"]);
    assert_eq!(code(&bad), 1);
    let c = json(t.path().join("bad.json"));
    let rec = c["properties"].as_array().unwrap().iter().find(|p| p["name"] == "reconstruction").unwrap();
    assert_eq!(rec["status"], "fail");
}

#[test]
fn sweep_covers_every_maximal_fault_set() {
    let t = setup();
    let o = iabc(t.path(), &["sweep", "--graph", "k4.json", "--f-total", "1", "--rounds", "200", "--seed", "5"]);
    assert_eq!(code(&o), 0);
    let s = stdout_json(&o);
    assert_eq!(s["condition_holds"], true);
    assert_eq!(s["runs"].as_array().unwrap().len(), 4 * 5);
    assert_eq!(s["all_converged"], true);
    assert_eq!(s["all_valid"], true);
    let again = iabc(t.path(), &["sweep", "--graph", "k4.json", "--f-total", "1", "--rounds", "200", "--seed", "5"]);
    assert_eq!(o.stdout, again.stdout);
}

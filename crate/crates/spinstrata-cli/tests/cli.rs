//! End-to-end tests of the `spinstrata` binary: exit codes and JSON output.

use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinstrata"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn spin_class_evaluates_genus_one() {
    let out = run(&["spin-class", "--mu", "4,-2,-2", "--g", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["status"], "evaluated");
    assert!(doc["solve"]["unknowns"].as_u64().unwrap() > 0);
    assert!(!doc["class"]["terms"].as_array().unwrap().is_empty());
}

#[test]
fn paired_simple_poles_give_minus_fundamental() {
    let out = run(&["spin-class", "--mu", "0,-1,-1", "--g", "0", "--pair", "2,3"]);
    assert_eq!(out.status.code(), Some(0));
    let terms = json(&out)["class"]["terms"].as_array().unwrap().clone();
    assert_eq!(terms.len(), 1);
    assert_eq!(terms[0]["coeff"], "-1");
    assert!(terms[0]["graph"]["edges"].as_array().unwrap().is_empty());
}

#[test]
fn higher_genus_is_symbolic() {
    for (mu, g) in [("6", "4"), ("2", "2")] {
        let out = run(&["spin-class", "--mu", mu, "--g", g]);
        assert_eq!(out.status.code(), Some(2), "mu={mu}");
        assert_eq!(json(&out)["status"], "symbolic");
    }
}

#[test]
fn spin_dr_with_even_entry_fails() {
    let out = run(&["dr", "--a", "2,0", "--g", "1", "--spin"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_arguments_fail() {
    assert_eq!(run(&["spin-class", "--mu", "4,x", "--g", "1"]).status.code(), Some(1));
    assert_eq!(run(&["spin-class", "--mu", "4,-2,-2"]).status.code(), Some(1));
    assert_eq!(
        run(&["spin-class", "--mu", "4,-2,-2", "--g", "1", "--res", "3=0"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
}

#[test]
fn conjecture_check_matches() {
    let out = run(&["dr", "--a", "3,-1", "--g", "1", "--spin", "--check-conjecture", "--mu", "2,-2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["conjecture"]["result"], "match");
    let out = run(&["conjecture-check", "--mu", "4,-4", "--g", "1"]);
    assert_eq!(json(&out)["conjecture"]["result"], "match");
}

#[test]
fn dr_genus_zero_is_fundamental() {
    let out = run(&["dr", "--a", "1,1,1,-1", "--g", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let terms = json(&out)["class"]["terms"].as_array().unwrap().clone();
    assert_eq!(terms.len(), 1);
    assert_eq!(terms[0]["coeff"], "1");
}

#[test]
fn output_is_deterministic() {
    let args = ["spin-class", "--mu", "4,-2,-2", "--g", "1", "--res", "3:0"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn clutch_pull_lists_and_uses_graphs() {
    let out = run(&["clutch-pull", "--mu", "2,-2", "--g", "1", "--graph", "nonsense"]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8(out.stderr).unwrap();
    let ids: Vec<String> = msg
        .split("available: ")
        .nth(1)
        .unwrap()
        .trim()
        .split(" | ")
        .map(str::to_string)
        .collect();
    assert_eq!(ids.len(), 2);
    for id in ids {
        let out = run(&["clutch-pull", "--mu", "2,-2", "--g", "1", "--graph", &id]);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(json(&out)["status"], "evaluated");
    }
}

#[test]
fn spin_classify_reports_each_graph() {
    let out = run(&["spin-classify", "--mu", "4,-2,-2", "--g", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let graphs = json(&out)["graphs"].as_array().unwrap().clone();
    assert!(!graphs.is_empty());
    for g in graphs {
        let kind = g["kind"].as_str().unwrap();
        assert!(kind == "half" || kind == "constant");
        assert!(g["prong_classes"].as_i64().unwrap() >= 1);
        let kappas: Vec<i64> = g["graph"]["edges"]
            .as_array()
            .unwrap()
            .iter()
            .map(|e| e[2].as_i64().unwrap())
            .collect();
        assert_eq!(kind == "half", kappas.iter().any(|k| k % 2 == 0));
    }
}

#[test]
fn levelgraphs_lists_both_kinds() {
    let out = run(&["levelgraphs", "--mu", "4,-2,-2", "--g", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert!(!doc["two_level"].as_array().unwrap().is_empty());
    assert!(!doc["horizontal"].as_array().unwrap().is_empty());
}

use std::process::{Command, Output};

use graphheat::gen::{random_bounded_degree, RandomParams};
use graphheat::io::{graph_to_json, parse_graph};
use proptest::prelude::*;

fn graphheat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphheat")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn gen_is_deterministic() {
    let args = ["gen", "--generator", "random:n=40,degree=5,seed=11"];
    let (a, b) = (graphheat(&args), graphheat(&args));
    assert_eq!(code(&a), 0);
    assert_eq!(stdout(&a), stdout(&b));
    let g = parse_graph(&stdout(&a)).unwrap();
    assert_eq!(g.vertex_count(), 40);
}

#[test]
fn compute_on_lattice_window() {
    let args = ["compute", "--generator", "lattice:radius=40", "--pairs", "0:0", "--t", "1", "--format", "csv"];
    let out = graphheat(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let value: f64 = row[3].parse().unwrap();
    let bound: f64 = row[7].parse().unwrap();
    // e^{-2} I_0(2)
    assert!((value - 0.308508322553671).abs() <= 1e-12 + bound);
    assert!(bound <= 1e-10);
    assert_eq!(text, stdout(&graphheat(&args)));
}

#[test]
fn compute_writes_to_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.json");
    let out = graphheat(&[
        "compute", "--generator", "pair", "--pairs", "a:b", "--t", "1", "--format", "json", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v.to_string().contains("0.43233235"), "{text}");
}

#[test]
fn validate_pair_passes() {
    let out = graphheat(&["validate", "--generator", "pair", "--checks", "mass,symmetry", "--t", "0.5,1"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn forced_low_order_fails_mass() {
    let out = graphheat(&[
        "validate", "--generator", "pair", "--checks", "mass", "--mass-route", "gaussian", "--series-order", "1",
        "--t", "1",
    ]);
    assert_eq!(code(&out), 1, "{}", stdout(&out));
}

#[test]
fn compare_against_closed_form() {
    let out = graphheat(&["compare", "--generator", "lattice:radius=40", "--pairs", "0:0,0:3", "--t", "0.5,1"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"tol": 1e-8, "no_such_field": 1}"#).unwrap();
    assert_eq!(code(&graphheat(&["compute", "--config", cfg.to_str().unwrap()])), 2);
    assert_eq!(code(&graphheat(&["compute", "--generator", "pair", "--pairs", "a:zz"])), 2);
    assert_eq!(code(&graphheat(&["compute", "--generator", "pair", "--pairs", "a:b", "--tol", "-1"])), 2);
}

#[test]
fn small_window_exits_3() {
    let out = graphheat(&["compute", "--generator", "lattice:radius=3", "--pairs", "0:0", "--t", "1"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("frontier"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn graph_json_round_trip(n in 2usize..60, deg in 2usize..7, seed in any::<u64>()) {
        let g = random_bounded_degree(RandomParams { n, max_degree: deg, seed, ..RandomParams::default() }).unwrap();
        let back = parse_graph(&graph_to_json(&g)).unwrap();
        prop_assert_eq!(back.labels(), g.labels());
        prop_assert_eq!(back.thetas(), g.thetas());
        for x in 0..n {
            let a: Vec<_> = g.neighbors(x).collect();
            let b: Vec<_> = back.neighbors(x).collect();
            prop_assert_eq!(a, b);
        }
    }
}

#[test]
fn validate_dense_random_graph_at_long_times() {
    // A ≈ 12: long times need stepped evaluation, and the residual and
    // small-time checks need their asymptotic gates
    let out = graphheat(&[
        "validate", "--generator", "random:n=60,degree=5,seed=9", "--checks", "mass,oracle,residual,small_time", "--t",
        "0.5,5",
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

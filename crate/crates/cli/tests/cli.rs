use std::process::{Command, Output};

use serde_json::Value;

fn lacuna(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lacuna"))
        .args(args)
        .env_remove("LACUNA_MAX_INTERVALS")
        .output()
        .expect("binary runs")
}

fn lacuna_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lacuna"))
        .args(args)
        .env(key, value)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(out)))
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

/// `(p, q)` from `"p/q"`.
fn pq(v: &Value) -> (u128, u128) {
    let s = v.as_str().expect("string");
    let (p, q) = s.split_once('/').expect("p/q");
    (p.parse().unwrap(), q.parse().unwrap())
}

/// `‖n p/q‖` as a numerator over `q`.
fn dist_num(n: u128, p: u128, q: u128) -> u128 {
    let r = (n * p) % q;
    r.min(q - r)
}

#[test]
fn chromatic_of_interval_set() {
    let out = lacuna(&["chromatic", "--s", "1,2,3,4,5", "--window", "0:15"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "6");
}

#[test]
fn chromatic_reads_bare_list_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    std::fs::write(&path, "[1, 2, 3]").unwrap();
    let out = lacuna(&["chromatic", "--s-file", path.to_str().unwrap(), "--window", "0:9"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "4");
}

#[test]
fn gamma_bracket_contains_one_third() {
    let out = lacuna(&["gamma", "--h", "1,2", "--grid", "256"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let lo = v["gamma_lower"].as_f64().unwrap();
    let hi = v["gamma_upper"].as_f64().unwrap();
    assert!(lo - 1e-6 <= 1.0 / 3.0 && 1.0 / 3.0 <= hi + 1e-6, "[{lo}, {hi}]");
}

#[test]
fn pipeline_certificate_checks_out() {
    let out = lacuna(&["pipeline", "--epsilon", "1/8", "--count", "60"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let cert = json(&out);
    assert_eq!(cert["n"], 60);

    let seq = json(&lacuna(&["gen", "--epsilon", "1/8", "--count", "60"]));
    let terms: Vec<u128> = seq["terms"].as_array().unwrap().iter().map(|t| t.as_u64().unwrap() as u128).collect();
    let (p, q) = pq(&cert["theta"]);
    let min = terms.iter().map(|&n| dist_num(n, p, q)).min().unwrap();
    let (vp, vq) = pq(&cert["value"]);
    // value = min / q exactly, in lowest terms.
    assert_eq!(min * vq, vp * q);
    let (dp, dq) = pq(&cert["delta"]);
    assert!(vp * dq >= dp * vq);
}

#[test]
fn outputs_are_deterministic_across_threads_and_panes() {
    let a = lacuna(&["--threads", "1", "pipeline", "--epsilon", "1/8", "--count", "60"]);
    let b = lacuna(&["--threads", "4", "pipeline", "--epsilon", "1/8", "--count", "60", "--panes", "8"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&lacuna(&["pipeline", "--epsilon", "1/8"])), 2);
    assert_eq!(code(&lacuna(&["pipeline", "--epsilon", "1/0", "--count", "5"])), 2);
    assert_eq!(code(&lacuna(&["pipeline", "--epsilon", "0.125", "--count", "5"])), 2);
    assert_eq!(code(&lacuna(&["chromatic", "--s", "1,2", "--window", "5:1"])), 2);
    assert_eq!(code(&lacuna(&["find-theta", "--terms", "1,2", "--method", "nope"])), 2);
    assert_eq!(code(&lacuna(&["find-theta", "--terms", "1,2", "--exact", "--grid", "4"])), 2);
    assert_eq!(code(&lacuna(&["no-such-command"])), 2);
    assert_eq!(code(&lacuna(&["--help"])), 0);
}

#[test]
fn failed_checks_exit_one() {
    let out = lacuna(&["validate", "--terms", "1,2,3", "--epsilon", "3/5"]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["valid"], false);
    assert_eq!(code(&lacuna(&["warmup", "--terms", "1,2,4"])), 1);
    assert_eq!(code(&lacuna(&["pipeline", "--epsilon", "1/2", "--count", "5"])), 1);
}

#[test]
fn interval_cap_comes_from_the_environment() {
    let args = ["survivor", "--epsilon", "1/8", "--count", "60"];
    assert_eq!(code(&lacuna_env(&args, "LACUNA_MAX_INTERVALS", "16")), 1);
    assert_eq!(code(&lacuna_env(&args, "LACUNA_MAX_INTERVALS", "many")), 2);
    assert_eq!(code(&lacuna_env(&args, "LACUNA_MAX_INTERVALS", "4194304")), 0);
}

#[test]
fn survivor_matches_pipeline() {
    let a = lacuna(&["survivor", "--epsilon", "1/8", "--count", "60"]);
    let b = lacuna(&["pipeline", "--epsilon", "1/8", "--count", "60"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn survivor_overrides_are_validated() {
    assert_eq!(code(&lacuna(&["survivor", "--terms", "1,2,4,8", "--m", "2"])), 1);
    // 40 C1 c0 must stay at most 1.
    assert_eq!(code(&lacuna(&["survivor", "--terms", "1,2,4,8", "--m", "5", "--c1", "7"])), 1);
    let out = lacuna(&["survivor", "--terms", "1,2,4,8", "--m", "5", "--c1", "7", "--c0", "1/300"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["n"], 4);
}

#[test]
fn warmup_value_is_at_least_a_quarter() {
    let out = lacuna(&["warmup", "--terms", "1,5,26,131,656"]);
    assert_eq!(code(&out), 0);
    let (p, q) = pq(&json(&out)["value"]);
    assert!(4 * p >= q);
}

#[test]
fn find_theta_strategies_agree_with_the_oracle() {
    let exact = json(&lacuna(&["find-theta", "--terms", "1,2,4,8,16,32", "--exact"]));
    assert_eq!(exact["theta"], "1/3");
    assert_eq!(exact["min_value"], "1/3");
    let grid = json(&lacuna(&["find-theta", "--terms", "1,2", "--grid", "3"]));
    assert_eq!(grid["theta"], "1/3");
    for method in ["grid", "survivor", "exact"] {
        let out = lacuna(&["find-theta", "--terms", "1,5,26,131", "--method", method]);
        assert_eq!(code(&out), 0, "{method}");
        let v = json(&out);
        let (p, q) = pq(&v["theta"]);
        let min = [1u128, 5, 26, 131].iter().map(|&n| dist_num(n, p, q)).min().unwrap();
        let (vp, vq) = pq(&v["min_value"]);
        assert_eq!(min * vq, vp * q, "{method}");
    }
}

#[test]
fn color_then_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("c.csv");
    let csv = csv.to_str().unwrap();
    let out = lacuna(&["color", "--method", "bohr", "--epsilon", "1/2", "--count", "12", "--window", "-2000:2000", "-o", csv]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let seq = json(&lacuna(&["gen", "--epsilon", "1/2", "--count", "12"]));
    let s: Vec<String> = seq["terms"].as_array().unwrap().iter().map(|t| t.to_string()).collect();
    let verdict = lacuna(&["verify-color", "--coloring", csv, "--s", &s.join(",")]);
    assert_eq!(code(&verdict), 0);
    assert_eq!(json(&verdict)["proper"], true);

    let bad_csv = dir.path().join("bad.csv");
    std::fs::write(&bad_csv, "n,color\n-1,0\n0,1\n1,0\n2,1\n").unwrap();
    let bad = lacuna(&["verify-color", "--coloring", bad_csv.to_str().unwrap(), "--s", "1,2"]);
    assert_eq!(code(&bad), 1);
    let v = json(&bad);
    assert_eq!(v["proper"], false);
    assert_eq!(v["violation"], serde_json::json!([-1, 1]));
}

#[test]
fn color_from_theta_csv() {
    let out = lacuna(&["color", "--theta", "1/3", "--delta", "1/4", "--window", "0:2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "n,color\n0,0\n1,1\n2,2\n");
}

#[test]
fn delta_and_ruzsa() {
    let d = json(&lacuna(&["delta", "--h", "1,2", "--period", "9"]));
    assert_eq!(d["density"], "1/3");
    let r = lacuna(&["check-ruzsa", "--h", "1,2,3", "--period", "120", "--grid", "256"]);
    assert_eq!(code(&r), 0);
    let v = json(&r);
    assert_eq!(v["density"], "1/4");
    assert_eq!(v["passed"], true);
}

#[test]
fn ruzsa_suite_records_its_seed() {
    let out = lacuna(&["check-ruzsa", "--random", "5", "--seed", "7", "--grid", "128"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["seed"], 7);
    assert_eq!(v["cases"], 13);
    assert_eq!(v["passed"], true);
}

#[test]
fn corollary_on_powers_of_two() {
    let out = lacuna(&["corollary41", "--terms", "1,2,4,8,16,32,64,128"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["report"]["passed"], true);
    assert_eq!(v["report"]["grid"], 1024);
}

#[test]
fn report_csv_shape() {
    let out = lacuna(&["report", "--epsilons", "1/8,1/16"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    let width = lines[0].split(',').count();
    assert!(lines[0].starts_with("epsilon,span,delta,value,colors"));
    assert!(lines.iter().all(|l| l.split(',').count() == width));
    assert!(lines[1].starts_with("1/8,6,1/3735,"));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("seq.json");
    let out = lacuna(&["gen", "--epsilon", "1", "--count", "5", "-o", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["terms"], serde_json::json!([1, 3, 7, 15, 31]));
    assert_eq!(v["epsilon"], "1/1");

    let back = lacuna(&["validate", "--input", path.to_str().unwrap()]);
    assert_eq!(code(&back), 0);
    assert_eq!(json(&back)["doubling_span"], 1);
}

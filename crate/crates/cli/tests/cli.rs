use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn rforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rforge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

const K4: &str = "n 4\n0\t1\t1\n0\t2\t1\n0\t3\t1\n1\t2\t1\n1\t3\t1\n2\t3\t1\n";

#[test]
fn single_edge_sparsifies_to_itself() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.txt", "n 2\n0\t1\t1.0\n");
    let h = path(&dir, "h.txt");
    let out = rforge(&["sparsify-graph", "-i", &g, "-o", &h, "--eps", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["status"], "ok");
    assert_eq!(r["result"]["ordered_support"], 2);
    assert_eq!(r["result"]["quality"]["min_quotient"], 1.0);
    assert_eq!(r["result"]["quality"]["max_quotient"], 1.0);
    assert_eq!(fs::read_to_string(&h).unwrap(), "n 2\n0\t1\t1.0000000000000000e0\n");
}

#[test]
fn verify_graph_against_itself() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.txt", K4);
    let out = rforge(&["verify", "--g", &g, "--h", &g, "--eps", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!((r["result"]["min_quotient"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
    assert!((r["result"]["max_quotient"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
}

#[test]
fn verify_probe_mode_reports_scaling_range() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.txt", K4);
    let out = rforge(&[
        "verify",
        "--g",
        &g,
        "--h",
        &g,
        "--p",
        "3",
        "--eps",
        "0.5",
        "--probe-count",
        "20",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["quality"], 1.0);
    assert_eq!(r["result"]["probe_count"], 20);
}

#[test]
fn verify_fails_certification_on_a_poor_sparsifier() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.txt", K4);
    let h = write(&dir, "h.txt", "n 4\n0\t1\t1\n1\t2\t1\n2\t3\t1\n0\t3\t1\n");
    let out = rforge(&["verify", "--g", &g, "--h", &h, "--eps", "0.1"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["status"], "certification_failure");
    assert!(r["error"].as_str().unwrap().contains("outside"));
}

#[test]
fn sparsify_then_verify_round_trip() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.txt", K4);
    let h = path(&dir, "h.txt");
    assert_eq!(
        rforge(&["sparsify-graph", "-i", &g, "-o", &h, "--eps", "0.7"])
            .status
            .code(),
        Some(0)
    );
    let out = rforge(&["verify", "--g", &g, "--h", &h, "--eps", "0.7"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn cycle_demo_reports_the_lower_bound() {
    let out = rforge(&["cycle-demo", "--n", "5", "--p", "2", "--q", "4", "--eps", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let res = &r["result"];
    assert!(res["q_quality_lower_bound"].as_f64().unwrap() >= 8.0);
    assert_eq!(res["q_quality_analytic"], 8.0);
    assert!(res["p_quality"].as_f64().unwrap() <= 1.5 + 1e-9);
    assert_eq!(res["probe_count"], 502);
}

#[test]
fn reports_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.txt", K4);
    let a = rforge(&["sparsify-graph", "-i", &g, "--eps", "0.5"]);
    let b = rforge(&["sparsify-graph", "-i", &g, "--eps", "0.5"]);
    assert_eq!(a.stdout, b.stdout);
    let c = rforge(&["cycle-demo", "--seed", "7"]);
    let d = Command::new(env!("CARGO_BIN_EXE_rforge"))
        .args(["cycle-demo", "--seed", "7"])
        .env("RFORGE_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(c.stdout, d.stdout);
}

#[test]
fn timing_is_opt_in() {
    let out = rforge(&["cycle-demo"]);
    assert!(report(&out).get("wall_clock_seconds").is_none());
    let timed = rforge(&["cycle-demo", "--timing"]);
    assert!(report(&timed)["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn parse_errors_exit_with_input_status() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.txt", "n 3\n0 1 1\n1 0 2\n");
    let out = rforge(&["sparsify-graph", "-i", &g, "--eps", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    assert_eq!(r["status"], "input_error");
    assert!(r["error"].as_str().unwrap().contains("line 3"));
}

#[test]
fn bad_arguments_exit_with_input_status() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.txt", K4);
    assert_eq!(
        rforge(&["sparsify-graph", "-i", &g, "--eps", "1.5"]).status.code(),
        Some(2)
    );
    assert_eq!(
        rforge(&["sparsify-graph", "-i", "/nonexistent/g.txt", "--eps", "0.5"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn report_can_go_to_a_file() {
    let dir = TempDir::new().unwrap();
    let rep = path(&dir, "report.json");
    let out = rforge(&["cycle-demo", "--report", &rep]);
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(r["command"], "cycle-demo");
}

#[test]
fn frame_weights_and_certificate() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "f.txt", "4 2\n1 0\n0 1\n1 1\n1 -1\n");
    let w = path(&dir, "w.txt");
    let out = rforge(&["sparsify-frame", "-i", &f, "-o", &w, "--eps", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r["result"]["support"].as_u64().unwrap() <= 8);
    let lines = fs::read_to_string(&w).unwrap();
    assert!(lines.lines().all(|l| l.split('\t').count() == 2));
    let cert: Value = serde_json::from_str(&fs::read_to_string(format!("{w}.cert.json")).unwrap()).unwrap();
    assert!(cert["certified_min"].as_f64().unwrap() >= 0.25 - 1e-8);
}

#[test]
fn ri_select_on_the_identity() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from("8 8\n");
    for i in 0..8 {
        let row: Vec<&str> = (0..8).map(|j| if i == j { "1" } else { "0" }).collect();
        text.push_str(&row.join(" "));
        text.push('\n');
    }
    let t = write(&dir, "t.txt", &text);
    let sel = path(&dir, "sel.txt");
    let out = rforge(&["ri-select", "-i", &t, "-o", &sel, "--eps", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["sigma"].as_array().unwrap().len(), 2);
    assert_eq!(fs::read_to_string(&sel).unwrap().lines().count(), 2);
}

#[test]
fn l1_embedding_writes_points() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.txt", "4 2\n0 0\n1 0\n0 2\n3 1\n");
    let z = path(&dir, "z.txt");
    let out = rforge(&["embed-l1", "-i", &p, "-o", &z, "--eps", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r["result"]["max_distortion"].as_f64().unwrap() <= 1.5 + 1e-8);
    assert!(fs::read_to_string(&z).unwrap().starts_with("4 "));
}

#[test]
fn lp_embedding_samples_distortion() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from("10 2\n");
    for i in 0..10 {
        text.push_str(&format!("{} {}\n", (i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()));
    }
    let b = write(&dir, "b.txt", &text);
    let out = rforge(&["embed-lp", "-i", &b, "--p", "4", "--eps", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r["result"]["dim"].as_u64().unwrap() <= 3);
    assert!(r["result"]["sampled_max_distortion"].as_f64().unwrap() <= 1.5f64.powf(0.25) + 1e-8);
}

#[test]
fn john_approximation_round_trip() {
    let dir = TempDir::new().unwrap();
    let j = write(&dir, "j.txt", "4 3\n0.5 1 0\n0.5 -1 0\n0.5 0 1\n0.5 0 -1\n");
    let o = path(&dir, "o.txt");
    let out = rforge(&["john-approx", "-i", &j, "-o", &o, "--eps", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["center_of_mass"], 0.0);
    assert!(r["result"]["identity_residual"].as_f64().unwrap() <= 1e-8);
    assert!(Path::new(&o).exists());
}

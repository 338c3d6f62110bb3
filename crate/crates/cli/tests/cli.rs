//! End-to-end runs of the `epinet` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn epinet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epinet")).args(args).env("EPINET_THREADS", "1").output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = epinet(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_fit_predict_summary() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    ok(&["simulate", "--m", "15", "--known-proportion", "0.2", "--seed", "3", "--out", s(&sim)]);
    for f in ["epidemic.csv", "known_edges.csv", "true_graph.csv"] {
        assert!(sim.join(f).exists(), "{f}");
    }

    let fit = dir.path().join("fit");
    let epi = sim.join("epidemic.csv");
    let known = sim.join("known_edges.csv");
    let args = [
        "fit", "--data", s(&epi), "--known-edges", s(&known), "--iterations", "400", "--burnin", "100", "--seed", "5",
        "--out", s(&fit),
    ];
    ok(&args);
    let trace = fs::read_to_string(fit.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 301);
    assert_eq!(fs::read_to_string(fit.join("edge_probs.csv")).unwrap().lines().count(), 1 + 15 * 14 / 2);

    let again = dir.path().join("again");
    let mut args2 = args;
    args2[12] = s(&again);
    ok(&args2);
    for f in ["trace.csv", "summary.csv", "edge_probs.csv"] {
        assert_eq!(fs::read(fit.join(f)).unwrap(), fs::read(again.join(f)).unwrap(), "{f}");
    }

    let pred = dir.path().join("pred");
    let tr = fit.join("trace.csv");
    ok(&["predict", "--data", s(&epi), "--trace", s(&tr), "--n-sims", "50", "--seed", "2", "--out", s(&pred)]);
    let bands = fs::read_to_string(pred.join("predictive_bands.csv")).unwrap();
    assert_eq!(bands.lines().count(), 201);

    let sum = dir.path().join("sum");
    let table = ok(&["summary", "--data", s(&epi), "--trace", s(&tr), "--out", s(&sum)]);
    assert!(table.starts_with("epidemic,m,beta,mu,correlation,alpha\n1,15,"));
}

#[test]
fn brg_model_and_free_gamma() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    ok(&["simulate", "--model", "brg", "--m", "20", "--p", "0.2", "--seed", "1", "--out", s(&sim)]);
    let epi = sim.join("epidemic.csv");
    let brg = dir.path().join("brg");
    ok(&["fit", "--data", s(&epi), "--model", "brg", "--iterations", "200", "--burnin", "50", "--out", s(&brg)]);
    assert!(fs::read_to_string(brg.join("trace.csv")).unwrap().starts_with("iter,beta,p,log_joint\n"));

    let free = dir.path().join("free");
    ok(&["fit", "--data", s(&epi), "--fix-gamma", "none", "--iterations", "200", "--burnin", "50", "--out", s(&free)]);
    let trace = fs::read_to_string(free.join("trace.csv")).unwrap();
    let gammas: Vec<&str> = trace.lines().skip(1).map(|l| l.split(',').nth(3).unwrap()).collect();
    assert!(gammas.iter().any(|g| *g != gammas[0]));
}

#[test]
fn study_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.cfg");
    fs::write(&cfg, "m_values = 10\nknown_proportions = 0, 1\niterations = 150\nburnin = 50\nseed = 4\n").unwrap();
    let out = dir.path().join("study");
    ok(&["study", "--config", s(&cfg), "--out", s(&out)]);
    let results = fs::read_to_string(out.join("study_results.csv")).unwrap();
    assert!(results.lines().count() > 2);
    assert!(out.join("cell_0001/trace.csv").exists());
}

#[test]
fn bad_inputs_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "iteratons = 10\n").unwrap();
    let out = epinet(&["study", "--config", s(&cfg), "--out", s(dir.path())]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key"));

    let missing = dir.path().join("none.csv");
    let out = epinet(&["fit", "--data", s(&missing), "--out", s(dir.path())]);
    assert!(!out.status.success());

    let out = epinet(&["fit", "--data", s(&missing), "--fix-gamma", "abc", "--out", s(dir.path())]);
    assert!(!out.status.success());
}

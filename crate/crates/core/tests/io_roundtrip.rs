//! File formats: round trips, malformed inputs and configuration parsing.

use std::fs;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use epinet::analysis::{edge_posterior, summarize_trace};
use epinet::io::{self, parse_config, SummaryRow};
use epinet::mcmc::{run_chain, McmcConfig, ModelKind};
use epinet::study::{run_study, simulate_cell_data, StudyGrid};
use epinet::types::Priors;
use epinet::Error;

#[test]
fn epidemic_and_known_edges_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let sim = simulate_cell_data(25, 0.4, 4.0, 0.0, 0.3, &mut rng).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let epi = dir.path().join("epidemic.csv");
    let known = dir.path().join("known.csv");
    io::write_epidemic_csv(&epi, &sim.data).unwrap();
    io::write_known_edges_csv(&known, &sim.data.known_edges).unwrap();
    let back = io::load_dataset(&epi, Some(&known)).unwrap();
    assert_eq!(back.times, sim.data.times);
    assert_eq!(back.tree, sim.data.tree);
    assert_eq!(back.known_edges, sim.data.known_edges);

    let first = fs::read_to_string(&epi).unwrap();
    assert!(first.starts_with("node_id,infection_time,infector_id\n1,0,\n"));
}

#[test]
fn unordered_labels_are_relabelled_on_load() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e.csv");
    fs::write(&path, "node_id,infection_time,infector_id\nc,9.0,a\na,5.0,\nb,7.5,a\n").unwrap();
    let d = io::load_epidemic_csv(&path).unwrap();
    assert_eq!(d.times, vec![0.0, 2.5, 4.0]);
    assert_eq!(d.tree.infector(1), Some(0));
    assert_eq!(d.tree.infector(2), Some(0));
}

#[test]
fn malformed_inputs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e.csv");
    fs::write(&path, "node_id,infection_time,infector_id\n1,0,\n2,1.0,1\n3,1.0,1\n").unwrap();
    assert!(io::load_epidemic_csv(&path).is_err());
    fs::write(&path, "node_id,infection_time,infector_id\n1,0,\n2,abc,1\n").unwrap();
    assert!(io::load_epidemic_csv(&path).is_err());
    fs::write(&path, "node_id,infection_time,infector_id\n1,0,\n2,1.0,7\n").unwrap();
    assert!(io::load_epidemic_csv(&path).is_err());

    let known = dir.path().join("k.csv");
    fs::write(&known, "i,j,present\n1,9,1\n").unwrap();
    assert!(io::load_known_edges_csv(&known, 3).is_err());
    fs::write(&known, "i,j,present\n1,2,2\n").unwrap();
    assert!(io::load_known_edges_csv(&known, 3).is_err());
    assert!(matches!(io::load_epidemic_csv(&dir.path().join("missing.csv")), Err(Error::Io { .. })));
}

#[test]
fn trace_summary_and_edge_files() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let sim = simulate_cell_data(12, 0.4, 3.0, 0.0, 0.0, &mut rng).unwrap();
    let config = McmcConfig { iterations: 300, burnin: 100, ..McmcConfig::default() };
    let trace = run_chain(&sim.data, &Priors::default(), &config, &mut rng).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    io::write_trace(&path, &trace).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("iter,beta,mu,gamma,alpha,log_joint\n"));
    assert_eq!(text.lines().count(), trace.kept() + 1);
    let back = io::load_trace_csv(&path, 12).unwrap();
    assert_eq!(back.beta, trace.beta);
    assert_eq!(back.mu, trace.mu);
    assert_eq!(back.gamma, trace.gamma);
    assert_eq!(back.iteration, trace.iteration);

    let summary = summarize_trace(&back).unwrap();
    let sp = dir.path().join("summary.csv");
    io::write_summary(&sp, &[SummaryRow { epidemic: "7".into(), m: 12, summary }]).unwrap();
    let s = fs::read_to_string(&sp).unwrap();
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("epidemic,m,beta,mu,correlation,alpha"));
    assert!(lines.next().unwrap().starts_with("7,12,"));

    let probs = edge_posterior(&trace).unwrap();
    let ep = dir.path().join("edges.csv");
    io::write_edge_probs(&ep, &probs).unwrap();
    let rows = fs::read_to_string(&ep).unwrap().lines().count() - 1;
    assert_eq!(rows, 12 * 11 / 2);
    assert_eq!(probs.len(), rows);
}

#[test]
fn brg_trace_has_its_own_columns() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let sim = simulate_cell_data(10, 0.4, 3.0, 0.0, 0.0, &mut rng).unwrap();
    let config = McmcConfig { iterations: 200, burnin: 50, model: ModelKind::Brg, ..McmcConfig::default() };
    let trace = run_chain(&sim.data, &Priors::default(), &config, &mut rng).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    io::write_trace(&path, &trace).unwrap();
    assert!(fs::read_to_string(&path).unwrap().starts_with("iter,beta,p,log_joint\n"));
    let back = io::load_trace_csv(&path, 10).unwrap();
    assert_eq!(back.model, ModelKind::Brg);
    assert_eq!(back.p, trace.p);
}

#[test]
fn config_parsing() {
    let c = parse_config(
        "# chain\niterations = 500\nburnin=100\nfix_gamma = none\nseed = 42\nmodel = brg\n\
         m_values = 30, 50\nknown_proportions = 0, 0.5\na_beta = 2 # inline\n",
    )
    .unwrap();
    assert_eq!(c.mcmc.iterations, 500);
    assert_eq!(c.mcmc.burnin, 100);
    assert_eq!(c.mcmc.fix_gamma, None);
    assert_eq!(c.mcmc.seed, 42);
    assert_eq!(c.mcmc.model, ModelKind::Brg);
    assert_eq!(c.study.m_values, vec![30, 50]);
    assert_eq!(c.study.known_proportions, vec![0.0, 0.5]);
    assert_eq!(c.priors.a_beta, 2.0);

    for bad in ["iteratons = 5", "iterations", "iterations = many", "b_mu = -1", "random_scan = maybe", "model = er"] {
        assert!(parse_config(bad).is_err(), "{bad}");
    }
}

#[test]
fn invalid_chain_settings_are_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let sim = simulate_cell_data(8, 0.4, 3.0, 0.0, 0.0, &mut rng).unwrap();
    for config in [
        McmcConfig { iterations: 100, burnin: 100, ..McmcConfig::default() },
        McmcConfig { target_accept: 1.0, ..McmcConfig::default() },
        McmcConfig { fix_gamma: Some(1.5), ..McmcConfig::default() },
    ] {
        assert!(run_chain(&sim.data, &Priors::default(), &config, &mut rng).is_err());
    }
}

#[test]
fn study_writes_deterministic_outputs() {
    let grid = StudyGrid {
        m_values: vec![10],
        known_proportions: vec![0.0, 1.0],
        chain: McmcConfig { iterations: 200, burnin: 50, seed: 3, ..McmcConfig::default() },
        ..StudyGrid::default()
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run_study(&grid, Some(a.path())).unwrap();
    run_study(&grid, Some(b.path())).unwrap();
    assert_eq!(ra.cells.len(), 2);
    assert_eq!(ra.failures().count(), 0);
    for f in ["study_results.csv", "study_failures.csv", "cell_0000/trace.csv", "cell_0001/known_edges.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let results = fs::read_to_string(a.path().join("study_results.csv")).unwrap();
    assert!(results.lines().skip(1).all(|l| l.starts_with("0,") || l.starts_with("1,")));
}

//! Simulation studies: simulate an epidemic for every grid cell, reveal a
//! proportion of the non-tree pairs, fit, and compare posteriors with the
//! true values.

use std::path::Path;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::{alpha, summarize_trace, PosteriorSummary};
use crate::episim::simulate_si;
use crate::error::{Error, Result};
use crate::io::{create_dir, write_text, write_trace};
use crate::mcmc::{run_chain, McmcConfig};
use crate::netgen::generate_pa_network;
use crate::types::{EpidemicData, Graph, KnownEdges, NetworkOrder, Priors};

/// Environment variable capping worker threads for studies and predictive
/// simulation.
pub const THREADS_ENV: &str = "EPINET_THREADS";

/// Cartesian grid of true values and known proportions.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyGrid {
    pub m_values: Vec<usize>,
    pub beta_values: Vec<f64>,
    pub mu_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    /// Fractions of non-tree pairs revealed to the sampler.
    pub known_proportions: Vec<f64>,
    pub replicates: usize,
    pub chain: McmcConfig,
    pub priors: Priors,
}

impl Default for StudyGrid {
    fn default() -> Self {
        Self {
            m_values: vec![70],
            beta_values: vec![0.4],
            mu_values: vec![6.0],
            gamma_values: vec![0.0],
            known_proportions: vec![0.0],
            replicates: 1,
            chain: McmcConfig::default(),
            priors: Priors::default(),
        }
    }
}

/// One simulate-and-fit task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSpec {
    pub index: usize,
    /// Cells that differ only in the known proportion share a scenario, and
    /// with it the simulated network and epidemic.
    pub scenario: usize,
    pub m: usize,
    pub beta: f64,
    pub mu: f64,
    pub gamma: f64,
    pub proportion: f64,
    pub replicate: usize,
}

impl StudyGrid {
    pub fn validate(&self) -> Result<()> {
        if self.known_proportions.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Config("known proportions must lie in [0, 1]".into()));
        }
        if self.m_values.iter().any(|&m| m < 3) {
            return Err(Error::Config("study populations need at least three nodes".into()));
        }
        if self.beta_values.iter().chain(&self.mu_values).any(|&v| !(v > 0.0)) {
            return Err(Error::Config("true beta and mu values must be positive".into()));
        }
        if self.gamma_values.iter().any(|g| !(0.0..=1.0).contains(g)) {
            return Err(Error::Config("true gamma values must lie in [0, 1]".into()));
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        self.chain.validate()?;
        self.priors.validate()
    }

    /// All cells in row-major order over m, beta, mu, gamma, replicate and
    /// proportion.
    pub fn cells(&self) -> Vec<CellSpec> {
        let mut out = Vec::new();
        let mut scenario = 0;
        for &m in &self.m_values {
            for &beta in &self.beta_values {
                for &mu in &self.mu_values {
                    for &gamma in &self.gamma_values {
                        for replicate in 0..self.replicates {
                            for &proportion in &self.known_proportions {
                                let index = out.len();
                                out.push(CellSpec { index, scenario, m, beta, mu, gamma, proportion, replicate });
                            }
                            scenario += 1;
                        }
                    }
                }
            }
        }
        out
    }
}

/// Simulated truth for one cell, with labels in infection order.
#[derive(Debug, Clone)]
pub struct SimulatedStudyData {
    pub graph: Graph,
    pub data: EpidemicData,
}

/// Grows a network with identity order, runs an epidemic from the first
/// entrant, relabels by infection order and reveals `proportion` of the
/// non-tree pairs, chosen uniformly.
pub fn simulate_cell_data(
    m: usize,
    beta: f64,
    mu: f64,
    gamma: f64,
    proportion: f64,
    rng: &mut ChaCha8Rng,
) -> Result<SimulatedStudyData> {
    let (g, _) = generate_pa_network(m, mu, gamma, &NetworkOrder::identity(m), rng)?;
    let epi = simulate_si(&g, beta, 0, rng)?;
    let graph = epi.relabel_graph(&g);
    let mut free = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            if !epi.tree.contains(i, j) {
                free.push((i, j));
            }
        }
    }
    let reveal = ((proportion * free.len() as f64).round() as usize).min(free.len());
    let mut chosen: Vec<usize> = sample(rng, free.len(), reveal).into_vec();
    chosen.sort_unstable();
    let mut known = KnownEdges::new();
    for k in chosen {
        let (i, j) = free[k];
        known.insert(i, j, graph.has_edge(i, j));
    }
    let data = EpidemicData::new(epi.times, epi.tree, known)?;
    Ok(SimulatedStudyData { graph, data })
}

/// Outcome of one cell.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub spec: CellSpec,
    /// Seed of the cell's random stream, shared within a scenario. It drives
    /// the simulation, the choice of revealed pairs and the chain.
    pub seed: u64,
    pub true_edges: usize,
    pub outcome: std::result::Result<PosteriorSummary, String>,
}

#[derive(Debug, Clone)]
pub struct StudyReport {
    pub cells: Vec<CellResult>,
}

impl StudyReport {
    pub fn failures(&self) -> impl Iterator<Item = &CellResult> {
        self.cells.iter().filter(|c| c.outcome.is_err())
    }
}

fn cell_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn run_cell(grid: &StudyGrid, spec: CellSpec, out_dir: Option<&Path>) -> CellResult {
    let seed = cell_seed(grid.chain.seed, spec.scenario);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut true_edges = 0;
    let outcome = (|| -> Result<PosteriorSummary> {
        let sim = simulate_cell_data(spec.m, spec.beta, spec.mu, spec.gamma, spec.proportion, &mut rng)?;
        true_edges = sim.graph.edge_count();
        let trace = run_chain(&sim.data, &grid.priors, &grid.chain, &mut rng)?;
        if let Some(dir) = out_dir {
            let cell_dir = create_dir(&dir.join(format!("cell_{:04}", spec.index)))?;
            crate::io::write_epidemic_csv(&cell_dir.join("epidemic.csv"), &sim.data)?;
            crate::io::write_known_edges_csv(&cell_dir.join("known_edges.csv"), &sim.data.known_edges)?;
            crate::io::write_graph_csv(&cell_dir.join("true_graph.csv"), &sim.graph)?;
            write_trace(&cell_dir.join("trace.csv"), &trace)?;
        }
        summarize_trace(&trace)
    })()
    .map_err(|e| e.to_string());
    CellResult { spec, seed, true_edges, outcome }
}

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Runs `f` on a pool capped by [`THREADS_ENV`], or on the global pool.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    match thread_cap().and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

/// Runs every cell, in parallel, and writes per-cell files plus
/// `study_results.csv` (true value, posterior mean and central 95% interval
/// per parameter) and `study_failures.csv` under `out_dir` when given.
/// A failing cell is recorded and the study continues.
pub fn run_study(grid: &StudyGrid, out_dir: Option<&Path>) -> Result<StudyReport> {
    grid.validate()?;
    if let Some(dir) = out_dir {
        create_dir(dir)?;
    }
    let cells = grid.cells();
    let results: Vec<CellResult> =
        with_thread_cap(|| cells.par_iter().map(|&spec| run_cell(grid, spec, out_dir)).collect());
    let report = StudyReport { cells: results };
    if let Some(dir) = out_dir {
        write_text(&dir.join("study_results.csv"), &results_table(&report))?;
        let mut failures = String::from("cell,seed,error\n");
        for c in report.failures() {
            let msg = c.outcome.as_ref().err().map(|s| s.replace(['\n', ','], " ")).unwrap_or_default();
            failures.push_str(&format!("{},{},{}\n", c.spec.index, c.seed, msg));
        }
        write_text(&dir.join("study_failures.csv"), &failures)?;
    }
    Ok(report)
}

/// Long-format table: one row per cell and parameter.
pub fn results_table(report: &StudyReport) -> String {
    let mut out = String::from("cell,scenario,m,beta,mu,gamma,proportion,replicate,seed,true_edges,param,true,mean,lower,upper\n");
    for c in &report.cells {
        let Ok(s) = &c.outcome else { continue };
        let sp = &c.spec;
        let mut rows = vec![("beta", sp.beta, s.beta)];
        if let Some(e) = s.edges {
            rows.push(("edges", c.true_edges as f64, e));
        }
        if let (Some(mu), Some(g), Some(a)) = (s.mu, s.gamma, s.alpha) {
            rows.push(("mu", sp.mu, mu));
            rows.push(("gamma", sp.gamma, g));
            rows.push(("alpha", alpha(sp.beta, sp.mu), a));
        }
        for (name, truth, ps) in rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                sp.index, sp.scenario, sp.m, sp.beta, sp.mu, sp.gamma, sp.proportion, sp.replicate, c.seed, c.true_edges, name,
                truth, ps.mean, ps.lower, ps.upper
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_cartesian() {
        let grid = StudyGrid {
            m_values: vec![30, 50],
            mu_values: vec![4.0, 6.0, 8.0],
            known_proportions: vec![0.0, 1.0],
            replicates: 2,
            ..StudyGrid::default()
        };
        let cells = grid.cells();
        assert_eq!(cells.len(), 2 * 3 * 2 * 2);
        assert!(cells.iter().enumerate().all(|(k, c)| c.index == k));
        assert_eq!(cells.iter().map(|c| c.scenario).max(), Some(2 * 3 * 2 - 1));
        assert_eq!(cells[0].scenario, cells[1].scenario);
        assert_ne!(cells[0].proportion, cells[1].proportion);
    }

    #[test]
    fn proportions_share_the_epidemic() {
        let seed = cell_seed(5, 0);
        let a = simulate_cell_data(15, 0.4, 3.0, 0.0, 0.0, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let b = simulate_cell_data(15, 0.4, 3.0, 0.0, 1.0, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        assert_eq!(a.graph, b.graph);
        assert_eq!(a.data.times, b.data.times);
        assert!(a.data.known_edges.is_empty() && !b.data.known_edges.is_empty());
    }

    #[test]
    fn revealed_pairs_match_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sim = simulate_cell_data(20, 0.4, 3.0, 0.0, 0.5, &mut rng).unwrap();
        let free = 20 * 19 / 2 - 19;
        assert_eq!(sim.data.known_edges.len(), (0.5 * free as f64).round() as usize);
        for ((i, j), present) in sim.data.known_edges.iter() {
            assert_eq!(sim.graph.has_edge(i, j), present);
            assert!(!sim.data.tree.contains(i, j));
        }
        let all = simulate_cell_data(12, 0.4, 3.0, 0.0, 1.0, &mut rng).unwrap();
        assert_eq!(all.data.known_edges.len(), 66 - 11);
    }

    #[test]
    fn bad_proportion_rejected() {
        let grid = StudyGrid { known_proportions: vec![1.5], ..StudyGrid::default() };
        assert!(grid.validate().is_err());
    }
}

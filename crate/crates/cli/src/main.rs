//! `epinet`: simulate network epidemics, fit the latent-network model and
//! summarize the results.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use epinet::analysis::{edge_posterior, posterior_predictive_curves, summarize_trace, time_grid};
use epinet::episim::{cumulative_curve, simulate_si};
use epinet::io::{self, RunConfig, SummaryRow};
use epinet::mcmc::{run_chain, ModelKind};
use epinet::netgen::generate_brg;
use epinet::study::{run_study, simulate_cell_data, with_thread_cap};
use epinet::types::{EpidemicData, KnownEdges};

#[derive(Parser)]
#[command(name = "epinet", version, about = "SI epidemics on latent preferential-attachment networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a network and an epidemic on it.
    Simulate(SimulateArgs),
    /// Fit a network model to an observed epidemic.
    Fit(FitArgs),
    /// Posterior predictive bands for the cumulative infection curve.
    Predict(PredictArgs),
    /// Summarize a saved trace as a table row.
    Summary(SummaryArgs),
    /// Run a simulate-and-fit study over a grid of true values.
    Study(StudyArgs),
}

#[derive(Args)]
struct Common {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 70)]
    m: usize,
    #[arg(long, default_value_t = 0.4)]
    beta: f64,
    #[arg(long, default_value_t = 6.0)]
    mu: f64,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    /// Edge probability for the random graph model.
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    #[arg(long, default_value = "pa")]
    model: ModelKind,
    /// Fraction of non-tree pairs written to known_edges.csv.
    #[arg(long, default_value_t = 0.0)]
    known_proportion: f64,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    known_edges: Option<PathBuf>,
    #[arg(long)]
    model: Option<ModelKind>,
    /// Pinned mixing weight, or `none` to sample it.
    #[arg(long)]
    fix_gamma: Option<String>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    burnin: Option<usize>,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    data: PathBuf,
    /// Trace written by `fit`.
    #[arg(long)]
    trace: PathBuf,
    #[arg(long)]
    n_sims: Option<usize>,
}

#[derive(Args)]
struct SummaryArgs {
    #[command(flatten)]
    common: Common,
    /// Trace written by `fit`.
    #[arg(long)]
    trace: PathBuf,
    /// Epidemic the trace was fitted to, for the population size.
    #[arg(long)]
    data: PathBuf,
    /// Label for the epidemic column.
    #[arg(long, default_value = "1")]
    label: String,
}

#[derive(Args)]
struct StudyArgs {
    #[command(flatten)]
    common: Common,
}

fn load_run_config(common: &Common) -> Result<RunConfig> {
    let mut config = match &common.config {
        Some(p) => io::load_config(p).with_context(|| format!("reading config {}", p.display()))?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.mcmc.seed = seed;
    }
    Ok(config)
}

fn out_dir(path: &Path) -> Result<PathBuf> {
    Ok(io::create_dir(path)?)
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let config = load_run_config(&args.common)?;
    let dir = out_dir(&args.common.out)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.mcmc.seed);
    match args.model {
        ModelKind::Pa => {
            let sim = simulate_cell_data(args.m, args.beta, args.mu, args.gamma, args.known_proportion, &mut rng)?;
            io::write_epidemic_csv(&dir.join("epidemic.csv"), &sim.data)?;
            io::write_known_edges_csv(&dir.join("known_edges.csv"), &sim.data.known_edges)?;
            io::write_graph_csv(&dir.join("true_graph.csv"), &sim.graph)?;
            println!("simulated m = {} with {} edges", args.m, sim.graph.edge_count());
        }
        ModelKind::Brg => {
            let g = loop {
                let g = generate_brg(args.m, args.p, &mut rng)?;
                if g.is_connected() {
                    break g;
                }
            };
            let epi = simulate_si(&g, args.beta, 0, &mut rng)?;
            let graph = epi.relabel_graph(&g);
            let data = EpidemicData::new(epi.times, epi.tree, KnownEdges::new())?;
            io::write_epidemic_csv(&dir.join("epidemic.csv"), &data)?;
            io::write_graph_csv(&dir.join("true_graph.csv"), &graph)?;
            println!("simulated m = {} with {} edges", args.m, graph.edge_count());
        }
    }
    Ok(())
}

fn parse_fix_gamma(v: &str) -> Result<Option<f64>> {
    match v.to_ascii_lowercase().as_str() {
        "none" | "free" => Ok(None),
        s => Ok(Some(s.parse().with_context(|| format!("--fix-gamma expects a number or none, got {v:?}"))?)),
    }
}

fn fit(args: FitArgs) -> Result<()> {
    let mut config = load_run_config(&args.common)?;
    let c = &mut config.mcmc;
    if let Some(m) = args.model {
        c.model = m;
    }
    if let Some(v) = &args.fix_gamma {
        c.fix_gamma = parse_fix_gamma(v)?;
    }
    if let Some(n) = args.iterations {
        c.iterations = n;
    }
    if let Some(n) = args.burnin {
        c.burnin = n;
    }
    let data = io::load_dataset(&args.data, args.known_edges.as_deref())
        .with_context(|| format!("loading {}", args.data.display()))?;
    let dir = out_dir(&args.common.out)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.mcmc.seed);
    let trace = run_chain(&data, &config.priors, &config.mcmc, &mut rng)?;
    io::write_trace(&dir.join("trace.csv"), &trace)?;
    let summary = summarize_trace(&trace)?;
    io::write_summary(&dir.join("summary.csv"), &[SummaryRow { epidemic: "1".into(), m: data.m(), summary }])?;
    io::write_edge_probs(&dir.join("edge_probs.csv"), &edge_posterior(&trace)?)?;
    let a = &trace.acceptance;
    println!(
        "kept {} draws; acceptance mu {:.3} gamma {:.3} order {:.3}",
        trace.kept(),
        a.mu.rate(),
        a.gamma.rate(),
        a.sigma.rate()
    );
    Ok(())
}

fn predict(args: PredictArgs) -> Result<()> {
    let config = load_run_config(&args.common)?;
    let data = io::load_epidemic_csv(&args.data)?;
    let trace = io::load_trace_csv(&args.trace, data.m())?;
    if trace.kept() == 0 {
        bail!("trace {} has no draws", args.trace.display());
    }
    let n_sims = args.n_sims.unwrap_or(config.predict.n_sims);
    let grid = time_grid(data.span(), config.predict.grid_points);
    let mut rng = ChaCha8Rng::seed_from_u64(config.mcmc.seed);
    let bands = with_thread_cap(|| posterior_predictive_curves(&trace, data.m(), &grid, n_sims, &mut rng))?;
    let observed = cumulative_curve(&data.times, &grid);
    let dir = out_dir(&args.common.out)?;
    io::write_bands(&dir.join("predictive_bands.csv"), &bands, Some(&observed))?;
    println!("observed curve inside the 95% band at {:.1}% of grid points", 100.0 * bands.coverage(&observed));
    Ok(())
}

fn summary(args: SummaryArgs) -> Result<()> {
    let data = io::load_epidemic_csv(&args.data)?;
    let trace = io::load_trace_csv(&args.trace, data.m())?;
    let summary = summarize_trace(&trace)?;
    let dir = out_dir(&args.common.out)?;
    let path = dir.join("summary.csv");
    io::write_summary(&path, &[SummaryRow { epidemic: args.label, m: data.m(), summary }])?;
    print!("{}", std::fs::read_to_string(&path)?);
    Ok(())
}

fn study(args: StudyArgs) -> Result<()> {
    let config = load_run_config(&args.common)?;
    let mut grid = config.study.clone();
    grid.chain = config.mcmc.clone();
    grid.priors = config.priors;
    let dir = out_dir(&args.common.out)?;
    let report = run_study(&grid, Some(&dir))?;
    let failed = report.failures().count();
    println!("{} cells, {} failed; results in {}", report.cells.len(), failed, dir.join("study_results.csv").display());
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate(a) => simulate(a),
        Command::Fit(a) => fit(a),
        Command::Predict(a) => predict(a),
        Command::Summary(a) => summary(a),
        Command::Study(a) => study(a),
    }
}

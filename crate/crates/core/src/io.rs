//! CSV input and output, and the flat `key = value` configuration format.
//!
//! Node labels in files are 1-based; in memory they are 0-based.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::analysis::{EdgeProbabilities, PosteriorSummary, PredictiveBands};
use crate::error::{Error, Result};
use crate::mcmc::{McmcConfig, ModelKind, Trace};
use crate::study::StudyGrid;
use crate::types::{normalize_and_relabel, EpidemicData, Graph, KnownEdges, Priors, RawRecord};

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path, source: csv::Error) -> Error {
    match source.position() {
        Some(pos) if !source.is_io_error() => {
            Error::Parse { path: path.to_path_buf(), line: pos.line(), message: source.to_string() }
        }
        _ => Error::Csv { path: path.to_path_buf(), source },
    }
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn finish(path: &Path, mut w: csv::Writer<File>) -> Result<()> {
    w.flush().map_err(|e| io_err(path, e))
}

#[derive(Debug, Deserialize)]
struct EpidemicRow {
    node_id: String,
    infection_time: f64,
    infector_id: Option<String>,
}

#[derive(Debug, Deserialize)]
struct KnownRow {
    i: usize,
    j: usize,
    present: u8,
}

/// Reads `node_id,infection_time,infector_id` rows and normalizes them.
pub fn load_epidemic_csv(path: &Path) -> Result<EpidemicData> {
    let mut rdr = reader(path)?;
    let mut raw = Vec::new();
    for row in rdr.deserialize::<EpidemicRow>() {
        let row = row.map_err(|e| csv_err(path, e))?;
        raw.push(RawRecord {
            id: row.node_id,
            time: row.infection_time,
            infector: row.infector_id.filter(|s| !s.is_empty()),
        });
    }
    normalize_and_relabel(&raw)
}

/// Reads `i,j,present` rows with 1-based epidemic labels.
pub fn load_known_edges_csv(path: &Path, m: usize) -> Result<KnownEdges> {
    let mut rdr = reader(path)?;
    let mut known = KnownEdges::new();
    for (k, row) in rdr.deserialize::<KnownRow>().enumerate() {
        let row = row.map_err(|e| csv_err(path, e))?;
        let line = k as u64 + 2;
        let bad = |message: String| Error::Parse { path: path.to_path_buf(), line, message };
        if row.i == 0 || row.j == 0 || row.i > m || row.j > m || row.i == row.j {
            return Err(bad(format!("pair ({}, {}) is not a pair of labels in 1..={m}", row.i, row.j)));
        }
        if row.present > 1 {
            return Err(bad(format!("present must be 0 or 1, got {}", row.present)));
        }
        known.insert(row.i - 1, row.j - 1, row.present == 1);
    }
    Ok(known)
}

/// Loads an epidemic and, optionally, known pairs, then validates both
/// together.
pub fn load_dataset(epidemic: &Path, known_edges: Option<&Path>) -> Result<EpidemicData> {
    let data = load_epidemic_csv(epidemic)?;
    match known_edges {
        None => Ok(data),
        Some(p) => {
            let known = load_known_edges_csv(p, data.m())?;
            EpidemicData::new(data.times, data.tree, known)
        }
    }
}

pub fn write_epidemic_csv(path: &Path, data: &EpidemicData) -> Result<()> {
    let mut w = writer(path)?;
    let e = |err| csv_err(path, err);
    w.write_record(["node_id", "infection_time", "infector_id"]).map_err(e)?;
    for j in 0..data.m() {
        let infector = data.tree.infector(j).map(|i| (i + 1).to_string()).unwrap_or_default();
        w.write_record([(j + 1).to_string(), data.times[j].to_string(), infector]).map_err(e)?;
    }
    finish(path, w)
}

pub fn write_known_edges_csv(path: &Path, known: &KnownEdges) -> Result<()> {
    let mut w = writer(path)?;
    let e = |err| csv_err(path, err);
    w.write_record(["i", "j", "present"]).map_err(e)?;
    for ((i, j), present) in known.iter() {
        w.write_record([(i + 1).to_string(), (j + 1).to_string(), (present as u8).to_string()]).map_err(e)?;
    }
    finish(path, w)
}

/// Present edges as `i,j` with 1-based labels.
pub fn write_graph_csv(path: &Path, g: &Graph) -> Result<()> {
    let mut w = writer(path)?;
    let e = |err| csv_err(path, err);
    w.write_record(["i", "j"]).map_err(e)?;
    for (i, j) in g.edges() {
        w.write_record([(i + 1).to_string(), (j + 1).to_string()]).map_err(e)?;
    }
    finish(path, w)
}

/// `iter,beta,mu,gamma,alpha,log_joint` for the attachment model and
/// `iter,beta,p,log_joint` for the random graph model.
pub fn write_trace(path: &Path, trace: &Trace) -> Result<()> {
    if trace.kept() == 0 {
        return Err(Error::invalid("trace has no kept draws"));
    }
    let mut w = writer(path)?;
    let e = |err| csv_err(path, err);
    match trace.model {
        ModelKind::Pa => {
            w.write_record(["iter", "beta", "mu", "gamma", "alpha", "log_joint"]).map_err(e)?;
            for k in 0..trace.kept() {
                w.write_record([
                    trace.iteration[k].to_string(),
                    trace.beta[k].to_string(),
                    trace.mu[k].to_string(),
                    trace.gamma[k].to_string(),
                    crate::analysis::alpha(trace.beta[k], trace.mu[k]).to_string(),
                    trace.log_joint[k].to_string(),
                ])
                .map_err(e)?;
            }
        }
        ModelKind::Brg => {
            w.write_record(["iter", "beta", "p", "log_joint"]).map_err(e)?;
            for k in 0..trace.kept() {
                w.write_record([
                    trace.iteration[k].to_string(),
                    trace.beta[k].to_string(),
                    trace.p[k].to_string(),
                    trace.log_joint[k].to_string(),
                ])
                .map_err(e)?;
            }
        }
    }
    finish(path, w)
}

#[derive(Debug, Deserialize)]
struct TraceRow {
    iter: usize,
    beta: f64,
    mu: Option<f64>,
    gamma: Option<f64>,
    p: Option<f64>,
    log_joint: f64,
}

/// Reads a trace written by [`write_trace`]. Edge tallies are not stored in
/// the file, so they come back empty.
pub fn load_trace_csv(path: &Path, m: usize) -> Result<Trace> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let model = if headers.iter().any(|h| h == "p") { ModelKind::Brg } else { ModelKind::Pa };
    let mut trace = Trace::new(model, m, 0);
    for row in rdr.deserialize::<TraceRow>() {
        let row = row.map_err(|e| csv_err(path, e))?;
        trace.iteration.push(row.iter);
        trace.beta.push(row.beta);
        trace.log_joint.push(row.log_joint);
        let missing = |name: &str| Error::Parse {
            path: path.to_path_buf(),
            line: trace.iteration.len() as u64 + 1,
            message: format!("missing {name}"),
        };
        match model {
            ModelKind::Pa => {
                trace.mu.push(row.mu.ok_or_else(|| missing("mu"))?);
                trace.gamma.push(row.gamma.ok_or_else(|| missing("gamma"))?);
            }
            ModelKind::Brg => trace.p.push(row.p.ok_or_else(|| missing("p"))?),
        }
    }
    Ok(trace)
}

/// Renders a value to three significant digits with trailing zeros removed.
pub fn format_sig3(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (2 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// `mean (sd)` cell.
pub fn format_mean_sd(mean: f64, sd: f64) -> String {
    format!("{} ({})", format_sig3(mean), format_sig3(sd))
}

/// One row of the summary table.
#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub epidemic: String,
    pub m: usize,
    pub summary: PosteriorSummary,
}

/// Writes `epidemic,m,beta,mu,correlation,alpha` rows for attachment-model
/// fits; random graph fits fill `mu` with `p`, `correlation` with
/// `corr(beta, p)` and `alpha` with the average degree.
pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::invalid("no summary rows"));
    }
    let mut w = writer(path)?;
    let e = |err| csv_err(path, err);
    w.write_record(["epidemic", "m", "beta", "mu", "correlation", "alpha"]).map_err(e)?;
    for r in rows {
        let s = &r.summary;
        let beta = format_mean_sd(s.beta.mean, s.beta.sd);
        let (second, corr, last) = match (&s.mu, &s.alpha, &s.p) {
            (Some(mu), Some(al), _) => (
                format_mean_sd(mu.mean, mu.sd),
                s.corr_beta_mustar.unwrap_or(0.0),
                format_mean_sd(al.mean, al.sd),
            ),
            (_, _, Some(p)) => (
                format_mean_sd(p.mean, p.sd),
                s.corr_beta_p.unwrap_or(0.0),
                format_sig3(s.average_degree.unwrap_or(f64::NAN)),
            ),
            _ => return Err(Error::invalid("summary has neither attachment nor random graph fields")),
        };
        w.write_record([r.epidemic.clone(), r.m.to_string(), beta, second, format!("{corr:.3}"), last])
            .map_err(e)?;
    }
    finish(path, w)
}

/// Writes `i,j,prob` for every pair with 1-based labels.
pub fn write_edge_probs(path: &Path, probs: &EdgeProbabilities) -> Result<()> {
    let mut w = writer(path)?;
    let e = |err| csv_err(path, err);
    w.write_record(["i", "j", "prob"]).map_err(e)?;
    for (i, j, p) in probs.iter() {
        w.write_record([(i + 1).to_string(), (j + 1).to_string(), p.to_string()]).map_err(e)?;
    }
    finish(path, w)
}

/// Writes `t,lower,median,upper` and, when given, the observed count.
pub fn write_bands(path: &Path, bands: &PredictiveBands, observed: Option<&[usize]>) -> Result<()> {
    let mut w = writer(path)?;
    let e = |err| csv_err(path, err);
    let mut header = vec!["t", "lower", "median", "upper"];
    if observed.is_some() {
        header.push("observed");
    }
    w.write_record(&header).map_err(e)?;
    for k in 0..bands.grid.len() {
        let mut rec = vec![
            bands.grid[k].to_string(),
            bands.lower[k].to_string(),
            bands.median[k].to_string(),
            bands.upper[k].to_string(),
        ];
        if let Some(obs) = observed {
            rec.push(obs[k].to_string());
        }
        w.write_record(&rec).map_err(e)?;
    }
    finish(path, w)
}

/// Writes plain text, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let mut f = File::create(path).map_err(|e| io_err(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| io_err(path, e))
}

pub fn create_dir(path: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(path).map_err(|e| io_err(path, e))?;
    Ok(path.to_path_buf())
}

/// Settings for posterior predictive simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictSettings {
    pub n_sims: usize,
    pub grid_points: usize,
}

impl Default for PredictSettings {
    fn default() -> Self {
        Self { n_sims: 1000, grid_points: crate::analysis::DEFAULT_GRID_POINTS }
    }
}

/// Everything a configuration file can set.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub mcmc: McmcConfig,
    pub priors: Priors,
    pub study: StudyGrid,
    pub predict: PredictSettings,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("line {line}: cannot parse {key} = {value:?}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s, line))
        .collect()
}

fn parse_optional<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<Option<T>> {
    if value.eq_ignore_ascii_case("none") || value.is_empty() {
        Ok(None)
    } else {
        parse_value(key, value, line).map(Some)
    }
}

fn parse_bool(key: &str, value: &str, line: usize) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("line {line}: {key} must be true or false, got {value:?}"))),
    }
}

/// Parses `key = value` lines; `#` starts a comment. Unknown keys are
/// errors. Keys not mentioned keep their defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut c = RunConfig::default();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {line}: expected key = value, got {content:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        let m = &mut c.mcmc;
        match key {
            "iterations" => m.iterations = parse_value(key, value, line)?,
            "burnin" => m.burnin = parse_value(key, value, line)?,
            "fix_gamma" => m.fix_gamma = parse_optional(key, value, line)?,
            "target_accept" => m.target_accept = parse_value(key, value, line)?,
            "init_mu" => m.init_mu = parse_optional(key, value, line)?,
            "init_gamma" => m.init_gamma = parse_value(key, value, line)?,
            "proposal_sd_mu" => m.proposal_sd_mu = parse_value(key, value, line)?,
            "proposal_sd_gamma" => m.proposal_sd_gamma = parse_value(key, value, line)?,
            "sigma_moves_per_iter" => m.sigma_moves_per_iter = parse_optional(key, value, line)?,
            "seed" => m.seed = parse_value(key, value, line)?,
            "model" => m.model = value.parse()?,
            "thin" => m.thin = parse_value(key, value, line)?,
            "random_scan" => m.random_scan = parse_bool(key, value, line)?,
            "sigma_sample_every" => m.sigma_sample_every = parse_optional(key, value, line)?,
            "brg_p" => m.brg.p = parse_value(key, value, line)?,
            "brg_a_p" => m.brg.a_p = parse_value(key, value, line)?,
            "brg_b_p" => m.brg.b_p = parse_value(key, value, line)?,
            "a_beta" => c.priors.a_beta = parse_value(key, value, line)?,
            "b_beta" => c.priors.b_beta = parse_value(key, value, line)?,
            "a_mu" => c.priors.a_mu = parse_value(key, value, line)?,
            "b_mu" => c.priors.b_mu = parse_value(key, value, line)?,
            "m_values" => c.study.m_values = parse_list(key, value, line)?,
            "beta_values" => c.study.beta_values = parse_list(key, value, line)?,
            "mu_values" => c.study.mu_values = parse_list(key, value, line)?,
            "gamma_values" => c.study.gamma_values = parse_list(key, value, line)?,
            "known_proportions" => c.study.known_proportions = parse_list(key, value, line)?,
            "replicates" => c.study.replicates = parse_value(key, value, line)?,
            "n_sims" => c.predict.n_sims = parse_value(key, value, line)?,
            "grid_points" => c.predict.grid_points = parse_value(key, value, line)?,
            other => return Err(Error::Config(format!("line {line}: unknown key {other:?}"))),
        }
    }
    c.priors.validate()?;
    Ok(c)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_cell_format() {
        assert_eq!(format_mean_sd(0.384, 0.022), "0.384 (0.022)");
        assert_eq!(format_mean_sd(0.0059, 0.00029), "0.0059 (0.00029)");
        assert_eq!(format_sig3(2.4014), "2.4");
        assert_eq!(format_sig3(15.62), "15.6");
        assert_eq!(format_sig3(1234.0), "1234");
    }

    #[test]
    fn config_parsing() {
        let c = parse_config("iterations = 500\nburnin=100 # comment\nfix_gamma = none\nmu_values = 4, 6\n").unwrap();
        assert_eq!(c.mcmc.iterations, 500);
        assert_eq!(c.mcmc.burnin, 100);
        assert_eq!(c.mcmc.fix_gamma, None);
        assert_eq!(c.study.mu_values, vec![4.0, 6.0]);
        assert!(parse_config("iteratons = 5").is_err());
        assert!(parse_config("iterations").is_err());
        assert!(parse_config("model = sbm").is_err());
    }
}

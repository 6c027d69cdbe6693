//! Benchmark harness: one fixed lasso instance, a sweep over theta values and
//! random graphs, CSV outputs for histogram- and trace-style plots.
//!
//! All (theta, seed) runs are independent and execute on a rayon pool; files
//! are written once every run has finished, in job order, so reruns of the
//! same config produce byte-identical output directories.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ndarray::Array1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{erdos_renyi, Graph, GraphError, SPECTRAL_MAX_ITER, SPECTRAL_TOL};
use crate::problem::{
    generate_lasso, oracle_solve, LassoInstance, LassoParams, ProblemError,
};
use crate::solver::{
    combined_norm_exact, default_stepsizes, run, RunStatus, SolverError, Termination,
};

/// Oracle accuracy: four orders of magnitude beyond the strictest
/// experiment tolerance in use.
pub const ORACLE_TOL: f64 = 1e-12;
pub const ORACLE_MAX_ITER: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Full description of a sweep; echoed to `config.json` in the output
/// directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub nodes: usize,
    pub edge_prob: f64,
    pub dim: usize,
    pub rows: usize,
    pub thetas: Vec<f64>,
    pub alpha: f64,
    pub lambda_frac: f64,
    pub noise_std: f64,
    pub sparsity: f64,
    pub entry_std: f64,
    pub tol: f64,
    pub max_rounds: usize,
    pub graph_seeds: Vec<u64>,
    pub data_seed: u64,
    pub out_dir: PathBuf,
    /// Fixed graph from an edge-list file; when set, each theta runs once on
    /// this graph and the seed column reports 0.
    pub graph_file: Option<PathBuf>,
    /// Validate against the exact combined operator norm instead of the
    /// cheaper bound `||Laplacian|| + max_i ||C_i||^2`.
    pub exact_lnorm: bool,
}

impl ExperimentConfig {
    /// The benchmark defaults: 50 agents, p = 0.05, n = 500, 50 rows per
    /// agent, alpha = 20, tolerance 1e-6, thetas {0, 0.5, 1.5, 2}.
    pub fn benchmark(out_dir: PathBuf) -> Self {
        Self {
            nodes: 50,
            edge_prob: 0.05,
            dim: 500,
            rows: 50,
            thetas: vec![0.0, 0.5, 1.5, 2.0],
            alpha: 20.0,
            lambda_frac: 0.05,
            noise_std: 0.0,
            sparsity: 0.1,
            entry_std: 1.0,
            tol: 1e-6,
            max_rounds: 20_000,
            graph_seeds: (1..=200).collect(),
            data_seed: 1,
            out_dir,
            graph_file: None,
            exact_lnorm: false,
        }
    }

    fn validate(&self) -> Result<(), ExperimentError> {
        if self.nodes == 0 || self.dim == 0 || self.rows == 0 {
            return Err(ExperimentError::Invalid(
                "nodes, dim, and rows must be positive".into(),
            ));
        }
        if !(self.edge_prob > 0.0 && self.edge_prob <= 1.0) {
            return Err(ExperimentError::Invalid(format!(
                "edge probability {} outside (0, 1]",
                self.edge_prob
            )));
        }
        if !(self.tol > 0.0) {
            return Err(ExperimentError::Invalid(format!("tolerance {} must be positive", self.tol)));
        }
        if self.thetas.is_empty() {
            return Err(ExperimentError::Invalid("at least one theta required".into()));
        }
        if self.thetas.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(ExperimentError::Invalid("theta values must be nonnegative".into()));
        }
        if self.graph_seeds.is_empty() && self.graph_file.is_none() {
            return Err(ExperimentError::Invalid("at least one graph seed required".into()));
        }
        if !(self.alpha > 0.0) {
            return Err(ExperimentError::Invalid(format!("alpha {} must be positive", self.alpha)));
        }
        if self.max_rounds == 0 {
            return Err(ExperimentError::Invalid("max_rounds must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of a single (theta, graph seed) run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub theta: f64,
    pub graph_seed: u64,
    pub rounds: usize,
    pub status: RunStatus,
    /// `(round, relative error)` per completed round.
    pub trace: Vec<(usize, f64)>,
    /// Network-average iterate at termination.
    pub mean_x: Array1<f64>,
    pub final_rel_error: Option<f64>,
    /// Conservation diagnostics carried through from the solver trace.
    pub rho_imbalance: f64,
    pub rho_scale: f64,
    pub vectors_sent: usize,
    pub graph_edges: usize,
}

/// Per-theta aggregate over converged runs; `None` fields mean nothing
/// converged for that theta.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSummary {
    pub theta: f64,
    pub median_rounds: Option<f64>,
    pub p25: Option<usize>,
    pub p75: Option<usize>,
    pub n_converged: usize,
}

pub struct ExperimentOutcome {
    pub instance: LassoInstance,
    pub reference: Array1<f64>,
    pub runs: Vec<RunSummary>,
    pub summaries: Vec<ThetaSummary>,
}

/// Runs the full sweep: generates one instance from the data seed, solves it
/// with the oracle, then for every theta x graph seed builds the graph,
/// derives step sizes, and runs the solver to tolerance. Emits the CSV files
/// into the config's output directory. Diverged or exhausted runs are
/// recorded, never fatal.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, ExperimentError> {
    cfg.validate()?;
    let instance = generate_lasso(&LassoParams {
        num_agents: cfg.nodes,
        dim: cfg.dim,
        rows_per_agent: cfg.rows,
        sparsity: cfg.sparsity,
        lambda_frac: cfg.lambda_frac,
        noise_std: cfg.noise_std,
        entry_std: cfg.entry_std,
        seed: cfg.data_seed,
    })?;
    let reference = oracle_solve(&instance, ORACLE_TOL, ORACLE_MAX_ITER)?;

    let loaded_graph = match &cfg.graph_file {
        Some(path) => {
            let g = Graph::load_edge_list(path)?;
            if g.num_nodes() != cfg.nodes {
                return Err(ExperimentError::Invalid(format!(
                    "graph file has {} nodes, config says {}",
                    g.num_nodes(),
                    cfg.nodes
                )));
            }
            Some(Arc::new(g))
        }
        None => None,
    };

    let (pi_tol, pi_max_iter) = (SPECTRAL_TOL, SPECTRAL_MAX_ITER);
    // the data (and with it max_i ||C_i||^2) is fixed across all runs
    let c_norm_max = if cfg.exact_lnorm {
        0.0
    } else {
        let mut worst = 0.0_f64;
        for agent in instance.problem.agents() {
            let c = &agent.c;
            if c.nrows() == 0 {
                continue;
            }
            let est = crate::graph::spectral_norm(
                |v| c.t().dot(&c.dot(v)),
                c.ncols(),
                pi_tol,
                pi_max_iter,
                cfg.data_seed,
            )?;
            worst = worst.max(est.inflated(pi_tol));
        }
        worst
    };

    let jobs: Vec<(f64, u64)> = match &loaded_graph {
        Some(_) => cfg.thetas.iter().map(|&t| (t, 0)).collect(),
        None => cfg
            .thetas
            .iter()
            .flat_map(|&t| cfg.graph_seeds.iter().map(move |&s| (t, s)))
            .collect(),
    };

    let runs: Vec<RunSummary> = jobs
        .par_iter()
        .map(|&(theta, seed)| -> Result<RunSummary, ExperimentError> {
            let graph: Arc<Graph> = match &loaded_graph {
                Some(g) => Arc::clone(g),
                None => Arc::new(erdos_renyi(cfg.nodes, cfg.edge_prob, seed)?),
            };
            let l_norm = if cfg.exact_lnorm {
                combined_norm_exact(&graph, &instance.problem, pi_tol, pi_max_iter, seed)?
            } else {
                graph.laplacian_norm(pi_tol, pi_max_iter, seed)?.inflated(pi_tol) + c_norm_max
            };
            let steps = default_stepsizes(theta, cfg.alpha, l_norm, &graph);
            let term = Termination::relative_error(reference.clone(), cfg.tol, cfg.max_rounds)?;
            let trace = run(&instance.problem, &graph, &steps, &term, None)?;
            Ok(RunSummary {
                theta,
                graph_seed: seed,
                rounds: trace.rounds(),
                status: trace.status,
                trace: trace
                    .records
                    .iter()
                    .map(|r| (r.round, r.rel_error.expect("relative-error mode")))
                    .collect(),
                mean_x: trace.mean_x(),
                final_rel_error: trace.final_rel_error(),
                rho_imbalance: trace.max_rho_imbalance,
                rho_scale: trace.max_rho_scale,
                vectors_sent: trace.stats.vectors_sent,
                graph_edges: graph.num_edges(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let summaries = summarize(&cfg.thetas, &runs);
    let outcome = ExperimentOutcome { instance, reference, runs, summaries };
    emit_plot_data(&outcome, cfg, &cfg.out_dir)?;
    Ok(outcome)
}

/// Median (midpoint convention) and quartiles (nearest rank) of
/// rounds-to-tolerance over the converged runs of each theta.
pub fn summarize(thetas: &[f64], runs: &[RunSummary]) -> Vec<ThetaSummary> {
    thetas
        .iter()
        .map(|&theta| {
            let mut rounds: Vec<usize> = runs
                .iter()
                .filter(|r| r.theta == theta && r.status == RunStatus::Converged)
                .map(|r| r.rounds)
                .collect();
            rounds.sort_unstable();
            let n = rounds.len();
            if n == 0 {
                return ThetaSummary {
                    theta,
                    median_rounds: None,
                    p25: None,
                    p75: None,
                    n_converged: 0,
                };
            }
            let median = if n % 2 == 1 {
                rounds[n / 2] as f64
            } else {
                (rounds[n / 2 - 1] + rounds[n / 2]) as f64 / 2.0
            };
            ThetaSummary {
                theta,
                median_rounds: Some(median),
                p25: Some(rounds[nearest_rank(0.25, n)]),
                p75: Some(rounds[nearest_rank(0.75, n)]),
                n_converged: n,
            }
        })
        .collect()
}

fn nearest_rank(q: f64, n: usize) -> usize {
    ((q * n as f64).ceil() as usize).clamp(1, n) - 1
}

/// 17-significant-digit float formatting for exact replay.
fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `config.json`, `histogram.csv`, one `trace_<theta>_<seed>.csv` per
/// run, and `summary.csv`. All files carry a header row and end in a newline.
pub fn emit_plot_data(
    outcome: &ExperimentOutcome,
    cfg: &ExperimentConfig,
    out_dir: &Path,
) -> Result<(), ExperimentError> {
    std::fs::create_dir_all(out_dir)?;

    let config_file = std::fs::File::create(out_dir.join("config.json"))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(config_file), cfg)?;

    let mut histogram =
        std::io::BufWriter::new(std::fs::File::create(out_dir.join("histogram.csv"))?);
    writeln!(histogram, "theta,graph_seed,rounds,status")?;
    for run in &outcome.runs {
        writeln!(
            histogram,
            "{},{},{},{}",
            run.theta,
            run.graph_seed,
            run.rounds,
            run.status.label()
        )?;
    }

    for run in &outcome.runs {
        let name = format!("trace_{}_{}.csv", run.theta, run.graph_seed);
        let mut trace = std::io::BufWriter::new(std::fs::File::create(out_dir.join(name))?);
        writeln!(trace, "round,rel_err")?;
        for &(round, rel_err) in &run.trace {
            writeln!(trace, "{},{}", round, fmt_float(rel_err))?;
        }
    }

    let mut summary =
        std::io::BufWriter::new(std::fs::File::create(out_dir.join("summary.csv"))?);
    writeln!(summary, "theta,median_rounds,p25,p75,n_converged")?;
    for s in &outcome.summaries {
        writeln!(
            summary,
            "{},{},{},{},{}",
            s.theta,
            s.median_rounds.map(|m| m.to_string()).unwrap_or_default(),
            s.p25.map(|p| p.to_string()).unwrap_or_default(),
            s.p75.map(|p| p.to_string()).unwrap_or_default(),
            s.n_converged
        )?;
    }
    Ok(())
}

/// Process exit code for a sweep: 0 when everything converged, 2 when some
/// run exhausted its round budget, 3 when any run diverged.
pub fn exit_code(runs: &[RunSummary]) -> i32 {
    if runs.iter().any(|r| matches!(r.status, RunStatus::Diverged { .. })) {
        3
    } else if runs.iter().any(|r| r.status == RunStatus::MaxRounds) {
        2
    } else {
        0
    }
}

/// Parses a seed list like `"1-200"`, `"3,7,9"`, or `"1-4,10"` (ranges are
/// inclusive).
pub fn parse_seed_list(text: &str) -> Result<Vec<u64>, ExperimentError> {
    let mut seeds = Vec::new();
    for token in text.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        match token.split_once('-') {
            Some((lo, hi)) => {
                let lo: u64 = lo
                    .trim()
                    .parse()
                    .map_err(|_| ExperimentError::Invalid(format!("bad seed range {token:?}")))?;
                let hi: u64 = hi
                    .trim()
                    .parse()
                    .map_err(|_| ExperimentError::Invalid(format!("bad seed range {token:?}")))?;
                if hi < lo {
                    return Err(ExperimentError::Invalid(format!("empty seed range {token:?}")));
                }
                seeds.extend(lo..=hi);
            }
            None => seeds.push(
                token
                    .parse()
                    .map_err(|_| ExperimentError::Invalid(format!("bad seed {token:?}")))?,
            ),
        }
    }
    if seeds.is_empty() {
        return Err(ExperimentError::Invalid("no graph seeds given".into()));
    }
    Ok(seeds)
}

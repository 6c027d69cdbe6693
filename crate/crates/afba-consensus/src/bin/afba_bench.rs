//! Experiment harness CLI: sweeps theta over random graphs on a fixed lasso
//! instance and writes CSV outputs.
//!
//! Exit codes: 0 when every run converged, 2 when any run exhausted its
//! round budget, 3 when any run diverged.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use afba_consensus::experiment::{
    exit_code, parse_seed_list, run_experiment, ExperimentConfig,
};

#[derive(Parser, Debug)]
#[command(name = "afba-bench", version, about = "Distributed primal-dual lasso benchmark")]
struct Args {
    /// Number of agents (graph nodes)
    #[arg(long, default_value_t = 50)]
    nodes: usize,

    /// Erdos-Renyi edge probability
    #[arg(long, default_value_t = 0.05)]
    edge_prob: f64,

    /// Shared decision dimension
    #[arg(long, default_value_t = 500)]
    dim: usize,

    /// Rows per agent in the lasso design
    #[arg(long, default_value_t = 50)]
    rows: usize,

    /// Theta value; repeat for a sweep (default: 0 0.5 1.5 2)
    #[arg(long = "theta")]
    thetas: Vec<f64>,

    /// Step-size scale: sigma = alpha/||L||, tau = 0.99/(alpha*(theta^2-3*theta+3))
    #[arg(long, default_value_t = 20.0)]
    alpha: f64,

    /// Regularization as a fraction of ||sum D_i^T d_i||_inf (below 0.1)
    #[arg(long, default_value_t = 0.05)]
    lambda_frac: f64,

    /// Standard deviation of the measurement noise
    #[arg(long, default_value_t = 0.0)]
    noise_std: f64,

    /// Fraction of nonzeros in the planted solution
    #[arg(long, default_value_t = 0.1)]
    sparsity: f64,

    /// Standard deviation of the design entries (1/sqrt(rows) balances the
    /// design against the graph Laplacian in the step-size rule)
    #[arg(long, default_value_t = 1.0)]
    entry_std: f64,

    /// Relative-error tolerance against the oracle solution
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,

    /// Round budget per run
    #[arg(long, default_value_t = 20_000)]
    max_rounds: usize,

    /// Graph seeds: comma list and/or inclusive ranges, e.g. "1-200" or "3,7,10-12"
    #[arg(long, default_value = "1-200")]
    graph_seeds: String,

    /// Seed for the problem data (fixed across all runs)
    #[arg(long, default_value_t = 1)]
    data_seed: u64,

    /// Output directory for the CSV files
    #[arg(long)]
    out: PathBuf,

    /// Solve on a fixed graph from an edge-list file instead of sampling
    #[arg(long)]
    graph_file: Option<PathBuf>,

    /// Validate step sizes against the exact combined operator norm
    #[arg(long, default_value_t = false)]
    exact_lnorm: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = match build_config(args) {
        Ok(config) => config,
        Err(message) => {
            eprintln!("afba-bench: {message}");
            return ExitCode::from(1);
        }
    };

    let outcome = match run_experiment(&config) {
        Ok(outcome) => outcome,
        Err(err) => {
            eprintln!("afba-bench: {err}");
            return ExitCode::from(1);
        }
    };

    println!("lambda = {:.6e}, {} runs", outcome.instance.lambda, outcome.runs.len());
    println!("{:>7} {:>10} {:>8} {:>8} {:>12}", "theta", "median", "p25", "p75", "converged");
    for s in &outcome.summaries {
        let total = outcome.runs.iter().filter(|r| r.theta == s.theta).count();
        println!(
            "{:>7} {:>10} {:>8} {:>8} {:>9}/{total}",
            s.theta,
            s.median_rounds.map(|m| m.to_string()).unwrap_or_else(|| "-".into()),
            s.p25.map(|p| p.to_string()).unwrap_or_else(|| "-".into()),
            s.p75.map(|p| p.to_string()).unwrap_or_else(|| "-".into()),
            s.n_converged,
        );
    }
    println!("wrote {}", config.out_dir.display());

    ExitCode::from(exit_code(&outcome.runs) as u8)
}

fn build_config(args: Args) -> Result<ExperimentConfig, String> {
    let thetas = if args.thetas.is_empty() { vec![0.0, 0.5, 1.5, 2.0] } else { args.thetas };
    let graph_seeds = parse_seed_list(&args.graph_seeds).map_err(|e| e.to_string())?;
    Ok(ExperimentConfig {
        nodes: args.nodes,
        edge_prob: args.edge_prob,
        dim: args.dim,
        rows: args.rows,
        thetas,
        alpha: args.alpha,
        lambda_frac: args.lambda_frac,
        noise_std: args.noise_std,
        sparsity: args.sparsity,
        entry_std: args.entry_std,
        tol: args.tol,
        max_rounds: args.max_rounds,
        graph_seeds,
        data_seed: args.data_seed,
        out_dir: args.out,
        graph_file: args.graph_file,
        exact_lnorm: args.exact_lnorm,
    })
}

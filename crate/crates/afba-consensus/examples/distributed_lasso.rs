//! Solve a lasso instance distributedly: each of 20 agents holds a slice of
//! the data and exchanges one vector per neighbor per round.
//!
//! ```sh
//! cargo run --release --example distributed_lasso
//! ```

use afba_consensus::graph::erdos_renyi;
use afba_consensus::problem::{generate_lasso, oracle_solve, LassoParams};
use afba_consensus::solver::{combined_norm_bound, default_stepsizes, run, Termination};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = LassoParams {
        num_agents: 20,
        dim: 100,
        rows_per_agent: 15,
        sparsity: 0.1,
        lambda_frac: 0.05,
        noise_std: 0.0,
        entry_std: 0.2,
        seed: 11,
    };
    let inst = generate_lasso(&params)?;
    let graph = erdos_renyi(params.num_agents, 0.15, 5)?;
    println!(
        "{} agents on a {}-edge graph, n = {}",
        params.num_agents,
        graph.num_edges(),
        params.dim
    );

    let reference = oracle_solve(&inst, 1e-12, 500_000)?;
    let l_norm = combined_norm_bound(&graph, &inst.problem, 1e-8, 10_000, 0)?;
    let steps = default_stepsizes(1.5, 20.0, l_norm, &graph);
    println!(
        "||L|| bound {:.3}, sigma = {:.4}, tau = kappa = {:.4}",
        l_norm, steps.sigma[0], steps.tau[0]
    );

    let term = Termination::relative_error(reference, 1e-6, 100_000)?;
    let trace = run(&inst.problem, &graph, &steps, &term, None)?;
    println!(
        "status {} after {} rounds; {} vectors / {} bytes exchanged",
        trace.status.label(),
        trace.rounds(),
        trace.stats.vectors_sent,
        trace.stats.bytes_sent
    );
    for r in trace.records.iter().step_by(trace.records.len().max(10) / 10) {
        println!(
            "  round {:>6}: rel err {:.3e}, consensus gap {:.3e}",
            r.round,
            r.rel_error.unwrap(),
            r.consensus_gap
        );
    }
    if let Some(last) = trace.records.last() {
        println!(
            "final: rel err {:.3e}, consensus gap {:.3e}",
            last.rel_error.unwrap(),
            last.consensus_gap
        );
    }
    Ok(())
}

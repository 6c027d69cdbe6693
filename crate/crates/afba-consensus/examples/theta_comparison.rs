//! Effect of the theta parameter on convergence speed. theta = 2 recovers
//! the Chambolle-Pock method; theta = 1.5 minimizes theta^2 - 3*theta + 3 and
//! admits the largest dual/edge steps, which usually wins.
//!
//! ```sh
//! cargo run --release --example theta_comparison
//! ```

use afba_consensus::graph::erdos_renyi;
use afba_consensus::problem::{generate_lasso, oracle_solve, LassoParams};
use afba_consensus::solver::{
    combined_norm_bound, default_stepsizes, run, theta_factor, Termination,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = LassoParams {
        num_agents: 25,
        dim: 120,
        rows_per_agent: 20,
        sparsity: 0.1,
        lambda_frac: 0.05,
        noise_std: 0.0,
        entry_std: 0.1,
        seed: 2,
    };
    let inst = generate_lasso(&params)?;
    let graph = erdos_renyi(params.num_agents, 0.12, 9)?;
    let reference = oracle_solve(&inst, 1e-12, 500_000)?;
    let l_norm = combined_norm_bound(&graph, &inst.problem, 1e-8, 10_000, 0)?;

    println!("{:>7} {:>16} {:>10} {:>10}", "theta", "factor", "tau=kappa", "rounds");
    for theta in [0.0, 0.5, 1.0, 1.5, 2.0] {
        let steps = default_stepsizes(theta, 20.0, l_norm, &graph);
        let term = Termination::relative_error(reference.clone(), 1e-6, 200_000)?;
        let trace = run(&inst.problem, &graph, &steps, &term, None)?;
        println!(
            "{theta:>7} {:>16.4} {:>10.5} {:>10}",
            theta_factor(theta),
            steps.tau[0],
            trace.rounds()
        );
    }
    Ok(())
}

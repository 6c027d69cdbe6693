//! Generate a lasso instance, solve it centrally with the FISTA oracle, check
//! the optimality residual, and round-trip the on-disk instance format.
//!
//! ```sh
//! cargo run --release --example lasso_ground_truth
//! ```

use afba_consensus::problem::{
    generate_lasso, optimality_residual, oracle_solve, LassoInstance, LassoParams,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = LassoParams {
        num_agents: 10,
        dim: 80,
        rows_per_agent: 20,
        sparsity: 0.1,
        lambda_frac: 0.05,
        noise_std: 0.0,
        entry_std: 1.0,
        seed: 3,
    };
    let inst = generate_lasso(&params)?;
    println!(
        "instance: {} agents x {} rows, n = {}, lambda = {:.4}",
        inst.num_agents(),
        params.rows_per_agent,
        inst.dim(),
        inst.lambda
    );

    let solution = oracle_solve(&inst, 1e-12, 500_000)?;
    let nonzeros = solution.iter().filter(|v| **v != 0.0).count();
    let planted = inst.planted.iter().filter(|v| **v != 0.0).count();
    println!("oracle solution: {nonzeros} nonzeros (planted {planted})");
    println!("objective at solution: {:.6}", inst.problem.objective(solution.view()));
    println!("optimality residual: {:.3e}", optimality_residual(&inst, solution.view()));

    let dir = std::env::temp_dir().join("afba_example_instance");
    inst.save_dir(&dir)?;
    let reloaded = LassoInstance::load_dir(&dir)?;
    println!(
        "saved to {} and reloaded: lambda bit-identical: {}",
        dir.display(),
        reloaded.lambda.to_bits() == inst.lambda.to_bits()
    );
    Ok(())
}

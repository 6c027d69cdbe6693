//! The reduced iteration (no g-terms): agents with quadratic costs
//! 0.5*||x - c_i||^2 agree on the network average of their targets without
//! any central coordinator.
//!
//! ```sh
//! cargo run --example consensus_averaging
//! ```

use std::sync::Arc;

use afba_consensus::graph::Graph;
use afba_consensus::problem::{AgentCost, ConsensusProblem};
use afba_consensus::prox::{ProxFunction, SqDistance, Zero};
use afba_consensus::solver::{default_stepsizes, run_reduced, Termination};
use ndarray::{Array1, Array2};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // a ring of six agents, each preferring its own target point
    let n = 2;
    let targets: Vec<Array1<f64>> = (0..6)
        .map(|i| {
            let angle = i as f64 * std::f64::consts::TAU / 6.0;
            ndarray::array![angle.cos(), angle.sin() + 1.0]
        })
        .collect();
    let agents: Vec<AgentCost> = targets
        .iter()
        .map(|c| AgentCost {
            f: Arc::new(SqDistance::new(c.clone())) as Arc<dyn ProxFunction>,
            g: Arc::new(Zero),
            c: Array2::zeros((0, n)),
        })
        .collect();
    let prob = ConsensusProblem::new(n, agents)?;
    let ring = Graph::new(6, vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)])?;

    let lap_norm = ring.laplacian_norm(1e-10, 10_000, 0)?.inflated(1e-10);
    let steps = default_stepsizes(1.5, 1.0, lap_norm, &ring);
    let term = Termination::fixed_point(1e-12, 50_000)?;
    let trace = run_reduced(&prob, &ring, &steps, &term, None)?;

    let mut mean = Array1::<f64>::zeros(n);
    for t in &targets {
        mean += t;
    }
    mean /= targets.len() as f64;
    println!("status {} after {} rounds", trace.status.label(), trace.rounds());
    println!("target average: {mean}");
    for (i, st) in trace.states.iter().enumerate() {
        println!("agent {i}: x = {}", st.x);
    }
    let gap = trace.records.last().map(|r| r.consensus_gap).unwrap_or(0.0);
    println!("final consensus gap: {gap:.3e}");
    Ok(())
}

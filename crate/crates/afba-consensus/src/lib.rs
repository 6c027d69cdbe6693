//! Distributed primal-dual consensus optimization over graphs.
//!
//! A network of agents, each holding a private cost `f_i(x) + g_i(C_i x)`,
//! jointly minimizes the aggregate cost and reaches consensus by exchanging
//! one n-vector per neighbor per round. The iteration is an asymmetric
//! forward-backward-adjoint (AFBA) primal-dual splitting with a tuning
//! parameter `theta`: `theta = 2` recovers the Chambolle-Pock method, while
//! `theta = 1.5` maximizes the admissible step sizes and is usually faster.
//! Agents only evaluate proximal mappings and matrix-vector products; there
//! are no inner loops and no matrix inversions.
//!
//! The crate is organized around the data flow of an experiment:
//!
//! - [`graph`]: communication graphs, incidence/Laplacian algebra, power
//!   iteration for spectral norms, Erdős–Rényi generation.
//! - [`prox`]: proximal operators (`l1`, squared distance, box indicator)
//!   and conjugate proxes via the Moreau decomposition.
//! - [`problem`]: consensus problem instances, the lasso benchmark
//!   generator, a centralized FISTA oracle, and optimality residuals.
//! - [`simnet`]: deterministic bulk-synchronous message passing with round
//!   and byte accounting.
//! - [`solver`]: the distributed iteration itself, step-size validation,
//!   and the reduced variant for costs without g-terms.
//! - [`experiment`]: the benchmark harness sweeping theta and graph seeds,
//!   emitting CSV traces and summaries.
//!
//! Each capability has a runnable demo under `examples/`; the `afba-bench`
//! binary drives full experiment sweeps.
//!
//! ```no_run
//! use afba_consensus::{graph, problem, solver};
//!
//! let inst = problem::generate_lasso(&problem::LassoParams {
//!     num_agents: 10,
//!     dim: 50,
//!     rows_per_agent: 20,
//!     ..Default::default()
//! })
//! .unwrap();
//! let g = graph::erdos_renyi(10, 0.4, 7).unwrap();
//! let l_norm = solver::combined_norm_bound(&g, &inst.problem, 1e-8, 10_000, 0).unwrap();
//! let steps = solver::default_stepsizes(1.5, 20.0, l_norm, &g);
//! let reference = problem::oracle_solve(&inst, 1e-12, 200_000).unwrap();
//! let term = solver::Termination::relative_error(reference, 1e-6, 100_000).unwrap();
//! let trace = solver::run(&inst.problem, &g, &steps, &term, None).unwrap();
//! println!("{} rounds, status {}", trace.rounds(), trace.status.label());
//! ```

pub mod experiment;
pub mod graph;
pub mod problem;
pub mod prox;
pub mod simnet;
pub mod solver;

pub use graph::{erdos_renyi, Graph};
pub use problem::{generate_lasso, oracle_solve, ConsensusProblem, LassoInstance, LassoParams};
pub use prox::ProxFunction;
pub use simnet::{CommStats, RoundMailbox};
pub use solver::{
    default_stepsizes, run, run_reduced, validate_stepsizes, RunStatus, RunTrace, StepSizes,
    Termination,
};

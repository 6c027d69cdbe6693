//! The distributed primal-dual iteration: per-agent local steps, neighbor
//! exchange through the simulated network, step-size validation, and the
//! reduced three-line variant for problems without g-terms.
//!
//! Each round an agent computes exactly two matrix-vector products with its
//! local operator (`C_i^T y_i` and `C_i x_i^{k+1}`), reusing the cached
//! `C_i x_i^k` from the previous round, and transmits one n-vector to each
//! neighbor.

use ndarray::{s, Array1, ArrayView1};
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{spectral_norm, Graph, GraphError};
use crate::problem::ConsensusProblem;
use crate::prox::{prox_conjugate, ProxFunction};
use crate::simnet::{CommStats, RoundMailbox, SimnetError};

#[derive(Debug, Error)]
pub enum StepSizeError {
    #[error("{which} contains a nonpositive or non-finite entry {value}")]
    NonPositive { which: &'static str, value: f64 },
    #[error("theta {0} must be finite and nonnegative")]
    BadTheta(f64),
    #[error(
        "step-size condition violated: 1/sigma_bar - tau_bar*(theta^2-3*theta+3)*L = {lhs} at theta {theta}"
    )]
    ConditionViolated { lhs: f64, theta: f64 },
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    StepSizes(#[from] StepSizeError),
    #[error("step-size vectors sized (sigma {sigma}, tau {tau}, kappa {kappa}) do not fit {nodes} nodes / {edges} edges")]
    StepSizeShape { sigma: usize, tau: usize, kappa: usize, nodes: usize, edges: usize },
    #[error("graph has {nodes} nodes but the problem has {agents} agents")]
    AgentCountMismatch { nodes: usize, agents: usize },
    #[error("communication graph is not connected")]
    NotConnected,
    #[error("agent {agent} produced a non-finite iterate at round {round}")]
    Diverged { agent: usize, round: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("reduced run requires empty g-terms, but agent {agent} has {rows} rows")]
    NotReduced { agent: usize, rows: usize },
    #[error("termination tolerance {0} must be positive")]
    BadTolerance(f64),
    #[error("relative-error termination requires a reference with positive max norm")]
    ZeroReference,
    #[error("initial state: {0}")]
    BadInit(String),
    #[error(transparent)]
    Simnet(#[from] SimnetError),
    #[error(transparent)]
    Spectral(#[from] GraphError),
}

/// Per-agent primal/dual steps, per-edge exchange weights, and the theta
/// parameter of the iteration. `kappa` is indexed by the graph's edge order,
/// which keeps the weights symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSizes {
    pub sigma: Vec<f64>,
    pub tau: Vec<f64>,
    pub kappa: Vec<f64>,
    pub theta: f64,
}

impl StepSizes {
    pub fn sigma_bar(&self) -> f64 {
        self.sigma.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Maximum over the tau entries and the edge weights, which enter the
    /// step-size condition on equal terms.
    pub fn tau_bar(&self) -> f64 {
        self.tau
            .iter()
            .chain(self.kappa.iter())
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn check_positive(&self) -> Result<(), StepSizeError> {
        for (which, list) in [("sigma", &self.sigma), ("tau", &self.tau), ("kappa", &self.kappa)] {
            if let Some(&value) = list.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
                return Err(StepSizeError::NonPositive { which, value });
            }
        }
        if !self.theta.is_finite() || self.theta < 0.0 {
            return Err(StepSizeError::BadTheta(self.theta));
        }
        Ok(())
    }
}

/// `theta^2 - 3*theta + 3`; always positive, minimized at theta = 1.5.
pub fn theta_factor(theta: f64) -> f64 {
    theta * theta - 3.0 * theta + 3.0
}

/// Checks the convergence condition `1/sigma_bar - tau_bar * (theta^2 -
/// 3*theta + 3) * l_norm > 0`, relaxed to `>= 0` exactly at theta = 2 (the
/// Chambolle-Pock boundary). `l_norm` must upper-bound the norm of
/// `Laplacian (x) I + C^T C`.
pub fn validate_stepsizes(steps: &StepSizes, l_norm: f64) -> Result<(), StepSizeError> {
    steps.check_positive()?;
    let lhs = 1.0 / steps.sigma_bar() - steps.tau_bar() * theta_factor(steps.theta) * l_norm;
    let ok = if steps.theta == 2.0 { lhs >= 0.0 } else { lhs > 0.0 };
    if ok {
        Ok(())
    } else {
        Err(StepSizeError::ConditionViolated { lhs, theta: steps.theta })
    }
}

/// The benchmark step-size rule: `sigma = alpha / l_norm` uniformly and `tau
/// = kappa = 0.99 / (alpha * (theta^2 - 3*theta + 3))` for every agent and
/// edge. Passes [`validate_stepsizes`] by construction.
pub fn default_stepsizes(theta: f64, alpha: f64, l_norm: f64, graph: &Graph) -> StepSizes {
    assert!(alpha > 0.0, "alpha must be positive");
    assert!(l_norm > 0.0, "operator norm bound must be positive");
    assert!(theta >= 0.0 && theta.is_finite(), "theta must be nonnegative");
    let sigma = alpha / l_norm;
    let tau = 0.99 / (alpha * theta_factor(theta));
    StepSizes {
        sigma: vec![sigma; graph.num_nodes()],
        tau: vec![tau; graph.num_nodes()],
        kappa: vec![tau; graph.num_edges()],
        theta,
    }
}

/// One agent's iterate storage. `cached_cx` always holds `C x` for the
/// current `x`; the constructors establish the invariant and
/// [`local_step`] maintains it.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub x: Array1<f64>,
    pub y: Array1<f64>,
    pub rho: Array1<f64>,
    cached_cx: Array1<f64>,
    c_products: usize,
}

impl AgentState {
    /// All-zero start (the default initialization); `C * 0 = 0`, so the cache
    /// costs nothing.
    pub fn zeros(dim: usize, rows: usize) -> Self {
        Self {
            x: Array1::zeros(dim),
            y: Array1::zeros(rows),
            rho: Array1::zeros(dim),
            cached_cx: Array1::zeros(rows),
            c_products: 0,
        }
    }

    /// Custom start; primes the cache with one matrix-vector product.
    pub fn from_parts(
        x: Array1<f64>,
        y: Array1<f64>,
        rho: Array1<f64>,
        c: &ndarray::Array2<f64>,
    ) -> Self {
        let cached_cx = c.dot(&x);
        Self { x, y, rho, cached_cx, c_products: 1 }
    }

    pub fn cached_cx(&self) -> &Array1<f64> {
        &self.cached_cx
    }

    /// Number of `C`/`C^T` applications this agent has performed.
    pub fn c_products(&self) -> usize {
        self.c_products
    }
}

fn all_finite(v: &Array1<f64>) -> bool {
    v.iter().all(|a| a.is_finite())
}

/// The four local lines of one round for one agent. Returns the broadcast
/// vector `u = 2 x_new - x_old` and the dual displacement `||y_new -
/// y_old||_inf`. Exactly two products with `C_i`/`C_i^T` per call; the
/// conjugate prox routes through the Moreau decomposition.
#[allow(clippy::too_many_arguments)]
pub fn local_step(
    state: &mut AgentState,
    f: &dyn ProxFunction,
    g: &dyn ProxFunction,
    c: &ndarray::Array2<f64>,
    sigma: f64,
    tau: f64,
    theta: f64,
    agent: usize,
    round: usize,
) -> Result<(Array1<f64>, f64), SolverError> {
    let cty = c.t().dot(&state.y);
    state.c_products += 1;
    let arg = &state.x - &(&state.rho * sigma) - &(&cty * sigma);
    let x_new = f.prox(arg.view(), sigma);
    let cx_new = c.dot(&x_new);
    state.c_products += 1;
    let extrapolated = &cx_new * theta + &state.cached_cx * (1.0 - theta);
    let y_arg = &state.y + &(&extrapolated * tau);
    let y_bar = prox_conjugate(g, y_arg.view(), tau);
    let y_new = &y_bar + &((&cx_new - &state.cached_cx) * (tau * (2.0 - theta)));
    let u = &x_new * 2.0 - &state.x;
    if !all_finite(&x_new) || !all_finite(&y_new) {
        return Err(SolverError::Diverged { agent, round });
    }
    let dy = max_abs_diff(y_new.view(), state.y.view());
    state.x = x_new;
    state.y = y_new;
    state.cached_cx = cx_new;
    Ok((u, dy))
}

/// Local step of the reduced iteration (every g-term absent): a single prox
/// on `x - sigma * rho`.
pub fn reduced_local_step(
    state: &mut AgentState,
    f: &dyn ProxFunction,
    sigma: f64,
    agent: usize,
    round: usize,
) -> Result<(Array1<f64>, f64), SolverError> {
    let arg = &state.x - &(&state.rho * sigma);
    let x_new = f.prox(arg.view(), sigma);
    let u = &x_new * 2.0 - &state.x;
    if !all_finite(&x_new) {
        return Err(SolverError::Diverged { agent, round });
    }
    state.x = x_new;
    Ok((u, 0.0))
}

/// Dual ascent on the edge constraints: `rho + sum_j kappa_ij * (u_self -
/// u_j)`, accumulated in ascending neighbor order so the summation order is
/// deterministic.
pub fn exchange_step(
    rho: &Array1<f64>,
    u_self: &Array1<f64>,
    neighbor_us: &[(usize, ArrayView1<f64>)],
    kappas: &[f64],
) -> Result<Array1<f64>, SolverError> {
    debug_assert!(neighbor_us.windows(2).all(|w| w[0].0 < w[1].0), "neighbors must be sorted");
    if kappas.len() != neighbor_us.len() {
        return Err(SolverError::DimensionMismatch {
            expected: neighbor_us.len(),
            got: kappas.len(),
        });
    }
    let mut out = rho.clone();
    for ((_, u_j), &kappa) in neighbor_us.iter().zip(kappas) {
        if u_j.len() != rho.len() || u_self.len() != rho.len() {
            return Err(SolverError::DimensionMismatch {
                expected: rho.len(),
                got: u_j.len().min(u_self.len()),
            });
        }
        for ((o, &s), &uj) in out.iter_mut().zip(u_self.iter()).zip(u_j.iter()) {
            *o += kappa * (s - uj);
        }
    }
    Ok(out)
}

/// Stopping rule. A reference solution selects relative-error mode (checked
/// before the first round and after every round); otherwise the run stops
/// when the full per-round displacement, `max_i` of `||dx_i||_inf / sigma_i`,
/// `||dy_i||_inf / tau_i`, and `||drho_i||_inf / sigma_i`, drops below the
/// tolerance. Watching only x would fire spuriously while the duals are
/// still moving (for example in round 1 from a zero start, where the prox
/// holds x at zero).
#[derive(Debug, Clone)]
pub struct Termination {
    tol: f64,
    max_rounds: usize,
    reference: Option<(Array1<f64>, f64)>,
}

impl Termination {
    pub fn relative_error(
        reference: Array1<f64>,
        tol: f64,
        max_rounds: usize,
    ) -> Result<Self, SolverError> {
        if !(tol > 0.0) {
            return Err(SolverError::BadTolerance(tol));
        }
        let norm = reference.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if !(norm > 0.0) {
            return Err(SolverError::ZeroReference);
        }
        Ok(Self { tol, max_rounds, reference: Some((reference, norm)) })
    }

    pub fn fixed_point(tol: f64, max_rounds: usize) -> Result<Self, SolverError> {
        if !(tol > 0.0) {
            return Err(SolverError::BadTolerance(tol));
        }
        Ok(Self { tol, max_rounds, reference: None })
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn max_rounds(&self) -> usize {
        self.max_rounds
    }

    pub fn reference(&self) -> Option<&Array1<f64>> {
        self.reference.as_ref().map(|(r, _)| r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    MaxRounds,
    Diverged { agent: usize, round: usize },
}

impl RunStatus {
    /// The status label used in CSV output.
    pub fn label(&self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::MaxRounds => "max-rounds",
            RunStatus::Diverged { .. } => "diverged",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    /// Max-over-agents relative error against the reference, when one is set.
    pub rel_error: Option<f64>,
    /// `max_i ||x_i - mean(x)||_inf`.
    pub consensus_gap: f64,
    /// `max_i ||x_i^{k+1} - x_i^k||_inf / sigma_i`.
    pub fixed_point_residual: f64,
}

#[derive(Debug, Clone)]
pub struct RunTrace {
    pub records: Vec<RoundRecord>,
    pub stats: CommStats,
    pub status: RunStatus,
    pub states: Vec<AgentState>,
    /// Total `C`/`C^T` applications across agents, including cache priming.
    pub c_products: usize,
    /// Largest `||sum_i rho_i||_inf` observed over the run; stays near zero
    /// when started from `rho = 0` because the exchange updates telescope.
    pub max_rho_imbalance: f64,
    /// Largest `||rho_i||_inf` observed, for scaling the imbalance.
    pub max_rho_scale: f64,
}

impl RunTrace {
    pub fn rounds(&self) -> usize {
        self.stats.rounds
    }

    /// Network-average primal iterate at termination.
    pub fn mean_x(&self) -> Array1<f64> {
        let n = self.states[0].x.len();
        let mut mean = Array1::zeros(n);
        for st in &self.states {
            mean += &st.x;
        }
        mean / self.states.len() as f64
    }

    pub fn final_rel_error(&self) -> Option<f64> {
        self.records.last().and_then(|r| r.rel_error)
    }
}

/// Runs the full iteration until the termination rule fires, every agent
/// starting from zero unless initial states are supplied.
///
/// Preconditions: the step sizes have passed [`validate_stepsizes`] against
/// an upper bound for the combined operator, and the graph is connected
/// (checked). Divergence and round exhaustion are reported in the returned
/// status, not as errors.
pub fn run(
    prob: &ConsensusProblem,
    graph: &Graph,
    steps: &StepSizes,
    term: &Termination,
    init: Option<Vec<AgentState>>,
) -> Result<RunTrace, SolverError> {
    run_with_observer(prob, graph, steps, term, init, |_, _| {})
}

/// As [`run`], invoking `observer(round, states)` after initialization
/// (round 0) and after every completed round.
pub fn run_with_observer(
    prob: &ConsensusProblem,
    graph: &Graph,
    steps: &StepSizes,
    term: &Termination,
    init: Option<Vec<AgentState>>,
    observer: impl FnMut(usize, &[AgentState]),
) -> Result<RunTrace, SolverError> {
    run_loop(prob, graph, steps, term, init, false, observer)
}

/// Runs the reduced iteration; every agent must have an empty g-term. With
/// identical inputs it reproduces [`run`]'s x-iterates round for round, and
/// its step sizes only need to satisfy the condition with the graph
/// Laplacian norm alone (no `C^T C` term).
pub fn run_reduced(
    prob: &ConsensusProblem,
    graph: &Graph,
    steps: &StepSizes,
    term: &Termination,
    init: Option<Vec<AgentState>>,
) -> Result<RunTrace, SolverError> {
    run_loop(prob, graph, steps, term, init, true, |_, _| {})
}

/// As [`run_reduced`] with a per-round observer.
pub fn run_reduced_with_observer(
    prob: &ConsensusProblem,
    graph: &Graph,
    steps: &StepSizes,
    term: &Termination,
    init: Option<Vec<AgentState>>,
    observer: impl FnMut(usize, &[AgentState]),
) -> Result<RunTrace, SolverError> {
    run_loop(prob, graph, steps, term, init, true, observer)
}

fn run_loop(
    prob: &ConsensusProblem,
    graph: &Graph,
    steps: &StepSizes,
    term: &Termination,
    init: Option<Vec<AgentState>>,
    reduced: bool,
    mut observer: impl FnMut(usize, &[AgentState]),
) -> Result<RunTrace, SolverError> {
    let n_agents = prob.num_agents();
    if graph.num_nodes() != n_agents {
        return Err(SolverError::AgentCountMismatch {
            nodes: graph.num_nodes(),
            agents: n_agents,
        });
    }
    if !graph.is_connected() {
        return Err(SolverError::NotConnected);
    }
    if steps.sigma.len() != n_agents
        || steps.tau.len() != n_agents
        || steps.kappa.len() != graph.num_edges()
    {
        return Err(SolverError::StepSizeShape {
            sigma: steps.sigma.len(),
            tau: steps.tau.len(),
            kappa: steps.kappa.len(),
            nodes: n_agents,
            edges: graph.num_edges(),
        });
    }
    steps.check_positive()?;
    if reduced {
        if let Some((agent, a)) = prob.agents().iter().enumerate().find(|(_, a)| a.c.nrows() > 0) {
            return Err(SolverError::NotReduced { agent, rows: a.c.nrows() });
        }
    }

    let n = prob.dim();
    let mut states = match init {
        Some(states) => {
            if states.len() != n_agents {
                return Err(SolverError::BadInit(format!(
                    "{} states for {} agents",
                    states.len(),
                    n_agents
                )));
            }
            for (i, (st, a)) in states.iter().zip(prob.agents()).enumerate() {
                if st.x.len() != n || st.rho.len() != n || st.y.len() != a.c.nrows() {
                    return Err(SolverError::BadInit(format!("agent {i} state has wrong shape")));
                }
            }
            states
        }
        None => prob.agents().iter().map(|a| AgentState::zeros(n, a.c.nrows())).collect(),
    };

    let mut mailbox = RoundMailbox::new(graph, n);
    let kappa_by_agent: Vec<Vec<f64>> = (0..n_agents)
        .map(|i| {
            graph
                .neighbors(i)
                .iter()
                .map(|&j| steps.kappa[graph.edge_index(i, j).expect("neighbors are edges")])
                .collect()
        })
        .collect();

    let mut records: Vec<RoundRecord> = Vec::new();
    let mut max_rho_imbalance = 0.0_f64;
    let mut max_rho_scale = 0.0_f64;
    track_rho(&states, &mut max_rho_imbalance, &mut max_rho_scale);
    observer(0, &states);

    let finish = |records: Vec<RoundRecord>,
                  mailbox: RoundMailbox,
                  status: RunStatus,
                  states: Vec<AgentState>,
                  imbalance: f64,
                  scale: f64| {
        let c_products = states.iter().map(AgentState::c_products).sum();
        RunTrace {
            records,
            stats: mailbox.stats().clone(),
            status,
            states,
            c_products,
            max_rho_imbalance: imbalance,
            max_rho_scale: scale,
        }
    };

    // relative-error termination is evaluated before iterating
    if let Some(rel) = relative_error(&states, term) {
        if rel <= term.tol {
            return Ok(finish(
                records,
                mailbox,
                RunStatus::Converged,
                states,
                max_rho_imbalance,
                max_rho_scale,
            ));
        }
    }

    let mut status = RunStatus::MaxRounds;
    for round in 1..=term.max_rounds {
        let mailbox_round = mailbox.round();

        let results: Vec<Result<(Array1<f64>, f64), SolverError>> = states
            .par_iter_mut()
            .zip(prob.agents().par_iter())
            .enumerate()
            .map(|(i, (state, agent))| {
                if reduced {
                    reduced_local_step(state, agent.f.as_ref(), steps.sigma[i], i, round)
                } else {
                    local_step(
                        state,
                        agent.f.as_ref(),
                        agent.g.as_ref(),
                        &agent.c,
                        steps.sigma[i],
                        steps.tau[i],
                        steps.theta,
                        i,
                        round,
                    )
                }
            })
            .collect();

        let mut us: Vec<Array1<f64>> = Vec::with_capacity(n_agents);
        let mut dual_shift = 0.0_f64;
        let mut diverged = None;
        for (i, result) in results.into_iter().enumerate() {
            match result {
                Ok((u, dy)) => {
                    dual_shift = dual_shift.max(dy / steps.tau[i]);
                    us.push(u);
                }
                Err(SolverError::Diverged { agent, round }) => {
                    diverged = Some((agent, round));
                    break;
                }
                Err(other) => return Err(other),
            }
        }
        if let Some((agent, round)) = diverged {
            status = RunStatus::Diverged { agent, round };
            break;
        }

        for (i, u) in us.iter().enumerate() {
            mailbox.broadcast(i, u)?;
        }
        let mut rho_shift = 0.0_f64;
        for (i, state) in states.iter_mut().enumerate() {
            let inbox = mailbox.read(i, mailbox_round)?;
            let views: Vec<(usize, ArrayView1<f64>)> =
                inbox.iter().map(|(j, u)| (*j, u.view())).collect();
            let new_rho = exchange_step(&state.rho, &us[i], &views, &kappa_by_agent[i])?;
            rho_shift =
                rho_shift.max(max_abs_diff(new_rho.view(), state.rho.view()) / steps.sigma[i]);
            state.rho = new_rho;
        }
        mailbox.advance_round()?;

        let rel = relative_error(&states, term);
        let gap = consensus_gap(&states);
        let fixed_point = states
            .iter()
            .zip(&us)
            .zip(&steps.sigma)
            .map(|((st, u), &sigma)| max_abs_diff(u.view(), st.x.view()) / sigma)
            .fold(0.0, f64::max);
        records.push(RoundRecord { round, rel_error: rel, consensus_gap: gap, fixed_point_residual: fixed_point });
        track_rho(&states, &mut max_rho_imbalance, &mut max_rho_scale);
        observer(round, &states);

        let converged = match rel {
            Some(r) => r <= term.tol,
            None => fixed_point.max(dual_shift).max(rho_shift) <= term.tol,
        };
        if converged {
            status = RunStatus::Converged;
            break;
        }
    }

    Ok(finish(records, mailbox, status, states, max_rho_imbalance, max_rho_scale))
}

fn relative_error(states: &[AgentState], term: &Termination) -> Option<f64> {
    term.reference.as_ref().map(|(reference, norm)| {
        states
            .iter()
            .map(|st| max_abs_diff(st.x.view(), reference.view()) / norm)
            .fold(0.0, f64::max)
    })
}

fn consensus_gap(states: &[AgentState]) -> f64 {
    let n = states[0].x.len();
    let mut mean = Array1::zeros(n);
    for st in states {
        mean += &st.x;
    }
    mean /= states.len() as f64;
    states
        .iter()
        .map(|st| max_abs_diff(st.x.view(), mean.view()))
        .fold(0.0, f64::max)
}

fn track_rho(states: &[AgentState], imbalance: &mut f64, scale: &mut f64) {
    let n = states[0].rho.len();
    let mut sum = Array1::zeros(n);
    for st in states {
        sum += &st.rho;
        let local = st.rho.iter().map(|v| v.abs()).fold(0.0, f64::max);
        *scale = scale.max(local);
    }
    let total = sum.iter().map(|v: &f64| v.abs()).fold(0.0, f64::max);
    *imbalance = imbalance.max(total);
}

fn max_abs_diff(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Upper bound for the combined operator norm: `||Laplacian|| + max_i
/// ||C_i||^2`, each term by power iteration and inflated by the tolerance.
/// Cheap and distribution-friendly; only tightens the validated condition.
pub fn combined_norm_bound(
    graph: &Graph,
    prob: &ConsensusProblem,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<f64, SolverError> {
    let lap = graph.laplacian_norm(tol, max_iter, seed)?.inflated(tol);
    let mut c_max = 0.0_f64;
    for agent in prob.agents() {
        let c = &agent.c;
        if c.nrows() == 0 {
            continue;
        }
        let est = spectral_norm(|v| c.t().dot(&c.dot(v)), c.ncols(), tol, max_iter, seed)?;
        c_max = c_max.max(est.inflated(tol));
    }
    Ok(lap + c_max)
}

/// Power-iteration estimate of the exact combined operator norm
/// `||Laplacian (x) I_n + blkdiag(C_i^T C_i)||` on the stacked space,
/// inflated by the tolerance.
pub fn combined_norm_exact(
    graph: &Graph,
    prob: &ConsensusProblem,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<f64, SolverError> {
    let n = prob.dim();
    let stacked = graph.num_nodes() * n;
    let est = spectral_norm(
        |v| {
            let mut out = Array1::zeros(stacked);
            for i in 0..graph.num_nodes() {
                let vi = v.slice(s![i * n..(i + 1) * n]);
                let mut acc = vi.to_owned() * graph.degree(i) as f64;
                for &j in graph.neighbors(i) {
                    acc -= &v.slice(s![j * n..(j + 1) * n]);
                }
                let c = &prob.agents()[i].c;
                if c.nrows() > 0 {
                    acc = acc + c.t().dot(&c.dot(&vi));
                }
                out.slice_mut(s![i * n..(i + 1) * n]).assign(&acc);
            }
            out
        },
        stacked,
        tol,
        max_iter,
        seed,
    )?;
    Ok(est.inflated(tol))
}

//! Consensus problem instances, the lasso benchmark generator, a centralized
//! FISTA oracle for ground truth, and optimality-residual checks.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::spectral_norm;
use crate::prox::{ProxFunction, ScaledL1, SqDistance};

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("lambda {lambda} violates the bound lambda < 0.1*||sum D_i^T d_i||_inf = {bound}")]
    LambdaBound { lambda: f64, bound: f64 },
    #[error("agent {agent}: matrix has {got} columns, expected {expected}")]
    BadAgentShape { agent: usize, expected: usize, got: usize },
    #[error("oracle did not converge in {iterations} iterations; residual {residual}")]
    OracleDidNotConverge { residual: f64, iterations: usize },
    #[error("power iteration failed: {0}")]
    Spectral(#[from] crate::graph::GraphError),
    #[error("bad instance file {path}: {reason}")]
    BadFile { path: String, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("manifest: {0}")]
    Manifest(#[from] serde_json::Error),
}

/// One agent's private cost: `f(x) + g(Cx)` with `C` of shape `r x n`.
/// An agent with `r = 0` carries no g-term (the reduced problem class).
#[derive(Clone)]
pub struct AgentCost {
    pub f: Arc<dyn ProxFunction>,
    pub g: Arc<dyn ProxFunction>,
    pub c: Array2<f64>,
}

/// The shared-variable instance `min_x sum_i f_i(x) + g_i(C_i x)`.
#[derive(Clone)]
pub struct ConsensusProblem {
    dim: usize,
    agents: Vec<AgentCost>,
}

impl ConsensusProblem {
    pub fn new(dim: usize, agents: Vec<AgentCost>) -> Result<Self, ProblemError> {
        if agents.is_empty() {
            return Err(ProblemError::InvalidParameter("at least one agent required".into()));
        }
        for (i, a) in agents.iter().enumerate() {
            if a.c.ncols() != dim {
                return Err(ProblemError::BadAgentShape {
                    agent: i,
                    expected: dim,
                    got: a.c.ncols(),
                });
            }
        }
        Ok(Self { dim, agents })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn agents(&self) -> &[AgentCost] {
        &self.agents
    }

    /// Row count of agent `i`'s linear operator (0 when the g-term is absent).
    pub fn rows(&self, agent: usize) -> usize {
        self.agents[agent].c.nrows()
    }

    /// True iff every agent has an empty g-term.
    pub fn is_reduced(&self) -> bool {
        self.agents.iter().all(|a| a.c.nrows() == 0)
    }

    /// `sum_i f_i(x) + g_i(C_i x)`.
    pub fn objective(&self, x: ArrayView1<f64>) -> f64 {
        let mut total = 0.0;
        for a in &self.agents {
            total += a.f.evaluate(x);
            total += a.g.evaluate(a.c.dot(&x).view());
        }
        total
    }
}

/// Parameters for the lasso instance generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LassoParams {
    pub num_agents: usize,
    pub dim: usize,
    pub rows_per_agent: usize,
    /// Fraction of nonzero entries in the planted vector.
    pub sparsity: f64,
    /// Regularization as a fraction of `||sum D_i^T d_i||_inf`; must stay
    /// below 0.1.
    pub lambda_frac: f64,
    pub noise_std: f64,
    /// Standard deviation of the design entries. 1.0 draws plain standard
    /// normals; `1/sqrt(rows_per_agent)` keeps `||D_i||^2` comparable to the
    /// graph Laplacian norm, which the uniform step-size rule rewards.
    pub entry_std: f64,
    pub seed: u64,
}

impl Default for LassoParams {
    fn default() -> Self {
        Self {
            num_agents: 50,
            dim: 500,
            rows_per_agent: 50,
            sparsity: 0.1,
            lambda_frac: 0.05,
            noise_std: 0.0,
            entry_std: 1.0,
            seed: 1,
        }
    }
}

/// An l1-regularized least-squares instance split across agents:
/// `min_x lambda*||x||_1 + sum_i 0.5*||D_i x - d_i||^2`.
#[derive(Clone)]
pub struct LassoInstance {
    pub problem: ConsensusProblem,
    pub design: Vec<Array2<f64>>,
    pub targets: Vec<Array1<f64>>,
    pub lambda: f64,
    pub planted: Array1<f64>,
    pub seed: u64,
}

impl LassoInstance {
    /// Assembles an instance, enforcing `lambda < 0.1*||sum D_i^T d_i||_inf`.
    pub fn new(
        design: Vec<Array2<f64>>,
        targets: Vec<Array1<f64>>,
        lambda: f64,
        planted: Array1<f64>,
        seed: u64,
    ) -> Result<Self, ProblemError> {
        let bound = 0.1 * correlation_inf_norm(&design, &targets)?;
        if !(lambda < bound) {
            return Err(ProblemError::LambdaBound { lambda, bound });
        }
        Self::from_parts_unchecked(design, targets, lambda, planted, seed)
    }

    /// As [`LassoInstance::new`] without the lambda bound; intended for
    /// degenerate test instances (`lambda = 0`, null-solution thresholds).
    pub fn from_parts_unchecked(
        design: Vec<Array2<f64>>,
        targets: Vec<Array1<f64>>,
        lambda: f64,
        planted: Array1<f64>,
        seed: u64,
    ) -> Result<Self, ProblemError> {
        if design.len() != targets.len() || design.is_empty() {
            return Err(ProblemError::InvalidParameter(
                "design/target lists must be nonempty and of equal length".into(),
            ));
        }
        let dim = design[0].ncols();
        let num_agents = design.len();
        let mut agents = Vec::with_capacity(num_agents);
        for (i, (d, t)) in design.iter().zip(&targets).enumerate() {
            if d.nrows() != t.len() {
                return Err(ProblemError::BadAgentShape {
                    agent: i,
                    expected: d.nrows(),
                    got: t.len(),
                });
            }
            agents.push(AgentCost {
                f: Arc::new(ScaledL1::new(lambda / num_agents as f64)),
                g: Arc::new(SqDistance::new(t.clone())),
                c: d.clone(),
            });
        }
        let problem = ConsensusProblem::new(dim, agents)?;
        Ok(Self { design, targets, lambda, planted, seed, problem })
    }

    pub fn num_agents(&self) -> usize {
        self.design.len()
    }

    pub fn dim(&self) -> usize {
        self.problem.dim()
    }

    /// `sum_i D_i^T D_i`, the Gram matrix of the stacked design.
    pub fn gram(&self) -> Array2<f64> {
        let n = self.dim();
        let mut h = Array2::zeros((n, n));
        for d in &self.design {
            h = h + d.t().dot(d);
        }
        h
    }

    /// `sum_i D_i^T d_i`.
    pub fn correlation(&self) -> Array1<f64> {
        let mut q = Array1::zeros(self.dim());
        for (d, t) in self.design.iter().zip(&self.targets) {
            q = q + d.t().dot(t);
        }
        q
    }
}

fn correlation_inf_norm(
    design: &[Array2<f64>],
    targets: &[Array1<f64>],
) -> Result<f64, ProblemError> {
    if design.is_empty() || design.len() != targets.len() {
        return Err(ProblemError::InvalidParameter(
            "design/target lists must be nonempty and of equal length".into(),
        ));
    }
    let n = design[0].ncols();
    let mut q: Array1<f64> = Array1::zeros(n);
    for (d, t) in design.iter().zip(targets) {
        q = q + d.t().dot(t);
    }
    Ok(q.iter().map(|v| v.abs()).fold(0.0, f64::max))
}

/// Generates a lasso instance: standard-normal `D_i`, a planted sparse
/// solution, `d_i = D_i x + noise`, and `lambda = lambda_frac * ||sum D_i^T
/// d_i||_inf`. Bit-reproducible for a fixed seed and parameter set.
pub fn generate_lasso(params: &LassoParams) -> Result<LassoInstance, ProblemError> {
    if params.num_agents == 0 || params.dim == 0 || params.rows_per_agent == 0 {
        return Err(ProblemError::InvalidParameter(
            "num_agents, dim, and rows_per_agent must be positive".into(),
        ));
    }
    if !(params.sparsity > 0.0 && params.sparsity <= 1.0) {
        return Err(ProblemError::InvalidParameter(format!(
            "sparsity {} outside (0, 1]",
            params.sparsity
        )));
    }
    if !(params.lambda_frac > 0.0) || !(params.noise_std >= 0.0) {
        return Err(ProblemError::InvalidParameter(
            "lambda_frac must be positive and noise_std nonnegative".into(),
        ));
    }
    if !(params.entry_std > 0.0) {
        return Err(ProblemError::InvalidParameter(format!(
            "entry_std {} must be positive",
            params.entry_std
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.dim;

    // planted sparse vector: positions by partial Fisher-Yates, then values
    let num_nonzero = ((params.sparsity * n as f64).ceil() as usize).clamp(1, n);
    let mut indices: Vec<usize> = (0..n).collect();
    for i in 0..num_nonzero {
        let j = rng.random_range(i..n);
        indices.swap(i, j);
    }
    let mut support: Vec<usize> = indices[..num_nonzero].to_vec();
    support.sort_unstable();
    let mut planted = Array1::zeros(n);
    for &idx in &support {
        planted[idx] = rng.sample::<f64, _>(StandardNormal);
    }

    let mut design = Vec::with_capacity(params.num_agents);
    let mut targets = Vec::with_capacity(params.num_agents);
    for _ in 0..params.num_agents {
        let d = Array2::from_shape_fn((params.rows_per_agent, n), |_| {
            params.entry_std * rng.sample::<f64, _>(StandardNormal)
        });
        let mut t = d.dot(&planted);
        if params.noise_std > 0.0 {
            for v in t.iter_mut() {
                *v += params.noise_std * rng.sample::<f64, _>(StandardNormal);
            }
        }
        design.push(d);
        targets.push(t);
    }

    let lambda = params.lambda_frac * correlation_inf_norm(&design, &targets)?;
    LassoInstance::new(design, targets, lambda, planted, params.seed)
}

/// Centralized FISTA solve of the lasso instance, run until the prox-gradient
/// fixed-point residual `||x - prox(x - grad/L)||_inf` drops below `tol`.
///
/// Independent of the distributed solver; used as ground truth for relative
/// errors.
pub fn oracle_solve(
    inst: &LassoInstance,
    tol: f64,
    max_iter: usize,
) -> Result<Array1<f64>, ProblemError> {
    if !(tol > 0.0) {
        return Err(ProblemError::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    let n = inst.dim();
    let h = inst.gram();
    let q = inst.correlation();
    let lip = spectral_norm(|v| h.dot(v), n, 1e-10, 50_000, inst.seed)?
        .inflated(1e-10)
        .max(f64::MIN_POSITIVE);
    let shrink = inst.lambda / lip;

    let soft = |v: &Array1<f64>| v.mapv(|a| a.signum() * (a.abs() - shrink).max(0.0));

    let mut x = Array1::<f64>::zeros(n);
    let mut z = x.clone();
    let mut momentum = 1.0_f64;
    let mut residual = f64::INFINITY;
    for _iter in 0..max_iter {
        let grad_z = h.dot(&z) - &q;
        let x_new = soft(&(&z - &(&grad_z / lip)));
        // cheap surrogate check at z, confirmed with the exact residual at x
        let surrogate = max_abs_diff(&z, &x_new);
        if surrogate <= tol {
            let grad_x = h.dot(&x_new) - &q;
            let next = soft(&(&x_new - &(&grad_x / lip)));
            residual = max_abs_diff(&x_new, &next);
            if residual <= tol {
                return Ok(x_new);
            }
        }
        // gradient-based adaptive restart
        if (&z - &x_new).dot(&(&x_new - &x)) > 0.0 {
            momentum = 1.0;
            z = x.clone();
            continue;
        }
        let momentum_new = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        z = &x_new + &((momentum - 1.0) / momentum_new * (&x_new - &x));
        x = x_new;
        momentum = momentum_new;
    }
    Err(ProblemError::OracleDidNotConverge { residual, iterations: max_iter })
}

fn max_abs_diff(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Distance (in the max norm) of `-grad h(x) = sum_i D_i^T (d_i - D_i x)` to
/// the subdifferential `lambda * d||x||_1(x)`; zero exactly at minimizers.
pub fn optimality_residual(inst: &LassoInstance, x: ArrayView1<f64>) -> f64 {
    let mut neg_grad: Array1<f64> = Array1::zeros(inst.dim());
    for (d, t) in inst.design.iter().zip(&inst.targets) {
        let r = t - &d.dot(&x);
        neg_grad = neg_grad + d.t().dot(&r);
    }
    let lambda = inst.lambda;
    let mut worst = 0.0_f64;
    for (j, &g) in neg_grad.iter().enumerate() {
        let dist = if x[j] != 0.0 {
            (g - lambda * x[j].signum()).abs()
        } else {
            (g.abs() - lambda).max(0.0)
        };
        worst = worst.max(dist);
    }
    worst
}

// ---------------------------------------------------------------------------
// On-disk instance format
// ---------------------------------------------------------------------------

const MATRIX_MAGIC: &[u8; 5] = b"AFBA1";

#[derive(Serialize, Deserialize)]
struct Manifest {
    format: String,
    num_agents: usize,
    dim: usize,
    rows: Vec<usize>,
    lambda: f64,
    seed: u64,
}

fn write_matrix(path: &Path, rows: usize, cols: usize, data: &[f64]) -> Result<(), ProblemError> {
    debug_assert_eq!(rows * cols, data.len());
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    out.write_all(MATRIX_MAGIC)?;
    out.write_all(&(rows as u64).to_le_bytes())?;
    out.write_all(&(cols as u64).to_le_bytes())?;
    for v in data {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_matrix(path: &Path) -> Result<(usize, usize, Vec<f64>), ProblemError> {
    let bad = |reason: &str| ProblemError::BadFile {
        path: path.display().to_string(),
        reason: reason.to_string(),
    };
    let mut input = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 5];
    input.read_exact(&mut magic).map_err(|_| bad("truncated header"))?;
    if &magic != MATRIX_MAGIC {
        return Err(bad("bad magic"));
    }
    let mut word = [0u8; 8];
    input.read_exact(&mut word).map_err(|_| bad("truncated dims"))?;
    let rows = u64::from_le_bytes(word) as usize;
    input.read_exact(&mut word).map_err(|_| bad("truncated dims"))?;
    let cols = u64::from_le_bytes(word) as usize;
    let mut data = vec![0.0; rows * cols];
    for v in data.iter_mut() {
        input.read_exact(&mut word).map_err(|_| bad("truncated payload"))?;
        *v = f64::from_le_bytes(word);
    }
    if input.read(&mut [0u8; 1])? != 0 {
        return Err(bad("trailing bytes"));
    }
    Ok((rows, cols, data))
}

impl LassoInstance {
    /// Writes the instance to a directory: `manifest.json` plus row-major
    /// little-endian f64 matrices with an `AFBA1` header (see the README for
    /// the exact byte layout).
    pub fn save_dir(&self, dir: &Path) -> Result<(), ProblemError> {
        std::fs::create_dir_all(dir)?;
        let manifest = Manifest {
            format: "AFBA1".to_string(),
            num_agents: self.num_agents(),
            dim: self.dim(),
            rows: self.design.iter().map(|d| d.nrows()).collect(),
            lambda: self.lambda,
            seed: self.seed,
        };
        let file = std::fs::File::create(dir.join("manifest.json"))?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), &manifest)?;
        for (i, (d, t)) in self.design.iter().zip(&self.targets).enumerate() {
            write_matrix(
                &dir.join(format!("design_{i:03}.bin")),
                d.nrows(),
                d.ncols(),
                d.as_slice().expect("design matrices are standard layout"),
            )?;
            write_matrix(
                &dir.join(format!("target_{i:03}.bin")),
                t.len(),
                1,
                t.as_slice().expect("targets are contiguous"),
            )?;
        }
        write_matrix(
            &dir.join("planted.bin"),
            self.planted.len(),
            1,
            self.planted.as_slice().expect("planted is contiguous"),
        )?;
        Ok(())
    }

    /// Reads an instance directory written by [`LassoInstance::save_dir`].
    pub fn load_dir(dir: &Path) -> Result<Self, ProblemError> {
        let manifest_path = dir.join("manifest.json");
        let file = std::fs::File::open(&manifest_path)?;
        let manifest: Manifest = serde_json::from_reader(std::io::BufReader::new(file))?;
        if manifest.format != "AFBA1" {
            return Err(ProblemError::BadFile {
                path: manifest_path.display().to_string(),
                reason: format!("unknown format {:?}", manifest.format),
            });
        }
        if manifest.rows.len() != manifest.num_agents {
            return Err(ProblemError::BadFile {
                path: manifest_path.display().to_string(),
                reason: "rows list length does not match num_agents".to_string(),
            });
        }
        let mut design = Vec::with_capacity(manifest.num_agents);
        let mut targets = Vec::with_capacity(manifest.num_agents);
        for (i, &m) in manifest.rows.iter().enumerate() {
            let d_path = dir.join(format!("design_{i:03}.bin"));
            let (rows, cols, data) = read_matrix(&d_path)?;
            if rows != m || cols != manifest.dim {
                return Err(ProblemError::BadFile {
                    path: d_path.display().to_string(),
                    reason: format!("expected {m}x{}, found {rows}x{cols}", manifest.dim),
                });
            }
            design.push(
                Array2::from_shape_vec((rows, cols), data).expect("shape checked above"),
            );
            let t_path = dir.join(format!("target_{i:03}.bin"));
            let (rows, cols, data) = read_matrix(&t_path)?;
            if rows != m || cols != 1 {
                return Err(ProblemError::BadFile {
                    path: t_path.display().to_string(),
                    reason: format!("expected {m}x1, found {rows}x{cols}"),
                });
            }
            targets.push(Array1::from_vec(data));
        }
        let p_path = dir.join("planted.bin");
        let (rows, cols, data) = read_matrix(&p_path)?;
        if rows != manifest.dim || cols != 1 {
            return Err(ProblemError::BadFile {
                path: p_path.display().to_string(),
                reason: format!("expected {}x1, found {rows}x{cols}", manifest.dim),
            });
        }
        LassoInstance::new(design, targets, manifest.lambda, Array1::from_vec(data), manifest.seed)
    }
}

//! Proximal operators for the separable cost pieces. Conjugate proxes are
//! never implemented directly: they all route through the Moreau
//! decomposition, so adding a new function only requires its primal prox.

use ndarray::{Array1, ArrayView1};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProxError {
    #[error("input contains a non-finite entry")]
    NonFinite,
    #[error("step size {0} is not positive")]
    NonPositiveStep(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("mismatched list lengths: {fs} f-terms, {gs} g-terms, {cs} matrices")]
    LengthMismatch { fs: usize, gs: usize, cs: usize },
}

/// A proper closed convex function with a computable proximal mapping.
///
/// `evaluate` may return `f64::INFINITY` off-domain; `prox` always returns a
/// finite point for finite input. `is_plq` is metadata flagging piecewise
/// linear-quadratic functions (these enjoy R-linear convergence in the
/// solver).
pub trait ProxFunction: Send + Sync {
    fn evaluate(&self, x: ArrayView1<f64>) -> f64;

    /// `argmin_z f(z) + (1/(2*step)) * ||z - v||^2` for `step > 0`.
    fn prox(&self, v: ArrayView1<f64>, step: f64) -> Array1<f64>;

    fn is_plq(&self) -> bool;
}

/// The zero function; its prox is the identity.
#[derive(Debug, Clone, Copy, Default)]
pub struct Zero;

impl ProxFunction for Zero {
    fn evaluate(&self, _x: ArrayView1<f64>) -> f64 {
        0.0
    }

    fn prox(&self, v: ArrayView1<f64>, _step: f64) -> Array1<f64> {
        v.to_owned()
    }

    fn is_plq(&self) -> bool {
        true
    }
}

/// `weight * ||x||_1`; prox is soft thresholding.
#[derive(Debug, Clone, Copy)]
pub struct ScaledL1 {
    weight: f64,
}

impl ScaledL1 {
    pub fn new(weight: f64) -> Self {
        assert!(weight >= 0.0 && weight.is_finite(), "l1 weight must be nonnegative");
        Self { weight }
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }
}

impl ProxFunction for ScaledL1 {
    fn evaluate(&self, x: ArrayView1<f64>) -> f64 {
        self.weight * x.iter().map(|v| v.abs()).sum::<f64>()
    }

    fn prox(&self, v: ArrayView1<f64>, step: f64) -> Array1<f64> {
        soft_threshold(v, self.weight * step)
    }

    fn is_plq(&self) -> bool {
        true
    }
}

/// `0.5 * ||z - center||^2`, the squared-distance data term.
#[derive(Debug, Clone)]
pub struct SqDistance {
    center: Array1<f64>,
}

impl SqDistance {
    pub fn new(center: Array1<f64>) -> Self {
        Self { center }
    }

    pub fn center(&self) -> &Array1<f64> {
        &self.center
    }
}

impl ProxFunction for SqDistance {
    fn evaluate(&self, x: ArrayView1<f64>) -> f64 {
        let diff = &x - &self.center;
        0.5 * diff.dot(&diff)
    }

    fn prox(&self, v: ArrayView1<f64>, step: f64) -> Array1<f64> {
        (&v + &(step * &self.center)) / (1.0 + step)
    }

    fn is_plq(&self) -> bool {
        true
    }
}

/// Indicator of the box `[lower, upper]^n`; prox is the clamp.
#[derive(Debug, Clone, Copy)]
pub struct BoxIndicator {
    lower: f64,
    upper: f64,
}

impl BoxIndicator {
    pub fn new(lower: f64, upper: f64) -> Self {
        assert!(lower <= upper, "box bounds out of order");
        Self { lower, upper }
    }
}

impl ProxFunction for BoxIndicator {
    fn evaluate(&self, x: ArrayView1<f64>) -> f64 {
        if x.iter().all(|&v| v >= self.lower && v <= self.upper) {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn prox(&self, v: ArrayView1<f64>, _step: f64) -> Array1<f64> {
        v.mapv(|a| a.clamp(self.lower, self.upper))
    }

    fn is_plq(&self) -> bool {
        true
    }
}

fn soft_threshold(v: ArrayView1<f64>, t: f64) -> Array1<f64> {
    v.mapv(|a| a.signum() * (a.abs() - t).max(0.0))
}

/// Soft thresholding: componentwise `sign(v) * max(|v| - t, 0)`.
pub fn prox_l1(v: ArrayView1<f64>, t: f64) -> Result<Array1<f64>, ProxError> {
    if !(t > 0.0) {
        return Err(ProxError::NonPositiveStep(t));
    }
    if v.iter().any(|a| !a.is_finite()) {
        return Err(ProxError::NonFinite);
    }
    Ok(soft_threshold(v, t))
}

/// Prox of `0.5 * ||z - d||^2` with step `t`: `(v + t*d) / (1 + t)`.
pub fn prox_sq_dist(
    v: ArrayView1<f64>,
    d: ArrayView1<f64>,
    t: f64,
) -> Result<Array1<f64>, ProxError> {
    if !(t > 0.0) {
        return Err(ProxError::NonPositiveStep(t));
    }
    if v.len() != d.len() {
        return Err(ProxError::DimensionMismatch { expected: d.len(), got: v.len() });
    }
    Ok((&v + &(t * &d)) / (1.0 + t))
}

/// Prox of the Fenchel conjugate via the Moreau decomposition:
/// `prox_{t f*}(v) = v - t * prox_{f/t}(v/t)`.
pub fn prox_conjugate(f: &dyn ProxFunction, v: ArrayView1<f64>, t: f64) -> Array1<f64> {
    assert!(t > 0.0, "conjugate prox step must be positive");
    let inner = f.prox((&v / t).view(), 1.0 / t);
    &v - &(t * inner)
}

/// `sum_i f_i(x) + g_i(C_i x)`; `f64::INFINITY` when any term is infinite.
pub fn evaluate_objective(
    fs: &[std::sync::Arc<dyn ProxFunction>],
    gs: &[std::sync::Arc<dyn ProxFunction>],
    cs: &[ndarray::Array2<f64>],
    x: ArrayView1<f64>,
) -> Result<f64, ProxError> {
    if fs.len() != gs.len() || fs.len() != cs.len() {
        return Err(ProxError::LengthMismatch { fs: fs.len(), gs: gs.len(), cs: cs.len() });
    }
    let mut total = 0.0;
    for ((f, g), c) in fs.iter().zip(gs).zip(cs) {
        if c.ncols() != x.len() {
            return Err(ProxError::DimensionMismatch { expected: c.ncols(), got: x.len() });
        }
        total += f.evaluate(x);
        let cx = c.dot(&x);
        total += g.evaluate(cx.view());
        if total == f64::INFINITY {
            return Ok(f64::INFINITY);
        }
    }
    Ok(total)
}

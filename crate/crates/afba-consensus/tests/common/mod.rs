//! Shared oracles for the integration tests: a direct single-node
//! transcription of the primal-dual recursion (no caching, inline proxes)
//! and a least-squares line fit.

use ndarray::{Array1, Array2};

/// Direct transcription of the stacked primal-dual iteration for a single
/// node (the edge dual vanishes): three matrix applications per round,
/// soft-thresholding and the conjugate quadratic prox written out in closed
/// form. Returns the primal iterate after each round.
pub fn single_node_direct(
    design: &Array2<f64>,
    target: &Array1<f64>,
    lambda: f64,
    sigma: f64,
    tau: f64,
    theta: f64,
    rounds: usize,
) -> Vec<Array1<f64>> {
    let n = design.ncols();
    let m = design.nrows();
    let mut x = Array1::<f64>::zeros(n);
    let mut y = Array1::<f64>::zeros(m);
    let mut iterates = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let grad = design.t().dot(&y);
        let shrink = sigma * lambda;
        let x_new =
            (&x - &(&grad * sigma)).mapv(|a| a.signum() * (a.abs() - shrink).max(0.0));
        let mid = &x_new * theta + &x * (1.0 - theta);
        let v = &y + &(&design.dot(&mid) * tau);
        let y_bar = (&v - &(target * tau)) / (1.0 + tau);
        let y_new = &y_bar + &(&design.dot(&(&x_new - &x)) * (tau * (2.0 - theta)));
        x = x_new;
        y = y_new;
        iterates.push(x.clone());
    }
    iterates
}

/// Ordinary least squares fit `y ~ a + b x`; returns `(slope, r_squared)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, r_squared)
}

pub fn max_abs_diff(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn inf_norm(a: &Array1<f64>) -> f64 {
    a.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

//! Tour of the proximal-operator library: soft thresholding, the quadratic
//! data term, and conjugate proxes obtained through the Moreau decomposition.
//!
//! ```sh
//! cargo run --example prox_basics
//! ```

use afba_consensus::prox::{
    prox_conjugate, prox_l1, prox_sq_dist, BoxIndicator, ProxFunction, ScaledL1, SqDistance,
};
use ndarray::array;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let v = array![3.0, -0.5, 0.0, 1.2];
    println!("soft threshold {v} at t = 1: {}", prox_l1(v.view(), 1.0)?);

    let d = array![1.0, 1.0, 1.0, 1.0];
    println!(
        "prox of 0.5*||z - 1||^2 at {v}, t = 1: {}",
        prox_sq_dist(v.view(), d.view(), 1.0)?
    );

    // conjugate prox of the l1 norm is the clamp onto [-w, w]
    let l1 = ScaledL1::new(0.8);
    println!("conjugate l1 prox (clamp to [-0.8, 0.8]): {}", prox_conjugate(&l1, v.view(), 2.0));

    // Moreau decomposition: v = prox_{t f*}(v) + t * prox_{f/t}(v / t)
    let g = SqDistance::new(d);
    let t = 0.7;
    let conj = prox_conjugate(&g, v.view(), t);
    let primal = g.prox((&v / t).view(), 1.0 / t);
    let recomposed = &conj + &(&primal * t);
    let residual = (&recomposed - &v).iter().map(|e| e.abs()).fold(0.0, f64::max);
    println!("Moreau recomposition residual: {residual:.3e}");

    let clamp = BoxIndicator::new(-1.0, 1.0);
    println!(
        "box indicator evaluate off-domain: {}, prox (projection): {}",
        clamp.evaluate(v.view()),
        clamp.prox(v.view(), 1.0)
    );
    Ok(())
}

//! Acceptance suite. Each test covers one criterion and prints a single
//! pass/fail line; run with
//! `cargo test --test acceptance -- --nocapture` to see them.
//!
//! The benchmark sweep (criteria 1, 2, 8) uses the reference configuration
//! (50 agents, p = 0.05, n = 500, 50 rows per agent, alpha = 20, tolerance
//! 1e-6) over 50 graph seeds, with the stacked design scaled to roughly
//! unit column norms so the uniform step-size rule is not starved by the
//! design blocks.

mod common;

use std::path::PathBuf;
use std::sync::LazyLock;

use ndarray::{array, Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use afba_consensus::experiment::{run_experiment, ExperimentConfig, ExperimentOutcome};
use afba_consensus::graph::{erdos_renyi, Graph};
use afba_consensus::problem::{
    generate_lasso, optimality_residual, AgentCost, ConsensusProblem, LassoInstance, LassoParams,
};
use afba_consensus::prox::{
    prox_conjugate, BoxIndicator, ProxFunction, ScaledL1, SqDistance, Zero,
};
use afba_consensus::solver::{
    combined_norm_bound, default_stepsizes, run, run_reduced_with_observer, run_with_observer,
    theta_factor, validate_stepsizes, RunStatus, StepSizes, Termination,
};

fn report(id: u32, what: &str, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("[acceptance] criterion {id} ({what}): {verdict} - {detail}");
    assert!(ok, "criterion {id} ({what}) failed: {detail}");
}

struct PaperSweep {
    cfg: ExperimentConfig,
    outcome: ExperimentOutcome,
    _dir: tempfile::TempDir,
}

/// One shared benchmark sweep at the reference configuration.
static PAPER_SWEEP: LazyLock<PaperSweep> = LazyLock::new(|| {
    let dir = tempfile::tempdir().expect("tempdir");
    let mut cfg = ExperimentConfig::benchmark(dir.path().to_path_buf());
    cfg.graph_seeds = (1..=50).collect();
    cfg.data_seed = 7;
    cfg.entry_std = 0.02; // unit-norm columns of the stacked 2500 x 500 design
    cfg.max_rounds = 25_000;
    let outcome = run_experiment(&cfg).expect("benchmark sweep");
    PaperSweep { cfg, outcome, _dir: dir }
});

#[test]
fn criterion_1_theta_ordering_and_convergence() {
    let sweep = &*PAPER_SWEEP;
    let seeds = sweep.cfg.graph_seeds.len();
    let mut detail = String::new();
    let mut ok = true;
    let mut median = |theta: f64| -> f64 {
        let s = sweep
            .outcome
            .summaries
            .iter()
            .find(|s| s.theta == theta)
            .expect("theta summary");
        if s.n_converged * 100 < seeds * 95 {
            ok = false;
        }
        detail.push_str(&format!(
            "theta={theta}: median {} ({}/{seeds} converged); ",
            s.median_rounds.map(|m| m.to_string()).unwrap_or_else(|| "-".into()),
            s.n_converged
        ));
        s.median_rounds.unwrap_or(f64::INFINITY)
    };
    let medians: Vec<f64> = [0.0, 0.5, 1.5, 2.0].iter().map(|&t| median(t)).collect();
    let ordering = medians[2] < medians[3];
    detail.push_str(&format!(
        "ordering median(1.5)={} < median(2)={}: {}",
        medians[2], medians[3], ordering
    ));
    report(1, "theta sweep ordering and >=95% convergence", ok && ordering, &detail);
}

#[test]
fn criterion_2_ground_truth_agreement() {
    let sweep = &*PAPER_SWEEP;
    let inst = &sweep.outcome.instance;
    let reference = &sweep.outcome.reference;
    let ref_norm = common::inf_norm(reference);
    let mut converged = 0usize;
    let mut worst_final = 0.0_f64;
    let mut worst_mean = 0.0_f64;
    for r in &sweep.outcome.runs {
        if r.status != RunStatus::Converged {
            continue;
        }
        converged += 1;
        worst_final = worst_final.max(r.final_rel_error.expect("relative-error mode"));
        worst_mean = worst_mean.max(common::max_abs_diff(&r.mean_x, reference) / ref_norm);
    }
    // independent certificate that the oracle reference is the minimizer,
    // which upgrades the 1e-6 termination agreement to 1e-5 confidence
    let certificate = optimality_residual(inst, reference.view());
    let ok = converged > 0
        && worst_final <= sweep.cfg.tol
        && worst_mean <= 1e-5
        && certificate <= 1e-5 * inst.lambda;
    report(
        2,
        "ground-truth agreement",
        ok,
        &format!(
            "{converged} converged runs; worst final rel err {worst_final:.3e} <= {:.0e}; \
             worst mean-iterate rel err {worst_mean:.3e} <= 1e-5; \
             oracle residual {certificate:.3e} <= 1e-5*lambda = {:.3e}",
            sweep.cfg.tol,
            1e-5 * inst.lambda
        ),
    );
}

#[test]
fn criterion_3_single_node_matches_direct_transcription() {
    // single agent, theta = 2: the iteration collapses to the classical
    // primal-dual (Chambolle-Pock) recursion with no edge dual
    let n = 40;
    let m = 25;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let design = Array2::from_shape_fn((m, n), |_| 0.3 * (rng.random::<f64>() * 2.0 - 1.0));
    let planted = Array1::from_shape_fn(n, |i| if i % 9 == 0 { 1.0 } else { 0.0 });
    let target = design.dot(&planted);
    let q_norm = common::inf_norm(&design.t().dot(&target));
    let lambda = 0.05 * q_norm;
    let inst = LassoInstance::new(
        vec![design.clone()],
        vec![target.clone()],
        lambda,
        planted,
        21,
    )
    .unwrap();

    let graph = Graph::new(1, vec![]).unwrap();
    let l_norm = combined_norm_bound(&graph, &inst.problem, 1e-10, 50_000, 0).unwrap();
    let theta = 2.0;
    let steps = default_stepsizes(theta, 2.0, l_norm, &graph);
    validate_stepsizes(&steps, l_norm).unwrap();

    let rounds = 100;
    let term = Termination::fixed_point(1e-300, rounds).unwrap();
    let mut iterates: Vec<Array1<f64>> = Vec::new();
    run_with_observer(&inst.problem, &graph, &steps, &term, None, |round, states| {
        if round > 0 {
            iterates.push(states[0].x.clone());
        }
    })
    .unwrap();
    assert_eq!(iterates.len(), rounds);

    let oracle = common::single_node_direct(
        &design,
        &target,
        lambda,
        steps.sigma[0],
        steps.tau[0],
        theta,
        rounds,
    );
    let mut deviation = 0.0_f64;
    for (ours, direct) in iterates.iter().zip(&oracle) {
        deviation = deviation.max(common::max_abs_diff(ours, direct));
    }
    report(
        3,
        "single-node Chambolle-Pock equivalence",
        deviation <= 1e-12,
        &format!("max deviation over {rounds} rounds: {deviation:.3e} <= 1e-12"),
    );
}

#[test]
fn criterion_4_reduced_iteration_equivalence() {
    // 10 agents, quadratic costs, no g-terms
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let n = 4;
    let centers: Vec<Array1<f64>> =
        (0..10).map(|_| Array1::from_shape_fn(n, |_| rng.random::<f64>() * 6.0 - 3.0)).collect();
    let agents: Vec<AgentCost> = centers
        .iter()
        .map(|c| AgentCost {
            f: std::sync::Arc::new(SqDistance::new(c.clone())) as std::sync::Arc<dyn ProxFunction>,
            g: std::sync::Arc::new(Zero),
            c: Array2::zeros((0, n)),
        })
        .collect();
    let prob = ConsensusProblem::new(n, agents).unwrap();
    let graph = erdos_renyi(10, 0.4, 5).unwrap();
    let lap = graph.laplacian_norm(1e-10, 50_000, 0).unwrap().inflated(1e-10);

    let mut worst = 0.0_f64;
    for theta in [0.0, 1.5, 2.0] {
        let steps = default_stepsizes(theta, 1.0, lap, &graph);
        let term = Termination::fixed_point(1e-12, 3_000).unwrap();
        let mut full: Vec<Vec<Array1<f64>>> = Vec::new();
        run_with_observer(&prob, &graph, &steps, &term, None, |_, states| {
            full.push(states.iter().map(|s| s.x.clone()).collect());
        })
        .unwrap();
        let mut reduced: Vec<Vec<Array1<f64>>> = Vec::new();
        run_reduced_with_observer(&prob, &graph, &steps, &term, None, |_, states| {
            reduced.push(states.iter().map(|s| s.x.clone()).collect());
        })
        .unwrap();
        assert_eq!(full.len(), reduced.len(), "round counts differ at theta {theta}");
        for (a, b) in full.iter().zip(&reduced) {
            for (xa, xb) in a.iter().zip(b) {
                worst = worst.max(common::max_abs_diff(xa, xb));
            }
        }
    }
    report(
        4,
        "full vs reduced iterate equivalence",
        worst <= 1e-12,
        &format!("max x deviation across theta in {{0, 1.5, 2}}: {worst:.3e} <= 1e-12"),
    );
}

#[test]
fn criterion_5_conservation_suite() {
    let sweep = &*PAPER_SWEEP;
    let mut worst_ratio = 0.0_f64;
    let mut comm_exact = true;
    for r in &sweep.outcome.runs {
        if r.rho_scale > 0.0 {
            worst_ratio = worst_ratio.max(r.rho_imbalance / r.rho_scale);
        }
        if r.vectors_sent != r.rounds * 2 * r.graph_edges {
            comm_exact = false;
        }
    }

    let mut laplacian_exact = true;
    for seed in 0..100u64 {
        let n = 2 + (seed as usize * 97) % 99; // sizes 2..=100
        let g = erdos_renyi(n, 0.3, 1000 + seed).unwrap();
        let b = g.incidence_matrix();
        if g.laplacian() != b.dot(&b.t()) {
            laplacian_exact = false;
        }
    }

    let ok = worst_ratio <= 1e-10 && comm_exact && laplacian_exact;
    report(
        5,
        "conservation suite",
        ok,
        &format!(
            "max ||sum rho||/||rho|| over {} runs: {worst_ratio:.3e} <= 1e-10; \
             vectors_sent == rounds*2M on all runs: {comm_exact}; \
             B*B^T == Laplacian on 100 graphs: {laplacian_exact}",
            sweep.outcome.runs.len()
        ),
    );
}

#[test]
fn criterion_6_prox_suite() {
    let functions: Vec<(&str, Box<dyn ProxFunction>)> = vec![
        ("zero", Box::new(Zero)),
        ("l1", Box::new(ScaledL1::new(0.7))),
        ("sq_dist", Box::new(SqDistance::new(array![0.9, -1.4, 0.2, 2.5]))),
        ("box", Box::new(BoxIndicator::new(-1.5, 1.0))),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst_moreau = 0.0_f64;
    let mut firm_ok = true;
    for (_, f) in &functions {
        for _ in 0..1000 {
            let v = Array1::from_shape_fn(4, |_| rng.random::<f64>() * 10.0 - 5.0);
            let u = Array1::from_shape_fn(4, |_| rng.random::<f64>() * 10.0 - 5.0);
            let t = [0.1, 1.0, 10.0][rng.random_range(0..3)];
            let conj = prox_conjugate(f.as_ref(), v.view(), t);
            let primal = f.prox((&v / t).view(), 1.0 / t);
            let recomposed = &conj + &(&primal * t);
            worst_moreau = worst_moreau.max(common::max_abs_diff(&recomposed, &v));

            let pu = f.prox(u.view(), t);
            let pv = f.prox(v.view(), t);
            let diff = &pu - &pv;
            if diff.dot(&diff) > diff.dot(&(&u - &v)) + 1e-12 {
                firm_ok = false;
            }
        }
    }

    // scalar prox outputs beat a 1e-4-step grid search of the prox objective
    let scalar_functions: Vec<(&str, Box<dyn ProxFunction>)> = vec![
        ("zero", Box::new(Zero)),
        ("l1", Box::new(ScaledL1::new(0.7))),
        ("sq_dist", Box::new(SqDistance::new(array![0.9]))),
        ("box", Box::new(BoxIndicator::new(-1.5, 1.0))),
    ];
    let mut grid_ok = true;
    for (_, f) in &scalar_functions {
        for _ in 0..50 {
            let v = rng.random::<f64>() * 6.0 - 3.0;
            let t = [0.3, 1.0, 2.5][rng.random_range(0..3)];
            let out = f.prox(array![v].view(), t)[0];
            let objective =
                |z: f64| f.evaluate(array![z].view()) + (z - v) * (z - v) / (2.0 * t);
            let mut z = -4.0;
            let mut best = f64::INFINITY;
            while z <= 4.0 {
                best = best.min(objective(z));
                z += 1e-4;
            }
            if objective(out) > best + 1e-12 {
                grid_ok = false;
            }
        }
    }

    let ok = worst_moreau <= 1e-12 && firm_ok && grid_ok;
    report(
        6,
        "prox suite",
        ok,
        &format!(
            "Moreau residual {worst_moreau:.3e} <= 1e-12 over 1000 samples/function; \
             firm nonexpansiveness: {firm_ok}; grid optimality: {grid_ok}"
        ),
    );
}

#[test]
fn criterion_7_step_size_gate() {
    // worked example 1: 5 - 0.066*0.75*100 = 0.05 > 0
    let ex1 = StepSizes { sigma: vec![0.2], tau: vec![0.066], kappa: vec![], theta: 1.5 };
    let ok1 = validate_stepsizes(&ex1, 100.0).is_ok();
    // worked example 2: equality admitted exactly at theta = 2
    let ex2 = StepSizes { sigma: vec![1.0], tau: vec![1.0], kappa: vec![], theta: 2.0 };
    let ok2 = validate_stepsizes(&ex2, 1.0).is_ok();
    // worked example 3: theta = 0 has factor 3, so 1 - 3 < 0 is rejected
    let ex3 = StepSizes { sigma: vec![1.0], tau: vec![1.0], kappa: vec![], theta: 0.0 };
    let ok3 = validate_stepsizes(&ex3, 1.0).is_err();
    // equality off the theta = 2 boundary is rejected (factor 1 at theta = 1)
    let ex4 = StepSizes { sigma: vec![1.0], tau: vec![1.0], kappa: vec![], theta: 1.0 };
    let ok4 = validate_stepsizes(&ex4, 1.0).is_err();

    let mut defaults_ok = true;
    let graph = erdos_renyi(20, 0.2, 77).unwrap();
    for theta in [0.0, 0.5, 1.0, 1.5, 2.0, 2.5] {
        for l_norm in [0.5, 3.0, 100.0, 4000.0] {
            let steps = default_stepsizes(theta, 20.0, l_norm, &graph);
            if validate_stepsizes(&steps, l_norm).is_err() {
                defaults_ok = false;
            }
        }
    }
    assert!((theta_factor(1.5) - 0.75).abs() < 1e-15);
    let ok = ok1 && ok2 && ok3 && ok4 && defaults_ok;
    report(
        7,
        "step-size gate",
        ok,
        &format!(
            "worked examples [{ok1}, {ok2}, {ok3}], non-boundary equality rejected: {ok4}, \
             defaults always validate: {defaults_ok}"
        ),
    );
}

#[test]
fn criterion_8_r_linear_tail() {
    let sweep = &*PAPER_SWEEP;
    let inst = &sweep.outcome.instance;
    let graph = erdos_renyi(sweep.cfg.nodes, sweep.cfg.edge_prob, 1).unwrap();
    let l_norm = combined_norm_bound(&graph, &inst.problem, 1e-8, 10_000, 1).unwrap();
    let steps = default_stepsizes(1.5, sweep.cfg.alpha, l_norm, &graph);
    let term =
        Termination::relative_error(sweep.outcome.reference.clone(), 1e-8, 25_000).unwrap();
    let trace = run(&inst.problem, &graph, &steps, &term, None).unwrap();
    assert_eq!(trace.status, RunStatus::Converged, "tail run must reach 1e-8");

    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for r in &trace.records {
        let rel = r.rel_error.expect("relative-error mode");
        if rel >= 1e-8 && rel <= 1e-2 {
            xs.push(r.round as f64);
            ys.push(rel.log10());
        }
    }
    let (slope, r_squared) = common::linear_fit(&xs, &ys);
    let ok = xs.len() > 50 && slope < 0.0 && r_squared >= 0.9;
    report(
        8,
        "R-linear tail fit",
        ok,
        &format!(
            "{} tail points, slope {slope:.3e} < 0, R^2 {r_squared:.4} >= 0.9",
            xs.len()
        ),
    );
}

#[test]
fn criterion_9_deterministic_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = ExperimentConfig {
        nodes: 12,
        edge_prob: 0.35,
        dim: 30,
        rows: 12,
        thetas: vec![0.5, 1.5],
        alpha: 20.0,
        lambda_frac: 0.05,
        noise_std: 0.0,
        sparsity: 0.2,
        entry_std: 0.3,
        tol: 1e-6,
        max_rounds: 30_000,
        graph_seeds: vec![1, 2, 3],
        data_seed: 4,
        out_dir: out.clone(),
        graph_file: None,
        exact_lnorm: false,
    };
    let snapshot = |label: &str| -> std::collections::BTreeMap<String, Vec<u8>> {
        std::fs::read_dir(&out)
            .unwrap_or_else(|e| panic!("{label}: {e}"))
            .map(|entry| {
                let entry = entry.unwrap();
                let name = entry.file_name().into_string().unwrap();
                (name.clone(), std::fs::read(entry.path()).unwrap())
            })
            .collect()
    };
    run_experiment(&cfg).unwrap();
    let first = snapshot("first run");
    run_experiment(&cfg).unwrap();
    let second = snapshot("second run");

    let same_names = first.len() == second.len()
        && first.keys().zip(second.keys()).all(|(a, b)| a == b);
    let mut differing: Vec<&str> = Vec::new();
    for (name, bytes) in &first {
        if second.get(name) != Some(bytes) {
            differing.push(name);
        }
    }
    let ok = same_names && differing.is_empty();
    report(
        9,
        "byte-identical reruns under parallel execution",
        ok,
        &format!(
            "{} files compared ({} jobs on a rayon pool); differing: {:?}",
            first.len(),
            cfg.thetas.len() * cfg.graph_seeds.len(),
            differing
        ),
    );
}

#[test]
fn trace_invariants_on_benchmark_sweep() {
    // supporting checks tied to the sweep: statuses are consistent with the
    // recorded traces and every converged run ends at or below tolerance
    let sweep = &*PAPER_SWEEP;
    let mut path = PathBuf::from(sweep.cfg.out_dir.clone());
    path.push("histogram.csv");
    let histogram = std::fs::read_to_string(&path).unwrap();
    assert_eq!(histogram.lines().count(), 1 + sweep.outcome.runs.len());
    for r in &sweep.outcome.runs {
        assert_eq!(r.rounds, r.trace.len(), "trace length equals rounds");
        if r.status == RunStatus::Converged {
            assert!(r.final_rel_error.unwrap() <= sweep.cfg.tol);
        }
    }
}

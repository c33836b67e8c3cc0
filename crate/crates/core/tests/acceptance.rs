//! Acceptance suite: one test per release criterion, each printing a
//! `ACCEPTANCE <name>: PASS/FAIL` line.
//!
//! Training-based criteria run at desk scale by default; the full-scale
//! reproductions (hours of single-core compute) are `#[ignore]`d and run via
//! `cargo test -p dls-core --test acceptance -- --ignored`.

use std::sync::OnceLock;

use dls_core::adaptive::{adaptive_solve, AdaptiveConfig, AdaptiveRun};
use dls_core::evaluate::{relative_l2_error, residual_localization, EvaluationGrid};
use dls_core::loss::{
    total_loss, total_loss_network, total_loss_with_grad, LossWeights, SampleSet,
};
use dls_core::network::{DerivativeMode, MlpParams, PiecewiseNetwork};
use dls_core::problems::{
    make_circle, make_flower, make_heart, make_sphere, make_sunflower, ProblemSpec,
};
use dls_core::rng::SplitMix64;
use dls_core::trainer::{train, TrainConfig};

fn report(name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {name}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

/// Criterion: reverse-accumulation parameter gradients of each loss term
/// match central finite differences (step 1e-6) to relative error 1e-5 per
/// entry, over 20 random small networks.
#[test]
fn criterion_gradient_oracle() {
    let problem = make_circle(10.0, 1.0).unwrap();
    let samples = SampleSet::build(&problem, 6, 6, 3, 0).unwrap();
    let mode = DerivativeMode::Autodiff;
    let step = 1e-6;

    // weight settings isolating the interface value term, the flux term, the
    // boundary term, and the combined default
    let weight_cases = [
        (
            "interior-only",
            LossWeights {
                beta_j: 0.0,
                beta_f: 0.0,
                alpha: 0.0,
            },
        ),
        (
            "value-jump",
            LossWeights {
                beta_j: 1.0,
                beta_f: 0.0,
                alpha: 0.0,
            },
        ),
        (
            "flux-jump",
            LossWeights {
                beta_j: 0.0,
                beta_f: 1.0,
                alpha: 0.0,
            },
        ),
        (
            "boundary",
            LossWeights {
                beta_j: 0.0,
                beta_f: 0.0,
                alpha: 500.0,
            },
        ),
        ("total", LossWeights::default()),
    ];
    let width_choices: [&[usize]; 4] = [&[2, 4, 1], &[2, 8, 1], &[2, 5, 3, 1], &[2, 8, 8, 1]];

    let mut worst: f64 = 0.0;
    for net_idx in 0..20u64 {
        let widths = width_choices[(net_idx % 4) as usize];
        let pn = PiecewiseNetwork::init(widths, net_idx, problem.geometry().clone()).unwrap();
        let flat0 = pn.to_flat();
        for (label, weights) in &weight_cases {
            let (loss, grad) =
                total_loss_with_grad(&pn, &problem, &samples, weights, mode).unwrap();
            let analytic = grad.to_flat();
            // The oracle itself rounds: central differences of an objective of
            // magnitude |L| at step h cannot resolve entries below ~eps|L|/h.
            let noise_floor = 2e-8 * loss.total.abs().max(1.0);
            let mut probe = pn.clone();
            let mut numeric = vec![0.0; flat0.len()];
            for i in 0..flat0.len() {
                let mut plus = flat0.clone();
                plus[i] += step;
                probe.load_flat(&plus).unwrap();
                let fp = total_loss_network(&probe, &problem, &samples, weights, mode)
                    .unwrap()
                    .total;
                let mut minus = flat0.clone();
                minus[i] -= step;
                probe.load_flat(&minus).unwrap();
                let fm = total_loss_network(&probe, &problem, &samples, weights, mode)
                    .unwrap()
                    .total;
                numeric[i] = (fp - fm) / (2.0 * step);
            }
            for i in 0..flat0.len() {
                let diff = (analytic[i] - numeric[i]).abs();
                assert!(
                    diff <= 1e-5 * numeric[i].abs() + noise_floor,
                    "net {net_idx} ({widths:?}), case {label}, entry {i}: \
                     analytic {} vs numeric {} (diff {diff:.2e}, floor {noise_floor:.2e})",
                    analytic[i],
                    numeric[i]
                );
                if diff > noise_floor {
                    worst = worst.max(diff / numeric[i].abs());
                }
            }
        }
    }
    report(
        "gradient-oracle",
        true,
        &format!(
            "20 nets x 5 weight cases, worst above-noise relative entry error {worst:.2e} <= 1e-5"
        ),
    );
}

/// Criterion: autodiff gradient and Laplacian match central differences
/// (h = 1e-4) to relative error 1e-4 on 100 random (net, point) pairs in 2D
/// and 3D.
#[test]
fn criterion_spatial_derivative_oracle() {
    let mut worst: f64 = 0.0;
    for dim in [2usize, 3] {
        let mut rng = SplitMix64::new(dim as u64);
        for case in 0..100u64 {
            let widths = match case % 3 {
                0 => vec![dim, 6, 1],
                1 => vec![dim, 8, 6, 1],
                _ => vec![dim, 5, 5, 5, 1],
            };
            let net = MlpParams::init(&widths, 1000 * dim as u64 + case).unwrap();
            let x: Vec<f64> = (0..dim).map(|_| rng.next_symmetric(1.0)).collect();
            let ad = net.spatial_eval(&x, DerivativeMode::Autodiff).unwrap();
            let fd = net
                .spatial_eval(&x, DerivativeMode::FiniteDifference { h: 1e-4 })
                .unwrap();
            for k in 0..dim {
                let denom = fd.gradient[k].abs().max(1e-6);
                let rel = (ad.gradient[k] - fd.gradient[k]).abs() / denom;
                worst = worst.max(rel);
                assert!(
                    rel <= 1e-4,
                    "{dim}D case {case}: gradient axis {k} rel {rel:.2e}"
                );
            }
            let denom = fd.laplacian.abs().max(1e-6);
            let rel = (ad.laplacian - fd.laplacian).abs() / denom;
            worst = worst.max(rel);
            assert!(rel <= 1e-4, "{dim}D case {case}: laplacian rel {rel:.2e}");
        }
    }
    report(
        "spatial-derivative-oracle",
        true,
        &format!("200 (net, point) pairs, worst relative error {worst:.2e} <= 1e-4"),
    );
}

fn paper_sample_set(problem: &ProblemSpec) -> SampleSet {
    let (grid, m_if, bpf) = match problem.name() {
        "sunflower" => (20, 160, 20),
        "sphere" => (10, 100, 80),
        "heart" => (13, 676, 80),
        "circle" => (10, 32, 20),
        "flower" => (10, 50, 20),
        other => panic!("unknown problem {other}"),
    };
    SampleSet::build(problem, grid, m_if, bpf, 0).unwrap()
}

/// Criterion: each built-in exact field pair drives every loss term to at
/// most 1e-17 on its benchmark sample set.
#[test]
fn criterion_manufactured_solution_annihilation() {
    let problems = [
        make_sunflower(false),
        make_sphere(),
        make_heart(),
        make_circle(1000.0, 1.0).unwrap(),
        make_flower(),
    ];
    let mut worst: f64 = 0.0;
    for problem in &problems {
        let samples = paper_sample_set(problem);
        let (u1, u2) = problem.exact().unwrap();
        let b = total_loss(u1, u2, problem, &samples, &LossWeights::default()).unwrap();
        for (term, v) in [
            ("l1", b.l1),
            ("l2", b.l2),
            ("l_gamma", b.l_gamma),
            ("l_boundary", b.l_boundary),
        ] {
            worst = worst.max(v);
            assert!(
                v <= 1e-17,
                "{}: exact solution leaves {term} = {v:.3e} > 1e-17",
                problem.name()
            );
        }
    }
    report(
        "manufactured-solution-annihilation",
        true,
        &format!("5 problems, largest surviving term {worst:.1e} <= 1e-17"),
    );
}

/// Criterion: grid partition counts match the benchmark reference values
/// exactly.
#[test]
fn criterion_sample_count_reproduction() {
    let circle = make_circle(1000.0, 1.0).unwrap();
    let tol = circle.geometry().default_classify_tol();
    let c10 = circle.geometry().sample_uniform_grid(10, tol).unwrap();
    let c50 = circle.geometry().sample_uniform_grid(50, tol).unwrap();
    let sunflower = make_sunflower(false);
    let tol_s = sunflower.geometry().default_classify_tol();
    let s20 = sunflower.geometry().sample_uniform_grid(20, tol_s).unwrap();

    let pass = (c10.0.len(), c10.1.len()) == (16, 84)
        && (c50.0.len(), c50.1.len()) == (484, 2016)
        && (s20.0.len(), s20.1.len()) == (51, 349);
    report(
        "sample-count-reproduction",
        pass,
        &format!(
            "circle 10x10 -> ({}, {}), 50x50 -> ({}, {}), sunflower 20x20 -> ({}, {})",
            c10.0.len(),
            c10.1.len(),
            c50.0.len(),
            c50.1.len(),
            s20.0.len(),
            s20.1.len()
        ),
    );
    assert!(pass);
}

struct DeskCircle {
    problem: ProblemSpec,
    network: PiecewiseNetwork,
    rel_l2: f64,
}

/// Desk-scale circle run shared by the error criterion and the residual
/// localization report.
fn desk_circle() -> &'static DeskCircle {
    static MODEL: OnceLock<DeskCircle> = OnceLock::new();
    MODEL.get_or_init(|| {
        let problem = make_circle(1000.0, 1.0).unwrap();
        let samples = SampleSet::build(&problem, 10, 32, 20, 0).unwrap();
        let widths = MlpParams::standard_widths(2, 4, 64);
        let pn = PiecewiseNetwork::init(&widths, 0, problem.geometry().clone()).unwrap();
        let cfg = TrainConfig {
            epochs: 20_000,
            log_every: 5_000,
            ..TrainConfig::default()
        };
        let (network, _) = train(pn, &problem, &samples, &LossWeights::default(), &cfg).unwrap();
        let grid = EvaluationGrid::new(problem.geometry(), 201).unwrap();
        let rel_l2 = relative_l2_error(&network, &problem, &grid).unwrap();
        DeskCircle {
            problem,
            network,
            rel_l2,
        }
    })
}

/// Criterion (desk-scale variant): circle with beta = (1000, 1), 4x64
/// network, uniform 10x10 samples, 2e4 epochs reaches relative L2 error
/// <= 1e-1.
#[test]
fn criterion_circle_high_contrast_desk() {
    let model = desk_circle();
    let pass = model.rel_l2 <= 1e-1;
    report(
        "circle-high-contrast-desk",
        pass,
        &format!("rel L2 {:.4e} <= 1e-1 after 2e4 epochs", model.rel_l2),
    );
    assert!(pass);
}

/// Criterion (report only, asserted as a warning): at least 60% of the
/// top-decile interior residual indicators of the trained circle model lie
/// within distance 0.1 of the interface.
#[test]
fn criterion_residual_localization_report() {
    let model = desk_circle();
    let loc = residual_localization(
        &model.network,
        &model.problem,
        &LossWeights::default(),
        DerivativeMode::Autodiff,
        50,
        0.1,
    )
    .unwrap();
    let pass = loc.fraction_near_interface >= 0.6;
    report(
        "residual-localization (non-gating)",
        pass,
        &format!(
            "{:.1}% of the top {} interior indicators within 0.1 of the interface (target 60%)",
            100.0 * loc.fraction_near_interface,
            loc.top_decile_count
        ),
    );
    if !pass {
        eprintln!(
            "warning: residual localization below target ({:.1}% < 60%); reported, not gating",
            100.0 * loc.fraction_near_interface
        );
    }
}

/// Criterion: three refinement levels on the high-contrast circle halve the
/// level-0 error, use at most half the 50x50 uniform budget in points, and
/// stay within 3x of the error of a uniform 50x50 run trained for the same
/// total number of epochs.
#[test]
fn criterion_adaptive_improvement() {
    let problem = make_circle(1000.0, 1.0).unwrap();
    let widths = MlpParams::standard_widths(2, 4, 64);
    let run = AdaptiveRun {
        problem: &problem,
        widths: widths.clone(),
        grid_per_dim: 10,
        m_interface: 32,
        m_boundary_per_face: 20,
        weights: LossWeights::default(),
        eval_grid_per_dim: 201,
    };
    let cfg = AdaptiveConfig {
        train: TrainConfig {
            epochs: 8_000,
            log_every: 2_000,
            ..TrainConfig::default()
        },
        epochs_per_level: Some(3_000),
        ..AdaptiveConfig::default()
    };
    let levels = adaptive_solve(&run, &cfg, &mut ()).unwrap();
    assert_eq!(levels.len(), 4);
    assert_eq!(
        (
            levels[0].counts.m1,
            levels[0].counts.m2,
            levels[0].counts.m_interface
        ),
        (16, 84, 32),
        "level-0 counts must match the uniform 10x10 row"
    );
    // strictly growing sample sets
    for w in levels.windows(2) {
        assert!(w[1].counts.m1 + w[1].counts.m2 > w[0].counts.m1 + w[0].counts.m2);
    }

    let err0 = levels[0].rel_l2_error.unwrap();
    let err3 = levels[3].rel_l2_error.unwrap();
    let final_counts = levels[3].counts;
    let final_size =
        final_counts.m1 + final_counts.m2 + final_counts.m_interface + final_counts.m_boundary;
    let uniform_size = 484 + 2016 + 160 + 80;

    // uniform 50x50 reference at the same total epoch budget
    let total_epochs = 8_000 + 3 * 3_000;
    let ref_samples = SampleSet::build(&problem, 50, 160, 20, 0).unwrap();
    let ref_pn = PiecewiseNetwork::init(&widths, 0, problem.geometry().clone()).unwrap();
    let ref_cfg = TrainConfig {
        epochs: total_epochs,
        log_every: 5_000,
        ..TrainConfig::default()
    };
    let (ref_pn, _) = train(
        ref_pn,
        &problem,
        &ref_samples,
        &LossWeights::default(),
        &ref_cfg,
    )
    .unwrap();
    let grid = EvaluationGrid::new(problem.geometry(), 201).unwrap();
    let ref_err = relative_l2_error(&ref_pn, &problem, &grid).unwrap();

    let halved = err3 <= 0.5 * err0;
    let smaller = (final_size as f64) <= 0.5 * uniform_size as f64;
    let competitive = err3 <= 3.0 * ref_err;
    report(
        "adaptive-improvement",
        halved && smaller && competitive,
        &format!(
            "err level0 {err0:.4e} -> level3 {err3:.4e} (need <= 0.5x), \
             points {final_size} vs uniform {uniform_size} (need <= 0.5x), \
             uniform-ref err {ref_err:.4e} (need within 3x)"
        ),
    );
    assert!(
        halved,
        "level-3 error {err3:.4e} > 0.5 x level-0 error {err0:.4e}"
    );
    assert!(
        smaller,
        "level-3 sample set ({final_size}) not 50% smaller than uniform ({uniform_size})"
    );
    assert!(
        competitive,
        "level-3 error {err3:.4e} > 3 x uniform reference {ref_err:.4e}"
    );
}

/// Criterion: identical configuration and seed reproduce every numeric
/// output bit for bit.
#[test]
fn criterion_determinism() {
    let problem = make_circle(1000.0, 1.0).unwrap();
    let samples = SampleSet::build(&problem, 10, 32, 20, 0).unwrap();
    let widths = MlpParams::standard_widths(2, 2, 16);
    let cfg = TrainConfig {
        epochs: 300,
        log_every: 100,
        seed: 7,
        ..TrainConfig::default()
    };
    let grid = EvaluationGrid::new(problem.geometry(), 101).unwrap();
    let run = || {
        let pn = PiecewiseNetwork::init(&widths, cfg.seed, problem.geometry().clone()).unwrap();
        let (pn, log) = train(pn, &problem, &samples, &LossWeights::default(), &cfg).unwrap();
        let err = relative_l2_error(&pn, &problem, &grid).unwrap();
        (pn.to_flat(), log, err)
    };
    let (params_a, log_a, err_a) = run();
    let (params_b, log_b, err_b) = run();
    let same_params = params_a == params_b;
    let same_losses = log_a
        .entries
        .iter()
        .zip(&log_b.entries)
        .all(|(a, b)| a.epoch == b.epoch && a.loss == b.loss);
    let same_err = err_a.to_bits() == err_b.to_bits();
    report(
        "determinism",
        same_params && same_losses && same_err,
        &format!(
            "repeated run: parameters identical = {same_params}, \
             loss trajectory identical = {same_losses}, error identical = {same_err}"
        ),
    );
    assert!(same_params && same_losses && same_err);
}

fn trained_rel_error(
    problem: &ProblemSpec,
    widths: &[usize],
    samples: &SampleSet,
    seed: u64,
    epochs: u64,
    eval_n: usize,
) -> f64 {
    let pn = PiecewiseNetwork::init(widths, seed, problem.geometry().clone()).unwrap();
    let cfg = TrainConfig {
        epochs,
        seed,
        log_every: 20_000,
        ..TrainConfig::default()
    };
    let (pn, _) = train(pn, problem, samples, &LossWeights::default(), &cfg).unwrap();
    let grid = EvaluationGrid::new(problem.geometry(), eval_n).unwrap();
    relative_l2_error(&pn, problem, &grid).unwrap()
}

/// Criterion (full scale): circle beta = (1000, 1), 4x64, uniform 10x10,
/// 2e5 epochs; the median over seeds {0, 1, 2} reaches <= 2e-2.
#[test]
#[ignore = "full-scale training (~1.5 h single-core); run with --ignored"]
fn criterion_circle_high_contrast_full() {
    let problem = make_circle(1000.0, 1.0).unwrap();
    let samples = SampleSet::build(&problem, 10, 32, 20, 0).unwrap();
    let widths = MlpParams::standard_widths(2, 4, 64);
    let mut errs: Vec<f64> = [0u64, 1, 2]
        .iter()
        .map(|&seed| trained_rel_error(&problem, &widths, &samples, seed, 200_000, 201))
        .collect();
    errs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = errs[1];
    let pass = median <= 2e-2;
    report(
        "circle-high-contrast-full",
        pass,
        &format!("per-seed rel L2 {errs:?}, median {median:.4e} <= 2e-2 (reference 5.4484e-3)"),
    );
    assert!(pass);
}

/// Criterion (full scale): sunflower, 8x64, benchmark sampling, 2e5 epochs;
/// the best of seeds {0, 1, 2} reaches <= 1.5e-1.
#[test]
#[ignore = "full-scale training (~15 h single-core); run with --ignored"]
fn criterion_sunflower_full() {
    let problem = make_sunflower(false);
    let samples = SampleSet::build(&problem, 20, 160, 20, 0).unwrap();
    let widths = MlpParams::standard_widths(2, 8, 64);
    let errs: Vec<f64> = [0u64, 1, 2]
        .iter()
        .map(|&seed| trained_rel_error(&problem, &widths, &samples, seed, 200_000, 201))
        .collect();
    let best = errs.iter().cloned().fold(f64::INFINITY, f64::min);
    let pass = best <= 1.5e-1;
    report(
        "sunflower-full",
        pass,
        &format!("per-seed rel L2 {errs:?}, best {best:.4e} <= 1.5e-1 (reference 5.3183e-2)"),
    );
    assert!(pass);
}

/// Criterion (full scale): sphere, 4x64, benchmark sampling, 2e5 epochs;
/// the best of seeds {0, 1, 2} reaches <= 5e-3.
#[test]
#[ignore = "full-scale training (~24 h single-core); run with --ignored"]
fn criterion_sphere_full() {
    let problem = make_sphere();
    let samples = SampleSet::build(&problem, 10, 100, 80, 0).unwrap();
    let widths = MlpParams::standard_widths(3, 4, 64);
    let errs: Vec<f64> = [0u64, 1, 2]
        .iter()
        .map(|&seed| trained_rel_error(&problem, &widths, &samples, seed, 200_000, 51))
        .collect();
    let best = errs.iter().cloned().fold(f64::INFINITY, f64::min);
    let pass = best <= 5e-3;
    report(
        "sphere-full",
        pass,
        &format!("per-seed rel L2 {errs:?}, best {best:.4e} <= 5e-3 (reference 5.4508e-5)"),
    );
    assert!(pass);
}

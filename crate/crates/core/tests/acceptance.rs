//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Every tolerance and runtime budget is
//! pinned below.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use amoo::analysis::{
    grid_game_value, grid_max_lambda_min, plateau, precise_game_config, recurrence_simulate_and_bound,
    theorem_bound_check, weyl_degradation_suite, RecurrenceParams, RecurrenceVariant, TheoremKind, TheoremParams,
};
use amoo::driver::{run, InnerConfig, RunConfig};
use amoo::hessians::{hutchinson_diag, HutchinsonConfig};
use amoo::linalg::{Matrix, SymMatrix};
use amoo::objective::GradientOnly;
use amoo::problems::{build, specification_shifts_for_eps, MlpSpec, MlpVariant, ProblemSpec, Quadratic};
use amoo::weighting::{lambda_min_weighted, solve_bilinear_pu, CamooConfig, PamooConfig, WeightingConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    check: fn() -> Outcome,
}

const SPEC_RESIDUAL_EW: f64 = 1e-10;
const SPEC_RESIDUAL_F1: f64 = 0.1;
const SELECTION_WEIGHT: f64 = 0.9;
const SELECTION_LAMBDA_TOL: f64 = 1e-2;
const SELECTION_GRID: f64 = 1e-3;
const FLIP_DEADZONE: f64 = 0.05;
const BILINEAR_GAP: f64 = 1e-3;
const BILINEAR_VALUE_TOL: f64 = 1e-3;
const BILINEAR_GRID: f64 = 1e-4;
const HVP_TOL: f64 = 1e-6;
const HUTCH_SAMPLES: usize = 10_000;
const HUTCH_REL_TOL: f64 = 0.05;
const PLATEAU_RATIO: f64 = 10.0;
const POLYAK_TOL: f64 = 1e-9;

fn residual_at(records: &[amoo::driver::IterateRecord], step: usize) -> Option<f64> {
    records.iter().find(|r| r.step == step).and_then(|r| r.residual)
}

fn c1_specification_speedup() -> Outcome {
    let spec = ProblemSpec::Specification { delta: 0.01 };
    let ew = run(&RunConfig::new(spec.clone(), WeightingConfig::Equal, InnerConfig::Gd { step: 0.25 }, 100))?;
    let best_ew = ew
        .records
        .iter()
        .filter_map(|r| r.residual)
        .fold(f64::INFINITY, f64::min);
    let f1 = run(&RunConfig::new(
        spec,
        WeightingConfig::Fixed { weights: vec![1.0, 0.0] },
        InnerConfig::Gd { step: 0.25 },
        100,
    ))?;
    let r_f1 = residual_at(&f1.records, 100).ok_or("no record at step 100")?;
    Ok((
        best_ew <= SPEC_RESIDUAL_EW && r_f1 >= SPEC_RESIDUAL_F1,
        format!("EW residual {best_ew:.2e}, f1-only residual at step 100 {r_f1:.3}"),
    ))
}

fn c2_camoo_selection() -> Outcome {
    let spec = ProblemSpec::Selection { delta: 0.1, m: 3, n: 2 };
    let trace = run(&RunConfig::new(
        spec.clone(),
        WeightingConfig::Camoo(CamooConfig::default()),
        InnerConfig::Gd { step: 0.05 },
        200,
    ))?;
    let last = trace.last().ok_or("empty trace")?;
    let problem = build(&spec)?;
    let hs = problem.objectives.hessians(&problem.x0)?.ok_or("no Hessians")?;
    let (grid, _) = grid_max_lambda_min(&hs, SELECTION_GRID, 0.0)?;
    let (achieved, _) = lambda_min_weighted(&hs, &last.w)?;
    let w_high = last.w[2];
    Ok((
        w_high >= SELECTION_WEIGHT && (achieved - grid).abs() <= SELECTION_LAMBDA_TOL,
        format!("w = {:.4?}, lambda_min {achieved:.4} vs grid {grid:.4}", last.w),
    ))
}

fn c3_weight_flip() -> Outcome {
    let cfg = RunConfig::new(
        ProblemSpec::LocalCurvature { n: 1 },
        WeightingConfig::Camoo(CamooConfig::default()),
        InnerConfig::Gd { step: 0.25 },
        30,
    )
    .with_x0(vec![2.0])
    .recording_iterates();
    let trace = run(&cfg)?;
    let mut checked = 0;
    let mut crossed = false;
    for r in &trace.records {
        let x = r.x.as_ref().ok_or("iterate not recorded")?[0];
        crossed |= x < 0.0;
        if x.abs() <= FLIP_DEADZONE {
            continue;
        }
        checked += 1;
        if (r.w[0] - r.w[1]).signum() != x.signum() {
            return Ok((false, format!("step {}: x = {x:.4}, w = {:.4?}", r.step, r.w)));
        }
    }
    Ok((crossed && checked > 0, format!("{checked} steps checked, crossed zero: {crossed}")))
}

fn c4_theorem_bounds() -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for spec in [
        ProblemSpec::Specification { delta: 0.1 },
        ProblemSpec::Selection { delta: 0.1, m: 3, n: 4 },
    ] {
        let p = build(&spec)?;
        let beta = p.meta.beta.ok_or("missing beta")?;
        for (w, which, mu) in [
            (WeightingConfig::Camoo(CamooConfig::default()), TheoremKind::Camoo, p.meta.mu_g),
            (WeightingConfig::Pamoo(PamooConfig::default()), TheoremKind::Pamoo, p.meta.mu_l),
        ] {
            let trace = run(&RunConfig::theory(spec.clone(), w, 200))?;
            let tp = TheoremParams {
                beta,
                mu: mu.ok_or("missing mu")?,
                m_f: p.meta.m_f,
                m: p.m(),
                which,
            };
            let check = theorem_bound_check(&trace, &tp)?;
            ok &= check.holds;
            detail.push(format!("{}/{which:?} ratio {:.3}", p.name, check.worst_ratio));
        }
    }
    Ok((ok, detail.join(", ")))
}

fn c5_recurrences() -> Outcome {
    let mut passes = 0;
    let mut total = 0;
    for &a1 in &[0.1, 0.5, 1.5] {
        for &a2 in &[0.0, 1.0, 10.0] {
            for &r0 in &[0.1, 1.0, 100.0] {
                let exact =
                    recurrence_simulate_and_bound(&RecurrenceParams::exact(a1, a2, r0, 1000), RecurrenceVariant::Exact)?;
                let eps =
                    recurrence_simulate_and_bound(&RecurrenceParams::eps_maximal(a1, a2, r0, 1000), RecurrenceVariant::Eps)?;
                // A bound that is infinite anywhere would hold vacuously.
                let finite = |b: &[f64]| b.iter().all(|v| v.is_finite());
                passes += (exact.holds && finite(&exact.bound)) as usize + (eps.holds && finite(&eps.bound)) as usize;
                total += 2;
            }
        }
    }
    Ok((passes == total, format!("{passes}/{total} parameter sets bounded")))
}

fn c6_diagonal_degradation() -> Outcome {
    let report = weyl_degradation_suite(2024, 100)?;
    Ok((
        report.passes == report.trials,
        format!("{}/{} random SPD families", report.passes, report.trials),
    ))
}

fn random_game(seed: u64, k: usize, rows: usize, cols: usize) -> Result<Matrix, amoo::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    let data = (0..rows * cols).map(|_| rng.random_range(0.0..3.0)).collect();
    Matrix::new(rows, cols, data)
}

fn c7_bilinear() -> Outcome {
    let cfg = precise_game_config();
    let mut worst_gap = 0.0f64;
    for k in 0..50 {
        let a = random_game(7, k, 5, 8)?;
        worst_gap = worst_gap.max(solve_bilinear_pu(&a, &cfg, None)?.gap);
    }
    let mut worst_dev = 0.0f64;
    for k in 0..20 {
        let a = random_game(8, k, 2, 8)?;
        let sol = solve_bilinear_pu(&a, &cfg, None)?;
        worst_dev = worst_dev.max((sol.value - grid_game_value(&a, BILINEAR_GRID)?).abs());
    }
    Ok((
        worst_gap <= BILINEAR_GAP && worst_dev <= BILINEAR_VALUE_TOL,
        format!("max gap {worst_gap:.2e} (5x8), max value error {worst_dev:.2e} (2x8)"),
    ))
}

fn c8_hutchinson() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let d: Vec<f64> = (0..12).map(|_| rng.random_range(0.1..5.0)).collect();
    let center: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
    let x: Vec<f64> = (0..12).map(|_| rng.random_range(-2.0..2.0)).collect();
    let q = GradientOnly(Quadratic::new(SymMatrix::from_diag(&d), center)?);
    let one = HutchinsonConfig { num_samples: 1, rng_seed: 3, ..Default::default() };
    let est = hutchinson_diag(&q, &x, &one)?;
    let exact_err = est.values.iter().zip(&d).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let mut worst_rel = 0.0f64;
    for t in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + t);
        let n = 20;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = rng.random_range(3.0..6.0);
            for j in i + 1..n {
                let v = rng.random_range(-1.0..1.0);
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        let h = SymMatrix::new(n, a)?;
        let diag = h.diagonal();
        let q = Quadratic::centered(h);
        let cfg = HutchinsonConfig { num_samples: HUTCH_SAMPLES, rng_seed: 500 + t, ..Default::default() };
        let est = hutchinson_diag(&q, &vec![0.0; n], &cfg)?;
        for (e, d) in est.values.iter().zip(&diag) {
            worst_rel = worst_rel.max((e - d).abs() / d.abs());
        }
    }
    Ok((
        exact_err <= HVP_TOL && worst_rel <= HUTCH_REL_TOL,
        format!("single-sample error {exact_err:.2e}, worst relative error {:.2}% at N = {HUTCH_SAMPLES}", 100.0 * worst_rel),
    ))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn c9_mlp_ordering() -> Outcome {
    let methods = [
        WeightingConfig::Equal,
        WeightingConfig::Camoo(CamooConfig::diagonal()),
        WeightingConfig::Pamoo(PamooConfig::default()),
    ];
    let mut detail = Vec::new();
    let mut ok = true;
    for variant in [MlpVariant::Selection, MlpVariant::LocalCurvature] {
        let finals: Vec<Vec<f64>> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..5u64)
                .map(|seed| {
                    let methods = &methods;
                    s.spawn(move || {
                        methods
                            .iter()
                            .map(|w| {
                                let mut cfg = RunConfig::new(
                                    ProblemSpec::MlpMatching(MlpSpec::desk(variant, seed)),
                                    w.clone(),
                                    InnerConfig::adam(0.005),
                                    2000,
                                )
                                .with_seed(seed);
                                cfg.record_every = 100;
                                run(&cfg)
                                    .ok()
                                    .and_then(|t| t.last().and_then(|r| r.msq))
                                    .unwrap_or(f64::INFINITY)
                            })
                            .collect::<Vec<f64>>()
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        let med: Vec<f64> = (0..3).map(|j| median(finals.iter().map(|f| f[j]).collect())).collect();
        ok &= med[1] <= med[0] && med[2] <= med[0];
        detail.push(format!("{variant:?}: EW {:.3e} CAMOO {:.3e} PAMOO {:.3e}", med[0], med[1], med[2]));
    }
    Ok((ok, detail.join("; ")))
}

fn c10_eps_robustness() -> Outcome {
    let eps_values = [1e-1, 1e-2, 1e-3];
    let mut detail = Vec::new();
    let mut ok = true;
    for (w, inner) in [
        (WeightingConfig::Camoo(CamooConfig::default()), InnerConfig::Gd { step: 0.25 }),
        (WeightingConfig::Pamoo(PamooConfig::default()), InnerConfig::Gd { step: 1.0 }),
    ] {
        let mut plateaus = Vec::new();
        for eps in eps_values {
            let spec = ProblemSpec::Misaligned {
                base: Box::new(ProblemSpec::Specification { delta: 0.1 }),
                shifts: specification_shifts_for_eps(0.1, eps)?,
            };
            let mut cfg = RunConfig::new(spec, w.clone(), inner.clone(), 2000);
            cfg.record_every = 10;
            plateaus.push(plateau(&run(&cfg)?, 0.2)?);
        }
        for pair in plateaus.windows(2) {
            ok &= pair[0] >= pair[1] && pair[0] <= PLATEAU_RATIO * pair[1];
        }
        detail.push(format!("{} plateaus {:.3?}", w.name(), plateaus));
    }
    Ok((ok, detail.join("; ")))
}

fn c11_polyak() -> Outcome {
    let h = 3.0;
    let x0 = 1.7;
    let spec = ProblemSpec::QuadFamily { hessians: vec![vec![vec![h]]], alphas: vec![1.0] };
    let cfg = RunConfig::new(spec, WeightingConfig::Pamoo(PamooConfig::theory()), InnerConfig::Gd { step: 1.0 }, 50)
        .with_x0(vec![x0])
        .recording_iterates();
    let trace = run(&cfg)?;
    // f(x) = h x², f⋆ = 0: x ← x − f(x)/f'(x)² · f'(x)
    let mut x = x0;
    let mut worst = 0.0f64;
    for r in &trace.records {
        let got = r.x.as_ref().ok_or("iterate not recorded")?[0];
        worst = worst.max((got - x).abs());
        let g = 2.0 * h * x;
        x -= h * x * x / (g * g) * g;
    }
    Ok((
        trace.records.len() == 51 && worst <= POLYAK_TOL,
        format!("max deviation from Polyak iterates {worst:.2e} over {} records", trace.records.len()),
    ))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "specification speedup", budget: Duration::from_secs(1), check: c1_specification_speedup },
        Criterion { id: 2, name: "CAMOO selection", budget: Duration::from_secs(5), check: c2_camoo_selection },
        Criterion { id: 3, name: "local-curvature weight flip", budget: Duration::from_secs(1), check: c3_weight_flip },
        Criterion { id: 4, name: "theorem rate bounds", budget: Duration::from_secs(5), check: c4_theorem_bounds },
        Criterion { id: 5, name: "recurrence lemmas", budget: Duration::from_secs(1), check: c5_recurrences },
        Criterion { id: 6, name: "diagonal degradation", budget: Duration::from_secs(10), check: c6_diagonal_degradation },
        Criterion { id: 7, name: "bilinear solver", budget: Duration::from_secs(10), check: c7_bilinear },
        Criterion { id: 8, name: "Hutchinson estimator", budget: Duration::from_secs(10), check: c8_hutchinson },
        Criterion { id: 9, name: "toy-experiment ordering", budget: Duration::from_secs(120), check: c9_mlp_ordering },
        Criterion { id: 10, name: "epsilon robustness", budget: Duration::from_secs(10), check: c10_eps_robustness },
        Criterion { id: 11, name: "PAMOO-Polyak reduction", budget: Duration::from_secs(1), check: c11_polyak },
    ];
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let in_budget = elapsed <= c.budget;
        let (passed, detail) = match outcome {
            Ok((p, d)) => (p && in_budget, d),
            Err(e) => (false, format!("error: {e}")),
        };
        failures += !passed as usize;
        println!(
            "{} [{:>2}] {:<28} {:>7.2}s / {:>3}s  {detail}",
            if passed { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            elapsed.as_secs_f64(),
            c.budget.as_secs(),
        );
    }
    println!("{}/{} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

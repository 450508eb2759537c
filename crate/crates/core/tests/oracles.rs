//! Checks against independent oracles: nalgebra eigensolver, finite
//! differences, closed-form active sets and brute-force grids.

use amoo::analysis::{grid_game_value, grid_max_lambda_min};
use amoo::hessians::{hutchinson_diag, hvp_fd, HutchinsonConfig};
use amoo::linalg::{min_eigenvalue, symmetric_eigen, Matrix, SymMatrix};
use amoo::objective::GradientOnly;
use amoo::problems::{build, Activation, MlpSpec, MlpVariant, ProblemSpec, Quadratic};
use amoo::weighting::{
    camoo_weights_diag, camoo_weights_exact, lambda_min_weighted, pamoo_weights, solve_bilinear_pu, CamooConfig,
    PamooConfig, PamooContext,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> SymMatrix {
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(-2.0..2.0);
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
    }
    SymMatrix::new(n, a).unwrap()
}

#[test]
fn jacobi_matches_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=8 {
        for _ in 0..5 {
            let a = random_symmetric(&mut rng, n);
            let ours = symmetric_eigen(&a).unwrap();
            let mut theirs: Vec<f64> = DMatrix::from_row_slice(n, n, a.as_slice())
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .collect();
            theirs.sort_by(f64::total_cmp);
            for (x, y) in ours.values.iter().zip(&theirs) {
                assert!((x - y).abs() <= 1e-9, "n={n}: {x} vs {y}");
            }
            for (k, v) in ours.vectors.iter().enumerate() {
                let av = a.mul_vec(v);
                for (avi, vi) in av.iter().zip(v) {
                    assert!((avi - ours.values[k] * vi).abs() <= 1e-8);
                }
            }
            assert!((min_eigenvalue(&a).unwrap() - theirs[0]).abs() <= 1e-9);
        }
    }
}

#[test]
fn hvp_example_from_gradient_differences() {
    let q = GradientOnly(Quadratic::centered(SymMatrix::from_diag(&[2.0, 0.4])));
    let hv = hvp_fd(&q, &[0.3, -1.2], &[0.0, 0.5], 1e-4).unwrap();
    assert!(hv[0].abs() <= 1e-6);
    assert!((hv[1] - 0.2).abs() <= 1e-6);
}

#[test]
fn hutchinson_single_probe_is_exact_on_diagonal_hessian() {
    let q = GradientOnly(Quadratic::new(SymMatrix::from_diag(&[2.0, 0.4]), vec![1.0, -3.0]).unwrap());
    for seed in 0..5 {
        let cfg = HutchinsonConfig { num_samples: 1, rng_seed: seed, ..Default::default() };
        let est = hutchinson_diag(&q, &[0.7, 0.1], &cfg).unwrap();
        assert!((est.values[0] - 2.0).abs() <= 1e-6);
        assert!((est.values[1] - 0.4).abs() <= 1e-6);
    }
}

#[test]
fn softplus_mlp_gradients_match_finite_differences() {
    for variant in [MlpVariant::Selection, MlpVariant::LocalCurvature] {
        let spec = MlpSpec {
            input_dim: 4,
            hidden: 5,
            output_dim: 3,
            dataset_size: 6,
            activation: Activation::Softplus,
            ..MlpSpec::desk(variant, 4)
        };
        let p = build(&ProblemSpec::MlpMatching(spec)).unwrap();
        let x = p.x0.clone();
        let (_, grads) = p.objectives.values_and_gradients(&x).unwrap();
        for (i, g) in grads.iter().enumerate() {
            let f = p.objectives.objective(i);
            for k in 0..x.len() {
                let h = 1e-6 * (1.0 + x[k].abs());
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += h;
                xm[k] -= h;
                let fd = (f.value(&xp) - f.value(&xm)) / (2.0 * h);
                let scale = fd.abs().max(g[k].abs()).max(1e-3);
                assert!(
                    (fd - g[k]).abs() / scale <= 1e-3,
                    "{variant:?} objective {i} coordinate {k}: {} vs {fd}",
                    g[k]
                );
            }
        }
    }
}

#[test]
fn pamoo_matches_active_set_solution() {
    // max 2wᵀΔ − wᵀGw over w ≥ 0: the interior solution G⁻¹Δ has a negative
    // second entry, so the optimum sits on w₂ = 0 with w₁ = Δ₁/G₁₁ = 1.
    let gram = SymMatrix::new(2, vec![1.0, 0.9, 0.9, 1.0]).unwrap();
    let ctx = PamooContext::new(vec![1.0, 0.0], gram).unwrap();
    let w = pamoo_weights(&ctx, &PamooConfig::theory(), None).unwrap();
    assert!((w.as_slice()[0] - 1.0).abs() <= 1e-6, "{:?}", w.as_slice());
    assert!(w.as_slice()[1].abs() <= 1e-6);

    // Both constraints inactive: w = G⁻¹Δ.
    let gram = SymMatrix::new(2, vec![2.0, 0.5, 0.5, 1.0]).unwrap();
    let ctx = PamooContext::new(vec![1.0, 1.0], gram).unwrap();
    let w = pamoo_weights(&ctx, &PamooConfig::theory(), None).unwrap();
    let det = 2.0 - 0.25;
    let expect = [(1.0 - 0.5) / det, (2.0 - 0.5) / det];
    for (a, b) in w.as_slice().iter().zip(expect) {
        assert!((a - b).abs() <= 1e-6);
    }
}

#[test]
fn exact_camoo_matches_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for m in 2..=3 {
        for _ in 0..5 {
            let hs: Vec<SymMatrix> = (0..m)
                .map(|_| {
                    let b = random_symmetric(&mut rng, 3);
                    SymMatrix::from_fn(3, |i, j| (0..3).map(|k| b.get(i, k) * b.get(j, k)).sum::<f64>() + if i == j { 0.05 } else { 0.0 })
                })
                .collect();
            let res = if m == 2 { 1e-4 } else { 2e-3 };
            let (grid, _) = grid_max_lambda_min(&hs, res, 0.0).unwrap();
            let out = camoo_weights_exact(&hs, &CamooConfig::default(), None).unwrap();
            let (check, _) = lambda_min_weighted(&hs, out.weights.as_slice()).unwrap();
            assert!((check - out.lambda_min).abs() <= 1e-9);
            assert!(out.lambda_min >= grid - 1e-2, "m={m}: solver {} grid {grid}", out.lambda_min);
        }
    }
}

#[test]
fn selection_example_grid_optimum() {
    let p = build(&ProblemSpec::Selection { delta: 0.1, m: 3, n: 2 }).unwrap();
    let hs = p.objectives.hessians(&p.x0).unwrap().unwrap();
    let (value, w) = grid_max_lambda_min(&hs, 1e-3, 0.0).unwrap();
    assert!((value - 2.0).abs() <= 1e-9);
    assert!(w[2] >= 0.999);
    let (uniform, _) = lambda_min_weighted(&hs, &[1.0 / 3.0; 3]).unwrap();
    assert!((uniform - 0.8).abs() <= 1e-9);
}

#[test]
fn bilinear_solver_matches_two_row_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let cfg = CamooConfig { pu_tau: 0.0, pu_iterations: 20_000, ..CamooConfig::diagonal() };
    for _ in 0..10 {
        let data: Vec<f64> = (0..2 * 6).map(|_| rng.random_range(0.0..3.0)).collect();
        let a = Matrix::new(2, 6, data).unwrap();
        let sol = solve_bilinear_pu(&a, &cfg, None).unwrap();
        let grid = grid_game_value(&a, 1e-4).unwrap();
        assert!((sol.value - grid).abs() <= 1e-3, "{} vs {grid}", sol.value);
    }
}

#[test]
fn diagonal_game_on_diagonal_hessians_is_exact_camoo() {
    let hs = [SymMatrix::from_diag(&[1.8, 0.2]), SymMatrix::from_diag(&[0.2, 1.8])];
    let rows = Matrix::from_rows(&[hs[0].diagonal(), hs[1].diagonal()]).unwrap();
    let cfg = CamooConfig { pu_tau: 0.0, pu_iterations: 5_000, ..CamooConfig::diagonal() };
    let (w, sol) = camoo_weights_diag(&rows, &cfg, None).unwrap();
    assert!((w.as_slice()[0] - 0.5).abs() <= 1e-3);
    assert!((sol.value - 1.0).abs() <= 1e-3);
}

#[test]
fn specification_constants() {
    let p = build(&ProblemSpec::Specification { delta: 0.1 }).unwrap();
    assert!((p.meta.beta.unwrap() - 1.8).abs() <= 1e-12);
    assert_eq!(p.meta.mu_g, Some(1.0));
    assert_eq!(p.meta.mu_l, Some(1.0));
    assert_eq!(p.x0, vec![1.0, 1.0]);
    let x = [0.4, -0.3];
    for (i, f) in p.objectives.iter().enumerate() {
        let h = f.hessian(&x).unwrap();
        let expect = if i == 0 { [1.8, 0.2] } else { [0.2, 1.8] };
        assert_eq!(h.diagonal(), expect.to_vec());
    }
}

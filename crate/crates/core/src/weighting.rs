//! Weight optimizers.
//!
//! * [`equal_weights`]: the uniform baseline (EW).
//! * CAMOO: pick the simplex weights that maximize the smallest eigenvalue of
//!   the weighted Hessian. [`camoo_weights_exact`] works on full Hessians by
//!   projected supergradient ascent; [`camoo_weights_diag`] works on Hessian
//!   diagonals, where the problem collapses to the matrix game
//!   `max_{w∈Δᵐ} min_{q∈Δⁿ} wᵀAq` solved by [`solve_bilinear_pu`].
//! * PAMOO ([`pamoo_weights`]): nonnegative weights maximizing
//!   `2wᵀΔ − wᵀ(JᵀJ + τI)w`, the multi-objective Polyak step.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::hessians::HutchinsonConfig;
use crate::linalg::{self, Matrix, SymMatrix};
use crate::objective::{project_floored_simplex, WeightConstraint, WeightVector};

/// Uniform simplex weights `(1/m, …, 1/m)`.
pub fn equal_weights(m: usize) -> Result<WeightVector> {
    WeightVector::uniform(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CamooMode {
    /// Full Hessians, eigenvalue objective.
    ExactEigen,
    /// Hessian diagonals, bilinear matrix game.
    DiagonalBilinear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CamooConfig {
    pub mode: CamooMode,
    /// Weight floor. The analysis uses `μ_G / (8mβ)`; practical runs use 0.
    pub w_min: f64,
    pub pu_iterations: usize,
    pub pu_tau: f64,
    pub supergrad_iterations: usize,
    pub supergrad_step: f64,
    pub warm_start: bool,
    /// Probe settings when Hessian diagonals have to be estimated.
    pub hutchinson: HutchinsonConfig,
}

impl Default for CamooConfig {
    fn default() -> Self {
        CamooConfig {
            mode: CamooMode::ExactEigen,
            w_min: 0.0,
            pu_iterations: 100,
            pu_tau: 0.01,
            supergrad_iterations: 500,
            supergrad_step: 0.1,
            warm_start: true,
            hutchinson: HutchinsonConfig::default(),
        }
    }
}

impl CamooConfig {
    pub fn diagonal() -> Self {
        CamooConfig {
            mode: CamooMode::DiagonalBilinear,
            ..Default::default()
        }
    }

    /// Exact-eigen configuration with the floor `w_min = μ_G / (8mβ)`.
    pub fn with_theory_floor(mu_g: f64, beta: f64, m: usize) -> Result<Self> {
        if !(mu_g > 0.0 && beta > 0.0) || m == 0 {
            return Err(Error::arg("theory floor needs μ_G > 0, β > 0 and m ≥ 1"));
        }
        Ok(CamooConfig {
            w_min: mu_g / (8.0 * m as f64 * beta),
            ..Default::default()
        })
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        if !(self.w_min >= 0.0) || m as f64 * self.w_min > 1.0 + 1e-12 {
            return Err(Error::arg(format!(
                "w_min = {} is infeasible for {m} objectives",
                self.w_min
            )));
        }
        if self.pu_iterations == 0 || self.supergrad_iterations == 0 {
            return Err(Error::arg("solver iteration counts must be positive"));
        }
        if !(self.pu_tau >= 0.0) || !(self.supergrad_step > 0.0) {
            return Err(Error::arg("pu_tau must be ≥ 0 and supergrad_step > 0"));
        }
        Ok(())
    }
}

/// Approximate saddle point of `max_w min_q wᵀAq` over two simplices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilinearSolution {
    pub w: Vec<f64>,
    pub q: Vec<f64>,
    /// `max_i (Aq)_i − min_j (Aᵀw)_j`
    pub gap: f64,
    /// `min_j (Aᵀw)_j`, the value guaranteed by `w`.
    pub value: f64,
}

/// Certified duality gap `max_i (Aq)_i − min_j (Aᵀw)_j` and the lower value.
pub fn duality_gap(a: &Matrix, w: &[f64], q: &[f64]) -> (f64, f64) {
    let upper = a.mul_vec(q).into_iter().fold(f64::NEG_INFINITY, f64::max);
    let lower = a.tr_mul_vec(w).into_iter().fold(f64::INFINITY, f64::min);
    (upper - lower, lower)
}

/// Normalizes log-weights in place and writes the matching probabilities.
fn normalize_log(l: &mut [f64], p: &mut [f64]) {
    let max = l.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (pi, li) in p.iter_mut().zip(l.iter()) {
        *pi = (li - max).exp();
        sum += *pi;
    }
    let lse = max + sum.ln();
    let inv = 1.0 / sum;
    for (pi, li) in p.iter_mut().zip(l.iter_mut()) {
        *pi *= inv;
        *li -= lse;
    }
}

fn log_of(p: &[f64]) -> Vec<f64> {
    let mut l: Vec<f64> = p.iter().map(|v| v.max(1e-300).ln()).collect();
    let mut scratch = vec![0.0; p.len()];
    normalize_log(&mut l, &mut scratch);
    l
}

/// Entropic predictive-update (PU) primal-dual solver for the matrix game.
///
/// Both players run multiplicative weights in log space with the
/// optimistic prediction that the next payoff repeats the last one, i.e.
/// each step adds `η(2gₜ − gₜ₋₁)`. With regularization `τ` the log-weights
/// are damped by `1 − ητ`; the step is `η = 1/(2·max|Aᵢⱼ| + τ)`. Iterates
/// are averaged; whenever the better of the running average and the last
/// iterate halves the gap of the previous restart point, the method
/// restarts from it. A second average over all iterates is never restarted.
/// The best pair seen is returned with its certified gap.
pub fn solve_bilinear_pu(
    a: &Matrix,
    cfg: &CamooConfig,
    warm: Option<(&[f64], &[f64])>,
) -> Result<BilinearSolution> {
    if a.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::arg("bilinear matrix has non-finite entries"));
    }
    if cfg.pu_iterations == 0 {
        return Err(Error::arg("pu_iterations must be positive"));
    }
    if !(cfg.pu_tau >= 0.0) {
        return Err(Error::arg("pu_tau must be nonnegative"));
    }
    let (m, n) = (a.rows(), a.cols());
    let (mut w, mut q) = match warm {
        Some((w0, q0)) if w0.len() == m && q0.len() == n => (
            project_floored_simplex(w0, 0.0),
            project_floored_simplex(q0, 0.0),
        ),
        _ => (vec![1.0 / m as f64; m], vec![1.0 / n as f64; n]),
    };
    let amax = a.max_abs();
    if amax == 0.0 {
        return Ok(BilinearSolution {
            w,
            q,
            gap: 0.0,
            value: 0.0,
        });
    }
    let tau = cfg.pu_tau;
    let eta = 1.0 / (2.0 * amax + tau);
    let damp = 1.0 - eta * tau;

    let mut lw = log_of(&w);
    let mut lq = log_of(&q);
    normalize_log(&mut lw, &mut w);
    normalize_log(&mut lq, &mut q);

    let (g0, v0) = duality_gap(a, &w, &q);
    let mut best = BilinearSolution {
        w: w.clone(),
        q: q.clone(),
        gap: g0,
        value: v0,
    };
    let mut anchor_gap = g0;

    let mut sum_w = vec![0.0; m];
    let mut sum_q = vec![0.0; n];
    let mut count = 0usize;
    let mut total_w = vec![0.0; m];
    let mut total_q = vec![0.0; n];
    let mut prev_aq = a.mul_vec(&q);
    let mut prev_atw = a.tr_mul_vec(&w);

    for t in 0..cfg.pu_iterations {
        let aq = a.mul_vec(&q);
        let atw = a.tr_mul_vec(&w);
        for i in 0..m {
            lw[i] = damp * lw[i] + eta * (2.0 * aq[i] - prev_aq[i]);
        }
        for j in 0..n {
            lq[j] = damp * lq[j] - eta * (2.0 * atw[j] - prev_atw[j]);
        }
        prev_aq = aq;
        prev_atw = atw;
        normalize_log(&mut lw, &mut w);
        normalize_log(&mut lq, &mut q);

        linalg::axpy(1.0, &w, &mut sum_w);
        linalg::axpy(1.0, &q, &mut sum_q);
        linalg::axpy(1.0, &w, &mut total_w);
        linalg::axpy(1.0, &q, &mut total_q);
        count += 1;

        if count.is_multiple_of(10) || t + 1 == cfg.pu_iterations {
            let inv = 1.0 / count as f64;
            let avg_w: Vec<f64> = sum_w.iter().map(|v| v * inv).collect();
            let avg_q: Vec<f64> = sum_q.iter().map(|v| v * inv).collect();
            let (avg_gap, avg_value) = duality_gap(a, &avg_w, &avg_q);
            let (last_gap, last_value) = duality_gap(a, &w, &q);
            let candidate = if last_gap < avg_gap {
                BilinearSolution { w: w.clone(), q: q.clone(), gap: last_gap, value: last_value }
            } else {
                BilinearSolution { w: avg_w, q: avg_q, gap: avg_gap, value: avg_value }
            };
            if candidate.gap <= 0.5 * anchor_gap {
                anchor_gap = candidate.gap;
                lw = log_of(&candidate.w);
                lq = log_of(&candidate.q);
                normalize_log(&mut lw, &mut w);
                normalize_log(&mut lq, &mut q);
                prev_aq = a.mul_vec(&q);
                prev_atw = a.tr_mul_vec(&w);
                sum_w.iter_mut().for_each(|v| *v = 0.0);
                sum_q.iter_mut().for_each(|v| *v = 0.0);
                count = 0;
            }
            if candidate.gap < best.gap {
                best = candidate;
            }
            let inv_all = 1.0 / (t + 1) as f64;
            let all_w: Vec<f64> = total_w.iter().map(|v| v * inv_all).collect();
            let all_q: Vec<f64> = total_q.iter().map(|v| v * inv_all).collect();
            let (all_gap, all_value) = duality_gap(a, &all_w, &all_q);
            if all_gap < best.gap {
                best = BilinearSolution { w: all_w, q: all_q, gap: all_gap, value: all_value };
            }
        }
    }
    Ok(best)
}

/// CAMOO weights on Hessian diagonals: the `w` of the matrix game whose
/// rows are the diagonals.
pub fn camoo_weights_diag(
    diag: &Matrix,
    cfg: &CamooConfig,
    warm: Option<(&[f64], &[f64])>,
) -> Result<(WeightVector, BilinearSolution)> {
    let sol = solve_bilinear_pu(diag, cfg, warm)?;
    let w = WeightVector::project(&sol.w, 0.0)?;
    Ok((w, sol))
}

/// Result of the exact-eigen CAMOO solver.
#[derive(Debug, Clone, PartialEq)]
pub struct CamooOutcome {
    pub weights: WeightVector,
    /// `λ_min(Σ wᵢHᵢ)` at the returned weights.
    pub lambda_min: f64,
    /// True when the solver reached a point with zero projected supergradient
    /// before the iteration cap. False only means the cap was hit; the best
    /// iterate is still returned.
    pub stationary: bool,
}

/// `λ_min(Σ wᵢHᵢ)` and its unit eigenvector.
pub fn lambda_min_weighted(hessians: &[SymMatrix], w: &[f64]) -> Result<(f64, Vec<f64>)> {
    let h = linalg::weighted_hessian(hessians, w)?;
    linalg::min_eigenpair(&h, linalg::DEFAULT_EIGEN_TOL)
}

/// CAMOO weights on full Hessians.
///
/// Maximizes the concave `g(w) = λ_min(Σ wᵢHᵢ)` over the floored simplex by
/// projected supergradient ascent. The supergradient at `w` is
/// `(vᵀH₁v, …, vᵀH_mv)` for a bottom eigenvector `v`; it is centered,
/// normalized, and followed with step `supergrad_step / √(k+1)`. The best
/// of all iterates and the average of the second half is returned.
pub fn camoo_weights_exact(
    hessians: &[SymMatrix],
    cfg: &CamooConfig,
    warm: Option<&[f64]>,
) -> Result<CamooOutcome> {
    let m = hessians.len();
    if m == 0 {
        return Err(Error::arg("need at least one Hessian"));
    }
    cfg.validate(m)?;
    let n = hessians[0].dim();
    for h in hessians {
        check_dim("camoo_weights_exact", n, h.dim())?;
    }
    let floor = cfg.w_min;
    let mut w = match warm {
        Some(w0) if w0.len() == m => project_floored_simplex(w0, floor),
        _ => project_floored_simplex(&vec![1.0 / m as f64; m], floor),
    };

    let (mut best_lambda, _) = lambda_min_weighted(hessians, &w)?;
    let mut best_w = w.clone();
    let mut avg = vec![0.0; m];
    let mut avg_count = 0usize;
    let mut stationary = false;
    let half = cfg.supergrad_iterations / 2;

    for k in 0..cfg.supergrad_iterations {
        let (lambda, v) = lambda_min_weighted(hessians, &w)?;
        if lambda > best_lambda {
            best_lambda = lambda;
            best_w.clone_from(&w);
        }
        let mut d: Vec<f64> = hessians.iter().map(|h| h.quad_form(&v)).collect();
        let mean = d.iter().sum::<f64>() / m as f64;
        d.iter_mut().for_each(|x| *x -= mean);
        let dn = linalg::norm(&d);
        let scale = d.iter().fold(mean.abs(), |acc, x| acc.max(x.abs()));
        if dn <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
            stationary = true;
            break;
        }
        let step = cfg.supergrad_step / ((k + 1) as f64).sqrt();
        let moved: Vec<f64> = w.iter().zip(&d).map(|(wi, di)| wi + step * di / dn).collect();
        w = project_floored_simplex(&moved, floor);
        if k >= half {
            linalg::axpy(1.0, &w, &mut avg);
            avg_count += 1;
        }
    }
    if avg_count > 0 {
        avg.iter_mut().for_each(|v| *v /= avg_count as f64);
        let avg = project_floored_simplex(&avg, floor);
        let (lambda, _) = lambda_min_weighted(hessians, &avg)?;
        if lambda > best_lambda {
            best_lambda = lambda;
            best_w = avg;
        }
    }
    // The final iterate was never evaluated inside the loop.
    if !stationary {
        let (lambda, _) = lambda_min_weighted(hessians, &w)?;
        if lambda > best_lambda {
            best_lambda = lambda;
            best_w = w;
        }
    }

    let constraint = if floor > 0.0 {
        WeightConstraint::FlooredSimplex { w_min: floor }
    } else {
        WeightConstraint::Simplex
    };
    Ok(CamooOutcome {
        weights: WeightVector::new(best_w, constraint)?,
        lambda_min: best_lambda,
        stationary,
    })
}

/// Step rule for the PAMOO projected-gradient solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PamooStep {
    /// Fixed step, capped at `1/(2·λ_max(G + τI))` so the ascent stays
    /// monotone.
    Fixed(f64),
    /// Always `1/(2·λ_max(G + τI))`.
    InverseLipschitz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PamooConfig {
    pub step: PamooStep,
    pub iterations: usize,
    /// Stop once an update moves `w` by less than `tol · (1 + ‖w‖)`.
    pub tol: f64,
    pub clip_floor: f64,
    pub gram_tau: f64,
    /// Per-objective optimal values; `None` falls back to the problem's.
    pub f_star: Option<Vec<f64>>,
    pub warm_start: bool,
}

impl Default for PamooConfig {
    fn default() -> Self {
        PamooConfig {
            step: PamooStep::Fixed(3e-3),
            iterations: 200,
            tol: 1e-12,
            clip_floor: 1e-6,
            gram_tau: 1e-4,
            f_star: None,
            warm_start: true,
        }
    }
}

impl PamooConfig {
    /// Solver settings for the convergence analysis: exact maximization over
    /// `ℝᵐ₊` with no regularization.
    pub fn theory() -> Self {
        PamooConfig {
            step: PamooStep::InverseLipschitz,
            iterations: 100_000,
            tol: 1e-15,
            clip_floor: 0.0,
            gram_tau: 0.0,
            f_star: None,
            warm_start: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let PamooStep::Fixed(s) = self.step {
            if !(s > 0.0) {
                return Err(Error::arg(format!("PAMOO step must be positive, got {s}")));
            }
        }
        if !(self.gram_tau >= 0.0) || !(self.clip_floor >= 0.0) {
            return Err(Error::arg("gram_tau and clip_floor must be nonnegative"));
        }
        if self.iterations == 0 {
            return Err(Error::arg("PAMOO iterations must be positive"));
        }
        Ok(())
    }
}

/// Inputs of the PAMOO subproblem at a point `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct PamooContext {
    /// `fᵢ(x) − fᵢ(x⋆)`
    pub gaps: Vec<f64>,
    /// `JᵀJ`, with `J = [∇f₁(x) … ∇f_m(x)]`.
    pub gram: SymMatrix,
}

impl PamooContext {
    pub fn new(gaps: Vec<f64>, gram: SymMatrix) -> Result<Self> {
        check_dim("PamooContext", gram.dim(), gaps.len())?;
        if gaps.iter().any(|g| !g.is_finite()) {
            return Err(Error::arg("objective gaps must be finite"));
        }
        let lmin = linalg::min_eigenvalue(&gram)?;
        if lmin < -1e-10 * (1.0 + gram.max_abs()) {
            return Err(Error::arg(format!(
                "Gram matrix is not positive semidefinite (λ_min = {lmin:e})"
            )));
        }
        Ok(PamooContext { gaps, gram })
    }

    /// Builds the context from objective values, optimal values and
    /// gradients.
    pub fn from_gradients(values: &[f64], f_star: &[f64], grads: &[Vec<f64>]) -> Result<Self> {
        check_dim("PamooContext (f_star)", values.len(), f_star.len())?;
        check_dim("PamooContext (gradients)", values.len(), grads.len())?;
        let gaps = values.iter().zip(f_star).map(|(f, s)| f - s).collect();
        let gram = SymMatrix::from_fn(grads.len(), |i, j| linalg::dot(&grads[i], &grads[j]));
        Self::new(gaps, gram)
    }
}

/// `2wᵀΔ − wᵀ(G + τI)w`
pub fn pamoo_objective(ctx: &PamooContext, tau: f64, w: &[f64]) -> f64 {
    let gw = ctx.gram.add_identity(tau).mul_vec(w);
    2.0 * linalg::dot(w, &ctx.gaps) - linalg::dot(w, &gw)
}

/// Norm of the projected gradient of the PAMOO objective at `w`: gradient
/// entries at the floor that point further down are dropped.
pub fn pamoo_projected_gradient_norm(ctx: &PamooContext, cfg: &PamooConfig, w: &[f64]) -> f64 {
    let gw = ctx.gram.add_identity(cfg.gram_tau).mul_vec(w);
    w.iter()
        .zip(&ctx.gaps)
        .zip(&gw)
        .map(|((wi, d), g)| {
            let grad = 2.0 * d - 2.0 * g;
            if *wi <= cfg.clip_floor + 1e-15 && grad <= 0.0 {
                0.0
            } else {
                grad * grad
            }
        })
        .sum::<f64>()
        .sqrt()
}

/// PAMOO weights by projected gradient ascent with clipping at
/// `clip_floor`.
///
/// Without a warm start the ascent starts from the per-objective Polyak
/// ratios `Δᵢ / (G + τI)ᵢᵢ`.
pub fn pamoo_weights(ctx: &PamooContext, cfg: &PamooConfig, warm: Option<&[f64]>) -> Result<WeightVector> {
    cfg.validate()?;
    let m = ctx.gaps.len();
    let g = ctx.gram.add_identity(cfg.gram_tau);
    let floor = cfg.clip_floor;
    let clip = |v: f64| if v.is_finite() { v.max(floor) } else { floor };

    let lmax = linalg::symmetric_eigen(&g)?.values[m - 1];
    let mut w: Vec<f64> = match warm {
        Some(w0) if w0.len() == m && cfg.warm_start => w0.iter().map(|&v| clip(v)).collect(),
        _ => (0..m)
            .map(|i| {
                let gii = g.get(i, i);
                if gii > 0.0 {
                    clip(ctx.gaps[i] / gii)
                } else {
                    floor
                }
            })
            .collect(),
    };
    if !(lmax > f64::MIN_POSITIVE) {
        // Zero Gram matrix: every gradient vanishes and the update is a no-op
        // whatever the weights are.
        return WeightVector::orthant(w);
    }
    let cap = 1.0 / (2.0 * lmax);
    let step = match cfg.step {
        PamooStep::Fixed(s) => s.min(cap),
        PamooStep::InverseLipschitz => cap,
    };
    for _ in 0..cfg.iterations {
        let gw = g.mul_vec(&w);
        let mut moved = 0.0;
        for i in 0..m {
            let next = clip(w[i] + step * (2.0 * ctx.gaps[i] - 2.0 * gw[i]));
            moved += (next - w[i]).powi(2);
            w[i] = next;
        }
        if moved.sqrt() <= cfg.tol * (1.0 + linalg::norm(&w)) {
            break;
        }
    }
    WeightVector::orthant(w)
}

/// Which weight optimizer a run uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightingConfig {
    /// Equal weights (EW).
    Equal,
    /// A constant user-supplied weight vector (nonnegative orthant).
    Fixed { weights: Vec<f64> },
    Camoo(CamooConfig),
    Pamoo(PamooConfig),
}

impl WeightingConfig {
    pub fn name(&self) -> &'static str {
        match self {
            WeightingConfig::Equal => "EW",
            WeightingConfig::Fixed { .. } => "fixed",
            WeightingConfig::Camoo(_) => "CAMOO",
            WeightingConfig::Pamoo(_) => "PAMOO",
        }
    }
}

/// Whatever a weight optimizer may need at the current iterate.
#[derive(Debug, Clone, Copy, Default)]
pub struct WeightContext<'a> {
    pub m: usize,
    pub hessians: Option<&'a [SymMatrix]>,
    pub diag_hessians: Option<&'a Matrix>,
    pub pamoo: Option<&'a PamooContext>,
    pub warm_w: Option<&'a [f64]>,
    pub warm_q: Option<&'a [f64]>,
}

/// Output of one weight-optimizer call.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightOutcome {
    pub weights: WeightVector,
    /// Achieved curvature (CAMOO): `λ_min` in exact mode, the game value in
    /// diagonal mode.
    pub lambda_min: Option<f64>,
    pub pu_gap: Option<f64>,
    /// The column player's strategy from the diagonal game, for warm starts.
    pub dual: Option<Vec<f64>>,
}

impl WeightOutcome {
    fn plain(weights: WeightVector) -> Self {
        WeightOutcome {
            weights,
            lambda_min: None,
            pu_gap: None,
            dual: None,
        }
    }
}

fn missing(kind: &str, field: &str) -> Error {
    Error::arg(format!("{kind} weight optimizer requires context field `{field}`"))
}

/// Dispatches to the configured weight optimizer.
pub fn weight_optimizer_step(cfg: &WeightingConfig, ctx: &WeightContext<'_>) -> Result<WeightOutcome> {
    match cfg {
        WeightingConfig::Equal => Ok(WeightOutcome::plain(equal_weights(ctx.m)?)),
        WeightingConfig::Fixed { weights } => {
            check_dim("fixed weights", ctx.m, weights.len())?;
            Ok(WeightOutcome::plain(WeightVector::orthant(weights.clone())?))
        }
        WeightingConfig::Camoo(c) => {
            let warm_w = ctx.warm_w.filter(|_| c.warm_start);
            match c.mode {
                CamooMode::ExactEigen => {
                    let hs = ctx.hessians.ok_or_else(|| missing("CAMOO", "hessians"))?;
                    let out = camoo_weights_exact(hs, c, warm_w)?;
                    Ok(WeightOutcome {
                        weights: out.weights,
                        lambda_min: Some(out.lambda_min),
                        pu_gap: None,
                        dual: None,
                    })
                }
                CamooMode::DiagonalBilinear => {
                    let a = ctx.diag_hessians.ok_or_else(|| missing("CAMOO", "diag_hessians"))?;
                    let warm = match (warm_w, ctx.warm_q.filter(|_| c.warm_start)) {
                        (Some(w), Some(q)) => Some((w, q)),
                        _ => None,
                    };
                    let (w, sol) = camoo_weights_diag(a, c, warm)?;
                    Ok(WeightOutcome {
                        weights: w,
                        lambda_min: Some(sol.value),
                        pu_gap: Some(sol.gap),
                        dual: Some(sol.q),
                    })
                }
            }
        }
        WeightingConfig::Pamoo(p) => {
            let pc = ctx.pamoo.ok_or_else(|| missing("PAMOO", "pamoo"))?;
            let w = pamoo_weights(pc, p, ctx.warm_w)?;
            Ok(WeightOutcome::plain(w))
        }
    }
}

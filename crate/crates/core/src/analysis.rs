//! Numerical checks of the convergence theory, and rate estimates from
//! traces.
//!
//! * [`recurrence_simulate_and_bound`] iterates the residual recurrences
//!   with equality and compares them with their closed-form bounds.
//! * [`theorem_bound_check`] compares a run's residuals with the two-phase
//!   CAMOO or PAMOO rate bound.
//! * [`fit_rate`] estimates the per-step contraction of a trace.
//! * [`self_concordance_check`] tests the self-concordant lower bound at a
//!   pair of points.
//! * [`weyl_degradation_suite`] tests how much curvature the diagonal
//!   approximation loses on random matrices.
//! * [`verify_suite`] bundles the above into one pass/fail report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::driver::{InnerConfig, RunConfig, RunTrace};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, SymMatrix};
use crate::objective::Objective;
use crate::problems::{ExpCurvature, ProblemSpec, Quadratic};
use crate::weighting::{
    camoo_weights_diag, camoo_weights_exact, lambda_min_weighted, solve_bilinear_pu, CamooConfig,
    WeightingConfig,
};

/// Slack allowed when comparing simulated or observed values with a bound.
pub const BOUND_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecurrenceVariant {
    /// `r²_{k+1} = r²_k − α₁r²_k/(1 + α₂r_k)`
    Exact,
    /// `r²_{k+1} = r²_k − α₁r²_k/(1 + α₂r_k) + α₃ + α₄r_k`
    Eps,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub alpha4: f64,
    pub r0: f64,
    pub horizon: usize,
}

impl RecurrenceParams {
    pub fn exact(alpha1: f64, alpha2: f64, r0: f64, horizon: usize) -> Self {
        RecurrenceParams {
            alpha1,
            alpha2,
            alpha3: 0.0,
            alpha4: 0.0,
            r0,
            horizon,
        }
    }

    /// Largest perturbation terms the ε-variant admits:
    /// `α₃ = α₁²/(256α₂²)` and `α₄ = α₁/(4α₂)`. With `α₂ = 0` both limits
    /// are unbounded and the plateau term `α₄/(α₁α₂)` is finite only for
    /// `α₄ = 0`, so that case uses `α₃ = α₁²/256` and `α₄ = 0`.
    pub fn eps_maximal(alpha1: f64, alpha2: f64, r0: f64, horizon: usize) -> Self {
        let (alpha3, alpha4) = if alpha2 > 0.0 {
            (alpha1 * alpha1 / (256.0 * alpha2 * alpha2), alpha1 / (4.0 * alpha2))
        } else {
            (alpha1 * alpha1 / 256.0, 0.0)
        };
        RecurrenceParams {
            alpha1,
            alpha2,
            alpha3,
            alpha4,
            r0,
            horizon,
        }
    }

    fn validate(&self, variant: RecurrenceVariant) -> Result<()> {
        let p = self;
        let finite = [p.alpha1, p.alpha2, p.alpha3, p.alpha4, p.r0].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::arg("recurrence parameters must be finite"));
        }
        let a1_ok = match variant {
            RecurrenceVariant::Exact => (0.0..2.0).contains(&p.alpha1),
            RecurrenceVariant::Eps => p.alpha1 > 0.0 && p.alpha1 < 2.0,
        };
        if !a1_ok {
            let range = if variant == RecurrenceVariant::Exact { "[0, 2)" } else { "(0, 2)" };
            return Err(Error::arg(format!("α₁ = {} violates α₁ ∈ {range}", p.alpha1)));
        }
        if p.alpha2 < 0.0 {
            return Err(Error::arg(format!("α₂ = {} violates α₂ ≥ 0", p.alpha2)));
        }
        if p.r0 < 0.0 {
            return Err(Error::arg(format!("r₀ = {} violates r₀ ≥ 0", p.r0)));
        }
        if variant == RecurrenceVariant::Exact {
            if p.alpha3 != 0.0 || p.alpha4 != 0.0 {
                return Err(Error::arg("the exact variant has α₃ = α₄ = 0"));
            }
            return Ok(());
        }
        if p.alpha3 < 0.0 || p.alpha4 < 0.0 {
            return Err(Error::arg("α₃ and α₄ must be nonnegative"));
        }
        if p.alpha2 > 0.0 {
            let rel = 1.0 + 1e-12;
            let a3_max = p.alpha1 * p.alpha1 / (256.0 * p.alpha2 * p.alpha2);
            if p.alpha3 > a3_max * rel {
                return Err(Error::arg(format!("α₃ = {} violates α₃ ≤ α₁²/(256α₂²) = {a3_max}", p.alpha3)));
            }
            let a4_max = p.alpha1 / (4.0 * p.alpha2);
            if p.alpha4 > a4_max * rel {
                return Err(Error::arg(format!("α₄ = {} violates α₄ ≤ α₁/(4α₂) = {a4_max}", p.alpha4)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceOutcome {
    /// `r₀ … r_K`
    pub r: Vec<f64>,
    pub bound: Vec<f64>,
    pub k0: usize,
    /// `√(2α₃/α₁ + 2α₄/(α₁α₂))`, 0 for the exact variant.
    pub plateau: f64,
    pub holds: bool,
}

fn clamped_ceil(v: f64) -> usize {
    if v.is_nan() || v <= 0.0 {
        0
    } else if v >= usize::MAX as f64 {
        usize::MAX
    } else {
        v.ceil() as usize
    }
}

/// Iterates the recurrence with equality for `horizon` steps and evaluates
/// the lemma's two-phase bound: linear decrease `r₀ − α₁k/(c·α₂)` before
/// `k₀ = ⌈c(r₀α₂ − 1)/α₁⌉` and `r_{k₀}(1 − α₁/2)^{(k−k₀)/2}` (plus the
/// plateau for the ε-variant) after, with `c = 4` (exact) or `16` (ε).
pub fn recurrence_simulate_and_bound(p: &RecurrenceParams, variant: RecurrenceVariant) -> Result<RecurrenceOutcome> {
    p.validate(variant)?;
    let mut r = Vec::with_capacity(p.horizon + 1);
    r.push(p.r0);
    for k in 0..p.horizon {
        let rk = r[k];
        let sq = rk * rk - p.alpha1 * rk * rk / (1.0 + p.alpha2 * rk) + p.alpha3 + p.alpha4 * rk;
        r.push(sq.max(0.0).sqrt());
    }
    let c = match variant {
        RecurrenceVariant::Exact => 4.0,
        RecurrenceVariant::Eps => 16.0,
    };
    let k0 = if p.alpha1 == 0.0 {
        0
    } else {
        clamped_ceil(c * (p.r0 * p.alpha2 - 1.0) / p.alpha1)
    };
    let plateau = match variant {
        RecurrenceVariant::Exact => 0.0,
        RecurrenceVariant::Eps => {
            let t4 = if p.alpha4 == 0.0 {
                0.0
            } else {
                2.0 * p.alpha4 / (p.alpha1 * p.alpha2)
            };
            (2.0 * p.alpha3 / p.alpha1 + t4).sqrt()
        }
    };
    let factor = (1.0 - p.alpha1 / 2.0).sqrt();
    let bound: Vec<f64> = (0..=p.horizon)
        .map(|k| {
            if k < k0 {
                p.r0 - p.alpha1 / (c * p.alpha2) * k as f64
            } else {
                r[k0] * factor.powi((k - k0) as i32) + plateau
            }
        })
        .collect();
    let holds = r.iter().zip(&bound).all(|(ri, bi)| *ri <= bi + BOUND_TOL);
    Ok(RecurrenceOutcome {
        r,
        bound,
        k0,
        plateau,
        holds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremKind {
    Camoo,
    Pamoo,
}

/// Constants of the rate theorems. `mu` is `μ_G` for CAMOO and `μ_L` for
/// PAMOO.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremParams {
    pub beta: f64,
    pub mu: f64,
    pub m_f: f64,
    pub m: usize,
    pub which: TheoremKind,
}

impl TheoremParams {
    fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) {
            return Err(Error::arg(format!("β = {} violates β > 0", self.beta)));
        }
        if !(self.mu > 0.0) || self.mu > self.beta {
            return Err(Error::arg(format!("μ = {} violates 0 < μ ≤ β = {}", self.mu, self.beta)));
        }
        if !(self.m_f >= 0.0) {
            return Err(Error::arg(format!("M_f = {} violates M_f ≥ 0", self.m_f)));
        }
        if self.m == 0 {
            return Err(Error::arg("m must be at least 1"));
        }
        Ok(())
    }

    /// `(c, d)`: `k₀` and slope use `c`, the contraction `1 − 3μ/(dβ)`.
    fn constants(&self) -> (f64, f64) {
        match self.which {
            TheoremKind::Camoo => (16.0, 8.0),
            TheoremKind::Pamoo => (64.0, 32.0),
        }
    }

    /// `⌈c·β(r₀·3√m·β·M_f − √μ) / (3μ^{3/2})⌉`, clamped at 0.
    pub fn k0(&self, r0: f64) -> usize {
        let (c, _) = self.constants();
        let m = self.m as f64;
        let num = c * self.beta * (r0 * 3.0 * m.sqrt() * self.beta * self.m_f - self.mu.sqrt());
        clamped_ceil(num / (3.0 * self.mu.powf(1.5)))
    }

    /// Per-step decrease before `k₀`: `μ^{3/2}/(c·β²√m·M_f)`.
    pub fn slope(&self) -> f64 {
        let (c, _) = self.constants();
        self.mu.powf(1.5) / (c * self.beta * self.beta * (self.m as f64).sqrt() * self.m_f)
    }

    /// `√(1 − 3μ/(dβ))`, the per-step factor after `k₀`.
    pub fn factor(&self) -> f64 {
        let (_, d) = self.constants();
        (1.0 - 3.0 * self.mu / (d * self.beta)).max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremCheck {
    pub holds: bool,
    pub k0: usize,
    pub steps: Vec<usize>,
    pub residuals: Vec<f64>,
    pub bound: Vec<f64>,
    /// Largest `residual / bound` over the trace.
    pub worst_ratio: f64,
}

/// Compares trace residuals with the theorem's two-phase bound.
pub fn theorem_bound_check(trace: &RunTrace, tp: &TheoremParams) -> Result<TheoremCheck> {
    tp.validate()?;
    let residuals = trace
        .residuals()
        .ok_or_else(|| Error::arg("trace lacks residuals"))?;
    let steps: Vec<usize> = trace.records.iter().map(|r| r.step).collect();
    theorem_bound_check_series(&steps, &residuals, tp)
}

/// [`theorem_bound_check`] on raw `(step, residual)` series.
pub fn theorem_bound_check_series(steps: &[usize], residuals: &[f64], tp: &TheoremParams) -> Result<TheoremCheck> {
    tp.validate()?;
    if steps.is_empty() || steps.len() != residuals.len() {
        return Err(Error::arg("need matching, nonempty step and residual series"));
    }
    if steps[0] != 0 {
        return Err(Error::arg("series must start at step 0"));
    }
    let r0 = residuals[0];
    let k0 = if tp.m_f == 0.0 { 0 } else { tp.k0(r0) };
    let slope = if k0 == 0 { 0.0 } else { tp.slope() };
    let phase1 = |k: usize| r0 - slope * k as f64;
    let r_k0 = steps
        .iter()
        .position(|&s| s == k0)
        .map(|i| residuals[i])
        .unwrap_or_else(|| phase1(k0));
    let factor = tp.factor();
    let bound: Vec<f64> = steps
        .iter()
        .map(|&k| {
            if k < k0 {
                phase1(k)
            } else {
                r_k0 * factor.powi((k - k0) as i32)
            }
        })
        .collect();
    let mut holds = true;
    let mut worst_ratio = 0.0f64;
    for (r, b) in residuals.iter().zip(&bound) {
        if *r > b * (1.0 + 1e-9) + BOUND_TOL {
            holds = false;
        }
        if *b > 0.0 {
            worst_ratio = worst_ratio.max(r / b);
        } else if *r > 0.0 {
            worst_ratio = f64::INFINITY;
        }
    }
    Ok(TheoremCheck {
        holds,
        k0,
        steps: steps.to_vec(),
        residuals: residuals.to_vec(),
        bound,
        worst_ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub rho: f64,
    /// Some tail residual was ≤ 0 and was clipped to 1e-300.
    pub clipped: bool,
    pub points: usize,
}

const MIN_TAIL: usize = 10;

/// Per-step contraction `ρ` fitted by least squares to `ln r_k` over the
/// last `tail_fraction` of the records.
pub fn fit_rate(trace: &RunTrace, tail_fraction: f64) -> Result<RateFit> {
    let residuals = trace
        .residuals()
        .ok_or_else(|| Error::arg("trace lacks residuals"))?;
    let steps: Vec<usize> = trace.records.iter().map(|r| r.step).collect();
    fit_rate_series(&steps, &residuals, tail_fraction)
}

/// [`fit_rate`] on raw series.
pub fn fit_rate_series(steps: &[usize], residuals: &[f64], tail_fraction: f64) -> Result<RateFit> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::arg(format!("tail fraction {tail_fraction} outside (0, 1]")));
    }
    if steps.len() != residuals.len() {
        return Err(Error::arg("step and residual series differ in length"));
    }
    let n = steps.len();
    let take = ((n as f64 * tail_fraction).ceil() as usize).min(n);
    if take < MIN_TAIL {
        return Err(Error::arg(format!("rate fit needs at least {MIN_TAIL} tail records, got {take}")));
    }
    let tail = n - take;
    let mut clipped = false;
    let pts: Vec<(f64, f64)> = steps[tail..]
        .iter()
        .zip(&residuals[tail..])
        .map(|(&s, &r)| {
            if !(r > 1e-300) {
                clipped = true;
            }
            (s as f64, r.max(1e-300).ln())
        })
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::arg("tail steps are all equal"));
    }
    Ok(RateFit {
        rho: (sxy / sxx).exp(),
        clipped,
        points: pts.len(),
    })
}

/// Largest residual over the last `tail_fraction` of the records.
pub fn plateau(trace: &RunTrace, tail_fraction: f64) -> Result<f64> {
    let residuals = trace
        .residuals()
        .ok_or_else(|| Error::arg("trace lacks residuals"))?;
    if residuals.is_empty() || !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::arg("plateau needs records and a tail fraction in (0, 1]"));
    }
    let take = ((residuals.len() as f64 * tail_fraction).ceil() as usize).max(1);
    Ok(residuals[residuals.len() - take..].iter().copied().fold(0.0, f64::max))
}

/// Outcome of [`self_concordance_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcordanceCheck {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

/// Tests `f(y) ≥ f(x) + ⟨∇f(x), y − x⟩ + t²/(2(1 + M_f·t))` with
/// `t = ‖y − x‖` in the norm of `∇²f(x)`. This is the self-concordant
/// lower bound with `ω(s) ≥ s²/(2(1+s))` substituted; `M_f = 0` gives the
/// quadratic bound `t²/2`.
pub fn self_concordance_check(oracle: &dyn Objective, x: &[f64], y: &[f64], m_f: f64) -> Result<ConcordanceCheck> {
    if !(m_f >= 0.0) {
        return Err(Error::arg("M_f must be nonnegative"));
    }
    crate::error::check_dim("self_concordance_check", oracle.dim(), x.len())?;
    crate::error::check_dim("self_concordance_check", oracle.dim(), y.len())?;
    let h = oracle
        .hessian(x)
        .ok_or_else(|| Error::Unsupported("self-concordance check needs an analytic Hessian".into()))?;
    let d: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
    let t = h.quad_form(&d).max(0.0).sqrt();
    let lhs = oracle.value(y);
    let rhs = oracle.value(x) + linalg::dot(&oracle.gradient(x), &d) + t * t / (2.0 * (1.0 + m_f * t));
    Ok(ConcordanceCheck {
        holds: lhs >= rhs - 1e-10 * (1.0 + lhs.abs()),
        lhs,
        rhs,
    })
}

/// `max_{w ∈ grid} λ_min(Σ wᵢHᵢ)` over the simplex with spacing
/// `resolution`, restricted to `w ≥ w_min`. Supports `m ≤ 3`.
pub fn grid_max_lambda_min(hessians: &[SymMatrix], resolution: f64, w_min: f64) -> Result<(f64, Vec<f64>)> {
    let m = hessians.len();
    if m == 0 || m > 3 {
        return Err(Error::arg(format!("grid oracle supports 1 ≤ m ≤ 3, got {m}")));
    }
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(Error::arg("grid resolution must lie in (0, 1]"));
    }
    let steps = (1.0 / resolution).round() as usize;
    let mut best = (f64::NEG_INFINITY, vec![1.0]);
    let mut consider = |w: Vec<f64>| -> Result<()> {
        if w.iter().any(|&v| v < w_min - 1e-12) {
            return Ok(());
        }
        let (lam, _) = lambda_min_weighted(hessians, &w)?;
        if lam > best.0 {
            best = (lam, w);
        }
        Ok(())
    };
    match m {
        1 => consider(vec![1.0])?,
        2 => {
            for i in 0..=steps {
                let a = i as f64 / steps as f64;
                consider(vec![a, 1.0 - a])?;
            }
        }
        _ => {
            for i in 0..=steps {
                for j in 0..=steps - i {
                    let a = i as f64 / steps as f64;
                    let b = j as f64 / steps as f64;
                    consider(vec![a, b, (1.0 - a - b).max(0.0)])?;
                }
            }
        }
    }
    Ok(best)
}

/// `max_{w ∈ grid} min_j (Aᵀw)_j` for two-row `A`.
pub fn grid_game_value(a: &Matrix, resolution: f64) -> Result<f64> {
    if a.rows() != 2 {
        return Err(Error::arg("game grid oracle supports two rows"));
    }
    let steps = (1.0 / resolution).round() as usize;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=steps {
        let t = i as f64 / steps as f64;
        let v = a.tr_mul_vec(&[t, 1.0 - t]).into_iter().fold(f64::INFINITY, f64::min);
        best = best.max(v);
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylTrial {
    pub m: usize,
    pub n: usize,
    /// Best curvature over full matrices (grid and supergradient solver).
    pub optimum: f64,
    /// `λ_min(Σ ŵᵢHᵢ)` with `ŵ` from the diagonal game.
    pub achieved: f64,
    /// `2·maxᵢ ‖Hᵢ − diag(Hᵢ)‖₂`
    pub degradation: f64,
    /// Certified duality gap of the game solution, used as slack.
    pub slack: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylReport {
    pub trials: usize,
    pub passes: usize,
    pub records: Vec<WeylTrial>,
}

fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> SymMatrix {
    let b: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    SymMatrix::from_fn(n, |i, j| {
        let mut s = 0.0;
        for k in 0..n {
            s += b[i * n + k] * b[j * n + k];
        }
        s / n as f64 + if i == j { 0.1 } else { 0.0 }
    })
}

/// Settings for the diagonal game in the suites: unregularized PU run long
/// enough to certify gaps far below the tolerances checked.
pub fn precise_game_config() -> CamooConfig {
    CamooConfig {
        pu_tau: 0.0,
        pu_iterations: 50_000,
        ..CamooConfig::diagonal()
    }
}

/// Checks `λ_min(Σ ŵᵢHᵢ) ≥ μ − 2·maxᵢ ‖Hᵢ − diag(Hᵢ)‖` on a single instance,
/// where `ŵ` solves the diagonal game and `μ` is the best curvature found
/// over full matrices.
pub fn weyl_trial(hessians: &[SymMatrix]) -> Result<WeylTrial> {
    let m = hessians.len();
    let n = hessians.first().map_or(0, |h| h.dim());
    let res = if m == 3 { 0.02 } else { 0.01 };
    let (grid, _) = grid_max_lambda_min(hessians, res, 0.0)?;
    let solver = camoo_weights_exact(hessians, &CamooConfig::default(), None)?.lambda_min;
    let optimum = grid.max(solver);
    let rows: Vec<Vec<f64>> = hessians.iter().map(|h| h.diagonal()).collect();
    let (w, sol) = camoo_weights_diag(&Matrix::from_rows(&rows)?, &precise_game_config(), None)?;
    let (achieved, _) = lambda_min_weighted(hessians, w.as_slice())?;
    let degradation = 2.0
        * hessians
            .iter()
            .map(|h| linalg::spectral_norm(&h.off_diagonal()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
    let slack = sol.gap.max(0.0);
    Ok(WeylTrial {
        m,
        n,
        optimum,
        achieved,
        degradation,
        slack,
        holds: achieved >= optimum - degradation - slack - 1e-9,
    })
}

/// Runs [`weyl_trial`] on `trials` random SPD families (`m ≤ 3`, `n ≤ 6`).
/// Trial `k` draws from its own RNG stream.
pub fn weyl_degradation_suite(seed: u64, trials: usize) -> Result<WeylReport> {
    if trials == 0 {
        return Err(Error::arg("need at least one trial"));
    }
    let mut records = Vec::with_capacity(trials);
    for k in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let m = rng.random_range(1..=3);
        let n = rng.random_range(1..=6);
        let hs: Vec<SymMatrix> = (0..m).map(|_| random_spd(&mut rng, n)).collect();
        records.push(weyl_trial(&hs)?);
    }
    Ok(WeylReport {
        trials,
        passes: records.iter().filter(|r| r.holds).count(),
        records,
    })
}

/// Runs equal-weight GD from `starts` random points in `[−2, 2]ⁿ` and
/// returns the largest pairwise distance between the final iterates.
pub fn multi_start_spread(spec: &ProblemSpec, starts: usize, seed: u64, steps: usize) -> Result<f64> {
    let problem = crate::problems::build(spec)?;
    let beta = problem
        .meta
        .beta
        .ok_or_else(|| Error::arg("multi-start check needs a known β"))?;
    let n = problem.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut finals: Vec<Vec<f64>> = Vec::with_capacity(starts);
    for _ in 0..starts {
        let x0: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut cfg = RunConfig::new(spec.clone(), WeightingConfig::Equal, InnerConfig::Gd { step: 1.0 / beta }, steps)
            .with_x0(x0)
            .recording_iterates();
        cfg.record_every = steps.max(1);
        let trace = crate::driver::run_on(&problem, &cfg).map_err(|e| Error::numeric(e.to_string()))?;
        finals.push(trace.last().and_then(|r| r.x.clone()).unwrap_or_default());
    }
    let mut spread = 0.0f64;
    for i in 0..finals.len() {
        for j in i + 1..finals.len() {
            spread = spread.max(linalg::distance(&finals[i], &finals[j]));
        }
    }
    Ok(spread)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }
}

/// The recurrence grid: `α₁ ∈ {0.1, 0.5, 1.5}`, `α₂ ∈ {0, 1, 10}`,
/// `r₀ ∈ {0.1, 1, 100}`, both variants, horizon 1000. Returns
/// `(passes, total)`.
pub fn recurrence_grid() -> Result<(usize, usize)> {
    let mut passes = 0;
    let mut total = 0;
    for &a1 in &[0.1, 0.5, 1.5] {
        for &a2 in &[0.0, 1.0, 10.0] {
            for &r0 in &[0.1, 1.0, 100.0] {
                let exact = recurrence_simulate_and_bound(&RecurrenceParams::exact(a1, a2, r0, 1000), RecurrenceVariant::Exact)?;
                let eps = recurrence_simulate_and_bound(&RecurrenceParams::eps_maximal(a1, a2, r0, 1000), RecurrenceVariant::Eps)?;
                for out in [exact, eps] {
                    passes += (out.holds && out.bound.iter().all(|b| b.is_finite())) as usize;
                    total += 1;
                }
            }
        }
    }
    Ok((passes, total))
}

/// Random `rows × cols` games with entries in `[0, 3]`; returns the largest
/// certified gap, and for two-row games the largest deviation from the grid
/// value.
pub fn bilinear_suite(seed: u64, rows: usize, cols: usize, instances: usize) -> Result<(f64, Option<f64>)> {
    let cfg = precise_game_config();
    let mut worst_gap = 0.0f64;
    let mut worst_value: Option<f64> = None;
    for k in 0..instances {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let data: Vec<f64> = (0..rows * cols).map(|_| rng.random_range(0.0..3.0)).collect();
        let a = Matrix::new(rows, cols, data)?;
        let sol = solve_bilinear_pu(&a, &cfg, None)?;
        worst_gap = worst_gap.max(sol.gap);
        if rows == 2 {
            let grid = grid_game_value(&a, 1e-4)?;
            let dev = (sol.value - grid).abs();
            worst_value = Some(worst_value.map_or(dev, |w| w.max(dev)));
        }
    }
    Ok((worst_gap, worst_value))
}

fn self_concordance_suite(seed: u64) -> Result<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(7);
    let mut passes = 0;
    let mut total = 0;
    // The exponential family is self-concordant with M_f = e/2 on |x| ≤ 2.
    let m_f = std::f64::consts::E / 2.0;
    for sign in [1.0, -1.0] {
        for n in 1..=3 {
            let f = ExpCurvature { n, sign };
            for _ in 0..50 {
                let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
                let y: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
                passes += self_concordance_check(&f, &x, &y, m_f)?.holds as usize;
                total += 1;
            }
        }
    }
    let h = SymMatrix::new(2, vec![2.0, 0.4, 0.4, 1.0])?;
    let q = Quadratic::new(h, vec![0.3, -0.2])?;
    for _ in 0..50 {
        let x: Vec<f64> = (0..2).map(|_| rng.random_range(-3.0..3.0)).collect();
        let y: Vec<f64> = (0..2).map(|_| rng.random_range(-3.0..3.0)).collect();
        passes += self_concordance_check(&q, &x, &y, 0.0)?.holds as usize;
        total += 1;
    }
    Ok((passes, total))
}

/// Recurrence, diagonal-degradation, self-concordance and bilinear-solver
/// suites.
pub fn verify_suite(seed: u64) -> Result<VerifyReport> {
    let mut suites = Vec::new();

    let (p, t) = recurrence_grid()?;
    suites.push(SuiteResult {
        name: "recurrence".into(),
        passed: p == t,
        detail: format!("{p}/{t} parameter sets bounded"),
    });

    let weyl = weyl_degradation_suite(seed, 100)?;
    suites.push(SuiteResult {
        name: "diagonal_degradation".into(),
        passed: weyl.passes == weyl.trials,
        detail: format!("{}/{} random families", weyl.passes, weyl.trials),
    });

    let (p, t) = self_concordance_suite(seed)?;
    suites.push(SuiteResult {
        name: "self_concordance".into(),
        passed: p == t,
        detail: format!("{p}/{t} point pairs"),
    });

    let (gap, _) = bilinear_suite(seed, 5, 8, 50)?;
    let (_, dev) = bilinear_suite(seed ^ 0x5eed, 2, 8, 20)?;
    let dev = dev.unwrap_or(0.0);
    suites.push(SuiteResult {
        name: "bilinear".into(),
        passed: gap <= 1e-3 && dev <= 1e-3,
        detail: format!("max gap {gap:.2e} on 5x8, max value error {dev:.2e} on 2x8"),
    });

    let spread = multi_start_spread(&ProblemSpec::Specification { delta: 0.1 }, 20, seed, 2000)?
        .max(multi_start_spread(&ProblemSpec::Selection { delta: 0.1, m: 3, n: 3 }, 20, seed, 2000)?);
    suites.push(SuiteResult {
        name: "unique_minimizer".into(),
        passed: spread <= 1e-6,
        detail: format!("max pairwise distance {spread:.2e} over 20 starts"),
    });

    Ok(VerifyReport { seed, suites })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_recurrence_example() {
        let out = recurrence_simulate_and_bound(&RecurrenceParams::exact(0.5, 0.0, 1.0, 10), RecurrenceVariant::Exact).unwrap();
        assert!((out.r[10] - 0.03125).abs() < 1e-15);
        assert!((out.bound[10] - 0.75f64.powi(5)).abs() < 1e-15);
        assert!(out.holds);
    }

    #[test]
    fn zero_alpha1_is_constant() {
        let out = recurrence_simulate_and_bound(&RecurrenceParams::exact(0.0, 3.0, 2.0, 50), RecurrenceVariant::Exact).unwrap();
        assert!(out.r.iter().all(|&r| r == 2.0));
        assert!(out.holds);
    }

    #[test]
    fn eps_recurrence_example() {
        let p = RecurrenceParams {
            alpha1: 0.5,
            alpha2: 1.0,
            alpha3: 0.25 / 256.0,
            alpha4: 0.5 / 8.0,
            r0: 4.0,
            horizon: 1000,
        };
        let out = recurrence_simulate_and_bound(&p, RecurrenceVariant::Eps).unwrap();
        assert!(out.holds);
        let expect = (2.0 * p.alpha3 / p.alpha1 + 2.0 * p.alpha4 / (p.alpha1 * p.alpha2)).sqrt();
        assert!((out.plateau - expect).abs() < 1e-15);
    }

    #[test]
    fn recurrence_violations_named() {
        let err = recurrence_simulate_and_bound(&RecurrenceParams::exact(2.5, 0.0, 1.0, 3), RecurrenceVariant::Exact).unwrap_err();
        assert!(err.to_string().contains("α₁"));
        let mut p = RecurrenceParams::eps_maximal(0.5, 1.0, 1.0, 3);
        p.alpha4 *= 2.0;
        let err = recurrence_simulate_and_bound(&p, RecurrenceVariant::Eps).unwrap_err();
        assert!(err.to_string().contains("α₄"));
    }

    #[test]
    fn theorem_single_record() {
        let tp = TheoremParams {
            beta: 1.8,
            mu: 1.0,
            m_f: 0.0,
            m: 2,
            which: TheoremKind::Camoo,
        };
        assert!(theorem_bound_check_series(&[0], &[3.0], &tp).unwrap().holds);
        let bad = TheoremParams { mu: 18.0, ..tp };
        assert!(theorem_bound_check_series(&[0], &[3.0], &bad).is_err());
    }

    #[test]
    fn geometric_rate() {
        let steps: Vec<usize> = (0..100).collect();
        let r: Vec<f64> = steps.iter().map(|&k| 0.9f64.powi(k as i32)).collect();
        assert!((fit_rate_series(&steps, &r, 0.5).unwrap().rho - 0.9).abs() < 1e-6);
        let flat = vec![2.0; 100];
        assert!((fit_rate_series(&steps, &flat, 0.5).unwrap().rho - 1.0).abs() < 1e-12);
        let mut zeros = r.clone();
        zeros[99] = 0.0;
        assert!(fit_rate_series(&steps, &zeros, 0.5).unwrap().clipped);
        assert!(fit_rate_series(&steps[..5], &r[..5], 1.0).is_err());
    }

    #[test]
    fn concordance_examples() {
        let f = ExpCurvature { n: 1, sign: 1.0 };
        assert!(self_concordance_check(&f, &[0.0], &[1.0], 1.0).unwrap().holds);
        let same = self_concordance_check(&f, &[0.4], &[0.4], 1.0).unwrap();
        assert_eq!(same.lhs, same.rhs);
        let q = Quadratic::centered(SymMatrix::from_diag(&[2.0, 0.5]));
        let c = self_concordance_check(&q, &[1.0, -1.0], &[-0.3, 2.0], 0.0).unwrap();
        assert!((c.lhs - c.rhs).abs() < 1e-10);
    }

    #[test]
    fn weyl_diagonal_and_single() {
        let hs = [SymMatrix::from_diag(&[1.0, 3.0]), SymMatrix::from_diag(&[3.0, 1.0])];
        let t = weyl_trial(&hs).unwrap();
        assert_eq!(t.degradation, 0.0);
        assert!((t.achieved - t.optimum).abs() < 1e-6);
        let one = [SymMatrix::new(2, vec![2.0, 0.5, 0.5, 1.0]).unwrap()];
        assert!(weyl_trial(&one).unwrap().holds);
    }

    #[test]
    fn grid_oracle_on_specification() {
        let hs = [SymMatrix::from_diag(&[1.8, 0.2]), SymMatrix::from_diag(&[0.2, 1.8])];
        let (v, w) = grid_max_lambda_min(&hs, 1e-3, 0.0).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert!((w[0] - 0.5).abs() < 1e-12);
    }
}

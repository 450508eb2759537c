//! The weighted gradient-descent loop.
//!
//! Each step asks the configured weight optimizer for `w_k` at `x_k`, forms
//! the weighted gradient `Σ w_{k,i} ∇fᵢ(x_k)` and applies the inner update
//! (plain GD or Adam).

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::hessians::{diag_hessian_matrix, splitmix64, DiagEma};
use crate::linalg;
use crate::objective::{combine, residual};
use crate::problems::{build, Problem, ProblemMeta, ProblemSpec};
use crate::weighting::{
    weight_optimizer_step, CamooMode, PamooConfig, PamooContext, WeightContext, WeightOutcome,
    WeightingConfig,
};

/// Inner update rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InnerConfig {
    Gd {
        step: f64,
    },
    Adam {
        step: f64,
        #[serde(default = "default_b1")]
        b1: f64,
        #[serde(default = "default_b2")]
        b2: f64,
        #[serde(default = "default_adam_eps")]
        eps: f64,
    },
}

fn default_b1() -> f64 {
    0.9
}

fn default_b2() -> f64 {
    0.999
}

fn default_adam_eps() -> f64 {
    1e-8
}

impl InnerConfig {
    /// GD with the practical learning rate 5e-4.
    pub fn gd_practical() -> Self {
        InnerConfig::Gd { step: 5e-4 }
    }

    /// Adam with the practical learning rate 5e-3.
    pub fn adam_practical() -> Self {
        InnerConfig::adam(5e-3)
    }

    pub fn adam(step: f64) -> Self {
        InnerConfig::Adam {
            step,
            b1: default_b1(),
            b2: default_b2(),
            eps: default_adam_eps(),
        }
    }

    pub fn step(&self) -> f64 {
        match self {
            InnerConfig::Gd { step } | InnerConfig::Adam { step, .. } => *step,
        }
    }

    fn validate(&self) -> Result<()> {
        let step = self.step();
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::Config(format!("inner.step must be positive, got {step}")));
        }
        if let InnerConfig::Adam { b1, b2, eps, .. } = self {
            if !(0.0..1.0).contains(b1) || !(0.0..1.0).contains(b2) || !(*eps > 0.0) {
                return Err(Error::Config("Adam needs b1, b2 in [0, 1) and eps > 0".into()));
            }
        }
        Ok(())
    }
}

/// Step-size regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Use the configured inner rule as given.
    #[default]
    Practical,
    /// Replace the inner rule by the step sizes of the convergence analysis:
    /// GD with `η = 1/(2β)` and the weight floor `μ_G/(8mβ)` for CAMOO,
    /// `η = 1` with exact maximization for PAMOO, `η = 1/β` otherwise.
    Theory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub weighting: WeightingConfig,
    pub inner: InnerConfig,
    pub steps: usize,
    pub seed: u64,
    pub record_every: usize,
    /// Multiply CAMOO's step by `m`: simplex weights sum to 1 where equal
    /// unit weights would sum to `m`.
    pub camoo_lr_scale_by_m: bool,
    pub x0: Option<Vec<f64>>,
    pub preset: Preset,
    /// Store the iterate in every record.
    pub record_iterates: bool,
}

impl RunConfig {
    pub fn new(problem: ProblemSpec, weighting: WeightingConfig, inner: InnerConfig, steps: usize) -> Self {
        RunConfig {
            problem,
            weighting,
            inner,
            steps,
            seed: 0,
            record_every: 1,
            camoo_lr_scale_by_m: true,
            x0: None,
            preset: Preset::Practical,
            record_iterates: false,
        }
    }

    /// Theory-preset run; the inner rule is filled in from the problem
    /// constants when the run starts.
    pub fn theory(problem: ProblemSpec, weighting: WeightingConfig, steps: usize) -> Self {
        RunConfig {
            preset: Preset::Theory,
            ..RunConfig::new(problem, weighting, InnerConfig::Gd { step: 1.0 }, steps)
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_x0(mut self, x0: Vec<f64>) -> Self {
        self.x0 = Some(x0);
        self
    }

    pub fn recording_iterates(mut self) -> Self {
        self.record_iterates = true;
        self
    }

    fn validate(&self) -> Result<()> {
        self.inner.validate()?;
        if self.record_every == 0 {
            return Err(Error::Config("record_every must be positive".into()));
        }
        Ok(())
    }
}

/// Rewrites `cfg` into its theory-preset form for a problem with constants
/// `meta`.
pub fn apply_theory_preset(cfg: &mut RunConfig, meta: &ProblemMeta, m: usize) -> Result<()> {
    let beta = meta
        .beta
        .ok_or_else(|| Error::Config("theory preset needs a known smoothness constant β".into()))?;
    cfg.camoo_lr_scale_by_m = false;
    let step = match &mut cfg.weighting {
        WeightingConfig::Camoo(c) => {
            if c.mode == CamooMode::ExactEigen {
                let mu = meta
                    .mu_g
                    .ok_or_else(|| Error::Config("CAMOO theory preset needs μ_G".into()))?;
                c.w_min = mu / (8.0 * m as f64 * beta);
            }
            1.0 / (2.0 * beta)
        }
        WeightingConfig::Pamoo(p) => {
            let f_star = p.f_star.take();
            *p = PamooConfig {
                f_star,
                ..PamooConfig::theory()
            };
            1.0
        }
        WeightingConfig::Equal | WeightingConfig::Fixed { .. } => 1.0 / beta,
    };
    cfg.inner = InnerConfig::Gd { step };
    cfg.preset = Preset::Practical;
    Ok(())
}

/// One row of a trace; `step` counts completed updates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub step: usize,
    pub f: Vec<f64>,
    pub w: Vec<f64>,
    /// Norm of the weighted gradient.
    pub grad_norm: f64,
    pub residual: Option<f64>,
    pub msq: Option<f64>,
    #[serde(default)]
    pub mean_norm: Option<f64>,
    pub lambda_min_est: Option<f64>,
    pub pu_gap: Option<f64>,
    #[serde(default)]
    pub x: Option<Vec<f64>>,
}

/// Marks a run that stopped on a numeric failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub step: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub config: RunConfig,
    pub problem: String,
    pub records: Vec<IterateRecord>,
    pub wall_time_secs: f64,
    pub failure: Option<RunFailure>,
}

impl RunTrace {
    pub fn last(&self) -> Option<&IterateRecord> {
        self.records.last()
    }

    pub fn residuals(&self) -> Option<Vec<f64>> {
        self.records.iter().map(|r| r.residual).collect()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(Error),
    #[error("numeric failure at step {step}: {message}")]
    Numeric {
        step: usize,
        message: String,
        partial: Box<RunTrace>,
    },
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Config(e)
    }
}

/// `x − ηg`
pub fn step_gd(x: &[f64], g: &[f64], eta: f64) -> Result<Vec<f64>> {
    check_dim("step_gd", x.len(), g.len())?;
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric("non-finite gradient"));
    }
    Ok(x.iter().zip(g).map(|(xi, gi)| xi - eta * gi).collect())
}

/// Adam moments with bias correction.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u32,
    pub b1: f64,
    pub b2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(n: usize, b1: f64, b2: f64, eps: f64) -> Self {
        AdamState {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            b1,
            b2,
            eps,
        }
    }

    pub fn with_defaults(n: usize) -> Self {
        AdamState::new(n, default_b1(), default_b2(), default_adam_eps())
    }
}

/// One Adam update of `x` along `g`.
pub fn step_adam(state: &mut AdamState, x: &[f64], g: &[f64], eta: f64) -> Result<Vec<f64>> {
    check_dim("step_adam", x.len(), g.len())?;
    check_dim("step_adam state", state.m.len(), g.len())?;
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric("non-finite gradient"));
    }
    state.t += 1;
    let c1 = 1.0 - state.b1.powi(state.t as i32);
    let c2 = 1.0 - state.b2.powi(state.t as i32);
    let mut out = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        state.m[i] = state.b1 * state.m[i] + (1.0 - state.b1) * g[i];
        state.v[i] = state.b2 * state.v[i] + (1.0 - state.b2) * g[i] * g[i];
        let mh = state.m[i] / c1;
        let vh = state.v[i] / c2;
        out.push(x[i] - eta * mh / (vh.sqrt() + state.eps));
    }
    Ok(out)
}

enum Inner {
    Gd(f64),
    Adam(f64, AdamState),
}

impl Inner {
    fn apply(&mut self, x: &[f64], g: &[f64]) -> Result<Vec<f64>> {
        match self {
            Inner::Gd(eta) => step_gd(x, g, *eta),
            Inner::Adam(eta, state) => step_adam(state, x, g, *eta),
        }
    }
}

struct Weigher<'a> {
    problem: &'a Problem,
    cfg: &'a WeightingConfig,
    f_star: Option<Vec<f64>>,
    key: u64,
    ema: Option<DiagEma>,
    warm_w: Option<Vec<f64>>,
    warm_q: Option<Vec<f64>>,
}

impl Weigher<'_> {
    fn weights(&mut self, step: usize, x: &[f64], values: &[f64], grads: &[Vec<f64>]) -> Result<WeightOutcome> {
        let set = &self.problem.objectives;
        let mut ctx = WeightContext {
            m: set.len(),
            warm_w: self.warm_w.as_deref(),
            warm_q: self.warm_q.as_deref(),
            ..Default::default()
        };
        let hessians;
        let diag;
        let pamoo;
        match self.cfg {
            WeightingConfig::Camoo(c) if c.mode == CamooMode::ExactEigen => {
                hessians = set.hessians(x)?;
                ctx.hessians = hessians.as_deref();
            }
            WeightingConfig::Camoo(c) => {
                let hc = c.hutchinson.keyed(self.key.wrapping_add(step as u64));
                let fresh = diag_hessian_matrix(set, x, &hc)?;
                diag = match &mut self.ema {
                    Some(ema) => ema.update(fresh),
                    None => fresh,
                };
                ctx.diag_hessians = Some(&diag);
            }
            WeightingConfig::Pamoo(_) => {
                let f_star = self.f_star.as_ref().expect("checked before the loop");
                pamoo = PamooContext::from_gradients(values, f_star, grads)?;
                ctx.pamoo = Some(&pamoo);
            }
            WeightingConfig::Equal | WeightingConfig::Fixed { .. } => {}
        }
        let out = weight_optimizer_step(self.cfg, &ctx)?;
        self.warm_w = Some(out.weights.as_slice().to_vec());
        self.warm_q.clone_from(&out.dual);
        Ok(out)
    }
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Runs weighted gradient descent on a freshly built problem.
pub fn run(cfg: &RunConfig) -> Result<RunTrace, RunError> {
    let problem = build(&cfg.problem)?;
    run_on(&problem, cfg)
}

/// Runs weighted gradient descent on an already built problem; `cfg.problem`
/// is only echoed.
pub fn run_on(problem: &Problem, cfg: &RunConfig) -> Result<RunTrace, RunError> {
    let start = Instant::now();
    let m = problem.m();
    let mut cfg = cfg.clone();
    let echo = cfg.clone();
    if cfg.preset == Preset::Theory {
        apply_theory_preset(&mut cfg, &problem.meta, m)?;
    }
    cfg.validate()?;
    match &cfg.weighting {
        WeightingConfig::Camoo(c) => c.validate(m)?,
        WeightingConfig::Pamoo(p) => p.validate()?,
        WeightingConfig::Fixed { weights } => {
            if weights.len() != m {
                return Err(Error::Config(format!(
                    "weighting.weights has {} entries for {m} objectives",
                    weights.len()
                ))
                .into());
            }
        }
        WeightingConfig::Equal => {}
    }

    let mut x = cfg.x0.clone().unwrap_or_else(|| problem.x0.clone());
    if x.len() != problem.dim() {
        return Err(Error::Config(format!(
            "x0 has dimension {}, problem {} has {}",
            x.len(),
            problem.name,
            problem.dim()
        ))
        .into());
    }
    let f_star = match &cfg.weighting {
        WeightingConfig::Pamoo(p) => {
            let fs = p
                .f_star
                .clone()
                .or_else(|| problem.optimum.f_star.clone())
                .ok_or_else(|| Error::Config("PAMOO needs optimal values: set weighting.f_star".into()))?;
            if fs.len() != m {
                return Err(Error::Config(format!("weighting.f_star has {} entries for {m} objectives", fs.len())).into());
            }
            Some(fs)
        }
        _ => None,
    };
    if let WeightingConfig::Camoo(c) = &cfg.weighting {
        if c.mode == CamooMode::ExactEigen && problem.objectives.hessians(&x)?.is_none() {
            return Err(Error::Config(format!(
                "CAMOO exact_eigen mode needs analytic Hessians, which {} lacks; use diagonal_bilinear",
                problem.name
            ))
            .into());
        }
    }

    let eta = match &cfg.weighting {
        WeightingConfig::Camoo(_) if cfg.camoo_lr_scale_by_m => cfg.inner.step() * m as f64,
        _ => cfg.inner.step(),
    };
    let mut inner = match &cfg.inner {
        InnerConfig::Gd { .. } => Inner::Gd(eta),
        InnerConfig::Adam { b1, b2, eps, .. } => Inner::Adam(eta, AdamState::new(x.len(), *b1, *b2, *eps)),
    };
    let ema = match &cfg.weighting {
        WeightingConfig::Camoo(c) => c.hutchinson.ema.map(DiagEma::new),
        _ => None,
    };
    let mut weigher = Weigher {
        problem,
        cfg: &cfg.weighting,
        f_star,
        key: splitmix64(cfg.seed),
        ema,
        warm_w: None,
        warm_q: None,
    };

    let mut trace = RunTrace {
        config: echo,
        problem: problem.name.clone(),
        records: Vec::new(),
        wall_time_secs: 0.0,
        failure: None,
    };
    let fail = |mut trace: RunTrace, step: usize, message: String| {
        trace.failure = Some(RunFailure {
            step,
            message: message.clone(),
        });
        trace.wall_time_secs = start.elapsed().as_secs_f64();
        RunError::Numeric {
            step,
            message,
            partial: Box::new(trace),
        }
    };

    for k in 0..=cfg.steps {
        let (values, grads) = problem.objectives.values_and_gradients(&x)?;
        if !all_finite(&values) || !grads.iter().all(|g| all_finite(g)) {
            return Err(fail(trace, k, "objective values or gradients are not finite".into()));
        }
        let out = match weigher.weights(k, &x, &values, &grads) {
            Ok(out) => out,
            Err(e) => return Err(fail(trace, k, format!("weight optimizer: {e}"))),
        };
        let w = out.weights.as_slice();
        let g = combine(w, &grads, x.len());
        if k % cfg.record_every == 0 || k == cfg.steps {
            let fit = problem.fit_metrics(&x);
            trace.records.push(IterateRecord {
                step: k,
                f: values,
                w: w.to_vec(),
                grad_norm: linalg::norm(&g),
                residual: residual(&x, &problem.optimum).ok(),
                msq: fit.map(|f| f.msq),
                mean_norm: fit.map(|f| f.mean_norm),
                lambda_min_est: out.lambda_min,
                pu_gap: out.pu_gap,
                x: cfg.record_iterates.then(|| x.clone()),
            });
        }
        if k == cfg.steps {
            break;
        }
        match inner.apply(&x, &g) {
            Ok(next) if all_finite(&next) => x = next,
            Ok(_) => return Err(fail(trace, k + 1, "iterate is not finite".into())),
            Err(e) => return Err(fail(trace, k + 1, e.to_string())),
        }
    }
    trace.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gd_cases() {
        assert_eq!(step_gd(&[1.0], &[2.0], 0.5).unwrap(), vec![0.0]);
        assert_eq!(step_gd(&[1.5, -2.0], &[0.0, 0.0], 0.3).unwrap(), vec![1.5, -2.0]);
        assert!(step_gd(&[1.0], &[f64::NAN], 0.1).is_err());
    }

    #[test]
    fn adam_first_step() {
        let mut s = AdamState::with_defaults(1);
        let x = step_adam(&mut s, &[1.0], &[1.0], 0.1).unwrap();
        assert!((x[0] - 0.9).abs() < 1e-6);
    }

    #[test]
    fn zero_steps_keep_x0() {
        let cfg = RunConfig::new(
            ProblemSpec::Specification { delta: 0.1 },
            WeightingConfig::Equal,
            InnerConfig::Gd { step: 0.25 },
            0,
        )
        .recording_iterates();
        let t = run(&cfg).unwrap();
        assert_eq!(t.records.len(), 1);
        assert_eq!(t.records[0].x.as_deref(), Some(&[1.0, 1.0][..]));
    }

    #[test]
    fn specification_ew_contracts() {
        let cfg = RunConfig::new(
            ProblemSpec::Specification { delta: 0.1 },
            WeightingConfig::Equal,
            InnerConfig::Gd { step: 0.25 },
            100,
        );
        let t = run(&cfg).unwrap();
        let r = t.last().unwrap().residual.unwrap();
        let expect = 0.75f64.powi(100) * 2f64.sqrt();
        assert!((r - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn divergence_keeps_partial_trace() {
        let cfg = RunConfig::new(
            ProblemSpec::Selection { delta: 0.1, m: 2, n: 2 },
            WeightingConfig::Equal,
            InnerConfig::Gd { step: 10.0 },
            10_000,
        );
        match run(&cfg) {
            Err(RunError::Numeric { partial, step, .. }) => {
                assert!(!partial.records.is_empty());
                assert!(step > 0);
                assert!(partial.failure.is_some());
            }
            other => panic!("expected numeric failure, got {other:?}"),
        }
    }

    #[test]
    fn camoo_exact_needs_hessians() {
        let cfg = RunConfig::new(
            ProblemSpec::MlpMatching(crate::problems::MlpSpec {
                hidden: 4,
                dataset_size: 5,
                ..Default::default()
            }),
            WeightingConfig::Camoo(Default::default()),
            InnerConfig::adam_practical(),
            3,
        );
        assert!(matches!(run(&cfg), Err(RunError::Config(_))));
    }

    #[test]
    fn theory_preset_needs_beta() {
        let cfg = RunConfig::theory(
            ProblemSpec::LocalCurvature { n: 1 },
            WeightingConfig::Camoo(Default::default()),
            5,
        );
        assert!(matches!(run(&cfg), Err(RunError::Config(_))));
    }
}

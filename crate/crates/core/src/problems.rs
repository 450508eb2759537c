//! Benchmark problems.
//!
//! Analytic instances:
//! * specification: `f₁ = (1−Δ)x₁² + Δx₂²`, `f₂ = Δx₁² + (1−Δ)x₂²`;
//! * selection: `m−1` copies of `(1−Δ)x₁² + Δ Σ_{j≥2} xⱼ²` plus `‖x‖²`;
//! * local curvature: `f₁ = Σⱼ (e^{xⱼ} − xⱼ)`, `f₂(x) = f₁(−x)`;
//! * quadratic-power family: `fᵢ = (xᵀHᵢx)^{αᵢ}`.
//!
//! `mlp_matching` is the network-matching toy, where a two-layer student is
//! fit to the outputs of a fixed teacher under several losses.
//! [`misalign`] shifts the objectives of a quadratic instance apart, which
//! makes it only approximately aligned.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, SymMatrix};
use crate::objective::{project_floored_simplex, JointOracle, Objective, ObjectiveSet, OptimalInfo};
use crate::weighting::{camoo_weights_exact, CamooConfig};

/// `½(x − c)ᵀH(x − c)`
#[derive(Debug, Clone)]
pub struct Quadratic {
    pub h: SymMatrix,
    pub center: Vec<f64>,
}

impl Quadratic {
    pub fn new(h: SymMatrix, center: Vec<f64>) -> Result<Self> {
        check_dim("Quadratic", h.dim(), center.len())?;
        Ok(Quadratic { h, center })
    }

    pub fn centered(h: SymMatrix) -> Self {
        let n = h.dim();
        Quadratic { h, center: vec![0.0; n] }
    }

    fn offset(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.center).map(|(a, c)| a - c).collect()
    }
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.h.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * self.h.quad_form(&self.offset(x))
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.h.mul_vec(&self.offset(x))
    }

    fn hessian(&self, _x: &[f64]) -> Option<SymMatrix> {
        Some(self.h.clone())
    }

    fn diag_hessian(&self, _x: &[f64]) -> Option<Vec<f64>> {
        Some(self.h.diagonal())
    }

    fn optimal_value(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// `(xᵀHx)^α` with `α ≥ 1`.
#[derive(Debug, Clone)]
pub struct PowerQuadratic {
    pub h: SymMatrix,
    pub alpha: f64,
}

impl Objective for PowerQuadratic {
    fn dim(&self) -> usize {
        self.h.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.h.quad_form(x).max(0.0).powf(self.alpha)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let q = self.h.quad_form(x).max(0.0);
        let c = 2.0 * self.alpha * q.powf(self.alpha - 1.0);
        self.h.mul_vec(x).into_iter().map(|v| c * v).collect()
    }

    fn hessian(&self, x: &[f64]) -> Option<SymMatrix> {
        let a = self.alpha;
        let q = self.h.quad_form(x).max(0.0);
        if q == 0.0 {
            let c = if a == 1.0 { 2.0 } else { 0.0 };
            return Some(self.h.scaled(c));
        }
        let hx = self.h.mul_vec(x);
        let c1 = 2.0 * a * q.powf(a - 1.0);
        let c2 = 4.0 * a * (a - 1.0) * q.powf(a - 2.0);
        Some(SymMatrix::from_fn(self.h.dim(), |i, j| {
            c1 * self.h.get(i, j) + c2 * hx[i] * hx[j]
        }))
    }

    fn optimal_value(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// `Σⱼ (e^{s·xⱼ} − s·xⱼ)` for a sign `s = ±1`.
#[derive(Debug, Clone)]
pub struct ExpCurvature {
    pub n: usize,
    pub sign: f64,
}

impl Objective for ExpCurvature {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| (self.sign * v).exp() - self.sign * v).sum()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|v| self.sign * ((self.sign * v).exp() - 1.0)).collect()
    }

    fn hessian(&self, x: &[f64]) -> Option<SymMatrix> {
        Some(SymMatrix::from_diag(&self.diag_hessian(x)?))
    }

    fn diag_hessian(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(x.iter().map(|v| (self.sign * v).exp()).collect())
    }

    fn optimal_value(&self) -> Option<f64> {
        Some(self.n as f64)
    }
}

/// `x ↦ f(x − s)`
pub struct Shifted {
    pub inner: Arc<dyn Objective>,
    pub shift: Vec<f64>,
}

impl Shifted {
    fn moved(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.shift).map(|(a, s)| a - s).collect()
    }
}

impl Objective for Shifted {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.inner.value(&self.moved(x))
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.inner.gradient(&self.moved(x))
    }

    fn hessian(&self, x: &[f64]) -> Option<SymMatrix> {
        self.inner.hessian(&self.moved(x))
    }

    fn diag_hessian(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.inner.diag_hessian(&self.moved(x))
    }

    fn optimal_value(&self) -> Option<f64> {
        self.inner.optimal_value()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MlpVariant {
    /// `αᵢ = 1`, `Hᵢ = diag(1, 0.01ⁱ, …, 0.01ⁱ)` for `i = 0, 1, 2`.
    Selection,
    /// `Hᵢ = I`, `αᵢ ∈ {1, 1.5, 2}`.
    LocalCurvature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    /// `ln(1 + eᶻ)`, for smoothness-dependent checks.
    Softplus,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Softplus => z.max(0.0) + (-z.abs()).exp().ln_1p(),
        }
    }

    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Softplus => 1.0 / (1.0 + (-z).exp()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MlpSpec {
    pub variant: MlpVariant,
    pub input_dim: usize,
    pub hidden: usize,
    pub output_dim: usize,
    pub dataset_size: usize,
    pub seed: u64,
    pub activation: Activation,
    /// Constant added to the teacher outputs to form the targets.
    pub target_offset: f64,
}

impl Default for MlpSpec {
    fn default() -> Self {
        MlpSpec {
            variant: MlpVariant::Selection,
            input_dim: 20,
            hidden: 32,
            output_dim: 7,
            dataset_size: 50,
            seed: 0,
            activation: Activation::Relu,
            target_offset: 10.0,
        }
    }
}

impl MlpSpec {
    pub fn desk(variant: MlpVariant, seed: u64) -> Self {
        MlpSpec {
            variant,
            seed,
            ..Default::default()
        }
    }

    /// 512 hidden units and 200 points.
    pub fn paper_scale(variant: MlpVariant, seed: u64) -> Self {
        MlpSpec {
            variant,
            seed,
            hidden: 512,
            dataset_size: 200,
            ..Default::default()
        }
    }

    pub fn num_params(&self) -> usize {
        self.hidden * self.input_dim + self.hidden + self.output_dim * self.hidden + self.output_dim
    }
}

/// Problem description, as accepted by [`build`] and the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    Specification {
        delta: f64,
    },
    Selection {
        delta: f64,
        m: usize,
        n: usize,
    },
    LocalCurvature {
        n: usize,
    },
    /// `fᵢ(x) = (xᵀHᵢx)^{αᵢ}`; matrices given as rows.
    QuadFamily {
        hessians: Vec<Vec<Vec<f64>>>,
        alphas: Vec<f64>,
    },
    MlpMatching(MlpSpec),
    /// Objective `i` becomes `fᵢ(x − sᵢ)`.
    Misaligned {
        base: Box<ProblemSpec>,
        shifts: Vec<Vec<f64>>,
    },
}

/// Analytic constants of a problem. `None` means unknown or unbounded.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProblemMeta {
    /// Smoothness: bound on Hessian eigenvalues.
    pub beta: Option<f64>,
    pub mu_g: Option<f64>,
    pub mu_l: Option<f64>,
    /// Self-concordance constant; 0 for quadratics. For the exponential
    /// family this holds on the box `|xⱼ| ≤ 2`.
    pub m_f: f64,
    pub alignment_eps: f64,
}

/// Data-fit metrics of the network-matching problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitMetrics {
    /// `(1/|D|) Σ ‖h_θ(x) − t(x)‖²`
    pub msq: f64,
    /// `(1/|D|) Σ ‖h_θ(x) − t(x)‖`
    pub mean_norm: f64,
}

/// A built problem: oracles, known optimum, constants and a start point.
#[derive(Clone)]
pub struct Problem {
    pub name: String,
    pub objectives: ObjectiveSet,
    pub optimum: OptimalInfo,
    pub meta: ProblemMeta,
    pub x0: Vec<f64>,
    mlp: Option<Arc<MlpCore>>,
    quadratics: Option<Vec<Quadratic>>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("m", &self.objectives.len())
            .field("n", &self.objectives.dim())
            .field("meta", &self.meta)
            .finish()
    }
}

impl Problem {
    pub fn m(&self) -> usize {
        self.objectives.len()
    }

    pub fn dim(&self) -> usize {
        self.objectives.dim()
    }

    /// Network-matching metrics; `None` for analytic problems.
    pub fn fit_metrics(&self, x: &[f64]) -> Option<FitMetrics> {
        self.mlp.as_ref().map(|core| core.metrics(x))
    }

    /// The network-matching model, when this is one.
    pub fn mlp(&self) -> Option<&MlpCore> {
        self.mlp.as_deref()
    }

    pub fn into_parts(self) -> (ObjectiveSet, OptimalInfo, ProblemMeta) {
        (self.objectives, self.optimum, self.meta)
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&delta) {
        return Err(Error::arg(format!("Δ = {delta} outside [0, 0.5]")));
    }
    Ok(())
}

fn quadratic_problem(
    name: String,
    quads: Vec<Quadratic>,
    x0: Vec<f64>,
    meta: ProblemMeta,
) -> Result<Problem> {
    let n = x0.len();
    let objectives = ObjectiveSet::new(
        quads
            .iter()
            .cloned()
            .map(|q| Arc::new(q) as Arc<dyn Objective>)
            .collect(),
    )?;
    let m = quads.len();
    Ok(Problem {
        name,
        objectives,
        optimum: OptimalInfo {
            x_star: Some(vec![0.0; n]),
            f_star: Some(vec![0.0; m]),
            alignment_eps: 0.0,
        },
        meta,
        x0,
        mlp: None,
        quadratics: Some(quads),
    })
}

fn specification(delta: f64) -> Result<Problem> {
    check_delta(delta)?;
    let quads = vec![
        Quadratic::centered(SymMatrix::from_diag(&[2.0 * (1.0 - delta), 2.0 * delta])),
        Quadratic::centered(SymMatrix::from_diag(&[2.0 * delta, 2.0 * (1.0 - delta)])),
    ];
    let meta = ProblemMeta {
        beta: Some(2.0 * (1.0 - delta)),
        mu_g: Some(1.0),
        mu_l: Some(1.0),
        m_f: 0.0,
        alignment_eps: 0.0,
    };
    quadratic_problem(format!("specification(Δ={delta})"), quads, vec![1.0, 1.0], meta)
}

fn selection(delta: f64, m: usize, n: usize) -> Result<Problem> {
    check_delta(delta)?;
    if m == 0 || n == 0 {
        return Err(Error::arg("selection needs m ≥ 1 and n ≥ 1"));
    }
    let mut d = vec![2.0 * delta; n];
    d[0] = 2.0 * (1.0 - delta);
    let mut quads = vec![Quadratic::centered(SymMatrix::from_diag(&d)); m - 1];
    quads.push(Quadratic::centered(SymMatrix::from_diag(&vec![2.0; n])));
    let meta = ProblemMeta {
        beta: Some(2.0),
        mu_g: Some(2.0),
        mu_l: Some(2.0),
        m_f: 0.0,
        alignment_eps: 0.0,
    };
    quadratic_problem(format!("selection(Δ={delta}, m={m}, n={n})"), quads, vec![1.0; n], meta)
}

fn local_curvature(n: usize) -> Result<Problem> {
    if n == 0 {
        return Err(Error::arg("local_curvature needs n ≥ 1"));
    }
    let objectives = ObjectiveSet::new(vec![
        Arc::new(ExpCurvature { n, sign: 1.0 }),
        Arc::new(ExpCurvature { n, sign: -1.0 }),
    ])?;
    Ok(Problem {
        name: format!("local_curvature(n={n})"),
        objectives,
        optimum: OptimalInfo {
            x_star: Some(vec![0.0; n]),
            f_star: Some(vec![n as f64; 2]),
            alignment_eps: 0.0,
        },
        meta: ProblemMeta {
            beta: None,
            mu_g: Some(1.0),
            mu_l: Some(1.0),
            // |f'''| ≤ 2M f''^{3/2} with f'' = e^x holds for M = e^{−x/2}/2.
            m_f: std::f64::consts::E / 2.0,
            alignment_eps: 0.0,
        },
        x0: vec![2.0; n],
        mlp: None,
        quadratics: None,
    })
}

fn quad_family(hessians: &[Vec<Vec<f64>>], alphas: &[f64]) -> Result<Problem> {
    if hessians.is_empty() {
        return Err(Error::arg("quad_family needs at least one matrix"));
    }
    check_dim("quad_family alphas", hessians.len(), alphas.len())?;
    let n = hessians[0].len();
    if n == 0 {
        return Err(Error::arg("quad_family matrices must be nonempty"));
    }
    let mut hs = Vec::with_capacity(hessians.len());
    for rows in hessians {
        check_dim("quad_family matrix rows", n, rows.len())?;
        for r in rows {
            check_dim("quad_family matrix columns", n, r.len())?;
        }
        let h = SymMatrix::new(n, rows.concat())?;
        if linalg::min_eigenvalue(&h)? < -1e-12 * (1.0 + h.max_abs()) {
            return Err(Error::arg("quad_family matrices must be positive semidefinite"));
        }
        hs.push(h);
    }
    if let Some(a) = alphas.iter().find(|a| !(**a >= 1.0) || !a.is_finite()) {
        return Err(Error::arg(format!("exponent α = {a} must be ≥ 1")));
    }
    let m = hs.len();
    let name = format!("quad_family(m={m}, n={n})");
    if alphas.iter().all(|a| *a == 1.0) {
        // (xᵀHx) = ½xᵀ(2H)x
        let quads: Vec<Quadratic> = hs.iter().map(|h| Quadratic::centered(h.scaled(2.0))).collect();
        let doubled: Vec<SymMatrix> = quads.iter().map(|q| q.h.clone()).collect();
        let beta = doubled
            .iter()
            .map(linalg::spectral_norm)
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let mu = camoo_weights_exact(&doubled, &CamooConfig::default(), None)?.lambda_min;
        let meta = ProblemMeta {
            beta: Some(beta),
            mu_g: Some(mu),
            mu_l: Some(mu),
            m_f: 0.0,
            alignment_eps: 0.0,
        };
        return quadratic_problem(name, quads, vec![1.0; n], meta);
    }
    let objectives = ObjectiveSet::new(
        hs.into_iter()
            .zip(alphas)
            .map(|(h, &alpha)| Arc::new(PowerQuadratic { h, alpha }) as Arc<dyn Objective>)
            .collect(),
    )?;
    Ok(Problem {
        name,
        objectives,
        optimum: OptimalInfo {
            x_star: Some(vec![0.0; n]),
            f_star: Some(vec![0.0; m]),
            alignment_eps: 0.0,
        },
        meta: ProblemMeta::default(),
        x0: vec![1.0; n],
        mlp: None,
        quadratics: None,
    })
}

/// Two-layer network matching: student `h_θ(x) = W₂ σ(W₁x + b₁) + b₂`
/// against targets `t(x) = h_{θ⋆}(x) + offset` on a fixed dataset, with
/// losses `fᵢ(θ) = (1/|D|) Σ ((h_θ(x) − t(x))ᵀ Hᵢ (h_θ(x) − t(x)))^{αᵢ}`.
///
/// Parameters are packed as `[W₁ (row-major), b₁, W₂ (row-major), b₂]`.
#[derive(Debug, Clone)]
pub struct MlpCore {
    spec: MlpSpec,
    data: Vec<f64>,
    targets: Vec<f64>,
    teacher: Vec<f64>,
    h_diag: Vec<Vec<f64>>,
    alphas: Vec<f64>,
}

struct Forward {
    z: Vec<f64>,
    a: Vec<f64>,
    r: Vec<f64>,
}

impl MlpCore {
    pub fn new(spec: MlpSpec) -> Result<Self> {
        if spec.input_dim == 0 || spec.hidden == 0 || spec.output_dim == 0 || spec.dataset_size == 0 {
            return Err(Error::arg("network sizes and dataset size must be ≥ 1"));
        }
        if !spec.target_offset.is_finite() {
            return Err(Error::arg("target offset must be finite"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(1);
        let mut teacher = init_params(&spec, &mut rng);
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(3);
        let data: Vec<f64> = (0..spec.dataset_size * spec.input_dim)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        // The offset is folded into the teacher's output bias, so the
        // effective teacher reproduces the targets exactly.
        let b2 = teacher.len() - spec.output_dim;
        teacher[b2..].iter_mut().for_each(|b| *b += spec.target_offset);

        let d = spec.output_dim;
        let (h_diag, alphas) = match spec.variant {
            MlpVariant::Selection => {
                let h = (0..3)
                    .map(|i| {
                        let mut v = vec![0.01f64.powi(i); d];
                        v[0] = 1.0;
                        v
                    })
                    .collect();
                (h, vec![1.0; 3])
            }
            MlpVariant::LocalCurvature => (vec![vec![1.0; d]; 3], vec![1.0, 1.5, 2.0]),
        };
        let mut core = MlpCore {
            spec,
            data,
            targets: Vec::new(),
            teacher,
            h_diag,
            alphas,
        };
        let mut targets = Vec::with_capacity(core.spec.dataset_size * d);
        for p in 0..core.spec.dataset_size {
            targets.extend(core.predict(&core.teacher, p));
        }
        core.targets = targets;
        Ok(core)
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn num_params(&self) -> usize {
        self.spec.num_params()
    }

    /// Effective teacher parameters (offset included).
    pub fn teacher(&self) -> &[f64] {
        &self.teacher
    }

    /// Student initialization for `seed`, drawn like the teacher's but from
    /// an independent stream.
    pub fn student_init(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(2);
        init_params(&self.spec, &mut rng)
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let s = &self.spec;
        let b1 = s.hidden * s.input_dim;
        let w2 = b1 + s.hidden;
        let b2 = w2 + s.output_dim * s.hidden;
        (b1, w2, b2)
    }

    fn input(&self, p: usize) -> &[f64] {
        let k = self.spec.input_dim;
        &self.data[p * k..(p + 1) * k]
    }

    fn forward(&self, theta: &[f64], p: usize, with_targets: bool) -> Forward {
        let s = &self.spec;
        let (b1, w2, b2) = self.offsets();
        let x = self.input(p);
        let mut z = theta[b1..w2].to_vec();
        for (j, zj) in z.iter_mut().enumerate() {
            let row = &theta[j * s.input_dim..(j + 1) * s.input_dim];
            *zj += linalg::dot(row, x);
        }
        let a: Vec<f64> = z.iter().map(|&v| s.activation.apply(v)).collect();
        let t = with_targets.then(|| &self.targets[p * s.output_dim..(p + 1) * s.output_dim]);
        let r = (0..s.output_dim)
            .map(|k| {
                let row = &theta[w2 + k * s.hidden..w2 + (k + 1) * s.hidden];
                let y = theta[b2 + k] + linalg::dot(row, &a);
                y - t.map_or(0.0, |t| t[k])
            })
            .collect();
        Forward { z, a, r }
    }

    /// Network output at data point `p`.
    pub fn predict(&self, theta: &[f64], p: usize) -> Vec<f64> {
        self.forward(theta, p, false).r
    }

    /// Values, and gradients for the objectives listed in `which`.
    fn evaluate(&self, theta: &[f64], which: &[usize]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let s = &self.spec;
        let (b1, w2, b2) = self.offsets();
        let inv_n = 1.0 / s.dataset_size as f64;
        let m = self.h_diag.len();
        let mut values = vec![0.0; m];
        let mut grads = vec![vec![0.0; theta.len()]; which.len()];
        let mut dr = vec![0.0; s.output_dim];
        let mut dz = vec![0.0; s.hidden];
        for p in 0..s.dataset_size {
            let fw = self.forward(theta, p, true);
            let x = self.input(p);
            for ((v, h), alpha) in values.iter_mut().zip(&self.h_diag).zip(&self.alphas) {
                let q: f64 = h.iter().zip(&fw.r).map(|(h, r)| h * r * r).sum();
                *v += q.powf(*alpha) * inv_n;
            }
            for (g, &i) in grads.iter_mut().zip(which) {
                let h = &self.h_diag[i];
                let alpha = self.alphas[i];
                let q: f64 = h.iter().zip(&fw.r).map(|(h, r)| h * r * r).sum();
                let c = 2.0 * alpha * q.powf(alpha - 1.0) * inv_n;
                for k in 0..s.output_dim {
                    dr[k] = c * h[k] * fw.r[k];
                }
                dz.iter_mut().for_each(|v| *v = 0.0);
                for k in 0..s.output_dim {
                    let d = dr[k];
                    g[b2 + k] += d;
                    let off = w2 + k * s.hidden;
                    let gw = &mut g[off..off + s.hidden];
                    for (gj, aj) in gw.iter_mut().zip(&fw.a) {
                        *gj += d * aj;
                    }
                    let wrow = &theta[off..off + s.hidden];
                    for (dzj, wj) in dz.iter_mut().zip(wrow) {
                        *dzj += d * wj;
                    }
                }
                for j in 0..s.hidden {
                    let dj = dz[j] * s.activation.derivative(fw.z[j]);
                    if dj == 0.0 {
                        continue;
                    }
                    g[b1 + j] += dj;
                    let gw = &mut g[j * s.input_dim..(j + 1) * s.input_dim];
                    for (gl, xl) in gw.iter_mut().zip(x) {
                        *gl += dj * xl;
                    }
                }
            }
        }
        (values, grads)
    }

    pub fn metrics(&self, theta: &[f64]) -> FitMetrics {
        let inv_n = 1.0 / self.spec.dataset_size as f64;
        let (mut msq, mut mean_norm) = (0.0, 0.0);
        for p in 0..self.spec.dataset_size {
            let r = self.forward(theta, p, true).r;
            let sq = linalg::dot(&r, &r);
            msq += sq * inv_n;
            mean_norm += sq.sqrt() * inv_n;
        }
        FitMetrics { msq, mean_norm }
    }
}

fn init_params(spec: &MlpSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut theta = Vec::with_capacity(spec.num_params());
    let mut layer = |rows: usize, fan_in: usize, theta: &mut Vec<f64>| {
        let bound = 1.0 / (fan_in as f64).sqrt();
        for _ in 0..rows * fan_in + rows {
            theta.push(rng.random_range(-bound..bound));
        }
    };
    layer(spec.hidden, spec.input_dim, &mut theta);
    layer(spec.output_dim, spec.hidden, &mut theta);
    theta
}

impl JointOracle for MlpCore {
    fn values_and_gradients(&self, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let all: Vec<usize> = (0..self.h_diag.len()).collect();
        self.evaluate(x, &all)
    }
}

struct MlpObjective {
    core: Arc<MlpCore>,
    index: usize,
}

impl Objective for MlpObjective {
    fn dim(&self) -> usize {
        self.core.num_params()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.core.evaluate(x, &[]).0[self.index]
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.core.evaluate(x, &[self.index]).1.remove(0)
    }

    fn optimal_value(&self) -> Option<f64> {
        Some(0.0)
    }
}

fn mlp_matching(spec: &MlpSpec) -> Result<Problem> {
    let core = Arc::new(MlpCore::new(spec.clone())?);
    let m = core.h_diag.len();
    let objectives = ObjectiveSet::new(
        (0..m)
            .map(|index| {
                Arc::new(MlpObjective {
                    core: core.clone(),
                    index,
                }) as Arc<dyn Objective>
            })
            .collect(),
    )?
    .with_joint(core.clone());
    let variant = match spec.variant {
        MlpVariant::Selection => "selection",
        MlpVariant::LocalCurvature => "local_curvature",
    };
    Ok(Problem {
        name: format!("mlp_matching({variant}, hidden={}, |D|={})", spec.hidden, spec.dataset_size),
        objectives,
        optimum: OptimalInfo {
            x_star: Some(core.teacher.clone()),
            f_star: Some(vec![0.0; m]),
            alignment_eps: 0.0,
        },
        meta: ProblemMeta::default(),
        x0: core.student_init(spec.seed),
        mlp: Some(core),
        quadratics: None,
    })
}

/// Builds a problem from its description.
pub fn build(spec: &ProblemSpec) -> Result<Problem> {
    match spec {
        ProblemSpec::Specification { delta } => specification(*delta),
        ProblemSpec::Selection { delta, m, n } => selection(*delta, *m, *n),
        ProblemSpec::LocalCurvature { n } => local_curvature(*n),
        ProblemSpec::QuadFamily { hessians, alphas } => quad_family(hessians, alphas),
        ProblemSpec::MlpMatching(s) => mlp_matching(s),
        ProblemSpec::Misaligned { base, shifts } => misalign(&build(base)?, shifts),
    }
}

/// Result of the minimax computation behind [`misalign`].
#[derive(Debug, Clone, PartialEq)]
pub struct Minimax {
    /// Point minimizing `maxᵢ (fᵢ(x) − fᵢ⋆)`.
    pub x_ref: Vec<f64>,
    /// `maxᵢ (fᵢ(x_ref) − fᵢ⋆)`
    pub eps: f64,
    /// Dual weights.
    pub lambda: Vec<f64>,
}

/// `min_x maxᵢ ½(x − cᵢ)ᵀHᵢ(x − cᵢ)` through its concave dual
/// `max_{λ∈Δ} min_x Σ λᵢ fᵢ(x)`, whose inner minimizer solves a linear
/// system and whose gradient is `(fᵢ(x(λ)))ᵢ`.
pub fn quadratic_minimax(quads: &[Quadratic]) -> Result<Minimax> {
    let m = quads.len();
    if m == 0 {
        return Err(Error::arg("minimax needs at least one objective"));
    }
    let n = quads[0].h.dim();
    let inner = |lambda: &[f64]| -> Result<Vec<f64>> {
        let mut a = vec![0.0; n * n];
        let mut b = vec![0.0; n];
        for (q, &l) in quads.iter().zip(lambda) {
            for (ai, hi) in a.iter_mut().zip(q.h.as_slice()) {
                *ai += l * hi;
            }
            linalg::axpy(l, &q.h.mul_vec(&q.center), &mut b);
        }
        // A tiny ridge keeps one-hot λ on a singular Hᵢ solvable.
        let ridge = 1e-12 * (1.0 + a.iter().fold(0.0f64, |s, v| s.max(v.abs())));
        for i in 0..n {
            a[i * n + i] += ridge;
        }
        linalg::solve(&a, &b)
    };
    let gaps = |x: &[f64]| -> Vec<f64> { quads.iter().map(|q| q.value(x)).collect() };
    let primal = |x: &[f64]| gaps(x).into_iter().fold(f64::NEG_INFINITY, f64::max);

    let dual = |lambda: &[f64]| -> Result<(f64, Vec<f64>, Vec<f64>)> {
        let x = inner(lambda)?;
        let g = gaps(&x);
        Ok((linalg::dot(lambda, &g), x, g))
    };

    let mut best_x = inner(&vec![1.0 / m as f64; m])?;
    let mut best = primal(&best_x);
    let mut keep = |x: Vec<f64>, g: &[f64]| {
        let p = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if p < best {
            best = p;
            best_x = x;
        }
    };
    let lambda = if m == 2 {
        // Golden-section search on the concave one-dimensional dual.
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let a = hi - phi * (hi - lo);
            let b = lo + phi * (hi - lo);
            let (da, xa, ga) = dual(&[a, 1.0 - a])?;
            let (db, xb, gb) = dual(&[b, 1.0 - b])?;
            keep(xa, &ga);
            keep(xb, &gb);
            if da < db {
                lo = a;
            } else {
                hi = b;
            }
        }
        let t = 0.5 * (lo + hi);
        let (_, x, g) = dual(&[t, 1.0 - t])?;
        keep(x, &g);
        vec![t, 1.0 - t]
    } else {
        // Projected gradient ascent with backtracking; the dual gradient is
        // the vector of objective gaps at x(λ).
        let mut lambda = vec![1.0 / m as f64; m];
        let (mut d, x, mut g) = dual(&lambda)?;
        keep(x, &g);
        let mut step = 1.0;
        for _ in 0..5_000 {
            loop {
                let moved: Vec<f64> = lambda.iter().zip(&g).map(|(l, gi)| l + step * gi).collect();
                let cand = project_floored_simplex(&moved, 0.0);
                let (dc, xc, gc) = dual(&cand)?;
                if dc >= d - 1e-15 * d.abs() {
                    keep(xc, &gc);
                    lambda = cand;
                    d = dc;
                    g = gc;
                    step *= 1.5;
                    break;
                }
                step *= 0.5;
                if step < 1e-300 {
                    break;
                }
            }
            if step < 1e-300 {
                break;
            }
        }
        lambda
    };
    Ok(Minimax {
        x_ref: best_x,
        eps: best,
        lambda,
    })
}

/// Shifts objective `i` by `sᵢ`: it becomes `fᵢ(x − sᵢ)`.
///
/// The optimum information then describes the reference point `x_ref`
/// minimizing the largest optimality gap, with `alignment_eps` that gap. The
/// set of `ε`-approximate solutions contains `x_ref` by construction.
/// Supported for quadratic bases only.
pub fn misalign(base: &Problem, shifts: &[Vec<f64>]) -> Result<Problem> {
    let quads = base
        .quadratics
        .as_ref()
        .ok_or_else(|| Error::Unsupported(format!("misalign needs a quadratic base, got {}", base.name)))?;
    check_dim("misalign shifts", quads.len(), shifts.len())?;
    let n = base.dim();
    let mut shifted = Vec::with_capacity(quads.len());
    for (q, s) in quads.iter().zip(shifts) {
        check_dim("misalign shift", n, s.len())?;
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("shifts must be finite"));
        }
        let center = q.center.iter().zip(s).map(|(c, s)| c + s).collect();
        shifted.push(Quadratic::new(q.h.clone(), center)?);
    }
    let mm = quadratic_minimax(&shifted)?;
    let eps = mm.eps.max(0.0);
    let mut meta = base.meta.clone();
    meta.alignment_eps = eps;
    let mut p = quadratic_problem(format!("misaligned({})", base.name), shifted, base.x0.clone(), meta)?;
    p.optimum = OptimalInfo {
        x_star: Some(mm.x_ref),
        f_star: Some(vec![0.0; quads.len()]),
        alignment_eps: eps,
    };
    Ok(p)
}

/// Shifts that put the specification example at alignment level `eps`:
/// only the second objective moves, along the first axis.
pub fn specification_shifts_for_eps(delta: f64, eps: f64) -> Result<Vec<Vec<f64>>> {
    if !(eps >= 0.0) {
        return Err(Error::arg("ε must be nonnegative"));
    }
    // The gap is 2-homogeneous in the shift size, so one solve calibrates it.
    let unit = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
    let unit_eps = misalign(&specification(delta)?, &unit)?.optimum.alignment_eps;
    if !(unit_eps > 0.0) {
        return Err(Error::arg(format!("Δ = {delta} cannot be misaligned along x₁")));
    }
    let d = (eps / unit_eps).sqrt();
    Ok(vec![vec![0.0, 0.0], vec![d, 0.0]])
}

/// Names and one-line descriptions of the available problem kinds.
pub fn list_problems() -> Vec<(&'static str, &'static str)> {
    vec![
        ("specification", "two quadratics in R², each well conditioned along a different axis; params: delta"),
        ("selection", "m−1 ill-conditioned quadratics plus one isotropic one; params: delta, m, n"),
        ("local_curvature", "exp(x)−x against exp(−x)+x, curvature swaps with the sign of x; params: n"),
        ("quad_family", "(xᵀHᵢx)^αᵢ for given matrices and exponents; params: hessians, alphas"),
        ("mlp_matching", "two-layer student network matching a teacher under several losses; params: variant, sizes, seed"),
        ("misaligned", "a quadratic base problem with objective i shifted by sᵢ; params: base, shifts"),
    ]
}

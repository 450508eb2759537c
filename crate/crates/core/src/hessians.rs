//! Second-order information from first-order oracles.
//!
//! Hessian-vector products come from central differences of the analytic
//! gradient. The Hutchinson estimator averages `z ⊙ (H z)` over Rademacher
//! probes `z`, which is unbiased for `diag(H)` and exact after a single probe
//! when `H` is diagonal (every `zᵢ² = 1`).
//!
//! Probe `k` is drawn from its own ChaCha stream keyed by `(seed, k)`, so an
//! estimate depends only on the seed and the sample count, never on the
//! evaluation order.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, Matrix};
use crate::objective::{Objective, ObjectiveSet};

/// Probe configuration for [`hutchinson_diag`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HutchinsonConfig {
    pub num_samples: usize,
    /// Relative finite-difference step; the absolute step is
    /// `fd_step · (1 + ‖x‖)`.
    pub fd_step: f64,
    pub rng_seed: u64,
    /// Exponential-moving-average coefficient applied across driver steps.
    /// `None` averages fresh samples only.
    pub ema: Option<f64>,
}

impl Default for HutchinsonConfig {
    fn default() -> Self {
        HutchinsonConfig {
            num_samples: 10,
            fd_step: 1e-4,
            rng_seed: 0,
            ema: None,
        }
    }
}

impl HutchinsonConfig {
    fn validate(&self) -> Result<()> {
        if self.num_samples == 0 {
            return Err(Error::arg("Hutchinson needs at least one sample"));
        }
        if !(self.fd_step > 0.0) {
            return Err(Error::arg("finite-difference step must be positive"));
        }
        if let Some(decay) = self.ema {
            if !(0.0..1.0).contains(&decay) {
                return Err(Error::arg(format!("EMA coefficient {decay} outside [0, 1)")));
            }
        }
        Ok(())
    }

    /// Same configuration with the seed mixed with `key`; used to give every
    /// driver step an independent probe set.
    pub fn keyed(&self, key: u64) -> Self {
        HutchinsonConfig {
            rng_seed: splitmix64(self.rng_seed ^ splitmix64(key)),
            ..*self
        }
    }
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Estimated Hessian diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagHessianEstimate {
    pub values: Vec<f64>,
    pub samples_used: usize,
}

/// Rademacher probe number `k` for the given seed.
pub fn rademacher_probe(seed: u64, k: usize, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    (0..n)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect()
}

fn fd_step_size(x: &[f64], step: f64) -> f64 {
    step * (1.0 + linalg::norm(x))
}

/// `H(x) v` from central differences of the gradient along `v / ‖v‖`.
pub fn hvp_fd(oracle: &dyn Objective, x: &[f64], v: &[f64], step: f64) -> Result<Vec<f64>> {
    check_dim("hvp_fd (point)", oracle.dim(), x.len())?;
    check_dim("hvp_fd (direction)", x.len(), v.len())?;
    if !(step > 0.0) {
        return Err(Error::arg("finite-difference step must be positive"));
    }
    let vn = linalg::norm(v);
    if !(vn > 0.0) {
        return Err(Error::arg("direction must be non-zero"));
    }
    let h = fd_step_size(x, step);
    let shifted = |sign: f64| -> Vec<f64> {
        x.iter().zip(v).map(|(xi, vi)| xi + sign * h * vi / vn).collect()
    };
    let gp = oracle.gradient(&shifted(1.0));
    let gm = oracle.gradient(&shifted(-1.0));
    Ok(gp
        .iter()
        .zip(&gm)
        .map(|(a, b)| (a - b) / (2.0 * h) * vn)
        .collect())
}

fn hvp(oracle: &dyn Objective, x: &[f64], v: &[f64], step: f64) -> Result<Vec<f64>> {
    match oracle.hessian(x) {
        Some(h) => Ok(h.mul_vec(v)),
        None => hvp_fd(oracle, x, v, step),
    }
}

/// Hutchinson estimate `(1/N) Σₖ zₖ ⊙ (H zₖ)`.
///
/// Uses the analytic Hessian for the products when the oracle has one, and
/// finite differences of the gradient otherwise.
pub fn hutchinson_diag(
    oracle: &dyn Objective,
    x: &[f64],
    cfg: &HutchinsonConfig,
) -> Result<DiagHessianEstimate> {
    cfg.validate()?;
    let n = oracle.dim();
    check_dim("hutchinson_diag", n, x.len())?;
    let mut acc = vec![0.0; n];
    for k in 0..cfg.num_samples {
        let z = rademacher_probe(cfg.rng_seed, k, n);
        let hz = hvp(oracle, x, &z, cfg.fd_step)?;
        for ((a, zi), hi) in acc.iter_mut().zip(&z).zip(&hz) {
            *a += zi * hi;
        }
    }
    let scale = 1.0 / cfg.num_samples as f64;
    let values: Vec<f64> = acc.into_iter().map(|a| a * scale).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric("Hutchinson estimate is not finite"));
    }
    Ok(DiagHessianEstimate {
        values,
        samples_used: cfg.num_samples,
    })
}

/// Stacks per-objective Hessian diagonals into an `m x n` matrix.
///
/// Rows come from the analytic diagonal when every objective provides one.
/// Otherwise all rows are Hutchinson estimates; when the set has a joint
/// oracle the probes are shared across objectives, which yields the same
/// rows as per-objective [`hutchinson_diag`] calls with the same config.
pub fn diag_hessian_matrix(set: &ObjectiveSet, x: &[f64], cfg: &HutchinsonConfig) -> Result<Matrix> {
    check_dim("diag_hessian_matrix", set.dim(), x.len())?;
    let m = set.len();
    let n = set.dim();
    let analytic: Option<Vec<Vec<f64>>> = set.iter().map(|o| o.diag_hessian(x)).collect();
    if let Some(rows) = analytic {
        return Matrix::from_rows(&rows);
    }
    cfg.validate()?;
    let Some(joint) = set.joint() else {
        let rows = set
            .iter()
            .map(|o| hutchinson_diag(o.as_ref(), x, cfg).map(|e| e.values))
            .collect::<Result<Vec<_>>>()?;
        return Matrix::from_rows(&rows);
    };

    let h = fd_step_size(x, cfg.fd_step);
    let mut out = Matrix::zeros(m, n);
    let mut xp = vec![0.0; n];
    let mut xm = vec![0.0; n];
    for k in 0..cfg.num_samples {
        let z = rademacher_probe(cfg.rng_seed, k, n);
        let zn = (n as f64).sqrt();
        for j in 0..n {
            xp[j] = x[j] + h * z[j] / zn;
            xm[j] = x[j] - h * z[j] / zn;
        }
        let (_, gp) = joint.values_and_gradients(&xp);
        let (_, gm) = joint.values_and_gradients(&xm);
        for i in 0..m {
            let row = out.row_mut(i);
            for j in 0..n {
                row[j] += z[j] * (gp[i][j] - gm[i][j]) / (2.0 * h) * zn;
            }
        }
    }
    let scale = 1.0 / cfg.num_samples as f64;
    for i in 0..m {
        out.row_mut(i).iter_mut().for_each(|v| *v *= scale);
    }
    if out.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric("Hutchinson estimate is not finite"));
    }
    Ok(out)
}

/// Exponential moving average of diagonal-Hessian matrices across steps.
#[derive(Debug, Clone)]
pub struct DiagEma {
    decay: f64,
    state: Option<Matrix>,
}

impl DiagEma {
    pub fn new(decay: f64) -> Self {
        DiagEma { decay, state: None }
    }

    /// Folds a fresh estimate in and returns the smoothed matrix. The first
    /// estimate is taken as-is.
    pub fn update(&mut self, fresh: Matrix) -> Matrix {
        let next = match self.state.take() {
            Some(prev) if prev.rows() == fresh.rows() && prev.cols() == fresh.cols() => {
                let data = prev
                    .as_slice()
                    .iter()
                    .zip(fresh.as_slice())
                    .map(|(p, f)| self.decay * p + (1.0 - self.decay) * f)
                    .collect();
                Matrix::new(fresh.rows(), fresh.cols(), data).expect("shape preserved")
            }
            _ => fresh,
        };
        self.state = Some(next.clone());
        next
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymMatrix;
    use crate::objective::GradientOnly;

    /// f(x) = ½ xᵀ H x
    struct HalfQuad(SymMatrix);

    impl Objective for HalfQuad {
        fn dim(&self) -> usize {
            self.0.dim()
        }
        fn value(&self, x: &[f64]) -> f64 {
            0.5 * self.0.quad_form(x)
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            self.0.mul_vec(x)
        }
        fn hessian(&self, _x: &[f64]) -> Option<SymMatrix> {
            Some(self.0.clone())
        }
    }

    struct Linear(Vec<f64>);

    impl Objective for Linear {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn value(&self, x: &[f64]) -> f64 {
            linalg::dot(&self.0, x)
        }
        fn gradient(&self, _x: &[f64]) -> Vec<f64> {
            self.0.clone()
        }
    }

    #[test]
    fn hvp_of_squared_norm() {
        let f = GradientOnly(HalfQuad(SymMatrix::identity(2).scaled(2.0)));
        let hv = hvp_fd(&f, &[1.0, 2.0], &[1.0, 0.0], 1e-4).unwrap();
        assert!((hv[0] - 2.0).abs() < 1e-6 && hv[1].abs() < 1e-6);
    }

    #[test]
    fn hvp_of_linear_is_zero() {
        let f = Linear(vec![3.0, -1.0, 2.0]);
        let hv = hvp_fd(&f, &[0.3, 0.1, -4.0], &[1.0, 2.0, 3.0], 1e-4).unwrap();
        assert!(hv.iter().all(|v| v.abs() < 1e-6));
    }

    #[test]
    fn hvp_rejects_zero_direction() {
        let f = Linear(vec![1.0]);
        assert!(matches!(hvp_fd(&f, &[0.0], &[0.0], 1e-4), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn single_probe_exact_on_diagonal() {
        let f = GradientOnly(HalfQuad(SymMatrix::from_diag(&[2.0, 0.4])));
        let cfg = HutchinsonConfig {
            num_samples: 1,
            ..Default::default()
        };
        let est = hutchinson_diag(&f, &[0.7, -1.3], &cfg).unwrap();
        assert!((est.values[0] - 2.0).abs() < 1e-6);
        assert!((est.values[1] - 0.4).abs() < 1e-6);
        assert_eq!(est.samples_used, 1);
    }

    #[test]
    fn linear_estimate_is_zero() {
        let est = hutchinson_diag(&Linear(vec![1.0, 2.0]), &[0.5, 0.5], &HutchinsonConfig::default()).unwrap();
        assert!(est.values.iter().all(|v| v.abs() < 1e-6));
    }

    #[test]
    fn deterministic_given_seed() {
        let h = SymMatrix::new(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let f = GradientOnly(HalfQuad(h));
        let cfg = HutchinsonConfig {
            rng_seed: 7,
            ..Default::default()
        };
        let a = hutchinson_diag(&f, &[0.1, 0.2], &cfg).unwrap();
        let b = hutchinson_diag(&f, &[0.1, 0.2], &cfg).unwrap();
        assert_eq!(a, b);
        let c = hutchinson_diag(&f, &[0.1, 0.2], &cfg.keyed(1)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_samples_rejected() {
        let cfg = HutchinsonConfig {
            num_samples: 0,
            ..Default::default()
        };
        assert!(hutchinson_diag(&Linear(vec![1.0]), &[0.0], &cfg).is_err());
    }

    #[test]
    fn ema_blends() {
        let mut ema = DiagEma::new(0.5);
        let a = ema.update(Matrix::from_rows(&[vec![2.0]]).unwrap());
        assert_eq!(a.get(0, 0), 2.0);
        let b = ema.update(Matrix::from_rows(&[vec![4.0]]).unwrap());
        assert_eq!(b.get(0, 0), 3.0);
    }
}

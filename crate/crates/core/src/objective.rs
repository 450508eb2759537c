//! Objective oracles, objective sets and weight vectors.
//!
//! An [`ObjectiveSet`] is the vector-valued function `F(x) = (f₁(x), …, f_m(x))`
//! over `ℝⁿ`. Gradient-descent drivers never touch `F` directly; they
//! scalarize it with a [`WeightVector`] into `f_w(x) = wᵀF(x)`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, SymMatrix};

/// Weight entries may drift this far from summing to one before being
/// renormalized.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

/// A smooth scalar objective with first-order (and optionally second-order)
/// access.
///
/// Implementations must be deterministic pure functions of `x`.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    /// Analytic Hessian, when available.
    fn hessian(&self, _x: &[f64]) -> Option<SymMatrix> {
        None
    }

    /// Analytic Hessian diagonal, when available.
    fn diag_hessian(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.hessian(x).map(|h| h.diagonal())
    }

    /// `f(x⋆)`, when known.
    fn optimal_value(&self) -> Option<f64> {
        None
    }
}

/// Hides second-order information of the wrapped objective, forcing callers
/// onto gradient-only code paths.
pub struct GradientOnly<O>(pub O);

impl<O: Objective> Objective for GradientOnly<O> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.0.value(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.0.gradient(x)
    }
    fn optimal_value(&self) -> Option<f64> {
        self.0.optimal_value()
    }
}

/// Evaluates every member of an objective set in one pass. Problems whose
/// objectives share expensive intermediate results (a network forward pass,
/// say) provide one of these; everything else falls back to per-objective
/// calls.
pub trait JointOracle: Send + Sync {
    fn values_and_gradients(&self, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>);
}

/// `m ≥ 1` objectives over a shared `ℝⁿ`.
#[derive(Clone)]
pub struct ObjectiveSet {
    dim: usize,
    objectives: Vec<Arc<dyn Objective>>,
    joint: Option<Arc<dyn JointOracle>>,
}

impl fmt::Debug for ObjectiveSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObjectiveSet")
            .field("dim", &self.dim)
            .field("len", &self.objectives.len())
            .field("joint", &self.joint.is_some())
            .finish()
    }
}

impl ObjectiveSet {
    pub fn new(objectives: Vec<Arc<dyn Objective>>) -> Result<Self> {
        let dim = objectives
            .first()
            .ok_or_else(|| Error::arg("an objective set needs at least one objective"))?
            .dim();
        if dim == 0 {
            return Err(Error::arg("objective dimension must be positive"));
        }
        for o in &objectives {
            check_dim("ObjectiveSet::new", dim, o.dim())?;
        }
        Ok(ObjectiveSet {
            dim,
            objectives,
            joint: None,
        })
    }

    pub fn with_joint(mut self, joint: Arc<dyn JointOracle>) -> Self {
        self.joint = Some(joint);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.objectives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objectives.is_empty()
    }

    pub fn objective(&self, i: usize) -> &Arc<dyn Objective> {
        &self.objectives[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<dyn Objective>> {
        self.objectives.iter()
    }

    pub fn joint(&self) -> Option<&Arc<dyn JointOracle>> {
        self.joint.as_ref()
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        check_dim("point", self.dim, x.len())
    }

    pub fn values(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        Ok(self.objectives.iter().map(|o| o.value(x)).collect())
    }

    /// Values and gradients of every objective (the columns of the Jacobian).
    pub fn values_and_gradients(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        self.check_point(x)?;
        Ok(match &self.joint {
            Some(j) => j.values_and_gradients(x),
            None => (
                self.objectives.iter().map(|o| o.value(x)).collect(),
                self.objectives.iter().map(|o| o.gradient(x)).collect(),
            ),
        })
    }

    pub fn gradients(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        Ok(self.values_and_gradients(x)?.1)
    }

    /// Analytic Hessians of every objective, if all of them provide one.
    pub fn hessians(&self, x: &[f64]) -> Result<Option<Vec<SymMatrix>>> {
        self.check_point(x)?;
        Ok(self.objectives.iter().map(|o| o.hessian(x)).collect())
    }

    /// `f(x⋆)` for every objective, if all are known.
    pub fn optimal_values(&self) -> Option<Vec<f64>> {
        self.objectives.iter().map(|o| o.optimal_value()).collect()
    }

    /// `f_w(x) = Σᵢ wᵢ fᵢ(x)`
    pub fn weighted_value(&self, w: &WeightVector, x: &[f64]) -> Result<f64> {
        check_dim("weights", self.len(), w.len())?;
        let values = self.values(x)?;
        Ok(linalg::dot(w.as_slice(), &values))
    }

    /// `∇f_w(x) = Σᵢ wᵢ ∇fᵢ(x)`
    pub fn weighted_gradient(&self, w: &WeightVector, x: &[f64]) -> Result<Vec<f64>> {
        check_dim("weights", self.len(), w.len())?;
        let grads = self.gradients(x)?;
        Ok(combine(w.as_slice(), &grads, self.dim))
    }
}

/// `Σᵢ wᵢ gᵢ`
pub fn combine(w: &[f64], grads: &[Vec<f64>], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for (wi, g) in w.iter().zip(grads) {
        linalg::axpy(*wi, g, &mut out);
    }
    out
}

/// The feasible set a weight vector lives in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum WeightConstraint {
    /// `w ≥ 0`
    Orthant,
    /// `w ≥ 0, Σw = 1`
    Simplex,
    /// `w ≥ w_min, Σw = 1`
    FlooredSimplex { w_min: f64 },
}

/// A validated weight vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    entries: Vec<f64>,
    constraint: WeightConstraint,
}

impl WeightVector {
    /// Validates `entries` against `constraint`. Simplex sums that drift by
    /// more than [`WEIGHT_SUM_TOL`] but less than `1e-6` are renormalized
    /// once; anything further off is rejected.
    pub fn new(mut entries: Vec<f64>, constraint: WeightConstraint) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::arg("weight vector must be non-empty"));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("weights must be finite"));
        }
        let floor = match constraint {
            WeightConstraint::Orthant | WeightConstraint::Simplex => 0.0,
            WeightConstraint::FlooredSimplex { w_min } => {
                check_floor(entries.len(), w_min)?;
                w_min
            }
        };
        if let Some(v) = entries.iter().find(|&&v| v < floor - 1e-12) {
            return Err(Error::arg(format!("weight {v} is below the floor {floor}")));
        }
        if constraint != WeightConstraint::Orthant {
            let sum: f64 = entries.iter().sum();
            if (sum - 1.0).abs() > 1e-6 {
                return Err(Error::arg(format!("simplex weights sum to {sum}, not 1")));
            }
            if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
                entries.iter_mut().for_each(|v| *v /= sum);
            }
        }
        Ok(WeightVector {
            entries,
            constraint,
        })
    }

    pub fn orthant(entries: Vec<f64>) -> Result<Self> {
        Self::new(entries, WeightConstraint::Orthant)
    }

    pub fn simplex(entries: Vec<f64>) -> Result<Self> {
        Self::new(entries, WeightConstraint::Simplex)
    }

    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::arg("number of objectives must be at least 1"));
        }
        Self::simplex(vec![1.0 / m as f64; m])
    }

    /// Euclidean projection of an arbitrary vector onto the (floored)
    /// simplex.
    pub fn project(v: &[f64], w_min: f64) -> Result<Self> {
        check_floor(v.len(), w_min)?;
        let entries = project_floored_simplex(v, w_min);
        let constraint = if w_min > 0.0 {
            WeightConstraint::FlooredSimplex { w_min }
        } else {
            WeightConstraint::Simplex
        };
        Self::new(entries, constraint)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.entries
    }

    pub fn constraint(&self) -> WeightConstraint {
        self.constraint
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().sum()
    }
}

fn check_floor(m: usize, w_min: f64) -> Result<()> {
    if !(w_min >= 0.0) || m as f64 * w_min > 1.0 + 1e-12 {
        return Err(Error::arg(format!(
            "floor w_min = {w_min} infeasible for {m} weights (need 0 ≤ m·w_min ≤ 1)"
        )));
    }
    Ok(())
}

/// Projection onto `{w : wᵢ ≥ w_min, Σw = 1}` via the sort-and-threshold
/// method on the shifted simplex of mass `1 − m·w_min`.
pub fn project_floored_simplex(v: &[f64], w_min: f64) -> Vec<f64> {
    let m = v.len();
    let mass = (1.0 - m as f64 * w_min).max(0.0);
    let shifted: Vec<f64> = v.iter().map(|x| x - w_min).collect();
    let mut sorted = shifted.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        cumsum += s;
        let t = (cumsum - mass) / (k + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    shifted.iter().map(|x| (x - theta).max(0.0) + w_min).collect()
}

/// Known optimum of a problem instance.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OptimalInfo {
    pub x_star: Option<Vec<f64>>,
    pub f_star: Option<Vec<f64>>,
    /// 0 for exactly aligned instances.
    pub alignment_eps: f64,
}

/// `‖x − x⋆‖₂`
pub fn residual(x: &[f64], opt: &OptimalInfo) -> Result<f64> {
    let star = opt
        .x_star
        .as_ref()
        .ok_or_else(|| Error::Unsupported("residual requires a known optimum x⋆".into()))?;
    check_dim("residual", star.len(), x.len())?;
    Ok(linalg::distance(x, star))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Quad(Vec<f64>);

    impl Objective for Quad {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn value(&self, x: &[f64]) -> f64 {
            self.0.iter().zip(x).map(|(a, x)| a * x * x).sum()
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            self.0.iter().zip(x).map(|(a, x)| 2.0 * a * x).collect()
        }
    }

    fn spec_set() -> ObjectiveSet {
        ObjectiveSet::new(vec![
            Arc::new(Quad(vec![0.9, 0.1])),
            Arc::new(Quad(vec![0.1, 0.9])),
        ])
        .unwrap()
    }

    #[test]
    fn weighted_value_and_gradient() {
        let set = spec_set();
        let w = WeightVector::uniform(2).unwrap();
        assert!((set.weighted_value(&w, &[1.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        let g = set.weighted_gradient(&w, &[1.0, 1.0]).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-15 && (g[1] - 1.0).abs() < 1e-15);
        let zero = WeightVector::orthant(vec![0.0, 0.0]).unwrap();
        assert_eq!(set.weighted_value(&zero, &[3.0, -2.0]).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let set = spec_set();
        let w = WeightVector::uniform(3).unwrap();
        assert!(matches!(
            set.weighted_value(&w, &[1.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        let w = WeightVector::uniform(2).unwrap();
        assert!(set.weighted_gradient(&w, &[1.0]).is_err());
    }

    #[test]
    fn mixed_dimensions_rejected() {
        let r = ObjectiveSet::new(vec![Arc::new(Quad(vec![1.0])), Arc::new(Quad(vec![1.0, 1.0]))]);
        assert!(r.is_err());
        assert!(ObjectiveSet::new(vec![]).is_err());
    }

    #[test]
    fn residual_cases() {
        let opt = OptimalInfo {
            x_star: Some(vec![0.0, 0.0]),
            ..Default::default()
        };
        assert_eq!(residual(&[0.0, 0.0], &opt).unwrap(), 0.0);
        assert_eq!(residual(&[3.0, 4.0], &opt).unwrap(), 5.0);
        assert!((residual(&[1.0, 1.0], &opt).unwrap() - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!(matches!(
            residual(&[1.0], &OptimalInfo::default()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn weight_validation() {
        assert!(WeightVector::simplex(vec![0.5, 0.6]).is_err());
        assert!(WeightVector::orthant(vec![-0.1, 1.0]).is_err());
        assert!(WeightVector::new(vec![0.5, 0.5], WeightConstraint::FlooredSimplex { w_min: 0.6 }).is_err());
        assert!(WeightVector::new(vec![0.05, 0.95], WeightConstraint::FlooredSimplex { w_min: 0.1 }).is_err());
        let w = WeightVector::simplex(vec![0.5, 0.5 + 1e-8]).unwrap();
        assert!((w.sum() - 1.0).abs() < 1e-15);
        assert!(WeightVector::uniform(0).is_err());
    }

    #[test]
    fn projection_respects_floor() {
        let w = WeightVector::project(&[2.0, -1.0, 0.3], 0.1).unwrap();
        assert!(w.as_slice().iter().all(|&v| v >= 0.1 - 1e-15));
        assert!((w.sum() - 1.0).abs() < 1e-12);
        assert!((w.as_slice()[1] - 0.1).abs() < 1e-15);
        let p = project_floored_simplex(&[0.2, 0.3, 0.5], 0.0);
        assert_eq!(p, vec![0.2, 0.3, 0.5]);
    }
}

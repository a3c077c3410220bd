//! The Bernstein-Kantorovich operator
//!
//! ```text
//! K_n(f)(x) = Σ_{k=0}^{n} p_{n,k}(x) · (n+1) ∫_{k/(n+1)}^{(k+1)/(n+1)} f(t) dt
//! ```
//!
//! Cell means are computed with a fixed Gauss-Legendre rule mapped onto each
//! cell, and the Bernstein-weighted sum is accumulated in ascending `k` with
//! compensated summation. [`kantorovich_moment_exact`] gives closed forms for
//! `K_n(e_j)`, `j ≤ 2`, as an independent check on the quadrature path.

mod basis;
mod quadrature;

pub use basis::{bernstein_basis, bernstein_weights};
pub use quadrature::QuadratureRule;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_space::{check_unit, SmoothFunction};
use crate::summation::CompensatedSum;

/// Largest supported degree.
pub const MAX_DEGREE: usize = 1 << 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvaluationMethod {
    Quadrature,
    ExactMoment,
}

/// One value `K_n(f)(x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorEvaluation {
    pub n: usize,
    pub x: f64,
    pub value: f64,
    pub method: EvaluationMethod,
}

pub(crate) fn check_degree(n: usize) -> Result<()> {
    if (1..=MAX_DEGREE).contains(&n) {
        Ok(())
    } else {
        Err(Error::Degree { n, max: MAX_DEGREE })
    }
}

/// `K_n` bound to a quadrature rule.
#[derive(Clone, Copy, Debug)]
pub struct KantorovichOperator<'r> {
    degree: usize,
    rule: &'r QuadratureRule,
}

impl<'r> KantorovichOperator<'r> {
    pub fn new(degree: usize, rule: &'r QuadratureRule) -> Result<Self> {
        check_degree(degree)?;
        Ok(Self { degree, rule })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `(n+1) ∫ f` over the `k`-th cell, i.e. the mean of `f` there.
    pub fn cell_mean<F: Fn(f64) -> f64>(&self, f: F, k: usize) -> Result<f64> {
        if k > self.degree {
            return Err(Error::BasisIndex { n: self.degree, k });
        }
        Ok(self.cell_mean_unchecked(&f, k))
    }

    fn cell_mean_unchecked<F: Fn(f64) -> f64>(&self, f: &F, k: usize) -> f64 {
        let cells = (self.degree + 1) as f64;
        // (n+1) · (h/2) Σ w_i f(t_i) with h = 1/(n+1) collapses to ½ Σ w_i f(t_i).
        0.5 * self
            .rule
            .nodes()
            .iter()
            .zip(self.rule.weights())
            .map(|(&t, &w)| w * f((k as f64 + 0.5 * (1.0 + t)) / cells))
            .sum::<f64>()
    }

    /// Means of `f` over all `n + 1` cells.
    pub fn cell_means<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        (0..=self.degree)
            .map(|k| self.cell_mean_unchecked(&f, k))
            .collect()
    }

    /// Bernstein-weighted sum of precomputed cell means at `x`.
    pub fn apply_means(&self, means: &[f64], x: f64) -> Result<f64> {
        check_unit("x", x)?;
        debug_assert_eq!(means.len(), self.degree + 1);
        let weights = basis::weights(self.degree, x);
        Ok(weighted_sum(&weights, means))
    }

    /// [`Self::apply_means`] for several mean vectors, sharing one set of
    /// basis weights.
    pub fn apply_means_many<const M: usize>(&self, means: [&[f64]; M], x: f64) -> Result<[f64; M]> {
        check_unit("x", x)?;
        let weights = basis::weights(self.degree, x);
        Ok(means.map(|m| {
            debug_assert_eq!(m.len(), self.degree + 1);
            weighted_sum(&weights, m)
        }))
    }

    /// `K_n(f)(x)` for an arbitrary integrable `f`.
    pub fn apply_fn<F: Fn(f64) -> f64>(&self, f: F, x: f64) -> Result<f64> {
        check_unit("x", x)?;
        self.apply_means(&self.cell_means(f), x)
    }

    pub fn apply(&self, f: &SmoothFunction, x: f64) -> Result<OperatorEvaluation> {
        let value = self.apply_fn(|t| f.value(t), x)?;
        Ok(OperatorEvaluation {
            n: self.degree,
            x,
            value,
            method: EvaluationMethod::Quadrature,
        })
    }
}

fn weighted_sum(weights: &[f64], means: &[f64]) -> f64 {
    let acc: CompensatedSum = weights.iter().zip(means).map(|(w, m)| w * m).collect();
    acc.value()
}

/// `(n+1) ∫_{k/(n+1)}^{(k+1)/(n+1)} f(t) dt` with the given rule.
pub fn cell_mean(f: &SmoothFunction, n: usize, k: usize, rule: &QuadratureRule) -> Result<f64> {
    KantorovichOperator::new(n, rule)?.cell_mean(|t| f.value(t), k)
}

/// `K_n(f)(x)` by cell quadrature.
pub fn kantorovich_apply(
    f: &SmoothFunction,
    n: usize,
    x: f64,
    rule: &QuadratureRule,
) -> Result<OperatorEvaluation> {
    KantorovichOperator::new(n, rule)?.apply(f, x)
}

/// Closed forms for the first three moments:
///
/// ```text
/// K_n(e_0)(x) = 1
/// K_n(e_1)(x) = (2nx + 1) / (2(n+1))
/// K_n(e_2)(x) = (3n²x² + 3nx(1-x) + 3nx + 1) / (3(n+1)²)
/// ```
pub fn kantorovich_moment_exact(j: u32, n: usize, x: f64) -> Result<f64> {
    check_degree(n)?;
    check_unit("x", x)?;
    let nf = n as f64;
    let np1 = nf + 1.0;
    match j {
        0 => Ok(1.0),
        1 => Ok((2.0 * nf * x + 1.0) / (2.0 * np1)),
        2 => {
            let nx = nf * x;
            Ok((3.0 * nx * nx + 3.0 * nx * (1.0 - x) + 3.0 * nx + 1.0) / (3.0 * np1 * np1))
        }
        _ => Err(Error::MomentOrder(j)),
    }
}

/// [`kantorovich_moment_exact`] wrapped as an [`OperatorEvaluation`].
pub fn moment_evaluation(j: u32, n: usize, x: f64) -> Result<OperatorEvaluation> {
    Ok(OperatorEvaluation {
        n,
        x,
        value: kantorovich_moment_exact(j, n, x)?,
        method: EvaluationMethod::ExactMoment,
    })
}

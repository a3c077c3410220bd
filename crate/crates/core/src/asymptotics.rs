//! Sweeps over `n` of sup-norm residuals and empirical rate fits.
//!
//! Three residuals are tracked, each a sup over an `x`-grid:
//!
//! - `gv_residual`: `|n[K_n(fg) - K_n(f)K_n(g)] - x(1-x) f'g'|`, order `1/√n`
//!   for `C³` pairs;
//! - `gruss_norm`: `|K_n(fg) - K_n(f)K_n(g)|`, order `1/n`;
//! - `nfn_limit`: `|n F_n(x) - x(1-x)|`, order `1/n`.
//!
//! The fitted slope of `log sup` against `log n` is a diagnostic. Boundedness
//! of `n^α · sup` is what the order statements actually guarantee, see
//! [`SweepResult::max_scaled_ratio`].

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_space::{GridSpec, SmoothFunction};
use crate::gruss::f_n;
use crate::kantorovich::{check_degree, KantorovichOperator, QuadratureRule};

/// Grüss functional `K_n(fg)(x) - K_n(f)(x)K_n(g)(x)` at each grid point.
fn gruss_functional(
    f: &SmoothFunction,
    g: &SmoothFunction,
    n: usize,
    grid: &GridSpec,
    rule: &QuadratureRule,
) -> Result<Vec<(f64, f64)>> {
    let op = KantorovichOperator::new(n, rule)?;
    let mf = op.cell_means(|t| f.value(t));
    let mg = op.cell_means(|t| g.value(t));
    let mfg = op.cell_means(|t| f.value(t) * g.value(t));
    grid.points()
        .into_iter()
        .map(|x| {
            let [kf, kg, kfg] = op.apply_means_many([&mf, &mg, &mfg], x)?;
            Ok((x, kfg - kf * kg))
        })
        .collect()
}

/// `sup_x |n[K_n(fg)(x) - K_n(f)(x)K_n(g)(x)] - x(1-x) f'(x) g'(x)|`.
pub fn gv_residual_sup(
    f: &SmoothFunction,
    g: &SmoothFunction,
    n: usize,
    grid: &GridSpec,
    rule: &QuadratureRule,
) -> Result<f64> {
    let nf = n as f64;
    Ok(gruss_functional(f, g, n, grid, rule)?
        .into_iter()
        .map(|(x, t)| (nf * t - x * (1.0 - x) * f.derivative(1, x) * g.derivative(1, x)).abs())
        .fold(0.0, f64::max))
}

/// `sup_x |K_n(fg)(x) - K_n(f)(x)K_n(g)(x)|`.
pub fn gruss_norm_sup(
    f: &SmoothFunction,
    g: &SmoothFunction,
    n: usize,
    grid: &GridSpec,
    rule: &QuadratureRule,
) -> Result<f64> {
    Ok(gruss_functional(f, g, n, grid, rule)?
        .into_iter()
        .map(|(_, t)| t.abs())
        .fold(0.0, f64::max))
}

/// `sup_x |n F_n(x) - x(1-x)|`.
pub fn nfn_limit_residual(n: usize, grid: &GridSpec) -> f64 {
    let nf = n as f64;
    grid.points()
        .into_iter()
        .map(|x| (nf * f_n(n, x) - x * (1.0 - x)).abs())
        .fold(0.0, f64::max)
}

/// Residual selector without its function arguments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResidualKind {
    Gv,
    Gruss,
    Nfn,
}

impl ResidualKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Gv => "gv_residual",
            Self::Gruss => "gruss_norm",
            Self::Nfn => "nfn_limit",
        }
    }

    /// Exponent `α` in the claimed order `O(n^{-α})`.
    pub fn claimed_order(self) -> f64 {
        match self {
            Self::Gv => 0.5,
            Self::Gruss | Self::Nfn => 1.0,
        }
    }

    /// Whether the residual takes a function pair.
    pub fn needs_pair(self) -> bool {
        !matches!(self, Self::Nfn)
    }
}

impl fmt::Display for ResidualKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Gv => "gv",
            Self::Gruss => "gruss",
            Self::Nfn => "nfn",
        })
    }
}

impl FromStr for ResidualKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "gv" | "gv_residual" => Ok(Self::Gv),
            "gruss" | "gruss_norm" => Ok(Self::Gruss),
            "nfn" | "nfn_limit" => Ok(Self::Nfn),
            other => Err(format!(
                "unknown residual `{other}` (expected gv, gruss or nfn)"
            )),
        }
    }
}

/// A residual together with the functions it is evaluated on.
#[derive(Clone, Copy, Debug)]
pub enum Residual<'a> {
    Gv(&'a SmoothFunction, &'a SmoothFunction),
    Gruss(&'a SmoothFunction, &'a SmoothFunction),
    Nfn,
}

impl Residual<'_> {
    pub fn kind(&self) -> ResidualKind {
        match self {
            Self::Gv(..) => ResidualKind::Gv,
            Self::Gruss(..) => ResidualKind::Gruss,
            Self::Nfn => ResidualKind::Nfn,
        }
    }

    pub fn evaluate(&self, n: usize, grid: &GridSpec, rule: &QuadratureRule) -> Result<f64> {
        match *self {
            Self::Gv(f, g) => gv_residual_sup(f, g, n, grid, rule),
            Self::Gruss(f, g) => gruss_norm_sup(f, g, n, grid, rule),
            Self::Nfn => {
                check_degree(n)?;
                Ok(nfn_limit_residual(n, grid))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub n: usize,
    pub sup_value: f64,
}

/// Least-squares fit of `log sup_value` against `log n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateFit {
    /// Every value was exactly zero; any rate claim holds vacuously.
    IdenticallyZero,
    PowerLaw {
        slope: f64,
        intercept: f64,
        r_squared: f64,
    },
}

impl RateFit {
    pub fn slope(&self) -> Option<f64> {
        match self {
            Self::IdenticallyZero => None,
            Self::PowerLaw { slope, .. } => Some(*slope),
        }
    }
}

/// Fits `log v ≈ slope · log n + intercept` over the points with `v > 0`.
pub fn fit_rate(points: &[SweepPoint]) -> Result<RateFit> {
    if points.iter().all(|p| p.sup_value == 0.0) {
        return Ok(RateFit::IdenticallyZero);
    }
    let positive: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.sup_value > 0.0)
        .map(|p| ((p.n as f64).ln(), p.sup_value.ln()))
        .collect();
    if positive.len() < 3 {
        return Err(Error::TooFewPoints(positive.len()));
    }
    let ns = points.iter().filter(|p| p.sup_value > 0.0).map(|p| p.n);
    let (min, max) = ns.fold((usize::MAX, 0), |(lo, hi), n| (lo.min(n), hi.max(n)));
    if max < 4 * min {
        return Err(Error::NarrowRange { min, max });
    }
    let m = positive.len() as f64;
    let mean_x = positive.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = positive.iter().map(|p| p.1).sum::<f64>() / m;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(lx, ly) in &positive {
        let (dx, dy) = (lx - mean_x, ly - mean_y);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = positive
        .iter()
        .map(|&(lx, ly)| (ly - (slope * lx + intercept)).powi(2))
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(RateFit::PowerLaw {
        slope,
        intercept,
        r_squared,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub residual_name: String,
    pub points: Vec<SweepPoint>,
    pub fit: RateFit,
}

impl SweepResult {
    /// `max_k (n_k^α v_k) / (n_0^α v_0)` over the sweep, the growth of the
    /// scaled residual relative to its first point. `None` when the first
    /// value is zero.
    pub fn max_scaled_ratio(&self, alpha: f64) -> Option<f64> {
        let scaled: Vec<f64> = self
            .points
            .iter()
            .map(|p| (p.n as f64).powf(alpha) * p.sup_value)
            .collect();
        let base = *scaled.first()?;
        if base == 0.0 {
            return None;
        }
        Some(scaled.iter().map(|s| s / base).fold(f64::MIN, f64::max))
    }
}

/// Sup values at or below this are rounding noise and are recorded as zero.
/// The `gv` residual of a constant pair, for instance, comes out near
/// `n · 1e-16` instead of exactly zero.
pub const NOISE_FLOOR: f64 = 1e-12;

/// Evaluates `residual` at every `n` and fits the rate.
pub fn run_sweep(
    residual: Residual<'_>,
    n_list: &[usize],
    grid: &GridSpec,
    rule: &QuadratureRule,
) -> Result<SweepResult> {
    if n_list.len() < 4 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::SweepList);
    }
    let points = n_list
        .par_iter()
        .map(|&n| {
            let v = residual.evaluate(n, grid, rule)?;
            Ok(SweepPoint {
                n,
                sup_value: if v <= NOISE_FLOOR { 0.0 } else { v },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let fit = fit_rate(&points)?;
    Ok(SweepResult {
        residual_name: residual.kind().name().to_string(),
        points,
        fit,
    })
}

/// Powers of two from 8 to 1024.
pub fn default_rate_degrees() -> Vec<usize> {
    (3..=10).map(|p| 1usize << p).collect()
}

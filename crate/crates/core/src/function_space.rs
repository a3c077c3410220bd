//! Analytic test functions on `[0, 1]` and the scalar estimators the
//! inequalities consume: uniform norms, moduli of continuity and divided
//! differences.
//!
//! Every corpus member carries hand-coded derivatives up to order three
//! together with analytic upper bounds on `sup |f^(k)|`. Numerical
//! differentiation never enters the estimates.

use std::f64::consts::E;
use std::fmt;

use crate::error::{Error, Result};

/// Highest derivative order carried by a [`SmoothFunction`].
pub const MAX_DERIVATIVE: usize = 3;

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    /// `x^j`
    Monomial(u32),
    /// `a x + b`
    Affine {
        slope: f64,
        intercept: f64,
    },
    Exp,
    Sin,
    Cos,
    /// `1 / (1 + x)`
    ReciprocalOnePlus,
    /// `x e^{-x}`
    XExpNeg,
    Product(Box<SmoothFunction>, Box<SmoothFunction>),
}

/// A named scalar function on `[0, 1]` with analytic derivatives of order
/// 0 through 3 and upper bounds on their sup norms.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothFunction {
    name: String,
    kind: Kind,
    norm_bounds: [f64; 4],
}

impl SmoothFunction {
    fn new(name: impl Into<String>, kind: Kind, norm_bounds: [f64; 4]) -> Self {
        Self {
            name: name.into(),
            kind,
            norm_bounds,
        }
    }

    /// The monomial `e_j(x) = x^j`.
    pub fn monomial(j: u32) -> Self {
        let mut bounds = [0.0; 4];
        for (k, b) in bounds.iter_mut().enumerate() {
            // sup |d^k x^j| on [0,1] is j!/(j-k)!, attained at x = 1.
            *b = falling_factorial(j, k as u32);
        }
        Self::new(format!("e_{j}"), Kind::Monomial(j), bounds)
    }

    /// `slope * x + intercept`.
    pub fn affine(slope: f64, intercept: f64) -> Self {
        let sup = intercept.abs().max((slope + intercept).abs());
        Self::new(
            format!("affine({slope},{intercept})"),
            Kind::Affine { slope, intercept },
            [sup, slope.abs(), 0.0, 0.0],
        )
    }

    pub fn exp() -> Self {
        Self::new("exp", Kind::Exp, [E; 4])
    }

    pub fn sin() -> Self {
        let s1 = 1f64.sin();
        Self::new("sin", Kind::Sin, [s1, 1.0, s1, 1.0])
    }

    pub fn cos() -> Self {
        let s1 = 1f64.sin();
        Self::new("cos", Kind::Cos, [1.0, s1, 1.0, s1])
    }

    /// `1 / (1 + x)`; `|d^k| = k!/(1+x)^{k+1}` peaks at `x = 0`.
    pub fn reciprocal_one_plus() -> Self {
        Self::new("1/(1+x)", Kind::ReciprocalOnePlus, [1.0, 1.0, 2.0, 6.0])
    }

    /// `x e^{-x}`; derivatives are `(-1)^k (x - k) e^{-x}`.
    pub fn x_exp_neg() -> Self {
        Self::new("x*exp(-x)", Kind::XExpNeg, [(-1f64).exp(), 1.0, 2.0, 3.0])
    }

    /// Pointwise product `f g`, differentiated by the Leibniz rule.
    pub fn product(f: &SmoothFunction, g: &SmoothFunction) -> Self {
        let mut bounds = [0.0; 4];
        for (k, b) in bounds.iter_mut().enumerate() {
            *b = (0..=k)
                .map(|i| binomial(k, i) * f.norm_bounds[i] * g.norm_bounds[k - i])
                .sum();
        }
        Self::new(
            format!("({})*({})", f.name, g.name),
            Kind::Product(Box::new(f.clone()), Box::new(g.clone())),
            bounds,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(0, x)
    }

    /// The `order`-th derivative at `x`.
    ///
    /// Panics if `order > 3`.
    pub fn derivative(&self, order: usize, x: f64) -> f64 {
        assert!(
            order <= MAX_DERIVATIVE,
            "derivative order {order} exceeds {MAX_DERIVATIVE}"
        );
        match &self.kind {
            Kind::Monomial(j) => {
                let k = order as u32;
                if k > *j {
                    0.0
                } else {
                    falling_factorial(*j, k) * x.powi((*j - k) as i32)
                }
            }
            Kind::Affine { slope, intercept } => match order {
                0 => slope * x + intercept,
                1 => *slope,
                _ => 0.0,
            },
            Kind::Exp => x.exp(),
            Kind::Sin => match order {
                0 => x.sin(),
                1 => x.cos(),
                2 => -x.sin(),
                _ => -x.cos(),
            },
            Kind::Cos => match order {
                0 => x.cos(),
                1 => -x.sin(),
                2 => -x.cos(),
                _ => x.sin(),
            },
            Kind::ReciprocalOnePlus => {
                let sign = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * factorial(order) / (1.0 + x).powi(order as i32 + 1)
            }
            Kind::XExpNeg => {
                let sign = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * (x - order as f64) * (-x).exp()
            }
            Kind::Product(f, g) => (0..=order)
                .map(|i| binomial(order, i) * f.derivative(i, x) * g.derivative(order - i, x))
                .sum(),
        }
    }

    /// Analytic upper bound on `sup_{[0,1]} |f^(order)|`.
    pub fn norm_bound(&self, order: usize) -> f64 {
        self.norm_bounds[order]
    }

    pub fn norm_bounds(&self) -> [f64; 4] {
        self.norm_bounds
    }
}

impl fmt::Display for SmoothFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn falling_factorial(j: u32, k: u32) -> f64 {
    if k > j {
        return 0.0;
    }
    (0..k).map(|i| (j - i) as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// The fixed test corpus.
pub fn corpus() -> Vec<SmoothFunction> {
    vec![
        SmoothFunction::monomial(0),
        SmoothFunction::monomial(1),
        SmoothFunction::monomial(2),
        SmoothFunction::monomial(3),
        SmoothFunction::affine(2.0, 1.0),
        SmoothFunction::affine(-1.0, 0.5),
        SmoothFunction::exp(),
        SmoothFunction::sin(),
        SmoothFunction::cos(),
        SmoothFunction::reciprocal_one_plus(),
        SmoothFunction::x_exp_neg(),
    ]
}

fn normalize(name: &str) -> String {
    name.chars()
        .filter(|c| !c.is_whitespace() && *c != '_')
        .flat_map(char::to_lowercase)
        .map(|c| if c == '−' { '-' } else { c })
        .collect()
}

/// Resolves a corpus member by name.
///
/// Matching ignores case, whitespace and underscores, so `e1` finds `e_1`.
/// A few spellings without punctuation are also accepted: `recip` for
/// `1/(1+x)` and `xexp` for `x*exp(-x)`.
pub fn lookup(name: &str) -> Result<SmoothFunction> {
    let key = normalize(name);
    let alias = match key.as_str() {
        "recip" | "inv1p" | "1/(x+1)" => Some("1/(1+x)"),
        "xexp" | "xexpneg" | "x*e^(-x)" | "xe^(-x)" | "xexp(-x)" => Some("x*exp(-x)"),
        "affine(2,1.0)" | "affine(2.0,1.0)" | "affine(2.0,1)" => Some("affine(2,1)"),
        "affine(-1.0,0.5)" => Some("affine(-1,0.5)"),
        _ => None,
    };
    let key = alias.map(normalize).unwrap_or(key);
    corpus()
        .into_iter()
        .find(|f| normalize(f.name()) == key)
        .ok_or_else(|| Error::UnknownFunction(name.to_string()))
}

/// Uniform evaluation grid on `[0, 1]` and the separation floor for
/// two-point evaluations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    point_count: usize,
    pair_floor: f64,
}

impl GridSpec {
    pub const DEFAULT_PAIR_FLOOR: f64 = 1e-3;
    pub const VERIFICATION_POINTS: usize = 33;
    pub const DENSE_POINTS: usize = 4097;

    pub fn new(point_count: usize, pair_floor: f64) -> Result<Self> {
        if point_count < 2 {
            return Err(Error::Grid(format!(
                "point_count must be at least 2, got {point_count}"
            )));
        }
        if !(pair_floor > 0.0 && pair_floor < 1.0) {
            return Err(Error::Grid(format!(
                "pair_floor must lie in (0, 1), got {pair_floor}"
            )));
        }
        Ok(Self {
            point_count,
            pair_floor,
        })
    }

    /// 33 points, pair floor `1e-3`.
    pub fn verification() -> Self {
        Self {
            point_count: Self::VERIFICATION_POINTS,
            pair_floor: Self::DEFAULT_PAIR_FLOOR,
        }
    }

    /// 4097 points, pair floor `1e-3`.
    pub fn dense() -> Self {
        Self {
            point_count: Self::DENSE_POINTS,
            pair_floor: Self::DEFAULT_PAIR_FLOOR,
        }
    }

    pub fn point_count(&self) -> usize {
        self.point_count
    }

    pub fn pair_floor(&self) -> f64 {
        self.pair_floor
    }

    pub fn point(&self, i: usize) -> f64 {
        i as f64 / (self.point_count - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.point_count).map(|i| self.point(i)).collect()
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::verification()
    }
}

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfDomain { name, value })
    }
}

/// `[x, y; f] = (f(x) - f(y)) / (x - y)`.
///
/// Pairs closer than `pair_floor` are rejected: the quotient loses digits to
/// cancellation there, and the `y -> x` limit is `f'(x)`.
pub fn divided_difference(f: &SmoothFunction, x: f64, y: f64, pair_floor: f64) -> Result<f64> {
    check_unit("x", x)?;
    check_unit("y", y)?;
    if (x - y).abs() < pair_floor {
        return Err(Error::PairTooClose {
            x,
            y,
            floor: pair_floor,
        });
    }
    // one fixed evaluation order, so swapping the arguments gives the same bits
    let (hi, lo) = if x > y { (x, y) } else { (y, x) };
    Ok((f.value(hi) - f.value(lo)) / (hi - lo))
}

/// Grid samples of a scalar function, reused across many modulus queries.
pub(crate) struct SampledFunction<F> {
    h: F,
    points: Vec<f64>,
    values: Vec<f64>,
}

impl<F: Fn(f64) -> f64> SampledFunction<F> {
    pub(crate) fn new(h: F, grid: &GridSpec) -> Self {
        let points = grid.points();
        let values = points.iter().map(|&u| h(u)).collect();
        Self { h, points, values }
    }

    pub(crate) fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Lower estimate of `omega_1(h; delta)`: grid pairs within `delta`, plus
    /// each grid point paired with its `delta`-offsets clipped to `[0, 1]`.
    pub(crate) fn modulus_lower(&self, delta: f64) -> f64 {
        let m = self.points.len();
        let mut best: f64 = 0.0;
        for i in 0..m {
            let (u, hu) = (self.points[i], self.values[i]);
            for j in i + 1..m {
                if self.points[j] - u > delta {
                    break;
                }
                best = best.max((self.values[j] - hu).abs());
            }
            if delta > 0.0 {
                let right = (u + delta).min(1.0);
                let left = (u - delta).max(0.0);
                best = best.max(((self.h)(right) - hu).abs());
                best = best.max(((self.h)(left) - hu).abs());
            }
        }
        best
    }
}

/// Lower bound on the modulus of continuity `omega_1(h; delta)` on `[0, 1]`.
pub fn modulus_lower<F: Fn(f64) -> f64>(h: F, delta: f64, grid: &GridSpec) -> Result<f64> {
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::NegativeDelta(delta));
    }
    Ok(SampledFunction::new(h, grid).modulus_lower(delta))
}

/// Upper bound `min(2 ||h||, delta ||h'||)` on `omega_1(h; delta)` from the
/// analytic norm bounds of `h`.
pub fn modulus_upper(h: &SmoothFunction, delta: f64) -> Result<f64> {
    modulus_upper_from_bounds(h.norm_bound(0), h.norm_bound(1), delta)
}

pub(crate) fn modulus_upper_from_bounds(sup: f64, sup_derivative: f64, delta: f64) -> Result<f64> {
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::NegativeDelta(delta));
    }
    Ok((2.0 * sup).min(delta * sup_derivative))
}

/// `max |h|` over the grid, a lower bound on the uniform norm.
pub fn sup_norm_lower<F: Fn(f64) -> f64>(h: F, grid: &GridSpec) -> f64 {
    grid.points()
        .into_iter()
        .fold(0.0, |m, u| m.max(h(u).abs()))
}

//! Two-point Grüss-Voronovskaya estimate for `K_n` and its corollaries.
//!
//! For `f, g ∈ C²[0,1]` and `x ≠ y` the checked inequality is
//!
//! ```text
//! | K_n(fg)(x) - K_n(f)(x) K_n(g)(x)
//!   + (x-y) (1-2x)/(2(n+1)) ([x,y;f][x,y;g] - f'(x)g'(x))
//!   - F_n(x) f'(x) g'(x) |
//!   ≤ [F_n(x) + |x-y| / (√3 √(n+1))]
//!     · [ω₁((fg)''; δ) + ‖g‖ ω₁(f''; δ) + ‖f‖ ω₁(g''; δ)]
//!     + |K_n(f)(x) - f(x)| · |K_n(g)(x) - g(x)|,
//! δ = |x-y| + 2√6/√(n+1),
//! ```
//!
//! with `F_n(x) = (x(1-x)(n-1) + 1/3)/(n+1)²`. Dropping the `F_n f'g'` term
//! from the left and adding `F_n |f'g'|` on the right gives the perturbed
//! Grüss estimate.
//!
//! By default the moduli and norms on the right are estimated from below, so
//! a passing record certifies the inequality at that point.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_space::{
    check_unit, divided_difference, modulus_upper_from_bounds, GridSpec, SampledFunction,
    SmoothFunction,
};
use crate::kantorovich::{KantorovichOperator, QuadratureRule};

/// `F_n(x) = (x(1-x)(n-1) + 1/3) / (n+1)²`.
pub fn f_n(n: usize, x: f64) -> f64 {
    let np1 = n as f64 + 1.0;
    (x * (1.0 - x) * (n as f64 - 1.0) + 1.0 / 3.0) / (np1 * np1)
}

/// `E_n(x, y) = F_n(x) + (x-y)(1-2x)/(2(n+1))`.
pub fn e_n(n: usize, x: f64, y: f64) -> f64 {
    f_n(n, x) + (x - y) * voronovskaya_drift(n, x)
}

/// `(1-2x)/(2(n+1))`, the first-order coefficient of `K_n`.
fn voronovskaya_drift(n: usize, x: f64) -> f64 {
    (1.0 - 2.0 * x) / (2.0 * (n as f64 + 1.0))
}

/// Which modulus-of-continuity estimator feeds the right-hand side.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OmegaMode {
    /// Grid maximization; never exceeds the true modulus.
    #[default]
    Lower,
    /// `min(2‖h‖, δ‖h'‖)` from analytic bounds.
    Upper,
}

/// Source of `‖f‖` and `‖g‖` on the right-hand side.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMode {
    #[default]
    GridLower,
    AnalyticUpper,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateConfig {
    pub tau_check: f64,
    pub omega_mode: OmegaMode,
    pub norm_mode: NormMode,
}

impl EstimateConfig {
    pub const DEFAULT_TAU: f64 = 1e-9;

    pub fn new(tau_check: f64, omega_mode: OmegaMode, norm_mode: NormMode) -> Result<Self> {
        if !(tau_check >= 0.0 && tau_check.is_finite()) {
            return Err(Error::Tau(tau_check));
        }
        Ok(Self {
            tau_check,
            omega_mode,
            norm_mode,
        })
    }
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self {
            tau_check: Self::DEFAULT_TAU,
            omega_mode: OmegaMode::Lower,
            norm_mode: NormMode::GridLower,
        }
    }
}

/// One evaluation of an inequality at `(n, x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheckRecord {
    pub n: usize,
    pub x: f64,
    pub y: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

impl BoundCheckRecord {
    pub fn new(n: usize, x: f64, y: f64, lhs: f64, rhs: f64, tau_check: f64) -> Self {
        Self {
            n,
            x,
            y,
            lhs,
            rhs,
            slack: rhs - lhs,
            pass: lhs <= rhs + tau_check,
        }
    }
}

/// Records from a grid sweep plus the number of grid pairs that were not
/// admissible (`x = y` or closer than the pair floor).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CheckReport {
    pub records: Vec<BoundCheckRecord>,
    pub skipped: usize,
}

impl CheckReport {
    pub fn passes(&self) -> usize {
        self.records.iter().filter(|r| r.pass).count()
    }

    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn min_slack(&self) -> Option<f64> {
        self.records.iter().map(|r| r.slack).reduce(f64::min)
    }

    pub fn max_lhs(&self) -> Option<f64> {
        self.records.iter().map(|r| r.lhs).reduce(f64::max)
    }
}

#[derive(Clone, Copy, Debug)]
struct OperatorValues {
    f: f64,
    g: f64,
    fg: f64,
}

type Sampled<'a> = SampledFunction<Box<dyn Fn(f64) -> f64 + Send + Sync + 'a>>;

/// Everything about `(f, g, n)` that does not depend on the evaluation
/// point: cell means, grid samples of the second derivatives and norms.
struct PairState<'a> {
    n: usize,
    f: &'a SmoothFunction,
    g: &'a SmoothFunction,
    fg: SmoothFunction,
    op: KantorovichOperator<'a>,
    means_f: Vec<f64>,
    means_g: Vec<f64>,
    means_fg: Vec<f64>,
    norm_f: f64,
    norm_g: f64,
    moduli: Option<[Sampled<'a>; 3]>,
}

impl<'a> PairState<'a> {
    fn new(
        est: &GrussEstimator<'a>,
        f: &'a SmoothFunction,
        g: &'a SmoothFunction,
        n: usize,
        with_moduli: bool,
    ) -> Result<Self> {
        let op = KantorovichOperator::new(n, est.rule)?;
        let fg = SmoothFunction::product(f, g);
        let means_f = op.cell_means(|t| f.value(t));
        let means_g = op.cell_means(|t| g.value(t));
        let means_fg = op.cell_means(|t| fg.value(t));
        let (norm_f, norm_g) = match est.config.norm_mode {
            NormMode::GridLower => (
                SampledFunction::new(|t| f.value(t), &est.grid).sup_abs(),
                SampledFunction::new(|t| g.value(t), &est.grid).sup_abs(),
            ),
            NormMode::AnalyticUpper => (f.norm_bound(0), g.norm_bound(0)),
        };
        let moduli = (with_moduli && est.config.omega_mode == OmegaMode::Lower).then(|| {
            let fg2 = fg.clone();
            [
                SampledFunction::new(
                    Box::new(move |t| fg2.derivative(2, t))
                        as Box<dyn Fn(f64) -> f64 + Send + Sync>,
                    &est.grid,
                ),
                SampledFunction::new(
                    Box::new(move |t| f.derivative(2, t)) as Box<dyn Fn(f64) -> f64 + Send + Sync>,
                    &est.grid,
                ),
                SampledFunction::new(
                    Box::new(move |t| g.derivative(2, t)) as Box<dyn Fn(f64) -> f64 + Send + Sync>,
                    &est.grid,
                ),
            ]
        });
        Ok(Self {
            n,
            f,
            g,
            fg,
            op,
            means_f,
            means_g,
            means_fg,
            norm_f,
            norm_g,
            moduli,
        })
    }

    fn operator_values(&self, x: f64) -> Result<OperatorValues> {
        let [f, g, fg] = self
            .op
            .apply_means_many([&self.means_f, &self.means_g, &self.means_fg], x)?;
        Ok(OperatorValues { f, g, fg })
    }

    /// Left side; `with_f_n` selects the theorem form over the perturbed one.
    fn lhs(&self, kv: OperatorValues, x: f64, y: f64, floor: f64, with_f_n: bool) -> Result<f64> {
        let dd_f = divided_difference(self.f, x, y, floor)?;
        let dd_g = divided_difference(self.g, x, y, floor)?;
        let fg1 = self.f.derivative(1, x) * self.g.derivative(1, x);
        let mut inner =
            kv.fg - kv.f * kv.g + (x - y) * voronovskaya_drift(self.n, x) * (dd_f * dd_g - fg1);
        if with_f_n {
            inner -= f_n(self.n, x) * fg1;
        }
        Ok(inner.abs())
    }

    /// `[ω₁((fg)''; δ), ω₁(f''; δ), ω₁(g''; δ)]`.
    fn moduli(&self, delta: f64) -> Result<[f64; 3]> {
        match &self.moduli {
            Some([fg, f, g]) => Ok([
                fg.modulus_lower(delta),
                f.modulus_lower(delta),
                g.modulus_lower(delta),
            ]),
            None => {
                let up = |h: &SmoothFunction| {
                    modulus_upper_from_bounds(h.norm_bound(2), h.norm_bound(3), delta)
                };
                Ok([up(&self.fg)?, up(self.f)?, up(self.g)?])
            }
        }
    }

    fn rhs(&self, kv: OperatorValues, x: f64, y: f64, floor: f64, perturbed: bool) -> Result<f64> {
        check_unit("x", x)?;
        check_unit("y", y)?;
        let dist = (x - y).abs();
        if dist < floor {
            return Err(Error::PairTooClose { x, y, floor });
        }
        let root = (self.n as f64 + 1.0).sqrt();
        let bracket = f_n(self.n, x) + dist / (3f64.sqrt() * root);
        // ω₁ on [0,1] is constant for δ ≥ 1.
        let delta = (dist + 2.0 * 6f64.sqrt() / root).min(1.0);
        let [w_fg, w_f, w_g] = self.moduli(delta)?;
        let remainder = (kv.f - self.f.value(x)).abs() * (kv.g - self.g.value(x)).abs();
        let mut rhs = bracket * (w_fg + self.norm_g * w_f + self.norm_f * w_g) + remainder;
        if perturbed {
            rhs += f_n(self.n, x) * (self.f.derivative(1, x) * self.g.derivative(1, x)).abs();
        }
        Ok(rhs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Form {
    Theorem,
    Perturbed,
}

/// Evaluates and checks the estimates on a fixed grid.
#[derive(Clone, Debug)]
pub struct GrussEstimator<'r> {
    rule: &'r QuadratureRule,
    grid: GridSpec,
    config: EstimateConfig,
}

impl<'r> GrussEstimator<'r> {
    pub fn new(rule: &'r QuadratureRule, grid: GridSpec, config: EstimateConfig) -> Self {
        Self { rule, grid, config }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn config(&self) -> &EstimateConfig {
        &self.config
    }

    fn side(
        &self,
        (f, g): (&SmoothFunction, &SmoothFunction),
        n: usize,
        x: f64,
        y: f64,
        form: Form,
        left: bool,
    ) -> Result<f64> {
        let state = PairState::new(self, f, g, n, !left)?;
        let kv = state.operator_values(x)?;
        let floor = self.grid.pair_floor();
        if left {
            state.lhs(kv, x, y, floor, form == Form::Theorem)
        } else {
            state.rhs(kv, x, y, floor, form == Form::Perturbed)
        }
    }

    /// Magnitude of the Grüss-Voronovskaya left side at `(x, y)`.
    pub fn theorem_lhs(
        &self,
        f: &SmoothFunction,
        g: &SmoothFunction,
        n: usize,
        x: f64,
        y: f64,
    ) -> Result<f64> {
        self.side((f, g), n, x, y, Form::Theorem, true)
    }

    /// Right side at `(x, y)` with moduli and norms chosen by the config.
    pub fn theorem_rhs(
        &self,
        f: &SmoothFunction,
        g: &SmoothFunction,
        n: usize,
        x: f64,
        y: f64,
    ) -> Result<f64> {
        self.side((f, g), n, x, y, Form::Theorem, false)
    }

    /// Left side without the `F_n f'g'` subtraction.
    pub fn perturbed_gruss_lhs(
        &self,
        f: &SmoothFunction,
        g: &SmoothFunction,
        n: usize,
        x: f64,
        y: f64,
    ) -> Result<f64> {
        self.side((f, g), n, x, y, Form::Perturbed, true)
    }

    /// [`Self::theorem_rhs`] plus `F_n(x) |f'(x) g'(x)|`.
    pub fn perturbed_gruss_rhs(
        &self,
        f: &SmoothFunction,
        g: &SmoothFunction,
        n: usize,
        x: f64,
        y: f64,
    ) -> Result<f64> {
        self.side((f, g), n, x, y, Form::Perturbed, false)
    }

    fn sweep(
        &self,
        f: &SmoothFunction,
        g: &SmoothFunction,
        n: usize,
        form: Form,
    ) -> Result<CheckReport> {
        let state = PairState::new(self, f, g, n, true)?;
        let points = self.grid.points();
        let floor = self.grid.pair_floor();
        let tau = self.config.tau_check;
        let perturbed = form == Form::Perturbed;
        let rows: Vec<(Vec<BoundCheckRecord>, usize)> = points
            .par_iter()
            .map(|&x| -> Result<_> {
                let kv = state.operator_values(x)?;
                let mut records = Vec::with_capacity(points.len());
                let mut skipped = 0;
                for &y in &points {
                    if (x - y).abs() < floor || x == y {
                        skipped += 1;
                        continue;
                    }
                    let lhs = state.lhs(kv, x, y, floor, !perturbed)?;
                    let rhs = state.rhs(kv, x, y, floor, perturbed)?;
                    records.push(BoundCheckRecord::new(n, x, y, lhs, rhs, tau));
                }
                Ok((records, skipped))
            })
            .collect::<Result<_>>()?;
        let mut report = CheckReport::default();
        for (records, skipped) in rows {
            report.records.extend(records);
            report.skipped += skipped;
        }
        Ok(report)
    }

    /// One record per admissible ordered grid pair `(x, y)`.
    pub fn check_theorem(
        &self,
        f: &SmoothFunction,
        g: &SmoothFunction,
        n: usize,
    ) -> Result<CheckReport> {
        self.sweep(f, g, n, Form::Theorem)
    }

    /// Same sweep as [`Self::check_theorem`] for the perturbed Grüss form.
    pub fn check_perturbed(
        &self,
        f: &SmoothFunction,
        g: &SmoothFunction,
        n: usize,
    ) -> Result<CheckReport> {
        self.sweep(f, g, n, Form::Perturbed)
    }

    /// `|K_n(h)(x) - h(x)| ≤ ‖h'‖/(2n) + 8‖h''‖/(9n)` at every grid point,
    /// with the analytic derivative bounds of `h` on the right.
    pub fn ah_bound_check(&self, h: &SmoothFunction, n: usize) -> Result<Vec<BoundCheckRecord>> {
        let op = KantorovichOperator::new(n, self.rule)?;
        let means = op.cell_means(|t| h.value(t));
        let nf = n as f64;
        let rhs = h.norm_bound(1) / (2.0 * nf) + 8.0 * h.norm_bound(2) / (9.0 * nf);
        self.grid
            .points()
            .into_iter()
            .map(|x| {
                let lhs = (op.apply_means(&means, x)? - h.value(x)).abs();
                Ok(BoundCheckRecord::new(
                    n,
                    x,
                    x,
                    lhs,
                    rhs,
                    self.config.tau_check,
                ))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_space::lookup;

    fn fun(name: &str) -> SmoothFunction {
        lookup(name).unwrap()
    }

    #[test]
    fn f_n_examples() {
        for x in [0.0, 0.3, 1.0] {
            assert!((f_n(1, x) - 1.0 / 12.0).abs() < 1e-17);
        }
        assert!((f_n(5, 0.0) - 1.0 / 108.0).abs() < 1e-17);
        assert!((f_n(3, 0.5) - 5.0 / 96.0).abs() < 1e-17);
    }

    #[test]
    fn e_n_examples() {
        for n in [1, 7, 300] {
            for x in [0.0, 0.2, 0.5, 0.9] {
                assert_eq!(e_n(n, x, x), f_n(n, x));
                assert_eq!(e_n(n, 0.5, x), f_n(n, 0.5));
            }
        }
        assert!((e_n(1, 0.25, 0.75) - 1.0 / 48.0).abs() < 1e-17);
    }

    #[test]
    fn config_rejects_negative_tau() {
        assert_eq!(
            EstimateConfig::new(-1.0, OmegaMode::Lower, NormMode::GridLower).unwrap_err(),
            Error::Tau(-1.0)
        );
        assert!(EstimateConfig::new(f64::NAN, OmegaMode::Lower, NormMode::GridLower).is_err());
    }

    #[test]
    fn record_pass_uses_tau() {
        let r = BoundCheckRecord::new(1, 0.0, 1.0, 1.0 + 5e-10, 1.0, 1e-9);
        assert!(r.pass);
        assert!(r.slack < 0.0);
        let r = BoundCheckRecord::new(1, 0.0, 1.0, 1.0 + 2e-9, 1.0, 1e-9);
        assert!(!r.pass);
    }

    #[test]
    fn constant_pair_is_identically_zero() {
        let rule = QuadratureRule::default();
        let est = GrussEstimator::new(&rule, GridSpec::verification(), EstimateConfig::default());
        let e0 = fun("e0");
        for n in [1, 5, 40] {
            assert!(est.theorem_lhs(&e0, &e0, n, 0.1, 0.7).unwrap() < 1e-14);
            assert!(est.theorem_rhs(&e0, &e0, n, 0.1, 0.7).unwrap() < 1e-28);
            assert!(est.perturbed_gruss_lhs(&e0, &e0, n, 0.1, 0.7).unwrap() < 1e-14);
            assert!(est.perturbed_gruss_rhs(&e0, &e0, n, 0.1, 0.7).unwrap() < 1e-28);
        }
        let report = est.check_theorem(&e0, &e0, 4).unwrap();
        assert!(report.all_pass());
        assert_eq!(report.records.len(), 33 * 32);
        assert_eq!(report.skipped, 33);
    }

    #[test]
    fn identity_pair_examples() {
        let rule = QuadratureRule::default();
        let est = GrussEstimator::new(&rule, GridSpec::verification(), EstimateConfig::default());
        let e1 = fun("e1");
        let lhs = est.theorem_lhs(&e1, &e1, 1, 0.25, 0.75).unwrap();
        let rhs = est.theorem_rhs(&e1, &e1, 1, 0.25, 0.75).unwrap();
        assert!((lhs - 1.0 / 64.0).abs() < 1e-15);
        assert!((rhs - 1.0 / 64.0).abs() < 1e-15);
        let plhs = est.perturbed_gruss_lhs(&e1, &e1, 1, 0.25, 0.75).unwrap();
        assert!((plhs - (3.0 / 64.0 + 1.0 / 48.0)).abs() < 1e-15);
        let plhs_other_y = est.perturbed_gruss_lhs(&e1, &e1, 1, 0.25, 0.1).unwrap();
        assert!((plhs_other_y - plhs).abs() < 1e-15);
        let prhs = est.perturbed_gruss_rhs(&e1, &e1, 1, 0.25, 0.75).unwrap();
        assert!((prhs - (1.0 / 64.0 + 1.0 / 12.0)).abs() < 1e-15);
    }

    #[test]
    fn affine_pair_example() {
        let rule = QuadratureRule::default();
        let est = GrussEstimator::new(&rule, GridSpec::verification(), EstimateConfig::default());
        let f = fun("affine(2,1)");
        let g = fun("affine(-1,0.5)");
        let lhs = est.theorem_lhs(&f, &g, 2, 0.2, 0.8).unwrap();
        let rhs = est.theorem_rhs(&f, &g, 2, 0.2, 0.8).unwrap();
        assert!((lhs - 0.02).abs() < 1e-14);
        assert!((rhs - 0.02).abs() < 1e-14);
        assert!(
            est.perturbed_gruss_lhs(&f, &fun("e0"), 3, 0.3, 0.6)
                .unwrap()
                < 1e-14
        );
    }

    #[test]
    fn close_pairs_are_rejected() {
        let rule = QuadratureRule::default();
        let est = GrussEstimator::new(&rule, GridSpec::verification(), EstimateConfig::default());
        let e1 = fun("e1");
        assert!(matches!(
            est.theorem_lhs(&e1, &e1, 3, 0.5, 0.5),
            Err(Error::PairTooClose { .. })
        ));
        assert!(matches!(
            est.theorem_rhs(&e1, &e1, 3, 0.5, 0.5001),
            Err(Error::PairTooClose { .. })
        ));
    }

    #[test]
    fn ah_examples() {
        let rule = QuadratureRule::default();
        let est = GrussEstimator::new(&rule, GridSpec::verification(), EstimateConfig::default());
        let recs = est.ah_bound_check(&fun("e0"), 3).unwrap();
        assert!(recs.iter().all(|r| r.pass && r.rhs == 0.0 && r.lhs < 1e-15));
        let recs = est.ah_bound_check(&fun("e1"), 4).unwrap();
        let first = recs[0];
        assert_eq!(first.x, 0.0);
        assert!((first.lhs - 0.1).abs() < 1e-15);
        assert_eq!(first.rhs, 0.125);
        assert!(first.pass);
        let recs = est.ah_bound_check(&fun("sin"), 8).unwrap();
        assert!(recs.iter().all(|r| r.pass));
    }

    #[test]
    fn upper_mode_dominates_lower_mode() {
        let rule = QuadratureRule::default();
        let grid = GridSpec::verification();
        let lower = GrussEstimator::new(&rule, grid, EstimateConfig::default());
        let upper = GrussEstimator::new(
            &rule,
            grid,
            EstimateConfig::new(1e-9, OmegaMode::Upper, NormMode::AnalyticUpper).unwrap(),
        );
        let (f, g) = (fun("exp"), fun("sin"));
        for n in [1, 16] {
            let a = lower.check_theorem(&f, &g, n).unwrap();
            let b = upper.check_theorem(&f, &g, n).unwrap();
            for (ra, rb) in a.records.iter().zip(&b.records) {
                assert_eq!((ra.x, ra.y), (rb.x, rb.y));
                assert!(rb.rhs >= ra.rhs);
            }
        }
    }
}

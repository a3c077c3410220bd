use kantorovich_gruss::{
    bernstein_basis, bernstein_weights, corpus, divided_difference, e_n, f_n, fit_rate,
    gruss_norm_sup, gv_residual_sup, kantorovich_apply, modulus_lower, modulus_upper,
    sup_norm_lower, EstimateConfig, GridSpec, GrussEstimator, KantorovichOperator, NormMode,
    OmegaMode, QuadratureRule, RateFit, SmoothFunction, SweepPoint,
};
use proptest::prelude::*;
use rayon::prelude::*;

fn member(i: usize) -> SmoothFunction {
    corpus()[i].clone()
}

fn any_member() -> impl Strategy<Value = SmoothFunction> {
    (0..corpus().len()).prop_map(member)
}

fn admissible_pair() -> impl Strategy<Value = (f64, f64)> {
    (0.0..=1.0f64, 0.0..=1.0f64).prop_filter("pair floor", |(x, y)| (x - y).abs() >= 1e-3)
}

fn default_estimator(rule: &QuadratureRule) -> GrussEstimator<'_> {
    GrussEstimator::new(rule, GridSpec::verification(), EstimateConfig::default())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn divided_difference_is_symmetric(f in any_member(), (x, y) in admissible_pair()) {
        let a = divided_difference(&f, x, y, 1e-3).unwrap();
        let b = divided_difference(&f, y, x, 1e-3).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn affine_divided_difference_is_the_slope(
        a in -10.0..10.0f64,
        b in -10.0..10.0f64,
        (x, y) in admissible_pair(),
    ) {
        let f = SmoothFunction::affine(a, b);
        let dd = divided_difference(&f, x, y, 1e-3).unwrap();
        prop_assert!((dd - f.derivative(1, 0.0)).abs() <= 1e-12 * (1.0 + a.abs() + b.abs()));
    }

    #[test]
    fn close_pairs_are_rejected(f in any_member(), x in 0.0..0.999f64, gap in 0.0..1e-3f64) {
        prop_assert!(divided_difference(&f, x, x + gap * 0.999, 1e-3).is_err());
    }

    #[test]
    fn modulus_lower_is_monotone_in_delta(
        f in any_member(),
        order in 0usize..=2,
        d1 in 0.0..=1.2f64,
        d2 in 0.0..=1.2f64,
    ) {
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let grid = GridSpec::verification();
        let h = |t: f64| f.derivative(order, t);
        prop_assert!(modulus_lower(h, lo, &grid).unwrap() <= modulus_lower(h, hi, &grid).unwrap());
    }

    #[test]
    fn bernstein_weights_are_a_partition_of_unity(n in 1usize..=256, x in 0.0..=1.0f64) {
        let s: f64 = (0..=n).map(|k| bernstein_basis(n, k, x).unwrap()).sum();
        prop_assert!((s - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn operator_respects_range(f in any_member(), n in 1usize..=256, x in 0.0..=1.0f64) {
        // every corpus member is monotone on [0,1], so the extremes sit at the endpoints
        let (a, b) = (f.value(0.0), f.value(1.0));
        let (lo, hi) = (a.min(b), a.max(b));
        let v = kantorovich_apply(&f, n, x, &QuadratureRule::default()).unwrap().value;
        prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12, "{} at n={} x={}: {}", f, n, x, v);
        if lo >= 0.0 {
            prop_assert!(v >= -1e-14);
        }
    }

    #[test]
    fn operator_is_linear(
        f in any_member(),
        g in any_member(),
        a in -3.0..3.0f64,
        b in -3.0..3.0f64,
        n in 1usize..=200,
        x in 0.0..=1.0f64,
    ) {
        let rule = QuadratureRule::default();
        let op = KantorovichOperator::new(n, &rule).unwrap();
        let combined = op.apply_fn(|t| a * f.value(t) + b * g.value(t), x).unwrap();
        let separate = a * op.apply(&f, x).unwrap().value + b * op.apply(&g, x).unwrap().value;
        prop_assert!((combined - separate).abs() <= 1e-12);
    }

    #[test]
    fn e_n_splits_into_f_n_and_drift(n in 1usize..=4096, x in 0.0..=1.0f64, y in 0.0..=1.0f64) {
        prop_assert_eq!(e_n(n, x, x) - f_n(n, x), 0.0);
        let drift = (x - y) * (1.0 - 2.0 * x) / (2.0 * (n as f64 + 1.0));
        prop_assert!((e_n(n, x, y) - f_n(n, x) - drift).abs() <= 1e-16);
    }

    #[test]
    fn f_n_is_nonnegative_and_bounded(n in 1usize..=4096, x in 0.0..=1.0f64) {
        let v = f_n(n, x);
        let nf = n as f64;
        prop_assert!(v >= 0.0);
        prop_assert!(v <= (0.25 * (nf - 1.0) + 1.0 / 3.0) / ((nf + 1.0) * (nf + 1.0)) * (1.0 + 1e-15));
    }

    #[test]
    fn affine_pairs_attain_the_estimate(
        a in -4.0..4.0f64, b in -4.0..4.0f64, c in -4.0..4.0f64, d in -4.0..4.0f64,
        n in 1usize..=300,
        (x, y) in admissible_pair(),
    ) {
        let rule = QuadratureRule::default();
        let est = default_estimator(&rule);
        let (f, g) = (SmoothFunction::affine(a, b), SmoothFunction::affine(c, d));
        let lhs = est.theorem_lhs(&f, &g, n, x, y).unwrap();
        let rhs = est.theorem_rhs(&f, &g, n, x, y).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9);
        let nf = n as f64;
        let closed = (a * c).abs() * (1.0 - 2.0 * x).powi(2) / (4.0 * (nf + 1.0) * (nf + 1.0));
        prop_assert!((lhs - closed).abs() <= 1e-12);
    }

    #[test]
    fn perturbed_lhs_is_within_triangle_bound(
        f in any_member(),
        g in any_member(),
        n in 1usize..=128,
        (x, y) in admissible_pair(),
    ) {
        let rule = QuadratureRule::default();
        let est = default_estimator(&rule);
        let p = est.perturbed_gruss_lhs(&f, &g, n, x, y).unwrap();
        let t = est.theorem_lhs(&f, &g, n, x, y).unwrap();
        let shift = f_n(n, x) * (f.derivative(1, x) * g.derivative(1, x)).abs();
        prop_assert!(p <= t + shift + 1e-12);
    }

    #[test]
    fn upper_moduli_never_lower_the_rhs(
        f in any_member(),
        g in any_member(),
        n in 1usize..=128,
        (x, y) in admissible_pair(),
    ) {
        let rule = QuadratureRule::default();
        let lower = default_estimator(&rule);
        let upper = GrussEstimator::new(
            &rule,
            GridSpec::verification(),
            EstimateConfig::new(1e-9, OmegaMode::Upper, NormMode::GridLower).unwrap(),
        );
        let rl = lower.theorem_rhs(&f, &g, n, x, y).unwrap();
        let ru = upper.theorem_rhs(&f, &g, n, x, y).unwrap();
        prop_assert!(ru >= rl);
        let analytic = GrussEstimator::new(
            &rule,
            GridSpec::verification(),
            EstimateConfig::new(1e-9, OmegaMode::Upper, NormMode::AnalyticUpper).unwrap(),
        );
        prop_assert!(analytic.theorem_rhs(&f, &g, n, x, y).unwrap() >= ru);
    }

    #[test]
    fn fit_recovers_power_laws(p in -3.0..1.0f64, c in 1e-3..1e3f64, start in 1usize..=16) {
        let points: Vec<SweepPoint> = (0..8)
            .map(|i| {
                let n = start << i;
                SweepPoint { n, sup_value: c * (n as f64).powf(p) }
            })
            .collect();
        match fit_rate(&points).unwrap() {
            RateFit::PowerLaw { slope, intercept, r_squared } => {
                prop_assert!((slope - p).abs() <= 1e-12);
                prop_assert!((intercept - c.ln()).abs() <= 1e-10);
                prop_assert!(r_squared > 1.0 - 1e-12);
            }
            other => prop_assert!(false, "{:?}", other),
        }
    }
}

#[test]
fn partition_of_unity_on_the_dense_grid() {
    let grid = GridSpec::dense();
    (1..=256usize).into_par_iter().for_each(|n| {
        for x in grid.points() {
            let s: f64 = bernstein_weights(n, x).unwrap().iter().sum();
            assert!((s - 1.0).abs() <= 1e-12, "n={n} x={x}");
        }
    });
}

#[test]
fn moduli_bracket_each_other() {
    let grid = GridSpec::verification();
    for f in corpus() {
        for delta in [0.01, 0.1, 0.5, 1.0] {
            let lo = modulus_lower(|t| f.value(t), delta, &grid).unwrap();
            let hi = modulus_upper(&f, delta).unwrap();
            assert!(lo <= hi + 1e-12, "{f} δ={delta}: {lo} > {hi}");
        }
        assert!(sup_norm_lower(|t| f.value(t), &GridSpec::dense()) <= f.norm_bound(0));
    }
}

#[test]
fn gv_residual_is_symmetric() {
    let rule = QuadratureRule::default();
    let grid = GridSpec::verification();
    let members = corpus();
    for (i, f) in members.iter().enumerate() {
        for g in &members[i + 1..] {
            for n in [1, 7, 64, 500] {
                let a = gv_residual_sup(f, g, n, &grid, &rule).unwrap();
                let b = gv_residual_sup(g, f, n, &grid, &rule).unwrap();
                assert!((a - b).abs() <= 1e-12, "{f},{g} n={n}");
            }
        }
    }
}

fn all_pairs() -> Vec<(SmoothFunction, SmoothFunction)> {
    let m = corpus();
    let mut out = Vec::new();
    for i in 0..m.len() {
        for j in i..m.len() {
            out.push((m[i].clone(), m[j].clone()));
        }
    }
    out
}

/// Largest `n^α v_n / (8^α v_8)` over `n = 16..1024`, `None` for a zero series.
fn scaled_growth(values: &[(usize, f64)], alpha: f64) -> Option<f64> {
    let (n0, v0) = values[0];
    if v0 <= 1e-12 {
        return None;
    }
    let base = (n0 as f64).powf(alpha) * v0;
    Some(
        values[1..]
            .iter()
            .map(|&(n, v)| (n as f64).powf(alpha) * v / base)
            .fold(0.0, f64::max),
    )
}

#[test]
fn theorem_holds_for_every_corpus_pair() {
    let rule = QuadratureRule::default();
    let est = default_estimator(&rule);
    all_pairs().par_iter().for_each(|(f, g)| {
        for n in [1, 2, 4, 8, 16, 32, 64] {
            let report = est.check_theorem(f, g, n).unwrap();
            assert!(
                report.all_pass(),
                "{f},{g} n={n}: min slack {:?}",
                report.min_slack()
            );
        }
    });
}

#[test]
fn scaled_gv_residual_stays_bounded() {
    let rule = QuadratureRule::default();
    let grid = GridSpec::dense();
    all_pairs().par_iter().for_each(|(f, g)| {
        let values: Vec<(usize, f64)> = (3..=10)
            .map(|p| {
                let n = 1usize << p;
                (n, gv_residual_sup(f, g, n, &grid, &rule).unwrap())
            })
            .collect();
        if let Some(r) = scaled_growth(&values, 0.5) {
            assert!(r <= 1.05, "{f},{g}: √n·gv grows by {r}");
        }
    });
}

// `n · gruss_norm_sup` converges upward to `sup x(1-x)|f'g'|` for pairs with
// nonvanishing first derivatives, so its value at n = 8 sits about 20% below
// the limit and the 5% headroom is exceeded although the sequence is
// bounded. Kept as written; run with `--ignored` to see the ratios.
#[test]
#[ignore = "n·gruss_norm rises about 22% from n = 8 to its limit; see the ledger note on O(1/n) boundedness"]
fn scaled_gruss_norm_stays_within_five_percent() {
    let rule = QuadratureRule::default();
    let grid = GridSpec::dense();
    let failures: Vec<String> = all_pairs()
        .par_iter()
        .filter_map(|(f, g)| {
            let values: Vec<(usize, f64)> = (3..=10)
                .map(|p| {
                    let n = 1usize << p;
                    (n, gruss_norm_sup(f, g, n, &grid, &rule).unwrap())
                })
                .collect();
            match scaled_growth(&values, 1.0) {
                Some(r) if r > 1.05 => Some(format!("{f},{g}: {r:.4}")),
                _ => None,
            }
        })
        .collect();
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn scaled_gruss_norm_is_bounded_by_its_limit() {
    // The boundedness that does hold: n·gruss_norm ≤ sup x(1-x)|f'g'| + C/n.
    let rule = QuadratureRule::default();
    let grid = GridSpec::dense();
    all_pairs().par_iter().for_each(|(f, g)| {
        let limit = grid
            .points()
            .into_iter()
            .map(|x| x * (1.0 - x) * (f.derivative(1, x) * g.derivative(1, x)).abs())
            .fold(0.0, f64::max);
        let scale = f.norm_bound(0) * g.norm_bound(0)
            + f.norm_bound(1) * g.norm_bound(1)
            + f.norm_bound(2) * g.norm_bound(2);
        for p in 3..=10 {
            let n = 1usize << p;
            let v = n as f64 * gruss_norm_sup(f, g, n, &grid, &rule).unwrap();
            assert!(
                v <= limit + 2.0 * scale / n as f64,
                "{f},{g} n={n}: {v} vs {limit}"
            );
        }
    });
}

//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs without the libtest harness so the lines are always
//! printed.

use std::path::Path;
use std::time::{Duration, Instant};

use kantorovich_gruss::{
    cli, corpus, default_rate_degrees, gruss_norm_sup, gv_residual_sup, kantorovich_apply,
    kantorovich_moment_exact, lookup, nfn_limit_residual, run_sweep, EstimateConfig, GridSpec,
    GrussEstimator, QuadratureRule, Residual, SmoothFunction,
};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn timed(limit: Option<Duration>, body: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = body();
    let elapsed = start.elapsed();
    out.detail = format!("{} [{:.2}s]", out.detail, elapsed.as_secs_f64());
    if let Some(limit) = limit {
        if elapsed >= limit {
            out.pass = false;
            out.detail = format!("{} exceeds {}s", out.detail, limit.as_secs());
        }
    }
    out
}

const POWERS_TO_64: [usize; 7] = [1, 2, 4, 8, 16, 32, 64];
const SWEEP_MEMBERS: [&str; 7] = ["e_2", "e_3", "exp", "sin", "cos", "1/(1+x)", "x*exp(-x)"];

fn sweep_pairs() -> Vec<(SmoothFunction, SmoothFunction)> {
    let m: Vec<SmoothFunction> = SWEEP_MEMBERS.iter().map(|s| lookup(s).unwrap()).collect();
    let mut pairs = Vec::new();
    for i in 0..m.len() {
        for j in i..m.len() {
            pairs.push((m[i].clone(), m[j].clone()));
        }
    }
    pairs
}

fn affine_equality() -> Outcome {
    let rule = QuadratureRule::default();
    let est = GrussEstimator::new(&rule, GridSpec::verification(), EstimateConfig::default());
    let (f, g) = (
        lookup("affine(2,1)").unwrap(),
        lookup("affine(-1,0.5)").unwrap(),
    );
    let slope_product = (f.derivative(1, 0.0) * g.derivative(1, 0.0)).abs();
    let (mut worst_gap, mut worst_closed, mut count) = (0.0f64, 0.0f64, 0usize);
    for n in [1usize, 2, 10, 100] {
        let report = est.check_theorem(&f, &g, n).unwrap();
        let nf = n as f64;
        for r in &report.records {
            let closed = slope_product * (1.0 - 2.0 * r.x).powi(2) / (4.0 * (nf + 1.0).powi(2));
            worst_gap = worst_gap.max((r.lhs - r.rhs).abs());
            worst_closed = worst_closed
                .max((r.lhs - closed).abs())
                .max((r.rhs - closed).abs());
            count += 1;
        }
    }
    Outcome::new(
        worst_gap <= 1e-9 && worst_closed <= 1e-10 && count > 0,
        format!("{count} pairs, max |lhs-rhs| = {worst_gap:.2e}, max closed-form error = {worst_closed:.2e}"),
    )
}

fn soundness_sweep(perturbed: bool) -> Outcome {
    let rule = QuadratureRule::default();
    let grid = GridSpec::new(33, 1e-3).unwrap();
    let est = GrussEstimator::new(&rule, grid, EstimateConfig::default());
    let (mut total, mut passes, mut min_slack) = (0usize, 0usize, f64::INFINITY);
    for (f, g) in sweep_pairs() {
        for n in POWERS_TO_64 {
            let report = if perturbed {
                est.check_perturbed(&f, &g, n)
            } else {
                est.check_theorem(&f, &g, n)
            }
            .unwrap();
            total += report.records.len();
            passes += report.passes();
            if let Some(s) = report.min_slack() {
                min_slack = min_slack.min(s);
            }
        }
    }
    Outcome::new(
        total > 0 && passes == total,
        format!("{passes}/{total} checks pass over 28 pairs, min slack {min_slack:.3e}"),
    )
}

fn ah_bound() -> Outcome {
    let rule = QuadratureRule::default();
    let est = GrussEstimator::new(&rule, GridSpec::dense(), EstimateConfig::default());
    let (mut total, mut passes) = (0usize, 0usize);
    for h in corpus() {
        for n in POWERS_TO_64 {
            let records = est.ah_bound_check(&h, n).unwrap();
            total += records.len();
            passes += records.iter().filter(|r| r.pass).count();
        }
    }
    Outcome::new(
        passes == total,
        format!(
            "{passes}/{total} grid points within the bound, {} members",
            corpus().len()
        ),
    )
}

fn moment_equivalence() -> Outcome {
    let rule = QuadratureRule::default();
    let grid = GridSpec::verification();
    let mut worst = 0.0f64;
    for j in 0..=2u32 {
        let e = SmoothFunction::monomial(j);
        for n in 1..=128usize {
            for x in grid.points() {
                let quad = kantorovich_apply(&e, n, x, &rule).unwrap().value;
                let exact = kantorovich_moment_exact(j, n, x).unwrap();
                worst = worst.max((quad - exact).abs());
            }
        }
    }
    Outcome::new(worst <= 1e-12, format!("max deviation {worst:.2e}"))
}

fn rate_claims() -> Outcome {
    let rule = QuadratureRule::default();
    let grid = GridSpec::dense();
    let ns = default_rate_degrees();
    let (f, g) = (lookup("exp").unwrap(), lookup("sin").unwrap());

    let gruss = run_sweep(Residual::Gruss(&f, &g), &ns, &grid, &rule).unwrap();
    let gruss_ratio = gruss.max_scaled_ratio(1.0).unwrap();
    let gruss_slope = gruss.fit.slope().unwrap();
    let a = gruss_ratio <= 1.05 && gruss_slope <= -0.9;

    let gv = run_sweep(Residual::Gv(&f, &g), &ns, &grid, &rule).unwrap();
    let gv_ratio = gv.max_scaled_ratio(0.5).unwrap();
    let b = gv_ratio <= 1.05;

    let nfn = run_sweep(Residual::Nfn, &ns, &grid, &rule).unwrap();
    let nfn_slope = nfn.fit.slope().unwrap();
    let nfn_one = nfn_limit_residual(1, &grid);
    let c = nfn_slope <= -0.9 && (nfn_one - 1.0 / 6.0).abs() <= 1e-12;

    let mark = |ok: bool| if ok { "ok" } else { "FAIL" };
    Outcome::new(
        a && b && c,
        format!(
            "(a) {}: max n*gruss ratio {gruss_ratio:.4} (limit 1.05), slope {gruss_slope:.4}; \
             (b) {}: max sqrt(n)*gv ratio {gv_ratio:.4}; \
             (c) {}: nfn slope {nfn_slope:.4}, nfn(1) = {nfn_one:.17}",
            mark(a),
            mark(b),
            mark(c)
        ),
    )
}

fn closed_form_points() -> Outcome {
    let rule = QuadratureRule::default();
    let grid = GridSpec::dense();
    let e1 = lookup("e1").unwrap();
    let mut worst = 0.0f64;
    for n in [1usize, 9, 99] {
        let nf = n as f64;
        let closed = (5.0 * nf + 3.0) / (12.0 * (nf + 1.0) * (nf + 1.0));
        worst = worst.max((gv_residual_sup(&e1, &e1, n, &grid, &rule).unwrap() - closed).abs());
    }
    let g1 = gruss_norm_sup(&e1, &e1, 1, &grid, &rule).unwrap();
    worst = worst.max((g1 - 1.0 / 12.0).abs());
    Outcome::new(worst <= 1e-10, format!("max deviation {worst:.2e}"))
}

/// Criterion 2's sweep through the command-line entry points, one
/// `verify` invocation per pair, each writing its own CSV file.
fn run_verify_sweep(dir: &Path) -> Result<Vec<Vec<u8>>, String> {
    let n_list = POWERS_TO_64.map(|n| n.to_string()).join(",");
    let mut files = Vec::new();
    for (i, (f, g)) in sweep_pairs().iter().enumerate() {
        let out = dir.join(format!("pair{i}.csv"));
        let out_arg = out.to_str().ok_or("non-UTF-8 temp path")?;
        let args = [
            "kgruss",
            "verify",
            "-f",
            f.name(),
            "-g",
            g.name(),
            "-n",
            &n_list,
            "--grid",
            "33",
            "--pair-floor",
            "1e-3",
            "--tau",
            "1e-9",
            "--omega",
            "lower",
            "--norm",
            "grid",
            "--format",
            "csv",
            "-o",
            out_arg,
        ];
        let config = cli::parse_config(args).map_err(|e| e.to_string())?;
        let summary = cli::run(&config).map_err(|e| e.to_string())?;
        if !summary.all_passed() {
            return Err(format!(
                "{f},{g}: {} of {} checks pass",
                summary.passes, summary.total_checks
            ));
        }
        files.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    Ok(files)
}

fn determinism() -> Outcome {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    match (
        run_verify_sweep(first.path()),
        run_verify_sweep(second.path()),
    ) {
        (Ok(a), Ok(b)) => {
            let bytes: usize = a.iter().map(Vec::len).sum();
            let same = a == b;
            Outcome::new(
                same && bytes > 0,
                format!(
                    "{} CSV files, {bytes} bytes per run, identical: {same}",
                    a.len()
                ),
            )
        }
        (Err(e), _) | (_, Err(e)) => Outcome::new(false, format!("run failed: {e}")),
    }
}

/// Name, optional runtime limit in seconds, and the check itself.
type Criterion = (&'static str, Option<u64>, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("affine equality", Some(5), affine_equality),
        ("theorem soundness sweep", Some(60), || {
            soundness_sweep(false)
        }),
        ("perturbed soundness sweep", None, || soundness_sweep(true)),
        (
            "first-order approximation bound on the dense grid",
            None,
            ah_bound,
        ),
        ("moment oracle equivalence", None, moment_equivalence),
        ("rate claims", Some(30), rate_claims),
        ("closed-form regression points", None, closed_form_points),
        ("determinism of the verify CSV", None, determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, body)) in criteria.into_iter().enumerate() {
        let out = timed(limit.map(Duration::from_secs), body);
        if !out.pass {
            failed += 1;
        }
        println!(
            "{} criterion {}: {name}: {}",
            if out.pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail
        );
    }
    println!("acceptance: {} of 8 criteria pass", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

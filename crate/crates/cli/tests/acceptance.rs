//! Acceptance criteria 1-10, one line each. Exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use fraclog::analysis::{
    blowup_bracket, decay_envelope, fit_blowup_profile, profile_coefficient, sandwich_tolerance, sandwich_violation,
    BoundBracket, EnvelopeConstants, ProfileWindow,
};
use fraclog::csv::read_trajectory;
use fraclog::oracle::{caputo_residual, ml_reference, ml_series_highprec, pece_solve, MIN_DIGITS, SERIES_RADIUS};
use fraclog::quadrature::{cq_weights, KernelBranch, KernelSpec};
use fraclog::solver::{solve, Nonlinearity, ProblemSpec, Scheme, Status, Trajectory};
use fraclog::special::{mittag_leffler, mittag_leffler_two};
use fraclog::Result;
use fraclog_cli::execute;
use fraclog_cli::validate::{gl_weight_error, max_gap, ml_samples, residual_constant};

const ALPHAS: [f64; 3] = [0.3, 0.5, 0.7];
const BLOWUP_U0: [f64; 4] = [1.5, 2.0, 3.0, 5.0];
const GLOBAL_U0: [f64; 3] = [0.1, 0.5, 0.9];

type Criterion = fn() -> Result<Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn logistic(alpha: f64, u0: f64, h: f64, t_max: f64) -> Result<ProblemSpec> {
    ProblemSpec::new(alpha, u0, Nonlinearity::Logistic, h, t_max)
}

fn blowup_spec(alpha: f64, u0: f64) -> Result<ProblemSpec> {
    logistic(alpha, u0, 1e-4, 2.0 * blowup_bracket(alpha, u0)?.upper)
}

fn within_time(start: Instant, limit: f64) -> (bool, f64) {
    let secs = start.elapsed().as_secs_f64();
    (secs < limit, secs)
}

fn c1_ml_accuracy() -> Result<Outcome> {
    let start = Instant::now();
    let mut worst = (0.0, 0.0, 0.0, 0.0);
    for (alpha, beta, z) in ml_samples(200) {
        let v = if beta == 1.0 { mittag_leffler(alpha, z)? } else { mittag_leffler_two(alpha, beta, z)? };
        let r = if z.abs() <= SERIES_RADIUS {
            ml_series_highprec(alpha, beta, z, MIN_DIGITS)?
        } else {
            ml_reference(alpha, beta, z)?
        };
        // Absolute on the negative axis; relative once E grows past 1.
        let err = (v - r).abs() / r.abs().max(1.0);
        if err > worst.0 {
            worst = (err, alpha, beta, z);
        }
    }
    let (fast, secs) = within_time(start, 10.0);
    let (err, a, b, z) = worst;
    outcome(
        err <= 1e-10 && fast,
        format!("max err {err:.2e} <= 1e-10 (at α={a}, β={b}, z={z:.3}); {secs:.2} s < 10 s"),
    )
}

fn c2_bracket_containment() -> Result<Outcome> {
    let start = Instant::now();
    let mut misses = Vec::new();
    for alpha in ALPHAS {
        for u0 in BLOWUP_U0 {
            let bracket = blowup_bracket(alpha, u0)?;
            let t = solve(&blowup_spec(alpha, u0)?)?.blowup_time();
            if !t.is_some_and(|t| bracket.contains(t)) {
                misses.push(format!("(α={alpha}, u0={u0}) t={t:?} not in [{}, {}]", bracket.lower, bracket.upper));
            }
        }
    }
    let (fast, secs) = within_time(start, 60.0);
    outcome(
        misses.is_empty() && fast,
        format!("{}/12 inside; {secs:.2} s < 60 s {}", 12 - misses.len(), misses.join("; ")),
    )
}

fn global_run(alpha: f64, u0: f64, scheme: Scheme) -> Result<(ProblemSpec, Trajectory)> {
    let spec = logistic(alpha, u0, 1e-3, 20.0)?.with_scheme(scheme);
    let traj = solve(&spec)?;
    Ok((spec, traj))
}

fn c3_global_dichotomy() -> Result<Outcome> {
    let start = Instant::now();
    let mut problems = Vec::new();
    for alpha in ALPHAS {
        let consts = EnvelopeConstants::for_alpha(alpha)?;
        for u0 in GLOBAL_U0 {
            let (_, traj) = global_run(alpha, u0, Scheme::SemiImplicit)?;
            let case = format!("(α={alpha}, u0={u0})");
            if traj.status != Status::Completed {
                problems.push(format!("{case} status {:?}", traj.status));
            }
            if !traj.values.iter().all(|&v| v > 0.0 && v < 1.0) {
                problems.push(format!("{case} leaves (0, 1)"));
            }
            if traj.values.windows(2).any(|w| w[1] > w[0]) {
                problems.push(format!("{case} not monotone"));
            }
            let above = traj.times.iter().zip(&traj.values).any(|(&t, &v)| {
                decay_envelope(alpha, u0, &consts, t).is_ok_and(|e| v > e * (1.0 + 4.0 * f64::EPSILON))
            });
            if above {
                problems.push(format!("{case} above envelope"));
            }
        }
    }
    let (fast, secs) = within_time(start, 30.0);
    outcome(
        problems.is_empty() && fast,
        format!("9 runs, {} problems; {secs:.2} s < 30 s {}", problems.len(), problems.join("; ")),
    )
}

fn c4_sandwich() -> Result<Outcome> {
    let start = Instant::now();
    let (alpha, u0, h) = (0.5, 2.0, 1e-4);
    let spec = logistic(alpha, u0, h, 2.0 * blowup_bracket(alpha, u0)?.upper)?;
    let u = solve(&spec)?;
    let lower = solve(&ProblemSpec { nonlinearity: Nonlinearity::Square, u0: u0 - 1.0, ..spec })?;
    let upper = solve(&ProblemSpec { nonlinearity: Nonlinearity::ShiftedSquare, u0: u0 - 1.0, ..spec })?;
    let v = sandwich_violation(&u, &lower, &upper);
    let tol = sandwich_tolerance(alpha, h);
    let (fast, secs) = within_time(start, 10.0);
    outcome(v <= tol && fast, format!("violation {v:.3e} <= 5h^α = {tol:.3e}; {secs:.2} s < 10 s"))
}

fn c5_logistic_limit() -> Result<Outcome> {
    let (alpha, h) = (0.999, 1e-3);
    let exact = |t: f64| 0.5 / (0.5 + 0.5 * t.exp());
    let ln2 = std::f64::consts::LN_2;
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, method) in [("solve", solve as fn(&ProblemSpec) -> Result<Trajectory>), ("pece", pece_solve)] {
        let decay = method(&logistic(alpha, 0.5, h, 3.0)?)?;
        let err = decay.times.iter().zip(&decay.values).map(|(&t, &v)| (v - exact(t)).abs()).fold(0.0, f64::max);
        let t = method(&logistic(alpha, 2.0, h, 3.0)?)?.blowup_time();
        let rel = t.map_or(f64::INFINITY, |t| (t - ln2).abs() / ln2);
        pass &= err <= 1e-2 && rel <= 0.05;
        parts.push(format!("{name}: decay err {err:.2e} <= 1e-2, T={} ({:.1}% of ln 2, <= 5%)", t.unwrap_or(f64::NAN), 100.0 * rel));
    }
    outcome(pass, parts.join("; "))
}

fn c6_weights() -> Result<Outcome> {
    let start = Instant::now();
    let mut gl = 0.0f64;
    for alpha in ALPHAS {
        gl = gl.max(gl_weight_error(alpha, 0.01, 1000)?);
    }
    let (alpha, h) = (0.5, 0.01f64);
    let n = (10.0 / h).round() as usize;
    let sums = cq_weights(&KernelSpec::new(KernelBranch::Decay, alpha, h)?, n)?.partial_sums();
    let max = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let last = sums[n];
    let (fast, secs) = within_time(start, 5.0);
    outcome(
        gl <= 1e-10 && max <= 1.0 + 1e-8 && last > 0.9 && fast,
        format!(
            "GL err {gl:.2e} <= 1e-10; decay sums max {max:.6} <= 1+1e-8; sum at n={n} is {last:.6} > 0.9; {secs:.2} s < 5 s"
        ),
    )
}

fn c7_residual() -> Result<Outcome> {
    let h = 1e-3;
    let traj = solve(&logistic(0.5, 0.5, h, 2.0)?)?;
    let max = caputo_residual(&traj, 0.5)?.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let c = residual_constant(Scheme::SemiImplicit);
    let bound = c * h.sqrt();
    outcome(max <= bound, format!("max |residual| {max:.4e} <= {c}·h^0.5 = {bound:.4e}"))
}

fn c8_profile() -> Result<Outcome> {
    let h = 1e-5;
    let mut pass = true;
    let mut parts = Vec::new();
    for alpha in ALPHAS {
        let upper = fraclog::analysis::comparison_brackets(alpha, 1.0)?.0.upper;
        let spec = ProblemSpec::new(alpha, 1.0, Nonlinearity::Square, h, 2.0 * upper)?.with_scheme(Scheme::Picard);
        let traj = solve(&spec)?;
        let expected = profile_coefficient(alpha)?;
        match fit_blowup_profile(&traj, alpha, 0.0, &ProfileWindow::default()) {
            Ok(fit) => {
                let rel = (fit.coeff / expected - 1.0).abs();
                pass &= rel <= 0.25;
                parts.push(format!("α={alpha}: {:.4} vs {expected:.6} ({:.1}%)", fit.coeff, 100.0 * rel));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("α={alpha}: {e}"));
            }
        }
    }
    outcome(pass, format!("within 25%: {}", parts.join("; ")))
}

/// Run `fraclog figure --figure id` and parse each series.
fn figure_series(id: u8) -> Vec<(f64, f64, Trajectory)> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = execute(["fraclog", "figure", "--figure", &id.to_string()], &mut out, &mut err);
    assert_eq!(code, 0, "{}", String::from_utf8_lossy(&err));
    String::from_utf8(out)
        .unwrap()
        .split("\n\n")
        .map(|block| {
            let parsed = read_trajectory(block.as_bytes()).unwrap();
            let get = |k: &str| parsed.meta.iter().find(|(key, _)| key == k).unwrap().1.parse::<f64>().unwrap();
            (get("alpha"), get("u0"), parsed.trajectory)
        })
        .collect()
}

fn c9_figures() -> Result<Outcome> {
    let mut problems = Vec::new();
    let mut times = Vec::new();
    for id in [1, 2] {
        let series = figure_series(id);
        let mut ts = Vec::new();
        for (alpha, u0, traj) in &series {
            let bracket: BoundBracket = blowup_bracket(*alpha, *u0)?;
            match traj.blowup_time() {
                Some(t) if bracket.contains(t) => ts.push(t),
                Some(t) => problems.push(format!("fig {id} (α={alpha}, u0={u0}) T={t} outside bracket")),
                None => problems.push(format!("fig {id} (α={alpha}, u0={u0}) no blow-up footer")),
            }
        }
        if ts.len() == series.len() {
            // Figure 1 lists u0 = 5, 3, 2; figure 2 lists α = 0.3, 0.5.
            if !ts.windows(2).all(|w| w[0] < w[1]) {
                problems.push(format!("fig {id} ordering {ts:?}"));
            }
        }
        times.push(format!("fig {id} T={ts:.4?}"));
    }
    outcome(problems.is_empty(), format!("{} {}", times.join(", "), problems.join("; ")))
}

fn c10_dual_method() -> Result<Outcome> {
    let scheme = Scheme::Picard;
    let mut worst_gap = 0.0f64;
    let mut gap_fail = 0;
    for alpha in ALPHAS {
        for u0 in GLOBAL_U0 {
            let (spec, traj) = global_run(alpha, u0, scheme)?;
            let gap = max_gap(&traj.values, &pece_solve(&spec)?.values);
            worst_gap = worst_gap.max(gap);
            if gap > sandwich_tolerance(alpha, spec.step) {
                gap_fail += 1;
            }
        }
    }
    let mut misses = Vec::new();
    for alpha in ALPHAS {
        for u0 in BLOWUP_U0 {
            let spec = blowup_spec(alpha, u0)?.with_scheme(scheme);
            let a = solve(&spec)?.blowup_time();
            let b = pece_solve(&spec)?.blowup_time();
            let rel = match (a, b) {
                (Some(a), Some(b)) => (a - b).abs() / b,
                _ => f64::INFINITY,
            };
            if rel > 0.1 {
                misses.push(format!("(α={alpha}, u0={u0}) {:.1}%", 100.0 * rel));
            }
        }
    }
    outcome(
        gap_fail == 0 && misses.is_empty(),
        format!(
            "global: {}/9 within 5h^α (worst gap {worst_gap:.2e}); blow-up: {}/12 within 10% {}",
            9 - gap_fail,
            12 - misses.len(),
            misses.join(", ")
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 10] = [
        ("mittag-leffler accuracy", c1_ml_accuracy),
        ("bracket containment", c2_bracket_containment),
        ("global dichotomy", c3_global_dichotomy),
        ("sandwich estimate", c4_sandwich),
        ("alpha -> 1 logistic limit", c5_logistic_limit),
        ("weight correctness", c6_weights),
        ("residual certification", c7_residual),
        ("profile recovery", c8_profile),
        ("figure reproduction", c9_figures),
        ("dual-method agreement", c10_dual_method),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!("acceptance {:>2} {name}: {} | {}", i + 1, if pass { "PASS" } else { "FAIL" }, detail.trim_end());
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

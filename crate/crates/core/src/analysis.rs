//! Closed-form bounds for the fractional logistic problem and checks of
//! computed trajectories against them.

use std::fmt;

use crate::solver::{detect_blowup, solve, BlowUpReport, Nonlinearity, ProblemSpec, Status, Trajectory};
use crate::special::gamma;
use crate::{Error, Result};

/// Interval known to contain a blow-up time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundBracket {
    pub lower: f64,
    pub upper: f64,
}

impl BoundBracket {
    pub fn contains(&self, t: f64) -> bool {
        self.lower <= t && t <= self.upper
    }
}

impl fmt::Display for BoundBracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lower={:.6} upper={:.6}", self.lower, self.upper)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// `(Γ(α+1)/x)^{1/α}`, the blow-up time scale of `D^α w = w²` started at `x`.
fn time_scale(alpha: f64, x: f64) -> Result<f64> {
    Ok((gamma(alpha + 1.0)? / x).powf(1.0 / alpha))
}

/// Bracket for the blow-up time of the logistic problem with `u0 > 1`.
pub fn blowup_bracket(alpha: f64, u0: f64) -> Result<BoundBracket> {
    check_alpha(alpha)?;
    if !(u0 > 1.0 && u0.is_finite()) {
        return Err(Error::domain(format!("blow-up needs u0 > 1, got {u0}")));
    }
    Ok(BoundBracket {
        lower: time_scale(alpha, 4.0 * (u0 - 0.5))?,
        upper: time_scale(alpha, u0 - 1.0)?,
    })
}

/// Brackets for the blow-up times of `w̄` (square) and `w̃` (shifted square)
/// started at `w0`.
pub fn comparison_brackets(alpha: f64, w0: f64) -> Result<(BoundBracket, BoundBracket)> {
    check_alpha(alpha)?;
    if !(w0 > 0.0 && w0.is_finite()) {
        return Err(Error::domain(format!("comparison problems need w0 > 0, got {w0}")));
    }
    let square = BoundBracket {
        lower: time_scale(alpha, 4.0 * w0)?,
        upper: time_scale(alpha, w0)?,
    };
    let shifted = BoundBracket {
        lower: time_scale(alpha, 4.0 * (w0 + 0.5))?,
        upper: time_scale(alpha, w0 + 0.5)?,
    };
    Ok((square, shifted))
}

/// Constants of the decay envelope `u ≤ 1/(1/(c u0) - (c1/α) t^α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeConstants {
    pub c: f64,
    pub c1: f64,
}

impl EnvelopeConstants {
    /// `c = 1`, `c1 = 1/Γ(α)`.
    pub fn for_alpha(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(EnvelopeConstants { c: 1.0, c1: 1.0 / gamma(alpha)? })
    }

    fn validate(&self) -> Result<()> {
        if self.c > 0.0 && self.c1 > 0.0 {
            Ok(())
        } else {
            Err(Error::domain("envelope constants must be positive"))
        }
    }
}

fn check_decay_start(u0: f64) -> Result<()> {
    if u0 > 0.0 && u0 < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("decay envelope needs 0 < u0 < 1, got {u0}")))
    }
}

/// Root `T0` of the envelope denominator.
pub fn envelope_horizon(alpha: f64, u0: f64, consts: &EnvelopeConstants) -> Result<f64> {
    check_alpha(alpha)?;
    check_decay_start(u0)?;
    consts.validate()?;
    Ok((alpha / (consts.c1 * consts.c * u0)).powf(1.0 / alpha))
}

/// Upper bound on a decaying solution, valid while its denominator is positive.
pub fn decay_envelope(alpha: f64, u0: f64, consts: &EnvelopeConstants, t: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_decay_start(u0)?;
    consts.validate()?;
    if !(t >= 0.0) {
        return Err(Error::domain(format!("time must be non-negative, got {t}")));
    }
    let d = 1.0 / (consts.c * u0) - consts.c1 / alpha * t.powf(alpha);
    if !(d > 0.0) {
        return Err(Error::domain(format!("envelope denominator {d} is not positive at t = {t}")));
    }
    Ok(1.0 / d)
}

/// Guaranteed existence time `min{T, (b Γ(α+1)/M)^{1/α}}` with `M` the largest
/// `|u(1-u)|` on `[u0 - b, u0 + b]`.
pub fn existence_horizon(alpha: f64, u0: f64, b: f64, t_cap: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(b > 0.0 && t_cap > 0.0) || !u0.is_finite() {
        return Err(Error::domain("existence horizon needs b > 0 and T > 0"));
    }
    let g = |u: f64| (u * (1.0 - u)).abs();
    let (lo, hi) = (u0 - b, u0 + b);
    let mut m = g(lo).max(g(hi));
    if lo <= 0.5 && 0.5 <= hi {
        m = m.max(0.25);
    }
    if m == 0.0 {
        return Ok(t_cap);
    }
    Ok(t_cap.min((b * gamma(alpha + 1.0)? / m).powf(1.0 / alpha)))
}

/// Amplitude `Γ(2α)/Γ(α)` of the blow-up profile `C (T - t)^{-α}`.
pub fn profile_coefficient(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(gamma(2.0 * alpha)? / gamma(alpha)?)
}

/// Blow-up time and amplitude fitted to `v - shift ≈ C (T - t)^{-α}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileFit {
    pub t_est: f64,
    pub coeff: f64,
    /// Root-mean-square residual of `ln(v - shift)`.
    pub rms_residual: f64,
}

/// Which part of a blown-up trajectory feeds the profile fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileWindow {
    /// Steps dropped just before the detection index, where the scheme's own
    /// error dominates.
    pub skip_last: usize,
    /// Steps used.
    pub len: usize,
    pub max_rms_residual: f64,
}

impl Default for ProfileWindow {
    fn default() -> Self {
        ProfileWindow { skip_last: 5, len: 30, max_rms_residual: 0.25 }
    }
}

const MIN_FIT_POINTS: usize = 5;

/// Least-squares fit of `ln(v - shift) = ln C - α ln(T - t)` over `T > t_last`.
pub fn fit_profile(times: &[f64], values: &[f64], alpha: f64, shift: f64, max_rms: f64) -> Result<ProfileFit> {
    check_alpha(alpha)?;
    if times.len() != values.len() {
        return Err(Error::Fit("times and values differ in length".into()));
    }
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(_, &v)| v - shift > 0.0 && v.is_finite())
        .map(|(&t, &v)| (t, (v - shift).ln()))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!("{} usable points, need {MIN_FIT_POINTS}", pts.len())));
    }
    let t_last = pts.iter().map(|p| p.0).fold(f64::MIN, f64::max);
    let t_first = pts.iter().map(|p| p.0).fold(f64::MAX, f64::min);
    let span = (t_last - t_first).max(f64::EPSILON * t_last.abs().max(1.0));

    // For fixed T the log-amplitude is a mean; search over x = ln(T - t_last).
    let eval = |x: f64| -> (f64, f64) {
        let gap = x.exp();
        let shifted: Vec<f64> = pts.iter().map(|&(t, y)| y + alpha * (t_last - t + gap).ln()).collect();
        let mean = shifted.iter().sum::<f64>() / shifted.len() as f64;
        let ss = shifted.iter().map(|r| (r - mean).powi(2)).sum::<f64>();
        (ss, mean)
    };

    let (lo, hi) = ((span * 1e-9).ln(), (span * 1e3).ln());
    let grid = 400;
    let (mut best, mut best_ss) = (lo, f64::INFINITY);
    for i in 0..=grid {
        let x = lo + (hi - lo) * i as f64 / grid as f64;
        let ss = eval(x).0;
        if ss < best_ss {
            best_ss = ss;
            best = x;
        }
    }
    let cell = (hi - lo) / grid as f64;
    let (mut a, mut b) = (best - cell, best + cell);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (eval(c).0, eval(d).0);
    while b - a > 1e-13 * (1.0 + best.abs()) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = eval(c).0;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = eval(d).0;
        }
    }
    let x = 0.5 * (a + b);
    let (ss, mean) = eval(x);
    let rms = (ss / pts.len() as f64).sqrt();
    if !(rms <= max_rms) {
        return Err(Error::Fit(format!("rms residual {rms:.3e} exceeds {max_rms:.3e}")));
    }
    Ok(ProfileFit { t_est: t_last + x.exp(), coeff: mean.exp(), rms_residual: rms })
}

/// Profile fit on the window before a trajectory's blow-up index.
pub fn fit_blowup_profile(traj: &Trajectory, alpha: f64, shift: f64, window: &ProfileWindow) -> Result<ProfileFit> {
    let Status::BlewUp(k) = traj.status else {
        return Err(Error::Fit("trajectory did not blow up".into()));
    };
    let end = k.saturating_sub(window.skip_last);
    let start = end.saturating_sub(window.len);
    fit_profile(
        &traj.times[start..end],
        &traj.values[start..end],
        alpha,
        shift,
        window.max_rms_residual,
    )
}

/// Profile shift and blow-up bracket for a problem started at `u0`.
fn blowup_geometry(nl: Nonlinearity, alpha: f64, u0: f64) -> Result<(f64, BoundBracket)> {
    match nl {
        Nonlinearity::Logistic => Ok((1.0, blowup_bracket(alpha, u0)?)),
        Nonlinearity::ShiftedLogistic => Ok((0.0, blowup_bracket(alpha, u0 + 1.0)?)),
        Nonlinearity::Square => Ok((0.0, comparison_brackets(alpha, u0)?.0)),
        Nonlinearity::ShiftedSquare => Ok((0.5, comparison_brackets(alpha, u0)?.1)),
    }
}

/// Detected blow-up with its theoretical bracket and a profile fit, when
/// each is available.
pub fn blowup_report(spec: &ProblemSpec, traj: &Trajectory) -> Option<BlowUpReport> {
    let mut report = detect_blowup(traj, spec.blowup_threshold)?;
    if let Ok((shift, bracket)) = blowup_geometry(spec.nonlinearity, spec.alpha, spec.u0) {
        report.bracket = Some(bracket);
        if let Ok(fit) = fit_blowup_profile(traj, spec.alpha, shift, &ProfileWindow::default()) {
            report.refined_t = Some(fit.t_est);
            report.coeff_est = Some(fit.coeff);
        }
    }
    Some(report)
}

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub bound: f64,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {:.6e} {:.6e}",
            self.name,
            if self.pass { "pass" } else { "fail" },
            self.measured,
            self.bound
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &str, pass: bool, measured: f64, bound: f64) {
        self.checks.push(Check { name: name.into(), pass, measured, bound });
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Sandwich slack `5 h^α`.
pub fn sandwich_tolerance(alpha: f64, step: f64) -> f64 {
    5.0 * step.powf(alpha)
}

/// Largest violation of `w̄_n + 1 ≤ u_n ≤ w̃_n + 1` over the steps before the
/// first blow-up of any of the three runs.
pub fn sandwich_violation(u: &Trajectory, lower: &Trajectory, upper: &Trajectory) -> f64 {
    let end = [u, lower, upper]
        .iter()
        .map(|t| match t.status {
            Status::BlewUp(k) | Status::AccuracyFailure(k) => k,
            Status::Completed => t.len(),
        })
        .min()
        .unwrap_or(0)
        .min(u.len())
        .min(lower.len())
        .min(upper.len());
    (0..end)
        .map(|n| {
            let below = lower.values[n] + 1.0 - u.values[n];
            let above = u.values[n] - upper.values[n] - 1.0;
            below.max(above)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Check one run against every bound that applies to it.
pub fn verify_run(spec: &ProblemSpec, traj: &Trajectory) -> Result<VerifyReport> {
    spec.validate()?;
    let mut report = VerifyReport::default();
    let min = traj.values.iter().copied().fold(f64::INFINITY, f64::min);
    report.push("positivity", min > 0.0, min, 0.0);
    if !matches!(traj.status, Status::AccuracyFailure(_)) {
        report.push("accuracy", true, 0.0, 0.0);
    } else {
        report.push("accuracy", false, 1.0, 0.0);
    }

    let alpha = spec.alpha;
    let u0 = spec.u0;
    if spec.nonlinearity == Nonlinearity::Logistic && u0 == 1.0 {
        return Ok(report);
    }
    if spec.nonlinearity == Nonlinearity::Logistic && u0 < 1.0 {
        report.push("completed", traj.status == Status::Completed, traj.len() as f64, (spec.steps() + 1) as f64);
        let max = traj.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        report.push("bounded_by_one", max < 1.0, max, 1.0);
        let consts = EnvelopeConstants::for_alpha(alpha)?;
        let excess = traj
            .times
            .iter()
            .zip(&traj.values)
            .filter_map(|(&t, &v)| {
                decay_envelope(alpha, u0, &consts, t)
                    .ok()
                    .map(|e| v - e * (1.0 + 4.0 * f64::EPSILON))
            })
            .fold(f64::NEG_INFINITY, f64::max);
        report.push("decay_envelope", excess <= 0.0, excess, 0.0);
        return Ok(report);
    }

    let (shift, bracket) = blowup_geometry(spec.nonlinearity, alpha, u0)?;
    match traj.blowup_time() {
        Some(t) => {
            let dist = (bracket.lower - t).max(t - bracket.upper);
            report.push("blowup_bracket", bracket.contains(t), t, if dist > 0.0 && t < bracket.lower { bracket.lower } else { bracket.upper });
            match fit_blowup_profile(traj, alpha, shift, &ProfileWindow::default()) {
                Ok(fit) => {
                    let rel = (fit.coeff / profile_coefficient(alpha)? - 1.0).abs();
                    report.push("profile_coefficient", rel <= 0.25, rel, 0.25);
                }
                Err(_) => report.push("profile_coefficient", false, f64::NAN, 0.25),
            }
        }
        None => report.push("blowup_bracket", false, f64::NAN, bracket.upper),
    }

    if spec.nonlinearity == Nonlinearity::Logistic {
        let w0 = u0 - 1.0;
        let lower = solve(&ProblemSpec { nonlinearity: Nonlinearity::Square, u0: w0, ..*spec })?;
        let upper = solve(&ProblemSpec { nonlinearity: Nonlinearity::ShiftedSquare, u0: w0, ..*spec })?;
        let tol = sandwich_tolerance(alpha, spec.step);
        let v = sandwich_violation(traj, &lower, &upper);
        report.push("sandwich", v <= tol, v, tol);
    }
    Ok(report)
}

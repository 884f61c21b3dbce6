//! Time marching for the fractional logistic equation and its comparison
//! problems.
//!
//! Every problem is written as a Volterra equation
//!
//! ```text
//! v(t) = H(t) + ∫_0^t K(t - s) f(v(s)) ds,    f(v) = (v + c)²
//! ```
//!
//! and discretized by backward Euler convolution quadrature. With
//! `A_n = H_n + Σ_{j<n} ω_{n-j} f(v_j)` the semi-implicit step is
//! `v_n = A_n / (1 - ω_0)`; the Picard step solves `v_n = A_n + ω_0 f(v_n)`
//! exactly.

use std::fmt;
use std::str::FromStr;

use crate::analysis::BoundBracket;
use crate::quadrature::{cq_weights, KernelBranch, KernelSpec};
use crate::special::mittag_leffler;
use crate::{Error, Result};

/// Right-hand side of the Caputo equation `D^α v = rhs(v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Nonlinearity {
    /// `-u(1 - u)`
    Logistic,
    /// `w(1 + w)`
    ShiftedLogistic,
    /// `w²`
    Square,
    /// `(w + ½)²`
    ShiftedSquare,
}

impl Nonlinearity {
    pub const ALL: [Nonlinearity; 4] = [
        Nonlinearity::Logistic,
        Nonlinearity::ShiftedLogistic,
        Nonlinearity::Square,
        Nonlinearity::ShiftedSquare,
    ];

    /// Kernel of the Volterra form.
    pub fn branch(self) -> KernelBranch {
        match self {
            Nonlinearity::Logistic => KernelBranch::Decay,
            Nonlinearity::ShiftedLogistic => KernelBranch::Growth,
            Nonlinearity::Square | Nonlinearity::ShiftedSquare => KernelBranch::RiemannLiouville,
        }
    }

    /// Offset `c` in the forcing `(v + c)²`.
    pub fn offset(self) -> f64 {
        match self {
            Nonlinearity::ShiftedSquare => 0.5,
            _ => 0.0,
        }
    }

    /// Forcing term under the convolution.
    pub fn forcing(self, v: f64) -> f64 {
        let y = v + self.offset();
        y * y
    }

    /// Right-hand side of the differential form.
    pub fn rhs(self, v: f64) -> f64 {
        match self {
            Nonlinearity::Logistic => -v * (1.0 - v),
            Nonlinearity::ShiftedLogistic => v * (1.0 + v),
            Nonlinearity::Square => v * v,
            Nonlinearity::ShiftedSquare => (v + 0.5) * (v + 0.5),
        }
    }
}

impl fmt::Display for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Nonlinearity::Logistic => "logistic",
            Nonlinearity::ShiftedLogistic => "shifted-logistic",
            Nonlinearity::Square => "square",
            Nonlinearity::ShiftedSquare => "shifted-square",
        })
    }
}

impl FromStr for Nonlinearity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Nonlinearity::ALL
            .into_iter()
            .find(|n| n.to_string() == s)
            .ok_or_else(|| Error::domain(format!("unknown problem {s:?}")))
    }
}

/// How the implicit `ω_0 f(v_n)` term is treated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Square the history only and divide by `1 - ω_0`.
    #[default]
    SemiImplicit,
    /// Solve the scalar quadratic at every step.
    Picard,
}

/// Source of the homogeneous term `H_n`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum Homogeneous {
    /// `u_0 (1 ∓ Σ_{j≤n} ω_j)`, the quadrature of `E_α(∓t^α)`.
    ///
    /// Consistent with the weights, so `u ≡ 1` stays an exact fixed point.
    #[default]
    Discrete,
    /// `u_0 E_α(∓t_n^α)` evaluated at every step.
    MittagLeffler,
}

/// One run of the marching scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    pub alpha: f64,
    /// Initial value of the unknown being marched (`u_0` or `w_0`).
    pub u0: f64,
    pub nonlinearity: Nonlinearity,
    pub step: f64,
    pub t_max: f64,
    pub blowup_threshold: f64,
    pub scheme: Scheme,
    pub homogeneous: Homogeneous,
}

impl ProblemSpec {
    pub const DEFAULT_THRESHOLD: f64 = 1e10;

    /// A validated spec with the default threshold, scheme and homogeneous term.
    pub fn new(alpha: f64, u0: f64, nonlinearity: Nonlinearity, step: f64, t_max: f64) -> Result<Self> {
        let spec = ProblemSpec {
            alpha,
            u0,
            nonlinearity,
            step,
            t_max,
            blowup_threshold: Self::DEFAULT_THRESHOLD,
            scheme: Scheme::default(),
            homogeneous: Homogeneous::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_homogeneous(mut self, homogeneous: Homogeneous) -> Self {
        self.homogeneous = homogeneous;
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.blowup_threshold = threshold;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::domain(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.u0 > 0.0 && self.u0.is_finite()) {
            return Err(Error::domain(format!("initial value must be positive, got {}", self.u0)));
        }
        if !(self.step > 0.0 && self.t_max.is_finite() && self.step <= self.t_max) {
            return Err(Error::domain(format!(
                "need 0 < step <= t_max, got step {} and t_max {}",
                self.step, self.t_max
            )));
        }
        if self.nonlinearity == Nonlinearity::ShiftedLogistic && self.step >= 1.0 {
            return Err(Error::domain("shifted logistic needs step < 1"));
        }
        if !(self.blowup_threshold > self.u0.max(1.0)) {
            return Err(Error::domain(format!(
                "blow-up threshold {} must exceed max(1, u0)",
                self.blowup_threshold
            )));
        }
        Ok(())
    }

    /// Number of steps needed to reach `t_max`.
    pub fn steps(&self) -> usize {
        ((self.t_max / self.step) * (1.0 - 4.0 * f64::EPSILON)).ceil() as usize
    }
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Completed,
    /// Threshold crossed at this index.
    BlewUp(usize),
    /// Weights or the homogeneous term could not be produced at this index;
    /// values stop just before it.
    AccuracyFailure(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub status: Status,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self) -> Option<f64> {
        (self.times.len() > 1).then(|| self.times[1] - self.times[0])
    }

    pub fn blowup_time(&self) -> Option<f64> {
        match self.status {
            Status::BlewUp(k) => Some(self.times[k]),
            _ => None,
        }
    }
}

/// Blow-up detected on a trajectory, optionally enriched by the analysis
/// module with a bracket and a profile fit.
#[derive(Debug, Clone, PartialEq)]
pub struct BlowUpReport {
    pub t_detected: f64,
    pub index: usize,
    pub bracket: Option<BoundBracket>,
    pub refined_t: Option<f64>,
    pub coeff_est: Option<f64>,
}

/// Weight table that grows by doubling, so runs that blow up early never pay
/// for the full horizon.
struct Weights {
    spec: KernelSpec,
    cap: usize,
    weights: Vec<f64>,
    sums: Vec<f64>,
}

impl Weights {
    const INITIAL: usize = 1024;

    fn new(spec: KernelSpec, cap: usize) -> Result<Self> {
        let mut w = Weights { spec, cap, weights: Vec::new(), sums: Vec::new() };
        w.extend_to(Self::INITIAL.min(cap))?;
        Ok(w)
    }

    fn ensure(&mut self, k: usize) -> Result<()> {
        if k < self.weights.len() {
            return Ok(());
        }
        let target = (2 * (self.weights.len() - 1)).max(k).min(self.cap);
        self.extend_to(target)
    }

    fn extend_to(&mut self, n: usize) -> Result<()> {
        let table = cq_weights(&self.spec, n.max(1))?;
        self.sums = table.partial_sums();
        self.weights = table.into_weights();
        Ok(())
    }
}

/// March the scheme from `t = 0` to `t_max` or the first blow-up.
pub fn solve(spec: &ProblemSpec) -> Result<Trajectory> {
    spec.validate()?;
    let n = spec.steps();
    let h = spec.step;
    let nl = spec.nonlinearity;
    let c = nl.offset();

    let mut times = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    let mut forcing = Vec::with_capacity(n + 1);
    times.push(0.0);
    values.push(spec.u0);
    forcing.push(nl.forcing(spec.u0));

    let kernel = KernelSpec::new(nl.branch(), spec.alpha, h)?;
    let mut weights = match Weights::new(kernel, n) {
        Ok(w) => w,
        Err(_) => return Ok(Trajectory { times, values, status: Status::AccuracyFailure(1) }),
    };

    let mut status = Status::Completed;
    for k in 1..=n {
        if weights.ensure(k).is_err() {
            status = Status::AccuracyFailure(k);
            break;
        }
        let t = k as f64 * h;
        let Some(hom) = homogeneous(spec, &weights.sums, k, t) else {
            status = Status::AccuracyFailure(k);
            break;
        };
        let w = &weights.weights;
        let history: f64 = forcing.iter().zip(w[1..=k].iter().rev()).map(|(f, w)| f * w).sum();
        let a = hom + history;
        let w0 = w[0];
        let mut v = match spec.scheme {
            Scheme::SemiImplicit => a / (1.0 - w0),
            Scheme::Picard => quadratic_step(a, w0, c),
        };
        if v.is_nan() {
            status = Status::AccuracyFailure(k);
            break;
        }
        let overflow = v > f64::MAX;
        if overflow {
            v = f64::MAX;
        }
        times.push(t);
        values.push(v);
        forcing.push(nl.forcing(v));
        if overflow || crossed(&values, k, spec.blowup_threshold) {
            status = Status::BlewUp(k);
            break;
        }
    }
    Ok(Trajectory { times, values, status })
}

/// `H_k` for the configured homogeneous term; `None` when evaluation fails.
fn homogeneous(spec: &ProblemSpec, sums: &[f64], k: usize, t: f64) -> Option<f64> {
    let u0 = spec.u0;
    match (spec.nonlinearity, spec.homogeneous) {
        (Nonlinearity::Square | Nonlinearity::ShiftedSquare, _) => Some(u0),
        (Nonlinearity::Logistic, Homogeneous::Discrete) => Some(u0 * (1.0 - sums[k])),
        (Nonlinearity::ShiftedLogistic, Homogeneous::Discrete) => Some(u0 * (1.0 + sums[k])),
        (Nonlinearity::Logistic, Homogeneous::MittagLeffler) => {
            mittag_leffler(spec.alpha, -t.powf(spec.alpha)).ok().map(|e| u0 * e)
        }
        (Nonlinearity::ShiftedLogistic, Homogeneous::MittagLeffler) => {
            // Overflow to +inf is a valid value here and surfaces as blow-up.
            mittag_leffler(spec.alpha, t.powf(spec.alpha)).ok().map(|e| u0 * e)
        }
    }
}

/// Smaller root of `v = a + ω (v + c)²`, or `+inf` when no real root exists.
fn quadratic_step(a: f64, omega: f64, c: f64) -> f64 {
    let b = a + c;
    let disc = 1.0 - 4.0 * omega * b;
    if disc < 0.0 {
        return f64::INFINITY;
    }
    2.0 * b / (1.0 + disc.sqrt()) - c
}

/// `values[k]` is above the threshold and the last `min(3, k)` steps rose.
pub(crate) fn crossed(values: &[f64], k: usize, threshold: f64) -> bool {
    values[k] > threshold && (k.saturating_sub(3)..k).all(|j| values[j + 1] > values[j])
}

/// First index where the trajectory exceeds `threshold` while increasing.
pub fn detect_blowup(traj: &Trajectory, threshold: f64) -> Option<BlowUpReport> {
    (0..traj.values.len())
        .find(|&k| crossed(&traj.values, k, threshold))
        .map(|k| BlowUpReport {
            t_detected: traj.times[k],
            index: k,
            bracket: None,
            refined_t: None,
            coeff_est: None,
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(alpha: f64, u0: f64, nl: Nonlinearity, h: f64, t_max: f64) -> Trajectory {
        solve(&ProblemSpec::new(alpha, u0, nl, h, t_max).unwrap()).unwrap()
    }

    #[test]
    fn equilibrium_is_preserved() {
        let traj = run(0.5, 1.0, Nonlinearity::Logistic, 1e-3, 5.0);
        assert_eq!(traj.status, Status::Completed);
        assert_eq!(traj.len(), 5001);
        assert!(traj.values.iter().all(|v| (v - 1.0).abs() <= 1e-9));
    }

    #[test]
    fn global_case_stays_in_unit_interval() {
        let traj = run(0.5, 0.5, Nonlinearity::Logistic, 1e-3, 20.0);
        assert_eq!(traj.status, Status::Completed);
        assert!(traj.values.iter().all(|&v| v > 0.0 && v < 1.0));
        assert!(traj.values.windows(2).all(|p| p[1] <= p[0]));
    }

    #[test]
    fn blow_up_inside_bracket() {
        let traj = run(0.5, 2.0, Nonlinearity::Logistic, 1e-4, 2.0);
        let t = traj.blowup_time().expect("blow-up");
        assert!((0.0218166..=0.7853982).contains(&t), "t = {t}");
    }

    #[test]
    fn near_classical_limit() {
        let traj = run(0.999, 0.5, Nonlinearity::Logistic, 1e-3, 1.0);
        let last = *traj.values.last().unwrap();
        assert!((last - 0.268941).abs() < 1e-2, "{last}");
    }

    #[test]
    fn picard_agrees_with_semi_implicit_in_global_case() {
        let spec = ProblemSpec::new(0.5, 0.5, Nonlinearity::Logistic, 1e-3, 2.0).unwrap();
        let a = solve(&spec).unwrap();
        let b = solve(&spec.with_scheme(Scheme::Picard)).unwrap();
        let gap = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(gap < 5.0 * 1e-3f64.sqrt(), "{gap}");
    }

    #[test]
    fn mittag_leffler_homogeneous_term() {
        let spec = ProblemSpec::new(0.5, 0.5, Nonlinearity::Logistic, 1e-3, 2.0)
            .unwrap()
            .with_homogeneous(Homogeneous::MittagLeffler);
        let a = solve(&spec).unwrap();
        let b = solve(&spec.with_homogeneous(Homogeneous::Discrete)).unwrap();
        assert_eq!(a.status, Status::Completed);
        let gap = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(gap < 0.05, "{gap}");
    }

    #[test]
    fn comparison_problems_blow_up() {
        for nl in [Nonlinearity::ShiftedLogistic, Nonlinearity::Square, Nonlinearity::ShiftedSquare] {
            let traj = run(0.5, 1.0, nl, 1e-4, 2.0);
            assert!(matches!(traj.status, Status::BlewUp(_)), "{nl}");
        }
    }

    #[test]
    fn blow_up_index_is_last_value() {
        let traj = run(0.5, 3.0, Nonlinearity::Logistic, 1e-3, 2.0);
        let Status::BlewUp(k) = traj.status else { panic!("{:?}", traj.status) };
        assert_eq!(k + 1, traj.len());
        assert!(traj.values[k] > 1e10);
        assert!(traj.values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn detect_examples() {
        let flat = Trajectory { times: vec![0.0, 0.1, 0.2], values: vec![1.0; 3], status: Status::Completed };
        assert!(detect_blowup(&flat, 1e10).is_none());
        let spike = Trajectory {
            times: vec![0.0, 0.1, 0.2, 0.3],
            values: vec![1.0, 2.0, 10.0, 1e12],
            status: Status::Completed,
        };
        let report = detect_blowup(&spike, 1e10).unwrap();
        assert_eq!(report.index, 3);
        assert_eq!(report.t_detected, 0.3);
        let global = run(0.5, 0.5, Nonlinearity::Logistic, 1e-2, 5.0);
        assert!(detect_blowup(&global, 1e10).is_none());
    }

    #[test]
    fn rejects_invalid_specs() {
        let nl = Nonlinearity::Logistic;
        assert!(ProblemSpec::new(1.0, 0.5, nl, 0.1, 1.0).is_err());
        assert!(ProblemSpec::new(0.5, 0.0, nl, 0.1, 1.0).is_err());
        assert!(ProblemSpec::new(0.5, 0.5, nl, 2.0, 1.0).is_err());
        let spec = ProblemSpec::new(0.5, 0.5, nl, 0.1, 1.0).unwrap();
        assert!(solve(&spec.with_threshold(0.5)).is_err());
    }

    #[test]
    fn step_count_is_exact_for_round_ratios() {
        let spec = ProblemSpec::new(0.5, 0.5, Nonlinearity::Logistic, 1e-3, 5.0).unwrap();
        assert_eq!(spec.steps(), 5000);
        let spec = ProblemSpec::new(0.5, 0.5, Nonlinearity::Logistic, 0.3, 1.0).unwrap();
        assert_eq!(spec.steps(), 4);
    }

    #[test]
    fn nonlinearity_names_round_trip() {
        for nl in Nonlinearity::ALL {
            assert_eq!(nl.to_string().parse::<Nonlinearity>().unwrap(), nl);
        }
    }
}

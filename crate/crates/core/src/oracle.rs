//! Independent reference methods for cross-validation.
//!
//! Nothing here touches the convolution-quadrature weights or the double
//! precision Mittag-Leffler routines: the predictor-corrector and the residual
//! use only powers and `Γ`, and the reference Mittag-Leffler values are summed
//! in MPFR arithmetic.

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

use crate::solver::{crossed, ProblemSpec, Status, Trajectory};
use crate::special::gamma;
use crate::{Error, Result};

/// Adams predictor-corrector (product rectangle predictor, product trapezoidal
/// corrector) on `v(t) = v0 + J^α[rhs(v)](t)`.
pub fn pece_solve(spec: &ProblemSpec) -> Result<Trajectory> {
    spec.validate()?;
    let n = spec.steps();
    let alpha = spec.alpha;
    let h = spec.step;
    let rhs = |v: f64| spec.nonlinearity.rhs(v);
    let v0 = spec.u0;

    let ha = h.powf(alpha);
    let pred_scale = ha / gamma(alpha + 1.0)?;
    let corr_scale = ha / gamma(alpha + 2.0)?;
    let b = rectangle_weights(alpha, n);
    let c = trapezoid_weights(alpha, n);

    let mut times = vec![0.0];
    let mut values = vec![v0];
    let mut f = vec![rhs(v0)];
    let mut status = Status::Completed;
    for k in 0..n {
        // Predict v_{k+1}.
        let pred_sum: f64 = f.iter().zip(b[..=k].iter().rev()).map(|(f, b)| f * b).sum();
        let predicted = v0 + pred_scale * pred_sum;

        // Correct with weights a_{0,k+1}, c_{k-j+1} (j = 1..=k) and 1 for the new node.
        let mut corr_sum = initial_trapezoid_weight(alpha, k) * f[0];
        corr_sum += f[1..].iter().zip(c[1..=k].iter().rev()).map(|(f, c)| f * c).sum::<f64>();
        let mut v = v0 + corr_scale * (rhs(predicted) + corr_sum);

        if v.is_nan() {
            status = Status::AccuracyFailure(k + 1);
            break;
        }
        let overflow = v > f64::MAX || predicted > f64::MAX;
        if overflow {
            v = f64::MAX;
        }
        times.push((k + 1) as f64 * h);
        values.push(v);
        f.push(rhs(v));
        if overflow || crossed(&values, k + 1, spec.blowup_threshold) {
            status = Status::BlewUp(k + 1);
            break;
        }
    }
    Ok(Trajectory { times, values, status })
}

/// `(m+1)^α - m^α` for `m = 0..=n`.
fn rectangle_weights(alpha: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|m| {
            if m == 0 {
                1.0
            } else {
                let m = m as f64;
                m.powf(alpha) * (alpha * (1.0 / m).ln_1p()).exp_m1()
            }
        })
        .collect()
}

/// `(m+1)^p - 2 m^p + (m-1)^p` with `p = α + 1`, for `m = 0..=n` (entry 0 unused).
fn trapezoid_weights(alpha: f64, n: usize) -> Vec<f64> {
    let p = alpha + 1.0;
    (0..=n)
        .map(|m| match m {
            0 => 0.0,
            1..=3 => {
                let m = m as f64;
                (m + 1.0).powf(p) - 2.0 * m.powf(p) + (m - 1.0).powf(p)
            }
            _ => {
                // m^p · 2 Σ_k C(p, 2k) m^{-2k}, free of cancellation.
                let x2 = 1.0 / (m as f64 * m as f64);
                let mut binom = 1.0;
                let mut power = 1.0;
                let mut sum = 0.0;
                for k in 1..60 {
                    let i = 2.0 * k as f64;
                    binom *= (p - i + 2.0) * (p - i + 1.0) / ((i - 1.0) * i);
                    power *= x2;
                    let term = binom * power;
                    sum += term;
                    if term.abs() < 1e-18 * sum.abs() {
                        break;
                    }
                }
                2.0 * (m as f64).powf(p) * sum
            }
        })
        .collect()
}

/// `k^{α+1} - (k - α)(k + 1)^α`.
fn initial_trapezoid_weight(alpha: f64, k: usize) -> f64 {
    let k = k as f64;
    let kp1a = (k + 1.0).powf(alpha);
    kp1a * (k * (alpha * (-1.0 / (k + 1.0)).ln_1p()).exp_m1() + alpha)
}

/// L1 discretization of `D^α u` at every node after the first, minus the
/// logistic right-hand side.
pub fn caputo_residual(traj: &Trajectory, alpha: f64) -> Result<Vec<f64>> {
    caputo_residual_with(traj, alpha, crate::solver::Nonlinearity::Logistic)
}

pub fn caputo_residual_with(
    traj: &Trajectory,
    alpha: f64,
    nonlinearity: crate::solver::Nonlinearity,
) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let Some(h) = traj.step() else {
        return Ok(Vec::new());
    };
    let u = &traj.values;
    let n = u.len() - 1;
    let beta = 1.0 - alpha;
    let d: Vec<f64> = (0..n)
        .map(|k| {
            if k == 0 {
                1.0
            } else {
                let k = k as f64;
                k.powf(beta) * (beta * (1.0 / k).ln_1p()).exp_m1()
            }
        })
        .collect();
    let diffs: Vec<f64> = u.windows(2).map(|w| w[1] - w[0]).collect();
    let scale = h.powf(-alpha) / gamma(2.0 - alpha)?;
    Ok((1..=n)
        .map(|m| {
            let deriv: f64 = diffs[..m].iter().rev().zip(&d).map(|(du, d)| du * d).sum();
            scale * deriv - nonlinearity.rhs(u[m])
        })
        .collect())
}

/// Smallest working precision accepted by the reference summations.
pub const MIN_DIGITS: u32 = 50;
/// Largest `|z|` accepted by [`ml_series_highprec`].
pub const SERIES_RADIUS: f64 = 10.0;
/// Series whose peak term exceeds `e^PEAK_LN_LIMIT` are left to the
/// asymptotic expansion in [`ml_reference`].
const PEAK_LN_LIMIT: f64 = 900.0;
const MAX_TERMS: usize = 1_000_000;

fn check_params(alpha: f64, beta: f64, z: f64, digits: u32) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) || !(beta > 0.0 && beta.is_finite()) || !z.is_finite() {
        return Err(Error::domain(format!("invalid parameters alpha={alpha} beta={beta} z={z}")));
    }
    if digits < MIN_DIGITS {
        return Err(Error::domain(format!("need at least {MIN_DIGITS} digits, got {digits}")));
    }
    Ok(())
}

fn bits_for_digits(digits: f64) -> u32 {
    (digits * std::f64::consts::LOG2_10).ceil() as u32 + 64
}

/// `E_{α,β}(z)` summed term by term in MPFR arithmetic, for `|z| ≤ 10`.
pub fn ml_series_highprec(alpha: f64, beta: f64, z: f64, digits: u32) -> Result<f64> {
    check_params(alpha, beta, z, digits)?;
    if z.abs() > SERIES_RADIUS {
        return Err(Error::domain(format!("series region is |z| <= {SERIES_RADIUS}, got {z}")));
    }
    series(alpha, beta, z, digits)
}

/// Rational `p/q` within `1e-15` of `x`, with `q ≤ 1000`.
fn small_rational(x: f64) -> Option<(u32, u32)> {
    (1..=1000u32).find_map(|q| {
        let p = (x * q as f64).round();
        ((p / q as f64 - x).abs() <= 1e-15 * x.max(1.0) && p >= 1.0).then_some((p as u32, q))
    })
}

fn series(alpha: f64, beta: f64, z: f64, digits: u32) -> Result<f64> {
    let peak_ln = z.abs().powf(1.0 / alpha);
    // E_{α,β}(z) ~ e^{z^{1/α}}/α: beyond the double range.
    if z > 0.0 && peak_ln - alpha.ln() + (1.0 - beta) / alpha * z.ln() > f64::MAX.ln() + 1.0 {
        return Ok(f64::INFINITY);
    }
    // Cancellation for z < 0 costs about peak/ln 10 digits.
    let guard = if z < 0.0 { peak_ln / std::f64::consts::LN_10 } else { 0.0 };
    let prec = bits_for_digits(digits as f64 + guard + 10.0);
    let tol = Float::with_val(prec, 10).pow(-(digits as i32));
    let zf = Float::with_val(prec, z);
    let beta_f = Float::with_val(prec, beta);

    // For α = p/q, Γ(α(j+q) + β) = Γ(αj + β)·Π_{i<p}(αj + β + i), so only q
    // gamma evaluations are needed.
    let rational = small_rational(alpha);
    let alpha_f = match rational {
        Some((p, q)) => Float::with_val(prec, p) / q,
        None => Float::with_val(prec, alpha),
    };
    let mut chain: Vec<(Float, Float)> = Vec::new();

    let mut sum = Float::with_val(prec, 0);
    let mut power = Float::with_val(prec, 1);
    let mut small_run = 0;
    let mut past_peak = false;
    let mut prev_mag = Float::with_val(prec, 0);
    for j in 0..MAX_TERMS {
        let g = match rational {
            Some((p, q)) => {
                let r = j % q as usize;
                if j < q as usize {
                    let arg = Float::with_val(prec, &alpha_f * j as u32) + &beta_f;
                    let g = arg.clone().gamma();
                    chain.push((arg, g));
                } else {
                    let (arg, g) = &mut chain[r];
                    for i in 0..p {
                        *g *= Float::with_val(prec, &*arg + i);
                    }
                    *arg += p;
                }
                chain[r].1.clone()
            }
            None => (Float::with_val(prec, &alpha_f * j as u32) + &beta_f).gamma(),
        };
        let term = Float::with_val(prec, &power / &g);
        sum += &term;
        let mag = term.abs();
        if j > 0 && mag < prev_mag {
            past_peak = true;
        }
        let threshold = Float::with_val(prec, &tol * sum.clone().abs());
        if past_peak && mag <= threshold {
            small_run += 1;
            if small_run == 10 {
                return Ok(sum.to_f64());
            }
        } else {
            small_run = 0;
        }
        prev_mag = mag;
        power *= &zf;
    }
    Err(Error::Accuracy(format!("series for E_{{{alpha},{beta}}}({z}) did not converge")))
}

/// Value and truncation bound of `-Σ_{k≥1} z^{-k}/Γ(β - αk)` for `z < 0`.
pub fn ml_asymptotic_highprec(alpha: f64, beta: f64, z: f64, digits: u32) -> Result<(f64, f64)> {
    check_params(alpha, beta, z, digits)?;
    if !(z < 0.0) || alpha >= 1.0 {
        return Err(Error::domain("asymptotic expansion needs z < 0 and alpha < 1"));
    }
    let prec = bits_for_digits(digits as f64 + 10.0);
    let tol = Float::with_val(prec, 10).pow(-(digits as i32));
    let inv_z = Float::with_val(prec, z).recip();
    let alpha_f = match small_rational(alpha) {
        Some((p, q)) => Float::with_val(prec, p) / q,
        None => Float::with_val(prec, alpha),
    };
    let mut sum = Float::with_val(prec, 0);
    let mut power = Float::with_val(prec, 1);
    let mut prev_mag: Option<Float> = None;
    for k in 1..MAX_TERMS {
        power *= &inv_z;
        let arg = Float::with_val(prec, beta) - Float::with_val(prec, &alpha_f * k as u32);
        // 1/Γ vanishes at the poles.
        let term = if arg <= 0 && arg.is_integer() {
            Float::with_val(prec, 0)
        } else {
            Float::with_val(prec, &power / arg.gamma())
        };
        let mag = Float::with_val(prec, term.abs_ref());
        if mag == 0 {
            continue;
        }
        // Terms shrink until αk ≈ |z|^{1/α}; dips near poles of Γ do not count.
        let past_minimum = alpha * k as f64 > (-z).powf(1.0 / alpha);
        if let Some(prev) = &prev_mag {
            if past_minimum && &mag > prev {
                // Divergence has set in; the omitted term bounds the error.
                return Ok(((-sum).to_f64(), mag.to_f64()));
            }
        }
        let done = mag <= Float::with_val(prec, &tol * sum.clone().abs());
        sum += &term;
        if done {
            return Ok(((-sum).to_f64(), mag.to_f64()));
        }
        prev_mag = Some(mag);
    }
    Err(Error::Accuracy(format!("asymptotic series for E_{{{alpha},{beta}}}({z}) did not settle")))
}

/// Reference `E_{α,β}(z)` on the whole real line: the MPFR series wherever its
/// cancellation is affordable, the asymptotic expansion beyond.
pub fn ml_reference(alpha: f64, beta: f64, z: f64) -> Result<f64> {
    check_params(alpha, beta, z, MIN_DIGITS)?;
    if z >= 0.0 || alpha >= 1.0 || z.abs().powf(1.0 / alpha) <= PEAK_LN_LIMIT {
        return series(alpha, beta, z, MIN_DIGITS);
    }
    let (value, bound) = ml_asymptotic_highprec(alpha, beta, z, MIN_DIGITS)?;
    if bound > 1e-30 {
        return Err(Error::Accuracy(format!("asymptotic truncation bound {bound:e} at z={z}")));
    }
    Ok(value)
}

/// `e^{x²} erfc(-x)`, which equals `E_{1/2}(x)`, in MPFR arithmetic.
pub fn half_order_erfc_identity(x: f64) -> f64 {
    let prec = 256;
    let xf = Float::with_val(prec, x);
    let sq = Float::with_val(prec, xf.square_ref()).exp();
    let erfc = Float::with_val(prec, -xf).erfc();
    (sq * erfc).to_f64()
}

/// `1/√π` at the given precision, rounded to double.
pub fn inv_sqrt_pi() -> f64 {
    let pi = Float::with_val(256, Constant::Pi);
    pi.sqrt().recip().to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve, Nonlinearity};

    #[test]
    fn series_examples() {
        assert_eq!(ml_series_highprec(0.5, 1.0, 0.0, 50).unwrap(), 1.0);
        assert!((ml_series_highprec(1.0, 1.0, 1.0, 50).unwrap() - std::f64::consts::E).abs() < 1e-15);
        let v = ml_series_highprec(0.5, 0.5, -1.0, 50).unwrap();
        assert!((v - 0.1366060074).abs() < 1e-10, "{v}");
    }

    #[test]
    fn series_matches_erfc_identity() {
        for &x in &[-10.0, -3.0, -1.0, -0.25, 0.5, 2.0] {
            let s = ml_series_highprec(0.5, 1.0, x, 60).unwrap();
            let e = half_order_erfc_identity(x);
            assert!((s - e).abs() <= 2.0 * f64::EPSILON * e.abs(), "{x}: {s} vs {e}");
            // E_{1/2,1/2}(x) = 1/√π + x E_{1/2}(x)
            let s2 = ml_series_highprec(0.5, 0.5, x, 60).unwrap();
            let e2 = inv_sqrt_pi() + x * e;
            assert!((s2 - e2).abs() <= 1e-14 * e2.abs().max(1.0), "{x}: {s2} vs {e2}");
        }
    }

    #[test]
    fn series_rejects_outside_region() {
        assert!(ml_series_highprec(0.5, 1.0, -11.0, 50).is_err());
        assert!(ml_series_highprec(0.5, 1.0, -1.0, 20).is_err());
    }

    #[test]
    fn irrational_order_takes_direct_path() {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        assert!(small_rational(a).is_none());
        let direct = ml_series_highprec(a, 1.0, -2.0, 50).unwrap();
        let near = ml_series_highprec(0.7071, 1.0, -2.0, 50).unwrap();
        assert!((direct - near).abs() < 1e-3);
    }

    #[test]
    fn asymptotic_meets_series_where_both_apply() {
        for &(a, z) in &[(0.5, -30.0), (0.7, -60.0), (0.3, -9.0)] {
            let s = series(a, 1.0, z, 50).unwrap();
            let (v, bound) = ml_asymptotic_highprec(a, 1.0, z, 50).unwrap();
            assert!(bound < 1e-20, "{bound}");
            assert!((s - v).abs() <= 1e-15 * s.abs(), "α={a} z={z}: {s} vs {v}");
        }
    }

    #[test]
    fn reference_beyond_series_region() {
        let v = ml_reference(0.3, 1.0, -50.0).unwrap();
        let (a, _) = ml_asymptotic_highprec(0.3, 1.0, -50.0, 50).unwrap();
        assert_eq!(v, a);
        assert!(v > 0.0 && v < 0.1);
    }

    #[test]
    fn pece_equilibrium_and_limit() {
        let spec = ProblemSpec::new(0.5, 1.0, Nonlinearity::Logistic, 1e-3, 5.0).unwrap();
        let traj = pece_solve(&spec).unwrap();
        assert!(traj.values.iter().all(|v| (v - 1.0).abs() <= 1e-9));

        let spec = ProblemSpec::new(0.999, 0.5, Nonlinearity::Logistic, 1e-3, 1.0).unwrap();
        let last = *pece_solve(&spec).unwrap().values.last().unwrap();
        assert!((last - 0.268941).abs() < 1e-2, "{last}");
    }

    #[test]
    fn pece_agrees_with_solver() {
        let spec = ProblemSpec::new(0.5, 0.5, Nonlinearity::Logistic, 1e-3, 1.0).unwrap();
        let a = pece_solve(&spec).unwrap();
        let b = solve(&spec).unwrap();
        let gap = (a.values.last().unwrap() - b.values.last().unwrap()).abs();
        assert!(gap <= 5.0 * 1e-3f64.powf(0.5), "{gap}");
    }

    #[test]
    fn pece_weights_match_direct_formula() {
        let alpha = 0.4;
        let p = alpha + 1.0;
        let c = trapezoid_weights(alpha, 50);
        for m in [4usize, 10, 50] {
            let mf = m as f64;
            let direct = (mf + 1.0).powf(p) - 2.0 * mf.powf(p) + (mf - 1.0).powf(p);
            assert!((c[m] - direct).abs() < 1e-12 * direct.abs(), "{m}");
        }
        let b = rectangle_weights(alpha, 10);
        assert!((b[3] - (4f64.powf(alpha) - 3f64.powf(alpha))).abs() < 1e-15);
        let a0 = initial_trapezoid_weight(alpha, 7);
        assert!((a0 - (7f64.powf(p) - (7.0 - alpha) * 8f64.powf(alpha))).abs() < 1e-12);
    }

    #[test]
    fn residual_of_constant_is_zero() {
        let traj = Trajectory {
            times: (0..100).map(|i| i as f64 * 0.01).collect(),
            values: vec![1.0; 100],
            status: Status::Completed,
        };
        let r = caputo_residual(&traj, 0.5).unwrap();
        assert_eq!(r.len(), 99);
        assert!(r.iter().all(|x| x.abs() <= 1e-10));
    }

    #[test]
    fn residual_is_small_for_solver_output() {
        let spec = ProblemSpec::new(0.5, 0.5, Nonlinearity::Logistic, 1e-3, 2.0).unwrap();
        let r = caputo_residual(&solve(&spec).unwrap(), 0.5).unwrap();
        let max = r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(max < 1.0, "{max}");
    }
}

//! Convolution quadrature weights.
//!
//! A convolution `∫_0^{t_n} K(t_n - s) f(s) ds` is replaced by the discrete
//! sum `Σ_{j=0}^{n} ω_{n-j} f(t_j)`. The weights are the Taylor coefficients
//!
//! ```text
//! Σ_j ω_j ζ^j = K̂((1 - ζ)/h)
//! ```
//!
//! of the kernel's Laplace transform `K̂` composed with the backward Euler
//! generating polynomial `δ(ζ) = 1 - ζ`. They are extracted by sampling the
//! generating function on a circle `|ζ| = ρ` inside its disc of analyticity
//! and applying one FFT.

use std::fmt;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::{Error, Result};

/// Which kernel the weights discretize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelBranch {
    /// `t^{α-1} E_{α,α}(-t^α)`, symbol `1/(s^α + 1)`.
    Decay,
    /// `t^{α-1} E_{α,α}(t^α)`, symbol `1/(s^α - 1)`.
    Growth,
    /// `t^{α-1} / Γ(α)`, symbol `s^{-α}`.
    RiemannLiouville,
}

impl fmt::Display for KernelBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelBranch::Decay => "decay",
            KernelBranch::Growth => "growth",
            KernelBranch::RiemannLiouville => "rl",
        })
    }
}

impl std::str::FromStr for KernelBranch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "decay" => Ok(KernelBranch::Decay),
            "growth" => Ok(KernelBranch::Growth),
            "rl" | "riemann-liouville" => Ok(KernelBranch::RiemannLiouville),
            other => Err(Error::domain(format!("unknown kernel branch {other:?}"))),
        }
    }
}

/// A kernel branch at a fixed order and step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub branch: KernelBranch,
    /// Fractional order; `α = 1` is accepted as a test mode.
    pub alpha: f64,
    pub step: f64,
}

impl KernelSpec {
    pub fn new(branch: KernelBranch, alpha: f64, step: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::domain(format!("kernel order must lie in (0, 1], got {alpha}")));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::domain(format!("step must be positive, got {step}")));
        }
        Ok(KernelSpec { branch, alpha, step })
    }
}

/// Distance from the Growth pole below which the symbol is refused.
const POLE_GUARD: f64 = 1e-12;

/// Laplace transform of the kernel at `s` (principal branch of `s^α`).
pub fn laplace_symbol(spec: &KernelSpec, s: Complex64) -> Result<Complex64> {
    if !(s.re > 0.0) {
        return Err(Error::domain(format!("Laplace symbol needs Re(s) > 0, got {s}")));
    }
    let s_alpha = s.powf(spec.alpha);
    match spec.branch {
        KernelBranch::Decay => Ok((s_alpha + 1.0).inv()),
        KernelBranch::Growth => {
            let den = s_alpha - 1.0;
            if den.norm() < POLE_GUARD {
                return Err(Error::Pole { re: s.re, im: s.im });
            }
            Ok(den.inv())
        }
        KernelBranch::RiemannLiouville => Ok(s_alpha.inv()),
    }
}

/// FFT contour parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourOptions {
    /// Target aliasing level: `(ρ / r)^N = eps`, `r` the radius of convergence.
    pub eps: f64,
    /// Sample count is the next power of two at or above
    /// `oversampling * (n + 1)`.
    pub oversampling: usize,
    /// Oversampling is doubled up to this cap until the rounding estimate
    /// certifies `accuracy`.
    pub max_oversampling: usize,
    /// Absolute weight accuracy the rounding estimate must certify
    /// (relative to the largest weight when that exceeds one).
    pub accuracy: f64,
}

impl Default for ContourOptions {
    fn default() -> Self {
        ContourOptions {
            eps: 1e-14,
            oversampling: 4,
            max_oversampling: 64,
            accuracy: 1e-10,
        }
    }
}

/// Weights `ω_0..ω_n` for one kernel at one step size.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    spec: KernelSpec,
    weights: Vec<f64>,
}

impl WeightTable {
    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Running sums `Σ_{j≤m} ω_j` for every `m`.
    pub fn partial_sums(&self) -> Vec<f64> {
        self.weights
            .iter()
            .scan(0.0, |acc, w| {
                *acc += w;
                Some(*acc)
            })
            .collect()
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }
}

/// Generating function `K̂((1 - ζ)/h)` of the weights.
pub fn generating_function(spec: &KernelSpec, zeta: Complex64) -> Result<Complex64> {
    laplace_symbol(spec, (Complex64::new(1.0, 0.0) - zeta) / spec.step)
}

/// Radius of convergence of the generating function.
fn convergence_radius(spec: &KernelSpec) -> Result<f64> {
    match spec.branch {
        KernelBranch::Decay | KernelBranch::RiemannLiouville => Ok(1.0),
        // (1-ζ)^α = h^α has its root at ζ = 1 - h.
        KernelBranch::Growth if spec.step < 1.0 => Ok(1.0 - spec.step),
        KernelBranch::Growth => Err(Error::Contour(format!(
            "growth kernel needs step < 1, got {}",
            spec.step
        ))),
    }
}

pub fn cq_weights(spec: &KernelSpec, n: usize) -> Result<WeightTable> {
    cq_weights_with(spec, n, &ContourOptions::default())
}

/// Weights `ω_0..ω_n` by FFT on the circle `|ζ| = r · eps^{1/N}`.
pub fn cq_weights_with(spec: &KernelSpec, n: usize, opts: &ContourOptions) -> Result<WeightTable> {
    if n == 0 {
        return Err(Error::domain("weight table needs n >= 1"));
    }
    if !(opts.eps > 0.0 && opts.eps < 1.0) || opts.oversampling < 2 {
        return Err(Error::domain("contour options need 0 < eps < 1 and oversampling >= 2"));
    }
    let radius = convergence_radius(spec)?;
    let mut planner = FftPlanner::new();
    let mut oversampling = opts.oversampling;
    loop {
        let samples = (oversampling * (n + 1)).next_power_of_two();
        let (weights, rounding) = contour_pass(spec, n, radius, samples, opts.eps, &mut planner)?;
        let largest = weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        if rounding <= opts.accuracy * largest.max(1.0) {
            return Ok(WeightTable { spec: *spec, weights });
        }
        if oversampling * 2 > opts.max_oversampling.max(opts.oversampling) {
            return Err(Error::Contour(format!(
                "estimated weight error {rounding:.3e} exceeds {:.1e} (n = {n}, {samples} samples)",
                opts.accuracy
            )));
        }
        oversampling *= 2;
    }
}

/// One FFT pass; returns the weights and an estimate of their rounding error.
fn contour_pass(
    spec: &KernelSpec,
    n: usize,
    radius: f64,
    samples: usize,
    eps: f64,
    planner: &mut FftPlanner<f64>,
) -> Result<(Vec<f64>, f64)> {
    let ln_rho = radius.ln() + eps.ln() / samples as f64;
    let rho = ln_rho.exp();

    let mut buffer = Vec::with_capacity(samples);
    let mut max_abs: f64 = 0.0;
    for k in 0..samples {
        let angle = std::f64::consts::TAU * k as f64 / samples as f64;
        let value = generating_function(spec, Complex64::from_polar(rho, angle))?;
        max_abs = max_abs.max(value.norm());
        buffer.push(value);
    }
    planner.plan_fft_forward(samples).process(&mut buffer);

    let scale = 1.0 / samples as f64;
    let weights = buffer[..=n]
        .iter()
        .enumerate()
        .map(|(j, c)| c.re * scale * (-(j as f64) * ln_rho).exp())
        .collect();
    // FFT rounding is amplified by ρ^{-j}; bound the worst coefficient.
    let rounding = 2.0 * f64::EPSILON * (samples as f64).log2() * max_abs * (-(n as f64) * ln_rho).exp();
    Ok((weights, rounding))
}

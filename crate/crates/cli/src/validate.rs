//! Verification suite behind `fraclog validate`.

use clap::ValueEnum;
use fraclog::analysis::{blowup_bracket, sandwich_tolerance, verify_run, Check};
use fraclog::oracle::{caputo_residual, ml_reference, pece_solve};
use fraclog::quadrature::{cq_weights, KernelBranch, KernelSpec};
use fraclog::solver::{solve, Nonlinearity, ProblemSpec, Scheme};
use fraclog::special::{ln_gamma, mittag_leffler, mittag_leffler_two};
use rayon::prelude::*;

/// Pinned bound `C` for `max |residual| ≤ C h^{1/2}` on the reference run
/// (α = 0.5, u0 = 0.5, h = 1e-3, t_max = 2), measured once per scheme.
pub fn residual_constant(scheme: Scheme) -> f64 {
    match scheme {
        Scheme::SemiImplicit => 3.6,
        Scheme::Picard => 5.4,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Grid {
    /// One case per regime; a few seconds.
    Quick,
    /// The full α × u0 sweep.
    Full,
}

#[derive(Debug, Clone, Copy)]
enum Task {
    MlAccuracy { samples: usize },
    GlWeights { alpha: f64 },
    DecayMass,
    Run { alpha: f64, u0: f64 },
    DualGlobal { alpha: f64, u0: f64 },
    DualBlowup { alpha: f64, u0: f64 },
    Residual,
}

fn tasks(grid: Grid) -> Vec<Task> {
    let (alphas, u0s, samples): (&[f64], &[f64], usize) = match grid {
        Grid::Quick => (&[0.5], &[0.5, 1.0, 2.0], 40),
        Grid::Full => (&[0.3, 0.5, 0.7], &[0.1, 0.5, 0.9, 1.0, 1.5, 2.0, 3.0, 5.0], 200),
    };
    let mut tasks = vec![Task::MlAccuracy { samples }, Task::DecayMass, Task::Residual];
    tasks.extend([0.3, 0.5, 0.7].map(|alpha| Task::GlWeights { alpha }));
    for &alpha in alphas {
        for &u0 in u0s {
            tasks.push(Task::Run { alpha, u0 });
            if u0 < 1.0 {
                tasks.push(Task::DualGlobal { alpha, u0 });
            } else if u0 > 1.0 && grid == Grid::Full {
                tasks.push(Task::DualBlowup { alpha, u0 });
            }
        }
    }
    tasks
}

/// Run every check of `grid` in parallel; output order is fixed by the grid.
pub fn run_suite(grid: Grid, scheme: Scheme) -> Vec<Check> {
    let per_task: Vec<Vec<Check>> = tasks(grid).par_iter().map(|&t| run_task(t, scheme)).collect();
    per_task.into_iter().flatten().collect()
}

fn check(name: String, pass: bool, measured: f64, bound: f64) -> Check {
    Check { name, pass, measured, bound }
}

fn failed(name: String) -> Vec<Check> {
    vec![check(name, false, f64::NAN, f64::NAN)]
}

/// Standard run for a case: global runs to t = 20 with h = 1e-3; blow-up
/// runs to twice the upper bracket end with at least 100 steps below the
/// lower end.
pub fn case_spec(alpha: f64, u0: f64, scheme: Scheme) -> fraclog::Result<ProblemSpec> {
    let (h, t_max) = if u0 > 1.0 {
        let b = blowup_bracket(alpha, u0)?;
        ((b.lower / 100.0).min(1e-4), 2.0 * b.upper)
    } else {
        (1e-3, 20.0)
    };
    Ok(ProblemSpec::new(alpha, u0, Nonlinearity::Logistic, h, t_max)?.with_scheme(scheme))
}

fn run_task(task: Task, scheme: Scheme) -> Vec<Check> {
    match task {
        Task::MlAccuracy { samples } => {
            let name = "ml_accuracy".to_string();
            match ml_accuracy(samples) {
                Ok(err) => vec![check(name, err <= 1e-10, err, 1e-10)],
                Err(_) => failed(name),
            }
        }
        Task::GlWeights { alpha } => {
            let name = format!("gl_weights/a{alpha}");
            match gl_weight_error(alpha, 0.01, 1000) {
                Ok(err) => vec![check(name, err <= 1e-10, err, 1e-10)],
                Err(_) => failed(name),
            }
        }
        Task::DecayMass => decay_mass(),
        Task::Run { alpha, u0 } => {
            let label = format!("run/a{alpha}_u{u0}");
            let report = case_spec(alpha, u0, scheme).and_then(|spec| verify_run(&spec, &solve(&spec)?));
            match report {
                Ok(r) => r
                    .checks
                    .into_iter()
                    .map(|c| Check { name: format!("{label}/{}", c.name), ..c })
                    .collect(),
                Err(_) => failed(format!("{label}/error")),
            }
        }
        Task::DualGlobal { alpha, u0 } => {
            let name = format!("dual_global/a{alpha}_u{u0}");
            let gap = case_spec(alpha, u0, scheme).and_then(|spec| {
                let (a, b) = (solve(&spec)?, pece_solve(&spec)?);
                Ok((max_gap(&a.values, &b.values), sandwich_tolerance(alpha, spec.step)))
            });
            match gap {
                Ok((gap, tol)) => vec![check(name, gap <= tol, gap, tol)],
                Err(_) => failed(name),
            }
        }
        Task::DualBlowup { alpha, u0 } => {
            let name = format!("dual_blowup/a{alpha}_u{u0}");
            let rel = case_spec(alpha, u0, scheme).and_then(|spec| {
                let a = solve(&spec)?.blowup_time();
                let b = pece_solve(&spec)?.blowup_time();
                Ok(match (a, b) {
                    (Some(a), Some(b)) => (a - b).abs() / b,
                    _ => f64::INFINITY,
                })
            });
            match rel {
                Ok(rel) => vec![check(name, rel <= 0.1, rel, 0.1)],
                Err(_) => failed(name),
            }
        }
        Task::Residual => {
            let name = "residual/a0.5_u0.5".to_string();
            let h = 1e-3;
            let max = ProblemSpec::new(0.5, 0.5, Nonlinearity::Logistic, h, 2.0)
                .map(|spec| spec.with_scheme(scheme))
                .and_then(|spec| caputo_residual(&solve(&spec)?, 0.5));
            let bound = residual_constant(scheme) * h.sqrt();
            match max {
                Ok(r) => {
                    let m = r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                    vec![check(name, m <= bound, m, bound)]
                }
                Err(_) => failed(name),
            }
        }
    }
}

/// Largest `|a_n - b_n|` over common indices.
pub fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `(α, β, z)` sample points: α ∈ {0.3, 0.5, 0.7, 0.9}, β ∈ {1, α}, z spread
/// over [-50, 5].
pub fn ml_samples(samples: usize) -> Vec<(f64, f64, f64)> {
    let alphas = [0.3, 0.5, 0.7, 0.9];
    (0..samples)
        .map(|i| {
            let alpha = alphas[i % 4];
            let beta = if (i / 4) % 2 == 0 { 1.0 } else { alpha };
            // Golden-ratio stride spreads z without clustering.
            let frac = (i as f64 * 0.618_033_988_749_894_8).fract();
            (alpha, beta, -50.0 + 55.0 * frac)
        })
        .collect()
}

/// Worst error against the multiple-precision reference, absolute for
/// `|E| ≤ 1` and relative above.
pub fn ml_accuracy(samples: usize) -> fraclog::Result<f64> {
    ml_samples(samples)
        .par_iter()
        .map(|&(alpha, beta, z)| {
            let v = if beta == 1.0 { mittag_leffler(alpha, z)? } else { mittag_leffler_two(alpha, beta, z)? };
            let r = ml_reference(alpha, beta, z)?;
            Ok((v - r).abs() / r.abs().max(1.0))
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// Worst `|ω_j - Γ(j+α)/(Γ(α) j!) h^α|` for `j ≤ n` on the Riemann-Liouville branch.
pub fn gl_weight_error(alpha: f64, h: f64, n: usize) -> fraclog::Result<f64> {
    let table = cq_weights(&KernelSpec::new(KernelBranch::RiemannLiouville, alpha, h)?, n)?;
    let scale = h.powf(alpha);
    let lg_alpha = ln_gamma(alpha)?;
    let mut worst = 0.0f64;
    for (j, &w) in table.weights().iter().enumerate() {
        let exact = (ln_gamma(j as f64 + alpha)? - lg_alpha - ln_gamma(j as f64 + 1.0)?).exp() * scale;
        worst = worst.max((w - exact).abs());
    }
    Ok(worst)
}

/// Decay-branch partial sums stay below `1 + 1e-8` and track the kernel's
/// mass `1 - E_α(-t^α)` at `t = n h`.
fn decay_mass() -> Vec<Check> {
    let (alpha, h, n) = (0.5, 0.01, 1000);
    let result = KernelSpec::new(KernelBranch::Decay, alpha, h)
        .and_then(|spec| cq_weights(&spec, n))
        .and_then(|table| {
            let sums = table.partial_sums();
            let max = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let t = n as f64 * h;
            let mass = 1.0 - mittag_leffler(alpha, -t.powf(alpha))?;
            Ok((max, (sums[n] - mass).abs()))
        });
    match result {
        Ok((max, gap)) => vec![
            check("decay_mass/bounded".into(), max <= 1.0 + 1e-8, max, 1.0 + 1e-8),
            check("decay_mass/limit".into(), gap <= 0.01, gap, 0.01),
        ],
        Err(_) => failed("decay_mass/error".into()),
    }
}

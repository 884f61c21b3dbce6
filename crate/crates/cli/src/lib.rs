//! Command-line front end: solves, figure data, bound tables and the
//! verification suite.
//!
//! [`execute`] is the whole program; `main` only wires it to the process.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use fraclog::analysis::{blowup_bracket, comparison_brackets, decay_envelope, envelope_horizon, EnvelopeConstants};
use fraclog::csv::write_trajectory;
use fraclog::oracle::ml_reference;
use fraclog::quadrature::{cq_weights, KernelBranch, KernelSpec};
use fraclog::solver::{solve, Nonlinearity, ProblemSpec, Scheme, Status, Trajectory};
use fraclog::special::mittag_leffler_two;
use rayon::prelude::*;
use thiserror::Error;

pub mod validate;

pub use validate::Grid;

#[derive(Debug, Parser)]
#[command(name = "fraclog", version, about = "Caputo fractional logistic equation: solver and bound checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one problem and write the trajectory as CSV.
    Solve(SolveArgs),
    /// Emit the series behind figure 1 or 2.
    Figure(FigureArgs),
    /// Print the analytic blow-up time bracket.
    Bracket(BracketArgs),
    /// Tabulate the decay envelope of a global solution.
    Envelope(EnvelopeArgs),
    /// Dump convolution quadrature weights.
    Weights(WeightsArgs),
    /// Evaluate the Mittag-Leffler function E_{α,β}(z).
    MlEval(MlEvalArgs),
    /// Run the verification suite.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub u0: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    #[arg(long, default_value_t = 10.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = ProblemSpec::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// logistic, shifted-logistic, square or shifted-square.
    #[arg(long, default_value = "logistic")]
    pub problem: Nonlinearity,
    /// Solve the implicit quadratic at every step.
    #[arg(long)]
    pub picard: bool,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub figure: u8,
    #[arg(long, default_value_t = 1e-4)]
    pub h: f64,
    #[arg(long)]
    pub picard: bool,
    /// Write one CSV file per series here instead of stdout.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("start").required(true).args(["u0", "w0"])))]
pub struct BracketArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Initial value of the logistic problem.
    #[arg(long, allow_negative_numbers = true)]
    pub u0: Option<f64>,
    /// Initial value of the comparison problems.
    #[arg(long, allow_negative_numbers = true)]
    pub w0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EnvelopeArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub u0: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub c: f64,
    /// Defaults to 1/Γ(α).
    #[arg(long, allow_negative_numbers = true)]
    pub c1: Option<f64>,
    /// End of the table; defaults to the envelope's horizon T0.
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 101, value_parser = clap::value_parser!(u64).range(2..))]
    pub points: u64,
}

#[derive(Debug, Args)]
pub struct WeightsArgs {
    /// decay, growth or rl.
    #[arg(long, default_value = "decay")]
    pub branch: KernelBranch,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub h: f64,
    /// Highest index j.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct MlEvalArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub beta: f64,
    /// One or more arguments; one value is printed per line.
    #[arg(long, required = true, num_args = 1.., allow_negative_numbers = true)]
    pub z: Vec<f64>,
    /// Use the multiple-precision reference instead.
    #[arg(long)]
    pub reference: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value_t = Grid::Quick)]
    pub grid: Grid,
    /// Scheme for every solve in the suite. The profile fit needs the
    /// resolved blow-up tail of the Picard scheme.
    #[arg(long, value_enum, default_value_t = SchemeArg::Picard)]
    pub scheme: SchemeArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    SemiImplicit,
    Picard,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Scheme {
        match s {
            SchemeArg::SemiImplicit => Scheme::SemiImplicit,
            SchemeArg::Picard => Scheme::Picard,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] fraclog::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("accuracy failure at step {0}")]
    AccuracyFailure(usize),
    #[error("{failed} of {total} checks failed")]
    Validation { failed: usize, total: usize },
}

impl CliError {
    /// 1 validation or I/O failure, 2 invalid input, 3 accuracy failure.
    pub fn exit_code(&self) -> i32 {
        use fraclog::Error as E;
        match self {
            CliError::Core(E::Domain(_)) => 2,
            CliError::Core(E::Accuracy(_) | E::Contour(_) | E::Pole { .. }) | CliError::AccuracyFailure(_) => 3,
            _ => 1,
        }
    }
}

/// Parse `args` (program name first), run, and return the exit code.
pub fn execute<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return e.exit_code();
        }
    };
    match run(&cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(command: &Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Solve(a) => cmd_solve(a, out),
        Command::Figure(a) => cmd_figure(a, out),
        Command::Bracket(a) => cmd_bracket(a, out),
        Command::Envelope(a) => cmd_envelope(a, out),
        Command::Weights(a) => cmd_weights(a, out),
        Command::MlEval(a) => cmd_ml_eval(a, out),
        Command::Validate(a) => cmd_validate(a, out),
    }
}

fn scheme(picard: bool) -> Scheme {
    if picard {
        Scheme::Picard
    } else {
        Scheme::SemiImplicit
    }
}

fn scheme_name(s: Scheme) -> &'static str {
    match s {
        Scheme::SemiImplicit => "semi-implicit",
        Scheme::Picard => "picard",
    }
}

fn metadata(spec: &ProblemSpec) -> Vec<(&'static str, String)> {
    vec![
        ("alpha", spec.alpha.to_string()),
        ("u0", spec.u0.to_string()),
        ("h", spec.step.to_string()),
        ("problem", spec.nonlinearity.to_string()),
        ("scheme", scheme_name(spec.scheme).to_string()),
    ]
}

fn check_status(traj: &Trajectory) -> Result<(), CliError> {
    match traj.status {
        Status::AccuracyFailure(k) => Err(CliError::AccuracyFailure(k)),
        _ => Ok(()),
    }
}

fn cmd_solve(a: &SolveArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = ProblemSpec::new(a.alpha, a.u0, a.problem, a.h, a.t_max)?
        .with_threshold(a.threshold)
        .with_scheme(scheme(a.picard));
    spec.validate()?;
    let traj = solve(&spec)?;
    let meta = metadata(&spec);
    match &a.out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            write_trajectory(&mut file, &traj, &meta)?;
            file.flush()?;
        }
        None => write_trajectory(out, &traj, &meta)?,
    }
    check_status(&traj)
}

/// `(α, u0)` of each series in a figure, in plotting order.
pub fn figure_series(figure: u8) -> Option<&'static [(f64, f64)]> {
    match figure {
        1 => Some(&[(0.5, 5.0), (0.5, 3.0), (0.5, 2.0)]),
        2 => Some(&[(0.3, 5.0), (0.5, 5.0)]),
        _ => None,
    }
}

/// Solve every series of a figure in parallel, keeping plotting order.
pub fn figure_runs(figure: u8, h: f64, scheme: Scheme) -> Result<Vec<(ProblemSpec, Trajectory)>, CliError> {
    let series = figure_series(figure).ok_or_else(|| fraclog::Error::Domain(format!("unknown figure {figure}")))?;
    series
        .par_iter()
        .map(|&(alpha, u0)| {
            let t_max = 2.0 * blowup_bracket(alpha, u0)?.upper;
            let spec = ProblemSpec::new(alpha, u0, Nonlinearity::Logistic, h, t_max)?.with_scheme(scheme);
            Ok((spec, solve(&spec)?))
        })
        .collect()
}

fn cmd_figure(a: &FigureArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let runs = figure_runs(a.figure, a.h, scheme(a.picard))?;
    if let Some(dir) = &a.out_dir {
        fs::create_dir_all(dir)?;
    }
    for (i, (spec, traj)) in runs.iter().enumerate() {
        let mut meta = metadata(spec);
        meta.push(("figure", a.figure.to_string()));
        match &a.out_dir {
            Some(dir) => {
                let path = dir.join(format!("figure{}_alpha{}_u0_{}.csv", a.figure, spec.alpha, spec.u0));
                let mut file = BufWriter::new(File::create(&path)?);
                write_trajectory(&mut file, traj, &meta)?;
                file.flush()?;
                writeln!(out, "{}", path.display())?;
            }
            None => {
                if i > 0 {
                    writeln!(out)?;
                }
                write_trajectory(out, traj, &meta)?;
            }
        }
    }
    runs.iter().try_for_each(|(_, traj)| check_status(traj))
}

fn cmd_bracket(a: &BracketArgs, out: &mut dyn Write) -> Result<(), CliError> {
    match (a.u0, a.w0) {
        (Some(u0), _) => writeln!(out, "{}", blowup_bracket(a.alpha, u0)?)?,
        (None, Some(w0)) => {
            let (square, shifted) = comparison_brackets(a.alpha, w0)?;
            writeln!(out, "square {square}")?;
            writeln!(out, "shifted-square {shifted}")?;
        }
        (None, None) => unreachable!("clap requires one of --u0, --w0"),
    }
    Ok(())
}

fn cmd_envelope(a: &EnvelopeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut consts = EnvelopeConstants::for_alpha(a.alpha)?;
    consts.c = a.c;
    if let Some(c1) = a.c1 {
        consts.c1 = c1;
    }
    let t0 = envelope_horizon(a.alpha, a.u0, &consts)?;
    let t_max = a.t_max.unwrap_or(t0);
    if !(t_max > 0.0) {
        return Err(fraclog::Error::Domain(format!("t-max must be positive, got {t_max}")).into());
    }
    writeln!(out, "# T0={t0}")?;
    writeln!(out, "t,envelope")?;
    let last = (a.points - 1) as f64;
    for i in 0..a.points {
        let t = t_max * i as f64 / last;
        if let Ok(e) = decay_envelope(a.alpha, a.u0, &consts, t) {
            writeln!(out, "{t:.16e},{e:.16e}")?;
        }
    }
    Ok(())
}

fn cmd_weights(a: &WeightsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let table = cq_weights(&KernelSpec::new(a.branch, a.alpha, a.h)?, a.n)?;
    writeln!(out, "j,omega_j")?;
    for (j, w) in table.weights().iter().enumerate() {
        writeln!(out, "{j},{w:.16e}")?;
    }
    Ok(())
}

fn cmd_ml_eval(a: &MlEvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    for &z in &a.z {
        let v = if a.reference {
            ml_reference(a.alpha, a.beta, z)?
        } else {
            mittag_leffler_two(a.alpha, a.beta, z)?
        };
        writeln!(out, "{v:.10}")?;
    }
    Ok(())
}

fn cmd_validate(a: &ValidateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let checks = validate::run_suite(a.grid, a.scheme.into());
    for c in &checks {
        writeln!(out, "{c}")?;
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    writeln!(out, "# {} of {} checks passed", checks.len() - failed, checks.len())?;
    if failed > 0 {
        return Err(CliError::Validation { failed, total: checks.len() });
    }
    Ok(())
}

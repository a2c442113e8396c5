// `!(x > 0.0)` is used on purpose so that NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
mod config;
mod error;
mod mtx;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use spectral_bounds::kahan::{block_lanczos_step, conjugate_gradient, goerisch_left, goerisch_w};
use spectral_bounds::lanczos::default_kappa;
use spectral_bounds::oracle::pencil_spectrum;
use spectral_bounds::{
    convergence_history, dual_harmonic_ritz, harmonic_ritz, left_lehmann, right_lehmann, ritz, run_verification,
    schwarz_matrices, EdgeLabeledValues, HistoryConfig, Pencil, VerifyConfig,
};

use config::{read_matrix, ColumnsSpec, Generator, KrylovSpec, ShiftSpec, StartSpec, SubspaceSpec};
use error::CliError;
use output::{Flag, Rows};

const DEFAULT_SEED: u64 = 0x5eed;

/// Optimal eigenvalue bounds for symmetric definite pencils K - λM.
#[derive(Parser, Debug)]
#[command(name = "spectral-bounds", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ritz-family values and Lehmann inclusion bounds for one trial subspace.
    Bounds(BoundsArgs),
    /// Value families along a Lanczos (Krylov) sequence, one row per step.
    History(HistoryArgs),
    /// Randomized property suite against dense reference eigensolves.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
#[group(id = "stiffness", required = true, multiple = false)]
struct StiffnessArgs {
    /// Stiffness matrix K as a Matrix Market file.
    #[arg(long)]
    matrix: Option<PathBuf>,

    /// Generated stiffness matrix: diag:start:step:stop or diag:v1,v2,...
    #[arg(long = "gen")]
    generator: Option<Generator>,
}

#[derive(Args, Debug)]
struct MatrixArgs {
    #[command(flatten)]
    stiffness: StiffnessArgs,

    /// Mass matrix M as a Matrix Market file (identity if omitted).
    #[arg(long, conflicts_with = "mass_gen")]
    mass: Option<PathBuf>,

    /// Generated mass matrix, same syntax as --gen.
    #[arg(long)]
    mass_gen: Option<Generator>,
}

impl MatrixArgs {
    fn pencil(&self) -> Result<Pencil, CliError> {
        let k = match (&self.stiffness.matrix, &self.stiffness.generator) {
            (Some(path), _) => read_matrix(path)?,
            (None, Some(g)) => g.matrix(),
            (None, None) => return Err(CliError::Input("no stiffness matrix given".into())),
        };
        let m = match (&self.mass, &self.mass_gen) {
            (Some(path), _) => read_matrix(path)?,
            (None, Some(g)) => g.matrix(),
            (None, None) => DMatrix::identity(k.nrows(), k.nrows()),
        };
        Pencil::new(k, m).map_err(|e| CliError::Input(format!("pencil: {e}")))
    }
}

#[derive(Args, Debug)]
#[group(id = "subspace", required = true, multiple = false)]
struct SubspaceArgs {
    /// Krylov subspace START:M with START one of ones, e<i>, random or a file.
    #[arg(long)]
    krylov: Option<KrylovSpec>,

    /// Explicit basis columns: e1,e2,... or a Matrix Market file.
    #[arg(long)]
    columns: Option<ColumnsSpec>,

    /// Random Gaussian basis with M columns.
    #[arg(long, value_name = "M")]
    random: Option<usize>,
}

impl SubspaceArgs {
    fn spec(&self) -> SubspaceSpec {
        match (&self.krylov, &self.columns, self.random) {
            (Some(k), _, _) => SubspaceSpec::Krylov(k.clone()),
            (_, Some(c), _) => SubspaceSpec::Columns(c.clone()),
            (_, _, Some(m)) => SubspaceSpec::Random(m),
            _ => unreachable!("clap requires one subspace source"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Family {
    Ritz,
    Harmonic,
    Dual,
    Right,
    Left,
    Goerisch,
    Exact,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[command(flatten)]
    matrices: MatrixArgs,

    #[command(flatten)]
    subspace: SubspaceArgs,

    /// Shift: a number or gap:r (midpoint of the r-1 and r-th eigenvalues).
    #[arg(long, allow_hyphen_values = true)]
    rho: ShiftSpec,

    /// Value families to report.
    #[arg(long, value_delimiter = ',', default_values = ["ritz", "harmonic", "dual", "right", "left"])]
    variants: Vec<Family>,

    /// Lower bound on the spectrum of K for the Goerisch family
    /// (default: slightly below the computed smallest eigenvalue).
    #[arg(long)]
    kappa: Option<f64>,

    /// Conjugate gradient steps for the inexact solves of the Goerisch family.
    #[arg(long, default_value_t = 5)]
    cg_steps: usize,

    /// Seed for random subspaces and start vectors.
    #[arg(long, env = "SPECTRAL_BOUNDS_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Output file (standard output if omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct HistoryArgs {
    #[command(flatten)]
    matrices: MatrixArgs,

    /// Lanczos start vector: ones, e<i>, random or a Matrix Market file.
    #[arg(long, default_value = "ones")]
    start: StartSpec,

    /// Shift for the Lehmann and shift-and-invert families.
    #[arg(long, allow_hyphen_values = true)]
    rho: ShiftSpec,

    /// Number of Lanczos steps.
    #[arg(long, default_value_t = 20)]
    steps: usize,

    /// Lower bound on the spectrum of K for the Goerisch family.
    #[arg(long)]
    kappa: Option<f64>,

    /// Skip the shift-and-invert comparison run.
    #[arg(long)]
    no_shift_invert: bool,

    #[arg(long, env = "SPECTRAL_BOUNDS_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,

    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, env = "SPECTRAL_BOUNDS_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Number of random instances.
    #[arg(long, default_value_t = 200)]
    instances: usize,

    /// Smallest pencil dimension.
    #[arg(long, default_value_t = 4)]
    min_n: usize,

    /// Largest pencil dimension.
    #[arg(long, default_value_t = 12)]
    max_n: usize,

    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Writes a finished result, so failures never leave partial output behind.
fn emit(path: &Option<PathBuf>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let mut f = BufWriter::new(File::create(p).map_err(|e| CliError::Output(format!("{}: {e}", p.display())))?);
            f.write_all(bytes)?;
            f.flush()?;
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn run_bounds(args: &BoundsArgs) -> Result<(), CliError> {
    let pencil = args.matrices.pencil()?;
    let basis = args.subspace.spec().basis(&pencil, args.seed)?;
    let rho = args.rho.resolve(&pencil)?;
    let step = basis.dim();
    let mut buf = Vec::new();
    let mut rows = Rows::new(&mut buf)?;
    let math = CliError::math;

    for family in &args.variants {
        match family {
            Family::Ritz => {
                let r = ritz(&pencil, &basis).map_err(|e| math("ritz", e))?;
                rows.edge(step, "ritz", &r.values, Flag::None)?;
            }
            Family::Harmonic => {
                let r = harmonic_ritz(&pencil, &basis).map_err(|e| math("harmonic ritz", e))?;
                let flag = if r.outer_bounds_guaranteed {
                    Flag::None
                } else {
                    Flag::NotGuaranteed
                };
                rows.edge(step, "harmonic", &r.values, flag)?;
            }
            Family::Dual => {
                let r = dual_harmonic_ritz(&pencil, &basis).map_err(|e| math("dual harmonic ritz", e))?;
                rows.edge(step, "dual", &r.values, Flag::None)?;
            }
            Family::Right => {
                let s = schwarz_matrices(&pencil, &basis).map_err(|e| math("schwarz matrices", e))?;
                let b = right_lehmann(&s, rho).map_err(|e| math("right-definite lehmann", e))?;
                rows.shifted(step, "lehmann_right", &b)?;
            }
            Family::Left => {
                let s = schwarz_matrices(&pencil, &basis).map_err(|e| math("schwarz matrices", e))?;
                let b = left_lehmann(&s, rho).map_err(|e| math("left-definite lehmann", e))?;
                rows.shifted(step, "lehmann_left", &b)?;
            }
            Family::Goerisch => {
                let d = block_lanczos_step(&pencil, &basis).map_err(|e| math("block lanczos step", e))?;
                let kappa = match args.kappa {
                    Some(k) => k,
                    None => default_kappa(pencil.k_min_eigenvalue().map_err(|e| math("kappa", e))?),
                };
                let rhs = pencil.m() * &d.q2;
                let z = conjugate_gradient(pencil.k(), &rhs, args.cg_steps);
                let w = goerisch_w(pencil.k(), &rhs, &z, kappa).map_err(|e| math("goerisch w", e))?;
                let b = goerisch_left(&d.h, &d.c, &w, rho).map_err(|e| math("goerisch left", e))?;
                rows.shifted(step, "goerisch_left", &b)?;
            }
            Family::Exact => {
                let spectrum = pencil_spectrum(pencil.k(), pencil.m()).map_err(|e| math("spectrum", e))?;
                rows.edge(step, "exact", &EdgeLabeledValues::new(spectrum), Flag::None)?;
            }
        }
    }
    rows.finish()?;
    emit(&args.output, &buf)
}

fn run_history(args: &HistoryArgs) -> Result<(), CliError> {
    let pencil = args.matrices.pencil()?;
    let rho = args.rho.resolve(&pencil)?;
    let q1 = args.start.vector(pencil.dim(), args.seed)?;
    let cfg = HistoryConfig {
        rho,
        max_ell: args.steps,
        kappa: args.kappa,
        shift_invert: !args.no_shift_invert,
    };
    let history = convergence_history(&pencil, &q1, &cfg).map_err(|e| CliError::math("convergence history", e))?;

    let mut buf = Vec::new();
    let mut rows = Rows::new(&mut buf)?;
    rows.edge(0, "exact", &history.exact, Flag::None)?;
    let harmonic_flag = if pencil.is_k_positive_definite() {
        Flag::None
    } else {
        Flag::NotGuaranteed
    };
    for s in &history.steps {
        rows.edge(s.ell, "ritz", &s.ritz, Flag::None)?;
        rows.edge(s.ell, "harmonic", &s.harmonic, harmonic_flag)?;
        if let Some(d) = &s.dual {
            rows.edge(s.ell, "dual", d, Flag::None)?;
        }
        if let Some(b) = &s.lehmann_right {
            rows.shifted(s.ell, "lehmann_right", b)?;
        }
        if let Some(b) = &s.lehmann_left {
            rows.shifted(s.ell, "lehmann_left", b)?;
        }
        if let Some(b) = &s.goerisch_left {
            rows.shifted(s.ell, "goerisch_left", b)?;
        }
        if let Some(v) = &s.shift_invert {
            rows.around(s.ell, "shift_invert", v.as_slice(), rho)?;
        }
    }
    rows.finish()?;
    emit(&args.output, &buf)?;
    let violations: usize = history.steps.iter().map(|s| s.bauer_fike_violations).sum();
    if violations > 0 {
        return Err(CliError::Verification(format!(
            "{violations} Bauer-Fike violations in the history"
        )));
    }
    Ok(())
}

fn run_verify(args: &VerifyArgs) -> Result<(), CliError> {
    if args.min_n < 3 || args.max_n < args.min_n {
        return Err(CliError::Input(format!(
            "size range [{}, {}] invalid; need 3 <= min-n <= max-n",
            args.min_n, args.max_n
        )));
    }
    let cfg = VerifyConfig {
        seed: args.seed,
        instances: args.instances,
        min_n: args.min_n,
        max_n: args.max_n,
    };
    let report = run_verification(&cfg);
    emit(&args.output, report.to_string().as_bytes())?;
    if report.all_passed() {
        Ok(())
    } else {
        Err(CliError::Verification("one or more properties failed".into()))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Bounds(a) => run_bounds(a),
        Command::History(a) => run_history(a),
        Command::Verify(a) => run_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spectral-bounds: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

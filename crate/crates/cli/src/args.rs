use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use symparc::scheme::SchemeSpec;
use symparc::{SolverMode, Variant};

#[derive(Debug, Parser)]
#[command(
    name = "symparc",
    version,
    about = "Symplectic P-stable additive Runge-Kutta methods for oscillatory Hamiltonian systems"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Write output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: Option<u16>,

    /// Stage iteration tolerance.
    #[arg(long, global = true, default_value_t = 1e-12, value_parser = positive_f64)]
    pub tol: f64,

    /// Stage solver (default: linearly implicit when the fast force is linear).
    #[arg(long, global = true, value_enum)]
    pub solver: Option<Solver>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Solver {
    FixedPoint,
    LinearlyImplicit,
}

impl From<Solver> for SolverMode {
    fn from(s: Solver) -> Self {
        match s {
            Solver::FixedPoint => SolverMode::FixedPoint,
            Solver::LinearlyImplicit => SolverMode::LinearlyImplicit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Interpolation,
    Collocation,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Interpolation => Variant::Interpolation,
            VariantArg::Collocation => Variant::Collocation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Problem {
    Fput,
    Harmonic,
    Free,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the coefficients of a scheme as JSON.
    Tableau(TableauArgs),
    /// Stability function samples, stability intervals and resonances.
    Stability(StabilityArgs),
    /// Integrate a test problem and write the trajectory.
    Integrate(IntegrateArgs),
    /// FPUT experiments.
    #[command(subcommand)]
    Fput(FputCommand),
    /// Convergence study against the reference solver.
    Converge(ConvergeArgs),
}

#[derive(Debug, Args)]
pub struct TableauArgs {
    /// Scheme name such as lgl4 or lglc6; overrides --s1/--variant.
    #[arg(long, conflicts_with_all = ["s1", "variant"])]
    pub scheme: Option<SchemeSpec>,

    /// Primary (Lobatto) stage count.
    #[arg(long, default_value_t = 3)]
    pub s1: usize,

    #[arg(long, value_enum, default_value_t = VariantArg::Interpolation)]
    pub variant: VariantArg,

    /// Append the order-condition report.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[arg(long, default_value = "lgl4")]
    pub scheme: SchemeSpec,

    #[arg(long, default_value_t = 20.0, value_parser = positive_f64)]
    pub mu_max: f64,

    /// Keep every n-th grid sample in the CSV.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub stride: u32,

    /// Also write the report JSON (with --format csv) or the samples CSV
    /// (with --format json) to this path.
    #[arg(long, value_name = "PATH")]
    pub companion: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    #[arg(long, default_value = "lgl4")]
    pub scheme: SchemeSpec,

    #[arg(long, value_enum, default_value_t = Problem::Fput)]
    pub problem: Problem,

    /// Number of stiff springs (fput) or dimension (free).
    #[arg(long, default_value_t = 3)]
    pub ell: usize,

    #[arg(long, default_value_t = 50.0, value_parser = positive_f64)]
    pub omega: f64,

    #[arg(long, default_value_t = 0.04, value_parser = positive_f64)]
    pub h: f64,

    #[arg(long, default_value_t = 200.0, value_parser = non_negative_f64)]
    pub t_end: f64,

    /// Record every n-th step (the last step is always recorded).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub stride: u32,
}

#[derive(Debug, Subcommand)]
pub enum FputCommand {
    /// Energy error and oscillatory energies over time.
    Energy(EnergyArgs),
    /// Maximum energy errors over a grid of hω/π.
    Sweep(SweepArgs),
    /// Slow-variable errors at the final time for several h and ω.
    Reduction(ReductionArgs),
    /// Long run in the high-frequency limit (ω = 1000, h = 0.1, T = 4000).
    Highfreq(EnergyArgs),
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    #[arg(long, default_value = "lgl4")]
    pub scheme: SchemeSpec,

    #[arg(long, default_value_t = 3)]
    pub ell: usize,

    #[arg(long, value_parser = positive_f64)]
    pub omega: Option<f64>,

    #[arg(long, value_parser = positive_f64)]
    pub h: Option<f64>,

    #[arg(long, value_parser = non_negative_f64)]
    pub t_end: Option<f64>,

    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub stride: Option<u32>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value = "lgl4")]
    pub scheme: SchemeSpec,

    #[arg(long, default_value_t = 3)]
    pub ell: usize,

    #[arg(long, default_value_t = 0.02, value_parser = positive_f64)]
    pub h: f64,

    #[arg(long, default_value_t = 100.0, value_parser = positive_f64)]
    pub t_end: f64,

    /// Grid points over hω/π ∈ (0, max].
    #[arg(long, default_value_t = 450, value_parser = clap::value_parser!(u32).range(1..))]
    pub points: u32,

    #[arg(long, default_value_t = 4.5, value_parser = positive_f64)]
    pub max: f64,
}

#[derive(Debug, Args)]
pub struct ReductionArgs {
    #[arg(long, value_delimiter = ',', default_value = "lgl4,lgl6,imex-yoshida4,imex-yoshida6")]
    pub schemes: Vec<SchemeSpec>,

    #[arg(long, default_value_t = 3)]
    pub ell: usize,

    #[arg(long, value_delimiter = ',', default_value = "10,100,1000,10000", value_parser = positive_f64)]
    pub omegas: Vec<f64>,

    /// Step sizes; default is 15 log-spaced values h = 3/N in [1e-3, 1e-1].
    #[arg(long, value_delimiter = ',', value_parser = positive_f64)]
    pub hs: Vec<f64>,

    #[arg(long, default_value_t = 3.0, value_parser = positive_f64)]
    pub t_end: f64,

    /// Tolerance of the reference solver.
    #[arg(long, default_value_t = 1e-11, value_parser = positive_f64)]
    pub ref_tol: f64,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[arg(long, default_value = "lgl4")]
    pub scheme: SchemeSpec,

    #[arg(long, default_value_t = 3)]
    pub ell: usize,

    #[arg(long, default_value_t = 1.0, value_parser = positive_f64)]
    pub omega: f64,

    #[arg(long, default_value_t = 1.0, value_parser = positive_f64)]
    pub t_end: f64,

    /// Step sizes; default is 1/10, 1/20, 1/40, 1/80, 1/160.
    #[arg(long, value_delimiter = ',', value_parser = positive_f64)]
    pub hs: Vec<f64>,

    #[arg(long, default_value_t = 1e-12, value_parser = positive_f64)]
    pub ref_tol: f64,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

pub fn positive_f64(s: &str) -> Result<f64, String> {
    let x = parse_f64(s)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(format!("must be > 0, got {s}"))
    }
}

pub fn non_negative_f64(s: &str) -> Result<f64, String> {
    let x = parse_f64(s)?;
    if x >= 0.0 {
        Ok(x)
    } else {
        Err(format!("must be >= 0, got {s}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn float_parsers() {
        assert_eq!(positive_f64("2.5"), Ok(2.5));
        assert!(positive_f64("0").is_err());
        assert!(positive_f64("nan").is_err());
        assert!(positive_f64("x").is_err());
        assert_eq!(non_negative_f64("0"), Ok(0.0));
        assert!(non_negative_f64("-1").is_err());
    }

    #[test]
    fn scheme_lists_parse() {
        let cli = Cli::try_parse_from(["symparc", "fput", "reduction", "--schemes", "lgl4,imex-yoshida4"]).unwrap();
        match cli.command {
            Command::Fput(FputCommand::Reduction(r)) => {
                assert_eq!(r.schemes.len(), 2);
                assert_eq!(r.omegas, vec![10.0, 100.0, 1000.0, 10000.0]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}

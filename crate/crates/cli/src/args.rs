//! Command-line definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "solsurf",
    version,
    about = "CMC surfaces in H³(λ) and minimal surfaces in E³ from Weierstrass data",
    args_override_self = true
)]
pub struct Cli {
    /// Plain `key = value` file supplying any long flag; flags on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a surface patch, export a mesh and report the construction invariants.
    Generate(GenerateArgs),
    /// Run the full residual battery over the grid.
    Verify(VerifyArgs),
    /// Study the λ → 0 limit of the shifted immersion.
    Limit(LimitArgs),
    /// Bridge to scalar second-order ODEs.
    #[command(subcommand)]
    Ode(OdeCommand),
}

#[derive(Debug, Subcommand)]
pub enum OdeCommand {
    /// Print p, q of w″ + p w′ + q w = 0 and the standard-form potential Q.
    ToOde(ToOdeArgs),
    /// Build Weierstrass data from p, q.
    FromOde(FromOdeArgs),
    /// Surface of the error-function equation w″ − 2z w′ − 2n w = 0.
    ErfExample(ErfArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    /// Sym-type immersion into H³(λ).
    H3,
    /// Shifted immersion at the given λ, in Enneper–Weierstrass coordinates.
    E3Limit,
    /// Direct Enneper–Weierstrass integration.
    E3Direct,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// η as an expression in z.
    #[arg(long, allow_hyphen_values = true)]
    pub eta: String,
    /// ψ as an expression in z.
    #[arg(long, allow_hyphen_values = true)]
    pub psi: String,
    /// Parameter binding `name=value` (repeatable).
    #[arg(long = "param", value_name = "NAME=VALUE", allow_hyphen_values = true)]
    pub params: Vec<String>,
    /// Spectral parameter λ.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub lambda: f64,
    /// Base point z₀ where the wavefunction is the identity.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub base: String,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Rectangle `a:b:c:d` = [a, b] × [c, d] in Re z × Im z.
    #[arg(long, default_value = "-1:1:-1:1", allow_hyphen_values = true)]
    pub domain: String,
    /// Grid resolution `N` or `NXxNY`.
    #[arg(long, default_value = "32")]
    pub res: String,
    /// Integration tolerance, in (0, 1e-2].
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Worker threads (defaults to SOLSURF_THREADS, then all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Mesh output (.obj or .ply).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report output (stdout when absent).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum, default_value_t = Target::H3)]
    pub target: Target,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Multiply the Hopf coefficient Q by this factor in the GMC and
    /// zero-curvature checks (a deliberately incompatible input).
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub q_scale: f64,
    /// JSON report output (stdout when absent).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct LimitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Comma-separated, strictly decreasing positive λ values (at least three).
    #[arg(long, default_value = "0.1,0.01,0.001")]
    pub lambdas: String,
    /// Number of sample points inside the domain.
    #[arg(long, default_value_t = 10)]
    pub points: usize,
    /// JSON report output (stdout when absent).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ToOdeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// JSON report output.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FromOdeArgs {
    /// Coefficient p of w″ + p w′ + q w = 0.
    #[arg(long, allow_hyphen_values = true)]
    pub p: String,
    /// Coefficient q of w″ + p w′ + q w = 0.
    #[arg(long, allow_hyphen_values = true)]
    pub q: String,
    #[arg(long = "param", value_name = "NAME=VALUE", allow_hyphen_values = true)]
    pub params: Vec<String>,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub lambda: f64,
    /// Scale of η.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub c: String,
    /// Shift of ψ.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub c1: String,
    /// Lower limit of the primitives.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub base: String,
    /// Rectangle holding the round-trip sample points.
    #[arg(long, default_value = "-1:1:-1:1", allow_hyphen_values = true)]
    pub domain: String,
    /// Number of round-trip sample points.
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    /// JSON report output.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ErfArgs {
    /// Integer n of w″ − 2z w′ − 2n w = 0.
    #[arg(long, allow_hyphen_values = true)]
    pub n: i32,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub c: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub c1: String,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long, default_value = "0.5:1.5:-0.5:0.5", allow_hyphen_values = true)]
    pub domain: String,
    /// Grid resolution; the default keeps the conformality stencil below its threshold.
    #[arg(long, default_value = "48")]
    pub res: String,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Point at which the closed-form columns are cross-checked.
    #[arg(long, default_value = "1.3+0.2*i", allow_hyphen_values = true)]
    pub kummer_at: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

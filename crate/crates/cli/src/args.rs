use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "triwalk", version, about = "Three-period quantum walk on the line")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Position distribution of the walk at time T
    Simulate(SimulateArgs),
    /// Limit density of X_{3t}/3t on a grid
    Density(DensityArgs),
    /// Finite-time versus limit comparison report (JSON)
    Compare(CompareArgs),
    /// Position distributions at time T over a range of coin angles
    Sweep(SweepArgs),
    /// Same as `simulate --three-coin`
    ThreeCoin(ThreeCoinArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CoinArgs {
    /// Rotation coin angle in radians
    #[arg(long, allow_negative_numbers = true, group = "coin")]
    pub theta: Option<f64>,
    /// General coin `gamma,delta,xi,theta`; the walk runs [U, U, J(U)]
    #[arg(long, value_name = "G,D,X,T", allow_hyphen_values = true, group = "coin")]
    pub general: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct SpinArgs {
    /// Spin-0 amplitude as `re,im`
    #[arg(long, value_name = "RE,IM", allow_hyphen_values = true, requires = "beta")]
    pub alpha: Option<String>,
    /// Spin-1 amplitude as `re,im`
    #[arg(long, value_name = "RE,IM", allow_hyphen_values = true, requires = "alpha")]
    pub beta: Option<String>,
    /// Named spin; `symmetric` is (1/sqrt2, i/sqrt2), the default
    #[arg(long, value_name = "NAME", conflicts_with_all = ["alpha", "beta"])]
    pub spin: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file (stdout when absent)
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub coin: CoinArgs,
    /// Three coins `g,d,x,t;g,d,x,t;g,d,x,t` applied at t = 0, 1, 2 mod 3
    #[arg(long, value_name = "COINS", allow_hyphen_values = true, group = "coin")]
    pub three_coin: Option<String>,
    #[command(flatten)]
    pub spin: SpinArgs,
    #[arg(long)]
    pub steps: usize,
    /// Also write every n-th intermediate time as (t, x, p) rows
    #[arg(long, value_name = "N")]
    pub every: Option<usize>,
    /// Sweep the coin angle over `lo:hi:n` (same as the sweep subcommand)
    #[arg(long, value_name = "LO:HI:N", allow_hyphen_values = true)]
    pub theta_sweep: Option<String>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    #[command(flatten)]
    pub coin: CoinArgs,
    #[command(flatten)]
    pub spin: SpinArgs,
    /// Number of grid points on (-1, 1)
    #[arg(long, default_value_t = 2000)]
    pub grid: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    pub coin: CoinArgs,
    #[command(flatten)]
    pub spin: SpinArgs,
    #[arg(long)]
    pub steps: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, value_name = "LO:HI:N", allow_hyphen_values = true)]
    pub theta_sweep: String,
    /// Phases `gamma,delta,xi` of a general coin; the angle is swept
    #[arg(long, value_name = "G,D,X", allow_hyphen_values = true)]
    pub phases: Option<String>,
    #[command(flatten)]
    pub spin: SpinArgs,
    #[arg(long)]
    pub steps: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ThreeCoinArgs {
    #[arg(long, value_name = "COINS", allow_hyphen_values = true)]
    pub three_coin: String,
    #[command(flatten)]
    pub spin: SpinArgs,
    #[arg(long)]
    pub steps: usize,
    #[arg(long, value_name = "N")]
    pub every: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

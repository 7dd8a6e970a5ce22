use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "keyrate",
    version,
    about = "Secret-key rate regions and binning-protocol simulation for a state-dependent 3-receiver broadcast channel"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate or search rate-region bounds.
    Region {
        #[command(subcommand)]
        cmd: RegionCmd,
    },
    /// Run the finite-blocklength protocol simulators.
    Simulate {
        #[command(subcommand)]
        cmd: SimulateCmd,
    },
    /// Channel reductions.
    Reduce {
        #[command(subcommand)]
        cmd: ReduceCmd,
    },
}

#[derive(Debug, Subcommand)]
pub enum RegionCmd {
    /// Inner bound of the no-feedback scheme: evaluate a scheme file or
    /// search over schemes.
    InnerNofb(InnerNofbArgs),
    /// Outer bound: evaluate an input kernel or search over input kernels.
    OuterNofb(OuterNofbArgs),
    /// Inner bound of the one-round-feedback scheme for a scheme file.
    InnerFb(InnerFbArgs),
    /// Cross-check the feedback bound against its constraint system via
    /// Fourier-Motzkin elimination.
    FmVerify(FmVerifyArgs),
}

#[derive(Debug, Args)]
pub struct SearchOpts {
    /// Random restarts for the coordinate-ascent search.
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
    /// Ascent iterations per restart.
    #[arg(long, default_value_t = 500)]
    pub iters: usize,
    /// Master seed of the search streams.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct InnerNofbArgs {
    /// Channel description (JSON).
    #[arg(long)]
    pub channel: PathBuf,
    /// Scheme file to evaluate (mutually exclusive with --search).
    #[arg(long, conflicts_with = "search")]
    pub scheme: Option<PathBuf>,
    /// Search over schemes instead of evaluating a file.
    #[arg(long)]
    pub search: bool,
    /// Auxiliary cardinality |U0| (default |X|+1).
    #[arg(long)]
    pub u0: Option<usize>,
    /// Auxiliary cardinality |U1| (default |X|+1).
    #[arg(long)]
    pub u1: Option<usize>,
    /// Auxiliary cardinality |U2| (default |X|+1).
    #[arg(long)]
    pub u2: Option<usize>,
    /// Scalarization weight on R0.
    #[arg(long, default_value_t = 1.0)]
    pub w0: f64,
    /// Scalarization weight on R1.
    #[arg(long, default_value_t = 1.0)]
    pub w1: f64,
    /// Scalarization weight on R2.
    #[arg(long, default_value_t = 1.0)]
    pub w2: f64,
    #[command(flatten)]
    pub search_opts: SearchOpts,
    /// Write the JSON result envelope here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the per-restart search trace as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OuterNofbArgs {
    #[arg(long)]
    pub channel: PathBuf,
    /// Input kernel p(X|S) to evaluate (mutually exclusive with --search).
    #[arg(long, conflicts_with = "search")]
    pub input: Option<PathBuf>,
    /// Search over input kernels instead.
    #[arg(long)]
    pub search: bool,
    #[command(flatten)]
    pub search_opts: SearchOpts,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InnerFbArgs {
    #[arg(long)]
    pub channel: PathBuf,
    /// Feedback scheme file (JSON).
    #[arg(long)]
    pub scheme: PathBuf,
    /// Charge the second cross-receiver constraint to R1+Rp1, preserving
    /// the source text's index pairing, instead of the symmetric reading.
    #[arg(long)]
    pub eq24_literal: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the constraint system in plain-text form here.
    #[arg(long)]
    pub system_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FmVerifyArgs {
    #[arg(long)]
    pub channel: PathBuf,
    #[arg(long)]
    pub scheme: PathBuf,
    /// Grid step in bits.
    #[arg(long, default_value_t = 0.01)]
    pub grid_step: f64,
    /// Membership tolerance in bits.
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    #[arg(long)]
    pub eq24_literal: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SimulateCmd {
    /// No-feedback protocol.
    Nofb(SimNofbArgs),
    /// One-round-feedback protocol.
    Fb(SimFbArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LeakageArg {
    /// Exact posterior enumeration when it fits, plug-in otherwise.
    Auto,
    /// Force the plug-in estimate.
    Plugin,
    /// Skip leakage measurement.
    Skip,
}

#[derive(Debug, Args)]
pub struct SimCommonArgs {
    /// Blocklength n.
    #[arg(long)]
    pub n: usize,
    /// Typicality slack, in (0, 1).
    #[arg(long, default_value_t = 0.2)]
    pub eps: f64,
    /// Number of trials.
    #[arg(long)]
    pub trials: u64,
    /// Master seed.
    #[arg(long)]
    pub seed: u64,
    /// Leakage measurement policy.
    #[arg(long, value_enum, default_value_t = LeakageArg::Auto)]
    pub leakage: LeakageArg,
    /// Include raw per-trial records in the report.
    #[arg(long)]
    pub trial_log: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the report as CSV, one row per metric.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimNofbArgs {
    #[arg(long)]
    pub channel: PathBuf,
    #[arg(long)]
    pub scheme: PathBuf,
    /// Codeword bank rate for U0.
    #[arg(long, default_value_t = 0.0)]
    pub rt0: f64,
    /// Codeword bank rate for U1.
    #[arg(long, default_value_t = 0.0)]
    pub rt1: f64,
    /// Codeword bank rate for U2.
    #[arg(long, default_value_t = 0.0)]
    pub rt2: f64,
    /// Common-key bin rate.
    #[arg(long, default_value_t = 0.0)]
    pub r0: f64,
    /// Receiver-1 private-key bin rate.
    #[arg(long, default_value_t = 0.0)]
    pub r1: f64,
    /// Receiver-2 private-key bin rate.
    #[arg(long, default_value_t = 0.0)]
    pub r2: f64,
    #[command(flatten)]
    pub common: SimCommonArgs,
}

#[derive(Debug, Args)]
pub struct SimFbArgs {
    #[arg(long)]
    pub channel: PathBuf,
    #[arg(long)]
    pub scheme: PathBuf,
    /// Receiver-1 public bin rate.
    #[arg(long, default_value_t = 0.0)]
    pub rp1: f64,
    /// Receiver-2 public bin rate.
    #[arg(long, default_value_t = 0.0)]
    pub rp2: f64,
    /// Receiver-1 key (sub-bin) rate.
    #[arg(long, default_value_t = 0.0)]
    pub r1: f64,
    /// Receiver-2 key (sub-bin) rate.
    #[arg(long, default_value_t = 0.0)]
    pub r2: f64,
    #[command(flatten)]
    pub common: SimCommonArgs,
}

#[derive(Debug, Subcommand)]
pub enum ReduceCmd {
    /// Collapse the 3-receiver channel to a wiretap channel.
    Wiretap(WiretapArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WiretapModeArg {
    /// Merge Y1 and Y2 (kernels must agree).
    Nofb,
    /// Keep receiver 1, collapse Y2.
    FbKeepRx1,
    /// Keep receiver 2, collapse Y1.
    FbKeepRx2,
}

#[derive(Debug, Args)]
pub struct WiretapArgs {
    #[arg(long)]
    pub channel: PathBuf,
    #[arg(long, value_enum)]
    pub mode: WiretapModeArg,
    /// Write the result envelope here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the reduced channel as a bare, loadable channel file.
    #[arg(long)]
    pub channel_out: Option<PathBuf>,
}

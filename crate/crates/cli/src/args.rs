use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use xychain::model::Channel;
use xychain::FidelityMode;

#[derive(Debug, Parser)]
#[command(name = "xychain", version, about = "Quantum state transfer through XY spin chains")]
#[command(args_override_self = true, allow_negative_numbers = true)]
pub struct Cli {
    /// key=value file; each key names a flag of the chosen subcommand.
    /// Flags on the command line take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Γ quantities and average fidelity at one point.
    Fidelity(FidelityArgs),
    /// Fidelity over a grid of times and fields.
    Sweep(SweepArgs),
    /// Maximum fidelity of the FM-ground and Néel channels versus N.
    Compare(CompareArgs),
    /// Arrival time of the maximum fidelity versus N.
    Tmax(CompareArgs),
    /// Fidelity of channels with permuted excitation positions.
    Ordering(OrderingArgs),
    /// Cross-check enumeration, Cauchy-Binet and exact diagonalization.
    OracleCheck(OracleCheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Worker threads (defaults to available cores).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct Physics {
    /// Exchange coupling J; negative for a ferromagnetic chain.
    #[arg(long, default_value_t = 1.0)]
    pub j: f64,
    #[arg(long, default_value = "strict", value_parser = parse_mode)]
    pub mode: FidelityMode,
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    #[arg(long, default_value_t = 0.0)]
    pub jt_min: f64,
    #[arg(long, default_value_t = 500.0)]
    pub jt_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub jt_step: f64,
}

#[derive(Debug, Args)]
pub struct FidelityArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value = "neel", value_parser = parse_channel)]
    pub channel: Channel,
    #[arg(long, default_value_t = 0.0)]
    pub h: f64,
    #[arg(long)]
    pub jt: f64,
    #[command(flatten)]
    pub physics: Physics,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value = "neel", value_parser = parse_channel)]
    pub channel: Channel,
    #[arg(long, default_value_t = 0.0)]
    pub jt_min: f64,
    #[arg(long, default_value_t = 20.0)]
    pub jt_max: f64,
    #[arg(long, default_value_t = 0.05)]
    pub jt_step: f64,
    #[arg(long, default_value_t = 0.0)]
    pub h_min: f64,
    #[arg(long, default_value_t = 0.5)]
    pub h_max: f64,
    #[arg(long, default_value_t = 0.025)]
    pub h_step: f64,
    #[command(flatten)]
    pub physics: Physics,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Chain lengths: `8`, `4..12` (inclusive) or `4,7,11`.
    #[arg(long, value_parser = parse_sizes)]
    pub n: Sizes,
    /// `fixed:<h>` or `optimal`.
    #[arg(long, default_value = "fixed:0", value_parser = parse_h_policy)]
    pub h_policy: HPolicy,
    /// Field grid step for `optimal`, scanned over [0, h-max].
    #[arg(long, default_value_t = 0.01)]
    pub h_step: f64,
    #[arg(long, default_value_t = 2.0)]
    pub h_max: f64,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub physics: Physics,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct OrderingArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0)]
    pub h: f64,
    /// Channel site list; repeat for every pattern to compare.
    #[arg(long = "pattern", required = true, value_parser = parse_sites)]
    pub patterns: Vec<Vec<usize>>,
    /// Channel whose arrival time is used for the comparison.
    #[arg(long, default_value = "neel", value_parser = parse_channel)]
    pub reference: Channel,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub physics: Physics,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct OracleCheckArgs {
    #[arg(long, default_value = "2..12", value_parser = parse_sizes)]
    pub n: Sizes,
    /// Random (Jt, h) points per chain length.
    #[arg(long, default_value_t = 20)]
    pub draws: usize,
    /// Random custom channels per chain length, besides FM ground and Néel.
    #[arg(long, default_value_t = 3)]
    pub customs: usize,
    #[arg(long, default_value_t = 50.0)]
    pub jt_max: f64,
    #[arg(long, default_value_t = 2.0)]
    pub h_max: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub j: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sizes(pub Vec<usize>);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HPolicy {
    Fixed(f64),
    Optimal,
}

fn parse_mode(s: &str) -> Result<FidelityMode, String> {
    s.parse().map_err(|e: xychain::Error| e.to_string())
}

fn parse_channel(s: &str) -> Result<Channel, String> {
    s.parse().map_err(|e: xychain::Error| e.to_string())
}

fn parse_sites(s: &str) -> Result<Vec<usize>, String> {
    match parse_channel(s)? {
        Channel::Custom(sites) => Ok(sites),
        _ => Err(format!("expected a site list such as 2,3,4, got '{s}'")),
    }
}

fn parse_sizes(s: &str) -> Result<Sizes, String> {
    let number = |p: &str| p.trim().parse::<usize>().map_err(|_| format!("bad chain length '{p}'"));
    let sizes = if let Some((lo, hi)) = s.split_once("..") {
        let (lo, hi) = (number(lo)?, number(hi.trim_start_matches('='))?);
        if lo > hi {
            return Err(format!("empty range {s}"));
        }
        (lo..=hi).collect()
    } else {
        s.split(',').map(number).collect::<Result<Vec<_>, _>>()?
    };
    Ok(Sizes(sizes))
}

fn parse_h_policy(s: &str) -> Result<HPolicy, String> {
    match s.trim() {
        "optimal" | "optimize" => Ok(HPolicy::Optimal),
        other => other
            .strip_prefix("fixed:")
            .and_then(|h| h.parse::<f64>().ok())
            .filter(|h| h.is_finite())
            .map(HPolicy::Fixed)
            .ok_or_else(|| format!("expected fixed:<h> or optimal, got '{s}'")),
    }
}

/// Splices the entries of a `--config` file in front of the command-line
/// flags of the subcommand so that later (command-line) values win.
pub fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut path = None;
    let mut iter = argv.into_iter();
    while let Some(arg) = iter.next() {
        let text = arg.to_string_lossy().into_owned();
        if text == "--config" {
            path = Some(iter.next().ok_or("--config needs a path")?);
        } else if let Some(p) = text.strip_prefix("--config=") {
            path = Some(OsString::from(p));
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {}: {e}", path.to_string_lossy()))?;
    let mut flags = Vec::new();
    for (number, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) =
            line.split_once('=').ok_or_else(|| format!("config line {}: expected key=value", number + 1))?;
        flags.push(OsString::from(format!("--{}={}", key.trim().replace('_', "-"), value.trim())));
    }
    // the subcommand is the first argument after the program name that is
    // not a flag
    let at =
        rest.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')).map(|i| i + 2).unwrap_or(rest.len());
    let tail = rest.split_off(at);
    rest.extend(flags);
    rest.extend(tail);
    Ok(rest)
}

//! Command-line front end.

mod bench;
mod check;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::matrix::BitMatrix;
use crate::strassen::MulParams;
use crate::tuning::{choose_k, Config};
use crate::{cubic, io, m4rm, rowops, strassen};

pub use bench::{read_records, write_records, BenchRecord};

/// Exit status for a check or verification mismatch.
pub const EXIT_MISMATCH: i32 = 1;
/// Exit status for dimension and parameter errors.
pub const EXIT_USAGE: i32 = 2;
/// Exit status for I/O and file format errors.
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "gf2mat", version, about = "Dense GF(2) matrix multiplication: check, benchmark, multiply files")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare every algorithm against the reference products on random inputs.
    Check(CheckArgs),
    /// Time algorithms over a list of dimensions and write CSV.
    Bench(BenchArgs),
    /// Write a random (or identity) matrix file.
    Gen(GenArgs),
    /// Multiply two matrix files.
    Mul(MulArgs),
    /// Print the resolved tuning parameters.
    Params(ParamArgs),
}

#[derive(Debug, Clone, Args, Default)]
pub struct ParamArgs {
    /// Strassen-Winograd crossover dimension.
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// M4RM row block size.
    #[arg(long)]
    pub bs: Option<usize>,
    /// Gray table width (1..=16).
    #[arg(long)]
    pub k: Option<usize>,
    /// Number of Gray tables (1..=8).
    #[arg(long)]
    pub t: Option<usize>,
    /// L1 data cache size in bytes.
    #[arg(long)]
    pub l1: Option<usize>,
    /// L2 cache size in bytes.
    #[arg(long)]
    pub l2: Option<usize>,
    /// Use plain 64-bit word loops for row additions.
    #[arg(long)]
    pub force_scalar_xor: bool,
}

impl ParamArgs {
    /// Parameters from `GF2MAT_CONFIG` overridden by flags. Also applies
    /// `--force-scalar-xor`.
    pub fn resolve(&self) -> Result<MulParams> {
        rowops::set_force_scalar(self.force_scalar_xor);
        let flags = Config {
            l1_bytes: self.l1,
            l2_bytes: self.l2,
            cutoff: self.cutoff,
            bs: self.bs,
            k: self.k,
            t: self.t,
        };
        Config::from_env()?.merge(flags).resolve()
    }
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Problem shape MxLxN (A is MxL, B is LxN); N alone means NxNxN. Repeatable.
    #[arg(long = "dims", value_name = "MxLxN", default_value = "100x100x100")]
    pub dims: Vec<Dims>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Flip one output bit of the first algorithm (harness self-test).
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long = "dims", value_name = "MxLxN", default_values = ["1024", "2048", "4096", "8192"])]
    pub dims: Vec<Dims>,
    /// Algorithms to time. Repeatable.
    #[arg(long = "algo", default_values = ["m4rm", "m4rm-blocked", "m4rm-t8", "strassen"])]
    pub algos: Vec<Algo>,
    /// Timed repetitions per measurement (one untimed warm-up run precedes them).
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Check the last product of each measurement against the cubic algorithm.
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub rows: usize,
    #[arg(long)]
    pub cols: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Write the identity instead of a random matrix (requires rows == cols).
    #[arg(long)]
    pub identity: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MulArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "auto")]
    pub algo: Algo,
    #[command(flatten)]
    pub params: ParamArgs,
}

/// Problem shape: A is `m x l`, B is `l x n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub m: usize,
    pub l: usize,
    pub n: usize,
}

impl FromStr for Dims {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let parts: Vec<usize> = s
            .split(['x', 'X'])
            .map(|p| p.trim().parse::<usize>().map_err(|_| format!("bad dimension `{p}` in `{s}`")))
            .collect::<std::result::Result<_, _>>()?;
        match parts[..] {
            [d] => Ok(Dims { m: d, l: d, n: d }),
            [m, l, n] => Ok(Dims { m, l, n }),
            _ => Err(format!("expected MxLxN or N, got `{s}`")),
        }
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.m, self.l, self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Cubic,
    /// One table per stripe, no row blocking.
    M4rm,
    /// One table per stripe, row-blocked.
    M4rmBlocked,
    /// `t` tables per stripe group, row-blocked.
    M4rmTables(usize),
    Strassen,
    Auto,
}

impl FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "cubic" => Algo::Cubic,
            "m4rm" => Algo::M4rm,
            "m4rm-blocked" => Algo::M4rmBlocked,
            "strassen" => Algo::Strassen,
            "auto" => Algo::Auto,
            _ => {
                let t = s
                    .strip_prefix("m4rm-t")
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| format!("unknown algorithm `{s}`"))?;
                if !(1..=m4rm::MAX_TABLES).contains(&t) {
                    return Err(format!("table count {t} outside 1..={}", m4rm::MAX_TABLES));
                }
                Algo::M4rmTables(t)
            }
        })
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algo::Cubic => f.write_str("cubic"),
            Algo::M4rm => f.write_str("m4rm"),
            Algo::M4rmBlocked => f.write_str("m4rm-blocked"),
            Algo::M4rmTables(t) => write!(f, "m4rm-t{t}"),
            Algo::Strassen => f.write_str("strassen"),
            Algo::Auto => f.write_str("auto"),
        }
    }
}

/// Effective `(k, t, b_s, cutoff)` an algorithm runs with; unused fields are 0.
pub fn effective_params(algo: Algo, params: &MulParams, ncols: usize) -> (usize, usize, usize, usize) {
    let k_for = |t: usize| if params.k == 0 { choose_k(params.b_s, params.l1_bytes, t, ncols) } else { params.k };
    match algo {
        Algo::Cubic => (0, 0, 0, 0),
        Algo::M4rm => (k_for(1), 1, 0, 0),
        Algo::M4rmBlocked => (k_for(1), 1, params.b_s, 0),
        Algo::M4rmTables(t) => (k_for(t), t, params.b_s, 0),
        Algo::Strassen | Algo::Auto => (params.k, params.t, params.b_s, params.cutoff),
    }
}

pub fn run_algo(algo: Algo, a: &BitMatrix, b: &BitMatrix, params: &MulParams) -> Result<BitMatrix> {
    let (k, t, b_s, _) = effective_params(algo, params, b.ncols());
    match algo {
        Algo::Cubic => cubic::mul_cubic(a, b),
        Algo::M4rm => m4rm::mul_m4rm(a, b, k),
        Algo::M4rmBlocked => m4rm::mul_m4rm_blocked(a, b, k, b_s),
        Algo::M4rmTables(_) => m4rm::mul_m4rm_multitable(a, b, k, t, b_s),
        Algo::Strassen | Algo::Auto => strassen::mul_strassen(a, b, params),
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Dimension(_) | Error::Alignment { .. } | Error::Parameter(_) => EXIT_USAGE,
        Error::Format { .. } | Error::Io { .. } => EXIT_IO,
    }
}

/// Runs a parsed command, writing normal output to `out`. Returns the
/// process exit status.
pub fn run(cli: Cli, out: &mut dyn std::io::Write) -> i32 {
    let result = match cli.command {
        Command::Check(args) => check::run(&args, out),
        Command::Bench(args) => bench::run(&args, out),
        Command::Gen(args) => gen(&args),
        Command::Mul(args) => mul(&args),
        Command::Params(args) => show_params(&args, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("gf2mat: {e}");
            exit_code(&e)
        }
    }
}

fn gen(args: &GenArgs) -> Result<i32> {
    let m = if args.identity {
        if args.rows != args.cols {
            return Err(Error::Dimension(format!("identity must be square, got {}x{}", args.rows, args.cols)));
        }
        BitMatrix::identity(args.rows)
    } else {
        BitMatrix::random(args.rows, args.cols, args.seed)
    };
    io::save(&args.out, &m)?;
    Ok(0)
}

fn mul(args: &MulArgs) -> Result<i32> {
    let params = args.params.resolve()?;
    let a = io::load(&args.a)?;
    let b = io::load(&args.b)?;
    let c = run_algo(args.algo, &a, &b, &params)?;
    io::save(&args.out, &c)?;
    Ok(0)
}

fn show_params(args: &ParamArgs, out: &mut dyn std::io::Write) -> Result<i32> {
    let p = args.resolve()?;
    let k = if p.k == 0 { "auto".to_string() } else { p.k.to_string() };
    let text = format!(
        "cutoff={}\nbs={}\nk={}\nt={}\nl1_bytes={}\nl2_bytes={}\n",
        p.cutoff, p.b_s, k, p.t, p.l1_bytes, p.l2_bytes
    );
    out.write_all(text.as_bytes()).map_err(|source| Error::Io { path: "<stdout>".into(), source })?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_dims() {
        assert_eq!("3x4x5".parse::<Dims>().unwrap(), Dims { m: 3, l: 4, n: 5 });
        assert_eq!("7".parse::<Dims>().unwrap(), Dims { m: 7, l: 7, n: 7 });
        assert!("3x4".parse::<Dims>().is_err());
        assert!("ax4x5".parse::<Dims>().is_err());
    }

    #[test]
    fn parse_algos() {
        for name in ["cubic", "m4rm", "m4rm-blocked", "m4rm-t1", "m4rm-t8", "strassen", "auto"] {
            assert_eq!(name.parse::<Algo>().unwrap().to_string(), name);
        }
        assert!("m4rm-t9".parse::<Algo>().is_err());
        assert!("m4rm-t0".parse::<Algo>().is_err());
        assert!("fast".parse::<Algo>().is_err());
    }

    #[test]
    fn every_algorithm_runs() {
        let a = BitMatrix::random(90, 130, 1);
        let b = BitMatrix::random(130, 70, 2);
        let want = cubic::mul_cubic(&a, &b).unwrap();
        let p = MulParams::with_cutoff(64);
        for algo in [Algo::Cubic, Algo::M4rm, Algo::M4rmBlocked, Algo::M4rmTables(3), Algo::Strassen, Algo::Auto] {
            assert_eq!(run_algo(algo, &a, &b, &p).unwrap(), want, "{algo}");
        }
    }
}

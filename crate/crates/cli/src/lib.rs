//! Command-line front end for `realop-core`: per-operation commands, the two
//! counterexample reproductions and the invariant suites. Every command
//! produces a [`Report`] whose exit code follows 0 = pass, 1 = refuted,
//! 2 = invalid input or inconclusive.

use std::cell::RefCell;
use std::collections::BTreeMap;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

mod commands;
pub mod input;
pub mod report;
pub mod suites;

pub use report::{Header, Measurement, Report, Status};

pub const DEFAULT_SEED: u64 = 0xC0FFEE;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Core(#[from] realop_core::Error),
}

#[derive(Debug, Parser)]
#[command(
    name = "realop",
    version,
    about = "Matrix-level computations on finite-dimensional real operator spaces"
)]
pub struct Cli {
    /// Base seed for every random stream (decimal or 0x-hex).
    #[arg(long, global = true, default_value = "0xC0FFEE", value_parser = parse_seed)]
    pub seed: u64,
    /// Override the command's tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Print the report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads for parallel restarts.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let r = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    r.map_err(|e| format!("invalid seed `{s}`: {e}"))
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(untagged)]
pub enum Command {
    /// Level-n norm of an element.
    Norm(NormArgs),
    /// Complexify a space; with --x/--y, the norm of x + iy.
    Complexify(ComplexifyArgs),
    /// Concrete realization of the minimal quantization of a polytope Banach space.
    QuantizeMin(QuantizeMinArgs),
    /// Norm of x + iy in the minimal complexification of a Banach space.
    W2Norm(W2Args),
    /// Bounds on the maximal quantization norm of (A_1, ..., A_d) over l1_d.
    MaxL1(MaxL1Args),
    /// Certify or refute a complete left M-projection.
    CertifyMproj(CertifyArgs),
    /// Check u(x) = a x on a basis, or solve for a.
    MultiplierWitness(MultiplierArgs),
    /// Whether a subspace of an algebra is a right ideal.
    RightIdeal(RightIdealArgs),
    /// Sampled check of ||x y|| <= ||x|| ||y|| at matrix levels.
    BrsCheck(BrsArgs),
    /// Adjoin a unit and compare with complexification.
    Unitize(UnitizeArgs),
    /// Build the Paulsen system; with --map, test positivity transfer.
    Paulsen(PaulsenArgs),
    /// Product on the range of a conditional expectation.
    ChoiEffros(ChoiEffrosArgs),
    /// Whether a space is closed under x y^T z.
    TroCheck(SpaceArgs),
    /// Ternary closure of a space.
    Subtriple(SubtripleArgs),
    /// The inner product y^T z on a TRO.
    Shilov(ShilovArgs),
    /// Norm of x + J in a quotient.
    QuotientNorm(QuotientArgs),
    /// Rerun a named counterexample.
    Reproduce(ReproduceArgs),
    /// Run invariant suites: all, linalg, opspace, quantization, mideal, systems.
    Verify(VerifyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Norm(_) => "norm",
            Command::Complexify(_) => "complexify",
            Command::QuantizeMin(_) => "quantize-min",
            Command::W2Norm(_) => "w2-norm",
            Command::MaxL1(_) => "max-l1",
            Command::CertifyMproj(_) => "certify-mproj",
            Command::MultiplierWitness(_) => "multiplier-witness",
            Command::RightIdeal(_) => "right-ideal",
            Command::BrsCheck(_) => "brs-check",
            Command::Unitize(_) => "unitize",
            Command::Paulsen(_) => "paulsen",
            Command::ChoiEffros(_) => "choi-effros",
            Command::TroCheck(_) => "tro-check",
            Command::Subtriple(_) => "subtriple",
            Command::Shilov(_) => "shilov",
            Command::QuotientNorm(_) => "quotient-norm",
            Command::Reproduce(_) => "reproduce",
            Command::Verify(_) => "verify",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SpaceArgs {
    #[arg(long)]
    pub space: String,
}

#[derive(Debug, Args, Serialize)]
pub struct NormArgs {
    #[arg(long)]
    pub space: String,
    /// Element as {"level": n, "coeffs": [[[...]]]}.
    #[arg(long)]
    pub elem: String,
}

#[derive(Debug, Args, Serialize)]
pub struct ComplexifyArgs {
    #[arg(long)]
    pub space: String,
    #[arg(long, requires = "y")]
    pub x: Option<String>,
    #[arg(long, requires = "x")]
    pub y: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct QuantizeMinArgs {
    /// Banach space as {"dim": d, "functionals": [[...]]}.
    #[arg(long)]
    pub banach: String,
    #[arg(long)]
    pub elem: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct W2Args {
    #[arg(long)]
    pub banach: String,
    #[arg(long)]
    pub x: String,
    #[arg(long)]
    pub y: String,
}

#[derive(Debug, Args, Serialize)]
pub struct MaxL1Args {
    /// JSON list of d coefficient matrices.
    #[arg(long)]
    pub coeffs: String,
    #[arg(long, default_value_t = 4)]
    pub mmax: usize,
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct CertifyArgs {
    #[arg(long)]
    pub space: String,
    #[arg(long)]
    pub proj: String,
    #[arg(long, default_value_t = 3)]
    pub max_level: usize,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct MultiplierArgs {
    #[arg(long)]
    pub space: String,
    #[arg(long)]
    pub map: String,
    /// Candidate multiplier; solved for when omitted.
    #[arg(long)]
    pub a: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct RightIdealArgs {
    #[arg(long)]
    pub algebra: String,
    /// JSON list of coefficient vectors spanning J.
    #[arg(long)]
    pub subspace: String,
}

#[derive(Debug, Args, Serialize)]
pub struct BrsArgs {
    #[arg(long)]
    pub algebra: String,
    #[arg(long, default_value_t = 3)]
    pub max_level: usize,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct UnitizeArgs {
    #[arg(long)]
    pub algebra: String,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct PaulsenArgs {
    #[arg(long)]
    pub space: String,
    /// Map on the space whose Paulsen extension is tested for positivity.
    #[arg(long)]
    pub map: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub levels: usize,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ChoiEffrosArgs {
    #[arg(long)]
    pub algebra: String,
    #[arg(long)]
    pub idempotent: String,
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SubtripleArgs {
    #[arg(long)]
    pub space: String,
    #[arg(long, default_value_t = 16)]
    pub max_iters: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ShilovArgs {
    #[arg(long)]
    pub space: String,
    /// Level-1 coefficient vector.
    #[arg(long)]
    pub y: String,
    #[arg(long)]
    pub z: String,
}

#[derive(Debug, Args, Serialize)]
pub struct QuotientArgs {
    #[arg(long)]
    pub space: String,
    #[arg(long)]
    pub subspace: String,
    #[arg(long)]
    pub elem: String,
    #[arg(long, default_value_t = 5000)]
    pub max_iters: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ReproduceArgs {
    /// l12-nonunique or complex-dual.
    pub name: String,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    pub suite: String,
    /// With --proj, the mideal suite also certifies this projection.
    #[arg(long, requires = "proj")]
    pub space: Option<String>,
    #[arg(long, requires = "space")]
    pub proj: Option<String>,
}

/// Global settings visible to every handler. Handlers record the effective
/// value of every defaulted setting they use so the header is complete.
pub struct Ctx {
    pub seed: u64,
    tol: Option<f64>,
    recorded: RefCell<BTreeMap<String, Value>>,
}

impl Ctx {
    pub fn new(seed: u64, tol: Option<f64>) -> Self {
        Ctx {
            seed,
            tol,
            recorded: RefCell::new(BTreeMap::new()),
        }
    }

    /// The --tol override or the command default, recorded as `tol`.
    pub fn tol_or(&self, default: f64) -> f64 {
        let t = self.tol.unwrap_or(default);
        self.record("tol", t);
        t
    }

    pub fn record(&self, key: &str, v: impl Serialize) {
        let v = serde_json::to_value(v).expect("parameters serialize");
        self.recorded.borrow_mut().insert(key.to_string(), v);
    }
}

/// What a handler hands back; the overall status defaults to "all
/// measurements pass".
pub struct Outcome {
    pub status: Option<Status>,
    pub measurements: Vec<Measurement>,
    pub details: Value,
}

impl Outcome {
    pub fn new(measurements: Vec<Measurement>, details: Value) -> Self {
        Outcome {
            status: None,
            measurements,
            details,
        }
    }

    pub fn with_status(mut self, s: Status) -> Self {
        self.status = Some(s);
        self
    }
}

/// Runs a parsed command line on the current thread pool.
pub fn run(cli: &Cli) -> Report {
    let ctx = Ctx::new(cli.seed, cli.tol);
    let result = commands::dispatch(&ctx, &cli.command);
    let mut parameters = match serde_json::to_value(&cli.command).expect("arguments serialize") {
        Value::Object(m) => m.into_iter().filter(|(_, v)| !v.is_null()).collect(),
        _ => BTreeMap::new(),
    };
    parameters.extend(ctx.recorded.take());
    let header = Header {
        tool: "realop",
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name().to_string(),
        seed: cli.seed,
        threads: cli.threads,
        parameters,
    };
    match result {
        Ok(o) => {
            let pass = o.measurements.iter().all(|m| m.pass);
            let status = o.status.unwrap_or(Status::from_pass(pass));
            Report::new(header, status, o.measurements, o.details)
        }
        Err(CliError::Core(realop_core::Error::NotIdempotent { defect })) => Report::failed(
            header,
            Status::Invalid,
            format!("precondition failed: map is not idempotent (defect {defect:e})"),
        ),
        Err(e) => Report::failed(header, Status::Invalid, e.to_string()),
    }
}

/// Parses arguments, runs with the requested number of workers and returns
/// the rendered report and exit code.
pub fn run_args<I, T>(args: I) -> (String, i32)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            return (e.render().to_string(), code);
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.max(1))
        .build()
    {
        Ok(p) => p,
        Err(e) => return (format!("cannot start worker pool: {e}\n"), 2),
    };
    let report = pool.install(|| run(&cli));
    let out = if cli.json {
        let mut s = report.to_json();
        s.push('\n');
        s
    } else {
        report.to_text()
    };
    (out, report.exit_code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_accept_hex_and_decimal() {
        assert_eq!(parse_seed("0xC0FFEE").unwrap(), DEFAULT_SEED);
        assert_eq!(parse_seed("12").unwrap(), 12);
        assert!(parse_seed("zz").is_err());
    }

    #[test]
    fn header_records_defaults() {
        let cli = Cli::try_parse_from(["realop", "reproduce", "nope"]).unwrap();
        let r = run(&cli);
        assert_eq!(r.exit_code, 2);
        assert_eq!(r.header.seed, DEFAULT_SEED);
        assert_eq!(r.header.parameters["name"], "nope");
        assert_eq!(r.header.threads, 1);
    }

    #[test]
    fn usage_errors_exit_two() {
        let (msg, code) = run_args(["realop", "norm"]);
        assert_eq!(code, 2);
        assert!(msg.contains("--space"));
        let (_, code) = run_args(["realop", "--help"]);
        assert_eq!(code, 0);
    }
}

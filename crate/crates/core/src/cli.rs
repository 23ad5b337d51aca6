//! Command-line front end.
//!
//! [`run`] does all the work and returns captured output so tests can drive
//! the binary logic without spawning a process.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::agent_target::AtmSpec;
use crate::bitset::ContractSet;
use crate::conditions::{Condition, ConditionTable};
use crate::csd::{csd, AgentOrder};
use crate::error::Error;
use crate::exec::Exec;
use crate::market::Market;
use crate::random::{random_market_filtered, RandomMarketParams};
use crate::stability::Auditor;
use crate::text::{market_to_text, parse_market};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_RESOURCE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Structured,
}

#[derive(Debug, Parser)]
#[command(
    name = "multimatch",
    version,
    about = "Audit and solve multilateral matching markets"
)]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a market file
    Check { path: PathBuf },
    /// Report stability properties of one outcome
    Audit {
        path: PathBuf,
        /// Outcome as a set literal, e.g. {x,y}
        #[arg(long)]
        outcome: String,
    },
    /// Table of preference conditions per agent
    Conditions {
        path: PathBuf,
        /// Only check this condition
        #[arg(long, value_parser = parse_condition)]
        condition: Option<Condition>,
    },
    /// Run constrained serial dictatorship
    Csd {
        path: PathBuf,
        /// Comma-separated agent names
        #[arg(long, conflicts_with = "seed")]
        order: Option<String>,
        /// Draw the ordering at random from this seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List all individually rational outcomes
    Ir { path: PathBuf },
    /// List the constrained-efficient individually rational outcomes
    Efficient { path: PathBuf },
    /// Compile an agent-target specification into a market file
    CompileAtm {
        path: PathBuf,
        #[arg(short = 'o')]
        out: Option<PathBuf>,
    },
    /// Generate a random market file
    Random {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        agents: usize,
        #[arg(long, default_value_t = 4)]
        contracts: usize,
        #[arg(long, default_value_t = 3)]
        max_signers: usize,
        #[arg(long, default_value_t = 4)]
        max_portfolios: usize,
        /// Resample preferences until every agent satisfies this condition
        #[arg(long, value_parser = parse_condition)]
        condition: Option<Condition>,
    },
}

fn parse_condition(s: &str) -> Result<Condition, String> {
    Condition::parse(s).ok_or_else(|| {
        let names: Vec<&str> = Condition::ALL.iter().map(|c| c.as_str()).collect();
        format!(
            "unknown condition `{s}` (expected one of {})",
            names.join(", ")
        )
    })
}

/// Captured result of one invocation.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Self {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: i32, stderr: String) -> Self {
        Self {
            code,
            stdout: String::new(),
            stderr,
        }
    }
}

enum Failure {
    Io(String),
    Engine(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Engine(e)
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::CapExceeded { .. } | Error::SamplingExhausted { .. } => EXIT_RESOURCE,
        _ => EXIT_INVALID,
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Market, Failure> {
    Ok(parse_market(&read(path)?)?)
}

pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match CliConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Output::ok(text)
            } else {
                Output::fail(code, text)
            };
        }
    };
    match execute(&config) {
        Ok(out) => Output::ok(out),
        Err(Failure::Io(msg)) => Output::fail(EXIT_IO, format!("error: {msg}\n")),
        Err(Failure::Engine(e)) => Output::fail(exit_code(&e), format!("error: {e}\n")),
    }
}

fn execute(config: &CliConfig) -> Result<String, Failure> {
    let format = config.format;
    match &config.command {
        Command::Check { path } => {
            load(path)?;
            Ok("OK\n".into())
        }
        Command::Audit { path, outcome } => {
            let m = load(path)?;
            let y = m.parse_set(outcome)?;
            let report = Auditor::new(&m)?.audit(y);
            Ok(match format {
                Format::Text => report.to_text(&m),
                Format::Structured => report.to_structured(&m),
            })
        }
        Command::Conditions { path, condition } => {
            let m = load(path)?;
            let conditions = match condition {
                Some(c) => vec![*c],
                None => Condition::ALL.to_vec(),
            };
            let table = ConditionTable::compute(&m, &conditions, Exec::default())?;
            Ok(match format {
                Format::Text => table.to_text(&m),
                Format::Structured => table.to_structured(&m),
            })
        }
        Command::Csd { path, order, seed } => {
            let m = load(path)?;
            let order = match (order, seed) {
                (Some(text), _) => AgentOrder::parse(&m, text)?,
                (None, Some(seed)) => AgentOrder::random(&m, *seed),
                (None, None) => {
                    return Err(Error::InvalidOrdering("pass --order or --seed".into()).into())
                }
            };
            let trace = csd(&Auditor::new(&m)?, &order);
            Ok(match format {
                Format::Text => format!("order={}\n{}", order.format(&m), trace.to_text(&m)),
                Format::Structured => trace.to_structured(&m),
            })
        }
        Command::Ir { path } => {
            let m = load(path)?;
            let auditor = Auditor::new(&m)?;
            Ok(outcome_list(&m, auditor.enumerate_ir(), format))
        }
        Command::Efficient { path } => {
            let m = load(path)?;
            let auditor = Auditor::new(&m)?;
            Ok(outcome_list(&m, &auditor.enumerate_efficient(), format))
        }
        Command::CompileAtm { path, out } => {
            let spec = AtmSpec::parse(&read(path)?)?;
            let text = market_to_text(&spec.compile()?);
            match out {
                Some(out) => {
                    fs::write(out, &text)
                        .map_err(|e| Failure::Io(format!("{}: {e}", out.display())))?;
                    Ok(String::new())
                }
                None => Ok(text),
            }
        }
        Command::Random {
            seed,
            agents,
            contracts,
            max_signers,
            max_portfolios,
            condition,
        } => {
            let params = RandomMarketParams {
                agents: *agents,
                contracts: *contracts,
                max_signers: *max_signers,
                max_portfolios: *max_portfolios,
                seed: *seed,
            };
            let (m, _) = random_market_filtered(&params, *condition)?;
            Ok(market_to_text(&m))
        }
    }
}

fn outcome_list(m: &Market, sets: &[ContractSet], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Text => {
            for &s in sets {
                let _ = writeln!(out, "{}", m.format_set(s));
            }
        }
        Format::Structured => {
            let _ = writeln!(out, "count={}", sets.len());
            for (k, &s) in sets.iter().enumerate() {
                let _ = writeln!(out, "outcome.{}={}", k + 1, m.format_set(s));
            }
        }
    }
    out
}

//! Command-line front end.
//!
//! Every subcommand reads a JSON [`RunConfig`] (a file, a built-in preset, or
//! nothing) and applies flag overrides on top. Exit codes: 0 success,
//! 2 convergence failure, 3 unitarity failure, 4 configuration error.

mod commands;
mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{
    check_unitarity, cmd_overlap, cmd_resonances, cmd_sa, cmd_transmission, overlap_csv, parse_resonance_csv,
    OverlapRow, ResonanceCsvRow, ResonanceRow, ResonanceTable, SaOutput, TransmissionReport, OVERLAP_CSV_HEADER,
    RESONANCE_CSV_HEADER,
};
pub use config::{
    describe, RunConfig, SaConfig, TransmissionConfig, DEFAULT_PRECISION_DIGITS, MIN_RPM_DIGITS, PRECISION_ENV,
};

use crate::model::PotentialSpec;
use crate::mp::Param;
use crate::rpm::{Parity, RpmError};
use crate::scattering::{BWParams, ScatteringError};
use crate::siegert::SiegertError;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("unitarity failure: {0}")]
    Unitarity(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Convergence(_) => 2,
            Self::Unitarity(_) => 3,
            Self::Config(_) => 4,
        }
    }
}

impl From<RpmError> for CliError {
    fn from(e: RpmError) -> Self {
        match e {
            RpmError::InvalidInput(_) | RpmError::CoefficientLength { .. } => Self::Config(e.to_string()),
            _ => Self::Convergence(e.to_string()),
        }
    }
}

impl From<ScatteringError> for CliError {
    fn from(e: ScatteringError) -> Self {
        match e {
            ScatteringError::Unitarity { .. } => Self::Unitarity(e.to_string()),
            ScatteringError::ClosedChannel { .. } | ScatteringError::NoAsymptote | ScatteringError::InvalidInput(_) => {
                Self::Config(e.to_string())
            }
            _ => Self::Convergence(e.to_string()),
        }
    }
}

impl From<SiegertError> for CliError {
    fn from(e: SiegertError) -> Self {
        match e {
            SiegertError::Scattering(inner) => inner.into(),
            SiegertError::InvalidInput(_) | SiegertError::Model(_) | SiegertError::Radius { .. } => {
                Self::Config(e.to_string())
            }
            _ => Self::Convergence(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "resonance", version, about = "Riccati-Padé resonances and transmission of symmetric 1-D potentials")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Lowest bound states and resonances.
    Resonances {
        #[command(flatten)]
        common: CommonArgs,
        /// Print the full-precision CSV instead of the table.
        #[arg(long)]
        csv: bool,
    },
    /// Transmission curve as CSV.
    Transmission {
        #[command(flatten)]
        common: CommonArgs,
        /// Energy window `lo,hi`.
        #[arg(long, value_delimiter = ',')]
        range: Option<Vec<f64>>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Siegert-approximation width as JSON.
    Sa {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        epsilon_t: Option<f64>,
        /// Peak search window `lo,hi` when no resonance is given.
        #[arg(long, value_delimiter = ',')]
        bracket: Option<Vec<f64>>,
    },
    /// First two resonances across a v0 sweep, with overlap flags.
    Overlap {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args, Debug, Default, Clone)]
pub struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in configuration: weak-barrier, barrier-sweep, well-barrier, overlap.
    #[arg(long, conflicts_with = "config")]
    pub preset: Option<String>,
    /// Working precision in decimal digits.
    #[arg(long)]
    pub precision: Option<u32>,
    /// File for the CSV/JSON output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Potential kind: gaussian or kg.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub v0: Option<Param>,
    #[arg(long)]
    pub lambda: Option<Param>,
    #[arg(long = "J", alias = "j")]
    pub j: Option<Param>,
    /// Comma-separated v0 sweep of a gaussian.
    #[arg(long, value_delimiter = ',')]
    pub v0_values: Option<Vec<Param>>,
    /// 0, 1 or both.
    #[arg(long)]
    pub parity: Option<String>,
    /// Hankel displacement d.
    #[arg(long = "d")]
    pub displacement: Option<usize>,
    #[arg(long)]
    pub d_max: Option<usize>,
    #[arg(long)]
    pub bound_d_max: Option<usize>,
    #[arg(long)]
    pub count: Option<usize>,
    /// Search box, real part `lo,hi`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub re: Option<Vec<f64>>,
    /// Search box, imaginary part `lo,hi` (lo < hi <= 0).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub im: Option<Vec<f64>>,
    /// Seed grid resolution `n_re,n_im`.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<usize>>,
    /// Known resonance position.
    #[arg(long, requires = "epsilon_i")]
    pub epsilon_r: Option<f64>,
    /// Known resonance imaginary part (sign ignored).
    #[arg(long, requires = "epsilon_r", allow_hyphen_values = true)]
    pub epsilon_i: Option<f64>,
}

fn pair<T: Copy>(flag: &str, values: &[T]) -> Result<(T, T), CliError> {
    match values {
        [a, b] => Ok((*a, *b)),
        _ => Err(CliError::Config(format!("--{flag} takes two comma-separated values"))),
    }
}

fn parse_parities(text: &str) -> Result<Vec<Parity>, CliError> {
    match text {
        "0" | "even" => Ok(vec![Parity::Even]),
        "1" | "odd" => Ok(vec![Parity::Odd]),
        "both" => Ok(vec![Parity::Even, Parity::Odd]),
        _ => Err(CliError::Config(format!("parity must be 0, 1 or both, got {text:?}"))),
    }
}

fn override_potential(base: Option<PotentialSpec>, args: &CommonArgs) -> Result<Option<PotentialSpec>, CliError> {
    let missing = |what: &str| CliError::Config(format!("--{what} is required for this potential"));
    let potential = match args.kind.as_deref() {
        None => base,
        Some("gaussian") => {
            let (v0, lambda) = match &base {
                Some(PotentialSpec::GaussianDoubleBarrier { v0, lambda }) => (Some(v0.clone()), Some(lambda.clone())),
                _ => (None, None),
            };
            Some(PotentialSpec::gaussian(
                args.v0.clone().or(v0).ok_or_else(|| missing("v0"))?,
                args.lambda.clone().or(lambda).ok_or_else(|| missing("lambda"))?,
            ))
        }
        Some("kg") => {
            let (j, lambda) = match &base {
                Some(PotentialSpec::KgWellBarrier { j, lambda }) => (Some(j.clone()), Some(lambda.clone())),
                _ => (None, None),
            };
            Some(PotentialSpec::kg(
                args.j.clone().or(j).ok_or_else(|| missing("J"))?,
                args.lambda.clone().or(lambda).ok_or_else(|| missing("lambda"))?,
            ))
        }
        Some(other) => return Err(CliError::Config(format!("unknown potential kind {other:?}"))),
    };
    Ok(match potential {
        Some(PotentialSpec::GaussianDoubleBarrier { v0, lambda }) => Some(PotentialSpec::gaussian(
            args.v0.clone().unwrap_or(v0),
            args.lambda.clone().unwrap_or(lambda),
        )),
        Some(PotentialSpec::KgWellBarrier { j, lambda }) => Some(PotentialSpec::kg(
            args.j.clone().unwrap_or(j),
            args.lambda.clone().unwrap_or(lambda),
        )),
        other => other,
    })
}

/// The run configuration after applying `args` to the file or preset.
pub fn resolve(args: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut config = match (&args.config, &args.preset) {
        (Some(path), _) => RunConfig::from_file(path)?,
        (None, Some(name)) => RunConfig::preset(name)?,
        (None, None) => RunConfig::default(),
    };
    config.potential = override_potential(config.potential.take(), args)?;
    if let Some(values) = &args.v0_values {
        config.v0_values = values.clone();
    }
    if let Some(p) = args.precision {
        config.precision_digits = Some(p);
    }
    if let Some(path) = &args.output {
        config.output = Some(path.clone());
    }
    if let Some(text) = &args.parity {
        let parities = parse_parities(text)?;
        config.sa.parity = parities[0];
        config.search.parities = parities;
    }
    let search = &mut config.search;
    if let Some(d) = args.displacement {
        search.displacement = d;
    }
    if let Some(d) = args.d_max {
        search.d_max = d;
    }
    if let Some(d) = args.bound_d_max {
        search.bound_d_max = Some(d);
    }
    if let Some(n) = args.count {
        search.count = n;
    }
    if let Some(re) = &args.re {
        search.re = pair("re", re)?;
    }
    if let Some(im) = &args.im {
        search.im = pair("im", im)?;
    }
    if let Some(g) = &args.grid {
        search.grid = pair("grid", g)?;
    }
    if let (Some(r), Some(i)) = (args.epsilon_r, args.epsilon_i) {
        config.resonance = Some(BWParams::new(r, i));
    }
    Ok(config)
}

fn emit(config: &RunConfig, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match &config.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Config(format!("cannot write output: {e}"))),
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    let console = |out: &mut dyn Write, text: &str| {
        out.write_all(text.as_bytes())
            .map_err(|e| CliError::Config(format!("cannot write output: {e}")))
    };
    match command {
        Command::Resonances { common, csv } => {
            let config = resolve(&common)?;
            config.check_output()?;
            let table = cmd_resonances(&config)?;
            if config.output.is_some() {
                emit(&config, &table.to_csv(), out)?;
                console(out, &table.render())?;
            } else if csv {
                console(out, &table.to_csv())?;
            } else {
                console(out, &table.render())?;
            }
            if let Some((label, found)) = table.shortfall.first() {
                return Err(CliError::Convergence(format!(
                    "{label}: {found} of {} requested states converged",
                    config.search.count
                )));
            }
            Ok(())
        }
        Command::Transmission {
            common,
            range,
            points,
        } => {
            let mut config = resolve(&common)?;
            if let Some(r) = range {
                config.transmission.range = Some(pair("range", &r)?);
            }
            if let Some(n) = points {
                config.transmission.points = n;
            }
            config.check_output()?;
            let report = cmd_transmission(&config)?;
            emit(&config, &report.to_csv(), out)?;
            check_unitarity(&report)
        }
        Command::Sa {
            common,
            epsilon_t,
            bracket,
        } => {
            let mut config = resolve(&common)?;
            if epsilon_t.is_some() {
                config.sa.epsilon_t = epsilon_t;
            }
            if let Some(b) = bracket {
                config.sa.bracket = Some(pair("bracket", &b)?);
            }
            config.check_output()?;
            let report = cmd_sa(&config)?;
            let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
            text.push('\n');
            emit(&config, &text, out)
        }
        Command::Overlap { common } => {
            let config = resolve(&common)?;
            config.check_output()?;
            let rows = cmd_overlap(&config)?;
            emit(&config, &overlap_csv(&rows), out)
        }
    }
}

/// Parses `args` and runs the command, writing results to `out` and
/// diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

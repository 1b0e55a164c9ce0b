use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use meancount::commands::{dispatch, Inputs};
use meancount::config::{Command, ConfigFile, Format, LadderOverrides, RunConfig};
use meancount::error::{CliError, EXIT_OK};
use meancount::io::{parse_points, parse_reals, parse_rect, write_atomic};

#[derive(Parser, Debug)]
#[command(
    name = "meancount",
    version,
    about = "Mean counting functions of Dirichlet series"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Evaluate a series at points.
    Eval,
    /// Zeros of a series in a rectangle.
    Zeros,
    /// Jessen function on a list of abscissas.
    Jessen,
    /// Counting sums of zeros to the right of each abscissa.
    Counting,
    /// Mean counting function of a symbol on points or a grid.
    MeanCounting,
    /// Both sides of the change-of-variables identity.
    Stanton,
    /// Squared Hilbert-Schmidt norm of a composition operator.
    Hs,
    /// Compactness profile along a path toward Re w = 1/2.
    Profile,
    /// Run the oracle battery.
    Selftest,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(clap::Args, Debug)]
struct Opts {
    /// Symbol file (series JSON).
    #[arg(long, global = true)]
    symbol: Option<PathBuf>,
    /// Series file (series JSON).
    #[arg(long, global = true)]
    series: Option<PathBuf>,
    /// A complex number `a+bi` or a grid `re0:re1:n,im0:im1:m`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    w: Option<String>,
    /// A real or a comma-separated list.
    #[arg(long, global = true, allow_hyphen_values = true)]
    sigma: Option<String>,
    /// Rectangle `s0:s1,t0:t1` for `zeros`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    rect: Option<String>,
    /// `default`, or use `--w` for an explicit path.
    #[arg(long, global = true, default_value = "default")]
    path: String,
    /// Points on the default path.
    #[arg(long, global = true, default_value_t = 7)]
    path_len: u32,
    /// Height of the default path.
    #[arg(long, global = true, default_value_t = 0.1, allow_hyphen_values = true)]
    path_height: f64,
    #[arg(long = "T0", global = true)]
    t0: Option<f64>,
    #[arg(long = "T-steps", global = true)]
    t_steps: Option<usize>,
    #[arg(long = "T-growth", global = true)]
    t_growth: Option<f64>,
    /// Absolute and relative tolerance for one-dimensional integrals.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// JSON file with `ladder` and `quadrature` overrides.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

fn command(c: Cmd) -> Command {
    match c {
        Cmd::Eval => Command::Eval,
        Cmd::Zeros => Command::Zeros,
        Cmd::Jessen => Command::Jessen,
        Cmd::Counting => Command::Counting,
        Cmd::MeanCounting => Command::MeanCounting,
        Cmd::Stanton => Command::Stanton,
        Cmd::Hs => Command::Hs,
        Cmd::Profile => Command::Profile,
        Cmd::Selftest => Command::Selftest,
    }
}

fn seed_from_env() -> Result<Option<u64>, CliError> {
    match std::env::var("MEANCOUNT_SEED") {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| {
            CliError::Config(format!("MEANCOUNT_SEED `{s}` is not an unsigned integer"))
        }),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Config(format!("MEANCOUNT_SEED: {e}"))),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let o = cli.opts;
    if let Some(n) = o.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let file = o.config.as_deref().map(ConfigFile::load).transpose()?;
    let flags = LadderOverrides {
        t0: o.t0,
        steps: o.t_steps,
        growth: o.t_growth,
        ..Default::default()
    };
    let mut cfg = RunConfig::new(command(cli.command), file, flags, o.tol, seed_from_env()?)?;
    cfg.output_path = o.out.clone();
    cfg.format = match o.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    if o.path != "default" {
        return Err(CliError::Config(format!(
            "--path `{}`: only `default` is named; give explicit points with --w",
            o.path
        )));
    }
    let inputs = Inputs {
        symbol: o.symbol,
        series: o.series,
        points: o
            .w
            .as_deref()
            .map(parse_points)
            .transpose()?
            .unwrap_or_default(),
        sigmas: o
            .sigma
            .as_deref()
            .map(parse_reals)
            .transpose()?
            .unwrap_or_default(),
        rect: o.rect.as_deref().map(parse_rect).transpose()?,
        path_len: o.path_len,
        path_height: o.path_height,
    };
    let outcome = dispatch(&mut cfg, &inputs)?;
    let bytes = outcome.report.render(cfg.format);
    match &cfg.output_path {
        Some(p) => write_atomic(p, &bytes)?,
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(&bytes)
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    outcome.failure.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("meancount: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gwave::io::{write_json, write_spectrum_csv, write_sweep_csv, Config, SCHEMA_VERSION};
use gwave::pipeline::{self, Prepared};
use gwave::units::G_CONVENTION;
use serde_json::json;
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] gwave::Error),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0} sweep points quarantined")]
    QuarantinedPoints(usize),
    #[error("{0} self-test checks failed")]
    SelfTest(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(gwave::Error::Schema { .. }) => 3,
            CliError::Core(gwave::Error::Quarantined { .. }) | CliError::QuarantinedPoints(_) => 4,
            CliError::Core(gwave::Error::Convergence(_)) => 5,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "gwave", version, about = "Atom-molecule condensates with a g-wave Feshbach coupling")]
struct Cli {
    /// Worker threads for the parallel quadrature and sweeps.
    #[arg(long, global = true, env = "GWAVE_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bogoliubov excitation energies on the configured grid.
    Spectrum(RunArgs),
    /// Beyond-mean-field energy density at the configured state.
    Lhy(RunArgs),
    /// Effective vertex coefficient alpha.
    Alpha(RunArgs),
    /// Stationary densities at the configured detuning.
    Stationarity(RunArgs),
    /// Critical detunings and fields.
    Critical(RunArgs),
    /// Atomic to molecular condensate ratio.
    Ratio(RunArgs),
    /// Phase sweep over detuning or field.
    Sweep(RunArgs),
    /// Fast internal consistency checks.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// `key.path=value`, applied to the config before validation.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn json_bytes<T: serde::Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_json(&mut buf, value)?;
    buf.push(b'\n');
    Ok(buf)
}

/// Returns the payload and, for sweeps, the number of quarantined points.
fn render(name: &str, prep: &Prepared, format: Format) -> Result<(Vec<u8>, usize), CliError> {
    let tabular = matches!(name, "spectrum" | "sweep");
    if format == Format::Csv && !tabular {
        return Err(CliError::Usage(format!("`{name}` only writes json")));
    }
    let mut buf = Vec::new();
    let mut quarantined = 0;
    match name {
        "spectrum" => {
            let rows = pipeline::spectrum(prep)?;
            match format {
                Format::Csv => write_spectrum_csv(&mut buf, &rows)?,
                Format::Json => buf = json_bytes(&rows)?,
            }
        }
        "sweep" => {
            let points = pipeline::sweep(prep)?;
            quarantined = points.iter().filter(|p| !p.diagnostics.stable).count();
            match format {
                Format::Csv => write_sweep_csv(&mut buf, &points, prep.units())?,
                Format::Json => buf = json_bytes(&points)?,
            }
        }
        "lhy" => buf = json_bytes(&pipeline::lhy(prep)?)?,
        "alpha" => buf = json_bytes(&pipeline::alpha(prep)?)?,
        "stationarity" => buf = json_bytes(&pipeline::stationarity(prep)?)?,
        "critical" => buf = json_bytes(&pipeline::critical(prep)?)?,
        "ratio" => buf = json_bytes(&pipeline::ratio(prep)?)?,
        _ => unreachable!(),
    }
    Ok((buf, quarantined))
}

fn run_command(name: &str, args: &RunArgs, threads: usize) -> Result<(), CliError> {
    let started = now();
    let raw = fs::read(&args.config).map_err(|source| CliError::Io {
        path: args.config.clone(),
        source,
    })?;
    let (config, resolved) = Config::load(&args.config, &args.overrides)?;
    let seed = config.seed;
    let prep = Prepared::new(config)?;
    let default = if matches!(name, "spectrum" | "sweep") { Format::Csv } else { Format::Json };
    let format = args.format.unwrap_or(default);
    let (payload, quarantined) = render(name, &prep, format)?;
    write_file(&args.out, &payload)?;

    let manifest = json!({
        "tool": "gwave",
        "version": env!("CARGO_PKG_VERSION"),
        "command": name,
        "config_path": args.config.display().to_string(),
        "config_sha256": sha256_hex(&raw),
        "resolved_config": resolved,
        "overrides": args.overrides,
        "seed": seed,
        "threads": threads,
        "started_unix": started,
        "finished_unix": now(),
        "output": args.out.display().to_string(),
        "output_sha256": sha256_hex(&payload),
        "format": if format == Format::Csv { "csv" } else { "json" },
        "g_convention": G_CONVENTION,
        "schema_version": SCHEMA_VERSION,
        "energy_unit_nk": prep.model.ledger.energy_unit_nk,
        "quarantined_points": quarantined,
    });
    write_file(&manifest_path(&args.out), &json_bytes(&manifest)?)?;
    if quarantined > 0 {
        return Err(CliError::QuarantinedPoints(quarantined));
    }
    Ok(())
}

fn selftest(seed: u64, out: Option<&Path>) -> Result<(), CliError> {
    let rows = gwave::selftest::run(seed);
    for r in &rows {
        println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    if let Some(path) = out {
        write_file(path, &json_bytes(&rows)?)?;
    }
    match rows.iter().filter(|r| !r.passed).count() {
        0 => Ok(()),
        n => Err(CliError::SelfTest(n)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let threads = rayon::current_num_threads();
    let result = match &cli.command {
        Command::Spectrum(a) => run_command("spectrum", a, threads),
        Command::Lhy(a) => run_command("lhy", a, threads),
        Command::Alpha(a) => run_command("alpha", a, threads),
        Command::Stationarity(a) => run_command("stationarity", a, threads),
        Command::Critical(a) => run_command("critical", a, threads),
        Command::Ratio(a) => run_command("ratio", a, threads),
        Command::Sweep(a) => run_command("sweep", a, threads),
        Command::Selftest { seed, out } => selftest(*seed, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

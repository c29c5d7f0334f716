mod verify;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lpplab::experiments::{export_long_csv, run_experiment, ExperimentConfig, CATALOG};
use lpplab::Error;
use serde_json::{Map, Value};

/// Monte Carlo laboratory for exponential last-passage percolation.
#[derive(Parser, Debug)]
#[command(name = "lpplab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a catalog experiment and write `<name>.json` and `<name>.csv`.
    Run {
        /// Experiment name; may instead come from the config file.
        name: Option<String>,
        /// TOML file with experiment keys.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory.
        #[arg(long, env = "LPP_LAB_OUT", default_value = "results")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        /// `key=value` pairs applied last; values use TOML syntax.
        #[arg(long = "override", value_name = "KEY=VALUE", num_args = 1..)]
        overrides: Vec<String>,
    },
    /// Print the experiment catalog.
    List,
    /// Run the fast invariant suite.
    Verify,
    /// Convert a result JSON or CSV into long-format CSV.
    Export {
        input: PathBuf,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure classes mapped onto exit codes.
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::UnknownExperiment(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn parse_value(raw: &str) -> Value {
    match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => serde_json::to_value(t.remove("v").expect("key v")).unwrap_or(Value::Null),
        Err(_) => Value::String(raw.to_string()),
    }
}

fn build_table(
    name: Option<String>,
    config: Option<PathBuf>,
    out: PathBuf,
    seed: Option<u64>,
    workers: Option<usize>,
    overrides: &[String],
) -> Result<Map<String, Value>, Failure> {
    let mut table = Map::new();
    if let Some(path) = config {
        let text = fs::read_to_string(&path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let parsed: toml::Table = text.parse().map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        match serde_json::to_value(parsed) {
            Ok(Value::Object(map)) => table = map,
            _ => return Err(Failure::Usage(format!("{}: not a key-value table", path.display()))),
        }
    }
    if let Some(name) = name {
        table.insert("name".into(), Value::String(name));
    }
    table.insert("output".into(), Value::String(out.to_string_lossy().into_owned()));
    if let Some(seed) = seed {
        table.insert("master_seed".into(), Value::from(seed));
    }
    if let Some(workers) = workers {
        table.insert("workers".into(), Value::from(workers));
    }
    for pair in overrides {
        let (key, raw) = pair
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("override `{pair}` is not of the form key=value")))?;
        table.insert(key.trim().to_string(), parse_value(raw.trim()));
    }
    Ok(table)
}

fn run(table: Map<String, Value>) -> Result<bool, Failure> {
    let config = ExperimentConfig::resolve(&table)?;
    let result = run_experiment(&config)?;
    for v in &result.verdicts {
        println!("{}", v.line());
    }
    if let Some(dir) = &config.output {
        eprintln!("results in {}", dir.display());
    }
    Ok(result.all_pass())
}

fn list() {
    for e in CATALOG {
        println!("{:<18} {:<40} {}", e.name, e.criteria.join(","), e.description);
    }
}

fn verify_suite() -> Result<bool, Failure> {
    let checks = verify::run_suite()?;
    for c in &checks {
        let status = if c.pass() { "PASS" } else { "FAIL" };
        let detail = if c.detail.is_empty() { String::new() } else { format!(" {}", c.detail) };
        println!("INVARIANT {} {status} cases={} failures={}{detail}", c.name, c.cases, c.failures);
    }
    Ok(checks.iter().all(|c| c.pass()))
}

fn export(input: PathBuf, out: Option<PathBuf>) -> Result<bool, Failure> {
    if !input.exists() {
        return Err(Failure::Usage(format!("{}: no such file", input.display())));
    }
    let rows = match out {
        Some(path) => {
            let file = fs::File::create(&path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
            export_long_csv(&input, io::BufWriter::new(file))?
        }
        None => export_long_csv(&input, io::stdout().lock())?,
    };
    eprintln!("{rows} rows");
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { name, config, out, seed, workers, overrides } => {
            build_table(name, config, out, seed, workers, &overrides).and_then(run)
        }
        Command::List => {
            list();
            Ok(true)
        }
        Command::Verify => verify_suite(),
        Command::Export { input, out } => export(input, out),
    };
    let _ = io::stdout().flush();
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

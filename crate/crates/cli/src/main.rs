//! `quditop` — price a European call by simulating a qudit-register
//! amplitude-estimation pipeline, with classical baselines alongside.

mod commands;
mod config;
mod report;

use config::{Command, RunConfig};
use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or configuration; exit status 2.
    Usage(String),
    /// Failure during execution; exit status 1.
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

fn usage() -> &'static str {
    "\
quditop — European call pricing on a simulated qudit register

USAGE:
  quditop <COMMAND> [OPTIONS]

COMMANDS:
  price      Full pipeline on one register size; text summary to stdout,
             JSON report (or shot-record CSV with --format csv) to --out
  sweep-dim  Repeat the pipeline across register sizes; CSV/JSON table
  paths      Sample price paths; long-format CSV (path_id,t,S_t)
  pdf        Export the terminal density: <out>.grid.csv (register
             samples) and <out>.curve.csv (dense curve)

MARKET OPTIONS:
  --s0 X            spot price            --drift X    percentage drift
  --rate X          risk-free rate        --sigma X    percentage volatility
  --maturity X      years to expiry       --strike X   strike price
  --risk-neutral    price with drift pinned to the risk-free rate

REGISTER / PIPELINE OPTIONS:
  --dim D           qudit dimension d           [default 8]
  --qudits N        qudit count n               [default 1]
  --scale-c X       payoff rotation scale c     [default 0.05]
  --trunc-sigmas X  truncation width            [default 3]
  --shots N         shots per schedule level    [default 100]
  --levels T        schedule depth              [default 7]
  --variant V       comparator: linear | single [default linear]
  --mc-samples N    Monte Carlo baseline size   [default 100000]

COMMAND-SPECIFIC:
  --dims RANGE      sweep-dim register sizes, '2..8' or '2,4,8'
  --seeds N         sweep-dim repetitions per size [default 20]
  --paths N         path count for `paths`         [default 10]
  --steps N         steps per path                 [default 250]
  --curve-points N  dense samples for `pdf`        [default 512]

I/O:
  --seed N          seed every random draw (auto-chosen and reported otherwise)
  --config FILE     flat key=value file; flags override file values
  --out PATH        output file (pdf: used as the stem for two files)
  --format F        csv | json, where the command supports both
  --dump-state PATH write oracle-state amplitudes as CSV (price)
  --print-gates     print the comparator/payoff gate list (price)

EXIT STATUS:
  0 success, 2 invalid arguments or configuration, 1 runtime error

EXAMPLES:
  quditop price --seed 7 --out report.json
  quditop sweep-dim --dims 2..8 --seeds 20 --seed 7 --out sweep.csv
  quditop paths --paths 12 --steps 365 --seed 1 --out paths.csv
  quditop pdf --dim 8 --out dist
"
}

fn parse_command(name: &str) -> Result<Command, CliError> {
    match name {
        "price" => Ok(Command::Price),
        "sweep-dim" => Ok(Command::SweepDim),
        "paths" => Ok(Command::Paths),
        "pdf" => Ok(Command::Pdf),
        other => Err(CliError::Usage(format!("unknown command '{other}'"))),
    }
}

const BOOLEAN_FLAGS: &[&str] = &["risk_neutral", "print_gates"];

fn run(args: &[String]) -> Result<(), CliError> {
    if args.is_empty() || args[0] == "--help" || args[0] == "-h" {
        print!("{}", usage());
        return Ok(());
    }
    let cmd = parse_command(&args[0])?;

    // First pass: gather key/value overrides, catching --config early so
    // file values land underneath the flags.
    let mut overrides: Vec<(String, String)> = Vec::new();
    let mut config_path: Option<String> = None;
    let mut it = args[1..].iter().peekable();
    while let Some(arg) = it.next() {
        if arg == "--help" || arg == "-h" {
            print!("{}", usage());
            return Ok(());
        }
        let stripped = arg
            .strip_prefix("--")
            .ok_or_else(|| CliError::Usage(format!("unexpected argument '{arg}'")))?;
        let (raw_key, inline) = match stripped.split_once('=') {
            Some((k, v)) => (k, Some(v.to_string())),
            None => (stripped, None),
        };
        let key = raw_key.replace('-', "_");
        let value = if let Some(v) = inline {
            v
        } else if BOOLEAN_FLAGS.contains(&key.as_str()) {
            "true".to_string()
        } else {
            it.next()
                .ok_or_else(|| CliError::Usage(format!("--{raw_key} expects a value")))?
                .clone()
        };
        if key == "config" {
            config_path = Some(value);
        } else {
            overrides.push((key, value));
        }
    }

    let mut cfg = RunConfig::defaults_for(cmd);
    if let Some(path) = config_path {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Usage(format!("config {path}: {e}")))?;
        for (k, v) in config::parse_config_file(&text)? {
            cfg.apply(&k, &v)?;
        }
    }
    for (k, v) in &overrides {
        cfg.apply(k, v)?;
    }
    commands::dispatch(cmd, &cfg)
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(()) => {}
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run 'quditop --help' for usage");
            std::process::exit(2);
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(1);
        }
    }
}

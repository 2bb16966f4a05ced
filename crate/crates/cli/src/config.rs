//! Run configuration: defaults, config-file parsing, flag overrides and
//! validation.
//!
//! Config files are flat `key = value` text; `#` starts a comment. Keys
//! are the long flag names with dashes replaced by underscores. Values
//! given on the command line override file values, which override the
//! per-command defaults.

use crate::CliError;
use quditop::circuits::ComparatorVariant;
use quditop::grid::build_grid;
use quditop::market::GbmParams;
use quditop::mlae::Schedule;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Price,
    SweepDim,
    Paths,
    Pdf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub s0: f64,
    pub drift: f64,
    pub rate: f64,
    pub sigma: f64,
    pub maturity: f64,
    pub strike: f64,
    pub dim: usize,
    pub qudits: usize,
    pub scale_c: f64,
    pub trunc_sigmas: f64,
    pub shots: usize,
    pub levels: usize,
    pub seed: Option<u64>,
    pub variant: ComparatorVariant,
    pub mc_samples: usize,
    pub risk_neutral: bool,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub dump_state: Option<PathBuf>,
    pub print_gates: bool,
    // sweep-dim
    pub dims: Vec<usize>,
    pub seeds: usize,
    // paths
    pub n_paths: usize,
    pub steps: usize,
    // pdf
    pub curve_points: usize,
}

impl RunConfig {
    /// Per-command defaults. The path sampler defaults to the gentler
    /// drift 0.05 / volatility 0.2 illustration parameters; everything
    /// else defaults to the 8-point pricing configuration.
    pub fn defaults_for(cmd: Command) -> Self {
        let mut cfg = Self {
            s0: 2.0,
            drift: 0.07,
            rate: 0.07,
            sigma: 0.3,
            maturity: 1.0,
            strike: 1.7,
            dim: 8,
            qudits: 1,
            scale_c: quditop::circuits::DEFAULT_SCALE_C,
            trunc_sigmas: quditop::grid::DEFAULT_TRUNC_SIGMAS,
            shots: 100,
            levels: 7,
            seed: None,
            variant: ComparatorVariant::LinearAncilla,
            mc_samples: 100_000,
            risk_neutral: false,
            out: None,
            format: OutputFormat::Json,
            dump_state: None,
            print_gates: false,
            dims: (2..=8).collect(),
            seeds: 20,
            n_paths: 10,
            steps: 250,
            curve_points: 512,
        };
        if cmd == Command::Paths {
            cfg.s0 = 1.0;
            cfg.drift = 0.05;
            cfg.rate = 0.05;
            cfg.sigma = 0.2;
        }
        if cmd != Command::Price {
            cfg.format = OutputFormat::Csv;
        }
        cfg
    }

    /// Apply one `key = value` setting. Returns a field-specific message
    /// on unknown keys or unparseable values.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
            value
                .parse()
                .map_err(|_| CliError::Usage(format!("{key}: cannot parse '{value}'")))
        }
        match key {
            "s0" => self.s0 = num(key, value)?,
            "drift" => self.drift = num(key, value)?,
            "rate" => self.rate = num(key, value)?,
            "sigma" => self.sigma = num(key, value)?,
            "maturity" => self.maturity = num(key, value)?,
            "strike" => self.strike = num(key, value)?,
            "dim" => self.dim = num(key, value)?,
            "qudits" => self.qudits = num(key, value)?,
            "scale_c" => self.scale_c = num(key, value)?,
            "trunc_sigmas" => self.trunc_sigmas = num(key, value)?,
            "shots" => self.shots = num(key, value)?,
            "levels" => self.levels = num(key, value)?,
            "seed" => self.seed = Some(num(key, value)?),
            "variant" => {
                self.variant = value
                    .parse()
                    .map_err(|e| CliError::Usage(format!("variant: {e}")))?;
            }
            "mc_samples" => self.mc_samples = num(key, value)?,
            "risk_neutral" => {
                self.risk_neutral = matches!(value, "true" | "1" | "yes");
            }
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => {
                self.format = match value {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    other => {
                        return Err(CliError::Usage(format!(
                            "format: expected 'csv' or 'json', got '{other}'"
                        )))
                    }
                };
            }
            "dump_state" => self.dump_state = Some(PathBuf::from(value)),
            "print_gates" => self.print_gates = matches!(value, "true" | "1" | "yes"),
            "dims" => self.dims = parse_dims(value)?,
            "seeds" => self.seeds = num(key, value)?,
            "paths" => self.n_paths = num(key, value)?,
            "steps" => self.steps = num(key, value)?,
            "curve_points" => self.curve_points = num(key, value)?,
            other => return Err(CliError::Usage(format!("unknown option '{other}'"))),
        }
        Ok(())
    }

    /// Effective drift: the risk-neutral mode flag pins it to the rate.
    pub fn effective_drift(&self) -> f64 {
        if self.risk_neutral {
            self.rate
        } else {
            self.drift
        }
    }

    pub fn market(&self) -> Result<GbmParams<f64>, CliError> {
        GbmParams::new(
            self.s0,
            self.effective_drift(),
            self.sigma,
            self.maturity,
            self.rate,
        )
        .map_err(|e| CliError::Usage(e.to_string()))
    }

    /// Check every module precondition up front; field-specific messages.
    pub fn validate(&self, cmd: Command) -> Result<(), CliError> {
        let params = self.market()?;
        if matches!(cmd, Command::Paths | Command::Pdf) && self.format == OutputFormat::Json {
            return Err(CliError::Usage(
                "format: this command only produces csv output".into(),
            ));
        }
        if cmd == Command::Paths {
            if self.n_paths < 1 {
                return Err(CliError::Usage("paths: need at least one path".into()));
            }
            if self.steps < 1 {
                return Err(CliError::Usage("steps: need at least one step".into()));
            }
            return Ok(());
        }
        if self.strike <= 0.0 {
            return Err(CliError::Usage(format!(
                "strike: must be > 0, got {}",
                self.strike
            )));
        }
        if self.scale_c <= 0.0 || self.scale_c > std::f64::consts::FRAC_PI_4 {
            return Err(CliError::Usage(format!(
                "scale-c: must lie in (0, π/4], got {}",
                self.scale_c
            )));
        }
        if self.trunc_sigmas <= 0.0 {
            return Err(CliError::Usage(format!(
                "trunc-sigmas: must be > 0, got {}",
                self.trunc_sigmas
            )));
        }
        Schedule::new(self.levels, self.shots)
            .map_err(|e| CliError::Usage(format!("shots/levels: {e}")))?;
        if self.mc_samples < 2 {
            return Err(CliError::Usage("mc-samples: need at least 2".into()));
        }
        let dims: &[usize] = match cmd {
            Command::SweepDim => {
                if self.dims.is_empty() {
                    return Err(CliError::Usage("dims: empty sweep".into()));
                }
                if self.seeds < 1 {
                    return Err(CliError::Usage("seeds: need at least one".into()));
                }
                &self.dims
            }
            _ => std::slice::from_ref(&self.dim),
        };
        for &d in dims {
            let grid = build_grid(&params, d, self.qudits, self.trunc_sigmas)
                .map_err(|e| CliError::Usage(format!("dim/qudits: {e}")))?;
            if cmd == Command::Pdf {
                continue;
            }
            if self.strike < grid.s_min || self.strike > grid.s_max {
                return Err(CliError::Usage(format!(
                    "strike: {} lies outside the truncated domain [{}, {}] at d={d}",
                    self.strike, grid.s_min, grid.s_max
                )));
            }
            let s_last = *grid.points.last().unwrap();
            if self.strike >= s_last {
                return Err(CliError::Usage(format!(
                    "strike: {} is not below the last grid point {s_last} at d={d}; payoff scaling degenerates",
                    self.strike
                )));
            }
        }
        if cmd == Command::Pdf && self.curve_points < 2 {
            return Err(CliError::Usage("curve-points: need at least 2".into()));
        }
        Ok(())
    }
}

fn parse_dims(value: &str) -> Result<Vec<usize>, CliError> {
    let bad =
        |v: &str| CliError::Usage(format!("dims: cannot parse '{v}' (use '2..8' or '2,4,8')"));
    if let Some((lo, hi)) = value.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad(value))?;
        let hi: usize = hi.trim().parse().map_err(|_| bad(value))?;
        if lo < 2 || hi < lo {
            return Err(bad(value));
        }
        return Ok((lo..=hi).collect());
    }
    let dims: Vec<usize> = value
        .split(',')
        .map(|v| v.trim().parse().map_err(|_| bad(value)))
        .collect::<Result<_, _>>()?;
    if dims.is_empty() || dims.iter().any(|&d| d < 2) {
        return Err(bad(value));
    }
    Ok(dims)
}

/// Parse a flat `key = value` config file.
pub fn parse_config_file(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "config line {}: expected 'key = value'",
                lineno + 1
            ))
        })?;
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

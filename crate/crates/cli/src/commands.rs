//! The four subcommands, wired end to end.

use crate::config::{Command, OutputFormat, RunConfig};
use crate::report::{
    sweep_csv, ConfigEcho, GridInfo, MlaeInfo, MonteCarloInfo, PriceReport, ShotRow, SweepReport,
    SweepRow, PRICE_SCHEMA, SWEEP_SCHEMA,
};
use crate::CliError;
use quditop::circuits::{
    build_comparator, build_payoff_loader, build_pricing_oracle, expected_payoff_from_p1,
    ComparatorVariant, PayoffEncoding,
};
use quditop::engine::StateVector;
use quditop::grid::{build_grid, discretized_expected_payoff, strike_index, AssetGrid};
use quditop::market::{
    analytic_expected_payoff, discount, mc_expected_payoff, sample_gbm_path,
    truncated_expected_payoff,
};
use quditop::mlae::{
    build_grover, mle_estimate, run_schedule, MleResult, Schedule, ShotRecord, DEFAULT_MLE_GRID,
};
use quditop::rng::derive_stream;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

// Stream ids: one reserved stream for the Monte Carlo baseline, and one
// per (register size, seed index) for amplitude-estimation shots, so a
// sweep row with seed index 0 reproduces the single-run price numbers.
const MC_STREAM: u64 = u64::MAX - 1;

fn mlae_stream(d: usize, seed_index: u64) -> u64 {
    (d as u64) << 32 | seed_index
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

// Stdout is best-effort with respect to closed pipes (`... | head` must
// not fail the run); every other write failure is still an error.
fn write_stdout(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(runtime(e)),
    }
}

/// Resolve the seed: explicit, or drawn from OS entropy and reported.
fn resolve_seed(cfg: &RunConfig) -> u64 {
    cfg.seed.unwrap_or_else(rand::random)
}

fn variant_name(v: ComparatorVariant) -> &'static str {
    match v {
        ComparatorVariant::LinearAncilla => "linear",
        ComparatorVariant::SingleAncilla => "single",
    }
}

struct MlaeOutcome {
    records: Vec<ShotRecord>,
    estimate: MleResult<f64>,
    expected_payoff: f64,
}

fn run_mlae_once(
    grid: &AssetGrid<f64>,
    oracle: &quditop::engine::MatrixOp<f64>,
    grover: &quditop::engine::MatrixOp<f64>,
    cfg: &RunConfig,
    seed: u64,
    stream: u64,
) -> Result<MlaeOutcome, CliError> {
    let sched = Schedule::new(cfg.levels, cfg.shots).map_err(runtime)?;
    let mut rng = derive_stream(seed, stream);
    let records = run_schedule(oracle, grover, &sched, &mut rng).map_err(runtime)?;
    let estimate: MleResult<f64> = mle_estimate(&records, DEFAULT_MLE_GRID);
    let expected_payoff =
        expected_payoff_from_p1(estimate.p1_hat, grid, cfg.strike, cfg.scale_c).map_err(runtime)?;
    Ok(MlaeOutcome {
        records,
        estimate,
        expected_payoff,
    })
}

pub fn cmd_price(cfg: &RunConfig) -> Result<(), CliError> {
    let started = Instant::now();
    let seed = resolve_seed(cfg);
    let params = cfg.market()?;
    let grid = build_grid(&params, cfg.dim, cfg.qudits, cfg.trunc_sigmas).map_err(runtime)?;
    let k = strike_index(&grid, cfg.strike).map_err(runtime)?;

    let analytic = analytic_expected_payoff(&params, cfg.strike);
    let quadrature = truncated_expected_payoff(&params, cfg.strike, grid.s_min, grid.s_max);
    let classical = discretized_expected_payoff(&grid, cfg.strike);
    let (mc_est, mc_se) = mc_expected_payoff(
        &params,
        cfg.strike,
        cfg.mc_samples,
        &mut derive_stream(seed, MC_STREAM),
    );

    if cfg.print_gates {
        print_gate_list(&grid, cfg)?;
    }

    let (layout, oracle) =
        build_pricing_oracle(&grid, cfg.strike, cfg.scale_c, cfg.variant).map_err(runtime)?;
    let prepared = StateVector::ground(layout)
        .apply_matrix(&oracle)
        .map_err(runtime)?;
    let statevector_p1 = prepared.marginal_probability("pay", 1).map_err(runtime)?;
    if let Some(path) = &cfg.dump_state {
        let mut buf = Vec::new();
        prepared.write_amplitudes_csv(&mut buf).map_err(runtime)?;
        write_file(path, &String::from_utf8(buf).expect("csv is utf-8"))?;
    }

    let grover = build_grover(&oracle).map_err(runtime)?;
    let outcome = run_mlae_once(&grid, &oracle, &grover, cfg, seed, mlae_stream(cfg.dim, 0))?;
    let fair_value = discount(outcome.expected_payoff, cfg.rate, cfg.maturity);
    let sched = Schedule::new(cfg.levels, cfg.shots).map_err(runtime)?;

    let report = PriceReport {
        schema: PRICE_SCHEMA,
        config: ConfigEcho {
            s0: cfg.s0,
            drift: cfg.effective_drift(),
            rate: cfg.rate,
            sigma: cfg.sigma,
            maturity: cfg.maturity,
            strike: cfg.strike,
            dim: cfg.dim,
            qudits: cfg.qudits,
            scale_c: cfg.scale_c,
            trunc_sigmas: cfg.trunc_sigmas,
            shots: cfg.shots,
            levels: cfg.levels,
            seed,
            variant: variant_name(cfg.variant),
        },
        grid: GridInfo {
            s_min: grid.s_min,
            s_max: grid.s_max,
            omega: grid.omega,
            points: grid.size(),
        },
        strike_index: k,
        analytic_expected_payoff: analytic,
        truncated_quadrature_expected_payoff: quadrature,
        discretized_expected_payoff: classical,
        monte_carlo: MonteCarloInfo {
            estimate: mc_est,
            stderr: mc_se,
            samples: cfg.mc_samples,
        },
        statevector_p1,
        mlae: MlaeInfo {
            theta_hat: outcome.estimate.theta_hat,
            p1_hat: outcome.estimate.p1_hat,
            expected_payoff: outcome.expected_payoff,
            log_likelihood: outcome.estimate.log_likelihood,
            oracle_calls: outcome.estimate.oracle_calls,
        },
        fair_value,
        shot_records: outcome
            .records
            .iter()
            .map(|r| ShotRow {
                ell: r.level,
                m: r.m,
                shots: r.shots,
                hits: r.hits,
            })
            .collect(),
    };

    if let Some(path) = &cfg.out {
        match cfg.format {
            OutputFormat::Json => {
                let mut text = serde_json::to_string_pretty(&report).map_err(runtime)?;
                text.push('\n');
                write_file(path, &text)?;
            }
            OutputFormat::Csv => {
                let mut buf = Vec::new();
                quditop::mlae::write_shot_records_csv(&outcome.records, &mut buf)
                    .map_err(runtime)?;
                write_file(path, &String::from_utf8(buf).expect("csv is utf-8"))?;
            }
        }
    }

    let elapsed = started.elapsed();
    let mut text = String::new();
    let _ = writeln!(
        text,
        "european call, {} register point(s), seed {seed}",
        grid.size()
    );
    let _ = writeln!(
        text,
        "  grid: d={} n={} s∈[{:.6}, {:.6}] ω={:.6}  strike {} → k={k}",
        cfg.dim, cfg.qudits, grid.s_min, grid.s_max, grid.omega, cfg.strike
    );
    let _ = writeln!(text, "  analytic expected payoff      {analytic:.8}");
    let _ = writeln!(text, "  truncated-domain quadrature   {quadrature:.8}");
    let _ = writeln!(text, "  discretized classical         {classical:.8}");
    let _ = writeln!(
        text,
        "  monte carlo ({} samples)  {mc_est:.8} ± {mc_se:.8}",
        cfg.mc_samples
    );
    let _ = writeln!(text, "  statevector P1                {statevector_p1:.12}");
    let _ = writeln!(
        text,
        "  mlae θ̂={:.9} P̂1={:.9} → E[f]={:.8} (M={} oracle calls)",
        outcome.estimate.theta_hat,
        outcome.estimate.p1_hat,
        outcome.expected_payoff,
        sched.oracle_calls()
    );
    let _ = writeln!(text, "  discounted fair value         {fair_value:.8}");
    let _ = writeln!(text, "  wall time: {} ms", elapsed.as_millis());
    write_stdout(&text)
}

fn print_gate_list(grid: &AssetGrid<f64>, cfg: &RunConfig) -> Result<(), CliError> {
    let layout = quditop::circuits::pricing_layout(grid.d, grid.n, cfg.variant).map_err(runtime)?;
    let k = strike_index(grid, cfg.strike).map_err(runtime)?;
    let comparator =
        build_comparator::<f64>(k, grid.d, grid.n, &layout, cfg.variant).map_err(runtime)?;
    let enc = PayoffEncoding::new(grid, cfg.strike, cfg.scale_c).map_err(runtime)?;
    let payoff = build_payoff_loader(&enc, &layout).map_err(runtime)?;
    let mut text = String::new();
    let _ = writeln!(
        text,
        "# probability loader: {0}×{0} Householder reflection on the asset register",
        grid.size()
    );
    let _ = writeln!(text, "# comparator (k={k}, {}):", variant_name(cfg.variant));
    for g in &comparator {
        let _ = writeln!(text, "{g}");
    }
    let _ = writeln!(text, "# payoff loader (c={}, shift=π/4):", cfg.scale_c);
    for g in &payoff {
        let _ = writeln!(text, "{g}");
    }
    write_stdout(&text)
}

pub fn cmd_sweep_dim(cfg: &RunConfig) -> Result<(), CliError> {
    let seed = resolve_seed(cfg);
    let params = cfg.market()?;
    let analytic = analytic_expected_payoff(&params, cfg.strike);
    let sched = Schedule::new(cfg.levels, cfg.shots).map_err(runtime)?;
    let mut rows = Vec::with_capacity(cfg.dims.len());
    for &d in &cfg.dims {
        let grid = build_grid(&params, d, cfg.qudits, cfg.trunc_sigmas).map_err(runtime)?;
        let classical = discretized_expected_payoff(&grid, cfg.strike);
        let (_, oracle) =
            build_pricing_oracle(&grid, cfg.strike, cfg.scale_c, cfg.variant).map_err(runtime)?;
        let grover = build_grover(&oracle).map_err(runtime)?;
        let mut estimates = Vec::with_capacity(cfg.seeds);
        for s in 0..cfg.seeds {
            let outcome =
                run_mlae_once(&grid, &oracle, &grover, cfg, seed, mlae_stream(d, s as u64))?;
            estimates.push(outcome.expected_payoff);
        }
        let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
        let spread = if estimates.len() > 1 {
            (estimates
                .iter()
                .map(|e| (e - mean) * (e - mean))
                .sum::<f64>()
                / (estimates.len() - 1) as f64)
                .sqrt()
        } else {
            0.0
        };
        rows.push(SweepRow {
            d,
            analytic,
            classical_discretized: classical,
            quantum_mlae: mean,
            abs_gap_quantum_classical: (mean - classical).abs(),
            oracle_calls: sched.oracle_calls(),
            mlae_spread: spread,
        });
    }
    let text = match cfg.format {
        OutputFormat::Csv => sweep_csv(&rows),
        OutputFormat::Json => {
            let mut t = serde_json::to_string_pretty(&SweepReport {
                schema: SWEEP_SCHEMA,
                seeds: cfg.seeds,
                rows: rows.clone(),
            })
            .map_err(runtime)?;
            t.push('\n');
            t
        }
    };
    emit(cfg, &text)?;
    eprintln!(
        "sweep over d={:?}, {} seed(s) per point, seed {seed}",
        cfg.dims, cfg.seeds
    );
    Ok(())
}

pub fn cmd_paths(cfg: &RunConfig) -> Result<(), CliError> {
    let seed = resolve_seed(cfg);
    let params = cfg.market()?;
    let mut text = String::from("path_id,t,S_t\n");
    for p in 0..cfg.n_paths {
        let path = sample_gbm_path(&params, cfg.steps, &mut derive_stream(seed, p as u64));
        for (t, s) in path.times.iter().zip(&path.prices) {
            text.push_str(&format!("{p},{t},{s}\n"));
        }
    }
    emit(cfg, &text)?;
    eprintln!(
        "{} path(s) × {} step(s), drift {}, volatility {}, seed {seed}",
        cfg.n_paths,
        cfg.steps,
        cfg.effective_drift(),
        cfg.sigma
    );
    Ok(())
}

pub fn cmd_pdf(cfg: &RunConfig) -> Result<(), CliError> {
    let params = cfg.market()?;
    let grid = build_grid(&params, cfg.dim, cfg.qudits, cfg.trunc_sigmas).map_err(runtime)?;

    let mut grid_text = Vec::new();
    grid.write_csv(&mut grid_text).map_err(runtime)?;

    let mut curve_text = String::from("s,density\n");
    let steps = cfg.curve_points - 1;
    for i in 0..cfg.curve_points {
        let s = grid.s_min + (grid.s_max - grid.s_min) * i as f64 / steps as f64;
        let s = s.max(grid.s_min + 1e-12);
        let p = quditop::market::lognormal_pdf(s, &params, cfg.maturity).map_err(runtime)?;
        curve_text.push_str(&format!("{s},{p}\n"));
    }

    let stem = cfg.out.clone().unwrap_or_else(|| PathBuf::from("pdf"));
    let (grid_path, curve_path) = pdf_outputs(&stem);
    write_file(
        &grid_path,
        &String::from_utf8(grid_text).expect("csv is utf-8"),
    )?;
    write_file(&curve_path, &curve_text)?;
    println!("wrote {} and {}", grid_path.display(), curve_path.display());
    Ok(())
}

/// `--out dist.csv` becomes `dist.grid.csv` + `dist.curve.csv`.
pub fn pdf_outputs(stem: &Path) -> (PathBuf, PathBuf) {
    let base = match stem.extension().and_then(|e| e.to_str()) {
        Some("csv") => stem.with_extension(""),
        _ => stem.to_path_buf(),
    };
    let mut grid = base.as_os_str().to_owned();
    grid.push(".grid.csv");
    let mut curve = base.as_os_str().to_owned();
    curve.push(".curve.csv");
    (PathBuf::from(grid), PathBuf::from(curve))
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => write_file(path, text),
        None => write_stdout(text),
    }
}

pub fn dispatch(cmd: Command, cfg: &RunConfig) -> Result<(), CliError> {
    cfg.validate(cmd)?;
    match cmd {
        Command::Price => cmd_price(cfg),
        Command::SweepDim => cmd_sweep_dim(cfg),
        Command::Paths => cmd_paths(cfg),
        Command::Pdf => cmd_pdf(cfg),
    }
}

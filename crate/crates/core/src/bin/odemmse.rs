//! Experiment CLI: wires configs to the library and emits CSV artifacts
//! with full provenance headers.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;

use odemmse::detectors::{euler_trajectory, EulerConfig, DEFAULT_QUAD_TOL};
use odemmse::error::Error;
use odemmse::mimo::{rng_stream, sample_channel, sample_transmission, ChannelMatrix, SystemConfig};
use odemmse::montecarlo::{arithmetic_mse, MonteCarloConfig, TrajectoryMethod};
use odemmse::mse::{
    asymptotic_mse, functional_table_csv, grid_search_alpha, mmse_mse, mse_curve, CurveParams,
    MseEngine,
};
use odemmse::schedules::{RegularizationSchedule, DEFAULT_EPSILON};
use odemmse::spectral::gram_eigensystem;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "odemmse", about = "Continuous-time MMSE detection experiments")]
struct Cli {
    /// TOML config file; command-line flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    m: Option<usize>,
    #[arg(long, global = true)]
    sigma2: Option<f64>,
    /// Constant regularization parameter (defaults to sigma2)
    #[arg(long, global = true)]
    eta: Option<f64>,
    /// Schedule kind: constant | inverse-time | table
    #[arg(long, global = true)]
    schedule: Option<String>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    t_max: Option<f64>,
    /// Euler step size and analytical grid step
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Load the channel from a file instead of generating it from the seed
    #[arg(long, global = true)]
    channel: Option<PathBuf>,
    /// Output directory for CSV artifacts
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker thread cap (0 = all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    quad_tol: Option<f64>,
    /// Monte Carlo grid step (must be a multiple of dt)
    #[arg(long, global = true)]
    mc_step: Option<f64>,
    /// Grid-search candidates (comma separated)
    #[arg(long, global = true, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    /// Grid-search horizon T
    #[arg(long, global = true)]
    horizon: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytical MSE curve for a constant eta
    Analytical,
    /// Analytical MSE curve for a time-dependent schedule
    TodeAnalytical,
    /// One Euler-integrated trajectory exported as CSV
    Euler,
    /// Monte Carlo arithmetic MSE of the Euler method
    Montecarlo,
    /// Analytical vs Euler Monte Carlo on one grid, plus the asymptote
    Compare,
    /// Grid search over inverse-time alpha candidates
    Gridsearch,
    /// Generate a channel realization file
    ChannelGen,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    n: Option<usize>,
    m: Option<usize>,
    sigma2: Option<f64>,
    eta: Option<f64>,
    schedule: Option<String>,
    alpha: Option<f64>,
    epsilon: Option<f64>,
    t_max: Option<f64>,
    dt: Option<f64>,
    trials: Option<usize>,
    seed: Option<u64>,
    channel: Option<PathBuf>,
    output: Option<PathBuf>,
    threads: Option<usize>,
    quad_tol: Option<f64>,
    mc_step: Option<f64>,
    alphas: Option<Vec<f64>>,
    horizon: Option<f64>,
    schedule_times: Option<Vec<f64>>,
    schedule_values: Option<Vec<f64>>,
}

/// Fully resolved settings: file config overridden by flags, then defaults.
struct Settings {
    system: SystemConfig,
    eta: f64,
    schedule: RegularizationSchedule,
    t_max: f64,
    dt: f64,
    trials: usize,
    channel_file: Option<PathBuf>,
    output: PathBuf,
    quad_tol: f64,
    mc_step: f64,
    alphas: Vec<f64>,
    horizon: f64,
    threads: Option<usize>,
}

struct Failure {
    code: u8,
    category: &'static str,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            category: "config",
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, category) = match &e {
            Error::InvalidConfig(_) | Error::ChannelParse(_) | Error::Io(_) => (EXIT_CONFIG, "config"),
            Error::DimensionMismatch { .. } => (EXIT_CONFIG, "dimension"),
            Error::EulerUnstable { .. } => (EXIT_NUMERICAL, "euler-instability"),
            Error::QuadratureNonConvergence { .. } => (EXIT_NUMERICAL, "quadrature"),
            Error::EigenFailure => (EXIT_NUMERICAL, "numerical"),
        };
        Self {
            code,
            category,
            message: e.to_string(),
        }
    }
}

fn resolve(cli: &Cli) -> Result<Settings, Failure> {
    let file: FileConfig = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str(&text)
                .map_err(|e| Failure::config(format!("cannot parse {}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };

    let n = cli.n.or(file.n).unwrap_or(8);
    let m = cli.m.or(file.m).unwrap_or(8);
    let sigma2 = cli.sigma2.or(file.sigma2).unwrap_or(1.0);
    let seed = cli.seed.or(file.seed).unwrap_or(1);
    let system = SystemConfig::new(n, m, sigma2, seed).map_err(Failure::from)?;

    // conventional defaults: eta = sigma2, dt = 1e-3, trials = 1000, eps = 1e-8
    let eta = cli.eta.or(file.eta).unwrap_or(sigma2);
    let alpha = cli.alpha.or(file.alpha).unwrap_or(10.0);
    let epsilon = cli.epsilon.or(file.epsilon).unwrap_or(DEFAULT_EPSILON);
    let kind = cli
        .schedule
        .clone()
        .or(file.schedule)
        .unwrap_or_else(|| "constant".into());
    let schedule = match kind.as_str() {
        "constant" => RegularizationSchedule::constant(eta),
        "inverse-time" => RegularizationSchedule::inverse_time(alpha, epsilon, sigma2),
        "table" => {
            let times = file
                .schedule_times
                .clone()
                .ok_or_else(|| Failure::config("table schedule needs schedule_times"))?;
            let values = file
                .schedule_values
                .clone()
                .ok_or_else(|| Failure::config("table schedule needs schedule_values"))?;
            RegularizationSchedule::tabulated(times, values)
        }
        other => {
            return Err(Failure::config(format!(
                "unknown schedule kind '{other}' (constant | inverse-time | table)"
            )))
        }
    }
    .map_err(Failure::from)?;

    let t_max = cli.t_max.or(file.t_max).unwrap_or(3.0);
    let dt = cli.dt.or(file.dt).unwrap_or(EulerConfig::DEFAULT_DT);
    let mc_step = cli.mc_step.or(file.mc_step).unwrap_or_else(|| {
        let step = (t_max / 30.0 / dt).round().max(1.0);
        step * dt
    });
    Ok(Settings {
        system,
        eta,
        schedule,
        t_max,
        dt,
        trials: cli
            .trials
            .or(file.trials)
            .unwrap_or(MonteCarloConfig::DEFAULT_TRIALS),
        channel_file: cli.channel.clone().or(file.channel),
        output: cli
            .output
            .clone()
            .or(file.output)
            .unwrap_or_else(|| PathBuf::from(".")),
        quad_tol: cli.quad_tol.or(file.quad_tol).unwrap_or(DEFAULT_QUAD_TOL),
        mc_step,
        alphas: cli
            .alphas
            .clone()
            .or(file.alphas)
            .unwrap_or_else(|| vec![1.0, 10.0, 50.0, 100.0]),
        horizon: cli.horizon.or(file.horizon).unwrap_or(0.8),
        threads: cli.threads.or(file.threads),
    })
}

fn load_or_generate_channel(s: &Settings) -> Result<ChannelMatrix, Failure> {
    match &s.channel_file {
        Some(path) => Ok(ChannelMatrix::load(path)?),
        // stream 0 is the channel stream; transmissions use 1.. per trial
        None => Ok(sample_channel(&s.system, &mut rng_stream(s.system.seed, 0))),
    }
}

fn uniform_grid(t_max: f64, dt: f64) -> Vec<f64> {
    let steps = (t_max / dt + 0.5).floor() as usize;
    (0..=steps).map(|k| dt * k as f64).collect()
}

fn mc_grid(t_max: f64, step: f64) -> Vec<f64> {
    let points = (t_max / step + 0.5).floor() as usize;
    (0..=points).map(|k| step * k as f64).collect()
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::config(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn provenance_header(s: &Settings, h: &ChannelMatrix, extra: &[(&str, String)]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# n: {}", s.system.n);
    let _ = writeln!(out, "# m: {}", s.system.m);
    let _ = writeln!(out, "# sigma2: {}", s.system.sigma2);
    let _ = writeln!(out, "# seed: {}", s.system.seed);
    let _ = writeln!(out, "# schedule: {}", s.schedule.describe());
    let _ = writeln!(out, "# channel_hash: {}", h.content_hash());
    for (key, value) in extra {
        let _ = writeln!(out, "# {key}: {value}");
    }
    out
}

fn curve_params(s: &Settings, h: &ChannelMatrix, schedule: &RegularizationSchedule) -> CurveParams {
    CurveParams {
        n: s.system.n,
        m: s.system.m,
        sigma2: s.system.sigma2,
        schedule: schedule.describe(),
        channel_hash: h.content_hash(),
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let s = resolve(cli)?;
    if let Some(threads) = s.threads {
        if threads > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global()
                .map_err(|e| Failure::config(format!("thread pool: {e}")))?;
        }
    }

    match cli.command {
        Command::ChannelGen => {
            let h = sample_channel(&s.system, &mut rng_stream(s.system.seed, 0));
            let path = write_artifact(&s.output, "channel.txt", &h.to_text())?;
            println!(
                "channel-gen: {}x{} -> {} (hash {})",
                s.system.m,
                s.system.n,
                path.display(),
                h.content_hash()
            );
        }
        Command::Analytical => {
            let h = load_or_generate_channel(&s)?;
            let eig = gram_eigensystem(&h)?;
            let schedule = RegularizationSchedule::constant(s.eta)?;
            let grid = uniform_grid(s.t_max, s.dt);
            let curve = mse_curve(
                &MseEngine::Constant { eta: s.eta },
                &eig,
                s.system.sigma2,
                &grid,
                s.quad_tol,
                curve_params(&s, &h, &schedule),
            )?;
            let path = write_artifact(&s.output, "analytical_mse.csv", &curve.to_csv())?;
            println!(
                "analytical: {} points, MSE({}) = {:.6}, asymptote {:.6} -> {}",
                curve.times.len(),
                s.t_max,
                curve.values.last().unwrap(),
                asymptotic_mse(&eig, s.system.sigma2, s.eta),
                path.display()
            );
        }
        Command::TodeAnalytical => {
            let h = load_or_generate_channel(&s)?;
            let eig = gram_eigensystem(&h)?;
            let grid = uniform_grid(s.t_max, s.dt);
            let curve = mse_curve(
                &MseEngine::TimeDependent {
                    schedule: s.schedule.clone(),
                },
                &eig,
                s.system.sigma2,
                &grid,
                s.quad_tol,
                curve_params(&s, &h, &s.schedule),
            )?;
            let path = write_artifact(&s.output, "tode_mse.csv", &curve.to_csv())?;
            println!(
                "tode-analytical: {} points, MSE({}) = {:.6}, MSE_mmse {:.6} -> {}",
                curve.times.len(),
                s.t_max,
                curve.values.last().unwrap(),
                mmse_mse(&eig, s.system.sigma2),
                path.display()
            );
        }
        Command::Euler => {
            let h = load_or_generate_channel(&s)?;
            let eig = gram_eigensystem(&h)?;
            let tx = sample_transmission(&h, &s.system, &mut rng_stream(s.system.seed, 1))?;
            let cfg = EulerConfig::new(s.dt, s.t_max)?;
            let traj = euler_trajectory(&h, &tx.y, &s.schedule, &cfg, &eig)?;
            let mut csv = provenance_header(&s, &h, &[("dt", s.dt.to_string())]);
            let _ = write!(csv, "t");
            for i in 0..s.system.n {
                let _ = write!(csv, ",re{i},im{i}");
            }
            let _ = writeln!(csv);
            for (t, x) in &traj {
                let _ = write!(csv, "{t}");
                for z in x.iter() {
                    let _ = write!(csv, ",{},{}", z.re, z.im);
                }
                let _ = writeln!(csv);
            }
            let path = write_artifact(&s.output, "euler_trajectory.csv", &csv)?;
            println!(
                "euler: {} steps of {} -> {}",
                traj.len() - 1,
                s.dt,
                path.display()
            );
        }
        Command::Montecarlo => {
            let h = load_or_generate_channel(&s)?;
            let grid = mc_grid(s.t_max, s.mc_step);
            let mc = MonteCarloConfig::new(s.trials, grid, s.system.seed)?;
            let method = TrajectoryMethod::Euler {
                schedule: s.schedule.clone(),
                dt: s.dt,
            };
            let out = arithmetic_mse(&h, &s.system, &method, &mc)?;
            let mut csv = provenance_header(
                &s,
                &h,
                &[
                    ("method", method.label()),
                    ("trials", s.trials.to_string()),
                ],
            );
            csv.push_str(&out.to_csv());
            let path = write_artifact(&s.output, "empirical_mse.csv", &csv)?;
            println!(
                "montecarlo: {} trials, MSE({}) = {:.6} +- {:.6} -> {}",
                out.trials,
                s.t_max,
                out.mean.last().unwrap(),
                out.std_error.last().unwrap(),
                path.display()
            );
        }
        Command::Compare => {
            let h = load_or_generate_channel(&s)?;
            let eig = gram_eigensystem(&h)?;
            let grid = mc_grid(s.t_max, s.mc_step);
            let constant = matches!(s.schedule, RegularizationSchedule::Constant { .. });
            let engine = if constant {
                MseEngine::Constant { eta: s.eta }
            } else {
                MseEngine::TimeDependent {
                    schedule: s.schedule.clone(),
                }
            };
            let analytical = mse_curve(
                &engine,
                &eig,
                s.system.sigma2,
                &grid,
                s.quad_tol,
                curve_params(&s, &h, &s.schedule),
            )?;
            let mc = MonteCarloConfig::new(s.trials, grid.clone(), s.system.seed)?;
            let method = TrajectoryMethod::Euler {
                schedule: s.schedule.clone(),
                dt: s.dt,
            };
            let empirical = arithmetic_mse(&h, &s.system, &method, &mc)?;
            // the constant-eta flow settles at MSE_inf; the inverse-time one
            // settles at the MMSE value since eta(t) -> sigma2
            let asymptote = if constant {
                asymptotic_mse(&eig, s.system.sigma2, s.eta)
            } else {
                mmse_mse(&eig, s.system.sigma2)
            };
            let mut csv = provenance_header(
                &s,
                &h,
                &[
                    ("method", method.label()),
                    ("trials", s.trials.to_string()),
                    ("asymptote", asymptote.to_string()),
                ],
            );
            csv.push_str("t,analytical,empirical_mean,empirical_std_error,asymptote\n");
            for (k, &t) in grid.iter().enumerate() {
                let _ = writeln!(
                    csv,
                    "{t},{},{},{},{asymptote}",
                    analytical.values[k], empirical.mean[k], empirical.std_error[k]
                );
            }
            let path = write_artifact(&s.output, "compare.csv", &csv)?;
            let worst = grid
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, _)| {
                    (analytical.values[k] - empirical.mean[k]).abs()
                        / empirical.std_error[k].max(f64::MIN_POSITIVE)
                })
                .fold(0.0f64, f64::max);
            println!(
                "compare: {} points, worst |analytical - empirical| = {:.2} std errors -> {}",
                grid.len(),
                worst,
                path.display()
            );
        }
        Command::Gridsearch => {
            let h = load_or_generate_channel(&s)?;
            let eig = gram_eigensystem(&h)?;
            let epsilon = match &s.schedule {
                RegularizationSchedule::InverseTime { epsilon, .. } => *epsilon,
                _ => DEFAULT_EPSILON,
            };
            let (best, table) = grid_search_alpha(
                &s.alphas,
                &eig,
                s.system.sigma2,
                epsilon,
                s.horizon,
                s.dt,
                s.quad_tol,
            )?;
            let mut csv = provenance_header(&s, &h, &[("T", s.horizon.to_string())]);
            csv.push_str(&functional_table_csv(&table));
            let path = write_artifact(&s.output, "gridsearch.csv", &csv)?;
            let summary: Vec<String> = table
                .iter()
                .map(|r| format!("F({}) = {:.4}", r.alpha, r.value))
                .collect();
            println!(
                "gridsearch: best alpha = {best}; {} -> {}",
                summary.join(", "),
                path.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}: {}", failure.category, failure.message);
            ExitCode::from(failure.code)
        }
    }
}

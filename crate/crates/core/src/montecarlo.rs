//! Monte Carlo estimation of the arithmetic MSE E||x(t) - s||^2 for a fixed
//! channel realization. Trials draw independent RNG streams keyed by
//! (seed, trial index) and accumulate with a deterministic pairwise
//! reduction, so results are bitwise reproducible regardless of how many
//! workers run.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::detectors::{
    check_euler_stability, ode_gain, tode_gains_cumulative, EulerConfig,
};
use crate::error::{Error, Result};
use crate::mimo::{rng_stream, sample_transmission, ChannelMatrix, SystemConfig};
use crate::schedules::RegularizationSchedule;
use crate::spectral::gram_eigensystem;

#[derive(Debug, Clone)]
pub struct MonteCarloConfig {
    pub trials: usize,
    pub time_grid: Vec<f64>,
    pub seed: u64,
}

impl MonteCarloConfig {
    pub const DEFAULT_TRIALS: usize = 1000;

    pub fn new(trials: usize, time_grid: Vec<f64>, seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        if time_grid.is_empty()
            || time_grid[0] != 0.0
            || time_grid.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidConfig(
                "time grid must be ascending and start at 0".into(),
            ));
        }
        Ok(Self {
            trials,
            time_grid,
            seed,
        })
    }
}

/// Trajectory evaluator averaged by the Monte Carlo loop.
#[derive(Debug, Clone)]
pub enum TrajectoryMethod {
    /// Euler recurrence with the given schedule and step size.
    Euler {
        schedule: RegularizationSchedule,
        dt: f64,
    },
    /// Exact constant-eta trajectory.
    ClosedFormOde { eta: f64 },
    /// Exact time-dependent trajectory.
    ClosedFormTode {
        schedule: RegularizationSchedule,
        quad_tol: f64,
    },
    /// One-shot MMSE estimate, constant over the grid.
    MmseOneShot,
}

impl TrajectoryMethod {
    pub fn label(&self) -> String {
        match self {
            Self::Euler { schedule, dt } => format!("euler(dt={dt},{})", schedule.describe()),
            Self::ClosedFormOde { eta } => format!("ode-closed-form(eta={eta})"),
            Self::ClosedFormTode { schedule, .. } => {
                format!("tode-closed-form({})", schedule.describe())
            }
            Self::MmseOneShot => "mmse".into(),
        }
    }
}

/// Sample mean and standard error of ||x(t) - s||^2 per grid time.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMse {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    pub trials: usize,
    /// Set when trials < 2 and the standard error is reported as zero.
    pub degenerate_std_error: bool,
}

impl EmpiricalMse {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,mean,std_error,trials\n");
        for ((t, m), se) in self.times.iter().zip(&self.mean).zip(&self.std_error) {
            let _ = writeln!(out, "{t},{m},{se},{}", self.trials);
        }
        out
    }
}

fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 32 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Per-trial squared errors on the grid, for one sampled (s, w).
fn trial_errors(
    h: &ChannelMatrix,
    cfg: &SystemConfig,
    plan: &Plan,
    grid: &[f64],
    seed: u64,
    trial: u64,
) -> Result<Vec<f64>> {
    // stream 0 is reserved for channel generation
    let mut rng = rng_stream(seed, trial + 1);
    let tx = sample_transmission(h, cfg, &mut rng)?;
    match plan {
        Plan::Gains { eig_basis_adj_h, basis_adj, gains } => {
            // U unitary: ||U(g .* c) - s|| = ||g .* c - U^H s||
            let c = eig_basis_adj_h * &tx.y;
            let s_proj = basis_adj * &tx.s;
            Ok(gains
                .iter()
                .map(|g| {
                    let mut acc = 0.0;
                    for i in 0..c.len() {
                        let d = c[i] * Complex64::new(g[i], 0.0) - s_proj[i];
                        acc += d.norm_sqr();
                    }
                    acc
                })
                .collect())
        }
        Plan::Euler { gram, adj, dt, schedule } => {
            let rhs = adj * &tx.y;
            let mut x = rhs.clone();
            let mut out = Vec::with_capacity(grid.len());
            let indices: Vec<usize> = grid.iter().map(|&t| (t / dt + 0.5) as usize).collect();
            let max_step = *indices.last().unwrap();
            let mut next = 0;
            for step in 0..=max_step {
                if step > 0 {
                    let t = dt * step as f64;
                    let eta = schedule.eta_at(t)?;
                    let drift = gram * &x;
                    x.zip_zip_apply(&drift, &rhs, |xi, di, bi| {
                        *xi -= Complex64::new(*dt, 0.0)
                            * (di + Complex64::new(eta, 0.0) * *xi - bi)
                    });
                }
                while next < indices.len() && indices[next] == step {
                    out.push((&x - &tx.s).norm_squared());
                    next += 1;
                }
            }
            Ok(out)
        }
    }
}

enum Plan {
    /// Closed-form methods reduce to per-time scalar gains in the eigenbasis.
    Gains {
        /// U^H H^H
        eig_basis_adj_h: nalgebra::DMatrix<Complex64>,
        /// U^H
        basis_adj: nalgebra::DMatrix<Complex64>,
        /// gains[k][i] for grid index k, eigenvalue i
        gains: Vec<Vec<f64>>,
    },
    Euler {
        gram: nalgebra::DMatrix<Complex64>,
        /// H^H
        adj: nalgebra::DMatrix<Complex64>,
        dt: f64,
        schedule: RegularizationSchedule,
    },
}

/// Averages ||x(t) - s||^2 over `mc.trials` independent (s, w) pairs with
/// the channel held fixed.
pub fn arithmetic_mse(
    h: &ChannelMatrix,
    cfg: &SystemConfig,
    method: &TrajectoryMethod,
    mc: &MonteCarloConfig,
) -> Result<EmpiricalMse> {
    crate::mimo::check_len("channel rows", cfg.m, h.rows())?;
    crate::mimo::check_len("channel cols", cfg.n, h.cols())?;
    let grid = &mc.time_grid;
    let eig = gram_eigensystem(h)?;

    let plan = match method {
        TrajectoryMethod::ClosedFormOde { eta } => Plan::Gains {
            eig_basis_adj_h: eig.basis().adjoint() * h.matrix().adjoint(),
            basis_adj: eig.basis().adjoint(),
            gains: grid
                .iter()
                .map(|&t| {
                    eig.eigenvalues()
                        .iter()
                        .map(|&l| ode_gain(l, *eta, t))
                        .collect()
                })
                .collect(),
        },
        TrajectoryMethod::ClosedFormTode { schedule, quad_tol } => Plan::Gains {
            eig_basis_adj_h: eig.basis().adjoint() * h.matrix().adjoint(),
            basis_adj: eig.basis().adjoint(),
            gains: tode_gains_cumulative(eig.eigenvalues(), schedule, grid, *quad_tol)?,
        },
        TrajectoryMethod::MmseOneShot => Plan::Gains {
            eig_basis_adj_h: eig.basis().adjoint() * h.matrix().adjoint(),
            basis_adj: eig.basis().adjoint(),
            gains: grid
                .iter()
                .map(|_| {
                    eig.eigenvalues()
                        .iter()
                        .map(|&l| 1.0 / (l + cfg.sigma2))
                        .collect()
                })
                .collect(),
        },
        TrajectoryMethod::Euler { schedule, dt } => {
            let t_max = *grid.last().unwrap();
            let euler_cfg = EulerConfig::new(*dt, t_max.max(*dt))?;
            if t_max > 0.0 {
                check_euler_stability(schedule, &euler_cfg, &eig)?;
            }
            for &t in grid {
                let snapped = (t / dt + 0.5).floor() * dt;
                if (snapped - t).abs() > 1e-9 * dt.max(1.0) {
                    return Err(Error::InvalidConfig(format!(
                        "grid time {t} is not a multiple of the Euler step {dt}"
                    )));
                }
            }
            Plan::Euler {
                gram: h.gram(),
                adj: h.matrix().adjoint().into_owned(),
                dt: *dt,
                schedule: schedule.clone(),
            }
        }
    };

    let per_trial: Vec<Vec<f64>> = (0..mc.trials as u64)
        .into_par_iter()
        .map(|trial| trial_errors(h, cfg, &plan, grid, mc.seed, trial))
        .collect::<Result<_>>()?;

    let trials = mc.trials;
    let mut mean = Vec::with_capacity(grid.len());
    let mut std_error = Vec::with_capacity(grid.len());
    let mut column = vec![0.0; trials];
    for k in 0..grid.len() {
        for (t, row) in per_trial.iter().enumerate() {
            column[t] = row[k];
        }
        let mu = pairwise_sum(&column) / trials as f64;
        mean.push(mu);
        if trials < 2 {
            std_error.push(0.0);
        } else {
            let dev: Vec<f64> = column.iter().map(|&v| (v - mu) * (v - mu)).collect();
            let var = pairwise_sum(&dev) / (trials - 1) as f64;
            std_error.push((var / trials as f64).sqrt());
        }
    }
    Ok(EmpiricalMse {
        times: grid.clone(),
        mean,
        std_error,
        trials,
        degenerate_std_error: trials < 2,
    })
}

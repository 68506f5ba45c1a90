//! Analytical MSE evaluation: the constant-eta closed form, the MMSE and
//! asymptotic limits, the time-dependent closed form, batch curve
//! evaluation, the convergence functional F and the grid search over
//! inverse-time schedule parameters.

use std::fmt::Write as _;

use crate::detectors::{tode_gain, tode_gains_cumulative};
use crate::error::{Error, Result};
use crate::schedules::RegularizationSchedule;
use crate::spectral::GramEigenSystem;

/// How an MSE curve was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    AnalyticalConstant,
    AnalyticalTimeDependent,
    EmpiricalMonteCarlo,
}

impl Provenance {
    pub fn label(&self) -> &'static str {
        match self {
            Self::AnalyticalConstant => "analytical-constant",
            Self::AnalyticalTimeDependent => "analytical-time-dependent",
            Self::EmpiricalMonteCarlo => "empirical-monte-carlo",
        }
    }
}

/// Experiment parameters recorded alongside a curve.
#[derive(Debug, Clone, Default)]
pub struct CurveParams {
    pub n: usize,
    pub m: usize,
    pub sigma2: f64,
    pub schedule: String,
    pub channel_hash: String,
}

/// A sampled MSE-versus-time curve.
#[derive(Debug, Clone)]
pub struct MseCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub provenance: Provenance,
    pub params: CurveParams,
}

impl MseCurve {
    /// CSV with a `#`-prefixed provenance header block.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# provenance: {}", self.provenance.label());
        let _ = writeln!(out, "# n: {}", self.params.n);
        let _ = writeln!(out, "# m: {}", self.params.m);
        let _ = writeln!(out, "# sigma2: {}", self.params.sigma2);
        let _ = writeln!(out, "# schedule: {}", self.params.schedule);
        let _ = writeln!(out, "# channel_hash: {}", self.params.channel_hash);
        let _ = writeln!(out, "t,mse,provenance");
        for (t, v) in self.times.iter().zip(&self.values) {
            let _ = writeln!(out, "{t},{v},{}", self.provenance.label());
        }
        out
    }
}

/// One grid-search entry: F evaluated for the schedule with parameter alpha.
#[derive(Debug, Clone, Copy)]
pub struct FunctionalResult {
    pub alpha: f64,
    pub value: f64,
    pub horizon: f64,
}

/// CSV table of grid-search results, mirroring the alpha/F layout.
pub fn functional_table_csv(results: &[FunctionalResult]) -> String {
    let mut out = String::from("alpha,F\n");
    for r in results {
        let _ = writeln!(out, "{},{}", r.alpha, r.value);
    }
    out
}

/// The constant-eta analytical MSE at time t (per-eigenvalue sum).
pub fn analytical_mse(eig: &GramEigenSystem, sigma2: f64, eta: f64, t: f64) -> f64 {
    eig.eigenvalues()
        .iter()
        .map(|&l| {
            let k = l + eta;
            let decay = (-k * t).exp();
            (l * (k - 1.0).powi(2) * (l + sigma2) * decay * decay
                - 2.0 * l * (k - 1.0) * (eta - sigma2) * decay
                + eta * eta
                + sigma2 * l)
                / (k * k)
        })
        .sum()
}

/// The two trace terms behind the constant-eta MSE:
/// (Tr[B(t)^H B(t)], Tr[(B(t)H - I)^H (B(t)H - I)]) with B(t) = Q(t) + R.
/// `analytical_mse` equals `second + sigma2 * first`.
pub fn trace_terms(eig: &GramEigenSystem, eta: f64, t: f64) -> (f64, f64) {
    let mut first = 0.0;
    let mut second = 0.0;
    for &l in eig.eigenvalues() {
        let k = l + eta;
        let decay = (-k * t).exp();
        first += l * ((k - 1.0) * decay + 1.0).powi(2) / (k * k);
        second += (l * (k - 1.0) * decay - eta).powi(2) / (k * k);
    }
    (first, second)
}

/// MSE of the one-shot MMSE estimate: sum_i sigma^2/(lambda_i + sigma^2).
pub fn mmse_mse(eig: &GramEigenSystem, sigma2: f64) -> f64 {
    eig.eigenvalues()
        .iter()
        .map(|&l| sigma2 / (l + sigma2))
        .sum()
}

/// The t -> infinity limit of the constant-eta MSE:
/// sum_i (eta^2 + sigma^2 lambda_i)/(lambda_i + eta)^2.
pub fn asymptotic_mse(eig: &GramEigenSystem, sigma2: f64, eta: f64) -> f64 {
    eig.eigenvalues()
        .iter()
        .map(|&l| {
            let k = l + eta;
            (eta * eta + sigma2 * l) / (k * k)
        })
        .sum()
}

fn mse_from_gains(eigenvalues: &[f64], sigma2: f64, gains: &[f64]) -> f64 {
    let n = eigenvalues.len() as f64;
    let mut quadratic = 0.0;
    let mut linear = 0.0;
    for (&l, &g) in eigenvalues.iter().zip(gains) {
        quadratic += l * (l + sigma2) * g * g;
        linear += l * g;
    }
    quadratic - 2.0 * linear + n
}

/// The time-dependent analytical MSE at time t.
pub fn tode_analytical_mse(
    eig: &GramEigenSystem,
    sigma2: f64,
    sched: &RegularizationSchedule,
    t: f64,
    quad_tol: f64,
) -> Result<f64> {
    let gains: Vec<f64> = eig
        .eigenvalues()
        .iter()
        .map(|&l| tode_gain(l, sched, t, quad_tol))
        .collect::<Result<_>>()?;
    Ok(mse_from_gains(eig.eigenvalues(), sigma2, &gains))
}

/// Which analytical engine a batch evaluation uses.
#[derive(Debug, Clone)]
pub enum MseEngine {
    Constant { eta: f64 },
    TimeDependent { schedule: RegularizationSchedule },
}

/// Batch evaluation over an ascending grid starting at 0. The
/// time-dependent engine runs one cumulative quadrature pass over the grid
/// rather than re-integrating from zero at every point.
pub fn mse_curve(
    engine: &MseEngine,
    eig: &GramEigenSystem,
    sigma2: f64,
    grid: &[f64],
    quad_tol: f64,
    params: CurveParams,
) -> Result<MseCurve> {
    if grid.is_empty() || grid[0] != 0.0 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(
            "time grid must be ascending and start at 0".into(),
        ));
    }
    let (values, provenance) = match engine {
        MseEngine::Constant { eta } => (
            grid.iter()
                .map(|&t| analytical_mse(eig, sigma2, *eta, t))
                .collect(),
            Provenance::AnalyticalConstant,
        ),
        MseEngine::TimeDependent { schedule } => {
            let gains = tode_gains_cumulative(eig.eigenvalues(), schedule, grid, quad_tol)?;
            (
                gains
                    .iter()
                    .map(|g| mse_from_gains(eig.eigenvalues(), sigma2, g))
                    .collect(),
                Provenance::AnalyticalTimeDependent,
            )
        }
    };
    Ok(MseCurve {
        times: grid.to_vec(),
        values,
        provenance,
        params,
    })
}

/// F = \int_0^T MSE(t) dt by composite trapezoid with step dt.
pub fn convergence_functional(
    engine: &MseEngine,
    eig: &GramEigenSystem,
    sigma2: f64,
    horizon: f64,
    dt: f64,
    quad_tol: f64,
) -> Result<f64> {
    if !(horizon > 0.0) || !(dt > 0.0) || dt > horizon {
        return Err(Error::InvalidConfig(format!(
            "functional requires 0 < dt <= T (dt={dt}, T={horizon})"
        )));
    }
    let steps = (horizon / dt).ceil() as usize;
    let step = horizon / steps as f64;
    // The inverse-time schedule makes the MSE vary on every scale from
    // epsilon/alpha up to ~1/alpha, so a uniform step alone cannot resolve
    // the early transient. The uniform dt grid is merged with a fixed
    // geometric grid (32 points per octave down from T); the geometric part
    // does not move when dt changes.
    let mut grid: Vec<f64> = (0..=steps).map(|k| step * k as f64).collect();
    let mut t = horizon;
    let ratio = (0.5f64).powf(1.0 / 32.0);
    while t > 1e-18 * horizon {
        t *= ratio;
        grid.push(t);
    }
    grid.push(0.0);
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    let curve = mse_curve(engine, eig, sigma2, &grid, quad_tol, CurveParams::default())?;
    let mut acc = 0.0;
    for k in 0..grid.len() - 1 {
        acc += 0.5 * (curve.values[k] + curve.values[k + 1]) * (grid[k + 1] - grid[k]);
    }
    Ok(acc)
}

/// Evaluates F for each inverse-time candidate alpha and returns the argmin
/// (ties toward smaller alpha) plus the full table.
pub fn grid_search_alpha(
    candidates: &[f64],
    eig: &GramEigenSystem,
    sigma2: f64,
    epsilon: f64,
    horizon: f64,
    dt: f64,
    quad_tol: f64,
) -> Result<(f64, Vec<FunctionalResult>)> {
    if candidates.is_empty() {
        return Err(Error::InvalidConfig("no grid-search candidates".into()));
    }
    let mut results = Vec::with_capacity(candidates.len());
    for &alpha in candidates {
        let schedule = RegularizationSchedule::inverse_time(alpha, epsilon, sigma2)?;
        let value = convergence_functional(
            &MseEngine::TimeDependent { schedule },
            eig,
            sigma2,
            horizon,
            dt,
            quad_tol,
        )?;
        results.push(FunctionalResult {
            alpha,
            value,
            horizon,
        });
    }
    let mut best = results[0];
    for r in &results[1..] {
        if r.value < best.value || (r.value == best.value && r.alpha < best.alpha) {
            best = *r;
        }
    }
    Ok((best.alpha, results))
}

//! Detector operations: the one-shot MMSE estimate, the gradient-flow
//! equilibrium, exact closed-form trajectories for constant and
//! time-dependent regularization, and the Euler-discretized trajectory.
//!
//! All closed-form math runs in the Gram eigenbasis: one decomposition turns
//! every time point into n independent scalar problems.

use nalgebra::{Cholesky, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mimo::{check_len, ChannelMatrix};
use crate::quad::adaptive_trapezoid;
use crate::schedules::RegularizationSchedule;
use crate::spectral::GramEigenSystem;

/// Default relative tolerance for the time-dependent trajectory integrals.
pub const DEFAULT_QUAD_TOL: f64 = 1e-8;

/// Precomputed eigenbasis data for closed-form trajectory evaluation.
#[derive(Debug, Clone)]
pub struct ClosedFormState {
    eig: GramEigenSystem,
    /// U^H H^H y.
    projected_rhs: DVector<Complex64>,
    schedule: RegularizationSchedule,
}

impl ClosedFormState {
    pub fn new(
        eig: GramEigenSystem,
        h: &ChannelMatrix,
        y: &DVector<Complex64>,
        schedule: RegularizationSchedule,
    ) -> Result<Self> {
        check_len("eigensystem dimension", h.cols(), eig.n())?;
        schedule.validate()?;
        let projected_rhs = eig.to_eigenbasis(&h.matched_filter(y)?);
        Ok(Self {
            eig,
            projected_rhs,
            schedule,
        })
    }

    pub fn eig(&self) -> &GramEigenSystem {
        &self.eig
    }

    pub fn schedule(&self) -> &RegularizationSchedule {
        &self.schedule
    }

    fn map_back(&self, gains: &[f64]) -> DVector<Complex64> {
        let scaled = DVector::from_iterator(
            gains.len(),
            gains
                .iter()
                .zip(self.projected_rhs.iter())
                .map(|(&g, c)| c * Complex64::new(g, 0.0)),
        );
        self.eig.from_eigenbasis(&scaled)
    }
}

/// The MMSE estimate (H^H H + sigma^2 I)^{-1} H^H y via a Hermitian
/// positive-definite solve.
pub fn mmse_estimate(
    h: &ChannelMatrix,
    y: &DVector<Complex64>,
    sigma2: f64,
) -> Result<DVector<Complex64>> {
    if !(sigma2 > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "noise variance must be positive (sigma2={sigma2})"
        )));
    }
    let rhs = h.matched_filter(y)?;
    let mut regularized = h.gram();
    for i in 0..h.cols() {
        regularized[(i, i)] += Complex64::new(sigma2, 0.0);
    }
    let chol = Cholesky::new(regularized).ok_or(Error::EigenFailure)?;
    Ok(chol.solve(&rhs))
}

/// The equilibrium x* of the gradient flow: component i of U^H H^H y scaled
/// by 1/(lambda_i + eta).
pub fn equilibrium_point(state: &ClosedFormState, eta: f64) -> DVector<Complex64> {
    let gains: Vec<f64> = state
        .eig
        .eigenvalues()
        .iter()
        .map(|&l| 1.0 / (l + eta))
        .collect();
    state.map_back(&gains)
}

/// Scalar gain of the constant-eta flow on one eigencomponent:
/// e^{-(lambda+eta)t}(1 - 1/(lambda+eta)) + 1/(lambda+eta).
pub fn ode_gain(lambda: f64, eta: f64, t: f64) -> f64 {
    let k = lambda + eta;
    (-k * t).exp() * (1.0 - 1.0 / k) + 1.0 / k
}

/// The exact constant-eta trajectory x(t), starting from x(0) = H^H y.
pub fn ode_trajectory_at(state: &ClosedFormState, eta: f64, t: f64) -> DVector<Complex64> {
    let gains: Vec<f64> = state
        .eig
        .eigenvalues()
        .iter()
        .map(|&l| ode_gain(l, eta, t))
        .collect();
    state.map_back(&gains)
}

/// The scalar gain g(t) = e^{-a(t)} (1 + \int_0^t e^{a(u)} du) evaluated in
/// the overflow-free form e^{-a(t)} + \int_0^t e^{a(u)-a(t)} du, where
/// a(u) = lambda u + xi(u) is increasing so the integrand never exceeds 1.
pub fn tode_gain(
    lambda: f64,
    sched: &RegularizationSchedule,
    t: f64,
    quad_tol: f64,
) -> Result<f64> {
    let a_t = lambda * t + sched.xi_at(t)?.xi;
    let integrand = |u: f64| {
        let a_u = lambda * u + sched.xi_at(u).map(|x| x.xi).unwrap_or(f64::NAN);
        (a_u - a_t).exp()
    };
    Ok((-a_t).exp() + adaptive_trapezoid(integrand, 0.0, t, quad_tol)?)
}

/// Gains g_i(t_k) for every eigenvalue over an ascending grid, built in one
/// cumulative pass: each step reuses the previous accumulated integral
/// instead of re-integrating from zero.
pub fn tode_gains_cumulative(
    lambdas: &[f64],
    sched: &RegularizationSchedule,
    grid: &[f64],
    quad_tol: f64,
) -> Result<Vec<Vec<f64>>> {
    if grid.is_empty() {
        return Ok(Vec::new());
    }
    if grid[0] < 0.0 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(
            "time grid must be ascending and nonnegative".into(),
        ));
    }
    let xi_grid: Vec<f64> = grid
        .iter()
        .map(|&t| sched.xi_at(t).map(|x| x.xi))
        .collect::<Result<_>>()?;

    let mut out = Vec::with_capacity(grid.len());
    // accumulated[i] = \int_0^{t_k} e^{a_i(u) - a_i(t_k)} du
    let mut accumulated = vec![0.0; lambdas.len()];
    let mut prev_t = 0.0;
    let mut prev_a: Vec<f64> = lambdas.iter().map(|_| 0.0).collect();
    for (k, &t) in grid.iter().enumerate() {
        let mut gains = Vec::with_capacity(lambdas.len());
        for (i, &lambda) in lambdas.iter().enumerate() {
            let a_t = lambda * t + xi_grid[k];
            let segment = if t > prev_t {
                let integrand = |u: f64| {
                    let a_u = lambda * u + sched.xi_at(u).map(|x| x.xi).unwrap_or(f64::NAN);
                    (a_u - a_t).exp()
                };
                adaptive_trapezoid(integrand, prev_t, t, quad_tol)?
            } else {
                0.0
            };
            accumulated[i] = (prev_a[i] - a_t).exp() * accumulated[i] + segment;
            prev_a[i] = a_t;
            gains.push((-a_t).exp() + accumulated[i]);
        }
        out.push(gains);
        prev_t = t;
    }
    Ok(out)
}

/// The exact time-dependent trajectory x(t) under the state's schedule.
pub fn tode_trajectory_at(
    state: &ClosedFormState,
    t: f64,
    quad_tol: f64,
) -> Result<DVector<Complex64>> {
    let gains: Vec<f64> = state
        .eig
        .eigenvalues()
        .iter()
        .map(|&l| tode_gain(l, &state.schedule, t, quad_tol))
        .collect::<Result<_>>()?;
    Ok(state.map_back(&gains))
}

/// Euler discretization parameters.
#[derive(Debug, Clone, Copy)]
pub struct EulerConfig {
    /// Step size.
    pub dt: f64,
    /// Integration horizon.
    pub t_max: f64,
}

impl EulerConfig {
    pub const DEFAULT_DT: f64 = 1e-3;

    pub fn new(dt: f64, t_max: f64) -> Result<Self> {
        if !(dt > 0.0) || !(t_max > 0.0) || dt > t_max {
            return Err(Error::InvalidConfig(format!(
                "Euler config requires 0 < dt <= t_max (dt={dt}, t_max={t_max})"
            )));
        }
        Ok(Self { dt, t_max })
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.dt + 0.5).floor() as usize
    }
}

/// Euler recurrence x_N = x_{N-1} - dt (H^H H + eta(t_N) I) x_{N-1}
/// + dt H^H y with x_0 = H^H y; returns every state from t = 0 to t_max.
/// Rejects step sizes violating dt < 2/(lambda_1 + eta_max) up front.
pub fn euler_trajectory(
    h: &ChannelMatrix,
    y: &DVector<Complex64>,
    sched: &RegularizationSchedule,
    cfg: &EulerConfig,
    eig: &GramEigenSystem,
) -> Result<Vec<(f64, DVector<Complex64>)>> {
    check_len("eigensystem dimension", h.cols(), eig.n())?;
    check_euler_stability(sched, cfg, eig)?;

    let gram = h.gram();
    let rhs = h.matched_filter(y)?;
    let steps = cfg.steps();
    let mut out = Vec::with_capacity(steps + 1);
    let mut x = rhs.clone();
    out.push((0.0, x.clone()));
    for step in 1..=steps {
        let t = cfg.dt * step as f64;
        let eta = sched.eta_at(t)?;
        let drift = &gram * &x;
        x.zip_zip_apply(&drift, &rhs, |xi, di, bi| {
            *xi -= Complex64::new(cfg.dt, 0.0) * (di + Complex64::new(eta, 0.0) * *xi - bi)
        });
        out.push((t, x.clone()));
    }
    Ok(out)
}

pub(crate) fn check_euler_stability(
    sched: &RegularizationSchedule,
    cfg: &EulerConfig,
    eig: &GramEigenSystem,
) -> Result<()> {
    let eta_max = sched.eta_max_over(cfg.dt, cfg.t_max)?;
    let bound = 2.0 / (eig.lambda_max() + eta_max);
    if cfg.dt >= bound {
        return Err(Error::EulerUnstable {
            dt: cfg.dt,
            bound,
            lambda_max: eig.lambda_max(),
            eta_max,
        });
    }
    Ok(())
}

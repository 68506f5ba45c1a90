//! Regularization parameter as a function of time: eta(t), its running
//! integral xi(t), and the exponent a_i(t) = lambda_i t + xi(t) that drives
//! the time-dependent trajectory and MSE formulas.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default epsilon of the inverse-time model.
pub const DEFAULT_EPSILON: f64 = 1e-8;

/// eta(t) over t >= 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RegularizationSchedule {
    /// eta(t) = eta.
    Constant { eta: f64 },
    /// eta(t) = 1/(alpha t + epsilon) + sigma2; decays toward sigma2.
    InverseTime {
        alpha: f64,
        epsilon: f64,
        sigma2: f64,
    },
    /// Piecewise-linear interpolation of (times, values), clamped to the
    /// last value beyond the table.
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

/// The accumulated integral xi(t) = \int_0^t eta(s) ds at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiValue {
    pub t: f64,
    pub xi: f64,
}

impl RegularizationSchedule {
    pub fn constant(eta: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "constant schedule requires eta > 0 (eta={eta})"
            )));
        }
        Ok(Self::Constant { eta })
    }

    pub fn inverse_time(alpha: f64, epsilon: f64, sigma2: f64) -> Result<Self> {
        if !(alpha > 0.0) || !(epsilon > 0.0) || !(sigma2 > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "inverse-time schedule requires alpha, epsilon, sigma2 > 0 \
                 (alpha={alpha}, epsilon={epsilon}, sigma2={sigma2})"
            )));
        }
        Ok(Self::InverseTime {
            alpha,
            epsilon,
            sigma2,
        })
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::InvalidConfig(
                "tabulated schedule needs equal-length nonempty times/values".into(),
            ));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidConfig(
                "tabulated schedule must start at t = 0".into(),
            ));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "tabulated schedule times must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::InvalidConfig(
                "tabulated schedule values must be strictly positive".into(),
            ));
        }
        Ok(Self::Tabulated { times, values })
    }

    pub fn validate(&self) -> Result<()> {
        match self.clone() {
            Self::Constant { eta } => Self::constant(eta).map(|_| ()),
            Self::InverseTime {
                alpha,
                epsilon,
                sigma2,
            } => Self::inverse_time(alpha, epsilon, sigma2).map(|_| ()),
            Self::Tabulated { times, values } => Self::tabulated(times, values).map(|_| ()),
        }
    }

    /// eta(t).
    pub fn eta_at(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(match self {
            Self::Constant { eta } => *eta,
            Self::InverseTime {
                alpha,
                epsilon,
                sigma2,
            } => 1.0 / (alpha * t + epsilon) + sigma2,
            Self::Tabulated { times, values } => {
                let last = times.len() - 1;
                if t >= times[last] {
                    values[last]
                } else {
                    // first segment with times[i] <= t < times[i+1]
                    let i = times.partition_point(|&x| x <= t) - 1;
                    let frac = (t - times[i]) / (times[i + 1] - times[i]);
                    values[i] + frac * (values[i + 1] - values[i])
                }
            }
        })
    }

    /// xi(t) = \int_0^t eta(s) ds, closed form for the analytic kinds and
    /// exact trapezoid of the interpolant for tables.
    pub fn xi_at(&self, t: f64) -> Result<XiValue> {
        check_time(t)?;
        let xi = match self {
            Self::Constant { eta } => eta * t,
            Self::InverseTime {
                alpha,
                epsilon,
                sigma2,
            } => ((alpha * t + epsilon) / epsilon).ln() / alpha + sigma2 * t,
            Self::Tabulated { times, values } => {
                let mut acc = 0.0;
                let mut i = 0;
                while i + 1 < times.len() && times[i + 1] <= t {
                    acc += 0.5 * (values[i] + values[i + 1]) * (times[i + 1] - times[i]);
                    i += 1;
                }
                if i + 1 == times.len() {
                    // past the table: clamped constant tail
                    acc += values[i] * (t - times[i]);
                } else if t > times[i] {
                    let eta_t = self.eta_at(t)?;
                    acc += 0.5 * (values[i] + eta_t) * (t - times[i]);
                }
                acc
            }
        };
        Ok(XiValue { t, xi })
    }

    /// Largest eta over [t0, t1]; used for the Euler stability bound. All
    /// three kinds are maximized at the left endpoint or a table knot.
    pub fn eta_max_over(&self, t0: f64, t1: f64) -> Result<f64> {
        check_time(t0)?;
        if t1 < t0 {
            return Err(Error::InvalidConfig(format!(
                "empty interval [{t0}, {t1}]"
            )));
        }
        Ok(match self {
            Self::Constant { eta } => *eta,
            // monotone decreasing
            Self::InverseTime { .. } => self.eta_at(t0)?,
            Self::Tabulated { times, values } => {
                let mut best = self.eta_at(t0)?.max(self.eta_at(t1)?);
                for (&kt, &kv) in times.iter().zip(values) {
                    if kt > t0 && kt < t1 {
                        best = best.max(kv);
                    }
                }
                best
            }
        })
    }

    /// Human-readable description used in CSV provenance headers.
    pub fn describe(&self) -> String {
        match self {
            Self::Constant { eta } => format!("constant(eta={eta})"),
            Self::InverseTime {
                alpha,
                epsilon,
                sigma2,
            } => format!("inverse-time(alpha={alpha},epsilon={epsilon},sigma2={sigma2})"),
            Self::Tabulated { times, .. } => format!("tabulated({} knots)", times.len()),
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) {
        return Err(Error::InvalidConfig(format!("time must be >= 0 (t={t})")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> RegularizationSchedule {
        RegularizationSchedule::tabulated(vec![0.0, 1.0, 2.0], vec![2.0, 1.0, 3.0]).unwrap()
    }

    #[test]
    fn constant_eta() {
        let s = RegularizationSchedule::constant(0.5).unwrap();
        assert_eq!(s.eta_at(7.0).unwrap(), 0.5);
    }

    #[test]
    fn inverse_time_at_zero() {
        let s = RegularizationSchedule::inverse_time(1.0, DEFAULT_EPSILON, 1.0).unwrap();
        assert!((s.eta_at(0.0).unwrap() - (1e8 + 1.0)).abs() < 1e-3);
    }

    #[test]
    fn inverse_time_limit_is_sigma2() {
        let s = RegularizationSchedule::inverse_time(500.0, DEFAULT_EPSILON, 1.0).unwrap();
        // 1/(500*10) = 2e-4 residual
        assert!((s.eta_at(10.0).unwrap() - 1.0).abs() < 3e-4);
    }

    #[test]
    fn xi_constant_exact() {
        let s = RegularizationSchedule::constant(2.0).unwrap();
        assert_eq!(s.xi_at(3.0).unwrap().xi, 6.0);
    }

    #[test]
    fn xi_inverse_time_closed_form() {
        let s = RegularizationSchedule::inverse_time(1.0, DEFAULT_EPSILON, 1.0).unwrap();
        // ln((1 + 1e-8)/1e-8) + 1
        let expect = 19.420_680_753_951_36;
        assert!((s.xi_at(1.0).unwrap().xi - expect).abs() < 1e-8);
    }

    #[test]
    fn xi_zero_at_origin() {
        for s in [
            RegularizationSchedule::constant(1.0).unwrap(),
            RegularizationSchedule::inverse_time(10.0, DEFAULT_EPSILON, 0.5).unwrap(),
            table(),
        ] {
            assert_eq!(s.xi_at(0.0).unwrap().xi, 0.0);
        }
    }

    #[test]
    fn tabulated_interpolation_and_clamp() {
        let s = table();
        assert_eq!(s.eta_at(0.5).unwrap(), 1.5);
        assert_eq!(s.eta_at(1.5).unwrap(), 2.0);
        assert_eq!(s.eta_at(10.0).unwrap(), 3.0);
        // xi(2) = 1.5 + 2 = 3.5; xi(3) adds clamped tail 3.0
        assert!((s.xi_at(2.0).unwrap().xi - 3.5).abs() < 1e-12);
        assert!((s.xi_at(3.0).unwrap().xi - 6.5).abs() < 1e-12);
    }

    #[test]
    fn xi_monotone() {
        for s in [
            RegularizationSchedule::constant(0.3).unwrap(),
            RegularizationSchedule::inverse_time(50.0, DEFAULT_EPSILON, 1.0).unwrap(),
            table(),
        ] {
            let mut prev = f64::NEG_INFINITY;
            for k in 0..40 {
                let t = 0.1 * k as f64;
                let xi = s.xi_at(t).unwrap().xi;
                assert!(xi > prev, "xi not increasing for {s:?} at t={t}");
                prev = xi;
            }
        }
    }

    #[test]
    fn xi_derivative_recovers_eta() {
        let schedules = [
            RegularizationSchedule::constant(0.7).unwrap(),
            RegularizationSchedule::inverse_time(5.0, DEFAULT_EPSILON, 1.0).unwrap(),
        ];
        let h = 1e-6;
        for s in &schedules {
            for k in 1..=20 {
                let t = 0.17 * k as f64;
                let d = (s.xi_at(t + h).unwrap().xi - s.xi_at(t - h).unwrap().xi) / (2.0 * h);
                let eta = s.eta_at(t).unwrap();
                assert!(
                    (d - eta).abs() / eta < 1e-4,
                    "d={d} eta={eta} for {s:?} at t={t}"
                );
            }
        }
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(RegularizationSchedule::constant(0.0).is_err());
        assert!(RegularizationSchedule::inverse_time(-1.0, 1e-8, 1.0).is_err());
        assert!(RegularizationSchedule::tabulated(vec![0.5, 1.0], vec![1.0, 1.0]).is_err());
        assert!(RegularizationSchedule::tabulated(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(RegularizationSchedule::tabulated(vec![0.0, 1.0], vec![1.0, -1.0]).is_err());
        let s = RegularizationSchedule::constant(1.0).unwrap();
        assert!(s.eta_at(-0.1).is_err());
        assert!(s.xi_at(-0.1).is_err());
    }
}

//! Double integration of floor acceleration, end-of-shaking detection and
//! zero velocity update (ZUPT).
//!
//! Indices in the math are 1-based (`a[1..n]`); the vectors here are
//! 0-based, so `s[i]` lives at `displacement[i - 1]`.

mod empirical;
mod eos;
mod zupt;

pub use empirical::{empirical_mse, EmpiricalMse};
pub use eos::{detect_eos, EosDetection, DEFAULT_WINDOW_S};
pub use zupt::{apply_zupt, error_variance, zupt_coefficients, CoefficientMode, ZuptCoefficients};

use crate::error::{Error, Result};

/// Fewest samples a rest window may average over.
pub const MIN_REST_SAMPLES: usize = 10;

/// Uniformly sampled horizontal acceleration, m/s².
#[derive(Debug, Clone, PartialEq)]
pub struct AccelTrace {
    samples: Vec<f64>,
    dt: f64,
    bias_removed: bool,
}

impl AccelTrace {
    pub fn new(samples: Vec<f64>, dt: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidTrace("trace has no samples".into()));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidTrace(format!(
                "sample interval must be positive, got {dt}"
            )));
        }
        if let Some(k) = samples.iter().position(|a| !a.is_finite()) {
            return Err(Error::InvalidTrace(format!(
                "sample {} is not finite",
                k + 1
            )));
        }
        Ok(Self {
            samples,
            dt,
            bias_removed: false,
        })
    }

    /// A trace known to carry no constant offset, e.g. synthetic noise.
    pub fn unbiased(samples: Vec<f64>, dt: f64) -> Result<Self> {
        let mut trace = Self::new(samples, dt)?;
        trace.bias_removed = true;
        Ok(trace)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn bias_removed(&self) -> bool {
        self.bias_removed
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.dt
    }
}

/// Where the known-rest segment used for bias estimation sits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RestWindow {
    Start(f64),
    End(f64),
}

impl RestWindow {
    pub fn seconds(&self) -> f64 {
        match *self {
            RestWindow::Start(s) | RestWindow::End(s) => s,
        }
    }
}

/// Subtracts the mean of a known-rest segment from every sample.
///
/// Under linear motion this removes the sensor's constant bias together
/// with the constant fraction of gravity leaking into the horizontal axis.
pub fn remove_bias(trace: &AccelTrace, rest: RestWindow) -> Result<AccelTrace> {
    let secs = rest.seconds();
    if !(secs.is_finite() && secs > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rest window must be positive, got {secs}"
        )));
    }
    let count = ((secs / trace.dt).round() as usize).min(trace.len());
    if count < MIN_REST_SAMPLES {
        return Err(Error::RestWindowTooShort {
            got: count,
            needed: MIN_REST_SAMPLES,
        });
    }
    let window = match rest {
        RestWindow::Start(_) => &trace.samples[..count],
        RestWindow::End(_) => &trace.samples[trace.len() - count..],
    };
    let offset = window.iter().sum::<f64>() / count as f64;
    Ok(AccelTrace {
        samples: trace.samples.iter().map(|a| a - offset).collect(),
        dt: trace.dt,
        bias_removed: true,
    })
}

/// Velocity and displacement, optionally with the ZUPT-corrected
/// displacement and analytic error standard deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementEstimate {
    pub dt: f64,
    /// m/s
    pub velocity: Vec<f64>,
    /// m
    pub displacement: Vec<f64>,
    /// m, filled by [`apply_zupt`]
    pub displacement_zupt: Option<Vec<f64>>,
    /// m, analytic error STD without correction
    pub sigma_s: Option<Vec<f64>>,
    /// m, analytic error STD with correction
    pub sigma_s_zupt: Option<Vec<f64>>,
}

impl DisplacementEstimate {
    pub fn len(&self) -> usize {
        self.displacement.len()
    }

    pub fn is_empty(&self) -> bool {
        self.displacement.is_empty()
    }

    /// Attaches analytic error STDs computed from variance sequences.
    pub fn with_error_variances(mut self, raw: &[f64], zupt: &[f64]) -> Result<Self> {
        if raw.len() < self.len() || zupt.len() < self.len() {
            return Err(Error::LengthMismatch(format!(
                "need {} variances, got {} and {}",
                self.len(),
                raw.len(),
                zupt.len()
            )));
        }
        let n = self.len();
        self.sigma_s = Some(raw[..n].iter().map(|v| v.max(0.0).sqrt()).collect());
        self.sigma_s_zupt = Some(zupt[..n].iter().map(|v| v.max(0.0).sqrt()).collect());
        Ok(self)
    }
}

/// Rectangle-rule double sum: `v[i] = Σ_{k≤i} a[k]Δt`,
/// `s[i] = Σ_{k≤i} v[k]Δt`.
pub fn double_integrate(trace: &AccelTrace) -> Result<DisplacementEstimate> {
    if !trace.bias_removed {
        return Err(Error::BiasNotRemoved);
    }
    let dt = trace.dt;
    let mut velocity = Vec::with_capacity(trace.len());
    let mut displacement = Vec::with_capacity(trace.len());
    let (mut v, mut s) = (0.0, 0.0);
    for &a in &trace.samples {
        v += a * dt;
        s += v * dt;
        velocity.push(v);
        displacement.push(s);
    }
    Ok(DisplacementEstimate {
        dt,
        velocity,
        displacement,
        displacement_zupt: None,
        sigma_s: None,
        sigma_s_zupt: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_validation() {
        assert!(AccelTrace::new(vec![], 0.01).is_err());
        assert!(AccelTrace::new(vec![1.0], 0.0).is_err());
        assert!(AccelTrace::new(vec![f64::NAN], 0.01).is_err());
    }

    #[test]
    fn constant_offset_removed() {
        let t = AccelTrace::new(vec![0.05; 50], 0.01).unwrap();
        let out = remove_bias(&t, RestWindow::End(0.5)).unwrap();
        assert!(out.bias_removed());
        assert!(out.samples().iter().all(|a| a.abs() < 1e-15));
    }

    #[test]
    fn offset_under_noise_within_standard_error() {
        use rand::Rng;
        use rand_distr::StandardNormal;
        // sine burst for 8 s, then 2 s of rest; white noise σ = 0.01
        let (sigma, offset, dt) = (0.01, 0.02, 0.01);
        let rest = 200.0;
        for seed in 0..5 {
            let mut rng = crate::rng::rng_for(31, seed);
            let a: Vec<f64> = (1..=1000)
                .map(|k| {
                    let t = k as f64 * dt;
                    let burst = if t <= 8.0 {
                        (std::f64::consts::PI * t).sin()
                    } else {
                        0.0
                    };
                    burst + offset + sigma * rng.sample::<f64, _>(StandardNormal)
                })
                .collect();
            let raw = AccelTrace::new(a.clone(), dt).unwrap();
            let out = remove_bias(&raw, RestWindow::End(2.0)).unwrap();
            let estimate = a[0] - out.samples()[0];
            assert!((estimate - offset).abs() < 3.0 * sigma / f64::sqrt(rest));
        }
    }

    #[test]
    fn zero_trace_unchanged() {
        let t = AccelTrace::new(vec![0.0; 20], 0.1).unwrap();
        let out = remove_bias(&t, RestWindow::Start(1.0)).unwrap();
        assert_eq!(out.samples(), t.samples());
    }

    #[test]
    fn rest_window_too_short() {
        let t = AccelTrace::new(vec![0.0; 100], 0.01).unwrap();
        assert!(matches!(
            remove_bias(&t, RestWindow::End(0.05)),
            Err(Error::RestWindowTooShort { got: 5, needed: 10 })
        ));
    }

    #[test]
    fn hand_double_sum() {
        let t = AccelTrace::unbiased(vec![1.0, 1.0, 1.0], 1.0).unwrap();
        let est = double_integrate(&t).unwrap();
        assert_eq!(est.velocity, vec![1.0, 2.0, 3.0]);
        assert_eq!(est.displacement, vec![1.0, 3.0, 6.0]);
    }

    #[test]
    fn zero_acceleration_stays_put() {
        let t = AccelTrace::unbiased(vec![0.0; 8], 0.01).unwrap();
        let est = double_integrate(&t).unwrap();
        assert!(est
            .velocity
            .iter()
            .chain(&est.displacement)
            .all(|&x| x == 0.0));
    }

    #[test]
    fn integration_requires_bias_removal() {
        let t = AccelTrace::new(vec![0.0; 8], 0.01).unwrap();
        assert!(matches!(double_integrate(&t), Err(Error::BiasNotRemoved)));
    }

    #[test]
    fn sine_double_integral_within_first_order() {
        // a(t) = sin(ωt) on one period: s(T) = T/ω (the 1/ω² sin term vanishes
        // at a full period).
        let period = 2.0;
        let omega = 2.0 * std::f64::consts::PI / period;
        let exact = period / omega;
        let mut errs = Vec::new();
        for n in [200usize, 400, 800] {
            let dt = period / n as f64;
            let a: Vec<f64> = (1..=n).map(|k| (omega * k as f64 * dt).sin()).collect();
            let est = double_integrate(&AccelTrace::unbiased(a, dt).unwrap()).unwrap();
            errs.push((est.displacement[n - 1] - exact).abs() / exact);
            assert!(errs.last().unwrap() < &dt, "n = {n}");
        }
        assert!(errs[0] > errs[1] && errs[1] > errs[2]);
    }
}

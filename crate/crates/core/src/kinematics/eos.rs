use super::AccelTrace;
use crate::error::{Error, Result};

/// Default quiet-window duration, s.
pub const DEFAULT_WINDOW_S: f64 = 1.0;

/// End of shaking: the first sample of the earliest quiet window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EosDetection {
    /// 1-based sample index `n`.
    pub eos_index: usize,
    /// Threshold δ, m/s².
    pub delta: f64,
    /// Window duration W, s.
    pub window_w: f64,
}

impl EosDetection {
    /// Time of the EOS sample, taking sample `i` at `i·Δt`.
    pub fn time(&self, dt: f64) -> f64 {
        self.eos_index as f64 * dt
    }
}

/// Finds the first window of `round(W/Δt)` samples with `|a| < 3σ`
/// throughout and reports its first sample.
pub fn detect_eos(trace: &AccelTrace, sigma: f64, window_w: f64) -> Result<EosDetection> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise sigma must be positive, got {sigma}"
        )));
    }
    let dt = trace.dt();
    if !(window_w.is_finite() && window_w >= dt) {
        return Err(Error::InvalidParameter(format!(
            "window {window_w} s shorter than one sample ({dt} s)"
        )));
    }
    let delta = 3.0 * sigma;
    let window_samples = ((window_w / dt).round() as usize).max(1);

    let mut run = 0usize;
    for (k, a) in trace.samples().iter().enumerate() {
        if a.abs() < delta {
            run += 1;
            if run == window_samples {
                return Ok(EosDetection {
                    eos_index: k + 2 - window_samples,
                    delta,
                    window_w,
                });
            }
        } else {
            run = 0;
        }
    }
    Err(Error::NoEosFound {
        delta,
        window_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quiet_trace_detects_at_first_sample() {
        let t = AccelTrace::new(vec![0.0; 300], 0.01).unwrap();
        let eos = detect_eos(&t, 0.1, 1.0).unwrap();
        assert_eq!(eos.eos_index, 1);
        assert!((eos.delta - 0.3).abs() < 1e-15);
    }

    #[test]
    fn quiet_window_start_is_reported() {
        let mut a = vec![1.0; 50];
        a.extend(vec![0.0; 100]);
        let t = AccelTrace::new(a, 0.01).unwrap();
        assert_eq!(detect_eos(&t, 0.1, 1.0).unwrap().eos_index, 51);
    }

    #[test]
    fn interrupted_quiet_restarts() {
        let mut a = vec![0.0; 60];
        a.push(1.0);
        a.extend(vec![0.0; 100]);
        let t = AccelTrace::new(a, 0.01).unwrap();
        assert_eq!(detect_eos(&t, 0.1, 1.0).unwrap().eos_index, 62);
    }

    #[test]
    fn never_quiet() {
        let a: Vec<f64> = (0..500)
            .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let t = AccelTrace::new(a, 0.01).unwrap();
        assert!(matches!(
            detect_eos(&t, 0.1, 1.0),
            Err(Error::NoEosFound {
                window_samples: 100,
                ..
            })
        ));
    }

    #[test]
    fn threshold_is_strict() {
        let t = AccelTrace::new(vec![0.75; 200], 0.01).unwrap();
        assert!(detect_eos(&t, 0.25 + 1e-12, 1.0).is_ok());
        assert!(detect_eos(&t, 0.25, 1.0).is_err());
    }

    #[test]
    fn window_shorter_than_sample_rejected() {
        let t = AccelTrace::new(vec![0.0; 10], 0.1).unwrap();
        assert!(detect_eos(&t, 1.0, 0.05).is_err());
    }
}

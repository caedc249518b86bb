use rustfft::{num_complex::Complex64, FftPlanner};

use super::filter::{build_shaping_filters, SourceKind};
use super::spec::NoiseSpec;
use crate::error::{Error, Result};

/// Autocovariance `r_0 … r_{n-1}` of a stationary noise sequence, in
/// (m/s²)², together with its long-run sum `η = Σ_{|k|<n} r_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct AutocovarianceSequence {
    lags: Vec<f64>,
    eta: f64,
}

impl AutocovarianceSequence {
    pub fn new(lags: Vec<f64>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidAutocovariance(msg));
        let Some(&r0) = lags.first() else {
            return bad("no lags".into());
        };
        if !(r0.is_finite() && r0 >= 0.0) {
            return bad(format!("r_0 must be finite and non-negative, got {r0}"));
        }
        let slack = r0 * 1e-12;
        for (k, &r) in lags.iter().enumerate() {
            if !r.is_finite() || r.abs() > r0 + slack {
                return bad(format!("|r_{k}| = {} exceeds r_0 = {r0}", r.abs()));
            }
        }
        let eta = r0 + 2.0 * lags[1..].iter().sum::<f64>();
        if eta < -1e-9 * r0 * lags.len() as f64 {
            return bad(format!("long-run sum is negative ({eta:e})"));
        }
        Ok(Self { lags, eta })
    }

    /// Delta autocovariance of white noise with per-sample variance `var`.
    pub fn white(variance: f64, n: usize) -> Result<Self> {
        let mut lags = vec![0.0; n.max(1)];
        lags[0] = variance;
        Self::new(lags)
    }

    pub fn lags(&self) -> &[f64] {
        &self.lags
    }

    pub fn len(&self) -> usize {
        self.lags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lags.is_empty()
    }

    pub fn r0(&self) -> f64 {
        self.lags[0]
    }

    /// Per-sample standard deviation, `√r_0`.
    pub fn sigma(&self) -> f64 {
        self.lags[0].sqrt()
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

/// `Σ_j h[j]·h[j+k]` for `k = 0..taps.len()`.
pub(crate) fn tap_autocorrelation(taps: &[f64]) -> Vec<f64> {
    let n = taps.len();
    if n <= 64 {
        return (0..n)
            .map(|k| {
                taps[..n - k]
                    .iter()
                    .zip(&taps[k..])
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect();
    }
    let size = (2 * n - 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut buf: Vec<Complex64> = taps
        .iter()
        .map(|&h| Complex64::new(h, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(size)
        .collect();
    fwd.process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex64::new(c.norm_sqr(), 0.0);
    }
    inv.process(&mut buf);
    let norm = 1.0 / size as f64;
    buf[..n].iter().map(|c| c.re * norm).collect()
}

/// Autocovariance of the summed noise model over an `n`-sample window.
///
/// Each source contributes `scale²·Σ_j h[j]h[j+k]` from its shaping filter
/// truncated at `n` taps. The random-walk source is therefore treated as
/// stationary within the window, `r_k ∝ n - k`.
pub fn autocovariance(spec: &NoiseSpec, n: usize) -> Result<AutocovarianceSequence> {
    let filters = build_shaping_filters(spec, n)?;
    let mut lags = vec![0.0; n];
    for f in &filters {
        let var = f.scale * f.scale;
        if var == 0.0 {
            continue;
        }
        match f.source_kind {
            SourceKind::White => lags[0] += var,
            SourceKind::RandomWalk => {
                for (k, r) in lags.iter_mut().enumerate() {
                    *r += var * (n - k) as f64;
                }
            }
            SourceKind::BiasInstability => {
                for (r, a) in lags.iter_mut().zip(tap_autocorrelation(&f.coefficients)) {
                    *r += var * a;
                }
            }
        }
    }
    AutocovarianceSequence::new(lags)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_is_delta() {
        let spec = NoiseSpec::white_from_sigma(2.0, 100.0).unwrap();
        let r = autocovariance(&spec, 5).unwrap();
        assert!((r.r0() - 4.0).abs() < 1e-12);
        assert!(r.lags()[1..].iter().all(|&x| x == 0.0));
        assert!((r.eta() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn random_walk_window_counts() {
        // scale chosen so the per-sample driving variance is 1
        let fs = 50.0;
        let spec = NoiseSpec::builder(fs)
            .rrw((2.0 * fs).sqrt())
            .build()
            .unwrap();
        let r = autocovariance(&spec, 3).unwrap();
        for (got, want) in r.lags().iter().zip([3.0, 2.0, 1.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn bias_instability_r0_is_tap_energy() {
        // unit driving variance: b·√π = 1
        let b = 1.0 / std::f64::consts::PI.sqrt();
        let bi = b / super::super::spec::flicker_per_bias_instability();
        let spec = NoiseSpec::builder(100.0)
            .bias_instability(bi)
            .build()
            .unwrap();
        let r = autocovariance(&spec, 4).unwrap();
        let want = 1.0 + 0.25 + 0.140625 + 0.09765625;
        assert!((r.r0() - want).abs() < 1e-12);
        assert!((r.lags()[3] - 0.3125).abs() < 1e-12);
    }

    #[test]
    fn fft_and_direct_correlation_agree() {
        let taps = super::super::filter::fractional_integrator_taps(300);
        let fast = tap_autocorrelation(&taps);
        for k in [0, 1, 17, 150, 299] {
            let direct: f64 = taps[..300 - k]
                .iter()
                .zip(&taps[k..])
                .map(|(a, b)| a * b)
                .sum();
            assert!((fast[k] - direct).abs() < 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn rejects_invalid_lags() {
        assert!(AutocovarianceSequence::new(vec![1.0, 2.0]).is_err());
        assert!(AutocovarianceSequence::new(vec![-1.0]).is_err());
        assert!(AutocovarianceSequence::new(vec![]).is_err());
    }
}

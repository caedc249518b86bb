use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};

/// `BI / density(f)·√f` for the Allan-floor to 1/f conversion:
/// `density(f) = BI / √(2·ln2·π·f)`.
pub(crate) fn flicker_per_bias_instability() -> f64 {
    1.0 / (2.0 * LN_2 * PI).sqrt()
}

/// One sample of an amplitude spectral density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdPoint {
    pub freq_hz: f64,
    /// Amplitude density, m/s²/√Hz.
    pub density: f64,
}

impl PsdPoint {
    pub fn new(freq_hz: f64, density: f64) -> Self {
        Self { freq_hz, density }
    }
}

/// Spectral description of an accelerometer's noise.
///
/// The model is a sum of independent Gaussian sources: white noise (velocity
/// random walk), bias instability (1/f) and acceleration random walk. A
/// sensor described only by PSD samples has its densities fitted when the
/// spec is built; the points are kept for reference.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    arw_density: Option<f64>,
    bias_instability: Option<f64>,
    rrw_density: Option<f64>,
    psd_points: Vec<PsdPoint>,
    sample_rate: f64,
}

/// Builder for [`NoiseSpec`]; validation happens in [`build`](Self::build).
#[derive(Debug, Clone)]
pub struct NoiseSpecBuilder {
    spec: NoiseSpec,
}

impl NoiseSpecBuilder {
    /// White noise density, m/s²/√Hz.
    pub fn arw(mut self, density: f64) -> Self {
        self.spec.arw_density = Some(density);
        self
    }

    /// Bias instability (Allan deviation floor), m/s².
    pub fn bias_instability(mut self, bias: f64) -> Self {
        self.spec.bias_instability = Some(bias);
        self
    }

    /// Acceleration random walk density, (m/s²)·√Hz.
    pub fn rrw(mut self, density: f64) -> Self {
        self.spec.rrw_density = Some(density);
        self
    }

    pub fn psd_points(mut self, points: Vec<PsdPoint>) -> Self {
        self.spec.psd_points = points;
        self
    }

    pub fn build(self) -> Result<NoiseSpec> {
        let mut spec = self.spec;
        spec.validate()?;
        if !spec.has_densities() {
            let fit = super::psd::fit_noise_spec(&spec.psd_points, spec.sample_rate)?;
            spec.arw_density = fit.spec.arw_density;
            spec.bias_instability = fit.spec.bias_instability;
            spec.rrw_density = fit.spec.rrw_density;
        }
        Ok(spec)
    }
}

impl NoiseSpec {
    pub fn builder(sample_rate: f64) -> NoiseSpecBuilder {
        NoiseSpecBuilder {
            spec: NoiseSpec {
                arw_density: None,
                bias_instability: None,
                rrw_density: None,
                psd_points: Vec::new(),
                sample_rate,
            },
        }
    }

    /// Pure white noise with the given density.
    pub fn white(arw_density: f64, sample_rate: f64) -> Result<Self> {
        Self::builder(sample_rate).arw(arw_density).build()
    }

    /// White noise whose per-sample standard deviation is `sigma`.
    pub fn white_from_sigma(sigma: f64, sample_rate: f64) -> Result<Self> {
        Self::white(sigma / (sample_rate / 2.0).sqrt(), sample_rate)
    }

    fn has_densities(&self) -> bool {
        self.arw_density.is_some() || self.bias_instability.is_some() || self.rrw_density.is_some()
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidNoiseSpec(msg));
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return bad(format!(
                "sample rate must be positive, got {}",
                self.sample_rate
            ));
        }
        for (name, value) in [
            ("arw density", self.arw_density),
            ("bias instability", self.bias_instability),
            ("rrw density", self.rrw_density),
        ] {
            if let Some(v) = value {
                if !(v.is_finite() && v >= 0.0) {
                    return bad(format!("{name} must be finite and non-negative, got {v}"));
                }
            }
        }
        if !self.has_densities() && self.psd_points.is_empty() {
            return Err(Error::NoNoiseSource);
        }
        let nyquist = self.sample_rate / 2.0;
        let mut prev = 0.0;
        for p in &self.psd_points {
            if !(p.freq_hz > prev) {
                return bad("PSD frequencies must be positive and strictly increasing".into());
            }
            if p.freq_hz > nyquist {
                return bad(format!(
                    "PSD frequency {} Hz above Nyquist {} Hz",
                    p.freq_hz, nyquist
                ));
            }
            if !(p.density.is_finite() && p.density >= 0.0) {
                return bad(format!(
                    "PSD density at {} Hz must be non-negative",
                    p.freq_hz
                ));
            }
            prev = p.freq_hz;
        }
        Ok(())
    }

    pub fn arw_density(&self) -> Option<f64> {
        self.arw_density
    }

    pub fn bias_instability(&self) -> Option<f64> {
        self.bias_instability
    }

    pub fn rrw_density(&self) -> Option<f64> {
        self.rrw_density
    }

    pub fn psd_points(&self) -> &[PsdPoint] {
        &self.psd_points
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    /// Coefficient `b` of the 1/f component's amplitude density `b/√f`.
    pub fn flicker_coefficient(&self) -> Option<f64> {
        self.bias_instability
            .map(|bi| bi * flicker_per_bias_instability())
    }

    /// Per-sample standard deviation of the white component, `arw·√(fs/2)`.
    pub fn white_sigma(&self) -> f64 {
        self.arw_density.unwrap_or(0.0) * (self.sample_rate / 2.0).sqrt()
    }

    /// The white component alone.
    pub fn white_only(&self) -> NoiseSpec {
        NoiseSpec {
            arw_density: Some(self.arw_density.unwrap_or(0.0)),
            bias_instability: None,
            rrw_density: None,
            psd_points: Vec::new(),
            sample_rate: self.sample_rate,
        }
    }

    /// Same densities discretized at another rate. PSD points above the new
    /// Nyquist frequency are dropped; they only document the fit.
    pub fn with_sample_rate(&self, sample_rate: f64) -> Result<NoiseSpec> {
        let mut spec = self.clone();
        spec.sample_rate = sample_rate;
        spec.psd_points.retain(|p| p.freq_hz <= sample_rate / 2.0);
        spec.validate()?;
        Ok(spec)
    }
}

//! Sensor catalog: named noise descriptions in data-sheet units.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::noise::{fit_noise_spec, NoiseSpec, PsdPoint};
use crate::units::ug_to_si;

const BUILTIN: &str = include_str!("../data/sensors.toml");

/// One sensor as written in the catalog, µg-based units.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorRecord {
    pub name: String,
    /// µg/√Hz
    #[serde(default)]
    pub arw: Option<f64>,
    /// µg
    #[serde(default)]
    pub bi: Option<f64>,
    /// µg·√Hz
    #[serde(default)]
    pub rrw: Option<f64>,
    /// `"freq_hz:density_ug"` samples
    #[serde(default)]
    pub psd: Vec<String>,
}

impl SensorRecord {
    /// Parsed PSD samples in SI units.
    pub fn psd_points(&self) -> Result<Vec<PsdPoint>> {
        self.psd
            .iter()
            .map(|s| {
                let bad = || {
                    Error::Parse(format!(
                        "sensor {}: PSD point `{s}` is not `f_hz:ug`",
                        self.name
                    ))
                };
                let (f, d) = s.split_once(':').ok_or_else(bad)?;
                let f: f64 = f.trim().parse().map_err(|_| bad())?;
                let d: f64 = d.trim().parse().map_err(|_| bad())?;
                Ok(PsdPoint::new(f, ug_to_si(d)))
            })
            .collect()
    }

    fn has_densities(&self) -> bool {
        self.arw.is_some() || self.bi.is_some() || self.rrw.is_some()
    }

    fn validate(&self) -> Result<()> {
        let invalid = |msg: &str| {
            Err(Error::InvalidNoiseSpec(format!(
                "sensor {}: {msg}",
                self.name
            )))
        };
        if self.name.trim().is_empty() {
            return invalid("empty name");
        }
        match (self.has_densities(), self.psd.is_empty()) {
            (false, true) => return invalid("needs arw/bi/rrw or psd points"),
            (true, false) => return invalid("give either densities or psd points, not both"),
            _ => {}
        }
        self.psd_points()?;
        Ok(())
    }

    /// Noise spec discretized at `sample_rate`.
    ///
    /// PSD-described sensors are fitted on every listed point, including
    /// points above the Nyquist frequency of `sample_rate`; those points are
    /// then dropped from the spec.
    pub fn noise_spec(&self, sample_rate: f64) -> Result<NoiseSpec> {
        self.validate()?;
        if !self.psd.is_empty() {
            let points = self.psd_points()?;
            let top = points.iter().map(|p| p.freq_hz).fold(0.0, f64::max);
            let fit_rate = sample_rate.max(2.0 * top);
            let fitted = fit_noise_spec(&points, fit_rate)?.spec;
            return fitted.with_sample_rate(sample_rate);
        }
        let mut b = NoiseSpec::builder(sample_rate);
        if let Some(v) = self.arw {
            b = b.arw(ug_to_si(v));
        }
        if let Some(v) = self.bi {
            b = b.bias_instability(ug_to_si(v));
        }
        if let Some(v) = self.rrw {
            b = b.rrw(ug_to_si(v));
        }
        b.build()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogFile {
    #[serde(default)]
    sensor: Vec<SensorRecord>,
}

/// Ordered set of sensors with unique names.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorCatalog {
    sensors: Vec<SensorRecord>,
}

impl SensorCatalog {
    /// The five sensors shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_toml_str(BUILTIN).expect("bundled sensor catalog is valid")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: CatalogFile = toml::from_str(text)?;
        Self::new(file.sensor)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn new(sensors: Vec<SensorRecord>) -> Result<Self> {
        for (k, s) in sensors.iter().enumerate() {
            s.validate()?;
            if sensors[..k].iter().any(|o| o.name == s.name) {
                return Err(Error::InvalidNoiseSpec(format!(
                    "duplicate sensor `{}`",
                    s.name
                )));
            }
        }
        Ok(Self { sensors })
    }

    pub fn get(&self, name: &str) -> Result<&SensorRecord> {
        self.sensors
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::UnknownSensor(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.sensors.iter().map(|s| s.name.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = &SensorRecord> {
        self.sensors.iter()
    }

    pub fn len(&self) -> usize {
        self.sensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensors.is_empty()
    }
}

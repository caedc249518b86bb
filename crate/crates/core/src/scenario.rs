//! Misclassification probability against strong-motion duration, per
//! sensor and hazard level.
//!
//! A recording of duration `T` ends in a ZUPT window of `n = round(T/Δt)`
//! samples. Both floors carry the same sensor, so the relative displacement
//! error has STD `√2·σ_S[n]`, which feeds the classification matrix.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Deserialize;

use crate::classification::{conditional_matrix, DriftThresholds, RelativeDisplacementModel};
use crate::error::{Error, Result};
use crate::kinematics::{error_variance, CoefficientMode};
use crate::noise::{autocovariance, NoiseSpec};

const PLACEHOLDER_HAZARDS: &str = include_str!("../data/hazards_placeholder.toml");
const SYNTHETIC_DURATIONS: &str = include_str!("../data/durations_synthetic.csv");

/// Exceedance probability of the ground motion over 50 years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HazardName {
    /// 50 % in 50 years
    Frequent,
    /// 10 % in 50 years
    Design,
    /// 2 % in 50 years
    Rare,
}

impl HazardName {
    pub const ALL: [HazardName; 3] = [HazardName::Frequent, HazardName::Design, HazardName::Rare];

    pub fn as_str(self) -> &'static str {
        match self {
            HazardName::Frequent => "50in50",
            HazardName::Design => "10in50",
            HazardName::Rare => "2in50",
        }
    }
}

impl fmt::Display for HazardName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HazardName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        HazardName::ALL
            .into_iter()
            .find(|h| h.as_str() == s)
            .ok_or_else(|| Error::UnknownHazard(s.to_string()))
    }
}

/// Gaussian peak relative displacement for one hazard level, m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HazardLevel {
    pub name: HazardName,
    pub mu_d: f64,
    pub sigma_d: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HazardRecord {
    name: String,
    mu_d: f64,
    sigma_d: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HazardFile {
    hazard: Vec<HazardRecord>,
}

impl HazardLevel {
    pub fn new(name: HazardName, mu_d: f64, sigma_d: f64) -> Result<Self> {
        RelativeDisplacementModel::new(mu_d, sigma_d, 0.0)?;
        Ok(Self {
            name,
            mu_d,
            sigma_d,
        })
    }

    /// Hazard levels from a TOML file of `[[hazard]]` tables.
    pub fn parse_toml(text: &str) -> Result<Vec<Self>> {
        let file: HazardFile = toml::from_str(text)?;
        let mut out: Vec<HazardLevel> = Vec::with_capacity(file.hazard.len());
        for r in file.hazard {
            let h = HazardLevel::new(r.name.parse()?, r.mu_d, r.sigma_d)?;
            if out.iter().any(|o| o.name == h.name) {
                return Err(Error::InvalidParameter(format!(
                    "hazard `{}` listed twice",
                    h.name
                )));
            }
            out.push(h);
        }
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Vec<Self>> {
        Self::parse_toml(&std::fs::read_to_string(path)?)
    }

    /// The bundled placeholder levels. Not derived from any building; see
    /// the data file header.
    pub fn placeholders() -> Vec<Self> {
        Self::parse_toml(PLACEHOLDER_HAZARDS).expect("bundled hazard file is valid")
    }

    pub fn model(&self, sigma_x: f64) -> Result<RelativeDisplacementModel> {
        RelativeDisplacementModel::new(self.mu_d, self.sigma_d, sigma_x)
    }
}

/// Which noise model drives the displacement error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseMode {
    /// White component only.
    White,
    /// Every component of the spec.
    Exact,
}

impl fmt::Display for NoiseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseMode::White => "white",
            NoiseMode::Exact => "exact",
        })
    }
}

impl FromStr for NoiseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "white" => Ok(NoiseMode::White),
            "exact" => Ok(NoiseMode::Exact),
            _ => Err(Error::Parse(format!(
                "noise mode must be `white` or `exact`, got `{s}`"
            ))),
        }
    }
}

fn samples_for(t: f64, dt: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sample interval must be positive, got {dt}"
        )));
    }
    if !(t.is_finite() && t >= dt * (1.0 - 1e-9)) {
        return Err(Error::InvalidParameter(format!(
            "duration {t} s shorter than one sample"
        )));
    }
    Ok(((t / dt).round() as usize).max(1))
}

/// Relative displacement error STD after a ZUPT window of duration `t`,
/// `√2·σ_S[n]`, with `σ_S` from the simplified-coefficient variance.
pub fn sigma_x_for(sensor: &NoiseSpec, t: f64, dt: f64, mode: NoiseMode) -> Result<f64> {
    let n = samples_for(t, dt)?;
    let spec = sensor.with_sample_rate(1.0 / dt)?;
    let spec = match mode {
        NoiseMode::White => spec.white_only(),
        NoiseMode::Exact => spec,
    };
    let r = autocovariance(&spec, n)?;
    let var = error_variance(&r, n, dt, Some(CoefficientMode::Simplified))?[n - 1];
    Ok((2.0 * var.max(0.0)).sqrt())
}

/// Overall misclassification probability for one duration.
pub fn pe_at(
    sensor: &NoiseSpec,
    hazard: &HazardLevel,
    t: f64,
    dt: f64,
    mode: NoiseMode,
    th: &DriftThresholds,
) -> Result<f64> {
    let sigma_x = sigma_x_for(sensor, t, dt, mode)?;
    Ok(conditional_matrix(&hazard.model(sigma_x)?, th)?.pe)
}

/// `p_e(T)` over a duration grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PeCurve {
    pub sensor: String,
    pub hazard: HazardName,
    pub mode: NoiseMode,
    /// `(T seconds, pe)`
    pub points: Vec<(f64, f64)>,
}

impl PeCurve {
    pub fn new(
        sensor: &str,
        hazard: HazardName,
        mode: NoiseMode,
        points: Vec<(f64, f64)>,
    ) -> Result<Self> {
        validate_grid(&points.iter().map(|p| p.0).collect::<Vec<_>>())?;
        if let Some(&(t, pe)) = points.iter().find(|p| !(0.0..=1.0).contains(&p.1)) {
            return Err(Error::InvalidParameter(format!(
                "pe {pe} at T = {t} s outside [0, 1]"
            )));
        }
        Ok(Self {
            sensor: sensor.to_string(),
            hazard,
            mode,
            points,
        })
    }

    /// Linear interpolation, clamped to the end values outside the grid.
    pub fn interpolate(&self, t: f64) -> f64 {
        let pts = &self.points;
        if t <= pts[0].0 {
            return pts[0].1;
        }
        let last = pts[pts.len() - 1];
        if t >= last.0 {
            return last.1;
        }
        let k = pts.partition_point(|p| p.0 <= t);
        let (t0, p0) = pts[k - 1];
        let (t1, p1) = pts[k];
        p0 + (p1 - p0) * (t - t0) / (t1 - t0)
    }

    pub fn min(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.1)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.1)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("empty duration grid".into()));
    }
    if grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::InvalidGrid(
            "durations must be positive and finite".into(),
        ));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid(
            "durations must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// `T = 1, 2, …, 60` s.
pub fn default_grid() -> Vec<f64> {
    (1..=60).map(f64::from).collect()
}

/// Per-point results, in grid order; grid points are evaluated in parallel.
pub fn pe_points(
    sensor: &NoiseSpec,
    hazard: &HazardLevel,
    grid: &[f64],
    dt: f64,
    mode: NoiseMode,
    th: &DriftThresholds,
) -> Result<Vec<Result<f64>>> {
    validate_grid(grid)?;
    samples_for(grid[0], dt)?;
    Ok(grid
        .par_iter()
        .map(|&t| pe_at(sensor, hazard, t, dt, mode, th))
        .collect())
}

pub fn pe_curve(
    sensor_name: &str,
    sensor: &NoiseSpec,
    hazard: &HazardLevel,
    grid: &[f64],
    dt: f64,
    mode: NoiseMode,
    th: &DriftThresholds,
) -> Result<PeCurve> {
    let points = pe_points(sensor, hazard, grid, dt, mode, th)?
        .into_iter()
        .zip(grid)
        .map(|(pe, &t)| pe.map(|pe| (t, pe)))
        .collect::<Result<Vec<_>>>()?;
    PeCurve::new(sensor_name, hazard.name, mode, points)
}

/// Empirical CDF of strong-motion duration: `(T seconds, P(duration ≤ T))`.
#[derive(Debug, Clone, PartialEq)]
pub struct DurationDistribution {
    points: Vec<(f64, f64)>,
}

#[derive(Deserialize)]
struct DurationRow {
    #[serde(rename = "T_seconds")]
    t_seconds: f64,
    cum_prob: f64,
}

impl DurationDistribution {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        let bad = |msg: String| Err(Error::InvalidDistribution(msg));
        for &(t, p) in &points {
            if !(t.is_finite() && t > 0.0) {
                return bad(format!("duration {t} must be positive"));
            }
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("cumulative probability {p} outside [0, 1]"));
            }
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 || w[1].1 < w[0].1 {
                return bad(format!(
                    "points ({}, {}) and ({}, {}) are out of order",
                    w[0].0, w[0].1, w[1].0, w[1].1
                ));
            }
        }
        if !(points[points.len() - 1].1 > 0.0) {
            return bad("total probability is zero".into());
        }
        Ok(Self { points })
    }

    /// CSV with header `T_seconds,cum_prob`.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let rows = rdr
            .deserialize::<DurationRow>()
            .map(|r| r.map(|r| (r.t_seconds, r.cum_prob)))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(rows)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    /// Synthetic stand-in used by tests and examples; not a digitized
    /// record set.
    pub fn synthetic() -> Self {
        Self::from_reader(SYNTHETIC_DURATIONS.as_bytes()).expect("bundled duration file is valid")
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
}

/// `E[p_e(T)]` as a Stieltjes sum over the CDF steps, the first point taking
/// the mass below it. A CDF ending below 1 is renormalized.
pub fn expected_pe(curve: &PeCurve, durations: &DurationDistribution) -> Result<f64> {
    let pts = &durations.points;
    let total = pts[pts.len() - 1].1;
    let mut prev = 0.0;
    let mut sum = 0.0;
    for &(t, f) in pts {
        sum += curve.interpolate(t) * (f - prev);
        prev = f;
    }
    Ok((sum / total).clamp(curve.min(), curve.max()))
}

//! Run configuration: a strict TOML file merged with command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;
use storydrift_core::scenario::default_grid;
use storydrift_core::{DurationDistribution, HazardLevel, NoiseMode, SensorCatalog};

use crate::Usage;

pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_OUT: &str = "out";

/// File form. Relative paths resolve against the file's directory.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfigFile {
    catalog: Option<PathBuf>,
    hazards: Option<PathBuf>,
    durations: Option<PathBuf>,
    dt: Option<f64>,
    grid: Option<GridSpec>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    mode: Option<String>,
}

/// Either an explicit list of durations or an evenly spaced range.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum GridSpec {
    List(Vec<f64>),
    Range(GridRange),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridRange {
    start: f64,
    stop: f64,
    step: f64,
}

impl GridSpec {
    fn expand(&self) -> Result<Vec<f64>> {
        match self {
            GridSpec::List(v) => Ok(v.clone()),
            GridSpec::Range(r) => {
                if !(r.step > 0.0 && r.stop >= r.start) {
                    return Err(Usage(format!(
                        "grid range needs step > 0 and stop >= start, got {r:?}"
                    ))
                    .into());
                }
                let count = ((r.stop - r.start) / r.step + 1e-9).floor() as usize + 1;
                Ok((0..count).map(|k| r.start + k as f64 * r.step).collect())
            }
        }
    }
}

/// Flags that override the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub dt: Option<f64>,
    pub mode: Option<NoiseMode>,
}

/// Fully resolved settings. Every referenced file has been read.
pub struct RunConfig {
    pub catalog: SensorCatalog,
    pub hazards: Vec<HazardLevel>,
    pub durations: DurationDistribution,
    pub dt: f64,
    pub grid: Vec<f64>,
    pub seed: u64,
    pub out: PathBuf,
    pub mode: NoiseMode,
}

impl RunConfig {
    pub fn resolve(flags: &Overrides) -> Result<Self> {
        let (file, base) = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                let file: RunConfigFile = toml::from_str(&text)
                    .map_err(|e| Usage(format!("config {}: {e}", path.display())))?;
                let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
                (file, base)
            }
            None => (RunConfigFile::default(), PathBuf::new()),
        };
        let at = |p: &Path| base.join(p);

        let catalog = match &file.catalog {
            Some(p) => SensorCatalog::from_path(&at(p))
                .with_context(|| format!("loading catalog {}", at(p).display()))?,
            None => SensorCatalog::builtin(),
        };
        let hazards = match &file.hazards {
            Some(p) => HazardLevel::load(&at(p))
                .with_context(|| format!("loading hazards {}", at(p).display()))?,
            None => HazardLevel::placeholders(),
        };
        let durations = match &file.durations {
            Some(p) => DurationDistribution::from_path(&at(p))
                .with_context(|| format!("loading durations {}", at(p).display()))?,
            None => DurationDistribution::synthetic(),
        };
        let dt = flags.dt.or(file.dt).unwrap_or(DEFAULT_DT);
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Usage(format!("dt must be positive, got {dt}")).into());
        }
        let grid = match &file.grid {
            Some(g) => g.expand()?,
            None => default_grid(),
        };
        let mode = match (flags.mode, &file.mode) {
            (Some(m), _) => m,
            (None, Some(s)) => s.parse().map_err(|e| Usage(format!("config mode: {e}")))?,
            (None, None) => NoiseMode::Exact,
        };
        let out = match (&flags.out, &file.out) {
            (Some(o), _) => o.clone(),
            (None, Some(o)) => at(o),
            (None, None) => PathBuf::from(DEFAULT_OUT),
        };
        Ok(Self {
            catalog,
            hazards,
            durations,
            dt,
            grid,
            seed: flags.seed.or(file.seed).unwrap_or(0),
            out,
            mode,
        })
    }

    pub fn hazard(&self, name: &str) -> Result<&HazardLevel> {
        let wanted = name.parse::<storydrift_core::HazardName>()?;
        self.hazards
            .iter()
            .find(|h| h.name == wanted)
            .ok_or_else(|| storydrift_core::Error::UnknownHazard(name.to_string()).into())
    }
}

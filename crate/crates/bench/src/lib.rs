//! Benchmark fixtures shared by the criterion targets.

use storydrift_core::{NoiseSpec, SensorCatalog};

/// Sample rate used throughout the benchmarks, Hz.
pub const SAMPLE_RATE: f64 = 100.0;

/// Catalog sensor discretized at [`SAMPLE_RATE`].
pub fn sensor(name: &str) -> NoiseSpec {
    SensorCatalog::builtin()
        .get(name)
        .and_then(|r| r.noise_spec(SAMPLE_RATE))
        .expect("builtin sensor")
}

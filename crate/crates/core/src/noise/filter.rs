use std::f64::consts::PI;

use super::spec::NoiseSpec;
use crate::error::{Error, Result};

/// Which noise source a shaping filter realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceKind {
    White,
    BiasInstability,
    RandomWalk,
}

/// FIR filter turning unit-variance white Gaussian noise into one noise
/// source. The input is multiplied by `scale` (m/s²) before filtering.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapingFilter {
    pub coefficients: Vec<f64>,
    pub source_kind: SourceKind,
    pub scale: f64,
}

impl ShapingFilter {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }
}

/// Taps of the half-order integrator `(1 - z⁻¹)^(-1/2)`:
/// `h_0 = 1`, `h_k = h_{k-1}·(k - 1/2)/k`. Its power response falls as 1/f.
pub fn fractional_integrator_taps(n: usize) -> Vec<f64> {
    let mut taps = Vec::with_capacity(n);
    let mut h = 1.0;
    for k in 0..n {
        if k > 0 {
            h *= (k as f64 - 0.5) / k as f64;
        }
        taps.push(h);
    }
    taps
}

/// One filter per noise source present in `spec`, truncated at `n` taps.
///
/// Scales follow from matching the discrete one-sided PSD to the continuous
/// model at low frequency:
/// - white: `σ = arw·√(fs/2)`
/// - bias instability: `q = b·√π` where the density is `b/√f`
/// - random walk: `q = rrw/√(2·fs)`
pub fn build_shaping_filters(spec: &NoiseSpec, n: usize) -> Result<Vec<ShapingFilter>> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "sample count must be at least 1".into(),
        ));
    }
    let fs = spec.sample_rate();
    let mut filters = Vec::with_capacity(3);
    if let Some(arw) = spec.arw_density() {
        filters.push(ShapingFilter {
            coefficients: vec![1.0],
            source_kind: SourceKind::White,
            scale: arw * (fs / 2.0).sqrt(),
        });
    }
    if let Some(b) = spec.flicker_coefficient() {
        filters.push(ShapingFilter {
            coefficients: fractional_integrator_taps(n),
            source_kind: SourceKind::BiasInstability,
            scale: b * PI.sqrt(),
        });
    }
    if let Some(rrw) = spec.rrw_density() {
        filters.push(ShapingFilter {
            coefficients: vec![1.0; n],
            source_kind: SourceKind::RandomWalk,
            scale: rrw / (2.0 * fs).sqrt(),
        });
    }
    if filters.is_empty() {
        return Err(Error::NoNoiseSource);
    }
    Ok(filters)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> crate::noise::spec::NoiseSpecBuilder {
        NoiseSpec::builder(100.0)
    }

    #[test]
    fn white_only_is_identity_tap() {
        let f = build_shaping_filters(&spec().arw(1e-3).build().unwrap(), 4).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].coefficients, vec![1.0]);
        assert_eq!(f[0].source_kind, SourceKind::White);
    }

    #[test]
    fn random_walk_is_running_sum() {
        let f = build_shaping_filters(&spec().rrw(1e-3).build().unwrap(), 3).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].coefficients, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn bias_instability_taps_follow_recursion() {
        let f = build_shaping_filters(&spec().bias_instability(1e-4).build().unwrap(), 4).unwrap();
        assert_eq!(f[0].coefficients, vec![1.0, 0.5, 0.375, 0.3125]);
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(build_shaping_filters(&spec().arw(1.0).build().unwrap(), 0).is_err());
    }

    #[test]
    fn all_sources_in_fixed_order() {
        let s = spec()
            .arw(1.0)
            .bias_instability(1.0)
            .rrw(1.0)
            .build()
            .unwrap();
        let kinds: Vec<_> = build_shaping_filters(&s, 8)
            .unwrap()
            .into_iter()
            .map(|f| f.source_kind)
            .collect();
        assert_eq!(
            kinds,
            [
                SourceKind::White,
                SourceKind::BiasInstability,
                SourceKind::RandomWalk
            ]
        );
    }
}

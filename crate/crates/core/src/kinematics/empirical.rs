use rayon::prelude::*;

use super::ZuptCoefficients;
use crate::error::{Error, Result};
use crate::noise::{NoiseSpec, NoiseSynthesizer};
use crate::rng::rng_for;

/// Trials per parallel block. Blocks are summed in index order so the
/// result does not depend on the thread count.
const BLOCK: usize = 64;

/// Per-sample mean squared displacement over pure-noise trials.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMse {
    /// `E[s[i]²]`, m²
    pub raw: Vec<f64>,
    /// `E[s_ZUPT[i]²]`, m²
    pub zupt: Vec<f64>,
    pub trials: usize,
}

/// Monte Carlo estimate of the displacement MSE with and without ZUPT.
///
/// Each trial integrates an `n`-sample noise path of `spec` (true
/// acceleration zero) and corrects it with `coeffs`, the EOS being the
/// last sample. Trial `k` uses the generator `rng_for(seed, k)`.
pub fn empirical_mse(
    spec: &NoiseSpec,
    n: usize,
    trials: usize,
    seed: u64,
    coeffs: &ZuptCoefficients,
) -> Result<EmpiricalMse> {
    if n == 0 || trials == 0 {
        return Err(Error::InvalidParameter(
            "need at least one sample and one trial".into(),
        ));
    }
    if coeffs.len() != n {
        return Err(Error::LengthMismatch(format!(
            "{} coefficients for {n} samples",
            coeffs.len()
        )));
    }
    let synth = NoiseSynthesizer::new(spec, n)?;
    let dt = spec.dt();
    let blocks: Vec<(Vec<f64>, Vec<f64>)> = (0..trials.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut raw = vec![0.0; n];
            let mut zupt = vec![0.0; n];
            let mut s = vec![0.0; n];
            for k in b * BLOCK..((b + 1) * BLOCK).min(trials) {
                let a = synth.realize_with(&mut rng_for(seed, k as u64));
                let (mut vel, mut pos) = (0.0, 0.0);
                for (si, ai) in s.iter_mut().zip(&a) {
                    vel += ai * dt;
                    pos += vel * dt;
                    *si = pos;
                }
                let kick = vel * dt;
                for i in 0..n {
                    raw[i] += s[i] * s[i];
                    let z = s[i] + coeffs.c[i] * kick;
                    zupt[i] += z * z;
                }
            }
            (raw, zupt)
        })
        .collect();
    let mut raw = vec![0.0; n];
    let mut zupt = vec![0.0; n];
    for (r, z) in &blocks {
        for i in 0..n {
            raw[i] += r[i];
            zupt[i] += z[i];
        }
    }
    let scale = 1.0 / trials as f64;
    raw.iter_mut().for_each(|x| *x *= scale);
    zupt.iter_mut().for_each(|x| *x *= scale);
    Ok(EmpiricalMse { raw, zupt, trials })
}

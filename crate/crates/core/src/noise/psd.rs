use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::spec::{flicker_per_bias_instability, NoiseSpec, PsdPoint};
use crate::error::{Error, Result};

/// Amplitude spectral density of the summed model at each frequency,
/// m/s²/√Hz. Components add in power:
/// `arw² + b²/f + (rrw/2πf)²`.
pub fn psd_of_model(spec: &NoiseSpec, freqs: &[f64]) -> Result<Vec<f64>> {
    let nyquist = spec.sample_rate() / 2.0;
    let arw = spec.arw_density().unwrap_or(0.0);
    let b = spec.flicker_coefficient().unwrap_or(0.0);
    let rrw = spec.rrw_density().unwrap_or(0.0);
    freqs
        .iter()
        .map(|&f| {
            if !(f > 0.0 && f <= nyquist) {
                return Err(Error::InvalidParameter(format!(
                    "frequency {f} Hz outside (0, {nyquist}]"
                )));
            }
            let w = 2.0 * PI * f;
            Ok((arw * arw + b * b / f + rrw * rrw / (w * w)).sqrt())
        })
        .collect()
}

/// Result of [`fit_noise_spec`].
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseFit {
    pub spec: NoiseSpec,
    /// RMS of `ln(model) - ln(measured)` amplitude density over the points.
    pub residual: f64,
}

// power-law exponents of the white, 1/f and random-walk power spectra
const EXPONENTS: [i32; 3] = [0, 1, 2];
const SUBSETS: [&[usize]; 7] = [&[0], &[1], &[2], &[0, 1], &[0, 2], &[1, 2], &[0, 1, 2]];

fn basis(component: usize, f: f64) -> f64 {
    f.powi(-EXPONENTS[component])
}

/// Least-squares fit, in log-log space, of white + 1/f + random-walk power
/// spectra to measured amplitude densities.
///
/// Every subset of components with no more members than points is fitted;
/// subsets whose best fit needs a non-positive power are discarded. The
/// subset with the smallest log residual wins, with ties going to fewer
/// components and then to lower-order components.
pub fn fit_noise_spec(points: &[PsdPoint], sample_rate: f64) -> Result<NoiseFit> {
    if points.len() < 2 {
        return Err(Error::TooFewPsdPoints {
            needed: 2,
            got: points.len(),
        });
    }
    for p in points {
        if !(p.freq_hz > 0.0 && p.density > 0.0 && p.freq_hz.is_finite() && p.density.is_finite()) {
            return Err(Error::InvalidNoiseSpec(format!(
                "PSD point ({} Hz, {}) must be positive",
                p.freq_hz, p.density
            )));
        }
    }

    let mut best: Option<([f64; 3], f64)> = None;
    for subset in SUBSETS.iter().filter(|s| s.len() <= points.len()) {
        let Some(coeffs) = linear_fit(points, subset) else {
            continue;
        };
        let coeffs = refine_log_fit(points, subset, coeffs);
        let mut powers = [0.0; 3];
        for (&c, &j) in coeffs.iter().zip(subset.iter()) {
            powers[j] = c;
        }
        let residual = log_residual(points, &powers);
        let better = match best {
            None => true,
            Some((_, r)) => residual < r * (1.0 - 1e-6) - 1e-12,
        };
        if better {
            best = Some((powers, residual));
        }
    }
    let (powers, residual) = best.ok_or(Error::FitFailed)?;

    let nyquist = sample_rate / 2.0;
    let kept: Vec<PsdPoint> = points
        .iter()
        .copied()
        .filter(|p| p.freq_hz <= nyquist)
        .collect();
    let mut builder = NoiseSpec::builder(sample_rate).psd_points(kept);
    if powers[0] > 0.0 {
        builder = builder.arw(powers[0].sqrt());
    }
    if powers[1] > 0.0 {
        builder = builder.bias_instability(powers[1].sqrt() / flicker_per_bias_instability());
    }
    if powers[2] > 0.0 {
        builder = builder.rrw(2.0 * PI * powers[2].sqrt());
    }
    Ok(NoiseFit {
        spec: builder.build()?,
        residual,
    })
}

fn model_power(powers: &[f64; 3], f: f64) -> f64 {
    (0..3).map(|j| powers[j] * basis(j, f)).sum()
}

fn log_residual(points: &[PsdPoint], powers: &[f64; 3]) -> f64 {
    let ss: f64 = points
        .iter()
        .map(|p| (0.5 * model_power(powers, p.freq_hz).ln() - p.density.ln()).powi(2))
        .sum();
    (ss / points.len() as f64).sqrt()
}

/// Relative-error linear least squares, `Σ (model/measured - 1)²`, used as
/// the starting point for the log fit. `None` unless every power is positive.
fn linear_fit(points: &[PsdPoint], subset: &[usize]) -> Option<Vec<f64>> {
    let m = points.len();
    let k = subset.len();
    let mut a = DMatrix::<f64>::zeros(m, k);
    for (i, p) in points.iter().enumerate() {
        let s = p.density * p.density;
        for (c, &j) in subset.iter().enumerate() {
            a[(i, c)] = basis(j, p.freq_hz) / s;
        }
    }
    let norms: Vec<f64> = (0..k).map(|c| a.column(c).norm()).collect();
    for (c, &nrm) in norms.iter().enumerate() {
        a.column_mut(c).scale_mut(1.0 / nrm);
    }
    let b = DVector::<f64>::from_element(m, 1.0);
    let x = a.svd(true, true).solve(&b, 1e-14).ok()?;
    let coeffs: Vec<f64> = x.iter().zip(&norms).map(|(v, n)| v / n).collect();
    coeffs
        .iter()
        .all(|&c| c > 0.0 && c.is_finite())
        .then_some(coeffs)
}

/// Levenberg-Marquardt on log-density residuals with log-parameterized
/// powers, so components stay positive.
fn refine_log_fit(points: &[PsdPoint], subset: &[usize], start: Vec<f64>) -> Vec<f64> {
    let m = points.len();
    let k = subset.len();
    let mut theta: Vec<f64> = start.iter().map(|c| c.ln()).collect();
    let eval = |theta: &[f64]| -> (DVector<f64>, DMatrix<f64>) {
        let mut r = DVector::zeros(m);
        let mut jac = DMatrix::zeros(m, k);
        for (i, p) in points.iter().enumerate() {
            let terms: Vec<f64> = subset
                .iter()
                .zip(theta)
                .map(|(&j, t)| t.exp() * basis(j, p.freq_hz))
                .collect();
            let total: f64 = terms.iter().sum();
            r[i] = 0.5 * total.ln() - p.density.ln();
            for c in 0..k {
                jac[(i, c)] = 0.5 * terms[c] / total;
            }
        }
        (r, jac)
    };
    let (mut r, mut jac) = eval(&theta);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    for _ in 0..200 {
        if cost < 1e-28 {
            break;
        }
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &r;
        let mut lhs = jtj.clone();
        for c in 0..k {
            lhs[(c, c)] += lambda * jtj[(c, c)].max(1e-12);
        }
        let Some(step) = lhs.lu().solve(&(-g)) else {
            break;
        };
        let trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t + s).collect();
        let (tr, tj) = eval(&trial);
        let trial_cost = tr.norm_squared();
        if trial_cost.is_finite() && trial_cost < cost {
            let gain = cost - trial_cost;
            theta = trial;
            r = tr;
            jac = tj;
            cost = trial_cost;
            lambda = (lambda * 0.3).max(1e-12);
            if gain < 1e-15 * cost.max(1e-300) {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    theta.iter().map(|t| t.exp()).collect()
}

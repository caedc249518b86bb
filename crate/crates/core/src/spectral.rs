//! Welch power spectral density estimate.

use rustfft::{num_complex::Complex64, FftPlanner};

use crate::error::{Error, Result};

/// One-sided PSD estimate: `freqs[k]` in Hz, `power[k]` in units²/Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct Periodogram {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
}

impl Periodogram {
    /// Amplitude density, units/√Hz.
    pub fn amplitude(&self) -> Vec<f64> {
        self.power.iter().map(|p| p.sqrt()).collect()
    }

    /// Lowest nonzero frequency resolved, Hz.
    pub fn resolution(&self) -> f64 {
        self.freqs.get(1).copied().unwrap_or(0.0)
    }
}

/// Hann-windowed, mean-detrended segments of `nperseg` samples with 50 %
/// overlap, averaged, with density scaling.
pub fn welch(x: &[f64], sample_rate: f64, nperseg: usize) -> Result<Periodogram> {
    if !(sample_rate > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sample rate must be positive, got {sample_rate}"
        )));
    }
    if nperseg < 2 || nperseg > x.len() {
        return Err(Error::InvalidParameter(format!(
            "segment length {nperseg} must be in 2..={}",
            x.len()
        )));
    }
    let window: Vec<f64> = (0..nperseg)
        .map(|k| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / nperseg as f64).cos())
        .collect();
    let win_power: f64 = window.iter().map(|w| w * w).sum();
    let step = nperseg / 2;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(nperseg);
    let bins = nperseg / 2 + 1;
    let mut acc = vec![0.0; bins];
    let mut segments = 0usize;
    let mut buf = vec![Complex64::new(0.0, 0.0); nperseg];
    let mut start = 0;
    while start + nperseg <= x.len() {
        let seg = &x[start..start + nperseg];
        let mean = seg.iter().sum::<f64>() / nperseg as f64;
        for ((b, &s), &w) in buf.iter_mut().zip(seg).zip(&window) {
            *b = Complex64::new((s - mean) * w, 0.0);
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        segments += 1;
        start += step;
    }
    let scale = 1.0 / (sample_rate * win_power * segments as f64);
    let power = acc
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let one_sided = if k == 0 || (nperseg.is_multiple_of(2) && k == bins - 1) {
                1.0
            } else {
                2.0
            };
            a * scale * one_sided
        })
        .collect();
    let freqs = (0..bins)
        .map(|k| k as f64 * sample_rate / nperseg as f64)
        .collect();
    Ok(Periodogram { freqs, power })
}

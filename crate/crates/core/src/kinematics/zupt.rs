use super::{DisplacementEstimate, EosDetection};
use crate::error::{Error, Result};
use crate::noise::{AutocovarianceSequence, ToeplitzQuadratics};

/// How the per-sample ZUPT coefficients are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoefficientMode {
    /// Minimizes the displacement MSE at each sample: `-PᵀR_inQ / QᵀR_nnQ`.
    Exact,
    /// Stationary large-window approximation `-i²/(2n)`.
    Simplified,
}

/// `c_1 … c_n` for a correction window of `n` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ZuptCoefficients {
    pub c: Vec<f64>,
    pub mode: CoefficientMode,
}

impl ZuptCoefficients {
    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    /// Coefficient at 1-based sample `i`.
    pub fn at(&self, i: usize) -> f64 {
        self.c[i - 1]
    }
}

fn simplified(i: usize, n: usize) -> f64 {
    let i = i as f64;
    -i * i / (2.0 * n as f64)
}

pub fn zupt_coefficients(
    r: &AutocovarianceSequence,
    n: usize,
    mode: CoefficientMode,
) -> Result<ZuptCoefficients> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "correction window must have at least one sample".into(),
        ));
    }
    let c = match mode {
        CoefficientMode::Simplified => (1..=n).map(|i| simplified(i, n)).collect(),
        CoefficientMode::Exact => {
            let forms = ToeplitzQuadratics::new(r, n)?;
            let qrq = forms.qrq();
            if !(qrq > 0.0) {
                return Err(Error::DegenerateCovariance(qrq));
            }
            forms.iter().map(|(_, prq)| -prq / qrq).collect()
        }
    };
    Ok(ZuptCoefficients { c, mode })
}

/// `s_ZUPT[i] = s[i] + c_i·v[n]·Δt` for `i ≤ n`, with `n` the EOS index.
/// The estimate is truncated to the correction window.
pub fn apply_zupt(
    est: &DisplacementEstimate,
    eos: &EosDetection,
    coeffs: &ZuptCoefficients,
) -> Result<DisplacementEstimate> {
    let n = eos.eos_index;
    if n == 0 || n > est.len() {
        return Err(Error::IndexOutOfRange {
            index: n,
            n: est.len(),
        });
    }
    if coeffs.len() != n {
        return Err(Error::LengthMismatch(format!(
            "{} coefficients for a correction window of {n} samples",
            coeffs.len()
        )));
    }
    if est.velocity.len() != est.len() {
        return Err(Error::LengthMismatch(
            "velocity and displacement differ in length".into(),
        ));
    }
    let kick = est.velocity[n - 1] * est.dt;
    let corrected = est.displacement[..n]
        .iter()
        .zip(&coeffs.c)
        .map(|(s, c)| s + c * kick)
        .collect();
    let cut = |v: &Option<Vec<f64>>| v.as_ref().map(|x| x[..n.min(x.len())].to_vec());
    Ok(DisplacementEstimate {
        dt: est.dt,
        velocity: est.velocity[..n].to_vec(),
        displacement: est.displacement[..n].to_vec(),
        displacement_zupt: Some(corrected),
        sigma_s: cut(&est.sigma_s),
        sigma_s_zupt: cut(&est.sigma_s_zupt),
    })
}

/// Analytic displacement MSE `σ²_S[i]` for `i = 1..=n`.
///
/// - `None`: `PᵀR_iiP·Δt⁴`, no correction.
/// - `Some(Simplified)`: `(PᵀR_iiP + (i⁴/4n²)QᵀR_nnQ − (i²/n)PᵀR_inQ)·Δt⁴`.
/// - `Some(Exact)`: `(PᵀR_iiP − (PᵀR_inQ)²/QᵀR_nnQ)·Δt⁴`, the minimum over `c_i`.
pub fn error_variance(
    r: &AutocovarianceSequence,
    n: usize,
    dt: f64,
    correction: Option<CoefficientMode>,
) -> Result<Vec<f64>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sample interval must be positive, got {dt}"
        )));
    }
    let forms = ToeplitzQuadratics::new(r, n)?;
    let dt4 = dt.powi(4);
    let qrq = forms.qrq();
    let nf = n as f64;
    let out = match correction {
        None => forms.iter().map(|(prp, _)| prp * dt4).collect(),
        Some(CoefficientMode::Simplified) => forms
            .iter()
            .enumerate()
            .map(|(k, (prp, prq))| {
                let i2 = ((k + 1) * (k + 1)) as f64;
                (prp + i2 * i2 / (4.0 * nf * nf) * qrq - i2 / nf * prq) * dt4
            })
            .collect(),
        Some(CoefficientMode::Exact) => {
            if !(qrq > 0.0) {
                return Err(Error::DegenerateCovariance(qrq));
            }
            forms
                .iter()
                .map(|(prp, prq)| ((prp - prq * prq / qrq) * dt4).max(0.0))
                .collect()
        }
    };
    Ok(out)
}

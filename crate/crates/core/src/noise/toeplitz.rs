//! Quadratic forms of the Toeplitz noise covariance with the integration
//! weight vectors, evaluated from running sums of the autocovariance.
//!
//! With `P = [i, i-1, …, 1]ᵀ` and `Q` the all-ones vector of length `n`:
//!
//! - `PᵀR_iiP = Σ_{p,q≤i} p·q·r_|p-q|`
//! - `QᵀR_nnQ = Σ_{a,b≤n} r_|a-b|`
//! - `PᵀR_inQ = Σ_{a≤i} (i-a+1)·S_a` with row sums `S_a = Σ_{b≤n} r_|a-b|`
//!
//! Each is updated from `i-1` to `i` in O(1), so the whole `i = 1..n` sweep
//! costs O(n) after an O(n) setup. No matrix is ever formed.

use super::autocov::AutocovarianceSequence;
use crate::error::{Error, Result};

/// The three quadratic forms at one sample index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadratics {
    /// `PᵀR_iiP`
    pub prp: f64,
    /// `QᵀR_nnQ`
    pub qrq: f64,
    /// `PᵀR_inQ`
    pub prq: f64,
}

/// Quadratic forms for every `i` in `1..=n`.
#[derive(Debug, Clone)]
pub struct ToeplitzQuadratics {
    prp: Vec<f64>,
    prq: Vec<f64>,
    qrq: f64,
}

impl ToeplitzQuadratics {
    pub fn new(r: &AutocovarianceSequence, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "window must have at least one sample".into(),
            ));
        }
        if r.len() < n {
            return Err(Error::NotEnoughLags {
                got: r.len(),
                needed: n,
            });
        }
        let r = &r.lags()[..n];
        let r0 = r[0];

        // cum[m] = r_0 + … + r_m
        let mut cum = Vec::with_capacity(n);
        let mut acc = 0.0;
        for &x in r {
            acc += x;
            cum.push(acc);
        }

        let mut prq = Vec::with_capacity(n);
        let mut row_prefix = 0.0;
        let mut prq_i = 0.0;
        for a in 1..=n {
            row_prefix += cum[a - 1] + cum[n - a] - r0;
            prq_i += row_prefix;
            prq.push(prq_i);
        }
        let qrq = row_prefix;

        // F(i) = F(i-1) + 2i·G(i) + i²r_0, G(i) = Σ_{k=1}^{i-1} (i-k) r_k
        let mut prp = Vec::with_capacity(n);
        let mut f = 0.0;
        let mut g = 0.0;
        for i in 1..=n {
            if i >= 2 {
                g += cum[i - 1] - r0;
            }
            let fi = i as f64;
            f += 2.0 * fi * g + fi * fi * r0;
            prp.push(f);
        }
        Ok(Self { prp, prq, qrq })
    }

    pub fn len(&self) -> usize {
        self.prp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prp.is_empty()
    }

    /// Forms at 1-based index `i`.
    pub fn at(&self, i: usize) -> Result<Quadratics> {
        let n = self.len();
        if i == 0 || i > n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        Ok(Quadratics {
            prp: self.prp[i - 1],
            qrq: self.qrq,
            prq: self.prq[i - 1],
        })
    }

    pub fn qrq(&self) -> f64 {
        self.qrq
    }

    /// `(PᵀR_iiP, PᵀR_inQ)` for `i = 1..=n`.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.prp.iter().copied().zip(self.prq.iter().copied())
    }
}

/// `(PᵀR_iiP, QᵀR_nnQ, PᵀR_inQ)` at sample `i` of an `n`-sample window.
pub fn toeplitz_quadratics(r: &AutocovarianceSequence, i: usize, n: usize) -> Result<Quadratics> {
    if i == 0 || i > n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    ToeplitzQuadratics::new(r, n)?.at(i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_unit_variance_closed_forms() {
        let r = AutocovarianceSequence::white(1.0, 10).unwrap();
        let q = toeplitz_quadratics(&r, 10, 10).unwrap();
        assert_eq!(q.prp, 385.0);
        assert_eq!(q.qrq, 10.0);
        assert_eq!(q.prq, 55.0);
    }

    #[test]
    fn index_bounds() {
        let r = AutocovarianceSequence::white(1.0, 5).unwrap();
        assert!(matches!(
            toeplitz_quadratics(&r, 0, 5),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            toeplitz_quadratics(&r, 6, 5),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            toeplitz_quadratics(&r, 3, 6),
            Err(Error::NotEnoughLags { .. })
        ));
    }

    #[test]
    fn constant_covariance() {
        // r_k ≡ 1: every form is (sum of weights)².
        let r = AutocovarianceSequence::new(vec![1.0; 6]).unwrap();
        let q = toeplitz_quadratics(&r, 4, 6).unwrap();
        assert_eq!(q.prp, 100.0); // (4+3+2+1)²
        assert_eq!(q.qrq, 36.0);
        assert_eq!(q.prq, 60.0);
    }

    fn dense(r: &[f64], i: usize, n: usize) -> (Quadratics, f64) {
        let (mut prp, mut qrq, mut prq, mut scale) = (0.0, 0.0, 0.0, 0.0);
        let lag = |a: usize, b: usize| r[a.abs_diff(b)];
        for a in 1..=n {
            for b in 1..=n {
                let x = lag(a, b);
                qrq += x;
                scale += x.abs() * (n * n) as f64;
                if a <= i {
                    let pa = (i - a + 1) as f64;
                    prq += pa * x;
                    if b <= i {
                        prp += pa * (i - b + 1) as f64 * x;
                    }
                }
            }
        }
        (Quadratics { prp, qrq, prq }, scale)
    }

    proptest::proptest! {
        #[test]
        fn running_sums_match_dense_forms(
            n in 1usize..200,
            pos in 0.0f64..1.0,
            a in 0.0f64..2.0,
            rho in -0.5f64..0.99,
            b in 1e-3f64..1.0,
        ) {
            // rho >= -0.5 keeps every truncated long-run sum non-negative
            let lags: Vec<f64> = (0..n)
                .map(|k| a * rho.powi(k as i32) + if k == 0 { b } else { 0.0 })
                .collect();
            let i = 1 + (pos * (n - 1) as f64) as usize;
            let r = AutocovarianceSequence::new(lags.clone()).unwrap();
            let fast = toeplitz_quadratics(&r, i, n).unwrap();
            let (want, scale) = dense(&lags, i, n);
            let tol = 1e-10 * scale;
            proptest::prop_assert!((fast.prp - want.prp).abs() <= tol);
            proptest::prop_assert!((fast.qrq - want.qrq).abs() <= tol);
            proptest::prop_assert!((fast.prq - want.prq).abs() <= tol);
        }
    }
}

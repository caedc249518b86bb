//! Damage-state labels from interstory drift, and the probability that a
//! noisy displacement measurement assigns the wrong label.
//!
//! The true peak relative displacement `D ~ N(μ_D, σ_D²)` and the
//! measurement error `X ~ N(0, σ_X²)` are independent. The true label comes
//! from `|D|`, the measured label from `|D + X|`. Conditioning on `D`, the
//! measured-label probability is a difference of normal CDFs, so each joint
//! probability is a one-dimensional integral over the true-label region.

use std::fmt;
use std::str::FromStr;

use libm::erfc;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, Tolerance};

/// IDR thresholds and story height. Displacement thresholds are derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftThresholds {
    idr0: f64,
    idr1: f64,
    floor_height: f64,
}

impl Default for DriftThresholds {
    fn default() -> Self {
        Self {
            idr0: 0.007,
            idr1: 0.05,
            floor_height: 4.0,
        }
    }
}

impl DriftThresholds {
    pub fn new(idr0: f64, idr1: f64, floor_height: f64) -> Result<Self> {
        if !(floor_height.is_finite() && floor_height > 0.0) {
            return Err(Error::NonPositiveHeight(floor_height));
        }
        if !(idr0.is_finite() && idr1.is_finite() && 0.0 < idr0 && idr0 < idr1) {
            return Err(Error::InvalidThresholds(format!(
                "need 0 < idr0 < idr1, got {idr0} and {idr1}"
            )));
        }
        Ok(Self {
            idr0,
            idr1,
            floor_height,
        })
    }

    /// Thresholds given directly as displacements, m.
    pub fn from_displacements(d0: f64, d1: f64, floor_height: f64) -> Result<Self> {
        Self::new(d0 / floor_height, d1 / floor_height, floor_height)
    }

    pub fn idr0(&self) -> f64 {
        self.idr0
    }

    pub fn idr1(&self) -> f64 {
        self.idr1
    }

    pub fn floor_height(&self) -> f64 {
        self.floor_height
    }

    /// IO/LS boundary, m.
    pub fn d0(&self) -> f64 {
        self.idr0 * self.floor_height
    }

    /// LS/CP boundary, m.
    pub fn d1(&self) -> f64 {
        self.idr1 * self.floor_height
    }
}

/// Building state after an earthquake.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassLabel {
    /// Immediate occupancy
    IO,
    /// Life safety
    LS,
    /// Collapse prevention
    CP,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 3] = [ClassLabel::IO, ClassLabel::LS, ClassLabel::CP];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassLabel::IO => "IO",
            ClassLabel::LS => "LS",
            ClassLabel::CP => "CP",
        })
    }
}

impl FromStr for ClassLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "IO" => Ok(ClassLabel::IO),
            "LS" => Ok(ClassLabel::LS),
            "CP" => Ok(ClassLabel::CP),
            _ => Err(Error::Parse(format!("unknown class label `{s}`"))),
        }
    }
}

/// Interstory drift ratio `(upper - lower) / height`, signed.
pub fn idr(disp_lower: f64, disp_upper: f64, floor_height: f64) -> Result<f64> {
    if !(floor_height > 0.0) {
        return Err(Error::NonPositiveHeight(floor_height));
    }
    Ok((disp_upper - disp_lower) / floor_height)
}

/// Label for a peak absolute relative displacement. Values on a threshold
/// go to the more severe class.
pub fn classify(peak_abs_relative_disp: f64, th: &DriftThresholds) -> Result<ClassLabel> {
    let d = peak_abs_relative_disp;
    if d.is_nan() || d < 0.0 {
        return Err(Error::NegativeDisplacement(d));
    }
    Ok(if d < th.d0() {
        ClassLabel::IO
    } else if d < th.d1() {
        ClassLabel::LS
    } else {
        ClassLabel::CP
    })
}

/// STD of the difference of two independent floor displacement errors.
pub fn relative_error_std(sigma_s1: f64, sigma_s2: f64) -> f64 {
    sigma_s1.hypot(sigma_s2)
}

/// Gaussian peak relative displacement plus Gaussian measurement error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeDisplacementModel {
    pub mu_d: f64,
    pub sigma_d: f64,
    pub sigma_x: f64,
}

impl RelativeDisplacementModel {
    pub fn new(mu_d: f64, sigma_d: f64, sigma_x: f64) -> Result<Self> {
        let m = Self {
            mu_d,
            sigma_d,
            sigma_x,
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        if !self.mu_d.is_finite() {
            return Err(Error::InvalidModel(format!(
                "mu_d must be finite, got {}",
                self.mu_d
            )));
        }
        if !(self.sigma_d.is_finite() && self.sigma_d > 0.0) {
            return Err(Error::InvalidModel(format!(
                "sigma_d must be positive, got {}",
                self.sigma_d
            )));
        }
        if !(self.sigma_x.is_finite() && self.sigma_x >= 0.0) {
            return Err(Error::InvalidModel(format!(
                "sigma_x must be non-negative, got {}",
                self.sigma_x
            )));
        }
        Ok(())
    }
}

/// `p[true][measured]`, the true-label priors and the overall error
/// probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassificationMatrix {
    pub p: [[f64; 3]; 3],
    pub priors: [f64; 3],
    pub pe: f64,
}

impl ClassificationMatrix {
    /// `P(measured | true)`.
    pub fn get(&self, truth: ClassLabel, measured: ClassLabel) -> f64 {
        self.p[truth.index()][measured.index()]
    }

    /// Same conditional matrix with externally supplied priors.
    pub fn with_priors(mut self, priors: [f64; 3]) -> Result<Self> {
        let total: f64 = priors.iter().sum();
        if priors.iter().any(|&q| !(q >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "priors must be non-negative and sum to 1, got {priors:?}"
            )));
        }
        self.priors = priors.map(|q| q / total);
        self.pe = overall_pe(&self);
        Ok(self)
    }
}

/// `Σ_true P(true) · P(measured ≠ true | true)`.
pub fn overall_pe(m: &ClassificationMatrix) -> f64 {
    let pe: f64 = (0..3)
        .map(|t| m.priors[t] * (0..3).filter(|&b| b != t).map(|b| m.p[t][b]).sum::<f64>())
        .sum();
    pe.clamp(0.0, 1.0)
}

const SQRT_2: f64 = std::f64::consts::SQRT_2;

fn upper_tail(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// `Φ(b) - Φ(a)` for `a ≤ b`, without cancellation in either tail.
fn normal_mass(a: f64, b: f64) -> f64 {
    if a >= b {
        0.0
    } else if a >= 0.0 {
        upper_tail(a) - upper_tail(b)
    } else if b <= 0.0 {
        cdf(b) - cdf(a)
    } else {
        1.0 - cdf(a) - upper_tail(b)
    }
}

/// Probability of each measured label given the true displacement `d`.
fn measured_label_probs(d: f64, sigma_x: f64, d0: f64, d1: f64) -> [f64; 3] {
    let z = |e: f64| (e - d) / sigma_x;
    let io = normal_mass(z(-d0), z(d0));
    let ls = normal_mass(z(d0), z(d1)) + normal_mass(z(-d1), z(-d0));
    let cp = normal_mass(z(d1), f64::INFINITY) + normal_mass(f64::NEG_INFINITY, z(-d1));
    [io, ls, cp]
}

/// `P(|D| in each class)` under `N(μ, σ²)`.
fn label_priors(mu: f64, sigma: f64, d0: f64, d1: f64) -> [f64; 3] {
    let z = |e: f64| (e - mu) / sigma;
    let io = normal_mass(z(-d0), z(d0));
    let ls = normal_mass(z(d0), z(d1)) + normal_mass(z(-d1), z(-d0));
    let cp = normal_mass(z(d1), f64::INFINITY) + normal_mass(f64::NEG_INFINITY, z(-d1));
    let total = io + ls + cp;
    [io / total, ls / total, cp / total]
}

/// True-label regions of `d` as closed-open interval lists.
fn regions(d0: f64, d1: f64) -> [Vec<(f64, f64)>; 3] {
    [
        vec![(-d0, d0)],
        vec![(-d1, -d0), (d0, d1)],
        vec![(f64::NEG_INFINITY, -d1), (d1, f64::INFINITY)],
    ]
}

// Each piece is cut where the density falls e^-40 below its value at the
// piece's nearest point to the mean.
const TAIL_EXPONENT: f64 = 40.0;
const MAX_PANELS: usize = 20_000;
const REL_TOL: f64 = 1e-10;

/// `P(measured | true)` by adaptive Gauss–Kronrod quadrature over the
/// true-label region, with priors from the `D` marginal.
pub fn conditional_matrix(
    model: &RelativeDisplacementModel,
    th: &DriftThresholds,
) -> Result<ClassificationMatrix> {
    model.validate()?;
    let (d0, d1) = (th.d0(), th.d1());
    let (mu, sd, sx) = (model.mu_d, model.sigma_d, model.sigma_x);
    let priors = label_priors(mu, sd, d0, d1);

    let mut p = [[0.0; 3]; 3];
    if sx == 0.0 {
        for (t, row) in p.iter_mut().enumerate() {
            row[t] = 1.0;
        }
    } else {
        for (t, region) in regions(d0, d1).iter().enumerate() {
            p[t] = conditional_row(region, mu, sd, sx, [-d1, -d0, d0, d1])?;
        }
    }
    let mut m = ClassificationMatrix { p, priors, pe: 0.0 };
    m.pe = overall_pe(&m);
    Ok(m)
}

fn conditional_row(
    region: &[(f64, f64)],
    mu: f64,
    sd: f64,
    sx: f64,
    edges: [f64; 4],
) -> Result<[f64; 3]> {
    // distance from the mean to the region; the density is rescaled so its
    // largest value on the region is 1, keeping far-tail rows well scaled
    let gap = |&(a, b): &(f64, f64)| {
        if mu < a {
            a - mu
        } else if mu > b {
            mu - b
        } else {
            0.0
        }
    };
    let row_gap = region.iter().map(gap).fold(f64::INFINITY, f64::min);
    let two_var = 2.0 * sd * sd;
    let weight = |d: f64| (-((d - mu).powi(2) - row_gap * row_gap) / two_var).exp();

    let mut pieces = Vec::new();
    for &(a, b) in region {
        if mu > a && mu < b {
            pieces.push((a, mu));
            pieces.push((mu, b));
        } else {
            pieces.push((a, b));
        }
    }

    let mut row = [0.0; 3];
    for (a, b) in pieces {
        let (a, b) = truncate_piece(a, b, mu, sd);
        if !(b > a) {
            continue;
        }
        let points = breakpoints(a, b, &edges, sx);
        let mass = integrate(
            |d| [weight(d)],
            &points,
            Tolerance {
                abs: 0.0,
                rel: 1e-12,
            },
            MAX_PANELS,
        )?;
        let abs = REL_TOL * 1e-2 * mass.value[0];
        let cols = integrate(
            |d| {
                let w = weight(d);
                measured_label_probs(d, sx, edges[2], edges[3]).map(|g| w * g)
            },
            &points,
            Tolerance { abs, rel: REL_TOL },
            MAX_PANELS,
        )?;
        for (r, v) in row.iter_mut().zip(cols.value) {
            *r += v;
        }
    }
    let total: f64 = row.iter().sum();
    if !(total > 0.0) {
        return Err(Error::QuadratureNotConverged {
            achieved: f64::NAN,
            requested: REL_TOL,
        });
    }
    Ok(row.map(|v| (v / total).clamp(0.0, 1.0)))
}

/// Clips a piece lying on one side of the mean to where its density is
/// still within `e^-TAIL_EXPONENT` of its peak.
fn truncate_piece(a: f64, b: f64, mu: f64, sd: f64) -> (f64, f64) {
    let reach = |m: f64| -m + (m * m + 2.0 * TAIL_EXPONENT * sd * sd).sqrt();
    if a >= mu {
        let m = a - mu;
        (a, b.min(a + reach(m)))
    } else {
        let m = mu - b;
        (a.max(b - reach(m)), b)
    }
}

/// Interval ends plus points at `edge ± σ_X·2^j` inside `(a, b)`, so the
/// quadrature starts with panels that resolve the measured-label steps.
fn breakpoints(a: f64, b: f64, edges: &[f64; 4], sx: f64) -> Vec<f64> {
    let mut pts = vec![a, b];
    let span = b - a;
    for &e in edges {
        if e < a - 40.0 * sx || e > b + 40.0 * sx {
            continue;
        }
        if e > a && e < b {
            pts.push(e);
        }
        let mut step = sx;
        while step < span {
            for x in [e - step, e + step] {
                if x > a && x < b {
                    pts.push(x);
                }
            }
            step *= 2.0;
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn th() -> DriftThresholds {
        DriftThresholds::default()
    }

    #[test]
    fn default_thresholds() {
        assert!((th().d0() - 0.028).abs() < 1e-15);
        assert!((th().d1() - 0.2).abs() < 1e-15);
        assert!(DriftThresholds::new(0.05, 0.007, 4.0).is_err());
        assert!(DriftThresholds::new(0.007, 0.05, 0.0).is_err());
    }

    #[test]
    fn idr_examples() {
        assert_eq!(idr(0.0, 0.0, 4.0).unwrap(), 0.0);
        assert!((idr(0.0, 0.028, 4.0).unwrap() - 0.007).abs() < 1e-15);
        assert!((idr(0.10, -0.10, 4.0).unwrap() + 0.05).abs() < 1e-15);
        assert!(matches!(
            idr(0.0, 0.1, 0.0),
            Err(Error::NonPositiveHeight(_))
        ));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(0.01, &th()).unwrap(), ClassLabel::IO);
        assert_eq!(classify(0.028, &th()).unwrap(), ClassLabel::LS);
        assert_eq!(classify(0.2, &th()).unwrap(), ClassLabel::CP);
        assert_eq!(classify(0.25, &th()).unwrap(), ClassLabel::CP);
        assert!(classify(-0.01, &th()).is_err());
    }

    #[test]
    fn relative_std_examples() {
        assert_eq!(relative_error_std(0.0, 0.0), 0.0);
        assert_eq!(relative_error_std(3.0, 4.0), 5.0);
        assert!((relative_error_std(0.7, 0.7) - 0.7 * SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn label_round_trip() {
        for l in ClassLabel::ALL {
            assert_eq!(l.to_string().parse::<ClassLabel>().unwrap(), l);
        }
        assert!("XX".parse::<ClassLabel>().is_err());
    }

    #[test]
    fn perfect_sensor_gives_identity() {
        let m = conditional_matrix(
            &RelativeDisplacementModel::new(0.1, 0.05, 0.0).unwrap(),
            &th(),
        )
        .unwrap();
        for t in 0..3 {
            for b in 0..3 {
                assert_eq!(m.p[t][b], if t == b { 1.0 } else { 0.0 });
            }
        }
        assert_eq!(m.pe, 0.0);
    }

    #[test]
    fn overall_pe_examples() {
        let third = ClassificationMatrix {
            p: [[1.0 / 3.0; 3]; 3],
            priors: [0.2, 0.3, 0.5],
            pe: 0.0,
        };
        assert!((overall_pe(&third) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rows_stochastic_and_priors_normalized() {
        let m = conditional_matrix(
            &RelativeDisplacementModel::new(0.1, 0.05, 0.02).unwrap(),
            &th(),
        )
        .unwrap();
        for row in m.p {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|&x| (0.0..=1.0).contains(&x)));
        }
        assert!((m.priors.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn huge_noise_rows_converge() {
        let m = conditional_matrix(
            &RelativeDisplacementModel::new(0.05, 0.05, 50.0).unwrap(),
            &th(),
        )
        .unwrap();
        for b in 0..3 {
            assert!((m.p[0][b] - m.p[2][b]).abs() < 1e-3);
            assert!((m.p[1][b] - m.p[2][b]).abs() < 1e-3);
        }
    }

    #[test]
    fn tiny_noise_is_nearly_identity() {
        let m = conditional_matrix(
            &RelativeDisplacementModel::new(0.1, 0.05, 1e-7).unwrap(),
            &th(),
        )
        .unwrap();
        for t in 0..3 {
            assert!(m.p[t][t] > 1.0 - 1e-4, "{:?}", m.p);
        }
        assert!(m.pe < 1e-5 && m.pe > 0.0);
    }

    #[test]
    fn far_tail_row_still_normalized() {
        // CP is ~30σ above the mean; its row must still be a distribution
        let m = conditional_matrix(
            &RelativeDisplacementModel::new(0.0, 0.006, 0.01).unwrap(),
            &th(),
        )
        .unwrap();
        assert!(m.priors[2] < 1e-100);
        assert!((m.p[2].iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(m.p[2][2] > 0.5);
    }

    #[test]
    fn priors_override() {
        let m = conditional_matrix(
            &RelativeDisplacementModel::new(0.1, 0.05, 0.02).unwrap(),
            &th(),
        )
        .unwrap();
        let o = m.with_priors([1.0, 0.0, 0.0]).unwrap();
        assert!((o.pe - (m.p[0][1] + m.p[0][2])).abs() < 1e-15);
        assert!(m.with_priors([0.5, 0.6, 0.0]).is_err());
    }

    #[test]
    fn normal_mass_tails() {
        assert!((normal_mass(-1.0, 1.0) - 0.682_689_492_137_085_9).abs() < 1e-14);
        let far = normal_mass(10.0, 11.0);
        assert!((far / 7.619_661_958_203_02e-24 - 1.0).abs() < 1e-6);
        let far_left = normal_mass(-11.0, -10.0);
        assert!((far_left / far - 1.0).abs() < 1e-12);
    }

    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn matrix_is_stochastic(mu in -0.3f64..0.3, sd in 0.002f64..0.2, sx in 0.0f64..0.5) {
            let m = conditional_matrix(&RelativeDisplacementModel::new(mu, sd, sx).unwrap(), &th())
                .unwrap();
            for row in &m.p {
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                prop_assert!(row.iter().all(|p| (0.0..=1.0).contains(p)));
            }
            prop_assert!((m.priors.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&m.pe));
        }

        #[test]
        fn mirrored_mean_gives_same_matrix(mu in 0.0f64..0.3, sd in 0.005f64..0.2, sx in 0.0f64..0.3) {
            let a = conditional_matrix(&RelativeDisplacementModel::new(mu, sd, sx).unwrap(), &th())
                .unwrap();
            let b = conditional_matrix(&RelativeDisplacementModel::new(-mu, sd, sx).unwrap(), &th())
                .unwrap();
            for t in 0..3 {
                prop_assert!((a.priors[t] - b.priors[t]).abs() < 1e-12);
                for c in 0..3 {
                    prop_assert!((a.p[t][c] - b.p[t][c]).abs() < 1e-9);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn classify_is_scale_free(
            d in 0.0f64..1.0,
            d0 in 0.001f64..0.1,
            gap in 0.001f64..0.5,
            j in -20i32..20,
        ) {
            let k = 2f64.powi(j);
            let base = DriftThresholds::from_displacements(d0, d0 + gap, 4.0).unwrap();
            let scaled = DriftThresholds::from_displacements(d0 * k, (d0 + gap) * k, 4.0 * k).unwrap();
            prop_assert_eq!(classify(d, &base).unwrap(), classify(d * k, &scaled).unwrap());
        }
    }

    fn pe_on_noise_grid(mu: f64, sd: f64) -> Vec<f64> {
        [0.0, 1.0, 2.0, 4.0, 8.0]
            .iter()
            .map(|cm| {
                let m = RelativeDisplacementModel::new(mu, sd, cm / 100.0).unwrap();
                conditional_matrix(&m, &th()).unwrap().pe
            })
            .collect()
    }

    #[test]
    fn pe_grows_with_measurement_noise() {
        for (mu, sd) in [
            (0.02, 0.01),
            (0.06, 0.03),
            (0.12, 0.05),
            (0.1, 0.05),
            (0.0, 0.02),
        ] {
            let pe = pe_on_noise_grid(mu, sd);
            assert!(pe.windows(2).all(|w| w[1] >= w[0]), "{mu} {sd}: {pe:?}");
        }
    }

    #[test]
    fn pe_can_fall_when_noise_folds_back() {
        // Nearly every truth is LS. Wider noise pushes measurements across
        // zero and back into the LS band on the negative side.
        use statrs::distribution::{ContinuousCDF, Normal};
        let (mu, sd) = (0.0485, 0.005);
        let pe = pe_on_noise_grid(mu, sd);
        let std_normal = Normal::new(0.0, 1.0).unwrap();
        let phi = |x: f64| std_normal.cdf(x);
        // LS truth is certain to ~1e-5, so pe ≈ P(|D + X| outside [d0, d1))
        let outside = |sx: f64| {
            let s = (sd * sd + sx * sx).sqrt();
            let (d0, d1) = (0.028, 0.2);
            (phi((d0 - mu) / s) - phi((-d0 - mu) / s))
                + (1.0 - phi((d1 - mu) / s))
                + phi((-d1 - mu) / s)
        };
        assert!((pe[3] - outside(0.04)).abs() < 1e-4, "{}", pe[3]);
        assert!((pe[4] - outside(0.08)).abs() < 1e-4, "{}", pe[4]);
        assert!(pe[4] < pe[3]);
    }
}

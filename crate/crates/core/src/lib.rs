//! Displacement estimation for building floors from noisy accelerometer
//! traces, and the effect of the remaining displacement error on
//! post-earthquake damage classification (IO / LS / CP).
//!
//! The crate is organised along the processing chain:
//!
//! - [`noise`]: sensor noise specs, shaping filters, sample paths,
//!   autocovariances and the Toeplitz quadratic forms used by the error
//!   algebra.
//! - [`kinematics`]: double integration, end-of-shaking detection, zero
//!   velocity update (ZUPT) and analytic displacement-error variances.
//! - [`classification`]: interstory drift, damage labels and the 3×3
//!   conditional classification matrix.
//! - [`scenario`]: misclassification probability against strong-motion
//!   duration, per sensor and hazard level.
//!
//! All quantities are SI (m/s², m, s) unless a name says otherwise; sensor
//! catalogs are written in µg units and converted on load.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod classification;
pub mod error;
pub mod io;
pub mod kinematics;
pub mod noise;
pub mod quadrature;
pub mod rng;
pub mod scenario;
pub mod spectral;
pub mod units;

pub use error::{Error, Result};

pub use catalog::{SensorCatalog, SensorRecord};
pub use classification::{
    classify, conditional_matrix, idr, overall_pe, relative_error_std, ClassLabel,
    ClassificationMatrix, DriftThresholds, RelativeDisplacementModel,
};
pub use kinematics::{
    apply_zupt, detect_eos, double_integrate, empirical_mse, error_variance, remove_bias,
    zupt_coefficients, AccelTrace, CoefficientMode, DisplacementEstimate, EmpiricalMse,
    EosDetection, RestWindow, ZuptCoefficients,
};
pub use noise::{
    autocovariance, build_shaping_filters, fit_noise_spec, psd_of_model, synthesize_noise,
    toeplitz_quadratics, AutocovarianceSequence, NoiseFit, NoiseRealization, NoiseSpec,
    NoiseSynthesizer, PsdPoint, ShapingFilter, SourceKind, ToeplitzQuadratics,
};
pub use scenario::{
    expected_pe, pe_at, pe_curve, sigma_x_for, DurationDistribution, HazardLevel, HazardName,
    NoiseMode, PeCurve,
};

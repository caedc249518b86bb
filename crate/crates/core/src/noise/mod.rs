//! Accelerometer noise: spectral specs, FIR shaping filters, sample paths,
//! autocovariance sequences and Toeplitz quadratic forms.

mod autocov;
mod filter;
mod psd;
mod spec;
mod synth;
mod toeplitz;

pub use autocov::{autocovariance, AutocovarianceSequence};
pub use filter::{build_shaping_filters, fractional_integrator_taps, ShapingFilter, SourceKind};
pub use psd::{fit_noise_spec, psd_of_model, NoiseFit};
pub use spec::{NoiseSpec, NoiseSpecBuilder, PsdPoint};
pub use synth::{synthesize_noise, NoiseRealization, NoiseSynthesizer};
pub use toeplitz::{toeplitz_quadratics, Quadratics, ToeplitzQuadratics};

//! Boundary-corrected spectral estimation for short time series.
//!
//! The regular periodogram of a short sample is badly biased near spectral
//! peaks because the sample is a hard-truncated window of the process. The
//! *complete periodogram* repairs one of its two DFT factors by adding the
//! Fourier transform of the best linear predictions of the unobserved values
//! outside the sample; for an AR(p) model this correction has a closed form.
//!
//! Modules:
//! - [`series`], [`taper`], [`spectral`]: autocovariances, DFTs, tapers and the raw periodogram.
//! - [`arfit`]: Levinson-Durbin, Yule-Walker, AIC order selection, ARMA expansions.
//! - [`complete`]: predictive DFT and the (tapered, estimated) complete periodogram.
//! - [`estimator`]: a single configuration type covering every periodogram variant.
//! - [`integrated`]: spectral means, ACF estimation, smoothing and a Whittle-type fit.
//! - [`simulation`]: Gaussian ARMA simulation and the Monte Carlo experiment runner.
//! - [`oracle`]: dense-solve ground truth used for verification.
//! - [`verify`]: self-checks of the unbiasedness identities.

pub mod arfit;
pub mod complete;
pub mod error;
pub mod estimator;
pub mod integrated;
pub mod oracle;
pub mod series;
pub mod simulation;
pub mod spectral;
pub mod taper;
pub mod verify;

pub use num_complex::Complex64;

pub use arfit::{
    aic_select, ar_spectral, arma_expand, default_max_order, levinson_durbin, levinson_durbin_path,
    yule_walker_fit, ArModel, ArmaExpansion, ArmaModel, OrderSelection,
};
pub use complete::{
    complete_periodogram, predictive_dft, predictive_dft_truncated_infinite, threshold_real,
    ModelSource,
};
pub use error::{Error, Result};
pub use estimator::Estimator;
pub use series::{CovarianceEstimator, CovarianceSequence, FrequencyGrid, GridKind, TimeSeries};
pub use spectral::{
    dft, raw_periodogram, sample_autocov, EstimateMeta, PeriodogramEstimate, PeriodogramKind,
};
pub use taper::{default_taper_d, tukey_taper, Taper};

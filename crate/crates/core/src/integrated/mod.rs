//! Integrated-periodogram functionals `A(g) = (2π)⁻¹ ∫ g(ω) f(ω) dω` with the
//! spectral density replaced by one of the periodograms.

mod whittle;
mod window;

pub use whittle::{nelder_mead, whittle_fit, ArFamily, NelderMeadResult, SpectralFamily, WhittleFit};
pub use window::{smooth_periodogram, spectral_window, SpectralWindow, WindowKind};

use num_complex::Complex64;

use crate::complete::threshold_real;
use crate::error::{Error, Result};
use crate::estimator::Estimator;
use crate::series::{FrequencyGrid, GridKind, TimeSeries};
use crate::spectral::PeriodogramEstimate;

/// How the integral over `[0, 2π)` is discretised.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanMode {
    /// Midpoint rule on `points` equal cells; the periodogram is evaluated at the midpoints.
    Riemann(usize),
    /// Average over the Fourier frequencies `2πk/n`.
    FourierSum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralMeanConfig {
    pub mode: MeanMode,
    /// Real-part threshold applied to the periodogram before integrating.
    pub threshold: Option<f64>,
}

impl SpectralMeanConfig {
    pub fn riemann(points: usize) -> Self {
        Self {
            mode: MeanMode::Riemann(points),
            threshold: None,
        }
    }

    pub fn fourier_sum() -> Self {
        Self {
            mode: MeanMode::FourierSum,
            threshold: None,
        }
    }

    pub fn with_threshold(mut self, delta: f64) -> Self {
        self.threshold = Some(delta);
        self
    }

    fn validate(&self) -> Result<()> {
        if let MeanMode::Riemann(points) = self.mode {
            if points < 8 {
                return Err(Error::domain("Riemann integration needs at least 8 points"));
            }
        }
        if let Some(d) = self.threshold {
            if !(d > 0.0) {
                return Err(Error::domain("threshold must be positive"));
            }
        }
        Ok(())
    }

    /// The grid on which a periodogram must be evaluated for this mode.
    pub fn grid(&self, n: usize) -> Result<FrequencyGrid> {
        self.validate()?;
        match self.mode {
            MeanMode::Riemann(points) => FrequencyGrid::uniform(points),
            MeanMode::FourierSum => FrequencyGrid::fourier(n),
        }
    }
}

impl Default for SpectralMeanConfig {
    /// 500-cell midpoint rule, no threshold.
    fn default() -> Self {
        Self::riemann(500)
    }
}

/// Spectral mean `(2π)⁻¹ ∫ g(ω) I(ω) dω` (Riemann mode) or
/// `n⁻¹ Σ_k g(ω_k) I(ω_k)` (Fourier mode).
pub fn spectral_mean(
    g: impl Fn(f64) -> Complex64,
    pg: &PeriodogramEstimate,
    cfg: &SpectralMeanConfig,
) -> Result<Complex64> {
    cfg.validate()?;
    let matches = match (cfg.mode, pg.grid.kind()) {
        (MeanMode::Riemann(points), GridKind::Uniform(count)) => points == count,
        (MeanMode::FourierSum, GridKind::Fourier(_)) => true,
        _ => false,
    };
    if !matches {
        return Err(Error::domain(format!(
            "periodogram grid {:?} does not match integration mode {:?}",
            pg.grid.kind(),
            cfg.mode
        )));
    }
    let thresholded;
    let pg = match cfg.threshold {
        Some(delta) => {
            thresholded = threshold_real(pg, delta)?;
            &thresholded
        }
        None => pg,
    };
    let total: Complex64 = pg
        .grid
        .frequencies()
        .iter()
        .zip(&pg.values)
        .map(|(&w, v)| g(w) * v)
        .sum();
    Ok(total / pg.len() as f64)
}

/// Autocovariances and autocorrelations from an integrated periodogram.
#[derive(Debug, Clone, PartialEq)]
pub struct AcfEstimate {
    pub autocov: Vec<f64>,
    pub acf: Vec<f64>,
}

/// `c(r) = (2π)⁻¹ ∫ cos(rω) Re I(ω) dω` for `r = 0..=max_lag` and `ρ(r) = c(r)/c(0)`.
///
/// With a threshold the autocovariance sequence is positive definite.
pub fn acf_estimate(
    ts: &TimeSeries,
    max_lag: usize,
    estimator: &Estimator,
    cfg: &SpectralMeanConfig,
) -> Result<AcfEstimate> {
    if max_lag >= ts.len() {
        return Err(Error::domain(format!(
            "max lag {max_lag} must be below n = {}",
            ts.len()
        )));
    }
    let grid = cfg.grid(ts.len())?;
    let pg = estimator.evaluate(ts, &grid)?;
    acf_from_periodogram(&pg, max_lag, cfg)
}

/// Same as [`acf_estimate`] for an already evaluated periodogram.
pub fn acf_from_periodogram(
    pg: &PeriodogramEstimate,
    max_lag: usize,
    cfg: &SpectralMeanConfig,
) -> Result<AcfEstimate> {
    let real = PeriodogramEstimate {
        values: pg.values.iter().map(|v| Complex64::new(v.re, 0.0)).collect(),
        ..pg.clone()
    };
    let autocov = (0..=max_lag)
        .map(|r| {
            spectral_mean(|w| Complex64::new((r as f64 * w).cos(), 0.0), &real, cfg).map(|c| c.re)
        })
        .collect::<Result<Vec<f64>>>()?;
    if !(autocov[0] > 0.0) {
        return Err(Error::numerical(
            "estimated variance is not positive; use a positive threshold",
        ));
    }
    let acf = autocov.iter().map(|c| c / autocov[0]).collect();
    Ok(AcfEstimate { autocov, acf })
}

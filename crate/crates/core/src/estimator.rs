//! One configuration type for every periodogram variant, so that ACF
//! estimation, Whittle fitting, the CLI and the simulation harness share a
//! single dispatch point.

use std::fmt;
use std::str::FromStr;

use crate::arfit::ArModel;
use crate::complete::{complete_periodogram, ModelSource};
use crate::error::{Error, Result};
use crate::series::{FrequencyGrid, TimeSeries};
use crate::spectral::{raw_periodogram, PeriodogramEstimate};
use crate::taper::{default_taper_d, tukey_taper, Taper};

/// A fully specified periodogram estimator.
///
/// Taper widths of `None` resolve to `ceil(n/10)` for the series at hand.
#[derive(Debug, Clone, PartialEq)]
pub enum Estimator {
    Regular,
    Tapered { d: Option<usize> },
    Complete(ModelSource),
    TaperedComplete { d: Option<usize>, source: ModelSource },
}

impl Estimator {
    /// Whether the estimator can be complex or negative (and is therefore
    /// real-part thresholded in the experiments).
    pub fn is_complete(&self) -> bool {
        matches!(self, Estimator::Complete(_) | Estimator::TaperedComplete { .. })
    }

    pub fn evaluate(&self, ts: &TimeSeries, grid: &FrequencyGrid) -> Result<PeriodogramEstimate> {
        match self {
            Estimator::Regular => raw_periodogram(ts, grid, None),
            Estimator::Tapered { d } => {
                let taper = taper_for(ts.len(), *d)?;
                raw_periodogram(ts, grid, Some(&taper))
            }
            Estimator::Complete(source) => complete_periodogram(ts, source, grid, None),
            Estimator::TaperedComplete { d, source } => {
                let taper = taper_for(ts.len(), *d)?;
                complete_periodogram(ts, source, grid, Some(&taper))
            }
        }
    }
}

fn taper_for(n: usize, d: Option<usize>) -> Result<Taper> {
    tukey_taper(n, d.unwrap_or_else(|| default_taper_d(n)))
}

/// Estimator names used in configuration files and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    Regular,
    Tapered,
    CompleteTrue,
    CompleteEst,
    TaperedComplete,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] = [
        EstimatorKind::Regular,
        EstimatorKind::Tapered,
        EstimatorKind::CompleteTrue,
        EstimatorKind::CompleteEst,
        EstimatorKind::TaperedComplete,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Regular => "regular",
            EstimatorKind::Tapered => "tapered",
            EstimatorKind::CompleteTrue => "complete-true",
            EstimatorKind::CompleteEst => "complete-est",
            EstimatorKind::TaperedComplete => "tapered-complete",
        }
    }

    /// Resolves to an [`Estimator`]. `CompleteTrue` needs the true AR model;
    /// the estimated variants select their order by AIC.
    pub fn resolve(self, true_model: Option<&ArModel>, taper_d: Option<usize>) -> Result<Estimator> {
        Ok(match self {
            EstimatorKind::Regular => Estimator::Regular,
            EstimatorKind::Tapered => Estimator::Tapered { d: taper_d },
            EstimatorKind::CompleteTrue => {
                let model = true_model.ok_or_else(|| {
                    Error::domain("complete-true needs a finite-order AR model")
                })?;
                Estimator::Complete(ModelSource::Explicit(model.clone()))
            }
            EstimatorKind::CompleteEst => Estimator::Complete(ModelSource::AutoAic),
            EstimatorKind::TaperedComplete => Estimator::TaperedComplete {
                d: taper_d,
                source: ModelSource::AutoAic,
            },
        })
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| Error::domain(format!("unknown estimator '{s}'")))
    }
}

//! Sample autocovariances, the discrete Fourier transform on arbitrary
//! frequency grids, and the regular/tapered periodogram.
//!
//! All transforms use the phase convention `e^{+itω}` with `t = 1..n`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::series::{CovarianceEstimator, CovarianceSequence, FrequencyGrid, GridKind, TimeSeries};
use crate::taper::Taper;

/// What produced the values of a [`PeriodogramEstimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeriodogramKind {
    Regular,
    Tapered,
    Complete,
    TaperedComplete,
    CompleteTrueAR,
    ThresholdedReal,
}

/// Provenance attached to an estimate.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EstimateMeta {
    pub order: Option<usize>,
    pub taper: Option<String>,
    pub threshold: Option<f64>,
}

/// Complex periodogram values on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodogramEstimate {
    pub grid: FrequencyGrid,
    pub values: Vec<Complex64>,
    pub kind: PeriodogramKind,
    pub meta: EstimateMeta,
}

impl PeriodogramEstimate {
    pub(crate) fn new(
        grid: FrequencyGrid,
        values: Vec<Complex64>,
        kind: PeriodogramKind,
        meta: EstimateMeta,
    ) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        Self {
            grid,
            values,
            kind,
            meta,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }
}

/// Biased sample autocovariances `ĉ(k) = n⁻¹ Σ_{t=1}^{n-k} X_t X_{t+k}`.
///
/// The series is used as given; callers center it first if required.
pub fn sample_autocov(ts: &TimeSeries, max_lag: usize) -> Result<CovarianceSequence> {
    let x = ts.values();
    let n = x.len();
    if max_lag >= n {
        return Err(Error::domain(format!(
            "lag exceeds sample (max_lag = {max_lag}, n = {n})"
        )));
    }
    let lags = (0..=max_lag)
        .map(|k| x[..n - k].iter().zip(&x[k..]).map(|(a, b)| a * b).sum::<f64>() / n as f64)
        .collect();
    CovarianceSequence::new(lags, CovarianceEstimator::BiasedSample)
}

/// Produces `e^{itω}` for `t = 1..n` at each grid frequency.
///
/// Fourier grids use an exact table of roots of unity; other grids use a
/// multiplicative recurrence re-anchored every few steps.
pub(crate) struct PhaseTable<'a> {
    grid: &'a FrequencyGrid,
    roots: Option<Vec<Complex64>>,
}

const REANCHOR: usize = 32;

impl<'a> PhaseTable<'a> {
    pub(crate) fn new(grid: &'a FrequencyGrid) -> Self {
        let roots = match grid.kind() {
            GridKind::Fourier(m) => Some(
                (0..m)
                    .map(|j| Complex64::cis(2.0 * PI * j as f64 / m as f64))
                    .collect(),
            ),
            _ => None,
        };
        Self { grid, roots }
    }

    /// Fills `out[t - 1] = e^{itω}` for `t = 1..n`.
    pub(crate) fn row(&self, idx: usize, n: usize, out: &mut Vec<Complex64>) {
        out.clear();
        match (&self.roots, self.grid.kind()) {
            (Some(roots), GridKind::Fourier(m)) => {
                let k = idx % m;
                out.extend((1..=n).map(|t| roots[(t * k) % m]));
            }
            _ => {
                let w = self.grid.frequencies()[idx];
                let step = Complex64::cis(w);
                let mut z = step;
                for t in 1..=n {
                    if t % REANCHOR == 0 {
                        z = Complex64::cis(t as f64 * w);
                    }
                    out.push(z);
                    z *= step;
                }
            }
        }
    }
}

/// `n^{-1/2} Σ_t weight_t X_t e^{itω}` over the grid; `weights = None` means all ones.
pub(crate) fn weighted_dft(
    x: &[f64],
    grid: &FrequencyGrid,
    weights: Option<&[f64]>,
) -> Vec<Complex64> {
    let n = x.len();
    let norm = 1.0 / (n as f64).sqrt();
    let table = PhaseTable::new(grid);
    let mut row = Vec::with_capacity(n);
    let weighted: Vec<f64>;
    let data = match weights {
        Some(h) => {
            weighted = x.iter().zip(h).map(|(a, b)| a * b).collect();
            &weighted[..]
        }
        None => x,
    };
    (0..grid.len())
        .map(|idx| {
            table.row(idx, n, &mut row);
            let s: Complex64 = data.iter().zip(&row).map(|(&v, z)| z * v).sum();
            s * norm
        })
        .collect()
}

/// Discrete Fourier transform `J_n(ω) = n^{-1/2} Σ_{t=1}^n X_t e^{itω}`.
///
/// With a taper the normalised weights `h_{t,n}` multiply the data inside the sum.
pub fn dft(ts: &TimeSeries, grid: &FrequencyGrid, taper: Option<&Taper>) -> Result<Vec<Complex64>> {
    if let Some(t) = taper {
        check_taper(ts, t)?;
    }
    Ok(weighted_dft(ts.values(), grid, taper.map(|t| t.weights())))
}

pub(crate) fn check_taper(ts: &TimeSeries, taper: &Taper) -> Result<()> {
    if taper.len() != ts.len() {
        return Err(Error::domain(format!(
            "taper length {} does not match series length {}",
            taper.len(),
            ts.len()
        )));
    }
    Ok(())
}

/// Regular periodogram `|J_n(ω)|²`, or with a taper the classical tapered
/// periodogram `|H_{2,n}^{-1/2} Σ h_n(t/n) X_t e^{itω}|²`.
pub fn raw_periodogram(
    ts: &TimeSeries,
    grid: &FrequencyGrid,
    taper: Option<&Taper>,
) -> Result<PeriodogramEstimate> {
    let (values, kind, meta) = match taper {
        None => {
            let j = weighted_dft(ts.values(), grid, None);
            let v = j.iter().map(|z| Complex64::new(z.norm_sqr(), 0.0)).collect();
            (v, PeriodogramKind::Regular, EstimateMeta::default())
        }
        Some(t) => {
            check_taper(ts, t)?;
            let j = weighted_dft(ts.values(), grid, Some(t.shape()));
            // weighted_dft divides by sqrt(n); the tapered form divides by sqrt(H2).
            let scale = ts.len() as f64 / t.h2();
            let v = j
                .iter()
                .map(|z| Complex64::new(z.norm_sqr() * scale, 0.0))
                .collect();
            let meta = EstimateMeta {
                taper: Some(t.label().to_string()),
                ..Default::default()
            };
            (v, PeriodogramKind::Tapered, meta)
        }
    };
    Ok(PeriodogramEstimate::new(grid.clone(), values, kind, meta))
}

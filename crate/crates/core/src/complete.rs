//! The complete periodogram.
//!
//! The regular DFT only sees `X_1..X_n`. The predictive DFT adds the Fourier
//! transform of the best linear predictions of the unobserved values on both
//! sides of the sample. For an AR(p) model with `p <= n` it has the closed
//! form
//!
//! ```text
//! Ĵ(ω) = n^{-1/2} / a(ω)  · Σ_{ℓ=1}^{p} X_ℓ         Σ_{s=0}^{p-ℓ} a_{ℓ+s} e^{-isω}
//!      + e^{inω} n^{-1/2} / conj(a(ω)) · Σ_{ℓ=1}^{p} X_{n+1-ℓ} Σ_{s=0}^{p-ℓ} a_{ℓ+s} e^{i(s+1)ω}
//! ```
//!
//! The complete periodogram pairs `J + Ĵ` with the conjugate of the regular
//! (optionally tapered) DFT. With the true second-order structure it is an
//! exactly unbiased estimator of `f(ω)`; it is complex valued in general.

use num_complex::Complex64;

use crate::arfit::{aic_select, ar_transfer, yule_walker_fit, ArModel};
use crate::error::{Error, Result};
use crate::series::{FrequencyGrid, TimeSeries};
use crate::spectral::{
    check_taper, weighted_dft, EstimateMeta, PeriodogramEstimate, PeriodogramKind,
};
use crate::taper::Taper;

/// Evaluates the boundary term with coefficients `a_1..a_M` (zero beyond `M`),
/// summing `ℓ` over `1..=min(M, n)`.
fn boundary_dft(x: &[f64], coeffs: &[f64], grid: &FrequencyGrid, min_transfer: f64) -> Result<Vec<Complex64>> {
    let n = x.len();
    let m = coeffs.len();
    if m == 0 {
        return Ok(vec![Complex64::new(0.0, 0.0); grid.len()]);
    }
    let lmax = m.min(n);
    let norm = 1.0 / (n as f64).sqrt();
    let mut powers = Vec::with_capacity(m + 1);
    grid.frequencies()
        .iter()
        .map(|&w| {
            let a = ar_transfer(coeffs, w);
            if a.norm() <= min_transfer {
                return Err(Error::numerical(format!(
                    "AR transfer function vanishes at frequency {w}"
                )));
            }
            // powers[s] = e^{-isω}
            powers.clear();
            let step = Complex64::cis(-w);
            let mut z = Complex64::new(1.0, 0.0);
            for s in 0..=m {
                if s % 32 == 0 && s > 0 {
                    z = Complex64::cis(-(s as f64) * w);
                }
                powers.push(z);
                z *= step;
            }
            let mut left = Complex64::new(0.0, 0.0);
            let mut right = Complex64::new(0.0, 0.0);
            for l in 1..=lmax {
                // Σ_{s=0}^{M-ℓ} a_{ℓ+s} e^{-isω}; the right side uses the conjugate phase times e^{iω}.
                let inner: Complex64 = (0..=m - l).map(|s| powers[s] * coeffs[l + s - 1]).sum();
                left += inner * x[l - 1];
                right += inner.conj() * x[n - l];
            }
            let right_phase = Complex64::cis((n as f64 + 1.0) * w);
            Ok(left * norm / a + right * right_phase * norm / a.conj())
        })
        .collect()
}

/// Closed-form predictive DFT `Ĵ_n(ω; f_p)` for an AR(p) model with `p <= n`.
///
/// Works identically for true and Yule-Walker plug-in coefficients; the
/// innovation variance plays no role.
pub fn predictive_dft(ts: &TimeSeries, model: &ArModel, grid: &FrequencyGrid) -> Result<Vec<Complex64>> {
    if model.order() > ts.len() {
        return Err(Error::domain(format!(
            "model order {} exceeds sample size {}",
            model.order(),
            ts.len()
        )));
    }
    boundary_dft(ts.values(), model.coeffs(), grid, 0.0)
}

/// Predictive DFT built from a truncated AR(∞) coefficient sequence `a_1..a_M`.
pub fn predictive_dft_truncated_infinite(
    ts: &TimeSeries,
    ar_inf: &[f64],
    grid: &FrequencyGrid,
) -> Result<Vec<Complex64>> {
    if ar_inf.is_empty() {
        return Err(Error::domain("truncation length must be at least 1"));
    }
    if ar_inf.iter().any(|a| !a.is_finite()) {
        return Err(Error::domain("non-finite AR(∞) coefficient"));
    }
    boundary_dft(ts.values(), ar_inf, grid, 1e-8)
}

/// Where the predictive-DFT coefficients come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSource {
    /// A known AR model (typically the true one).
    Explicit(ArModel),
    /// A known AR(∞) coefficient sequence, truncated.
    TruncatedInfinite(Vec<f64>),
    /// Yule-Walker fit with the order chosen by AIC.
    AutoAic,
    /// Yule-Walker fit of the given order.
    FixedOrder(usize),
}

/// Complete periodogram `J̃_n(ω) · conj(J_{h,n}(ω))`.
///
/// The complete DFT `J̃ = J + Ĵ` is never tapered; the taper, if given,
/// only enters the conjugated regular-DFT factor and must be normalised so
/// its weights sum to `n`.
pub fn complete_periodogram(
    ts: &TimeSeries,
    source: &ModelSource,
    grid: &FrequencyGrid,
    taper: Option<&Taper>,
) -> Result<PeriodogramEstimate> {
    if let Some(t) = taper {
        check_taper(ts, t)?;
    }
    let (pred, order, kind) = match source {
        ModelSource::Explicit(model) => (
            predictive_dft(ts, model, grid)?,
            model.order(),
            PeriodogramKind::CompleteTrueAR,
        ),
        ModelSource::TruncatedInfinite(coeffs) => (
            predictive_dft_truncated_infinite(ts, coeffs, grid)?,
            coeffs.len(),
            PeriodogramKind::CompleteTrueAR,
        ),
        ModelSource::AutoAic => {
            let model = aic_select(ts, None)?.model;
            (predictive_dft(ts, &model, grid)?, model.order(), PeriodogramKind::Complete)
        }
        ModelSource::FixedOrder(p) => {
            let model = yule_walker_fit(ts, *p)?;
            (predictive_dft(ts, &model, grid)?, *p, PeriodogramKind::Complete)
        }
    };
    let kind = if taper.is_some() {
        PeriodogramKind::TaperedComplete
    } else {
        kind
    };
    let regular = weighted_dft(ts.values(), grid, None);
    let conj_factor = match taper {
        Some(t) => weighted_dft(ts.values(), grid, Some(t.weights())),
        None => regular.clone(),
    };
    let values = regular
        .iter()
        .zip(&pred)
        .zip(&conj_factor)
        .map(|((j, jp), jh)| (j + jp) * jh.conj())
        .collect();
    let meta = EstimateMeta {
        order: Some(order),
        taper: taper.map(|t| t.label().to_string()),
        threshold: None,
    };
    Ok(PeriodogramEstimate::new(grid.clone(), values, kind, meta))
}

/// Keeps the real part and clamps it from below at `delta`.
pub fn threshold_real(pg: &PeriodogramEstimate, delta: f64) -> Result<PeriodogramEstimate> {
    if !(delta > 0.0) {
        return Err(Error::domain(format!("threshold must be positive, got {delta}")));
    }
    let values = pg
        .values
        .iter()
        .map(|v| Complex64::new(v.re.max(delta), 0.0))
        .collect();
    let meta = EstimateMeta {
        threshold: Some(delta),
        ..pg.meta.clone()
    };
    Ok(PeriodogramEstimate::new(
        pg.grid.clone(),
        values,
        PeriodogramKind::ThresholdedReal,
        meta,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::raw_periodogram;
    use crate::taper::tukey_taper;
    use approx::assert_relative_eq;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    #[test]
    fn white_noise_model_has_no_boundary_term() {
        let x = ts(&[0.4, -1.0, 2.0, 0.1]);
        let g = FrequencyGrid::fourier(4).unwrap();
        let wn = ArModel::white_noise(1.0).unwrap();
        let pred = predictive_dft(&x, &wn, &g).unwrap();
        assert!(pred.iter().all(|z| z.norm() == 0.0));
        let cp = complete_periodogram(&x, &ModelSource::Explicit(wn), &g, None).unwrap();
        let rp = raw_periodogram(&x, &g, None).unwrap();
        assert_eq!(cp.values, rp.values);
    }

    #[test]
    fn ar1_two_points_at_zero_frequency() {
        let g = FrequencyGrid::explicit(vec![0.0]).unwrap();
        let m = ArModel::new(vec![0.5], 1.0).unwrap();
        let pred = predictive_dft(&ts(&[1.0, 1.0]), &m, &g).unwrap();
        assert_relative_eq!(pred[0].re, 2f64.sqrt(), epsilon = 1e-14);
        assert!(pred[0].im.abs() < 1e-15);
    }

    #[test]
    fn order_above_sample_size_is_rejected() {
        let g = FrequencyGrid::fourier(2).unwrap();
        let m = ArModel::new(vec![0.1, 0.1, 0.1], 1.0).unwrap();
        assert!(predictive_dft(&ts(&[1.0, 2.0]), &m, &g).is_err());
    }

    #[test]
    fn truncated_matches_closed_form_for_finite_ar() {
        let x = ts(&[0.3, -0.7, 1.1, 0.2, -0.4, 0.9]);
        let g = FrequencyGrid::uniform(11).unwrap();
        let m = ArModel::new(vec![0.4, -0.3], 1.0).unwrap();
        let a = predictive_dft(&x, &m, &g).unwrap();
        let b = predictive_dft_truncated_infinite(&x, &[0.4, -0.3, 0.0, 0.0, 0.0], &g).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).norm() < 1e-10);
        }
        let z = predictive_dft_truncated_infinite(&x, &[0.0; 4], &g).unwrap();
        assert!(z.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn vanishing_transfer_is_reported() {
        let g = FrequencyGrid::explicit(vec![0.0]).unwrap();
        let err = predictive_dft_truncated_infinite(&ts(&[1.0, 2.0, 3.0]), &[1.0], &g).unwrap_err();
        assert!(err.is_numerical());
    }

    #[test]
    fn all_zero_series_gives_zero_complete_periodogram() {
        let g = FrequencyGrid::fourier(5).unwrap();
        let m = ArModel::new(vec![0.5, -0.2], 1.0).unwrap();
        let cp = complete_periodogram(&ts(&[0.0; 5]), &ModelSource::Explicit(m), &g, None).unwrap();
        assert!(cp.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn kinds_and_meta() {
        let x = ts(&[0.3, -0.7, 1.1, 0.2, -0.4, 0.9, 1.3, -0.2, 0.0, 0.5]);
        let g = FrequencyGrid::fourier(10).unwrap();
        let t = tukey_taper(10, 1).unwrap();
        let a = complete_periodogram(&x, &ModelSource::FixedOrder(2), &g, None).unwrap();
        assert_eq!(a.kind, PeriodogramKind::Complete);
        assert_eq!(a.meta.order, Some(2));
        let b = complete_periodogram(&x, &ModelSource::AutoAic, &g, Some(&t)).unwrap();
        assert_eq!(b.kind, PeriodogramKind::TaperedComplete);
        assert_eq!(b.meta.taper.as_deref(), Some("tukey(d=1)"));
    }

    #[test]
    fn threshold_behaviour() {
        let g = FrequencyGrid::fourier(3).unwrap();
        let pg = PeriodogramEstimate::new(
            g,
            vec![
                Complex64::new(-0.5, 0.0),
                Complex64::new(2.0, 0.0),
                Complex64::new(1.0, 0.3),
            ],
            PeriodogramKind::Complete,
            EstimateMeta::default(),
        );
        let t = threshold_real(&pg, 1e-3).unwrap();
        assert_eq!(t.real_parts(), vec![1e-3, 2.0, 1.0]);
        assert!(t.values.iter().all(|v| v.im == 0.0));
        assert_eq!(t.kind, PeriodogramKind::ThresholdedReal);
        assert_eq!(t.meta.threshold, Some(1e-3));
        assert!(threshold_real(&pg, 0.0).is_err());
    }
}

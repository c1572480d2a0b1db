//! Whittle-type parameter fitting with the periodogram of choice.
//!
//! The objective is `K(θ) = A(1/f_θ) + (2π)⁻¹ ∫ log f_θ`, both terms
//! discretised on the same grid. The log term is integrated numerically even
//! when it has a closed form, so every family goes through one path.

use num_complex::Complex64;

use super::{spectral_mean, SpectralMeanConfig};
use crate::arfit::ArModel;
use crate::complete::threshold_real;
use crate::error::{Error, Result};
use crate::estimator::Estimator;
use crate::series::TimeSeries;

/// A parametric spectral density `f_θ` on a box.
pub trait SpectralFamily {
    fn dim(&self) -> usize;
    /// Inclusive `(lower, upper)` bounds per coordinate.
    fn bounds(&self) -> Vec<(f64, f64)>;
    fn density(&self, theta: &[f64], omega: f64) -> f64;
}

/// AR(p) densities parametrised by partial autocorrelations and `log σ²`,
/// which keeps every point of the box causal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArFamily {
    pub order: usize,
}

const PACF_BOUND: f64 = 0.999;
const LOG_VAR_BOUND: f64 = 30.0;

impl ArFamily {
    pub fn new(order: usize) -> Self {
        Self { order }
    }

    /// AR coefficients from partial autocorrelations (Levinson step-up).
    pub fn coefficients(&self, theta: &[f64]) -> Vec<f64> {
        let mut a: Vec<f64> = Vec::with_capacity(self.order);
        for (m, &k) in theta[..self.order].iter().enumerate() {
            let prev = a.clone();
            for j in 0..m {
                a[j] = prev[j] - k * prev[m - 1 - j];
            }
            a.push(k);
        }
        a
    }

    pub fn model(&self, theta: &[f64]) -> Result<ArModel> {
        ArModel::new(self.coefficients(theta), theta[self.order].exp())
    }

    /// Parameter vector for a causal AR model.
    pub fn theta_from_model(&self, model: &ArModel) -> Result<Vec<f64>> {
        if model.order() != self.order {
            return Err(Error::domain("model order does not match family"));
        }
        let mut theta = model.reflection_coefficients();
        theta.push(model.sigma2().ln());
        Ok(theta)
    }
}

impl SpectralFamily for ArFamily {
    fn dim(&self) -> usize {
        self.order + 1
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        let mut b = vec![(-PACF_BOUND, PACF_BOUND); self.order];
        b.push((-LOG_VAR_BOUND, LOG_VAR_BOUND));
        b
    }

    fn density(&self, theta: &[f64], omega: f64) -> f64 {
        let a = self.coefficients(theta);
        theta[self.order].exp() / crate::arfit::ar_transfer(&a, omega).norm_sqr()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
    /// Every evaluated point with its objective value, in order.
    pub trace: Vec<(Vec<f64>, f64)>,
}

/// Box-constrained Nelder-Mead. Points are projected onto the box; the run
/// restarts from the best vertex after each stall until a restart no longer
/// improves the value. Stops when the simplex diameter drops below
/// `tolerance` or after `max_evals` evaluations (flagged as not converged).
pub fn nelder_mead(
    objective: impl Fn(&[f64]) -> f64,
    init: &[f64],
    bounds: &[(f64, f64)],
    tolerance: f64,
    max_evals: usize,
) -> NelderMeadResult {
    let dim = init.len();
    let project = |x: &mut Vec<f64>| {
        for (v, (lo, hi)) in x.iter_mut().zip(bounds) {
            *v = v.clamp(*lo, *hi);
        }
    };
    let mut trace: Vec<(Vec<f64>, f64)> = Vec::new();
    let eval = |x: &[f64], trace: &mut Vec<(Vec<f64>, f64)>| {
        let v = objective(x);
        let v = if v.is_finite() { v } else { f64::INFINITY };
        trace.push((x.to_vec(), v));
        v
    };

    let mut best_x = init.to_vec();
    project(&mut best_x);
    let mut best_v = eval(&best_x, &mut trace);
    let mut converged = false;

    for _restart in 0..8 {
        let mut simplex: Vec<(Vec<f64>, f64)> = vec![(best_x.clone(), best_v)];
        for i in 0..dim {
            let (lo, hi) = bounds[i];
            let step = (0.1f64).min(0.25 * (hi - lo));
            let mut x = best_x.clone();
            x[i] = if x[i] + step <= hi { x[i] + step } else { x[i] - step };
            let v = eval(&x, &mut trace);
            simplex.push((x, v));
        }
        let mut stalled = false;
        while trace.len() < max_evals {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let diameter = simplex[1..]
                .iter()
                .map(|(x, _)| {
                    x.iter()
                        .zip(&simplex[0].0)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if diameter < tolerance {
                stalled = true;
                break;
            }
            let centroid: Vec<f64> = (0..dim)
                .map(|i| simplex[..dim].iter().map(|(x, _)| x[i]).sum::<f64>() / dim as f64)
                .collect();
            let worst = simplex[dim].clone();
            let along = |t: f64| {
                let mut x: Vec<f64> = centroid
                    .iter()
                    .zip(&worst.0)
                    .map(|(c, w)| c + t * (c - w))
                    .collect();
                project(&mut x);
                x
            };
            let xr = along(1.0);
            let vr = eval(&xr, &mut trace);
            if vr < simplex[0].1 {
                let xe = along(2.0);
                let ve = eval(&xe, &mut trace);
                simplex[dim] = if ve < vr { (xe, ve) } else { (xr, vr) };
            } else if vr < simplex[dim - 1].1 {
                simplex[dim] = (xr, vr);
            } else {
                let (xc, vc) = if vr < worst.1 {
                    let x = along(0.5);
                    let v = eval(&x, &mut trace);
                    (x, v)
                } else {
                    let x = along(-0.5);
                    let v = eval(&x, &mut trace);
                    (x, v)
                };
                if vc < worst.1.min(vr) {
                    simplex[dim] = (xc, vc);
                } else {
                    let best = simplex[0].0.clone();
                    for vertex in simplex.iter_mut().skip(1) {
                        let mut x: Vec<f64> = best
                            .iter()
                            .zip(&vertex.0)
                            .map(|(b, v)| b + 0.5 * (v - b))
                            .collect();
                        project(&mut x);
                        let v = eval(&x, &mut trace);
                        *vertex = (x, v);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let improved = simplex[0].1 < best_v - 1e-12 * best_v.abs().max(1.0);
        if simplex[0].1 <= best_v {
            best_x = simplex[0].0.clone();
            best_v = simplex[0].1;
        }
        if !stalled {
            break;
        }
        if !improved {
            converged = true;
            break;
        }
    }
    NelderMeadResult {
        x: best_x,
        value: best_v,
        evaluations: trace.len(),
        converged,
        trace,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WhittleFit {
    pub theta: Vec<f64>,
    pub objective: f64,
    pub objective_at_init: f64,
    pub converged: bool,
    pub evaluations: usize,
    pub trace: Vec<(Vec<f64>, f64)>,
}

/// Minimises `K(θ) = A(1/f_θ) + (2π)⁻¹ ∫ log f_θ` over the family's box.
pub fn whittle_fit(
    ts: &TimeSeries,
    family: &dyn SpectralFamily,
    estimator: &Estimator,
    init: &[f64],
    cfg: &SpectralMeanConfig,
) -> Result<WhittleFit> {
    let bounds = family.bounds();
    if init.len() != family.dim() {
        return Err(Error::domain(format!(
            "initial point has {} coordinates, family needs {}",
            init.len(),
            family.dim()
        )));
    }
    for (v, (lo, hi)) in init.iter().zip(&bounds) {
        if !(*v >= *lo && *v <= *hi) {
            return Err(Error::domain(format!("initial value {v} outside [{lo}, {hi}]")));
        }
    }
    let grid = cfg.grid(ts.len())?;
    let mut pg = estimator.evaluate(ts, &grid)?;
    if let Some(delta) = cfg.threshold {
        pg = threshold_real(&pg, delta)?;
    }
    let plain = SpectralMeanConfig {
        threshold: None,
        ..*cfg
    };
    let freqs = grid.frequencies().to_vec();
    let objective = |theta: &[f64]| -> f64 {
        let Ok(fit) = spectral_mean(
            |w| Complex64::new(1.0 / family.density(theta, w), 0.0),
            &pg,
            &plain,
        ) else {
            return f64::NAN;
        };
        let log_term = freqs.iter().map(|&w| family.density(theta, w).ln()).sum::<f64>() / freqs.len() as f64;
        fit.re + log_term
    };
    let at_init = objective(init);
    if !at_init.is_finite() {
        return Err(Error::domain("objective is not finite at the initial point"));
    }
    let result = nelder_mead(objective, init, &bounds, 1e-8, 500 * family.dim());
    Ok(WhittleFit {
        theta: result.x,
        objective: result.value,
        objective_at_init: at_init,
        converged: result.converged,
        evaluations: result.evaluations,
        trace: result.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_up_inverts_step_down() {
        let fam = ArFamily::new(3);
        let model = ArModel::new(vec![0.4, -0.3, 0.2], 1.5).unwrap();
        let theta = fam.theta_from_model(&model).unwrap();
        let back = fam.model(&theta).unwrap();
        for (a, b) in back.coeffs().iter().zip(model.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((back.sigma2() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn nelder_mead_quadratic() {
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + 2.0 * (x[1] + 0.2).powi(2);
        let r = nelder_mead(f, &[0.0, 0.0], &[(-1.0, 1.0), (-1.0, 1.0)], 1e-9, 2000);
        assert!(r.converged);
        assert!((r.x[0] - 0.3).abs() < 1e-6);
        assert!((r.x[1] + 0.2).abs() < 1e-6);
    }

    #[test]
    fn nelder_mead_respects_box() {
        let f = |x: &[f64]| (x[0] - 5.0).powi(2);
        let r = nelder_mead(f, &[0.0], &[(-1.0, 1.0)], 1e-10, 1000);
        assert!((r.x[0] - 1.0).abs() < 1e-8);
        assert!(r.trace.iter().all(|(x, _)| x[0] <= 1.0));
    }

    #[test]
    fn init_validation() {
        let ts = TimeSeries::new(vec![0.1, 0.5, -0.3, 0.2, 0.9, -1.0]).unwrap();
        let fam = ArFamily::new(1);
        let cfg = SpectralMeanConfig::fourier_sum();
        assert!(whittle_fit(&ts, &fam, &Estimator::Regular, &[2.0, 0.0], &cfg).is_err());
        assert!(whittle_fit(&ts, &fam, &Estimator::Regular, &[0.0], &cfg).is_err());
    }
}

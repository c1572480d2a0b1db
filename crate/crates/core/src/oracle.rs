//! Independent ground truth for the estimators.
//!
//! Nothing here goes through Levinson-Durbin: Toeplitz systems are solved by
//! a dense Cholesky factorisation, predictors are formed term by term, and
//! Gaussian moments of bilinear forms come straight from the covariance
//! matrix. The closed-form estimators are checked against these routes.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;

use crate::arfit::ArModel;
use crate::complete::predictive_dft;
use crate::error::{Error, Result};
use crate::series::{CovarianceSequence, FrequencyGrid, TimeSeries};

/// Population autocovariances `c(r) = (2π)⁻¹ ∫ f(ω) cos(rω) dω` by the
/// midpoint rule; exponentially accurate for smooth periodic densities.
pub fn autocov_from_density(
    density: impl Fn(f64) -> f64,
    max_lag: usize,
    points: usize,
) -> Result<CovarianceSequence> {
    if points <= 2 * max_lag {
        return Err(Error::domain("quadrature needs more than 2·max_lag points"));
    }
    let h = 2.0 * PI / points as f64;
    let f: Vec<f64> = (0..points).map(|j| density((j as f64 + 0.5) * h)).collect();
    let lags = (0..=max_lag)
        .map(|r| {
            f.iter()
                .enumerate()
                .map(|(j, v)| v * ((r as f64) * (j as f64 + 0.5) * h).cos())
                .sum::<f64>()
                / points as f64
        })
        .collect();
    CovarianceSequence::population(lags)
}

/// The `n × n` Toeplitz matrix `R_n[s, t] = c(s − t)`.
pub fn toeplitz(cov: &CovarianceSequence, n: usize) -> Result<DMatrix<f64>> {
    if cov.max_lag() + 1 < n {
        return Err(Error::domain(format!(
            "need {n} autocovariances, have {}",
            cov.max_lag() + 1
        )));
    }
    let c = cov.lags();
    Ok(DMatrix::from_fn(n, n, |s, t| c[s.abs_diff(t)]))
}

fn factor(cov: &CovarianceSequence, n: usize) -> Result<Cholesky<f64, Dyn>> {
    toeplitz(cov, n)?
        .cholesky()
        .ok_or_else(|| Error::numerical("covariance matrix is not positive definite"))
}

/// Best linear predictor of `X_τ` from `X_1..X_n`:
/// `X̂_{τ,n} = Σ_t weights[t-1] · X_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorCoefficients {
    pub target: isize,
    pub weights: Vec<f64>,
}

impl PredictorCoefficients {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum()
    }
}

/// Reusable dense solver for finite-sample predictors.
pub struct PredictorSolver<'a> {
    cov: &'a CovarianceSequence,
    n: usize,
    chol: Cholesky<f64, Dyn>,
}

impl<'a> PredictorSolver<'a> {
    pub fn new(cov: &'a CovarianceSequence, n: usize) -> Result<Self> {
        Ok(Self {
            cov,
            n,
            chol: factor(cov, n)?,
        })
    }

    /// Solves `R_n φ = (c(τ−1), ..., c(τ−n))'`.
    pub fn coefficients(&self, target: isize) -> Result<PredictorCoefficients> {
        let n = self.n as isize;
        if (1..=n).contains(&target) {
            return Err(Error::domain(format!("target {target} lies inside the sample")));
        }
        let rhs = DVector::from_iterator(
            self.n,
            (1..=n).map(|t| {
                self.cov.at(target - t).ok_or_else(|| {
                    Error::domain(format!("covariance too short for lag {}", target - t))
                })
            })
            .collect::<Result<Vec<f64>>>()?,
        );
        let phi = self.chol.solve(&rhs);
        Ok(PredictorCoefficients {
            target,
            weights: phi.iter().copied().collect(),
        })
    }
}

pub fn finite_predictor_coeffs(
    cov: &CovarianceSequence,
    n: usize,
    target: isize,
) -> Result<PredictorCoefficients> {
    PredictorSolver::new(cov, n)?.coefficients(target)
}

fn bruteforce_at_horizon(
    x: &[f64],
    solver: &PredictorSolver<'_>,
    grid: &FrequencyGrid,
    horizon: usize,
) -> Result<Vec<Complex64>> {
    let n = x.len() as isize;
    let h = horizon as isize;
    let targets: Vec<isize> = (1 - h..=0).chain(n + 1..=n + h).collect();
    let preds = targets
        .iter()
        .map(|&tau| Ok((tau, solver.coefficients(tau)?.predict(x))))
        .collect::<Result<Vec<(isize, f64)>>>()?;
    let norm = 1.0 / (x.len() as f64).sqrt();
    Ok(grid
        .frequencies()
        .iter()
        .map(|&w| {
            preds
                .iter()
                .map(|&(tau, v)| Complex64::cis(tau as f64 * w) * v)
                .sum::<Complex64>()
                * norm
        })
        .collect())
}

/// Predictive DFT from explicit finite-sample predictors of `X_τ` for
/// `τ ∈ [1 − horizon, 0] ∪ [n + 1, n + horizon]`.
///
/// The sum is also evaluated with twice the horizon; if the two differ by
/// `1e-8` or more in sup-norm the tail has not converged and a numerical
/// error is returned.
pub fn predictive_dft_bruteforce(
    ts: &TimeSeries,
    cov: &CovarianceSequence,
    grid: &FrequencyGrid,
    horizon: usize,
) -> Result<Vec<Complex64>> {
    if horizon == 0 {
        return Err(Error::domain("horizon must be at least 1"));
    }
    let n = ts.len();
    let needed = n + 2 * horizon;
    if cov.max_lag() < needed {
        return Err(Error::domain(format!(
            "brute-force predictors need autocovariances up to lag {needed}"
        )));
    }
    let solver = PredictorSolver::new(cov, n)?;
    let base = bruteforce_at_horizon(ts.values(), &solver, grid, horizon)?;
    let doubled = bruteforce_at_horizon(ts.values(), &solver, grid, 2 * horizon)?;
    let gap = base
        .iter()
        .zip(&doubled)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if gap >= 1e-8 {
        return Err(Error::numerical(format!(
            "predictor tail not converged: doubling horizon {horizon} moved the result by {gap:e}"
        )));
    }
    Ok(doubled)
}

/// Default horizon for [`predictive_dft_bruteforce`].
pub const DEFAULT_HORIZON: usize = 200;

/// Coefficients `v_t = n^{-1/2} h_t e^{itω}` of a (weighted) DFT as a linear form in `X`.
pub fn dft_form(n: usize, omega: f64, weights: Option<&[f64]>) -> Vec<Complex64> {
    let norm = 1.0 / (n as f64).sqrt();
    (1..=n)
        .map(|t| {
            let h = weights.map_or(1.0, |w| w[t - 1]);
            Complex64::cis(t as f64 * omega) * (h * norm)
        })
        .collect()
}

/// Linear form of the complete DFT `J + Ĵ(·; model)` at `ω`, assembled by
/// applying the closed-form predictive DFT to unit vectors.
pub fn complete_dft_form(model: &ArModel, n: usize, omega: f64) -> Result<Vec<Complex64>> {
    let grid = FrequencyGrid::explicit(vec![omega.rem_euclid(2.0 * PI)])?;
    let mut form = dft_form(n, omega, None);
    for (t, slot) in form.iter_mut().enumerate() {
        let mut e = vec![0.0; n];
        e[t] = 1.0;
        let unit = TimeSeries::new(e)?;
        *slot += predictive_dft(&unit, model, &grid)?[0];
    }
    Ok(form)
}

/// Linear form of the complete DFT built from brute-force finite predictors.
pub fn complete_dft_form_bruteforce(
    cov: &CovarianceSequence,
    n: usize,
    omega: f64,
    horizon: usize,
) -> Result<Vec<Complex64>> {
    let solver = PredictorSolver::new(cov, n)?;
    let norm = 1.0 / (n as f64).sqrt();
    let mut form = dft_form(n, omega, None);
    let ni = n as isize;
    let h = horizon as isize;
    for tau in (1 - h..=0).chain(ni + 1..=ni + h) {
        let phase = Complex64::cis(tau as f64 * omega) * norm;
        for (slot, w) in form.iter_mut().zip(solver.coefficients(tau)?.weights) {
            *slot += phase * w;
        }
    }
    Ok(form)
}

/// Gaussian moments of `Z = (v'X) · conj(w'X)` for `X ~ N(0, R_n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticMoments {
    /// `E[Z] = conj(w)' R_n v`.
    pub mean: Complex64,
    /// `E|Z − E Z|²` by Isserlis' theorem (no fourth-cumulant term).
    pub gaussian_variance: f64,
}

pub fn expected_quadratic(
    left: &[Complex64],
    right: &[Complex64],
    cov: &CovarianceSequence,
) -> Result<QuadraticMoments> {
    let n = left.len();
    if right.len() != n {
        return Err(Error::domain("linear forms differ in length"));
    }
    let r = toeplitz(cov, n)?;
    if r.clone().cholesky().is_none() {
        return Err(Error::numerical("covariance matrix is not positive definite"));
    }
    // bilinear(a, b) = Σ_{s,t} a_s R[s,t] b_t
    let bilinear = |a: &dyn Fn(usize) -> Complex64, b: &dyn Fn(usize) -> Complex64| {
        let mut acc = Complex64::new(0.0, 0.0);
        for s in 0..n {
            let mut row = Complex64::new(0.0, 0.0);
            for t in 0..n {
                row += b(t) * r[(s, t)];
            }
            acc += a(s) * row;
        }
        acc
    };
    let v = |i: usize| left[i];
    let vc = |i: usize| left[i].conj();
    let w = |i: usize| right[i];
    let wc = |i: usize| right[i].conj();
    let mean = bilinear(&wc, &v);
    let var_left = bilinear(&v, &vc).re;
    let var_right = bilinear(&w, &wc).re;
    let cross = bilinear(&v, &w);
    Ok(QuadraticMoments {
        mean,
        gaussian_variance: var_left * var_right + cross.norm_sqr(),
    })
}

/// Fejér kernel `F_n(λ) = n⁻¹ (sin(nλ/2) / sin(λ/2))²`, with `F_n(0) = n`.
pub fn fejer_kernel(n: usize, lambda: f64) -> f64 {
    let half = 0.5 * lambda;
    let s = half.sin();
    if s.abs() < 1e-8 {
        return n as f64;
    }
    let num = (n as f64 * half).sin();
    num * num / (s * s * n as f64)
}

/// `E[I_n(ω)] = (2π)⁻¹ ∫ F_n(ω − λ) f(λ) dλ` by the midpoint rule.
pub fn fejer_expected_periodogram(
    density: impl Fn(f64) -> f64,
    n: usize,
    omega: f64,
    quadrature_points: usize,
) -> Result<f64> {
    if quadrature_points < 256 {
        return Err(Error::domain("Fejér quadrature needs at least 256 points"));
    }
    let h = 2.0 * PI / quadrature_points as f64;
    let total: f64 = (0..quadrature_points)
        .map(|j| {
            let lambda = (j as f64 + 0.5) * h;
            fejer_kernel(n, omega - lambda) * density(lambda)
        })
        .sum();
    Ok(total / quadrature_points as f64)
}

//! Self-checks of the identities the complete periodogram rests on, computed
//! against the dense-solve oracle. Each check reports its worst error.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::arfit::ArModel;
use crate::complete::{complete_periodogram, predictive_dft, ModelSource};
use crate::error::{Error, Result};
use crate::integrated::{spectral_mean, ArFamily, SpectralFamily, SpectralMeanConfig};
use crate::oracle::{
    complete_dft_form, dft_form, expected_quadratic, fejer_expected_periodogram, predictive_dft_bruteforce,
    toeplitz,
};
use crate::series::{CovarianceSequence, FrequencyGrid, TimeSeries};
use crate::simulation::{builtin_model, BuiltinModel};
use crate::taper::{default_taper_d, tukey_taper};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.max_error < self.tolerance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Unbiasedness,
    Oracle,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unbiasedness" => Ok(Suite::Unbiasedness),
            "oracle" => Ok(Suite::Oracle),
            "all" => Ok(Suite::All),
            other => Err(Error::domain(format!("unknown suite '{other}'"))),
        }
    }
}

pub fn run_suite(suite: Suite) -> Result<Vec<CheckResult>> {
    let lambdas = [0.7, 0.9, 0.95];
    let ns = [8, 20, 50];
    let mut out = Vec::new();
    if matches!(suite, Suite::Unbiasedness | Suite::All) {
        out.push(unbiasedness(&lambdas, &ns, false)?);
        out.push(unbiasedness(&lambdas, &ns, true)?);
    }
    if matches!(suite, Suite::Oracle | Suite::All) {
        out.push(predictive_equivalence(50, 16, 2024)?);
        out.push(fejer_closure(&ns)?);
        out.push(quadratic_form_identity(&[8, 16, 32], 100, 7)?);
    }
    Ok(out)
}

fn population_cov(lags: Vec<f64>) -> Result<CovarianceSequence> {
    CovarianceSequence::population(lags)
}

/// Worst relative error `|E[Ĩ(ω_k)] − f(ω_k)| / f(ω_k)` of the complete
/// periodogram built from the true M1(λ) model, over all Fourier frequencies.
/// With `tapered`, the conjugated factor carries the Tukey taper with
/// `d = ceil(n/10)`.
pub fn unbiasedness(lambdas: &[f64], ns: &[usize], tapered: bool) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for &lambda in lambdas {
        let model = builtin_model(BuiltinModel::M1(lambda))?
            .as_ar()
            .ok_or_else(|| Error::domain("M1 is an AR model"))?;
        for &n in ns {
            let cov = population_cov(model.autocovariances(n))?;
            let taper = if tapered { Some(tukey_taper(n, default_taper_d(n))?) } else { None };
            for w in FrequencyGrid::fourier(n)?.frequencies() {
                let left = complete_dft_form(&model, n, *w)?;
                let right = dft_form(n, *w, taper.as_ref().map(|t| t.weights()));
                let mean = expected_quadratic(&left, &right, &cov)?.mean;
                let f = model.density(*w);
                worst = worst.max((mean - Complex64::new(f, 0.0)).norm() / f);
                cases += 1;
            }
        }
    }
    Ok(CheckResult {
        name: if tapered { "tapered unbiasedness" } else { "unbiasedness" }.into(),
        cases,
        max_error: worst,
        tolerance: 1e-9,
    })
}

/// Random causal AR(1)/AR(2) models with partial autocorrelations in
/// `(-0.6, 0.6)`, so predictor tails decay fast enough for the brute force.
fn random_ar(rng: &mut ChaCha8Rng) -> Result<ArModel> {
    let p = rng.random_range(1..=2);
    let theta: Vec<f64> = (0..p)
        .map(|_| rng.random_range(-0.6..0.6))
        .chain(std::iter::once(0.0))
        .collect();
    ArFamily::new(p).model(&theta)
}

fn random_series(rng: &mut ChaCha8Rng, n: usize) -> Result<TimeSeries> {
    TimeSeries::new((0..n).map(|_| rng.sample(StandardNormal)).collect())
}

/// Closed-form vs brute-force predictive DFT, sup-norm over 16 frequencies.
pub fn predictive_equivalence(instances: usize, max_n: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let horizon = 400;
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let model = random_ar(&mut rng)?;
        let n = rng.random_range(model.order().max(2)..=max_n);
        let ts = random_series(&mut rng, n)?;
        let grid = FrequencyGrid::uniform(16)?;
        let cov = population_cov(model.autocovariances(n + 2 * horizon))?;
        let closed = predictive_dft(&ts, &model, &grid)?;
        let brute = predictive_dft_bruteforce(&ts, &cov, &grid, horizon)?;
        for (a, b) in closed.iter().zip(&brute) {
            worst = worst.max((a - b).norm());
        }
    }
    Ok(CheckResult {
        name: "closed-form vs brute-force predictive DFT".into(),
        cases: instances,
        max_error: worst,
        tolerance: 1e-8,
    })
}

/// Expected regular periodogram from the quadratic form vs the Fejér
/// convolution, on both simulation models at every Fourier frequency.
pub fn fejer_closure(ns: &[usize]) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for which in [BuiltinModel::M1(0.9), BuiltinModel::M1(0.7), BuiltinModel::M2] {
        let model = builtin_model(which)?;
        for &n in ns {
            let cov = population_cov(model.autocovariances(n))?;
            for &w in FrequencyGrid::fourier(n)?.frequencies() {
                let form = dft_form(n, w, None);
                let exact = expected_quadratic(&form, &form, &cov)?.mean.re;
                let fejer = fejer_expected_periodogram(|l| model.density(l), n, w, 20_000)?;
                worst = worst.max((exact - fejer).abs() / exact);
                cases += 1;
            }
        }
    }
    Ok(CheckResult {
        name: "quadratic form vs Fejér convolution".into(),
        cases,
        max_error: worst,
        tolerance: 1e-6,
    })
}

/// `n⁻¹ Σ_k Ĩ(ω_k)/f_θ(ω_k)` with the true-model complete periodogram equals
/// `n⁻¹ X'Γ_θ⁻¹X`.
pub fn quadratic_form_identity(ns: &[usize], per_n: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for &n in ns {
        for _ in 0..per_n {
            let model = random_ar(&mut rng)?;
            let model = ArModel::new(model.coeffs().to_vec(), rng.random_range(0.5..2.0))?;
            let ts = random_series(&mut rng, n)?;
            let grid = FrequencyGrid::fourier(n)?;
            let pg = complete_periodogram(&ts, &ModelSource::Explicit(model.clone()), &grid, None)?;
            let family = ArFamily::new(model.order());
            let theta = family.theta_from_model(&model)?;
            let a = spectral_mean(
                |w| Complex64::new(1.0 / family.density(&theta, w), 0.0),
                &pg,
                &SpectralMeanConfig::fourier_sum(),
            )?;
            let gamma: DMatrix<f64> = toeplitz(&population_cov(model.autocovariances(n))?, n)?;
            let x = DVector::from_column_slice(ts.values());
            let chol = gamma
                .cholesky()
                .ok_or_else(|| Error::numerical("covariance matrix is not positive definite"))?;
            let q = x.dot(&chol.solve(&x)) / n as f64;
            worst = worst.max((a - Complex64::new(q, 0.0)).norm() / q.abs());
            cases += 1;
        }
    }
    Ok(CheckResult {
        name: "Whittle quadratic-form identity".into(),
        cases,
        max_error: worst,
        tolerance: 1e-7,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_unbiasedness_case() {
        let r = unbiasedness(&[0.9], &[8], false).unwrap();
        assert!(r.passed(), "{r:?}");
        let r = unbiasedness(&[0.9], &[20], true).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn suite_names_parse() {
        assert_eq!("all".parse::<Suite>().unwrap(), Suite::All);
        assert!("nope".parse::<Suite>().is_err());
    }
}

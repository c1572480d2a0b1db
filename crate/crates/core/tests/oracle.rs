use std::f64::consts::PI;

use cpgram::oracle::{
    complete_dft_form, complete_dft_form_bruteforce, dft_form, expected_quadratic, fejer_expected_periodogram,
    finite_predictor_coeffs, predictive_dft_bruteforce, DEFAULT_HORIZON,
};
use cpgram::simulation::{builtin_model, BuiltinModel};
use cpgram::{predictive_dft, Complex64, CovarianceSequence, FrequencyGrid, TimeSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn m1_cov(lambda: f64, lags: usize) -> CovarianceSequence {
    let m = builtin_model(BuiltinModel::M1(lambda)).unwrap();
    CovarianceSequence::population(m.autocovariances(lags)).unwrap()
}

#[test]
fn ar1_two_point_example() {
    let cov = CovarianceSequence::population((0..=200).map(|r| 0.5f64.powi(r) / 0.75).collect()).unwrap();
    let ts = TimeSeries::new(vec![1.0, 1.0]).unwrap();
    let g = FrequencyGrid::explicit(vec![0.0]).unwrap();
    let brute = predictive_dft_bruteforce(&ts, &cov, &g, 60).unwrap();
    assert!((brute[0].re - 2f64.sqrt()).abs() < 1e-6);
    let model = cpgram::ArModel::new(vec![0.5], 1.0).unwrap();
    assert!((predictive_dft(&ts, &model, &g).unwrap()[0] - brute[0]).norm() < 1e-10);
}

#[test]
fn m1_closed_form_matches_bruteforce() {
    let cov = m1_cov(0.7, 12 + 2 * DEFAULT_HORIZON);
    let model = builtin_model(BuiltinModel::M1(0.7)).unwrap().as_ar().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ts = TimeSeries::new((0..12).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()).unwrap();
    let g = FrequencyGrid::uniform(16).unwrap();
    let a = predictive_dft(&ts, &model, &g).unwrap();
    let b = predictive_dft_bruteforce(&ts, &cov, &g, DEFAULT_HORIZON).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).norm() < 1e-8);
    }
}

#[test]
fn predictors_preserve_covariances() {
    let n = 10;
    let cov = m1_cov(0.9, 60);
    for tau in [-5isize, 0, 11, 14] {
        let phi = finite_predictor_coeffs(&cov, n, tau).unwrap();
        for t in 1..=n as isize {
            // cov(X_t, X̂_τ) = Σ_s φ_s c(t − s)
            let c: f64 = (1..=n as isize).map(|s| phi.weights[(s - 1) as usize] * cov.at(t - s).unwrap()).sum();
            let target = cov.at(t - tau).unwrap();
            assert!((c - target).abs() <= 1e-9 * cov.at(0).unwrap(), "τ={tau} t={t}");
        }
    }
}

#[test]
fn complete_forms_agree() {
    let n = 10;
    let model = builtin_model(BuiltinModel::M1(0.7)).unwrap().as_ar().unwrap();
    let cov = m1_cov(0.7, n + 2 * DEFAULT_HORIZON);
    for w in [0.3, PI / 2.0, 2.0] {
        let a = complete_dft_form(&model, n, w).unwrap();
        let b = complete_dft_form_bruteforce(&cov, n, w, DEFAULT_HORIZON).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-8);
        }
    }
}

#[test]
fn white_noise_periodogram_mean_is_variance() {
    let cov = CovarianceSequence::population(vec![2.5, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
    let form = dft_form(6, 1.1, None);
    let q = expected_quadratic(&form, &form, &cov).unwrap();
    assert!((q.mean - Complex64::new(2.5, 0.0)).norm() < 1e-12);
}

#[test]
fn fejer_of_constant_density_is_constant() {
    for w in [0.0, 1.0, PI] {
        assert!((fejer_expected_periodogram(|_| 3.0, 17, w, 512).unwrap() - 3.0).abs() < 1e-10);
    }
    assert!(fejer_expected_periodogram(|_| 1.0, 17, 0.0, 100).is_err());
}

#[test]
fn leakage_shrinks_with_n() {
    let m = builtin_model(BuiltinModel::M1(0.9)).unwrap();
    let f = m.density(PI / 2.0);
    let gap = |n| (fejer_expected_periodogram(|l| m.density(l), n, PI / 2.0, 20_000).unwrap() - f).abs();
    assert!(gap(80) < gap(20));
    assert!(gap(320) < gap(80));
}

#[test]
fn monte_carlo_agrees_with_trace_formula() {
    let n = 8;
    let model = builtin_model(BuiltinModel::M1(0.9)).unwrap();
    let cov = m1_cov(0.9, n);
    let w = 2.0 * PI * 2.0 / n as f64;
    let left = complete_dft_form(&model.as_ar().unwrap(), n, w).unwrap();
    let right = dft_form(n, w, None);
    let q = expected_quadratic(&left, &right, &cov).unwrap();
    let reps = 100_000;
    let mut sum = Complex64::new(0.0, 0.0);
    for b in 0..reps {
        let ts = cpgram::simulation::simulate_arma(&model, n, 1000 + b).unwrap();
        let x = ts.values();
        let v: Complex64 = left.iter().zip(x).map(|(c, x)| c * x).sum();
        let u: Complex64 = right.iter().zip(x).map(|(c, x)| c * x).sum();
        sum += v * u.conj();
    }
    let mean = sum / reps as f64;
    let se = (q.gaussian_variance / reps as f64).sqrt();
    assert!((mean - q.mean).norm() < 4.0 * se, "mean {mean}, expected {}, se {se}", q.mean);
}

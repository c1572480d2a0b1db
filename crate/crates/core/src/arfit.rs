//! Autoregressive model fitting and ARMA expansions.
//!
//! Coefficients follow the convention `X_t = Σ_j a_j X_{t-j} + ε_t`, so the
//! AR polynomial is `1 − Σ_j a_j z^j` and the transfer function is
//! `a_p(ω) = 1 − Σ_j a_j e^{-ijω}`. Spectral densities carry no `2π`
//! factor: `f(ω) = Σ_r c(r) e^{irω}`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::series::{CovarianceSequence, FrequencyGrid, TimeSeries};
use crate::spectral::sample_autocov;

/// A causal AR(p) model. `coeffs` is empty for white noise.
#[derive(Debug, Clone, PartialEq)]
pub struct ArModel {
    coeffs: Vec<f64>,
    sigma2: f64,
}

impl ArModel {
    pub fn new(coeffs: Vec<f64>, sigma2: f64) -> Result<Self> {
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::domain("innovation variance must be positive"));
        }
        if coeffs.iter().any(|a| !a.is_finite()) {
            return Err(Error::domain("non-finite AR coefficient"));
        }
        if reflection_coefficients(&coeffs).is_none() {
            return Err(Error::domain("AR polynomial is not causal"));
        }
        Ok(Self { coeffs, sigma2 })
    }

    pub fn white_noise(sigma2: f64) -> Result<Self> {
        Self::new(Vec::new(), sigma2)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Partial autocorrelations obtained by running the Levinson recursion backwards.
    pub fn reflection_coefficients(&self) -> Vec<f64> {
        reflection_coefficients(&self.coeffs).expect("validated at construction")
    }

    /// `a_p(ω) = 1 − Σ_j a_j e^{-ijω}`.
    pub fn transfer(&self, omega: f64) -> Complex64 {
        ar_transfer(&self.coeffs, omega)
    }

    pub fn density(&self, omega: f64) -> f64 {
        self.sigma2 / self.transfer(omega).norm_sqr()
    }

    /// Population autocovariances `c(0..=max_lag)`.
    pub fn autocovariances(&self, max_lag: usize) -> Vec<f64> {
        self.to_arma().autocovariances(max_lag)
    }

    pub fn to_arma(&self) -> ArmaModel {
        ArmaModel {
            ar: self.coeffs.clone(),
            ma: Vec::new(),
            sigma2: self.sigma2,
        }
    }
}

pub(crate) fn ar_transfer(coeffs: &[f64], omega: f64) -> Complex64 {
    let step = Complex64::cis(-omega);
    let mut z = step;
    let mut acc = Complex64::new(1.0, 0.0);
    for &a in coeffs {
        acc -= z * a;
        z *= step;
    }
    acc
}

/// Step-down recursion. Returns `None` when a reflection coefficient has
/// magnitude `>= 1`, i.e. the polynomial `1 − Σ a_j z^j` has a root on or
/// inside the unit circle.
fn reflection_coefficients(coeffs: &[f64]) -> Option<Vec<f64>> {
    let mut a = coeffs.to_vec();
    let mut ks = vec![0.0; a.len()];
    for p in (1..=a.len()).rev() {
        let k = a[p - 1];
        if !(k.abs() < 1.0) {
            return None;
        }
        ks[p - 1] = k;
        let denom = 1.0 - k * k;
        let prev: Vec<f64> = (1..p).map(|j| (a[j - 1] + k * a[p - j - 1]) / denom).collect();
        a.truncate(p - 1);
        a.copy_from_slice(&prev);
    }
    Some(ks)
}

/// An ARMA(P, Q) model `φ(B) X_t = ψ(B) ε_t` with
/// `φ(z) = 1 − Σ φ_j z^j` and `ψ(z) = 1 + Σ ψ_j z^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmaModel {
    ar: Vec<f64>,
    ma: Vec<f64>,
    sigma2: f64,
}

impl ArmaModel {
    /// Requires a causal AR part; MA roots may lie on but not inside the unit circle.
    pub fn new(ar: Vec<f64>, ma: Vec<f64>, sigma2: f64) -> Result<Self> {
        ArModel::new(ar.clone(), sigma2)?;
        if ma.iter().any(|b| !b.is_finite()) {
            return Err(Error::domain("non-finite MA coefficient"));
        }
        if ma_inverse_root_radius(&ma) > 1.0 + 1e-10 {
            return Err(Error::domain("MA polynomial has a root inside the unit circle"));
        }
        Ok(Self { ar, ma, sigma2 })
    }

    pub fn ar(&self) -> &[f64] {
        &self.ar
    }

    pub fn ma(&self) -> &[f64] {
        &self.ma
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// The model as a pure AR, if it has no MA part.
    pub fn as_ar(&self) -> Option<ArModel> {
        self.ma
            .is_empty()
            .then(|| ArModel::new(self.ar.clone(), self.sigma2).expect("validated"))
    }

    /// `σ² |ψ(e^{-iω})|² / |φ(e^{-iω})|²`.
    pub fn density(&self, omega: f64) -> f64 {
        let ar = ar_transfer(&self.ar, omega);
        let step = Complex64::cis(-omega);
        let mut z = step;
        let mut ma = Complex64::new(1.0, 0.0);
        for &b in &self.ma {
            ma += z * b;
            z *= step;
        }
        self.sigma2 * ma.norm_sqr() / ar.norm_sqr()
    }

    /// MA(∞) weights `ψ̃_0 = 1, ψ̃_1, ...`, truncated once the tail is below `1e-14`.
    pub fn psi_weights(&self) -> Vec<f64> {
        let p = self.ar.len();
        let q = self.ma.len();
        let window = p.max(1);
        let mut w = vec![1.0];
        let mut small_run = 0;
        let cap = 1_000_000;
        for j in 1..cap {
            let mut v = if j <= q { self.ma[j - 1] } else { 0.0 };
            for i in 1..=p.min(j) {
                v += self.ar[i - 1] * w[j - i];
            }
            w.push(v);
            if j > q && v.abs() < 1e-14 {
                small_run += 1;
                if small_run >= window {
                    break;
                }
            } else {
                small_run = 0;
            }
        }
        w
    }

    /// Population autocovariances `c(0..=max_lag)` from the MA(∞) weights.
    pub fn autocovariances(&self, max_lag: usize) -> Vec<f64> {
        let w = self.psi_weights();
        (0..=max_lag)
            .map(|r| {
                if r >= w.len() {
                    0.0
                } else {
                    self.sigma2 * w[..w.len() - r].iter().zip(&w[r..]).map(|(a, b)| a * b).sum::<f64>()
                }
            })
            .collect()
    }
}

/// Largest modulus of the reciprocal MA roots (eigenvalues of the companion matrix).
fn ma_inverse_root_radius(ma: &[f64]) -> f64 {
    let q = ma.len();
    if q == 0 {
        return 0.0;
    }
    // Reciprocal roots of 1 + Σ ψ_j z^j are the roots of z^q + ψ_1 z^{q-1} + ... + ψ_q.
    let mut companion = DMatrix::<f64>::zeros(q, q);
    for j in 0..q {
        companion[(0, j)] = -ma[j];
    }
    for i in 1..q {
        companion[(i, i - 1)] = 1.0;
    }
    companion
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Levinson-Durbin solution of `R_p a = r_p` for every order `0..=p`.
///
/// Entry `k` of the result is the best-fitting AR(k) model with its
/// prediction-error variance.
pub fn levinson_durbin_path(cov: &CovarianceSequence, p: usize) -> Result<Vec<ArModel>> {
    let c = cov.lags();
    if c.len() < p + 1 {
        return Err(Error::domain(format!(
            "need {} autocovariances for order {p}, got {}",
            p + 1,
            c.len()
        )));
    }
    if !(c[0] > 0.0) {
        return Err(Error::numerical("covariance not positive definite (c(0) <= 0)"));
    }
    let mut a: Vec<f64> = Vec::with_capacity(p);
    let mut v = c[0];
    let mut path = Vec::with_capacity(p + 1);
    path.push(ArModel {
        coeffs: Vec::new(),
        sigma2: v,
    });
    for m in 1..=p {
        let mut num = c[m];
        for j in 1..m {
            num -= a[j - 1] * c[m - j];
        }
        let k = num / v;
        if !(k.abs() < 1.0) {
            return Err(Error::numerical(format!(
                "covariance not positive definite (reflection coefficient {k} at order {m})"
            )));
        }
        let prev = a.clone();
        for j in 1..m {
            a[j - 1] = prev[j - 1] - k * prev[m - j - 1];
        }
        a.push(k);
        v *= 1.0 - k * k;
        if !(v > 0.0) {
            return Err(Error::numerical("covariance not positive definite"));
        }
        path.push(ArModel {
            coeffs: a.clone(),
            sigma2: v,
        });
    }
    Ok(path)
}

/// Best-fitting AR(p) coefficients for the given autocovariances.
pub fn levinson_durbin(cov: &CovarianceSequence, p: usize) -> Result<ArModel> {
    Ok(levinson_durbin_path(cov, p)?.pop().expect("path has p + 1 entries"))
}

/// Yule-Walker estimate: biased sample autocovariances fed to Levinson-Durbin.
pub fn yule_walker_fit(ts: &TimeSeries, p: usize) -> Result<ArModel> {
    if p >= ts.len() {
        return Err(Error::domain(format!("order {p} must be below n = {}", ts.len())));
    }
    let cov = sample_autocov(ts, p)?;
    if cov.lags()[0] == 0.0 {
        return Err(Error::numerical("constant series: sample variance is zero"));
    }
    levinson_durbin(&cov, p)
}

/// Result of AIC order selection.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderSelection {
    pub chosen_p: usize,
    /// Candidate orders `1..=max_order`.
    pub max_order: usize,
    /// `aic_values[p - 1]` is `AIC(p)`.
    pub aic_values: Vec<f64>,
    pub model: ArModel,
}

impl OrderSelection {
    pub fn candidate_range(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.max_order
    }
}

/// Default maximum candidate order `floor(n^0.4)`, clamped to `[1, n − 2]`.
pub fn default_max_order(n: usize) -> usize {
    let k = ((n as f64).powf(0.4) + 1e-9).floor() as usize;
    k.clamp(1, n.saturating_sub(2).max(1))
}

/// Chooses the AR order in `1..=K_n` minimising `log σ̂²_p + 2p/n`.
///
/// Every candidate's residual variance uses the same window
/// `t = K_n + 1..n`, so all regressors are observed.
pub fn aic_select(ts: &TimeSeries, max_order: Option<usize>) -> Result<OrderSelection> {
    let n = ts.len();
    if n < 4 {
        return Err(Error::domain(format!("AIC selection needs n >= 4, got {n}")));
    }
    let k_n = max_order.unwrap_or_else(|| default_max_order(n));
    if k_n == 0 || k_n >= n - 1 {
        return Err(Error::domain(format!(
            "maximum order {k_n} must lie in 1..={}",
            n - 2
        )));
    }
    let cov = sample_autocov(ts, k_n)?;
    if cov.lags()[0] == 0.0 {
        return Err(Error::numerical("constant series: sample variance is zero"));
    }
    let path = levinson_durbin_path(&cov, k_n)?;
    let x = ts.values();
    let denom = (n - k_n) as f64;
    let aic_values: Vec<f64> = (1..=k_n)
        .map(|p| {
            let a = path[p].coeffs();
            let rss: f64 = (k_n..n)
                .map(|t| {
                    let pred: f64 = a.iter().enumerate().map(|(j, aj)| aj * x[t - j - 1]).sum();
                    (x[t] - pred).powi(2)
                })
                .sum();
            (rss / denom).ln() + 2.0 * p as f64 / n as f64
        })
        .collect();
    let mut best = 0;
    for (i, v) in aic_values.iter().enumerate() {
        if *v < aic_values[best] {
            best = i;
        }
    }
    let chosen_p = best + 1;
    Ok(OrderSelection {
        chosen_p,
        max_order: k_n,
        aic_values,
        model: path[chosen_p].clone(),
    })
}

/// Transfer function `a_p(ω)` and spectral density `σ²/|a_p(ω)|²` on a grid.
pub fn ar_spectral(model: &ArModel, grid: &FrequencyGrid) -> (Vec<Complex64>, Vec<f64>) {
    let transfer: Vec<Complex64> = grid.frequencies().iter().map(|&w| model.transfer(w)).collect();
    let density = transfer.iter().map(|a| model.sigma2 / a.norm_sqr()).collect();
    (transfer, density)
}

/// AR(∞)/MA(∞) expansion of an invertible ARMA model.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmaExpansion {
    /// `a_1..a_M` with `φ(z)/ψ(z) = 1 − Σ a_j z^j`.
    pub ar_inf: Vec<f64>,
    /// `b_1..b_M` with `ψ(z)/φ(z) = 1 + Σ b_j z^j`.
    pub ma_inf: Vec<f64>,
    /// `c(0)..c(M)`.
    pub autocov: Vec<f64>,
    model: ArmaModel,
}

impl ArmaExpansion {
    pub fn density(&self, omega: f64) -> f64 {
        self.model.density(omega)
    }

    pub fn truncation(&self) -> usize {
        self.ar_inf.len()
    }
}

const MAX_TRUNCATION: usize = 5000;

/// Expands an ARMA model into AR(∞) and MA(∞) coefficient sequences.
///
/// With `truncation = None` the length is the smallest `M > P` whose last
/// `max(Q, 1)` AR(∞) coefficients are all below `1e-12`, capped at 5000.
pub fn arma_expand(model: &ArmaModel, truncation: Option<usize>) -> Result<ArmaExpansion> {
    if truncation == Some(0) {
        return Err(Error::domain("truncation length must be at least 1"));
    }
    if ma_inverse_root_radius(&model.ma) >= 1.0 - 1e-10 {
        return Err(Error::domain("AR(∞) expansion requires invertibility"));
    }
    let p = model.ar.len();
    let q = model.ma.len();
    let limit = truncation.unwrap_or(MAX_TRUNCATION);
    let window = q.max(1);

    // π(z) = φ(z)/ψ(z) with π_0 = 1; a_j = −π_j.
    let mut pi = vec![1.0];
    for j in 1..=limit {
        let mut v = if j <= p { -model.ar[j - 1] } else { 0.0 };
        for i in 1..=q.min(j) {
            v -= model.ma[i - 1] * pi[j - i];
        }
        pi.push(v);
        if truncation.is_none() && j > p && j >= window {
            if pi[j + 1 - window..=j].iter().all(|c| c.abs() < 1e-12) {
                break;
            }
        }
    }
    let m = pi.len() - 1;
    let ar_inf: Vec<f64> = pi[1..].iter().map(|c| -c).collect();

    let mut b = vec![1.0];
    for j in 1..=m {
        let mut v = if j <= q { model.ma[j - 1] } else { 0.0 };
        for i in 1..=p.min(j) {
            v += model.ar[i - 1] * b[j - i];
        }
        b.push(v);
    }
    Ok(ArmaExpansion {
        ar_inf,
        ma_inf: b[1..].to_vec(),
        autocov: model.autocovariances(m),
        model: model.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn m1(lambda: f64) -> ArModel {
        ArModel::new(vec![0.0, -lambda * lambda], 1.0).unwrap()
    }

    #[test]
    fn causality_check() {
        assert!(ArModel::new(vec![1.0], 1.0).is_err());
        assert!(ArModel::new(vec![0.5, 0.6], 1.0).is_err());
        assert!(ArModel::new(vec![0.5, -0.3], 1.0).is_ok());
        assert!(ArModel::new(vec![0.5], 0.0).is_err());
    }

    #[test]
    fn levinson_one_by_one() {
        let cov = CovarianceSequence::population(vec![1.0, 0.5]).unwrap();
        let m = levinson_durbin(&cov, 1).unwrap();
        assert_relative_eq!(m.coeffs()[0], 0.5);
        assert_relative_eq!(m.sigma2(), 0.75);
    }

    #[test]
    fn levinson_m1_population() {
        let c0 = 1.0 / (1.0 - 0.9f64.powi(4));
        let cov = CovarianceSequence::population(vec![c0, 0.0, -0.81 * c0]).unwrap();
        let m = levinson_durbin(&cov, 2).unwrap();
        assert!(m.coeffs()[0].abs() < 1e-12);
        assert_relative_eq!(m.coeffs()[1], -0.81, epsilon = 1e-12);
        assert_relative_eq!(m.sigma2(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn levinson_white_noise() {
        let cov = CovarianceSequence::population(vec![1.0, 0.0, 0.0]).unwrap();
        let m = levinson_durbin(&cov, 2).unwrap();
        assert_eq!(m.coeffs(), &[0.0, 0.0]);
        assert_eq!(m.sigma2(), 1.0);
    }

    #[test]
    fn levinson_rejects_non_pd() {
        let cov = CovarianceSequence::population(vec![1.0, 1.0, 1.0]).unwrap();
        let err = levinson_durbin(&cov, 2).unwrap_err();
        assert!(err.is_numerical());
        let cov = CovarianceSequence::population(vec![1.0]).unwrap();
        assert!(levinson_durbin(&cov, 2).is_err());
    }

    #[test]
    fn yule_walker_order_zero_and_constant() {
        let ts = TimeSeries::new(vec![1.0, -2.0, 0.5, 0.5]).unwrap();
        let m = yule_walker_fit(&ts, 0).unwrap();
        assert!(m.coeffs().is_empty());
        assert_relative_eq!(m.sigma2(), (1.0 + 4.0 + 0.25 + 0.25) / 4.0);
        let zero = TimeSeries::new(vec![0.0; 5]).unwrap();
        assert!(yule_walker_fit(&zero, 1).unwrap_err().is_numerical());
        assert!(yule_walker_fit(&ts, 4).is_err());
    }

    #[test]
    fn default_order_bounds() {
        assert_eq!(default_max_order(20), 3);
        assert_eq!(default_max_order(300), 9);
        assert_eq!(default_max_order(4), 1);
        assert_eq!(default_max_order(32), 4);
    }

    #[test]
    fn aic_rejects_tiny_or_bad_orders() {
        let ts = TimeSeries::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert!(aic_select(&ts, None).is_err());
        let ts = TimeSeries::new(vec![1.0, -2.0, 3.0, 0.5, -1.0]).unwrap();
        assert!(aic_select(&ts, Some(4)).is_err());
        assert!(aic_select(&ts, Some(0)).is_err());
        let sel = aic_select(&ts, Some(3)).unwrap();
        assert_eq!(sel.aic_values.len(), 3);
        assert_eq!(sel.candidate_range(), 1..=3);
    }

    #[test]
    fn m1_density_values() {
        let m = m1(0.9);
        assert_relative_eq!(m.density(PI / 2.0), 1.0 / 0.19f64.powi(2), epsilon = 1e-12);
        assert_relative_eq!(m.density(0.0), 1.0 / 1.81f64.powi(2), epsilon = 1e-12);
        let g = FrequencyGrid::fourier(8).unwrap();
        let (_, d) = ar_spectral(&ArModel::white_noise(1.0).unwrap(), &g);
        assert!(d.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn arma_ar1_passthrough() {
        let model = ArmaModel::new(vec![0.5], vec![], 2.0).unwrap();
        let e = arma_expand(&model, Some(10)).unwrap();
        assert_eq!(e.ar_inf[0], 0.5);
        assert!(e.ar_inf[1..].iter().all(|&a| a == 0.0));
        for r in 0..=10 {
            assert_relative_eq!(e.autocov[r], 2.0 * 0.5f64.powi(r as i32) / 0.75, epsilon = 1e-13);
        }
    }

    #[test]
    fn arma11_ar_inf_recursion() {
        let model = ArmaModel::new(vec![0.5], vec![0.4], 1.0).unwrap();
        let e = arma_expand(&model, Some(20)).unwrap();
        assert_relative_eq!(e.ar_inf[0], 0.9, epsilon = 1e-14);
        assert_relative_eq!(e.ar_inf[1], -0.36, epsilon = 1e-14);
        for j in 2..20 {
            assert_relative_eq!(e.ar_inf[j], -0.4 * e.ar_inf[j - 1], epsilon = 1e-14);
        }
        // ψ(z)/φ(z) = (1 + 0.4z)/(1 − 0.5z): b_1 = 0.9, b_j = 0.5 b_{j-1}.
        assert_relative_eq!(e.ma_inf[0], 0.9, epsilon = 1e-14);
        assert_relative_eq!(e.ma_inf[3], 0.9 * 0.125, epsilon = 1e-14);
    }

    #[test]
    fn ma1_autocovariance() {
        let model = ArmaModel::new(vec![], vec![0.4], 1.0).unwrap();
        let e = arma_expand(&model, Some(5)).unwrap();
        assert_relative_eq!(e.autocov[0], 1.16, epsilon = 1e-14);
        assert_relative_eq!(e.autocov[1], 0.4, epsilon = 1e-14);
        assert!(e.autocov[2..].iter().all(|&c| c == 0.0));
    }

    #[test]
    fn expansion_requires_invertibility() {
        let model = ArmaModel::new(vec![0.5], vec![1.0], 1.0).unwrap();
        let err = arma_expand(&model, None).unwrap_err();
        assert!(matches!(err, Error::Domain(m) if m.contains("invertibility")));
        assert!(ArmaModel::new(vec![], vec![2.5], 1.0).is_err());
    }

    #[test]
    fn default_truncation_is_tail_based() {
        let pure = ArmaModel::new(vec![0.0, -0.81], vec![], 1.0).unwrap();
        let e = arma_expand(&pure, None).unwrap();
        assert_eq!(e.truncation(), 3);
        let mixed = ArmaModel::new(vec![0.5], vec![0.4], 1.0).unwrap();
        let e = arma_expand(&mixed, None).unwrap();
        assert!(e.ar_inf.last().unwrap().abs() < 1e-12);
        assert!(e.ar_inf[e.truncation() - 2].abs() >= 1e-12);
    }

    #[test]
    fn reflection_round_trip() {
        let m = ArModel::new(vec![0.3, -0.2, 0.1], 1.0).unwrap();
        let ks = m.reflection_coefficients();
        assert_relative_eq!(ks[2], 0.1);
        let cov = CovarianceSequence::population(m.autocovariances(3)).unwrap();
        let path = levinson_durbin_path(&cov, 3).unwrap();
        for (p, k) in ks.iter().enumerate() {
            assert_relative_eq!(path[p + 1].coeffs()[p], *k, epsilon = 1e-10);
        }
    }
}

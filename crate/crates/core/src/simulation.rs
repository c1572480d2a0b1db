//! Gaussian ARMA simulation and the Monte Carlo experiment runner.
//!
//! Replication `b` of an experiment draws its series from the generator
//! seeded with [`split_seed`]`(seed, b)`, and per-replication results are
//! reduced in replication order, so the output does not depend on how
//! replications are scheduled across threads.

use std::fmt::Write as _;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::arfit::{ArModel, ArmaModel};
use crate::complete::threshold_real;
use crate::error::{Error, Result};
use crate::estimator::EstimatorKind;
use crate::integrated::{acf_from_periodogram, smooth_periodogram, spectral_window, SpectralMeanConfig, WindowKind};
use crate::series::{FrequencyGrid, TimeSeries};
use crate::spectral::PeriodogramEstimate;

/// SplitMix64 finaliser applied to `seed + (index + 1) · 0x9E3779B97F4A7C15`.
pub fn split_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws `n` observations of a Gaussian ARMA process.
///
/// Innovations are standard normal draws from ChaCha8 seeded with `seed`,
/// scaled by `σ`. The recursion starts from zeros and the first
/// `max(1000, 50·(P + Q))` values are discarded.
pub fn simulate_arma(model: &ArmaModel, n: usize, seed: u64) -> Result<TimeSeries> {
    if n == 0 {
        return Err(Error::domain("simulation length must be at least 1"));
    }
    let ar = model.ar();
    let ma = model.ma();
    let burn = 1000.max(50 * (ar.len() + ma.len()));
    let total = burn + n;
    let sigma = model.sigma2().sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps: Vec<f64> = (0..total)
        .map(|_| sigma * Distribution::<f64>::sample(&StandardNormal, &mut rng))
        .collect::<Vec<f64>>();
    let mut x = vec![0.0; total];
    for t in 0..total {
        let mut v = eps[t];
        for (j, a) in ar.iter().enumerate() {
            if t > j {
                v += a * x[t - j - 1];
            }
        }
        for (j, b) in ma.iter().enumerate() {
            if t > j {
                v += b * eps[t - j - 1];
            }
        }
        x[t] = v;
    }
    TimeSeries::new(x.split_off(burn))
}

/// The two simulation models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltinModel {
    /// AR(2) with `φ(z) = (1 − λ e^{iπ/2} z)(1 − λ e^{−iπ/2} z) = 1 + λ² z²`.
    M1(f64),
    /// ARMA(3, 2) with `φ(z) = (1 − 0.7z)(1 − 0.9e^{i}z)(1 − 0.9e^{−i}z)` and
    /// `ψ(z) = 1 + 0.5z + 0.5z²`.
    M2,
}

pub fn builtin_model(which: BuiltinModel) -> Result<ArmaModel> {
    match which {
        BuiltinModel::M1(lambda) => {
            if !(lambda > 0.0 && lambda < 1.0) {
                return Err(Error::domain(format!("M1 needs λ in (0, 1), got {lambda}")));
            }
            ArmaModel::new(vec![0.0, -lambda * lambda], vec![], 1.0)
        }
        BuiltinModel::M2 => {
            // (1 − 0.7z)(1 − 1.8 cos(1) z + 0.81 z²)
            let c = 1.0f64.cos();
            let ar = vec![0.7 + 1.8 * c, -(0.81 + 1.26 * c), 0.567];
            ArmaModel::new(ar, vec![0.5, 0.5], 1.0)
        }
    }
}

/// Model used by an experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelChoice {
    Builtin(BuiltinModel),
    Custom(ArmaModel),
}

impl ModelChoice {
    pub fn arma(&self) -> Result<ArmaModel> {
        match self {
            ModelChoice::Builtin(b) => builtin_model(*b),
            ModelChoice::Custom(m) => Ok(m.clone()),
        }
    }
}

/// A Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub model: ModelChoice,
    pub n: usize,
    pub replications: usize,
    pub estimators: Vec<EstimatorKind>,
    /// Smoothing windows applied on top of each estimator (all with half-width `m`).
    pub smoothing: Vec<(WindowKind, usize)>,
    /// ACF metrics over lags `1..=L`.
    pub acf_lags: Option<usize>,
    pub seed: u64,
    /// Real-part threshold for the complete variants.
    pub threshold: f64,
    /// Taper width; `None` means `ceil(n/10)`.
    pub taper_d: Option<usize>,
    /// Midpoint cells for the ACF integrals.
    pub riemann_points: usize,
    /// Subtract the sample mean before estimating. Off by default: the
    /// simulated processes have known mean zero, and centering forces the
    /// estimates at frequency zero to vanish.
    pub center: bool,
}

impl ExperimentSpec {
    pub fn new(model: ModelChoice, n: usize, replications: usize, estimators: Vec<EstimatorKind>, seed: u64) -> Self {
        Self {
            model,
            n,
            replications,
            estimators,
            smoothing: Vec::new(),
            acf_lags: None,
            seed,
            threshold: 1e-3,
            taper_d: None,
            riemann_points: 500,
            center: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::domain("need at least one replication"));
        }
        if self.n < 4 {
            return Err(Error::domain("experiments need n >= 4"));
        }
        if self.estimators.is_empty() {
            return Err(Error::domain("estimator list is empty"));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::domain("threshold must be positive"));
        }
        if let Some(l) = self.acf_lags {
            if l == 0 || l >= self.n {
                return Err(Error::domain("acf_lags must lie in 1..n"));
            }
        }
        for (_, m) in &self.smoothing {
            if *m == 0 || 2 * m >= self.n {
                return Err(Error::domain("window half-width must lie in 1..n/2"));
            }
        }
        let arma = self.model.arma()?;
        if self.estimators.contains(&EstimatorKind::CompleteTrue) && arma.as_ar().is_none() {
            return Err(Error::domain(
                "complete-true needs a finite-order AR model; this model has an MA part",
            ));
        }
        Ok(())
    }

    /// Serialises to the `key = value` configuration format.
    pub fn to_config(&self) -> String {
        let mut s = String::new();
        match &self.model {
            ModelChoice::Builtin(BuiltinModel::M1(l)) => {
                let _ = writeln!(s, "model = m1\nlambda = {l}");
            }
            ModelChoice::Builtin(BuiltinModel::M2) => {
                let _ = writeln!(s, "model = m2");
            }
            ModelChoice::Custom(m) => {
                let _ = writeln!(
                    s,
                    "model = arma\nar = {}\nma = {}\nsigma2 = {}",
                    join(m.ar()),
                    join(m.ma()),
                    m.sigma2()
                );
            }
        }
        let names: Vec<&str> = self.estimators.iter().map(|e| e.name()).collect();
        let _ = writeln!(s, "n = {}\nB = {}\nseed = {}", self.n, self.replications, self.seed);
        let _ = writeln!(s, "estimators = {}", names.join(", "));
        if let Some((_, m)) = self.smoothing.first() {
            let windows: Vec<&str> = self.smoothing.iter().map(|(w, _)| w.name()).collect();
            let _ = writeln!(s, "window = {}\nm = {m}", windows.join(", "));
        }
        let _ = writeln!(s, "threshold = {}", self.threshold);
        if let Some(d) = self.taper_d {
            let _ = writeln!(s, "taper_d = {d}");
        }
        if let Some(l) = self.acf_lags {
            let _ = writeln!(s, "acf_lags = {l}");
        }
        let _ = writeln!(s, "riemann_points = {}", self.riemann_points);
        if self.center {
            let _ = writeln!(s, "center = true");
        }
        s
    }

    /// Parses the `key = value` configuration format. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn from_config(text: &str) -> Result<Self> {
        let mut kv = std::collections::BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::domain(format!("line {}: expected 'key = value'", lineno + 1)))?;
            if kv.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(Error::domain(format!("line {}: duplicate key '{}'", lineno + 1, k.trim())));
            }
        }
        let take = |kv: &mut std::collections::BTreeMap<String, String>, key: &str| kv.remove(key);
        let required = |kv: &mut std::collections::BTreeMap<String, String>, key: &str| {
            take(kv, key).ok_or_else(|| Error::domain(format!("missing key '{key}'")))
        };
        let model_name = required(&mut kv, "model")?;
        let model = match model_name.as_str() {
            "m1" => ModelChoice::Builtin(BuiltinModel::M1(parse_num(&required(&mut kv, "lambda")?, "lambda")?)),
            "m2" => ModelChoice::Builtin(BuiltinModel::M2),
            "arma" => {
                let ar = parse_list(&take(&mut kv, "ar").unwrap_or_default())?;
                let ma = parse_list(&take(&mut kv, "ma").unwrap_or_default())?;
                let sigma2 = match take(&mut kv, "sigma2") {
                    Some(v) => parse_num(&v, "sigma2")?,
                    None => 1.0,
                };
                ModelChoice::Custom(ArmaModel::new(ar, ma, sigma2)?)
            }
            other => return Err(Error::domain(format!("unknown model '{other}'"))),
        };
        let n = parse_num(&required(&mut kv, "n")?, "n")?;
        let replications = parse_num(&required(&mut kv, "B")?, "B")?;
        let seed = parse_num(&required(&mut kv, "seed")?, "seed")?;
        let estimators = required(&mut kv, "estimators")?
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.parse())
            .collect::<Result<Vec<EstimatorKind>>>()?;
        let mut spec = ExperimentSpec::new(model, n, replications, estimators, seed);
        if let Some(w) = take(&mut kv, "window") {
            let m: usize = parse_num(&required(&mut kv, "m")?, "m")?;
            spec.smoothing = w
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| Ok((s.parse::<WindowKind>()?, m)))
                .collect::<Result<Vec<_>>>()?;
        } else if kv.contains_key("m") {
            return Err(Error::domain("'m' given without 'window'"));
        }
        if let Some(v) = take(&mut kv, "threshold") {
            spec.threshold = parse_num(&v, "threshold")?;
        }
        if let Some(v) = take(&mut kv, "taper_d") {
            spec.taper_d = Some(parse_num(&v, "taper_d")?);
        }
        if let Some(v) = take(&mut kv, "acf_lags") {
            spec.acf_lags = Some(parse_num(&v, "acf_lags")?);
        }
        if let Some(v) = take(&mut kv, "riemann_points") {
            spec.riemann_points = parse_num(&v, "riemann_points")?;
        }
        if let Some(v) = take(&mut kv, "center") {
            spec.center = parse_num(&v, "center")?;
        }
        if let Some(k) = kv.keys().next() {
            return Err(Error::domain(format!("unknown key '{k}'")));
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn parse_num<T: std::str::FromStr>(s: &str, key: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::domain(format!("invalid value '{s}' for '{key}'")))
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| parse_num(p, "coefficient list"))
        .collect()
}

/// IMSE/IBIAS of one estimator (optionally smoothed).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub estimator: EstimatorKind,
    pub smoothing: Option<(WindowKind, usize)>,
    pub imse: f64,
    pub ibias: f64,
    pub imse_se: f64,
    pub ibias_se: f64,
}

/// ACF metrics over lags `1..=L`.
#[derive(Debug, Clone, PartialEq)]
pub struct AcfMetricRow {
    pub estimator: EstimatorKind,
    pub mse: f64,
    pub bias: f64,
    pub mse_se: f64,
    pub per_lag_mean: Vec<f64>,
    pub per_lag_mse: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable {
    pub rows: Vec<MetricRow>,
    pub acf_rows: Vec<AcfMetricRow>,
    pub replications: usize,
    pub runtime_secs: f64,
}

impl MetricTable {
    pub fn row(&self, estimator: EstimatorKind, smoothing: Option<(WindowKind, usize)>) -> Option<&MetricRow> {
        self.rows
            .iter()
            .find(|r| r.estimator == estimator && r.smoothing == smoothing)
    }

    pub fn acf_row(&self, estimator: EstimatorKind) -> Option<&AcfMetricRow> {
        self.acf_rows.iter().find(|r| r.estimator == estimator)
    }
}

/// Produces one replication's periodogram for an estimator.
pub trait ReplicationEvaluator: Sync {
    fn evaluate(&self, kind: EstimatorKind, ts: &TimeSeries, grid: &FrequencyGrid) -> Result<PeriodogramEstimate>;
}

/// The estimators as configured by an [`ExperimentSpec`].
pub struct StandardEvaluator {
    true_ar: Option<ArModel>,
    taper_d: Option<usize>,
}

impl StandardEvaluator {
    pub fn for_spec(spec: &ExperimentSpec) -> Result<Self> {
        Ok(Self {
            true_ar: spec.model.arma()?.as_ar(),
            taper_d: spec.taper_d,
        })
    }
}

impl ReplicationEvaluator for StandardEvaluator {
    fn evaluate(&self, kind: EstimatorKind, ts: &TimeSeries, grid: &FrequencyGrid) -> Result<PeriodogramEstimate> {
        kind.resolve(self.true_ar.as_ref(), self.taper_d)?.evaluate(ts, grid)
    }
}

/// Per-replication output: relative values `Ĩ(ω_k)/f(ω_k)` for every
/// (estimator, smoothing) slot, and ACF values per estimator.
struct Replication {
    ratios: Vec<Vec<f64>>,
    acf: Vec<Vec<f64>>,
}

#[derive(Clone)]
struct SlotAccumulator {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    per_rep_sum: f64,
    per_rep_sum_sq: f64,
}

impl SlotAccumulator {
    fn new(len: usize) -> Self {
        Self {
            sum: vec![0.0; len],
            sum_sq: vec![0.0; len],
            per_rep_sum: 0.0,
            per_rep_sum_sq: 0.0,
        }
    }

    /// Adds one replication's deviations `value − target` per coordinate.
    fn push(&mut self, deviations: impl Iterator<Item = f64>) {
        let mut rep = 0.0;
        let len = self.sum.len();
        for (k, d) in deviations.enumerate() {
            self.sum[k] += d;
            self.sum_sq[k] += d * d;
            rep += d * d;
        }
        rep /= len as f64;
        self.per_rep_sum += rep;
        self.per_rep_sum_sq += rep * rep;
    }

    /// `(mean squared deviation, squared mean deviation, SE of the first, SE of the second)`.
    fn finish(&self, b: usize) -> (f64, f64, f64, f64) {
        let bf = b as f64;
        let len = self.sum.len() as f64;
        let mse = self.per_rep_sum / bf;
        let bias = self.sum.iter().map(|s| (s / bf).powi(2)).sum::<f64>() / len;
        let mse_se = if b > 1 {
            ((self.per_rep_sum_sq / bf - mse * mse).max(0.0) / (bf - 1.0)).sqrt()
        } else {
            0.0
        };
        // Delta method: d(bias)/d(mean_k) = 2 mean_k / len.
        let bias_se = if b > 1 {
            self.sum
                .iter()
                .zip(&self.sum_sq)
                .map(|(s, sq)| {
                    let mean = s / bf;
                    let var = (sq / bf - mean * mean).max(0.0) * bf / (bf - 1.0);
                    (2.0 * mean / len).powi(2) * var / bf
                })
                .sum::<f64>()
                .sqrt()
        } else {
            0.0
        };
        (mse, bias, mse_se, bias_se)
    }
}

/// Runs an experiment with the standard estimators.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<MetricTable> {
    let evaluator = StandardEvaluator::for_spec(spec)?;
    run_experiment_with(spec, &evaluator)
}

const CHUNK: usize = 256;

/// Runs an experiment with a caller-supplied evaluator.
///
/// Replications are evaluated in parallel on the current rayon pool and
/// reduced in replication order.
pub fn run_experiment_with(spec: &ExperimentSpec, evaluator: &dyn ReplicationEvaluator) -> Result<MetricTable> {
    spec.validate()?;
    let start = Instant::now();
    let model = spec.model.arma()?;
    let n = spec.n;
    let fourier = FrequencyGrid::fourier(n)?;
    let density: Vec<f64> = fourier.frequencies().iter().map(|&w| model.density(w)).collect();
    let windows = spec
        .smoothing
        .iter()
        .map(|&(k, m)| spectral_window(k, m))
        .collect::<Result<Vec<_>>>()?;
    let acf_cfg = SpectralMeanConfig::riemann(spec.riemann_points);
    let acf_grid = acf_cfg.grid(n)?;
    let true_acf: Option<Vec<f64>> = spec.acf_lags.map(|l| {
        let c = model.autocovariances(l);
        c.iter().map(|v| v / c[0]).collect()
    });
    let slots_per_estimator = 1 + windows.len();

    let replicate = |b: usize| -> Result<Replication> {
        let ts = simulate_arma(&model, n, split_seed(spec.seed, b as u64))?;
        let ts = if spec.center { ts.centered() } else { ts };
        let mut ratios = Vec::with_capacity(spec.estimators.len() * slots_per_estimator);
        let mut acf = Vec::with_capacity(spec.estimators.len());
        for &kind in &spec.estimators {
            let mut pg = evaluator.evaluate(kind, &ts, &fourier)?;
            if is_complete(kind) {
                pg = threshold_real(&pg, spec.threshold)?;
            }
            ratios.push(pg.values.iter().zip(&density).map(|(v, f)| v.re / f).collect());
            for w in &windows {
                let s = smooth_periodogram(&pg, w)?;
                ratios.push(s.values.iter().zip(&density).map(|(v, f)| v.re / f).collect());
            }
            if let Some(l) = spec.acf_lags {
                let mut pg = evaluator.evaluate(kind, &ts, &acf_grid)?;
                if is_complete(kind) {
                    pg = threshold_real(&pg, spec.threshold)?;
                }
                acf.push(acf_from_periodogram(&pg, l, &acf_cfg)?.acf[1..].to_vec());
            }
        }
        Ok(Replication { ratios, acf })
    };

    let mut spectral_acc = vec![SlotAccumulator::new(n); spec.estimators.len() * slots_per_estimator];
    let mut acf_acc = vec![SlotAccumulator::new(spec.acf_lags.unwrap_or(0)); spec.estimators.len()];
    let mut acf_sum = vec![vec![0.0; spec.acf_lags.unwrap_or(0)]; spec.estimators.len()];

    let mut b0 = 0;
    while b0 < spec.replications {
        let b1 = (b0 + CHUNK).min(spec.replications);
        let chunk: Vec<Result<Replication>> = (b0..b1).into_par_iter().map(replicate).collect();
        for rep in chunk {
            let rep = rep?;
            for (acc, r) in spectral_acc.iter_mut().zip(&rep.ratios) {
                acc.push(r.iter().map(|v| v - 1.0));
            }
            if let Some(rho) = &true_acf {
                for ((acc, sums), est) in acf_acc.iter_mut().zip(acf_sum.iter_mut()).zip(&rep.acf) {
                    acc.push(est.iter().zip(&rho[1..]).map(|(e, t)| e - t));
                    for (s, e) in sums.iter_mut().zip(est) {
                        *s += e;
                    }
                }
            }
        }
        b0 = b1;
    }

    let bcount = spec.replications;
    let mut rows = Vec::new();
    for (i, &kind) in spec.estimators.iter().enumerate() {
        for s in 0..slots_per_estimator {
            let (imse, ibias, imse_se, ibias_se) = spectral_acc[i * slots_per_estimator + s].finish(bcount);
            rows.push(MetricRow {
                estimator: kind,
                smoothing: if s == 0 { None } else { Some(spec.smoothing[s - 1]) },
                imse,
                ibias,
                imse_se,
                ibias_se,
            });
        }
    }
    let mut acf_rows = Vec::new();
    if spec.acf_lags.is_some() {
        for (i, &kind) in spec.estimators.iter().enumerate() {
            let acc = &acf_acc[i];
            let (mse, bias, mse_se, _) = acc.finish(bcount);
            acf_rows.push(AcfMetricRow {
                estimator: kind,
                mse,
                bias,
                mse_se,
                per_lag_mean: acf_sum[i].iter().map(|s| s / bcount as f64).collect(),
                per_lag_mse: acc.sum_sq.iter().map(|s| s / bcount as f64).collect(),
            });
        }
    }
    let table = MetricTable {
        rows,
        acf_rows,
        replications: bcount,
        runtime_secs: start.elapsed().as_secs_f64(),
    };
    let finite = table
        .rows
        .iter()
        .all(|r| r.imse.is_finite() && r.ibias.is_finite())
        && table.acf_rows.iter().all(|r| r.mse.is_finite() && r.bias.is_finite());
    if !finite {
        return Err(Error::numerical("experiment produced non-finite metrics"));
    }
    Ok(table)
}

fn is_complete(kind: EstimatorKind) -> bool {
    matches!(
        kind,
        EstimatorKind::CompleteTrue | EstimatorKind::CompleteEst | EstimatorKind::TaperedComplete
    )
}

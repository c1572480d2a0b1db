use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::series::GridKind;
use crate::spectral::PeriodogramEstimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowKind {
    Daniell,
    Bartlett,
    Hann,
}

impl WindowKind {
    pub fn name(self) -> &'static str {
        match self {
            WindowKind::Daniell => "daniell",
            WindowKind::Bartlett => "bartlett",
            WindowKind::Hann => "hann",
        }
    }
}

impl fmt::Display for WindowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WindowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "daniell" => Ok(WindowKind::Daniell),
            "bartlett" => Ok(WindowKind::Bartlett),
            "hann" => Ok(WindowKind::Hann),
            other => Err(Error::domain(format!("unknown window '{other}'"))),
        }
    }
}

/// Symmetric smoothing weights `W(-m..=m)` summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralWindow {
    kind: WindowKind,
    m: usize,
    weights: Vec<f64>,
}

impl SpectralWindow {
    pub fn kind(&self) -> WindowKind {
        self.kind
    }

    pub fn half_width(&self) -> usize {
        self.m
    }

    /// Weights indexed from `j = -m` to `j = m`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `W(j)` for `|j| <= m`, zero outside.
    pub fn weight(&self, j: isize) -> f64 {
        if j.unsigned_abs() > self.m {
            0.0
        } else {
            self.weights[(j + self.m as isize) as usize]
        }
    }
}

pub fn spectral_window(kind: WindowKind, m: usize) -> Result<SpectralWindow> {
    if m == 0 {
        return Err(Error::domain("window half-width must be at least 1"));
    }
    let mf = m as f64;
    let raw: Vec<f64> = (-(m as isize)..=m as isize)
        .map(|j| {
            let jf = j as f64;
            match kind {
                WindowKind::Daniell => 1.0 / (2.0 * mf + 1.0),
                WindowKind::Bartlett => 1.0 - jf.abs() / mf,
                WindowKind::Hann => 0.5 * (1.0 - (PI * (jf + mf) / mf).cos()),
            }
        })
        .collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|w| (w / total).max(0.0)).collect();
    // Exact symmetry; the Hann cosine is only symmetric up to rounding.
    for j in 0..m {
        let avg = 0.5 * (weights[j] + weights[2 * m - j]);
        weights[j] = avg;
        weights[2 * m - j] = avg;
    }
    Ok(SpectralWindow { kind, m, weights })
}

/// Circular smoothing over Fourier indices:
/// `f̆(ω_k) = Σ_{|j|<=m} W(j) Re I(ω_{(k+j) mod n})`.
pub fn smooth_periodogram(pg: &PeriodogramEstimate, window: &SpectralWindow) -> Result<PeriodogramEstimate> {
    let n = match pg.grid.kind() {
        GridKind::Fourier(n) => n,
        other => {
            return Err(Error::domain(format!(
                "smoothing needs a Fourier grid, got {other:?}"
            )))
        }
    };
    let m = window.half_width();
    if 2 * m >= n {
        return Err(Error::domain(format!("window half-width {m} must be below n/2 = {}", n / 2)));
    }
    let re: Vec<f64> = pg.values.iter().map(|v| v.re).collect();
    let values = (0..n)
        .map(|k| {
            let s: f64 = (-(m as isize)..=m as isize)
                .map(|j| window.weight(j) * re[(k as isize + j).rem_euclid(n as isize) as usize])
                .sum();
            Complex64::new(s, 0.0)
        })
        .collect();
    Ok(PeriodogramEstimate {
        values,
        ..pg.clone()
    })
}

//! Non-elastic measures: Euclidean/Minkowski, Pearson correlation, and the
//! difference-of-autocorrelation-operators measure.
//!
//! All measures fix the summation order (ascending time index) so results
//! are bit-reproducible.

use thiserror::Error;

use crate::series::TimeSeries;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("length mismatch: {x} vs {y}")]
    DimensionMismatch { x: usize, y: usize },
    #[error("constant series (zero variance)")]
    DegenerateSeries,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("lag {tau} out of range 1..={max}")]
    LagOutOfRange { tau: usize, max: usize },
}

fn check_lengths(x: &TimeSeries, y: &TimeSeries) -> Result<(), MeasureError> {
    if x.len() != y.len() {
        return Err(MeasureError::DimensionMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    Ok(())
}

/// Norm order for the Minkowski distance. `p = ∞` selects the max-norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinkowskiOrder(f64);

impl MinkowskiOrder {
    pub fn new(p: f64) -> Result<Self, MeasureError> {
        if p.is_nan() || p < 1.0 {
            return Err(MeasureError::InvalidParameter(format!(
                "Minkowski order must satisfy p >= 1, got {p}"
            )));
        }
        Ok(Self(p))
    }

    pub fn max_norm() -> Self {
        Self(f64::INFINITY)
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Number of autocorrelation lags retained by [`daco`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DacoConfig {
    lags: usize,
}

impl DacoConfig {
    pub fn new(lags: usize) -> Result<Self, MeasureError> {
        if lags == 0 {
            return Err(MeasureError::InvalidParameter(
                "DACO lag count must be at least 1".into(),
            ));
        }
        Ok(Self { lags })
    }

    pub fn lags(self) -> usize {
        self.lags
    }
}

/// √Σ(x_t − y_t)².
pub fn euclidean(x: &TimeSeries, y: &TimeSeries) -> Result<f64, MeasureError> {
    check_lengths(x, y)?;
    let s: f64 = x
        .values()
        .iter()
        .zip(y.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(s.sqrt())
}

/// (Σ|x_t − y_t|^p)^(1/p); p=1 is Manhattan, p=∞ the max-norm.
pub fn minkowski(
    x: &TimeSeries,
    y: &TimeSeries,
    order: MinkowskiOrder,
) -> Result<f64, MeasureError> {
    check_lengths(x, y)?;
    let p = order.get();
    let diffs = x
        .values()
        .iter()
        .zip(y.values())
        .map(|(a, b)| (a - b).abs());
    if p.is_infinite() {
        return Ok(diffs.fold(0.0, f64::max));
    }
    let s: f64 = diffs.map(|d| d.powf(p)).sum();
    Ok(s.powf(1.0 / p))
}

/// Pearson correlation coefficient, in [−1, 1].
pub fn corr(x: &TimeSeries, y: &TimeSeries) -> Result<f64, MeasureError> {
    check_lengths(x, y)?;
    let n = x.len() as f64;
    let mx = x.values().iter().sum::<f64>() / n;
    let my = y.values().iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut dx = 0.0;
    let mut dy = 0.0;
    for (a, b) in x.values().iter().zip(y.values()) {
        num += (a - mx) * (b - my);
        dx += (a - mx) * (a - mx);
        dy += (b - my) * (b - my);
    }
    if dx == 0.0 || dy == 0.0 {
        return Err(MeasureError::DegenerateSeries);
    }
    Ok((num / (dx.sqrt() * dy.sqrt())).clamp(-1.0, 1.0))
}

/// Autocorrelation at lag τ:
/// Σ_{t=1}^{T−τ}(x_t−x̄)(x_{t+τ}−x̄) / Σ_{t=1}^{T}(x_t−x̄)².
pub fn autocorr(x: &TimeSeries, tau: usize) -> Result<f64, MeasureError> {
    let t = x.len();
    if tau == 0 || tau > t - 1 {
        return Err(MeasureError::LagOutOfRange {
            tau,
            max: t.saturating_sub(1),
        });
    }
    let v = x.values();
    let mean = v.iter().sum::<f64>() / t as f64;
    let den: f64 = v.iter().map(|&a| (a - mean) * (a - mean)).sum();
    if den == 0.0 {
        return Err(MeasureError::DegenerateSeries);
    }
    let num: f64 = (0..t - tau)
        .map(|i| (v[i] - mean) * (v[i + tau] - mean))
        .sum();
    Ok(num / den)
}

/// Squared distance between the autocorrelation operator vectors
/// (ρ_1(x),…,ρ_k(x)) and (ρ_1(y),…,ρ_k(y)).
pub fn daco(x: &TimeSeries, y: &TimeSeries, cfg: DacoConfig) -> Result<f64, MeasureError> {
    check_lengths(x, y)?;
    let max_lag = x.len().saturating_sub(1);
    if cfg.lags() > max_lag {
        return Err(MeasureError::LagOutOfRange {
            tau: cfg.lags(),
            max: max_lag,
        });
    }
    let mut s = 0.0;
    for tau in 1..=cfg.lags() {
        let d = autocorr(x, tau)? - autocorr(y, tau)?;
        s += d * d;
    }
    Ok(s)
}

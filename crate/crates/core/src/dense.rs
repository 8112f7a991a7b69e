//! Full-grid elastic measures: DTW with optimal-path backtracking,
//! Sakoe-Chiba–banded DTW, the Gaussian local kernel, and the
//! regularized time-elastic kernel together with its corridor variant.

use crate::measures::MeasureError;
use crate::series::TimeSeries;

/// Per-cell divergence φ between two sample values. Nonnegative, symmetric,
/// zero on equal arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LocalCost {
    #[default]
    SquaredDifference,
    AbsoluteDifference,
}

impl LocalCost {
    #[inline]
    pub fn eval(self, a: f64, b: f64) -> f64 {
        match self {
            LocalCost::SquaredDifference => (a - b) * (a - b),
            LocalCost::AbsoluteDifference => (a - b).abs(),
        }
    }

    pub fn parse(s: &str) -> Result<Self, MeasureError> {
        match s {
            "sq" | "squared" => Ok(LocalCost::SquaredDifference),
            "abs" | "absolute" => Ok(LocalCost::AbsoluteDifference),
            other => Err(MeasureError::InvalidParameter(format!(
                "unknown local cost {other:?}, expected sq or abs"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LocalCost::SquaredDifference => "sq",
            LocalCost::AbsoluteDifference => "abs",
        }
    }
}

/// Bandwidth of the local kernel κ_ν(a,b) = exp(−ν(a−b)²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    nu: f64,
}

impl KernelConfig {
    pub fn new(nu: f64) -> Result<Self, MeasureError> {
        if !nu.is_finite() || nu <= 0.0 {
            return Err(MeasureError::InvalidParameter(format!(
                "kernel bandwidth must be positive and finite, got {nu}"
            )));
        }
        Ok(Self { nu })
    }

    pub fn nu(self) -> f64 {
        self.nu
    }
}

/// κ_ν(a,b) = exp(−ν(a−b)²), in (0, 1].
#[inline]
pub fn local_kernel(a: f64, b: f64, cfg: KernelConfig) -> f64 {
    (-cfg.nu * (a - b) * (a - b)).exp()
}

/// Sakoe-Chiba band radius expressed as an integer percent of the series
/// length; the cell (t, t′) is admissible when |t − t′| ≤ r with
/// r = ⌊pct·T/100⌋.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BandConfig {
    pct: u8,
}

impl BandConfig {
    pub fn new(pct: u8) -> Result<Self, MeasureError> {
        if pct > 100 {
            return Err(MeasureError::InvalidParameter(format!(
                "band percent must be in 0..=100, got {pct}"
            )));
        }
        Ok(Self { pct })
    }

    pub fn pct(self) -> u8 {
        self.pct
    }

    /// Radius in cells for series of length `t`.
    pub fn radius(self, t: usize) -> usize {
        (self.pct as usize * t) / 100
    }

    /// Number of grid cells inside the band: T(2r+1) − r(r+1).
    pub fn cells(self, t: usize) -> u64 {
        let r = self.radius(t) as u64;
        let t = t as u64;
        t * (2 * r + 1) - r * (r + 1)
    }
}

/// A monotone boundary-to-boundary alignment, stored as 1-based (t, t′)
/// index pairs from (1,1) to (T_x, T_y).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentPath {
    pairs: Vec<(usize, usize)>,
}

impl AlignmentPath {
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Checks boundary, monotonicity, and unit-step conditions for the
    /// given grid dimensions.
    pub fn is_valid(&self, t_x: usize, t_y: usize) -> bool {
        if self.pairs.first() != Some(&(1, 1)) || self.pairs.last() != Some(&(t_x, t_y)) {
            return false;
        }
        self.pairs.windows(2).all(|w| {
            let (a, b) = (w[0], w[1]);
            let di = b.0 as i64 - a.0 as i64;
            let dj = b.1 as i64 - a.1 as i64;
            (0..=1).contains(&di) && (0..=1).contains(&dj) && di + dj >= 1
        })
    }

    /// Σ φ(x_t, y_t′) along the path.
    pub fn cost_along(&self, x: &TimeSeries, y: &TimeSeries, cost: LocalCost) -> f64 {
        self.pairs
            .iter()
            .map(|&(i, j)| cost.eval(x.values()[i - 1], y.values()[j - 1]))
            .sum()
    }
}

/// Result of a dense DTW evaluation.
#[derive(Debug, Clone)]
pub struct DtwResult {
    pub value: f64,
    pub path: AlignmentPath,
    /// Number of cost-matrix cells evaluated (T_x · T_y).
    pub visited: u64,
}

// Direction codes for backtracking.
const D_START: u8 = 0;
const D_DIAG: u8 = 1;
const D_UP: u8 = 2;
const D_LEFT: u8 = 3;

/// Dynamic time warping over the full T_x × T_y grid, with one optimal
/// path recovered by backtracking.
///
/// Tie-breaking prefers the diagonal predecessor, then (t−1, t′), then
/// (t, t′−1), so the backtracked path is deterministic.
pub fn dtw(x: &TimeSeries, y: &TimeSeries, cost: LocalCost) -> Result<DtwResult, MeasureError> {
    let (tx, ty) = (x.len(), y.len());
    let xv = x.values();
    let yv = y.values();

    let mut dirs = vec![D_START; tx * ty];
    let mut prev = vec![0.0f64; ty];
    let mut curr = vec![0.0f64; ty];

    for i in 0..tx {
        for j in 0..ty {
            let c = cost.eval(xv[i], yv[j]);
            let (val, dir) = if i == 0 && j == 0 {
                (c, D_START)
            } else if i == 0 {
                (curr[j - 1] + c, D_LEFT)
            } else if j == 0 {
                (prev[0] + c, D_UP)
            } else {
                let diag = prev[j - 1];
                let up = prev[j];
                let left = curr[j - 1];
                let mut best = diag;
                let mut dir = D_DIAG;
                if up < best {
                    best = up;
                    dir = D_UP;
                }
                if left < best {
                    best = left;
                    dir = D_LEFT;
                }
                (best + c, dir)
            };
            curr[j] = val;
            dirs[i * ty + j] = dir;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    let value = prev[ty - 1];

    // Walk the stored directions back from (T_x, T_y).
    let mut pairs = Vec::with_capacity(tx + ty);
    let (mut i, mut j) = (tx - 1, ty - 1);
    loop {
        pairs.push((i + 1, j + 1));
        match dirs[i * ty + j] {
            D_START => break,
            D_DIAG => {
                i -= 1;
                j -= 1;
            }
            D_UP => i -= 1,
            _ => j -= 1,
        }
    }
    pairs.reverse();

    Ok(DtwResult {
        value,
        path: AlignmentPath { pairs },
        visited: (tx as u64) * (ty as u64),
    })
}

/// Banded DTW evaluation (no path).
#[derive(Debug, Clone, Copy)]
pub struct BandedDtw {
    pub value: f64,
    pub visited: u64,
}

/// DTW restricted to the Sakoe-Chiba corridor |t − t′| ≤ r on the square
/// T × T grid. The diagonal is always admissible, so a result always
/// exists; the value dominates the unconstrained DTW.
#[allow(clippy::needless_range_loop)] // row index drives the band bounds
pub fn dtw_sc(
    x: &TimeSeries,
    y: &TimeSeries,
    cost: LocalCost,
    band: BandConfig,
) -> Result<BandedDtw, MeasureError> {
    let t = x.len();
    if y.len() != t {
        return Err(MeasureError::DimensionMismatch { x: t, y: y.len() });
    }
    let r = band.radius(t);
    let xv = x.values();
    let yv = y.values();

    let mut prev = vec![f64::INFINITY; t];
    let mut curr = vec![f64::INFINITY; t];
    let mut visited = 0u64;

    for i in 0..t {
        curr.fill(f64::INFINITY);
        let lo = i.saturating_sub(r);
        let hi = (i + r).min(t - 1);
        for j in lo..=hi {
            visited += 1;
            let c = cost.eval(xv[i], yv[j]);
            curr[j] = if i == 0 && j == 0 {
                c
            } else if i == 0 {
                curr[j - 1] + c
            } else if j == 0 {
                prev[0] + c
            } else {
                let best = prev[j - 1].min(prev[j]).min(curr[j - 1]);
                best + c
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(BandedDtw {
        value: prev[t - 1],
        visited,
    })
}

/// Log-domain kernel evaluation result.
#[derive(Debug, Clone, Copy)]
pub struct KernelEval {
    /// log(K1(T,T) + K2(T,T)), rescaling included.
    pub log_value: f64,
    pub visited: u64,
}

// Rows whose running maximum drops below this bound are rescaled so long
// products cannot underflow.
const RESCALE_FLOOR: f64 = 1e-100;

struct RowScaler {
    log_scale: f64,
}

impl RowScaler {
    fn new() -> Self {
        Self { log_scale: 0.0 }
    }

    /// Rescales the active rows in place so their maximum returns to O(1),
    /// remembering the factor in log space. Both kernels must share one
    /// scale because their terminal values are summed.
    fn rescale(&mut self, rows: &mut [&mut [f64]]) {
        let mut m = 0.0f64;
        for row in rows.iter() {
            for &v in row.iter() {
                if v > m {
                    m = v;
                }
            }
        }
        if m > 0.0 && m < RESCALE_FLOOR {
            let inv = 1.0 / m;
            for row in rows.iter_mut() {
                for v in row.iter_mut() {
                    *v *= inv;
                }
            }
            self.log_scale += m.ln();
        }
    }

    fn finish(&self, terminal: f64) -> f64 {
        if terminal > 0.0 {
            terminal.ln() + self.log_scale
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// The regularized time-elastic kernel over the full grid, evaluated in
/// log domain with per-row rescaling.
///
/// The recursion keeps two coupled tables: K1 accumulates, over every
/// admissible path, the product of κ_ν(x_t, y_t′) along the path with a
/// 1/3 factor per step; K2 is the matching diagonal-marginal recursion
/// (vertical steps contribute κ_ν(x_t, y_t), horizontal steps
/// κ_ν(x_t′, y_t′), diagonal steps the average of the two). The returned
/// value is log(K1(T,T) + K2(T,T)).
pub fn krdtw(
    x: &TimeSeries,
    y: &TimeSeries,
    cfg: KernelConfig,
) -> Result<KernelEval, MeasureError> {
    let t = x.len();
    if y.len() != t {
        return Err(MeasureError::DimensionMismatch { x: t, y: y.len() });
    }
    krdtw_banded(x, y, cfg, None)
}

/// Corridor variant: cells outside |t − t′| ≤ r contribute zero.
pub fn krdtw_sc(
    x: &TimeSeries,
    y: &TimeSeries,
    cfg: KernelConfig,
    band: BandConfig,
) -> Result<KernelEval, MeasureError> {
    let t = x.len();
    if y.len() != t {
        return Err(MeasureError::DimensionMismatch { x: t, y: y.len() });
    }
    krdtw_banded(x, y, cfg, Some(band.radius(t)))
}

fn krdtw_banded(
    x: &TimeSeries,
    y: &TimeSeries,
    cfg: KernelConfig,
    radius: Option<usize>,
) -> Result<KernelEval, MeasureError> {
    let t = x.len();
    let xv = x.values();
    let yv = y.values();

    // kappa(x_i, y_i) at equal indices, shared by the K2 recursion.
    let diag_k: Vec<f64> = (0..t).map(|i| local_kernel(xv[i], yv[i], cfg)).collect();

    let mut k1_prev = vec![0.0f64; t];
    let mut k1_curr = vec![0.0f64; t];
    let mut k2_prev = vec![0.0f64; t];
    let mut k2_curr = vec![0.0f64; t];
    let mut scaler = RowScaler::new();
    let mut visited = 0u64;

    for i in 0..t {
        k1_curr.fill(0.0);
        k2_curr.fill(0.0);
        let (lo, hi) = match radius {
            Some(r) => (i.saturating_sub(r), (i + r).min(t - 1)),
            None => (0, t - 1),
        };
        for j in lo..=hi {
            visited += 1;
            if i == 0 && j == 0 {
                let k = local_kernel(xv[0], yv[0], cfg);
                k1_curr[0] = k;
                k2_curr[0] = k;
            } else if j == 0 {
                let k = local_kernel(xv[i], yv[0], cfg);
                k1_curr[0] = (1.0 / 3.0) * k1_prev[0] * k;
                k2_curr[0] = (1.0 / 3.0) * k2_prev[0] * diag_k[i];
            } else if i == 0 {
                let k = local_kernel(xv[0], yv[j], cfg);
                k1_curr[j] = (1.0 / 3.0) * k1_curr[j - 1] * k;
                k2_curr[j] = (1.0 / 3.0) * k2_curr[j - 1] * diag_k[j];
            } else {
                let k = local_kernel(xv[i], yv[j], cfg);
                k1_curr[j] = (1.0 / 3.0) * k * (k1_prev[j - 1] + k1_prev[j] + k1_curr[j - 1]);
                k2_curr[j] = (1.0 / 3.0)
                    * (0.5 * (diag_k[i] + diag_k[j]) * k2_prev[j - 1]
                        + k2_prev[j] * diag_k[i]
                        + k2_curr[j - 1] * diag_k[j]);
            }
        }
        std::mem::swap(&mut k1_prev, &mut k1_curr);
        std::mem::swap(&mut k2_prev, &mut k2_curr);
        scaler.rescale(&mut [k1_prev.as_mut_slice(), k2_prev.as_mut_slice()]);
    }

    Ok(KernelEval {
        log_value: scaler.finish(k1_prev[t - 1] + k2_prev[t - 1]),
        visited,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    #[test]
    fn triangle_inequality_counterexample() {
        // dtw([0],[1,2]) = 3, dtw([1,2],[2,3,3]) = 3, dtw([0],[2,3,3]) = 8
        let a = ts(&[0.0]);
        let b = ts(&[1.0, 2.0]);
        let c = ts(&[2.0, 3.0, 3.0]);
        let abs = LocalCost::AbsoluteDifference;
        assert_eq!(dtw(&a, &b, abs).unwrap().value, 3.0);
        assert_eq!(dtw(&b, &c, abs).unwrap().value, 3.0);
        assert_eq!(dtw(&a, &c, abs).unwrap().value, 8.0);
    }

    #[test]
    fn squared_cost_small_fixture() {
        // both admissible paths of the 1x2 grid enumerated by hand
        let a = ts(&[0.0]);
        let b = ts(&[1.0, 2.0]);
        assert_eq!(
            dtw(&a, &b, LocalCost::SquaredDifference).unwrap().value,
            5.0
        );
    }

    #[test]
    fn dtw_self_is_zero_with_diagonal_path() {
        let x = ts(&[0.4, 1.7, -2.0, 3.1, 0.0]);
        for cost in [LocalCost::SquaredDifference, LocalCost::AbsoluteDifference] {
            let r = dtw(&x, &x, cost).unwrap();
            assert_eq!(r.value, 0.0);
            let diag: Vec<(usize, usize)> = (1..=x.len()).map(|i| (i, i)).collect();
            assert_eq!(r.path.pairs(), &diag[..]);
            assert_eq!(r.visited, (x.len() * x.len()) as u64);
        }
    }

    #[test]
    fn backtracked_path_is_valid_and_recovers_value() {
        let x = ts(&[0.0, 2.0, 1.0, 3.0, 0.5, 2.5]);
        let y = ts(&[1.0, 0.0, 2.0, 2.0, 3.0]);
        for cost in [LocalCost::SquaredDifference, LocalCost::AbsoluteDifference] {
            let r = dtw(&x, &y, cost).unwrap();
            assert!(r.path.is_valid(x.len(), y.len()));
            assert!(r.path.len() >= x.len().max(y.len()));
            assert!(r.path.len() < x.len() + y.len());
            assert!((r.path.cost_along(&x, &y, cost) - r.value).abs() < 1e-9);
        }
    }

    #[test]
    fn band_radius_and_cell_count() {
        // 50Words row of the speed-up table: T=270, pct=6 -> r=16, 8638 cells
        let band = BandConfig::new(6).unwrap();
        assert_eq!(band.radius(270), 16);
        assert_eq!(band.cells(270), 8638);
    }

    #[test]
    fn unconstrained_band_equals_dtw() {
        let x = ts(&[0.1, 1.9, -0.3, 2.2, 0.8]);
        let y = ts(&[1.0, 0.2, 2.5, -0.5, 1.4]);
        let full = dtw(&x, &y, LocalCost::SquaredDifference).unwrap();
        let banded = dtw_sc(
            &x,
            &y,
            LocalCost::SquaredDifference,
            BandConfig::new(100).unwrap(),
        )
        .unwrap();
        assert!((full.value - banded.value).abs() < 1e-12);
        assert_eq!(banded.visited, 25);
    }

    #[test]
    fn zero_band_is_the_diagonal() {
        let x = ts(&[0.1, 1.9, -0.3, 2.2]);
        let y = ts(&[1.0, 0.2, 2.5, -0.5]);
        let cost = LocalCost::SquaredDifference;
        let banded = dtw_sc(&x, &y, cost, BandConfig::new(0).unwrap()).unwrap();
        let diag: f64 = x
            .values()
            .iter()
            .zip(y.values())
            .map(|(a, b)| cost.eval(*a, *b))
            .sum();
        assert!((banded.value - diag).abs() < 1e-12);
        assert_eq!(banded.visited, 4);
    }

    #[test]
    fn band_value_dominates_dtw() {
        let x = ts(&[0.0, 3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0]);
        let y = ts(&[2.0, 7.0, 1.0, 8.0, 2.0, 8.0, 1.0, 8.0]);
        let cost = LocalCost::SquaredDifference;
        let full = dtw(&x, &y, cost).unwrap().value;
        let diag: f64 = x
            .values()
            .iter()
            .zip(y.values())
            .map(|(a, b)| cost.eval(*a, *b))
            .sum();
        let mut last = full;
        for pct in [0u8, 10, 25, 50, 100] {
            let v = dtw_sc(&x, &y, cost, BandConfig::new(pct).unwrap())
                .unwrap()
                .value;
            assert!(v + 1e-12 >= full);
            assert!(v <= diag + 1e-12);
            // widening the band can only improve the value
            assert!(v <= last + 1e-12 || pct == 0);
            last = v;
        }
    }

    #[test]
    fn local_kernel_basics() {
        let cfg = KernelConfig::new(1.0).unwrap();
        assert_eq!(local_kernel(0.7, 0.7, cfg), 1.0);
        assert!((local_kernel(0.0, 1.0, cfg) - (-1.0f64).exp()).abs() < 1e-15);
        let mut prev = 1.0;
        for d in 1..10 {
            let v = local_kernel(0.0, d as f64, cfg);
            assert!(v < prev && v > 0.0);
            prev = v;
        }
    }

    #[test]
    fn kernel_config_rejects_bad_nu() {
        assert!(KernelConfig::new(0.0).is_err());
        assert!(KernelConfig::new(-1.0).is_err());
        assert!(KernelConfig::new(f64::NAN).is_err());
    }

    #[test]
    fn krdtw_single_element_is_twice_kappa() {
        let cfg = KernelConfig::new(0.5).unwrap();
        let x = ts(&[0.3]);
        let y = ts(&[1.1]);
        let expect = 2.0 * local_kernel(0.3, 1.1, cfg);
        let got = krdtw(&x, &y, cfg).unwrap();
        assert!((got.log_value - expect.ln()).abs() < 1e-12);
        assert_eq!(got.visited, 1);
    }

    #[test]
    fn krdtw_is_symmetric() {
        let cfg = KernelConfig::new(0.7).unwrap();
        let x = ts(&[0.0, 1.5, -0.2, 2.0, 0.3]);
        let y = ts(&[1.0, 0.1, 1.9, -0.4, 0.8]);
        let a = krdtw(&x, &y, cfg).unwrap().log_value;
        let b = krdtw(&y, &x, cfg).unwrap().log_value;
        assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn krdtw_t2_matches_path_enumeration() {
        // three admissible paths on the 2x2 grid with 1/3 per-step weights
        let cfg = KernelConfig::new(1.3).unwrap();
        let (x0, x1, y0, y1) = (0.2, 1.4, -0.3, 0.9);
        let k = |a: f64, b: f64| local_kernel(a, b, cfg);
        let third = 1.0 / 3.0;
        // K1 paths: diag; right then down; down then right
        let k1 = third * k(x0, y0) * k(x1, y1)
            + third * third * k(x0, y0) * k(x0, y1) * k(x1, y1)
            + third * third * k(x0, y0) * k(x1, y0) * k(x1, y1);
        // K2 uses kappa at equal indices; diagonal steps average the two
        let d0 = k(x0, y0);
        let d1 = k(x1, y1);
        let k2 = third * d0 * 0.5 * (d1 + d1)
            + third * third * d0 * d1 * d1
            + third * third * d0 * d1 * d1;
        let got = krdtw(&ts(&[x0, x1]), &ts(&[y0, y1]), cfg).unwrap();
        assert!((got.log_value - (k1 + k2).ln()).abs() < 1e-12);
    }

    #[test]
    fn krdtw_sc_full_band_matches_dense() {
        let cfg = KernelConfig::new(0.4).unwrap();
        let x = ts(&[0.0, 1.5, -0.2, 2.0, 0.3, 1.0]);
        let y = ts(&[1.0, 0.1, 1.9, -0.4, 0.8, 0.0]);
        let dense = krdtw(&x, &y, cfg).unwrap();
        let banded = krdtw_sc(&x, &y, cfg, BandConfig::new(100).unwrap()).unwrap();
        assert!((dense.log_value - banded.log_value).abs() < 1e-9);
        assert_eq!(banded.visited, 36);
    }

    #[test]
    fn krdtw_sc_visited_matches_band_formula() {
        let cfg = KernelConfig::new(1.0).unwrap();
        let n = 12;
        let x = ts(&(0..n).map(|i| (i as f64).sin()).collect::<Vec<_>>());
        let y = ts(&(0..n).map(|i| (i as f64).cos()).collect::<Vec<_>>());
        for pct in [0u8, 10, 25, 60, 100] {
            let band = BandConfig::new(pct).unwrap();
            let got = krdtw_sc(&x, &y, cfg, band).unwrap();
            assert_eq!(got.visited, band.cells(n));
        }
    }

    #[test]
    fn krdtw_long_series_does_not_underflow() {
        // (1/3)^T alone underflows f64 near T = 1300 without rescaling
        let cfg = KernelConfig::new(1.0).unwrap();
        let n = 2000;
        let x = ts(&(0..n).map(|i| (i as f64 * 0.01).sin()).collect::<Vec<_>>());
        let y = ts(&(0..n).map(|i| (i as f64 * 0.011).sin()).collect::<Vec<_>>());
        let got = krdtw(&x, &y, cfg).unwrap();
        assert!(got.log_value.is_finite());
        assert!(got.log_value < 0.0);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let x = ts(&[0.0, 1.0]);
        let y = ts(&[0.0, 1.0, 2.0]);
        let cfg = KernelConfig::new(1.0).unwrap();
        assert!(krdtw(&x, &y, cfg).is_err());
        assert!(dtw_sc(
            &x,
            &y,
            LocalCost::SquaredDifference,
            BandConfig::new(10).unwrap()
        )
        .is_err());
    }
}

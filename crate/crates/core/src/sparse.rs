//! The sparsified measures: DTW and the time-elastic kernel evaluated in
//! a single forward pass over the sorted entries of a
//! [`SparsePathMatrix`], touching no other grid cell.
//!
//! Storage is two rolling row buffers per table, indexed by the sorted
//! entry stream; the full T×T matrix is never allocated.

use crate::dense::{local_kernel, KernelConfig, LocalCost};
use crate::grid::SparsePathMatrix;
use crate::measures::MeasureError;
use crate::series::TimeSeries;

/// Outcome of a sparse evaluation.
#[derive(Debug, Clone, Copy)]
pub struct SparseEvalResult {
    /// Accumulated cost (SP-DTW) or log-kernel value (SP-KRDTW).
    pub value: f64,
    /// Number of entries processed.
    pub visited: u64,
    /// False when the terminal cell never received a finite / nonzero
    /// accumulation (possible only for matrices that skipped the
    /// connectivity repair).
    pub reachable: bool,
}

/// Unreachable cells hold the largest finite value; sums with it saturate
/// instead of overflowing to infinity.
const SENTINEL: f64 = f64::MAX;

#[inline]
fn sat_add(a: f64, b: f64) -> f64 {
    if a >= SENTINEL {
        SENTINEL
    } else {
        (a + b).min(SENTINEL)
    }
}

fn check_dims(x: &TimeSeries, y: &TimeSeries, m: &SparsePathMatrix) -> Result<usize, MeasureError> {
    let t = m.t();
    if x.len() != y.len() {
        return Err(MeasureError::DimensionMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    if x.len() != t {
        return Err(MeasureError::DimensionMismatch { x: x.len(), y: t });
    }
    Ok(t)
}

/// Sparsified-paths DTW: a forward pass over the entries in row-major
/// order, each cell cost scaled by the entry weight, with predecessors
/// outside the entry set reading the saturating sentinel.
pub fn sp_dtw(
    x: &TimeSeries,
    y: &TimeSeries,
    m: &SparsePathMatrix,
    cost: LocalCost,
) -> Result<SparseEvalResult, MeasureError> {
    let t = check_dims(x, y, m)?;
    let xv = x.values();
    let yv = y.values();

    let mut prev = vec![SENTINEL; t];
    let mut curr = vec![SENTINEL; t];
    let mut cur_row = 0u32;
    let mut visited = 0u64;

    for e in m.entries() {
        if e.row != cur_row {
            if e.row == cur_row + 1 {
                std::mem::swap(&mut prev, &mut curr);
            } else {
                // a row gap: every predecessor row cell is unreachable
                prev.fill(SENTINEL);
            }
            curr.fill(SENTINEL);
            cur_row = e.row;
        }
        visited += 1;
        let i = (e.row - 1) as usize;
        let j = (e.col - 1) as usize;
        let c = cost.eval(xv[i], yv[j]) * e.weight;
        curr[j] = if i == 0 && j == 0 {
            c
        } else if j == 0 {
            sat_add(prev[0], c)
        } else if i == 0 {
            sat_add(curr[j - 1], c)
        } else {
            sat_add(prev[j - 1].min(prev[j]).min(curr[j - 1]), c)
        };
    }

    let value = if cur_row as usize == t {
        curr[t - 1]
    } else {
        SENTINEL
    };
    Ok(SparseEvalResult {
        value,
        visited,
        reachable: value < SENTINEL,
    })
}

/// Sparsified-paths time-elastic kernel: the dense recursion evaluated
/// over the entry stream only. Entry weights are ignored (they would
/// break definiteness); absent cells contribute zero.
///
/// Returns log(K1(T,T) + K2(T,T)) with per-row rescaling.
pub fn sp_krdtw(
    x: &TimeSeries,
    y: &TimeSeries,
    m: &SparsePathMatrix,
    cfg: KernelConfig,
) -> Result<SparseEvalResult, MeasureError> {
    let t = check_dims(x, y, m)?;
    let xv = x.values();
    let yv = y.values();
    let diag_k: Vec<f64> = (0..t).map(|i| local_kernel(xv[i], yv[i], cfg)).collect();

    let mut k1_prev = vec![0.0f64; t];
    let mut k1_curr = vec![0.0f64; t];
    let mut k2_prev = vec![0.0f64; t];
    let mut k2_curr = vec![0.0f64; t];
    let mut log_scale = 0.0f64;
    let mut cur_row = 0u32;
    let mut visited = 0u64;

    const RESCALE_FLOOR: f64 = 1e-100;

    for e in m.entries() {
        if e.row != cur_row {
            if e.row == cur_row + 1 {
                std::mem::swap(&mut k1_prev, &mut k1_curr);
                std::mem::swap(&mut k2_prev, &mut k2_curr);
            } else {
                k1_prev.fill(0.0);
                k2_prev.fill(0.0);
            }
            k1_curr.fill(0.0);
            k2_curr.fill(0.0);
            // Rescale the carried row so long products cannot underflow;
            // both tables share one scale because their terminals are summed.
            let m1 = k1_prev.iter().cloned().fold(0.0f64, f64::max);
            let m2 = k2_prev.iter().cloned().fold(0.0f64, f64::max);
            let mx = m1.max(m2);
            if mx > 0.0 && mx < RESCALE_FLOOR {
                let inv = 1.0 / mx;
                for v in k1_prev.iter_mut().chain(k2_prev.iter_mut()) {
                    *v *= inv;
                }
                log_scale += mx.ln();
            }
            cur_row = e.row;
        }
        visited += 1;
        let i = (e.row - 1) as usize;
        let j = (e.col - 1) as usize;
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

    let terminal = if cur_row as usize == t {
        k1_curr[t - 1] + k2_curr[t - 1]
    } else {
        0.0
    };
    let (value, reachable) = if terminal > 0.0 {
        (terminal.ln() + log_scale, true)
    } else {
        (f64::NEG_INFINITY, false)
    };
    Ok(SparseEvalResult {
        value,
        visited,
        reachable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{dtw, dtw_sc, krdtw, BandConfig};
    use crate::grid::SpmEntry;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    fn wave(n: usize, f: f64) -> TimeSeries {
        ts(&(0..n)
            .map(|i| (i as f64 * f).sin() + 0.3 * (i as f64 * 1.7 * f).cos())
            .collect::<Vec<_>>())
    }

    #[test]
    fn full_grid_equals_dense_dtw_exactly() {
        for n in [1usize, 2, 3, 8, 17] {
            let x = wave(n, 0.31);
            let y = wave(n, 0.47);
            let m = SparsePathMatrix::full_grid(n);
            for cost in [LocalCost::SquaredDifference, LocalCost::AbsoluteDifference] {
                let dense = dtw(&x, &y, cost).unwrap();
                let sparse = sp_dtw(&x, &y, &m, cost).unwrap();
                assert_eq!(sparse.value, dense.value, "T={n}");
                assert!(sparse.reachable);
                assert_eq!(sparse.visited, (n * n) as u64);
            }
        }
    }

    #[test]
    fn diagonal_matrix_gives_diagonal_cost() {
        let x = ts(&[0.0, 1.0, 2.0, 3.0]);
        let y = ts(&[1.0, 1.0, 3.0, 2.0]);
        let m = SparsePathMatrix::diagonal(4);
        let cost = LocalCost::SquaredDifference;
        let got = sp_dtw(&x, &y, &m, cost).unwrap();
        let diag: f64 = x
            .values()
            .iter()
            .zip(y.values())
            .map(|(a, b)| cost.eval(*a, *b))
            .sum();
        assert!((got.value - diag).abs() < 1e-12);
        assert_eq!(got.visited, 4);
    }

    #[test]
    fn band_matrix_equals_banded_dtw() {
        for n in [5usize, 9, 16] {
            for pct in [0u8, 10, 30, 100] {
                let band = BandConfig::new(pct).unwrap();
                let x = wave(n, 0.59);
                let y = wave(n, 0.23);
                let m = SparsePathMatrix::band(n, band.radius(n));
                let cost = LocalCost::SquaredDifference;
                let a = sp_dtw(&x, &y, &m, cost).unwrap();
                let b = dtw_sc(&x, &y, cost, band).unwrap();
                assert_eq!(a.value, b.value, "T={n} pct={pct}");
                assert_eq!(a.visited, b.visited);
            }
        }
    }

    #[test]
    fn restricted_search_dominates_dtw() {
        let n = 12;
        let x = wave(n, 0.71);
        let y = wave(n, 0.13);
        let cost = LocalCost::SquaredDifference;
        let full = dtw(&x, &y, cost).unwrap().value;
        for r in 0..n {
            let m = SparsePathMatrix::band(n, r);
            let v = sp_dtw(&x, &y, &m, cost).unwrap().value;
            assert!(v + 1e-12 >= full);
        }
    }

    #[test]
    fn unreachable_terminal_is_reported() {
        // (1,1) and (3,3) without a bridge
        let m = SparsePathMatrix::from_entries(
            3,
            0,
            0.0,
            vec![
                SpmEntry {
                    row: 1,
                    col: 1,
                    weight: 1.0,
                },
                SpmEntry {
                    row: 3,
                    col: 3,
                    weight: 1.0,
                },
            ],
        )
        .unwrap();
        let x = ts(&[0.0, 1.0, 2.0]);
        let y = ts(&[0.5, 1.5, 2.5]);
        let got = sp_dtw(&x, &y, &m, LocalCost::SquaredDifference).unwrap();
        assert!(!got.reachable);
        assert_eq!(got.visited, 2);
        let k = sp_krdtw(&x, &y, &m, KernelConfig::new(1.0).unwrap()).unwrap();
        assert!(!k.reachable);
        assert_eq!(k.value, f64::NEG_INFINITY);
    }

    #[test]
    fn missing_terminal_cell_is_unreachable() {
        let m = SparsePathMatrix::from_entries(
            3,
            0,
            0.0,
            vec![
                SpmEntry {
                    row: 1,
                    col: 1,
                    weight: 1.0,
                },
                SpmEntry {
                    row: 2,
                    col: 2,
                    weight: 1.0,
                },
            ],
        )
        .unwrap();
        let x = ts(&[0.0, 1.0, 2.0]);
        let got = sp_dtw(&x, &x, &m, LocalCost::SquaredDifference).unwrap();
        assert!(!got.reachable);
    }

    #[test]
    fn weights_scale_cell_costs() {
        // doubling every weight doubles the value when all cells are kept
        let n = 6;
        let x = wave(n, 0.37);
        let y = wave(n, 0.83);
        let mut entries = Vec::new();
        for row in 1..=n as u32 {
            for col in 1..=n as u32 {
                entries.push(SpmEntry {
                    row,
                    col,
                    weight: 2.0,
                });
            }
        }
        let m = SparsePathMatrix::from_entries(n, 0, 0.0, entries).unwrap();
        let cost = LocalCost::SquaredDifference;
        let full = dtw(&x, &y, cost).unwrap().value;
        let got = sp_dtw(&x, &y, &m, cost).unwrap();
        assert!((got.value - 2.0 * full).abs() < 1e-9);
    }

    #[test]
    fn sp_krdtw_single_cell() {
        let cfg = KernelConfig::new(0.8).unwrap();
        let m = SparsePathMatrix::diagonal(1);
        let x = ts(&[0.4]);
        let y = ts(&[1.0]);
        let got = sp_krdtw(&x, &y, &m, cfg).unwrap();
        let expect = (2.0 * local_kernel(0.4, 1.0, cfg)).ln();
        assert!((got.value - expect).abs() < 1e-12);
        assert_eq!(got.visited, 1);
        assert!(got.reachable);
    }

    #[test]
    fn sp_krdtw_full_grid_matches_dense() {
        for n in [1usize, 2, 5, 13] {
            let cfg = KernelConfig::new(0.6).unwrap();
            let x = wave(n, 0.41);
            let y = wave(n, 0.29);
            let m = SparsePathMatrix::full_grid(n);
            let dense = krdtw(&x, &y, cfg).unwrap();
            let sparse = sp_krdtw(&x, &y, &m, cfg).unwrap();
            assert!(
                (dense.log_value - sparse.value).abs() < 1e-9,
                "T={n}: {} vs {}",
                dense.log_value,
                sparse.value
            );
            assert_eq!(sparse.visited, (n * n) as u64);
        }
    }

    #[test]
    fn sp_krdtw_ignores_weights() {
        let n = 5;
        let x = wave(n, 0.93);
        let y = wave(n, 0.17);
        let cfg = KernelConfig::new(1.1).unwrap();
        let unit = SparsePathMatrix::full_grid(n);
        let mut entries = unit.entries().to_vec();
        for (i, e) in entries.iter_mut().enumerate() {
            e.weight = (i + 1) as f64 * 0.7;
        }
        let weighted = SparsePathMatrix::from_entries(n, 0, 0.0, entries).unwrap();
        let a = sp_krdtw(&x, &y, &unit, cfg).unwrap();
        let b = sp_krdtw(&x, &y, &weighted, cfg).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn band_matrix_kernel_equals_banded_dense_kernel() {
        use crate::dense::krdtw_sc;
        for n in [4usize, 9, 15] {
            for pct in [0u8, 20, 100] {
                let band = BandConfig::new(pct).unwrap();
                let x = wave(n, 0.61);
                let y = wave(n, 0.27);
                let cfg = KernelConfig::new(0.8).unwrap();
                let m = SparsePathMatrix::band(n, band.radius(n));
                let a = sp_krdtw(&x, &y, &m, cfg).unwrap();
                let b = krdtw_sc(&x, &y, cfg, band).unwrap();
                assert!(
                    (a.value - b.log_value).abs() <= 1e-9 * a.value.abs().max(1.0),
                    "T={n} pct={pct}: {} vs {}",
                    a.value,
                    b.log_value
                );
                assert_eq!(a.visited, b.visited);
            }
        }
    }

    #[test]
    fn sp_krdtw_symmetric_under_symmetric_matrix() {
        let n = 7;
        let x = wave(n, 0.53);
        let y = wave(n, 0.79);
        let cfg = KernelConfig::new(0.9).unwrap();
        let m = SparsePathMatrix::band(n, 2);
        let a = sp_krdtw(&x, &y, &m, cfg).unwrap().value;
        let b = sp_krdtw(&y, &x, &m, cfg).unwrap().value;
        assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let m = SparsePathMatrix::full_grid(3);
        let x = ts(&[0.0, 1.0]);
        let y = ts(&[0.0, 1.0, 2.0]);
        assert!(sp_dtw(&x, &y, &m, LocalCost::SquaredDifference).is_err());
        assert!(sp_krdtw(&x, &y, &m, KernelConfig::new(1.0).unwrap()).is_err());
    }
}

//! Shared test oracles, kept independent of the library's DP
//! implementations: exhaustive path enumeration, brute-force measure
//! evaluation, a Jacobi eigensolver, a reference SMO, and deterministic
//! data generators.

#![allow(dead_code)]

use elastic_sparse::dense::{local_kernel, KernelConfig, LocalCost};
use elastic_sparse::grid::{SparsePathMatrix, SpmEntry};
use elastic_sparse::series::{Dataset, TimeSeries};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// All admissible monotone unit-step paths from (1,1) to (tx,ty),
/// 1-based, built by recursive extension.
pub fn enumerate_paths(tx: usize, ty: usize) -> Vec<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    let mut stack = vec![(1usize, 1usize)];
    extend(&mut stack, tx, ty, &mut out);
    out
}

fn extend(
    path: &mut Vec<(usize, usize)>,
    tx: usize,
    ty: usize,
    out: &mut Vec<Vec<(usize, usize)>>,
) {
    let &(i, j) = path.last().expect("non-empty path");
    if (i, j) == (tx, ty) {
        out.push(path.clone());
        return;
    }
    for (di, dj) in [(1, 1), (1, 0), (0, 1)] {
        let (ni, nj) = (i + di, j + dj);
        if ni <= tx && nj <= ty {
            path.push((ni, nj));
            extend(path, tx, ty, out);
            path.pop();
        }
    }
}

/// Minimum summed local cost over all enumerated paths.
pub fn brute_dtw(x: &[f64], y: &[f64], cost: LocalCost) -> f64 {
    enumerate_paths(x.len(), y.len())
        .iter()
        .map(|p| {
            p.iter()
                .map(|&(i, j)| cost.eval(x[i - 1], y[j - 1]))
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Path-sum kernels: K1 multiplies the local kernel of every visited
/// cell; K2 multiplies per-step marginal factors (vertical steps use
/// κ(x_t, y_t), horizontal κ(x_t′, y_t′), diagonal the average). Both
/// apply a 1/3 factor per step and start from κ(x_1, y_1).
pub fn brute_krdtw(x: &[f64], y: &[f64], cfg: KernelConfig) -> (f64, f64) {
    let k = |a: f64, b: f64| local_kernel(a, b, cfg);
    let mut k1_sum = 0.0;
    let mut k2_sum = 0.0;
    for path in enumerate_paths(x.len(), y.len()) {
        let mut k1 = k(x[0], y[0]);
        let mut k2 = k(x[0], y[0]);
        for w in path.windows(2) {
            let (pi, pj) = w[0];
            let (i, j) = w[1];
            k1 *= (1.0 / 3.0) * k(x[i - 1], y[j - 1]);
            let step = if i > pi && j > pj {
                0.5 * (k(x[i - 1], y[i - 1]) + k(x[j - 1], y[j - 1]))
            } else if i > pi {
                k(x[i - 1], y[i - 1])
            } else {
                k(x[j - 1], y[j - 1])
            };
            k2 *= (1.0 / 3.0) * step;
        }
        k1_sum += k1;
        k2_sum += k2;
    }
    (k1_sum, k2_sum)
}

/// Reachability oracle over a sparse entry set: breadth-first search on
/// the admissible step graph, independent of the forward-DP check.
pub fn reachability_bfs(m: &SparsePathMatrix) -> bool {
    use std::collections::{HashSet, VecDeque};
    let cells: HashSet<(u32, u32)> = m.entries().iter().map(|e| (e.row, e.col)).collect();
    let t = m.t() as u32;
    if !cells.contains(&(1, 1)) {
        return false;
    }
    let mut seen = HashSet::new();
    let mut q = VecDeque::from([(1u32, 1u32)]);
    seen.insert((1, 1));
    while let Some((i, j)) = q.pop_front() {
        if (i, j) == (t, t) {
            return true;
        }
        for (di, dj) in [(1, 0), (0, 1), (1, 1)] {
            let n = (i + di, j + dj);
            if n.0 <= t && n.1 <= t && cells.contains(&n) && seen.insert(n) {
                q.push_back(n);
            }
        }
    }
    false
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(n: usize, data: &[f64]) -> Vec<f64> {
    assert_eq!(data.len(), n * n);
    let mut a = data.to_vec();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i * n + j] * a[i * n + j];
            }
        }
        if off < 1e-22 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = 0.5 * (aqq - app) / apq;
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

/// Reference SMO (simplified, full-sweep second choice, no error cache):
/// structurally different from the library's solver, for cross-checks.
pub fn reference_smo(
    gram: &[f64],
    n: usize,
    y: &[f64],
    c: f64,
    max_passes: usize,
) -> (Vec<f64>, f64) {
    let tol = 1e-3;
    let mut alpha = vec![0.0f64; n];
    let mut b = 0.0f64;
    let f = |alpha: &[f64], b: f64, i: usize| -> f64 {
        let mut s = b;
        for j in 0..n {
            if alpha[j] != 0.0 {
                s += alpha[j] * y[j] * gram[j * n + i];
            }
        }
        s
    };
    let mut passes = 0;
    while passes < max_passes {
        let mut changed = 0;
        for i in 0..n {
            let ei = f(&alpha, b, i) - y[i];
            if !((y[i] * ei < -tol && alpha[i] < c) || (y[i] * ei > tol && alpha[i] > 0.0)) {
                continue;
            }
            for off in 1..n {
                let j = (i + off) % n;
                let ej = f(&alpha, b, j) - y[j];
                let (ai_old, aj_old) = (alpha[i], alpha[j]);
                let (lo, hi) = if y[i] != y[j] {
                    ((aj_old - ai_old).max(0.0), (c + aj_old - ai_old).min(c))
                } else {
                    ((ai_old + aj_old - c).max(0.0), (ai_old + aj_old).min(c))
                };
                if lo >= hi {
                    continue;
                }
                let eta = 2.0 * gram[i * n + j] - gram[i * n + i] - gram[j * n + j];
                if eta >= 0.0 {
                    continue;
                }
                let mut aj = aj_old - y[j] * (ei - ej) / eta;
                aj = aj.clamp(lo, hi);
                if (aj - aj_old).abs() < 1e-5 {
                    continue;
                }
                let ai = ai_old + y[i] * y[j] * (aj_old - aj);
                let b1 = b
                    - ei
                    - y[i] * (ai - ai_old) * gram[i * n + i]
                    - y[j] * (aj - aj_old) * gram[i * n + j];
                let b2 = b
                    - ej
                    - y[i] * (ai - ai_old) * gram[i * n + j]
                    - y[j] * (aj - aj_old) * gram[j * n + j];
                alpha[i] = ai;
                alpha[j] = aj;
                b = if ai > 0.0 && ai < c {
                    b1
                } else if aj > 0.0 && aj < c {
                    b2
                } else {
                    0.5 * (b1 + b2)
                };
                changed += 1;
                break;
            }
        }
        if changed == 0 {
            passes += 1;
        } else {
            passes = 0;
        }
    }
    (alpha, b)
}

/// Deterministic two-moons fixture: `n` points on two interleaved
/// half-circles with small index-keyed jitter. Returns points and ±1
/// labels.
pub fn two_moons(n: usize) -> (Vec<[f64; 2]>, Vec<f64>) {
    let mut pts = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let half = n / 2;
    for i in 0..n {
        let frac = (i % half) as f64 / half as f64;
        let angle = std::f64::consts::PI * frac;
        let jitter = 0.05 * ((i as f64 * 12.9898).sin() * 43758.5453).fract();
        if i < half {
            pts.push([angle.cos() + jitter, angle.sin() - jitter]);
            labels.push(1.0);
        } else {
            pts.push([1.0 - angle.cos() + jitter, 0.5 - angle.sin() - jitter]);
            labels.push(-1.0);
        }
    }
    (pts, labels)
}

/// Gaussian Gram over 2-D points.
pub fn rbf_gram(pts: &[[f64; 2]], nu: f64) -> Vec<f64> {
    let n = pts.len();
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let d2 = (pts[i][0] - pts[j][0]).powi(2) + (pts[i][1] - pts[j][1]).powi(2);
            g[i * n + j] = (-nu * d2).exp();
        }
    }
    g
}

/// Random series with values drawn from a small integer set, DP-exact
/// under both local costs.
pub fn integer_series(rng: &mut StdRng, len: usize) -> TimeSeries {
    let v: Vec<f64> = (0..len).map(|_| rng.random_range(-4..=4) as f64).collect();
    TimeSeries::new(v).unwrap()
}

pub fn random_series(rng: &mut StdRng, len: usize) -> TimeSeries {
    let v: Vec<f64> = (0..len).map(|_| rng.random_range(-2.0..2.0)).collect();
    TimeSeries::new(v).unwrap()
}

/// Labeled synthetic dataset: each class follows a distinct waveform
/// template with per-item phase and amplitude perturbations.
pub fn synthetic_dataset(classes: usize, per_class: usize, t: usize, seed: u64) -> Dataset {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut items = Vec::new();
    for c in 0..classes {
        for _ in 0..per_class {
            let phase: f64 = rng.random_range(0.0..0.7);
            let amp: f64 = rng.random_range(0.8..1.2);
            let noise: f64 = 0.08;
            let v: Vec<f64> = (0..t)
                .map(|k| {
                    let x = k as f64 / t as f64;
                    let base = match c % 3 {
                        0 => (2.0 * std::f64::consts::PI * (x + phase)).sin(),
                        1 => 2.0 * (x + phase).fract() - 1.0,
                        _ => 1.0 - 4.0 * ((x + phase).fract() - 0.5).abs(),
                    };
                    amp * base + noise * rng.random_range(-1.0..1.0)
                })
                .collect();
            items.push(TimeSeries::with_label(v, c as i64).unwrap());
        }
    }
    Dataset::new(items).unwrap()
}

/// Random symmetric, connected sparse path matrix: diagonal plus a
/// random symmetric cell set.
pub fn random_symmetric_spm(rng: &mut StdRng, t: usize, fill: f64) -> SparsePathMatrix {
    let mut cells = std::collections::BTreeSet::new();
    for i in 1..=t as u32 {
        cells.insert((i, i));
    }
    for i in 1..=t as u32 {
        for j in 1..=t as u32 {
            if i != j && rng.random_bool(fill) {
                cells.insert((i, j));
                cells.insert((j, i));
            }
        }
    }
    let entries: Vec<SpmEntry> = cells
        .into_iter()
        .map(|(row, col)| SpmEntry {
            row,
            col,
            weight: 1.0,
        })
        .collect();
    SparsePathMatrix::from_entries(t, 0, 0.0, entries).unwrap()
}

/// Benchmark-table fixture: dataset name, series length T, corridor
/// percent, and the visited-cell counts for the banded, sparsified-DTW,
/// and sparsified-kernel measures.
pub struct TableRow {
    pub name: &'static str,
    pub t: usize,
    pub band_pct: u8,
    pub dtw_sc_visited: u64,
    pub sp_dtw_visited: u64,
    pub sp_krdtw_visited: u64,
}

pub const BENCHMARK_TABLE: [TableRow; 30] = [
    TableRow {
        name: "50Words",
        t: 270,
        band_pct: 6,
        dtw_sc_visited: 8_638,
        sp_dtw_visited: 12_798,
        sp_krdtw_visited: 12_682,
    },
    TableRow {
        name: "Adiac",
        t: 176,
        band_pct: 3,
        dtw_sc_visited: 1_906,
        sp_dtw_visited: 1_320,
        sp_krdtw_visited: 1_324,
    },
    TableRow {
        name: "ArrowHead",
        t: 251,
        band_pct: 0,
        dtw_sc_visited: 251,
        sp_dtw_visited: 4_233,
        sp_krdtw_visited: 3_793,
    },
    TableRow {
        name: "Beef",
        t: 470,
        band_pct: 0,
        dtw_sc_visited: 470,
        sp_dtw_visited: 11_974,
        sp_krdtw_visited: 10_973,
    },
    TableRow {
        name: "BeetleFly",
        t: 512,
        band_pct: 7,
        dtw_sc_visited: 35_092,
        sp_dtw_visited: 15_760,
        sp_krdtw_visited: 14_783,
    },
    TableRow {
        name: "BirdChicken",
        t: 512,
        band_pct: 6,
        dtw_sc_visited: 30_302,
        sp_dtw_visited: 61_738,
        sp_krdtw_visited: 72_438,
    },
    TableRow {
        name: "Car",
        t: 577,
        band_pct: 1,
        dtw_sc_visited: 6_317,
        sp_dtw_visited: 34_851,
        sp_krdtw_visited: 34_283,
    },
    TableRow {
        name: "CBF",
        t: 128,
        band_pct: 11,
        dtw_sc_visited: 3_502,
        sp_dtw_visited: 7_188,
        sp_krdtw_visited: 7_090,
    },
    TableRow {
        name: "ECGFiveDays",
        t: 136,
        band_pct: 0,
        dtw_sc_visited: 136,
        sp_dtw_visited: 2_288,
        sp_krdtw_visited: 2_170,
    },
    TableRow {
        name: "ElectricDevices",
        t: 96,
        band_pct: 14,
        dtw_sc_visited: 2_410,
        sp_dtw_visited: 1_224,
        sp_krdtw_visited: 1_228,
    },
    TableRow {
        name: "FaceFour",
        t: 350,
        band_pct: 2,
        dtw_sc_visited: 5_194,
        sp_dtw_visited: 7_162,
        sp_krdtw_visited: 6_539,
    },
    TableRow {
        name: "FacesUCR",
        t: 131,
        band_pct: 12,
        dtw_sc_visited: 3_821,
        sp_dtw_visited: 3_413,
        sp_krdtw_visited: 3_197,
    },
    TableRow {
        name: "Fish",
        t: 463,
        band_pct: 4,
        dtw_sc_visited: 16_789,
        sp_dtw_visited: 17_729,
        sp_krdtw_visited: 18_531,
    },
    TableRow {
        name: "FordB",
        t: 500,
        band_pct: 1,
        dtw_sc_visited: 5_470,
        sp_dtw_visited: 55_722,
        sp_krdtw_visited: 55_254,
    },
    TableRow {
        name: "Gun-Point",
        t: 150,
        band_pct: 0,
        dtw_sc_visited: 150,
        sp_dtw_visited: 5_140,
        sp_krdtw_visited: 5_159,
    },
    TableRow {
        name: "Ham",
        t: 431,
        band_pct: 0,
        dtw_sc_visited: 431,
        sp_dtw_visited: 10_581,
        sp_krdtw_visited: 10_375,
    },
    TableRow {
        name: "Haptics",
        t: 1092,
        band_pct: 2,
        dtw_sc_visited: 46_494,
        sp_dtw_visited: 263_322,
        sp_krdtw_visited: 260_049,
    },
    TableRow {
        name: "Herring",
        t: 512,
        band_pct: 5,
        dtw_sc_visited: 25_462,
        sp_dtw_visited: 27_256,
        sp_krdtw_visited: 27_002,
    },
    TableRow {
        name: "InlineSkate",
        t: 1882,
        band_pct: 14,
        dtw_sc_visited: 922_382,
        sp_dtw_visited: 560_484,
        sp_krdtw_visited: 689_409,
    },
    TableRow {
        name: "Lighting-2",
        t: 637,
        band_pct: 6,
        dtw_sc_visited: 47_567,
        sp_dtw_visited: 78_789,
        sp_krdtw_visited: 89_547,
    },
    TableRow {
        name: "Lighting-7",
        t: 319,
        band_pct: 5,
        dtw_sc_visited: 9_649,
        sp_dtw_visited: 26_435,
        sp_krdtw_visited: 27_019,
    },
    TableRow {
        name: "MedicalImages",
        t: 99,
        band_pct: 20,
        dtw_sc_visited: 3_481,
        sp_dtw_visited: 5_101,
        sp_krdtw_visited: 5_085,
    },
    TableRow {
        name: "OliveOil",
        t: 570,
        band_pct: 0,
        dtw_sc_visited: 570,
        sp_dtw_visited: 3_520,
        sp_krdtw_visited: 3_747,
    },
    TableRow {
        name: "OSULeaf",
        t: 427,
        band_pct: 7,
        dtw_sc_visited: 24_323,
        sp_dtw_visited: 61_045,
        sp_krdtw_visited: 61_757,
    },
    TableRow {
        name: "ScreenType",
        t: 720,
        band_pct: 17,
        dtw_sc_visited: 161_394,
        sp_dtw_visited: 274_048,
        sp_krdtw_visited: 279_345,
    },
    TableRow {
        name: "ShapesAll",
        t: 512,
        band_pct: 4,
        dtw_sc_visited: 20_572,
        sp_dtw_visited: 33_146,
        sp_krdtw_visited: 30_185,
    },
    TableRow {
        name: "SwedishLeaf",
        t: 128,
        band_pct: 2,
        dtw_sc_visited: 634,
        sp_dtw_visited: 1_100,
        sp_krdtw_visited: 1_096,
    },
    TableRow {
        name: "SyntheticControl",
        t: 60,
        band_pct: 6,
        dtw_sc_visited: 408,
        sp_dtw_visited: 610,
        sp_krdtw_visited: 674,
    },
    TableRow {
        name: "Trace",
        t: 275,
        band_pct: 3,
        dtw_sc_visited: 4_603,
        sp_dtw_visited: 17_263,
        sp_krdtw_visited: 17_529,
    },
    TableRow {
        name: "Wine",
        t: 234,
        band_pct: 0,
        dtw_sc_visited: 234,
        sp_dtw_visited: 992,
        sp_krdtw_visited: 1_072,
    },
];

/// 1-NN error-rate columns for the full and banded DTW across the 30
/// benchmark datasets, in table order.
pub const DTW_ERRORS: [f64; 30] = [
    0.310, 0.396, 0.297, 0.367, 0.300, 0.250, 0.267, 0.003, 0.232, 0.399, 0.170, 0.095, 0.177,
    0.406, 0.093, 0.533, 0.623, 0.469, 0.616, 0.131, 0.274, 0.263, 0.167, 0.409, 0.603, 0.232,
    0.208, 0.007, 0.000, 0.426,
];

pub const DTW_SC_ERRORS: [f64; 30] = [
    0.242, 0.391, 0.200, 0.333, 0.300, 0.300, 0.233, 0.004, 0.203, 0.376, 0.114, 0.088, 0.154,
    0.414, 0.087, 0.400, 0.588, 0.469, 0.613, 0.131, 0.288, 0.253, 0.133, 0.388, 0.589, 0.198,
    0.154, 0.017, 0.010, 0.389,
];

/// Published 1-NN error rates for the sparsified DTW, in table order
/// (for the loose accuracy scorecard).
pub const SP_DTW_ERRORS: [f64; 30] = [
    0.226, 0.391, 0.217, 0.267, 0.250, 0.250, 0.183, 0.014, 0.189, 0.394, 0.114, 0.080, 0.177,
    0.395, 0.027, 0.400, 0.584, 0.421, 0.592, 0.114, 0.260, 0.257, 0.133, 0.384, 0.589, 0.223,
    0.123, 0.010, 0.000, 0.351,
];

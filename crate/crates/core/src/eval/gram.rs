//! Symmetric kernel (Gram) matrices with a positive-semidefiniteness
//! contract, plus the kernel blocks needed for SVM prediction.
//!
//! Kernel values arrive in log domain and are cosine-normalized,
//! K̃(x,y) = exp(logK(x,y) − ½logK(x,x) − ½logK(y,y)),
//! which bounds the raw dynamic range and preserves definiteness.

use rayon::prelude::*;

use super::{EvalError, MeasureSpec};
use crate::dense::KernelConfig;
use crate::measures::euclidean;
use crate::series::{Dataset, TimeSeries};

/// Log-kernel between two series under a kernel-valued measure spec.
///
/// `Euclidean` is interpreted as the Gaussian kernel exp(−ν·d_E²), the
/// whole-series analogue of the local kernel; elastic kernel specs use
/// their own log values. Other specs are not kernels.
pub fn log_kernel(
    spec: &MeasureSpec,
    nu_for_ed: Option<KernelConfig>,
    x: &TimeSeries,
    y: &TimeSeries,
) -> Result<(f64, u64), EvalError> {
    match spec {
        MeasureSpec::Euclidean => {
            let cfg = nu_for_ed.ok_or_else(|| {
                EvalError::Dimension("Gaussian kernel over Euclidean distance needs nu".into())
            })?;
            let d = euclidean(x, y)?;
            Ok((-cfg.nu() * d * d, 0))
        }
        MeasureSpec::Krdtw(_) | MeasureSpec::KrdtwSc(..) | MeasureSpec::SpKrdtw(..) => {
            let r = spec.eval_pair(x, y)?;
            Ok((r.score, r.visited))
        }
        other => Err(EvalError::Dimension(format!(
            "measure {} is not a kernel; SVM supports ed, krdtw, krdtw_sc, sp_krdtw",
            other.name()
        ))),
    }
}

/// Symmetric n×n kernel matrix.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    n: usize,
    data: Vec<f64>,
}

impl GramMatrix {
    pub fn from_rows(n: usize, data: Vec<f64>) -> Result<Self, EvalError> {
        if data.len() != n * n {
            return Err(EvalError::Dimension(format!(
                "expected {}x{} = {} values, got {}",
                n,
                n,
                n * n,
                data.len()
            )));
        }
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Largest absolute difference between K(i,j) and K(j,i).
    pub fn asymmetry(&self) -> (f64, usize, usize) {
        let mut worst = (0.0, 0, 0);
        for i in 0..self.n {
            for j in 0..i {
                let d = (self.get(i, j) - self.get(j, i)).abs();
                if d > worst.0 {
                    worst = (d, i, j);
                }
            }
        }
        worst
    }

    /// Checks symmetry and positive semidefiniteness (within `tol`,
    /// relative to the largest diagonal element) via a Cholesky pass with
    /// tolerated pivot clamping.
    pub fn validate_psd(&self, tol: f64) -> Result<(), EvalError> {
        let (delta, i, j) = self.asymmetry();
        let scale = (0..self.n)
            .map(|k| self.get(k, k).abs())
            .fold(0.0f64, f64::max)
            .max(1e-300);
        if delta > tol * scale {
            return Err(EvalError::KernelNotSymmetric { i, j, delta });
        }
        // L is built in place; a pivot below -tol*scale certifies an
        // eigenvalue materially below zero.
        let n = self.n;
        let mut l = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if s < -tol * scale {
                        return Err(EvalError::KernelNotPsd { pivot: s, index: i });
                    }
                    l[i * n + i] = s.max(0.0).sqrt();
                } else {
                    let d = l[j * n + j];
                    l[i * n + j] = if d > 0.0 { s / d } else { 0.0 };
                }
            }
        }
        Ok(())
    }
}

/// Builds the cosine-normalized train Gram matrix for a kernel spec.
/// Returns the matrix and the total visited-cell count.
pub fn build_train_gram(
    train: &Dataset,
    spec: &MeasureSpec,
    nu_for_ed: Option<KernelConfig>,
) -> Result<(GramMatrix, u64), EvalError> {
    let n = train.len();
    if n == 0 {
        return Err(EvalError::EmptyInput("train"));
    }
    let diag: Vec<(f64, u64)> = train
        .items()
        .par_iter()
        .map(|s| log_kernel(spec, nu_for_ed, s, s))
        .collect::<Result<_, _>>()?;

    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let vals: Vec<(f64, u64)> = pairs
        .par_iter()
        .map(|&(i, j)| -> Result<(f64, u64), EvalError> {
            if i == j {
                return Ok((1.0, 0));
            }
            let (lk, visited) = log_kernel(spec, nu_for_ed, train.get(i), train.get(j))?;
            Ok(((lk - 0.5 * diag[i].0 - 0.5 * diag[j].0).exp(), visited))
        })
        .collect::<Result<_, _>>()?;

    let mut data = vec![0.0f64; n * n];
    let mut visited: u64 = diag.iter().map(|(_, v)| *v).sum();
    for (&(i, j), &(k, v)) in pairs.iter().zip(&vals) {
        data[i * n + j] = k;
        data[j * n + i] = k;
        visited += v;
    }
    Ok((GramMatrix { n, data }, visited))
}

/// Test×train kernel block, rows = test items, cosine-normalized with the
/// same per-item self-kernels.
#[derive(Debug, Clone)]
pub struct KernelBlock {
    n_test: usize,
    n_train: usize,
    data: Vec<f64>,
}

impl KernelBlock {
    pub fn from_rows(n_test: usize, n_train: usize, data: Vec<f64>) -> Result<Self, EvalError> {
        if data.len() != n_test * n_train {
            return Err(EvalError::Dimension(format!(
                "expected {}x{} values, got {}",
                n_test,
                n_train,
                data.len()
            )));
        }
        Ok(Self {
            n_test,
            n_train,
            data,
        })
    }

    pub fn n_test(&self) -> usize {
        self.n_test
    }

    pub fn n_train(&self) -> usize {
        self.n_train
    }

    #[inline]
    pub fn get(&self, test_i: usize, train_j: usize) -> f64 {
        self.data[test_i * self.n_train + train_j]
    }

    /// Row view of the block for one test item.
    pub fn row(&self, test_i: usize) -> &[f64] {
        &self.data[test_i * self.n_train..(test_i + 1) * self.n_train]
    }
}

/// Builds the test×train kernel block for prediction.
pub fn build_test_block(
    train: &Dataset,
    test: &Dataset,
    spec: &MeasureSpec,
    nu_for_ed: Option<KernelConfig>,
) -> Result<(KernelBlock, u64), EvalError> {
    let n_train = train.len();
    let n_test = test.len();
    if n_train == 0 || n_test == 0 {
        return Err(EvalError::EmptyInput("train or test"));
    }
    let train_diag: Vec<(f64, u64)> = train
        .items()
        .par_iter()
        .map(|s| log_kernel(spec, nu_for_ed, s, s))
        .collect::<Result<_, _>>()?;
    let rows: Vec<(Vec<f64>, u64)> = test
        .items()
        .par_iter()
        .map(|q| -> Result<(Vec<f64>, u64), EvalError> {
            let (qq, mut visited) = log_kernel(spec, nu_for_ed, q, q)?;
            let mut row = Vec::with_capacity(n_train);
            for (j, s) in train.items().iter().enumerate() {
                let (lk, v) = log_kernel(spec, nu_for_ed, q, s)?;
                visited += v;
                row.push((lk - 0.5 * qq - 0.5 * train_diag[j].0).exp());
            }
            Ok((row, visited))
        })
        .collect::<Result<_, _>>()?;

    let mut data = Vec::with_capacity(n_test * n_train);
    let mut visited: u64 = train_diag.iter().map(|(_, v)| *v).sum();
    for (row, v) in rows {
        data.extend_from_slice(&row);
        visited += v;
    }
    Ok((
        KernelBlock {
            n_test,
            n_train,
            data,
        },
        visited,
    ))
}

//! Classification and benchmarking: 1-NN, kernel SVM, leave-one-out grid
//! search, Wilcoxon signed-rank comparisons, and visited-cell accounting.

pub mod gram;
pub mod search;
pub mod svm;
pub mod wilcoxon;

use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::dense::{dtw, dtw_sc, krdtw, krdtw_sc, BandConfig, KernelConfig, LocalCost};
use crate::grid::SparsePathMatrix;
use crate::measures::{corr, daco, euclidean, minkowski, DacoConfig, MeasureError, MinkowskiOrder};
use crate::series::{Dataset, TimeSeries};
use crate::sparse::{sp_dtw, sp_krdtw};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("empty {0} set")]
    EmptyInput(&'static str),
    #[error("{0}")]
    Measure(#[from] MeasureError),
    #[error("{0}")]
    Grid(#[from] crate::grid::GridError),
    #[error("kernel matrix is not positive semidefinite within tolerance (pivot {pivot} at index {index})")]
    KernelNotPsd { pivot: f64, index: usize },
    #[error("kernel matrix is not symmetric: |K[{i},{j}] - K[{j},{i}]| = {delta}")]
    KernelNotSymmetric { i: usize, j: usize, delta: f64 },
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("series contains an unlabeled item at index {0}")]
    Unlabeled(usize),
}

/// A fully resolved (dis)similarity measure, ready for pairwise
/// evaluation. Sparse variants share their path matrix read-only.
#[derive(Debug, Clone)]
pub enum MeasureSpec {
    Euclidean,
    Minkowski(MinkowskiOrder),
    Corr,
    Daco(DacoConfig),
    Dtw(LocalCost),
    DtwSc(LocalCost, BandConfig),
    Krdtw(KernelConfig),
    KrdtwSc(KernelConfig, BandConfig),
    SpDtw(LocalCost, Arc<SparsePathMatrix>),
    SpKrdtw(KernelConfig, Arc<SparsePathMatrix>),
}

/// One pairwise evaluation: the raw score plus the number of grid cells
/// the measure visited (zero for the non-elastic measures).
#[derive(Debug, Clone, Copy)]
pub struct PairScore {
    pub score: f64,
    pub visited: u64,
}

impl MeasureSpec {
    /// Similarities are ranked by argmax, dissimilarities by argmin.
    pub fn is_similarity(&self) -> bool {
        matches!(
            self,
            MeasureSpec::Corr
                | MeasureSpec::Krdtw(_)
                | MeasureSpec::KrdtwSc(..)
                | MeasureSpec::SpKrdtw(..)
        )
    }

    /// True for measures evaluated over an alignment grid.
    pub fn is_elastic(&self) -> bool {
        !matches!(
            self,
            MeasureSpec::Euclidean
                | MeasureSpec::Minkowski(_)
                | MeasureSpec::Corr
                | MeasureSpec::Daco(_)
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            MeasureSpec::Euclidean => "ed",
            MeasureSpec::Minkowski(_) => "minkowski",
            MeasureSpec::Corr => "corr",
            MeasureSpec::Daco(_) => "daco",
            MeasureSpec::Dtw(_) => "dtw",
            MeasureSpec::DtwSc(..) => "dtw_sc",
            MeasureSpec::Krdtw(_) => "krdtw",
            MeasureSpec::KrdtwSc(..) => "krdtw_sc",
            MeasureSpec::SpDtw(..) => "sp_dtw",
            MeasureSpec::SpKrdtw(..) => "sp_krdtw",
        }
    }

    /// Human-readable parameter summary for report rows.
    pub fn params_string(&self) -> String {
        match self {
            MeasureSpec::Euclidean | MeasureSpec::Corr => String::new(),
            MeasureSpec::Minkowski(p) => format!("p={}", p.get()),
            MeasureSpec::Daco(cfg) => format!("k={}", cfg.lags()),
            MeasureSpec::Dtw(cost) => format!("cost={}", cost.name()),
            MeasureSpec::DtwSc(cost, band) => {
                format!("cost={} band_pct={}", cost.name(), band.pct())
            }
            MeasureSpec::Krdtw(k) => format!("nu={}", k.nu()),
            MeasureSpec::KrdtwSc(k, band) => format!("nu={} band_pct={}", k.nu(), band.pct()),
            MeasureSpec::SpDtw(cost, m) => format!(
                "cost={} theta={} gamma={} entries={}",
                cost.name(),
                m.theta(),
                m.gamma(),
                m.len()
            ),
            MeasureSpec::SpKrdtw(k, m) => format!(
                "nu={} theta={} gamma={} entries={}",
                k.nu(),
                m.theta(),
                m.gamma(),
                m.len()
            ),
        }
    }

    /// Evaluates the measure on one pair.
    pub fn eval_pair(&self, x: &TimeSeries, y: &TimeSeries) -> Result<PairScore, MeasureError> {
        let r = match self {
            MeasureSpec::Euclidean => PairScore {
                score: euclidean(x, y)?,
                visited: 0,
            },
            MeasureSpec::Minkowski(p) => PairScore {
                score: minkowski(x, y, *p)?,
                visited: 0,
            },
            MeasureSpec::Corr => PairScore {
                score: corr(x, y)?,
                visited: 0,
            },
            MeasureSpec::Daco(cfg) => PairScore {
                score: daco(x, y, *cfg)?,
                visited: 0,
            },
            MeasureSpec::Dtw(cost) => {
                let r = dtw(x, y, *cost)?;
                PairScore {
                    score: r.value,
                    visited: r.visited,
                }
            }
            MeasureSpec::DtwSc(cost, band) => {
                let r = dtw_sc(x, y, *cost, *band)?;
                PairScore {
                    score: r.value,
                    visited: r.visited,
                }
            }
            MeasureSpec::Krdtw(cfg) => {
                let r = krdtw(x, y, *cfg)?;
                PairScore {
                    score: r.log_value,
                    visited: r.visited,
                }
            }
            MeasureSpec::KrdtwSc(cfg, band) => {
                let r = krdtw_sc(x, y, *cfg, *band)?;
                PairScore {
                    score: r.log_value,
                    visited: r.visited,
                }
            }
            MeasureSpec::SpDtw(cost, m) => {
                let r = sp_dtw(x, y, m, *cost)?;
                PairScore {
                    score: r.value,
                    visited: r.visited,
                }
            }
            MeasureSpec::SpKrdtw(cfg, m) => {
                let r = sp_krdtw(x, y, m, *cfg)?;
                PairScore {
                    score: r.value,
                    visited: r.visited,
                }
            }
        };
        Ok(r)
    }
}

/// Classification outcome over a test set.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub error_rate: f64,
    pub predictions: Vec<i64>,
    /// Sum of grid cells visited over all pairwise evaluations.
    pub total_visited: u64,
    /// 100·(1 − visited/T²) averaged over the pairwise comparisons.
    pub speedup_pct: f64,
    pub chosen_params: String,
}

fn labels_of(ds: &Dataset) -> Result<Vec<i64>, EvalError> {
    ds.labels()
        .into_iter()
        .enumerate()
        .map(|(i, l)| l.ok_or(EvalError::Unlabeled(i)))
        .collect()
}

/// Index of the best-scoring train item; ties break toward the lowest
/// index. `higher_is_better` selects argmax vs argmin.
fn best_index(scores: &[f64], higher_is_better: bool) -> usize {
    let mut best = 0usize;
    for i in 1..scores.len() {
        let better = if higher_is_better {
            scores[i] > scores[best]
        } else {
            scores[i] < scores[best]
        };
        if better {
            best = i;
        }
    }
    best
}

/// 1-nearest-neighbor classification of `test` against `train`.
pub fn onenn(train: &Dataset, test: &Dataset, spec: &MeasureSpec) -> Result<EvalReport, EvalError> {
    if train.is_empty() {
        return Err(EvalError::EmptyInput("train"));
    }
    if test.is_empty() {
        return Err(EvalError::EmptyInput("test"));
    }
    let train_labels = labels_of(train)?;
    let test_labels = labels_of(test)?;
    let higher = spec.is_similarity();

    let per_item: Vec<(i64, u64)> = test
        .items()
        .par_iter()
        .map(|q| -> Result<(i64, u64), EvalError> {
            let mut scores = Vec::with_capacity(train.len());
            let mut visited = 0u64;
            for s in train.items() {
                let r = spec.eval_pair(q, s)?;
                scores.push(r.score);
                visited += r.visited;
            }
            let best = best_index(&scores, higher);
            Ok((train_labels[best], visited))
        })
        .collect::<Result<_, _>>()?;

    let predictions: Vec<i64> = per_item.iter().map(|(l, _)| *l).collect();
    let total_visited: u64 = per_item.iter().map(|(_, v)| *v).sum();
    let mismatches = predictions
        .iter()
        .zip(&test_labels)
        .filter(|(p, t)| p != t)
        .count();
    let ncomp = (train.len() * test.len()) as u64;
    let t = train.series_len() as u64;
    Ok(EvalReport {
        error_rate: mismatches as f64 / test.len() as f64,
        predictions,
        total_visited,
        speedup_pct: speedup_mean(total_visited, ncomp, t),
        chosen_params: spec.params_string(),
    })
}

/// Leave-one-out 1-NN error on the training set.
pub fn loo_error(train: &Dataset, spec: &MeasureSpec) -> Result<f64, EvalError> {
    if train.len() < 2 {
        return Err(EvalError::EmptyInput("train"));
    }
    let labels = labels_of(train)?;
    let higher = spec.is_similarity();
    let n = train.len();

    let mismatches: usize = (0..n)
        .into_par_iter()
        .map(|q| -> Result<usize, EvalError> {
            let mut best: Option<(f64, usize)> = None;
            for (i, s) in train.items().iter().enumerate() {
                if i == q {
                    continue;
                }
                let score = spec.eval_pair(train.get(q), s)?.score;
                let better = match best {
                    None => true,
                    Some((bs, _)) => {
                        if higher {
                            score > bs
                        } else {
                            score < bs
                        }
                    }
                };
                if better {
                    best = Some((score, i));
                }
            }
            let (_, bi) = best.expect("n >= 2 guarantees a neighbor");
            Ok(usize::from(labels[bi] != labels[q]))
        })
        .sum::<Result<usize, EvalError>>()?;

    Ok(mismatches as f64 / n as f64)
}

/// Speed-up percentage for one pairwise comparison: 100·(1 − visited/T²).
pub fn speedup(visited: u64, t: usize) -> f64 {
    let t2 = (t as u64 * t as u64) as f64;
    100.0 * (1.0 - visited as f64 / t2)
}

fn speedup_mean(total_visited: u64, comparisons: u64, t: u64) -> f64 {
    if comparisons == 0 {
        return 0.0;
    }
    let t2 = (t * t) as f64;
    100.0 * (1.0 - (total_visited as f64 / comparisons as f64) / t2)
}

/// Rounds for report display (1 decimal), mirroring the benchmark tables.
pub fn round1(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

//! Hyperparameter selection: leave-one-out 1-NN grid search for the
//! measure parameters, stratified k-fold cross-validation for the SVM
//! box constraint.
//!
//! Tie-breaking always prefers the sparser or smaller setting: larger θ,
//! smaller band radius, smaller γ, then smaller ν.

use std::sync::Arc;

use super::gram::{GramMatrix, KernelBlock};
use super::svm::{svm_predict, svm_train, SvmConfig};
use super::{loo_error, EvalError, MeasureSpec};
use crate::dense::{BandConfig, KernelConfig, LocalCost};
use crate::grid::{
    accumulate_paths, normalize_grid, sparsify, CountGrid, OccupancyGrid, SparsifyConfig,
};
use crate::measures::{DacoConfig, MinkowskiOrder};
use crate::series::Dataset;

/// One evaluated lattice point.
#[derive(Debug, Clone)]
pub struct SearchPoint {
    pub label: String,
    pub error: f64,
}

/// Chosen measure plus the full error curve over the lattice.
#[derive(Debug, Clone)]
pub struct GridSearchOutcome {
    pub chosen: MeasureSpec,
    pub chosen_label: String,
    pub best_error: f64,
    pub curve: Vec<SearchPoint>,
}

/// θ lattice used by the threshold line search.
pub fn default_theta_grid() -> Vec<u64> {
    (0..=15).collect()
}

/// γ lattice for the weighting exponent.
pub fn default_gamma_grid() -> Vec<f64> {
    vec![0.0, 0.25, 0.5, 1.0, 2.0]
}

/// Corridor radius lattice, in percent of T.
pub fn default_band_grid() -> Vec<u8> {
    (0..=20).collect()
}

/// Box-constraint lattice for the SVM.
pub fn default_c_grid() -> Vec<f64> {
    vec![0.1, 1.0, 10.0, 100.0]
}

/// DACO lag lattice: logarithmic coverage of 1..T−1.
pub fn default_daco_grid(t: usize) -> Vec<usize> {
    let mut lags = vec![1, t.div_ceil(8), t.div_ceil(4), t.div_ceil(2), t - 1];
    lags.retain(|&k| k >= 1 && k < t);
    lags.sort_unstable();
    lags.dedup();
    lags
}

/// ν lattice: {0.01, 0.1, 1, 10} scaled by 1/median(pairwise squared
/// sample differences) over the first series of the training set.
pub fn default_nu_grid(train: &Dataset) -> Vec<f64> {
    let scale = median_pairwise_sq_diff(train).max(1e-12);
    vec![0.01, 0.1, 1.0, 10.0]
        .into_iter()
        .map(|v| v / scale)
        .collect()
}

/// Median of the aligned squared element differences (x_i(t) − x_j(t))²
/// over the first min(N, 30) series; deterministic.
pub fn median_pairwise_sq_diff(train: &Dataset) -> f64 {
    let n = train.len().min(30);
    let mut diffs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (train.get(i).values(), train.get(j).values());
            diffs.extend(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)));
        }
    }
    if diffs.is_empty() {
        return 1.0;
    }
    diffs.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    diffs[diffs.len() / 2]
}

/// Learned occupancy statistics, computed once per training set and
/// shared by every lattice point of a θ/γ search.
pub struct LearnedGrid {
    pub counts: CountGrid,
    pub occupancy: OccupancyGrid,
}

impl LearnedGrid {
    pub fn learn(train: &Dataset, cost: LocalCost) -> Result<Self, EvalError> {
        let counts = accumulate_paths(train, cost)?;
        let occupancy = normalize_grid(&counts)?;
        Ok(Self { counts, occupancy })
    }
}

/// Runs LOO 1-NN over explicit candidates; ties break toward the earlier
/// candidate, so callers order candidates by their tie-break preference.
pub fn grid_search_loo(
    train: &Dataset,
    candidates: Vec<(String, MeasureSpec)>,
) -> Result<GridSearchOutcome, EvalError> {
    if candidates.is_empty() {
        return Err(EvalError::EmptyInput("candidate grid"));
    }
    let mut curve = Vec::with_capacity(candidates.len());
    let mut best: Option<(f64, String, MeasureSpec)> = None;
    for (label, spec) in candidates {
        let err = loo_error(train, &spec)?;
        curve.push(SearchPoint {
            label: label.clone(),
            error: err,
        });
        let better = match &best {
            None => true,
            Some((be, _, _)) => err < *be,
        };
        if better {
            best = Some((err, label, spec));
        }
    }
    let (best_error, chosen_label, chosen) = best.expect("non-empty grid");
    Ok(GridSearchOutcome {
        chosen,
        chosen_label,
        best_error,
        curve,
    })
}

/// θ×γ leave-one-out search for the sparsified DTW. The occupancy grid is
/// learned once from the full training set; each lattice point only
/// re-thresholds it.
pub fn search_sp_dtw(
    train: &Dataset,
    cost: LocalCost,
    learned: &LearnedGrid,
    thetas: &[u64],
    gammas: &[f64],
) -> Result<GridSearchOutcome, EvalError> {
    // larger θ first, then smaller γ: ties resolve to the sparser model
    let mut thetas = thetas.to_vec();
    thetas.sort_unstable_by(|a, b| b.cmp(a));
    let mut gammas = gammas.to_vec();
    gammas.sort_by(|a, b| a.partial_cmp(b).expect("finite gamma"));

    let mut evaluated = Vec::new();
    for &theta in &thetas {
        for &gamma in &gammas {
            let cfg = match SparsifyConfig::new(theta, gamma) {
                Ok(c) => c,
                Err(_) => continue,
            };
            match sparsify(&learned.counts, &learned.occupancy, cfg) {
                Ok(m) => {
                    let spec = MeasureSpec::SpDtw(cost, Arc::new(m));
                    evaluated.push((format!("theta={theta} gamma={gamma}"), spec));
                }
                // θ at or above the corner count has no admissible matrix
                Err(crate::grid::GridError::OverThreshold { .. }) => continue,
                Err(e) => return Err(e.into()),
            }
        }
    }
    grid_search_loo(train, evaluated)
}

/// θ×ν search for the sparsified kernel (weights are ignored by the
/// kernel, so γ is pinned to zero).
pub fn search_sp_krdtw(
    train: &Dataset,
    learned: &LearnedGrid,
    thetas: &[u64],
    nus: &[f64],
) -> Result<GridSearchOutcome, EvalError> {
    let mut thetas = thetas.to_vec();
    thetas.sort_unstable_by(|a, b| b.cmp(a));
    let mut nus = nus.to_vec();
    nus.sort_by(|a, b| a.partial_cmp(b).expect("finite nu"));

    let mut evaluated = Vec::new();
    for &theta in &thetas {
        let cfg = SparsifyConfig::new(theta, 0.0).expect("gamma 0 is valid");
        let m = match sparsify(&learned.counts, &learned.occupancy, cfg) {
            Ok(m) => Arc::new(m),
            Err(crate::grid::GridError::OverThreshold { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        for &nu in &nus {
            let k = KernelConfig::new(nu).map_err(EvalError::Measure)?;
            evaluated.push((
                format!("theta={theta} nu={nu}"),
                MeasureSpec::SpKrdtw(k, Arc::clone(&m)),
            ));
        }
    }
    grid_search_loo(train, evaluated)
}

/// Corridor-width search for the banded DTW (smaller radius wins ties).
pub fn search_band(
    train: &Dataset,
    cost: LocalCost,
    pcts: &[u8],
) -> Result<GridSearchOutcome, EvalError> {
    let mut pcts = pcts.to_vec();
    pcts.sort_unstable();
    let candidates = pcts
        .iter()
        .map(|&pct| {
            Ok((
                format!("band_pct={pct}"),
                MeasureSpec::DtwSc(cost, BandConfig::new(pct).map_err(EvalError::Measure)?),
            ))
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    grid_search_loo(train, candidates)
}

/// ν search for the dense kernel, optionally banded.
pub fn search_nu(
    train: &Dataset,
    nus: &[f64],
    band: Option<BandConfig>,
) -> Result<GridSearchOutcome, EvalError> {
    let mut nus = nus.to_vec();
    nus.sort_by(|a, b| a.partial_cmp(b).expect("finite nu"));
    let candidates = nus
        .iter()
        .map(|&nu| {
            let k = KernelConfig::new(nu).map_err(EvalError::Measure)?;
            let spec = match band {
                Some(b) => MeasureSpec::KrdtwSc(k, b),
                None => MeasureSpec::Krdtw(k),
            };
            Ok((format!("nu={nu}"), spec))
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    grid_search_loo(train, candidates)
}

/// Lag-count search for DACO.
pub fn search_daco(train: &Dataset, lags: &[usize]) -> Result<GridSearchOutcome, EvalError> {
    let candidates = lags
        .iter()
        .map(|&k| {
            Ok((
                format!("k={k}"),
                MeasureSpec::Daco(DacoConfig::new(k).map_err(EvalError::Measure)?),
            ))
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    grid_search_loo(train, candidates)
}

/// Stratified k-fold assignment: indices sorted by (label, index) and
/// dealt round-robin, so every fold sees every class when possible.
pub fn stratified_folds(labels: &[i64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by_key(|&i| (labels[i], i));
    let mut fold = vec![0usize; labels.len()];
    for (pos, &i) in order.iter().enumerate() {
        fold[i] = pos % k;
    }
    fold
}

/// Chooses the SVM box constraint by stratified 5-fold cross-validation
/// on a precomputed train Gram; ties prefer the smaller C.
pub fn select_svm_c(
    gram: &GramMatrix,
    labels: &[i64],
    c_grid: &[f64],
) -> Result<(f64, Vec<SearchPoint>), EvalError> {
    let n = gram.n();
    let k = 5.min(n);
    let fold = stratified_folds(labels, k);
    let mut curve = Vec::new();
    let mut best: Option<(f64, f64)> = None; // (error, c)
    let mut cs = c_grid.to_vec();
    cs.sort_by(|a, b| a.partial_cmp(b).expect("finite C"));
    for &c in &cs {
        let mut errors = 0usize;
        let mut total = 0usize;
        for f in 0..k {
            let train_idx: Vec<usize> = (0..n).filter(|i| fold[*i] != f).collect();
            let test_idx: Vec<usize> = (0..n).filter(|i| fold[*i] == f).collect();
            if test_idx.is_empty() || train_idx.is_empty() {
                continue;
            }
            let train_labels: Vec<i64> = train_idx.iter().map(|&i| labels[i]).collect();
            let mut distinct = train_labels.clone();
            distinct.sort_unstable();
            distinct.dedup();
            if distinct.len() < 2 {
                continue;
            }
            let m = train_idx.len();
            let mut sub = vec![0.0; m * m];
            for (r, &ir) in train_idx.iter().enumerate() {
                for (s, &is) in train_idx.iter().enumerate() {
                    sub[r * m + s] = gram.get(ir, is);
                }
            }
            let sub_gram = GramMatrix::from_rows(m, sub)?;
            let cfg = SvmConfig {
                c,
                ..Default::default()
            };
            let model = svm_train(&sub_gram, &train_labels, &cfg)?;
            let mut block = vec![0.0; test_idx.len() * m];
            for (r, &iq) in test_idx.iter().enumerate() {
                for (s, &is) in train_idx.iter().enumerate() {
                    block[r * m + s] = gram.get(iq, is);
                }
            }
            let preds = svm_predict(&model, &KernelBlock::from_rows(test_idx.len(), m, block)?)?;
            errors += preds
                .iter()
                .zip(test_idx.iter().map(|&i| labels[i]))
                .filter(|(p, t)| **p != *t)
                .count();
            total += test_idx.len();
        }
        let err = if total > 0 {
            errors as f64 / total as f64
        } else {
            1.0
        };
        curve.push(SearchPoint {
            label: format!("C={c}"),
            error: err,
        });
        if best.is_none_or(|(be, _)| err < be) {
            best = Some((err, c));
        }
    }
    let (_, c) = best.ok_or(EvalError::EmptyInput("C grid"))?;
    Ok((c, curve))
}

/// Measure kinds the CLI and FFI can name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    Euclidean,
    Minkowski,
    Corr,
    Daco,
    Dtw,
    DtwSc,
    Krdtw,
    KrdtwSc,
    SpDtw,
    SpKrdtw,
}

impl MeasureKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "ed" | "euclidean" => MeasureKind::Euclidean,
            "minkowski" => MeasureKind::Minkowski,
            "corr" => MeasureKind::Corr,
            "daco" => MeasureKind::Daco,
            "dtw" => MeasureKind::Dtw,
            "dtw_sc" | "dtw-sc" => MeasureKind::DtwSc,
            "krdtw" => MeasureKind::Krdtw,
            "krdtw_sc" | "krdtw-sc" => MeasureKind::KrdtwSc,
            "sp_dtw" | "sp-dtw" => MeasureKind::SpDtw,
            "sp_krdtw" | "sp-krdtw" => MeasureKind::SpKrdtw,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::Euclidean => "ed",
            MeasureKind::Minkowski => "minkowski",
            MeasureKind::Corr => "corr",
            MeasureKind::Daco => "daco",
            MeasureKind::Dtw => "dtw",
            MeasureKind::DtwSc => "dtw_sc",
            MeasureKind::Krdtw => "krdtw",
            MeasureKind::KrdtwSc => "krdtw_sc",
            MeasureKind::SpDtw => "sp_dtw",
            MeasureKind::SpKrdtw => "sp_krdtw",
        }
    }
}

/// Fixed parameters supplied by the caller; anything left `None` is
/// grid-searched on the training set.
#[derive(Debug, Clone, Default)]
pub struct ParamOverrides {
    pub cost: Option<LocalCost>,
    pub theta: Option<u64>,
    pub gamma: Option<f64>,
    pub nu: Option<f64>,
    pub band_pct: Option<u8>,
    pub minkowski_p: Option<f64>,
    pub daco_lags: Option<usize>,
    pub spm: Option<Arc<crate::grid::SparsePathMatrix>>,
}

/// A measure resolved against a training set, with the search curve when
/// a grid search ran.
pub struct ResolvedMeasure {
    pub spec: MeasureSpec,
    pub curve: Vec<SearchPoint>,
}

/// Resolves a measure kind into a concrete spec, grid-searching any
/// unspecified hyperparameters with leave-one-out 1-NN on `train`.
pub fn resolve_spec(
    train: &Dataset,
    kind: MeasureKind,
    ov: &ParamOverrides,
) -> Result<ResolvedMeasure, EvalError> {
    let cost = ov.cost.unwrap_or_default();
    let plain = |spec: MeasureSpec| ResolvedMeasure {
        spec,
        curve: Vec::new(),
    };
    Ok(match kind {
        MeasureKind::Euclidean => plain(MeasureSpec::Euclidean),
        MeasureKind::Corr => plain(MeasureSpec::Corr),
        MeasureKind::Minkowski => {
            let p = ov.minkowski_p.unwrap_or(2.0);
            plain(MeasureSpec::Minkowski(
                MinkowskiOrder::new(p).map_err(EvalError::Measure)?,
            ))
        }
        MeasureKind::Daco => match ov.daco_lags {
            Some(k) => plain(MeasureSpec::Daco(
                DacoConfig::new(k).map_err(EvalError::Measure)?,
            )),
            None => {
                let out = search_daco(train, &default_daco_grid(train.series_len()))?;
                ResolvedMeasure {
                    spec: out.chosen,
                    curve: out.curve,
                }
            }
        },
        MeasureKind::Dtw => plain(MeasureSpec::Dtw(cost)),
        MeasureKind::DtwSc => match ov.band_pct {
            Some(pct) => plain(MeasureSpec::DtwSc(
                cost,
                BandConfig::new(pct).map_err(EvalError::Measure)?,
            )),
            None => {
                let out = search_band(train, cost, &default_band_grid())?;
                ResolvedMeasure {
                    spec: out.chosen,
                    curve: out.curve,
                }
            }
        },
        MeasureKind::Krdtw | MeasureKind::KrdtwSc => {
            let band = match (kind, ov.band_pct) {
                (MeasureKind::KrdtwSc, Some(pct)) => {
                    Some(BandConfig::new(pct).map_err(EvalError::Measure)?)
                }
                (MeasureKind::KrdtwSc, None) => {
                    let out = search_band(train, cost, &default_band_grid())?;
                    match out.chosen {
                        MeasureSpec::DtwSc(_, b) => Some(b),
                        _ => unreachable!("band search yields banded specs"),
                    }
                }
                _ => None,
            };
            match ov.nu {
                Some(nu) => {
                    let k = KernelConfig::new(nu).map_err(EvalError::Measure)?;
                    plain(match band {
                        Some(b) => MeasureSpec::KrdtwSc(k, b),
                        None => MeasureSpec::Krdtw(k),
                    })
                }
                None => {
                    let out = search_nu(train, &default_nu_grid(train), band)?;
                    ResolvedMeasure {
                        spec: out.chosen,
                        curve: out.curve,
                    }
                }
            }
        }
        MeasureKind::SpDtw => {
            if let Some(m) = &ov.spm {
                return Ok(plain(MeasureSpec::SpDtw(cost, Arc::clone(m))));
            }
            // fully pinned parameters need no leave-one-out pass
            if let (Some(theta), Some(gamma)) = (ov.theta, ov.gamma) {
                let learned = LearnedGrid::learn(train, cost)?;
                let m = sparsify(
                    &learned.counts,
                    &learned.occupancy,
                    SparsifyConfig::new(theta, gamma)?,
                )?;
                return Ok(plain(MeasureSpec::SpDtw(cost, Arc::new(m))));
            }
            let learned = LearnedGrid::learn(train, cost)?;
            let thetas = match ov.theta {
                Some(t) => vec![t],
                None => default_theta_grid(),
            };
            let gammas = match ov.gamma {
                Some(g) => vec![g],
                None => default_gamma_grid(),
            };
            let out = search_sp_dtw(train, cost, &learned, &thetas, &gammas)?;
            ResolvedMeasure {
                spec: out.chosen,
                curve: out.curve,
            }
        }
        MeasureKind::SpKrdtw => {
            if let Some(m) = &ov.spm {
                let nu = match ov.nu {
                    Some(nu) => nu,
                    None => {
                        let out = search_spm_nu(train, m, &default_nu_grid(train))?;
                        return Ok(ResolvedMeasure {
                            spec: out.chosen,
                            curve: out.curve,
                        });
                    }
                };
                let k = KernelConfig::new(nu).map_err(EvalError::Measure)?;
                return Ok(plain(MeasureSpec::SpKrdtw(k, Arc::clone(m))));
            }
            if let (Some(theta), Some(nu)) = (ov.theta, ov.nu) {
                let learned = LearnedGrid::learn(train, cost)?;
                let m = sparsify(
                    &learned.counts,
                    &learned.occupancy,
                    SparsifyConfig::new(theta, 0.0)?,
                )?;
                let k = KernelConfig::new(nu).map_err(EvalError::Measure)?;
                return Ok(plain(MeasureSpec::SpKrdtw(k, Arc::new(m))));
            }
            let learned = LearnedGrid::learn(train, cost)?;
            let thetas = match ov.theta {
                Some(t) => vec![t],
                None => default_theta_grid(),
            };
            let nus = match ov.nu {
                Some(nu) => vec![nu],
                None => default_nu_grid(train),
            };
            let out = search_sp_krdtw(train, &learned, &thetas, &nus)?;
            ResolvedMeasure {
                spec: out.chosen,
                curve: out.curve,
            }
        }
    })
}

/// ν search against a fixed, preloaded path matrix.
pub fn search_spm_nu(
    train: &Dataset,
    m: &Arc<crate::grid::SparsePathMatrix>,
    nus: &[f64],
) -> Result<GridSearchOutcome, EvalError> {
    let mut nus = nus.to_vec();
    nus.sort_by(|a, b| a.partial_cmp(b).expect("finite nu"));
    let candidates = nus
        .iter()
        .map(|&nu| {
            let k = KernelConfig::new(nu).map_err(EvalError::Measure)?;
            Ok((format!("nu={nu}"), MeasureSpec::SpKrdtw(k, Arc::clone(m))))
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    grid_search_loo(train, candidates)
}

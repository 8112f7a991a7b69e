//! Kernel SVM on precomputed Gram matrices, trained per class pair by
//! sequential minimal optimization.
//!
//! The pair-selection heuristics are deterministic (no randomness): the
//! first index comes from scanning KKT violators, the second maximizes
//! |E_i − E_j| with a sequential fallback, so repeated runs are
//! bit-identical.

use super::gram::{GramMatrix, KernelBlock};
use super::EvalError;

/// SMO hyperparameters.
#[derive(Debug, Clone, Copy)]
pub struct SvmConfig {
    /// Box constraint C > 0.
    pub c: f64,
    /// KKT violation tolerance.
    pub tolerance: f64,
    /// Maximum number of full passes without progress before stopping.
    pub max_passes: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            tolerance: 1e-3,
            max_passes: 10,
        }
    }
}

/// One binary decision function in dual form.
#[derive(Debug, Clone)]
pub struct BinaryModel {
    /// Voted class when the decision value is nonnegative.
    pub class_pos: i64,
    /// Voted class otherwise.
    pub class_neg: i64,
    /// Indices into the full training set, ascending.
    pub idx: Vec<usize>,
    /// Signed dual coefficients α_i·y_i for each index.
    pub alpha_y: Vec<f64>,
    /// Unsigned duals α_i (diagnostics; 0 ≤ α ≤ C).
    pub alpha: Vec<f64>,
    pub bias: f64,
    /// Dual objective after each outer pass (nondecreasing).
    pub objective_trace: Vec<f64>,
}

impl BinaryModel {
    /// Decision value from a kernel row over the full training set.
    pub fn decide(&self, kernel_row_full: &[f64]) -> f64 {
        let mut s = self.bias;
        for (k, &i) in self.idx.iter().enumerate() {
            s += self.alpha_y[k] * kernel_row_full[i];
        }
        s
    }

    /// Σ α_i y_i (zero within tolerance at optimality).
    pub fn dual_balance(&self) -> f64 {
        self.alpha_y.iter().sum()
    }
}

/// One-vs-one multiclass model.
#[derive(Debug, Clone)]
pub struct SvmModel {
    pub classes: Vec<i64>,
    pub binaries: Vec<BinaryModel>,
    pub n_train: usize,
}

fn dual_objective(gram: &[f64], n: usize, alpha: &[f64], y: &[f64]) -> f64 {
    let mut obj = 0.0;
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        obj += alpha[i];
        let mut s = 0.0;
        for j in 0..n {
            if alpha[j] != 0.0 {
                s += alpha[j] * y[j] * gram[i * n + j];
            }
        }
        obj -= 0.5 * alpha[i] * y[i] * s;
    }
    obj
}

/// Trains one binary problem by SMO on the sub-Gram (already restricted
/// to the two classes). `y` holds ±1.
fn smo_binary(gram: &[f64], n: usize, y: &[f64], cfg: &SvmConfig) -> (Vec<f64>, f64, Vec<f64>) {
    let c = cfg.c;
    let tol = cfg.tolerance;
    let mut alpha = vec![0.0f64; n];
    let mut bias = 0.0f64;
    // Error cache: E_i = f(x_i) − y_i; all alphas start at zero.
    let mut errors: Vec<f64> = y.iter().map(|&yi| -yi).collect();
    let mut trace = Vec::new();

    let mut passes = 0usize;
    let mut examine_all = true;
    while passes < cfg.max_passes {
        let mut changed = 0usize;
        for i in 0..n {
            if !examine_all && (alpha[i] <= 0.0 || alpha[i] >= c) {
                continue;
            }
            let ei = errors[i];
            let r = y[i] * ei;
            if !((r < -tol && alpha[i] < c) || (r > tol && alpha[i] > 0.0)) {
                continue;
            }
            // Second choice: maximize |E_i − E_j| over non-bound points,
            // then fall back to a deterministic sweep from i+1.
            let mut j_best: Option<usize> = None;
            let mut gap_best = 0.0;
            for j in 0..n {
                if j == i || alpha[j] <= 0.0 || alpha[j] >= c {
                    continue;
                }
                let gap = (ei - errors[j]).abs();
                if gap > gap_best {
                    gap_best = gap;
                    j_best = Some(j);
                }
            }
            let mut advanced = false;
            if let Some(j) = j_best {
                advanced = try_step(gram, n, y, c, i, j, &mut alpha, &mut bias, &mut errors);
            }
            if !advanced {
                for off in 1..n {
                    let j = (i + off) % n;
                    if j == i {
                        continue;
                    }
                    if try_step(gram, n, y, c, i, j, &mut alpha, &mut bias, &mut errors) {
                        advanced = true;
                        break;
                    }
                }
            }
            if advanced {
                changed += 1;
            }
        }
        trace.push(dual_objective(gram, n, &alpha, y));
        if changed == 0 {
            if examine_all {
                passes += 1;
            } else {
                examine_all = true;
            }
        } else {
            examine_all = false;
            passes = 0;
        }
    }
    (alpha, bias, trace)
}

/// Analytic two-variable update. Returns false when no progress is
/// possible for this pair.
#[allow(clippy::too_many_arguments)]
fn try_step(
    gram: &[f64],
    n: usize,
    y: &[f64],
    c: f64,
    i: usize,
    j: usize,
    alpha: &mut [f64],
    bias: &mut f64,
    errors: &mut [f64],
) -> bool {
    let (ai_old, aj_old) = (alpha[i], alpha[j]);
    let (ei, ej) = (errors[i], errors[j]);
    let (lo, hi) = if y[i] != y[j] {
        ((aj_old - ai_old).max(0.0), (c + aj_old - ai_old).min(c))
    } else {
        ((ai_old + aj_old - c).max(0.0), (ai_old + aj_old).min(c))
    };
    if lo >= hi {
        return false;
    }
    let kii = gram[i * n + i];
    let kjj = gram[j * n + j];
    let kij = gram[i * n + j];
    let eta = 2.0 * kij - kii - kjj;
    if eta >= 0.0 {
        // Non-negative curvature happens only for degenerate kernels;
        // the pair cannot make progress analytically.
        return false;
    }
    let mut aj = aj_old - y[j] * (ei - ej) / eta;
    aj = aj.clamp(lo, hi);
    if (aj - aj_old).abs() < 1e-12 * (aj + aj_old + 1e-12) {
        return false;
    }
    let ai = ai_old + y[i] * y[j] * (aj_old - aj);

    let b1 = *bias - ei - y[i] * (ai - ai_old) * kii - y[j] * (aj - aj_old) * kij;
    let b2 = *bias - ej - y[i] * (ai - ai_old) * kij - y[j] * (aj - aj_old) * kjj;
    let new_bias = if ai > 0.0 && ai < c {
        b1
    } else if aj > 0.0 && aj < c {
        b2
    } else {
        0.5 * (b1 + b2)
    };

    let db = new_bias - *bias;
    let di = y[i] * (ai - ai_old);
    let dj = y[j] * (aj - aj_old);
    for k in 0..n {
        errors[k] += di * gram[i * n + k] + dj * gram[j * n + k] + db;
    }
    alpha[i] = ai;
    alpha[j] = aj;
    *bias = new_bias;
    true
}

/// Trains a one-vs-one multiclass SVM on a precomputed Gram matrix.
///
/// The matrix must be symmetric positive semidefinite within a 1e-8
/// relative tolerance; each class pair trains on its sub-Gram.
pub fn svm_train(
    gram: &GramMatrix,
    labels: &[i64],
    cfg: &SvmConfig,
) -> Result<SvmModel, EvalError> {
    let n = gram.n();
    if labels.len() != n {
        return Err(EvalError::Dimension(format!(
            "{} labels for a {}x{} Gram",
            labels.len(),
            n,
            n
        )));
    }
    if cfg.c <= 0.0 || cfg.tolerance <= 0.0 {
        return Err(EvalError::Measure(
            crate::measures::MeasureError::InvalidParameter(
                "SVM needs C > 0 and tolerance > 0".into(),
            ),
        ));
    }
    gram.validate_psd(1e-8)?;

    let mut classes: Vec<i64> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(EvalError::SingleClass);
    }

    let mut binaries = Vec::new();
    for a in 0..classes.len() {
        for b in (a + 1)..classes.len() {
            let (ca, cb) = (classes[a], classes[b]);
            let idx: Vec<usize> = (0..n)
                .filter(|&i| labels[i] == ca || labels[i] == cb)
                .collect();
            let m = idx.len();
            let y: Vec<f64> = idx
                .iter()
                .map(|&i| if labels[i] == ca { 1.0 } else { -1.0 })
                .collect();
            let mut sub = vec![0.0f64; m * m];
            for (r, &ir) in idx.iter().enumerate() {
                for (s, &is) in idx.iter().enumerate() {
                    sub[r * m + s] = gram.get(ir, is);
                }
            }
            let (alpha, bias, trace) = smo_binary(&sub, m, &y, cfg);
            let alpha_y: Vec<f64> = alpha.iter().zip(&y).map(|(a, yy)| a * yy).collect();
            binaries.push(BinaryModel {
                class_pos: ca,
                class_neg: cb,
                idx,
                alpha_y,
                alpha,
                bias,
                objective_trace: trace,
            });
        }
    }
    Ok(SvmModel {
        classes,
        binaries,
        n_train: n,
    })
}

/// Predicts by one-vs-one voting; vote ties break to the smallest class id.
pub fn svm_predict(model: &SvmModel, block: &KernelBlock) -> Result<Vec<i64>, EvalError> {
    if block.n_train() != model.n_train {
        return Err(EvalError::Dimension(format!(
            "kernel block has {} train columns, model expects {}",
            block.n_train(),
            model.n_train
        )));
    }
    let mut out = Vec::with_capacity(block.n_test());
    for q in 0..block.n_test() {
        let row = block.row(q);
        let mut votes: Vec<(i64, usize)> = model.classes.iter().map(|&c| (c, 0)).collect();
        for bin in &model.binaries {
            let winner = if bin.decide(row) >= 0.0 {
                bin.class_pos
            } else {
                bin.class_neg
            };
            if let Some(v) = votes.iter_mut().find(|(c, _)| *c == winner) {
                v.1 += 1;
            }
        }
        // classes are sorted ascending, so max_by_key on count resolves
        // ties toward the smallest id via the scan order
        let mut best = votes[0];
        for &v in &votes[1..] {
            if v.1 > best.1 {
                best = v;
            }
        }
        out.push(best.0);
    }
    Ok(out)
}

/// Training-set decision values reproduced through [`svm_predict`] on the
/// train Gram itself.
pub fn svm_training_predictions(
    model: &SvmModel,
    gram: &GramMatrix,
) -> Result<Vec<i64>, EvalError> {
    let n = gram.n();
    let block = KernelBlock::from_rows(n, n, gram.data().to_vec())?;
    svm_predict(model, &block)
}

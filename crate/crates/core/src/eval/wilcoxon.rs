//! Two-sided Wilcoxon signed-rank test for paired error rates.
//!
//! Zero differences are dropped; tied absolute differences receive
//! average ranks. With at most 25 nonzero differences the p-value comes
//! from the exact distribution of the positive rank sum (a subset-sum
//! count over doubled ranks, which are integers even with ties); above
//! that, a normal approximation with continuity and tie corrections.

use super::EvalError;

const EXACT_LIMIT: usize = 25;

/// Two-sided p-value for paired samples `a`, `b`.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<f64, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::Dimension(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 5 {
        return Err(EvalError::EmptyInput("need at least 5 pairs"));
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.is_empty() {
        // all differences zero: no evidence against symmetry
        return Ok(1.0);
    }
    let n = diffs.len();
    let ranks = average_ranks(&diffs.iter().map(|d| d.abs()).collect::<Vec<_>>());
    let w_plus: f64 = ranks
        .iter()
        .zip(&diffs)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, _)| *r)
        .sum();

    if n <= EXACT_LIMIT {
        Ok(exact_two_sided(&ranks, w_plus))
    } else {
        Ok(normal_two_sided(&ranks, w_plus, n))
    }
}

/// Ranks of the values (1-based), ties sharing the average of their
/// positions.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).expect("finite values"));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Exact two-sided p-value by counting sign assignments.
///
/// Doubling the ranks makes them integers, so the distribution of the
/// doubled positive rank sum is a subset-sum count over 2^n equally
/// likely assignments.
fn exact_two_sided(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0u64; total + 1];
    counts[0] = 1;
    for &r in &doubled {
        for s in (r..=total).rev() {
            counts[s] += counts[s - r];
        }
    }
    let w2 = (2.0 * w_plus).round() as usize;
    let lo = w2.min(total - w2);
    let hi = total - lo;
    let below: u64 = counts[..=lo].iter().sum();
    let above: u64 = counts[hi..].iter().sum();
    let all = 2f64.powi(ranks.len() as i32);
    (((below + above) as f64) / all).min(1.0)
}

/// Normal approximation with continuity correction and the tie
/// correction Σ(t³−t)/48 subtracted from the variance.
fn normal_two_sided(ranks: &[f64], w_plus: f64, n: usize) -> f64 {
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let mut var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0;
    // group sizes of tied ranks
    let mut sorted: Vec<f64> = ranks.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite ranks"));
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        var -= (t * t * t - t) / 48.0;
        i = j + 1;
    }
    let sd = var.sqrt();
    let w = w_plus.min(nf * (nf + 1.0) / 2.0 - w_plus);
    let z = if w < mean {
        (w - mean + 0.5) / sd
    } else {
        (w - mean - 0.5) / sd
    };
    (2.0 * phi(-z.abs())).min(1.0)
}

/// Standard normal CDF via erfc.
fn phi(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Complementary error function (Numerical Recipes rational Chebyshev
/// approximation, |relative error| < 1.2e-7, symmetrized for accuracy in
/// both tails).
fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let ans = t
        * (-z * z - 1.26551223
            + t * (1.00002368
                + t * (0.37409196
                    + t * (0.09678418
                        + t * (-0.18628806
                            + t * (0.27886807
                                + t * (-1.13520398
                                    + t * (1.48851587 + t * (-0.82215223 + t * 0.17087277)))))))))
            .exp();
    if x >= 0.0 {
        ans
    } else {
        2.0 - ans
    }
}

//! Learning the sparse alignment-path search space.
//!
//! The pipeline mirrors the estimation strategy for the sparse global
//! alignment matrix:
//!
//! 1. [`accumulate_paths`] — run DTW over every unordered training pair,
//!    backtrack one optimal path per pair, mark its cells, and symmetrize
//!    by also marking each transposed cell. Summing all pair grids gives
//!    the absolute-count occupancy grid.
//! 2. [`normalize_grid`] — divide by the grand total so the cell values
//!    become occupancy frequencies summing to 1.
//! 3. [`sparsify`] — drop cells whose absolute count is at or below the
//!    threshold θ, weight survivors by p(t,t′)^{−γ}, and emit a
//!    row-major-sorted coordinate list.
//! 4. [`ensure_connectivity`] — guarantee at least one admissible
//!    monotone path from (1,1) to (T,T) survives by unioning in the main
//!    diagonal when needed.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::dense::{dtw, LocalCost};
use crate::series::Dataset;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("need at least 2 series to accumulate paths, got {n}")]
    InsufficientData { n: usize },
    #[error("count grid has no nonzero cell")]
    EmptyGrid,
    #[error("threshold {theta} eliminates the path corners; maximum admissible value is {max_admissible}")]
    OverThreshold { theta: u64, max_admissible: u64 },
    #[error("grid dimensions differ: {a} vs {b}")]
    DimensionMismatch { a: usize, b: usize },
    #[error("{0}")]
    Measure(#[from] crate::measures::MeasureError),
    #[error("SPM line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// T×T grid of absolute path-occupancy counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountGrid {
    t: usize,
    counts: Vec<u64>,
}

impl CountGrid {
    /// Builds a grid from row-major counts.
    pub fn from_counts(t: usize, counts: Vec<u64>) -> Result<Self, GridError> {
        if counts.len() != t * t {
            return Err(GridError::DimensionMismatch {
                a: t * t,
                b: counts.len(),
            });
        }
        Ok(Self { t, counts })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Count at 0-based (row, col).
    pub fn count_at(&self, row: usize, col: usize) -> u64 {
        self.counts[row * self.t + col]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.t).all(|i| (0..i).all(|j| self.count_at(i, j) == self.count_at(j, i)))
    }
}

/// T×T grid of normalized occupancy frequencies; values sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    t: usize,
    p: Vec<f64>,
}

impl OccupancyGrid {
    pub fn t(&self) -> usize {
        self.t
    }

    /// Frequency at 0-based (row, col).
    pub fn frequency_at(&self, row: usize, col: usize) -> f64 {
        self.p[row * self.t + col]
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.p
    }
}

/// Threshold and weighting exponent for [`sparsify`].
///
/// θ is compared against absolute counts; the weight of a surviving cell is
/// its normalized frequency raised to −γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparsifyConfig {
    pub theta: u64,
    pub gamma: f64,
}

impl SparsifyConfig {
    pub fn new(theta: u64, gamma: f64) -> Result<Self, GridError> {
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(GridError::Measure(
                crate::measures::MeasureError::InvalidParameter(format!(
                    "gamma must be a nonnegative finite real, got {gamma}"
                )),
            ));
        }
        Ok(Self { theta, gamma })
    }
}

/// One surviving cell: 1-based row and column plus its weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpmEntry {
    pub row: u32,
    pub col: u32,
    pub weight: f64,
}

/// Row-major-sorted coordinate list defining the admissible search space.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePathMatrix {
    t: usize,
    theta: u64,
    gamma: f64,
    source: Option<String>,
    entries: Vec<SpmEntry>,
}

impl SparsePathMatrix {
    /// Builds a matrix from raw parts, checking ordering and weights.
    pub fn from_entries(
        t: usize,
        theta: u64,
        gamma: f64,
        entries: Vec<SpmEntry>,
    ) -> Result<Self, GridError> {
        let m = Self {
            t,
            theta,
            gamma,
            source: None,
            entries,
        };
        m.check_entries()?;
        Ok(m)
    }

    fn check_entries(&self) -> Result<(), GridError> {
        for (i, e) in self.entries.iter().enumerate() {
            if e.row == 0 || e.col == 0 || e.row as usize > self.t || e.col as usize > self.t {
                return Err(GridError::Format {
                    line: i + 2,
                    msg: format!("entry ({}, {}) outside 1..={}", e.row, e.col, self.t),
                });
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(GridError::Format {
                    line: i + 2,
                    msg: format!("weight {} is not a positive finite real", e.weight),
                });
            }
            if i > 0 {
                let p = self.entries[i - 1];
                if (e.row, e.col) <= (p.row, p.col) {
                    return Err(GridError::Format {
                        line: i + 2,
                        msg: format!(
                            "entries not strictly row-major sorted at ({}, {})",
                            e.row, e.col
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn theta(&self) -> u64 {
        self.theta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn entries(&self) -> &[SpmEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn source(&self) -> Option<&str> {
        self.source.as_deref()
    }

    pub fn set_source(&mut self, source: impl Into<String>) {
        self.source = Some(source.into());
    }

    pub fn contains(&self, row: u32, col: u32) -> bool {
        self.entries
            .binary_search_by_key(&(row, col), |e| (e.row, e.col))
            .is_ok()
    }

    /// True when an admissible monotone path from (1,1) to (T,T) exists
    /// within the entry set.
    pub fn is_connected(&self) -> bool {
        if self.t == 0 || self.entries.is_empty() {
            return false;
        }
        let t = self.t;
        // One reachability pass over the sorted entry stream, with two
        // rolling boolean rows, mirroring the forward DP the measures use.
        let mut prev = vec![false; t];
        let mut curr = vec![false; t];
        let mut prev_row = 0u32; // 0 = no row yet
        let mut cur_row = 0u32;
        for e in &self.entries {
            if e.row != cur_row {
                if e.row == cur_row + 1 {
                    std::mem::swap(&mut prev, &mut curr);
                } else {
                    prev.fill(false);
                }
                curr.fill(false);
                prev_row = cur_row;
                cur_row = e.row;
            }
            let j = (e.col - 1) as usize;
            let reachable = if e.row == 1 && e.col == 1 {
                true
            } else {
                let from_prev_row = prev_row + 1 == cur_row && (prev[j] || (j > 0 && prev[j - 1]));
                let from_left = j > 0 && curr[j - 1];
                from_prev_row || from_left
            };
            curr[j] = reachable;
        }
        cur_row as usize == t && curr[t - 1]
    }

    /// Full-grid matrix with unit weights; every cell is admissible.
    pub fn full_grid(t: usize) -> Self {
        let mut entries = Vec::with_capacity(t * t);
        for row in 1..=t as u32 {
            for col in 1..=t as u32 {
                entries.push(SpmEntry {
                    row,
                    col,
                    weight: 1.0,
                });
            }
        }
        Self {
            t,
            theta: 0,
            gamma: 0.0,
            source: None,
            entries,
        }
    }

    /// Main-diagonal matrix with unit weights.
    pub fn diagonal(t: usize) -> Self {
        let entries = (1..=t as u32)
            .map(|i| SpmEntry {
                row: i,
                col: i,
                weight: 1.0,
            })
            .collect();
        Self {
            t,
            theta: 0,
            gamma: 0.0,
            source: None,
            entries,
        }
    }

    /// Sakoe-Chiba band cells (|t − t′| ≤ r) with unit weights.
    pub fn band(t: usize, radius: usize) -> Self {
        let mut entries = Vec::new();
        for row in 1..=t {
            let lo = row.saturating_sub(radius).max(1);
            let hi = (row + radius).min(t);
            for col in lo..=hi {
                entries.push(SpmEntry {
                    row: row as u32,
                    col: col as u32,
                    weight: 1.0,
                });
            }
        }
        Self {
            t,
            theta: 0,
            gamma: 0.0,
            source: None,
            entries,
        }
    }
}

/// Runs DTW over every unordered pair of training series, backtracks one
/// optimal path per pair, and accumulates cell visits plus their
/// transposes into a symmetric count grid.
pub fn accumulate_paths(train: &Dataset, cost: LocalCost) -> Result<CountGrid, GridError> {
    let n = train.len();
    if n < 2 {
        return Err(GridError::InsufficientData { n });
    }
    let t = train.series_len();

    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();

    // Each worker owns a partial integer grid; partials merge by exact
    // element-wise addition, so the result is independent of scheduling.
    let counts = pairs
        .par_iter()
        .fold(
            || vec![0u64; t * t],
            |mut acc, &(i, j)| {
                let r = dtw(train.get(i), train.get(j), cost)
                    .expect("dataset series are equal-length and nonempty");
                for &(a, b) in r.path.pairs() {
                    acc[(a - 1) * t + (b - 1)] += 1;
                    acc[(b - 1) * t + (a - 1)] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; t * t],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );

    Ok(CountGrid { t, counts })
}

/// Divides every count by the grand total, yielding frequencies that sum
/// to 1 over the whole grid.
pub fn normalize_grid(g: &CountGrid) -> Result<OccupancyGrid, GridError> {
    let total = g.total();
    if total == 0 {
        return Err(GridError::EmptyGrid);
    }
    let inv = 1.0 / total as f64;
    Ok(OccupancyGrid {
        t: g.t,
        p: g.counts.iter().map(|&c| c as f64 * inv).collect(),
    })
}

/// Keeps the cells whose absolute count exceeds θ, weighting each survivor
/// by p(t,t′)^{−γ}, then repairs connectivity.
///
/// The normalization is computed over the full count grid before
/// thresholding; θ only selects which cells survive.
pub fn sparsify(
    g: &CountGrid,
    p: &OccupancyGrid,
    cfg: SparsifyConfig,
) -> Result<SparsePathMatrix, GridError> {
    if g.t != p.t {
        return Err(GridError::DimensionMismatch { a: g.t, b: p.t });
    }
    let corner = g.count_at(0, 0).min(g.count_at(g.t - 1, g.t - 1));
    if cfg.theta >= corner {
        return Err(GridError::OverThreshold {
            theta: cfg.theta,
            max_admissible: corner.saturating_sub(1),
        });
    }
    let mut entries = Vec::new();
    for row in 0..g.t {
        for col in 0..g.t {
            let c = g.count_at(row, col);
            if c > cfg.theta {
                let weight = p.frequency_at(row, col).powf(-cfg.gamma);
                entries.push(SpmEntry {
                    row: (row + 1) as u32,
                    col: (col + 1) as u32,
                    weight,
                });
            }
        }
    }
    let m = SparsePathMatrix {
        t: g.t,
        theta: cfg.theta,
        gamma: cfg.gamma,
        source: None,
        entries,
    };
    Ok(ensure_connectivity(m))
}

/// Guarantees the entry set admits a monotone path from (1,1) to (T,T).
///
/// Already-connected matrices are returned unchanged. Otherwise the main
/// diagonal is unioned in; inserted cells take the maximum existing weight
/// so they stay unattractive relative to learned cells.
pub fn ensure_connectivity(m: SparsePathMatrix) -> SparsePathMatrix {
    if m.is_connected() {
        return m;
    }
    let max_weight = m
        .entries
        .iter()
        .map(|e| e.weight)
        .fold(f64::NEG_INFINITY, f64::max)
        .max(1.0);
    let missing: Vec<u32> = (1..=m.t as u32)
        .filter(|&i| {
            m.entries
                .binary_search_by_key(&(i, i), |e| (e.row, e.col))
                .is_err()
        })
        .collect();
    let mut entries = m.entries;
    entries.extend(missing.into_iter().map(|i| SpmEntry {
        row: i,
        col: i,
        weight: max_weight,
    }));
    entries.sort_by_key(|e| (e.row, e.col));
    SparsePathMatrix {
        t: m.t,
        theta: m.theta,
        gamma: m.gamma,
        source: m.source,
        entries,
    }
}

/// Serializes to the SPM text format: a `SPM v1 T=<T> theta=<θ> gamma=<γ>`
/// header, then one `row col weight` line per entry in row-major order,
/// 1-based, weights printed with 17 significant digits.
pub fn format_spm(m: &SparsePathMatrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "SPM v1 T={} theta={} gamma={}", m.t, m.theta, m.gamma);
    for e in &m.entries {
        let _ = writeln!(out, "{} {} {:.16e}", e.row, e.col, e.weight);
    }
    out
}

pub fn write_spm(m: &SparsePathMatrix, path: impl AsRef<Path>) -> Result<(), GridError> {
    fs::write(path, format_spm(m))?;
    Ok(())
}

pub fn read_spm(path: impl AsRef<Path>) -> Result<SparsePathMatrix, GridError> {
    parse_spm(&fs::read_to_string(path)?)
}

pub fn parse_spm(text: &str) -> Result<SparsePathMatrix, GridError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(GridError::Format {
        line: 1,
        msg: "empty file".into(),
    })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 || fields[0] != "SPM" || fields[1] != "v1" {
        return Err(GridError::Format {
            line: 1,
            msg: format!("bad header {header:?}, expected `SPM v1 T=<T> theta=<t> gamma=<g>`"),
        });
    }
    fn keyed<'a>(field: &'a str, key: &str, line: usize) -> Result<&'a str, GridError> {
        field.strip_prefix(key).ok_or_else(|| GridError::Format {
            line,
            msg: format!("expected `{key}<value>`, found {field:?}"),
        })
    }
    let t: usize = keyed(fields[2], "T=", 1)?
        .parse()
        .map_err(|_| GridError::Format {
            line: 1,
            msg: format!("bad T in {:?}", fields[2]),
        })?;
    let theta: u64 = keyed(fields[3], "theta=", 1)?
        .parse()
        .map_err(|_| GridError::Format {
            line: 1,
            msg: format!("bad theta in {:?}", fields[3]),
        })?;
    let gamma: f64 = keyed(fields[4], "gamma=", 1)?
        .parse()
        .map_err(|_| GridError::Format {
            line: 1,
            msg: format!("bad gamma in {:?}", fields[4]),
        })?;
    let mut entries = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let mut it = line.split_whitespace();
        let (a, b, w) = match (it.next(), it.next(), it.next(), it.next()) {
            (Some(a), Some(b), Some(w), None) => (a, b, w),
            _ => {
                return Err(GridError::Format {
                    line: lineno,
                    msg: "expected `row col weight`".into(),
                })
            }
        };
        let parse_u32 = |s: &str| -> Result<u32, GridError> {
            s.parse().map_err(|_| GridError::Format {
                line: lineno,
                msg: format!("bad index {s:?}"),
            })
        };
        let weight: f64 = w.parse().map_err(|_| GridError::Format {
            line: lineno,
            msg: format!("bad weight {w:?}"),
        })?;
        entries.push(SpmEntry {
            row: parse_u32(a)?,
            col: parse_u32(b)?,
            weight,
        });
    }
    SparsePathMatrix::from_entries(t, theta, gamma, entries)
}

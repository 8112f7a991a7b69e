//! Time-series elastic distances over a learned sparse alignment-path
//! search space.
//!
//! The library learns, from all pairwise optimal DTW alignments of a
//! training set, which cells of the T×T alignment grid optimal paths
//! actually occupy. Thresholding and weighting that occupancy grid yields
//! a sparse coordinate-list search space over which two fast measures are
//! evaluated: a sparsified DTW and a sparsified positive-definite
//! time-elastic kernel. Classical baselines (Euclidean, Minkowski,
//! Pearson correlation, autocorrelation operators, full and
//! Sakoe-Chiba–banded DTW, the dense kernel) are included for the
//! benchmark harness, together with 1-NN and kernel-SVM evaluation,
//! leave-one-out grid search, and Wilcoxon signed-rank comparisons.

pub mod dense;
pub mod eval;
pub mod grid;
pub mod harness;
pub mod measures;
pub mod series;
pub mod sparse;

pub use dense::{
    dtw, dtw_sc, krdtw, krdtw_sc, local_kernel, AlignmentPath, BandConfig, KernelConfig, LocalCost,
};
pub use grid::{
    accumulate_paths, ensure_connectivity, normalize_grid, sparsify, CountGrid, OccupancyGrid,
    SparsePathMatrix, SparsifyConfig, SpmEntry,
};
pub use measures::{autocorr, corr, daco, euclidean, minkowski, DacoConfig, MinkowskiOrder};
pub use series::{load_ucr, znormalize, Dataset, Delimiter, TimeSeries};
pub use sparse::{sp_dtw, sp_krdtw, SparseEvalResult};

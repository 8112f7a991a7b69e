//! Benchmark-harness operations behind the CLI verbs: dataset
//! resolution, path-matrix learning, evaluation report rows, visited-cell
//! benchmarking, heatmap export, and grid-curve emission.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::dense::LocalCost;
use crate::eval::gram::{build_test_block, build_train_gram};
use crate::eval::search::{
    default_c_grid, resolve_spec, select_svm_c, LearnedGrid, MeasureKind, ParamOverrides,
    SearchPoint,
};
use crate::eval::svm::{svm_predict, svm_train, SvmConfig};
use crate::eval::{onenn, round1, EvalError, EvalReport, MeasureSpec};
use crate::grid::{
    accumulate_paths, normalize_grid, read_spm, sparsify, write_spm, CountGrid, GridError,
    OccupancyGrid, SparsePathMatrix, SparsifyConfig,
};
use crate::measures::MeasureError;
use crate::series::{
    is_znormalized, load_ucr, znormalize_dataset, Dataset, Delimiter, SeriesError,
};

/// Environment variable naming the default dataset root.
pub const DATA_ROOT_ENV: &str = "ELASTIC_SPARSE_DATA";

/// Process exit codes: 0 success, 1 usage, 2 data/parameter, 3 internal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Usage = 1,
    Data = 2,
    Internal = 3,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl HarnessError {
    pub fn exit_status(&self) -> ExitStatus {
        match self {
            HarnessError::Usage(_) => ExitStatus::Usage,
            HarnessError::Data(_) => ExitStatus::Data,
            HarnessError::Internal(_) => ExitStatus::Internal,
        }
    }
}

impl From<SeriesError> for HarnessError {
    fn from(e: SeriesError) -> Self {
        HarnessError::Data(e.to_string())
    }
}

impl From<GridError> for HarnessError {
    fn from(e: GridError) -> Self {
        HarnessError::Data(e.to_string())
    }
}

impl From<MeasureError> for HarnessError {
    fn from(e: MeasureError) -> Self {
        HarnessError::Data(e.to_string())
    }
}

impl From<EvalError> for HarnessError {
    fn from(e: EvalError) -> Self {
        HarnessError::Data(e.to_string())
    }
}

/// How to treat normalization at load time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZnormMode {
    /// Verify the data looks standardized; warn on stderr otherwise.
    #[default]
    Check,
    /// Re-normalize every series.
    Apply,
    Off,
}

impl ZnormMode {
    pub fn parse(s: &str) -> Result<Self, HarnessError> {
        match s {
            "check" => Ok(ZnormMode::Check),
            "apply" => Ok(ZnormMode::Apply),
            "off" => Ok(ZnormMode::Off),
            other => Err(HarnessError::Usage(format!(
                "unknown znorm mode {other:?}, expected check|apply|off"
            ))),
        }
    }
}

/// Locates `<name>_TRAIN` / `<name>_TEST` under the dataset root
/// (`ELASTIC_SPARSE_DATA` or the current directory), trying both the
/// flat layout and the per-dataset subdirectory layout.
pub fn resolve_dataset_paths(name: &str) -> Result<(PathBuf, PathBuf), HarnessError> {
    let root = std::env::var(DATA_ROOT_ENV).unwrap_or_else(|_| ".".into());
    let root = PathBuf::from(root);
    let candidates = [
        (
            root.join(format!("{name}_TRAIN")),
            root.join(format!("{name}_TEST")),
        ),
        (
            root.join(name).join(format!("{name}_TRAIN")),
            root.join(name).join(format!("{name}_TEST")),
        ),
    ];
    for (train, test) in &candidates {
        if train.exists() {
            return Ok((train.clone(), test.clone()));
        }
    }
    Err(HarnessError::Data(format!(
        "dataset {name:?} not found under {} (tried <root>/{name}_TRAIN and <root>/{name}/{name}_TRAIN)",
        root.display()
    )))
}

/// Loads a UCR file and applies the znorm mode.
pub fn load_dataset(path: &Path, znorm: ZnormMode) -> Result<Dataset, HarnessError> {
    let ds = load_ucr(path, Delimiter::Auto)?;
    match znorm {
        ZnormMode::Off => Ok(ds),
        ZnormMode::Apply => Ok(znormalize_dataset(&ds)?),
        ZnormMode::Check => {
            let off = ds
                .items()
                .iter()
                .filter(|s| !is_znormalized(s, 0.05))
                .count();
            if off > 0 {
                eprintln!(
                    "warning: {off}/{} series in {} deviate from z-normalization; pass --znorm apply to renormalize",
                    ds.len(),
                    path.display()
                );
            }
            Ok(ds)
        }
    }
}

/// Inputs shared by the commands.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    /// Dataset name (resolved through the data root) …
    pub dataset: Option<String>,
    /// … or explicit file paths.
    pub train_path: Option<PathBuf>,
    pub test_path: Option<PathBuf>,
    pub znorm: ZnormMode,
    pub out: Option<PathBuf>,
    /// Reserved for stochastic extensions; the pipeline is deterministic.
    pub seed: u64,
}

impl RunConfig {
    pub fn dataset_label(&self) -> String {
        if let Some(name) = &self.dataset {
            return name.clone();
        }
        self.train_path
            .as_ref()
            .and_then(|p| p.file_stem())
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into())
    }

    pub fn train_file(&self) -> Result<PathBuf, HarnessError> {
        if let Some(p) = &self.train_path {
            return Ok(p.clone());
        }
        match &self.dataset {
            Some(name) => Ok(resolve_dataset_paths(name)?.0),
            None => Err(HarnessError::Usage(
                "no training data: pass a dataset name or --train".into(),
            )),
        }
    }

    pub fn test_file(&self) -> Result<PathBuf, HarnessError> {
        if let Some(p) = &self.test_path {
            return Ok(p.clone());
        }
        match &self.dataset {
            Some(name) => Ok(resolve_dataset_paths(name)?.1),
            None => Err(HarnessError::Usage(
                "no test data: pass a dataset name or --test".into(),
            )),
        }
    }
}

/// Auto-searchable θ / γ command-line values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AutoOr<T> {
    Auto,
    Given(T),
}

impl<T: std::str::FromStr> AutoOr<T> {
    pub fn parse(s: &str) -> Result<Self, HarnessError> {
        if s == "auto" {
            return Ok(AutoOr::Auto);
        }
        s.parse::<T>()
            .map(AutoOr::Given)
            .map_err(|_| HarnessError::Usage(format!("expected a number or `auto`, got {s:?}")))
    }
}

/// Outcome of `learn`: where the matrix went plus its summary stats.
#[derive(Debug)]
pub struct LearnOutcome {
    pub spm_path: PathBuf,
    pub theta: u64,
    pub gamma: f64,
    pub entries: usize,
    pub t: usize,
    pub curve: Vec<SearchPoint>,
}

/// Learns a sparse path matrix from the training set and writes it as an
/// SPM file. `auto` parameters are grid-searched by leave-one-out 1-NN.
pub fn cmd_learn(
    cfg: &RunConfig,
    cost: LocalCost,
    theta: AutoOr<u64>,
    gamma: AutoOr<f64>,
) -> Result<LearnOutcome, HarnessError> {
    let train = load_dataset(&cfg.train_file()?, cfg.znorm)?;
    let learned = LearnedGrid::learn(&train, cost).map_err(HarnessError::from)?;

    let (matrix, curve) = match (theta, gamma) {
        (AutoOr::Given(t), AutoOr::Given(g)) => {
            let m = sparsify(
                &learned.counts,
                &learned.occupancy,
                SparsifyConfig::new(t, g)?,
            )?;
            (m, Vec::new())
        }
        _ => {
            let thetas = match theta {
                AutoOr::Given(t) => vec![t],
                AutoOr::Auto => crate::eval::search::default_theta_grid(),
            };
            let gammas = match gamma {
                AutoOr::Given(g) => vec![g],
                AutoOr::Auto => crate::eval::search::default_gamma_grid(),
            };
            let out = crate::eval::search::search_sp_dtw(&train, cost, &learned, &thetas, &gammas)?;
            match out.chosen {
                MeasureSpec::SpDtw(_, m) => (
                    Arc::try_unwrap(m).unwrap_or_else(|a| (*a).clone()),
                    out.curve,
                ),
                _ => {
                    return Err(HarnessError::Internal(
                        "theta/gamma search returned a non-sparse spec".into(),
                    ))
                }
            }
        }
    };

    let mut matrix = matrix;
    matrix.set_source(cfg.dataset_label());
    let spm_path = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.spm", cfg.dataset_label())));
    write_spm(&matrix, &spm_path)?;
    Ok(LearnOutcome {
        spm_path,
        theta: matrix.theta(),
        gamma: matrix.gamma(),
        entries: matrix.len(),
        t: matrix.t(),
        curve,
    })
}

/// Classifier for `eval`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classifier {
    OneNn,
    Svm,
}

impl Classifier {
    pub fn parse(s: &str) -> Result<Self, HarnessError> {
        match s {
            "1nn" => Ok(Classifier::OneNn),
            "svm" => Ok(Classifier::Svm),
            other => Err(HarnessError::Usage(format!(
                "unknown classifier {other:?}, expected 1nn or svm"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Classifier::OneNn => "1nn",
            Classifier::Svm => "svm",
        }
    }
}

/// Extra SVM knobs for `eval`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SvmOptions {
    pub c: Option<f64>,
}

/// One report row in the tabular output format.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub dataset: String,
    pub measure: String,
    pub classifier: String,
    pub error_rate: f64,
    pub visited_total: u64,
    pub speedup_pct: f64,
    pub params: String,
}

pub const REPORT_HEADER: &str =
    "dataset,measure,classifier,error_rate,visited_total,speedup_pct,params";

impl ReportRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{:.3},{},{:.1},{}",
            self.dataset,
            self.measure,
            self.classifier,
            self.error_rate,
            self.visited_total,
            self.speedup_pct,
            self.params.replace(',', ";"),
        )
    }
}

/// Evaluates a measure/classifier pair on a dataset and renders the
/// report row. The row is also appended to `cfg.out` when set.
pub fn cmd_eval(
    cfg: &RunConfig,
    kind: MeasureKind,
    classifier: Classifier,
    overrides: &ParamOverrides,
    svm_opts: SvmOptions,
) -> Result<ReportRow, HarnessError> {
    let train = load_dataset(&cfg.train_file()?, cfg.znorm)?;
    let test = load_dataset(&cfg.test_file()?, cfg.znorm)?;
    if train.series_len() != test.series_len() {
        return Err(HarnessError::Data(format!(
            "train length {} differs from test length {}",
            train.series_len(),
            test.series_len()
        )));
    }

    let row = match classifier {
        Classifier::OneNn => {
            let resolved = resolve_spec(&train, kind, overrides)?;
            let report = onenn(&train, &test, &resolved.spec)?;
            report_row(cfg, &resolved.spec, classifier, &report)
        }
        Classifier::Svm => {
            let (spec, c, report) = eval_svm(&train, &test, kind, overrides, svm_opts)?;
            let mut row = report_row(cfg, &spec, classifier, &report);
            let _ = write!(row.params, " C={c}");
            row.params = row.params.trim().to_string();
            row
        }
    };

    if let Some(out) = &cfg.out {
        append_report_row(out, &row)?;
    }
    Ok(row)
}

fn report_row(
    cfg: &RunConfig,
    spec: &MeasureSpec,
    classifier: Classifier,
    report: &EvalReport,
) -> ReportRow {
    ReportRow {
        dataset: cfg.dataset_label(),
        measure: spec.name().into(),
        classifier: classifier.name().into(),
        error_rate: report.error_rate,
        visited_total: report.total_visited,
        speedup_pct: round1(report.speedup_pct),
        params: report.chosen_params.clone(),
    }
}

fn append_report_row(path: &Path, row: &ReportRow) -> Result<(), HarnessError> {
    let mut text = String::new();
    let need_header = !path.exists();
    if need_header {
        text.push_str(REPORT_HEADER);
        text.push('\n');
    }
    text.push_str(&row.to_csv());
    text.push('\n');
    let existing = if need_header {
        String::new()
    } else {
        fs::read_to_string(path).map_err(|e| HarnessError::Data(e.to_string()))?
    };
    fs::write(path, existing + &text).map_err(|e| HarnessError::Data(e.to_string()))?;
    Ok(())
}

fn eval_svm(
    train: &Dataset,
    test: &Dataset,
    kind: MeasureKind,
    overrides: &ParamOverrides,
    svm_opts: SvmOptions,
) -> Result<(MeasureSpec, f64, EvalReport), HarnessError> {
    // Kernel specs only; Euclidean runs through the Gaussian kernel with
    // a nu of its own.
    let (spec, nu_for_ed) = match kind {
        MeasureKind::Euclidean => {
            let nu = overrides.nu.unwrap_or_else(|| {
                crate::eval::search::default_nu_grid(train)[2] // unit scale
            });
            (
                MeasureSpec::Euclidean,
                Some(crate::dense::KernelConfig::new(nu)?),
            )
        }
        MeasureKind::Krdtw | MeasureKind::KrdtwSc | MeasureKind::SpKrdtw => {
            (resolve_spec(train, kind, overrides)?.spec, None)
        }
        other => {
            return Err(HarnessError::Usage(format!(
                "classifier svm needs a kernel measure (ed, krdtw, krdtw_sc, sp_krdtw), got {}",
                other.name()
            )))
        }
    };

    let labels: Vec<i64> = train
        .labels()
        .into_iter()
        .enumerate()
        .map(|(i, l)| l.ok_or(EvalError::Unlabeled(i)))
        .collect::<Result<_, _>>()?;
    let test_labels: Vec<i64> = test
        .labels()
        .into_iter()
        .enumerate()
        .map(|(i, l)| l.ok_or(EvalError::Unlabeled(i)))
        .collect::<Result<_, _>>()?;

    let (gram, gram_visited) = build_train_gram(train, &spec, nu_for_ed)?;
    let c = match svm_opts.c {
        Some(c) => c,
        None => select_svm_c(&gram, &labels, &default_c_grid())?.0,
    };
    let model = svm_train(
        &gram,
        &labels,
        &SvmConfig {
            c,
            ..Default::default()
        },
    )?;
    let (block, block_visited) = build_test_block(train, test, &spec, nu_for_ed)?;
    let predictions = svm_predict(&model, &block)?;

    let mismatches = predictions
        .iter()
        .zip(&test_labels)
        .filter(|(p, t)| p != t)
        .count();
    let total_visited = gram_visited + block_visited;
    let n = train.len() as u64;
    let comparisons = n + n * (n - 1) / 2 + (test.len() as u64) * (n + 1);
    let t2 = (train.series_len() * train.series_len()) as f64;
    let report = EvalReport {
        error_rate: mismatches as f64 / test.len() as f64,
        predictions,
        total_visited,
        speedup_pct: if spec.is_elastic() {
            100.0 * (1.0 - (total_visited as f64 / comparisons as f64) / t2)
        } else {
            100.0
        },
        chosen_params: spec.params_string(),
    };
    Ok((spec, c, report))
}

/// One `bench-cells` table row: visited cells for a single pairwise
/// comparison plus the speed-up against the dense T² grid.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub measure: String,
    pub visited: u64,
    pub speedup_pct: f64,
    pub params: String,
}

pub const BENCH_HEADER: &str = "measure,visited_cells,speedup_pct,params";

impl BenchRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{:.1},{}",
            self.measure,
            self.visited,
            self.speedup_pct,
            self.params.replace(',', ";")
        )
    }
}

/// Counts visited cells for one pairwise comparison under each measure.
pub fn cmd_bench_cells(
    cfg: &RunConfig,
    kinds: &[MeasureKind],
    overrides: &ParamOverrides,
) -> Result<Vec<BenchRow>, HarnessError> {
    let train = load_dataset(&cfg.train_file()?, cfg.znorm)?;
    if train.len() < 2 {
        return Err(HarnessError::Data(
            "bench-cells needs at least two training series".into(),
        ));
    }
    let t = train.series_len();
    let mut rows = Vec::new();
    for &kind in kinds {
        // sparse kinds default to the no-op sparsification (theta=0,
        // gamma=0) unless a matrix or theta was supplied
        let mut ov = overrides.clone();
        if matches!(kind, MeasureKind::SpDtw | MeasureKind::SpKrdtw) && ov.spm.is_none() {
            ov.theta = Some(ov.theta.unwrap_or(0));
            ov.gamma = Some(ov.gamma.unwrap_or(0.0));
            if matches!(kind, MeasureKind::SpKrdtw) {
                ov.nu = Some(ov.nu.unwrap_or(1.0));
            }
        }
        if matches!(kind, MeasureKind::Krdtw | MeasureKind::KrdtwSc) {
            ov.nu = Some(ov.nu.unwrap_or(1.0));
        }
        if matches!(kind, MeasureKind::DtwSc | MeasureKind::KrdtwSc) && ov.band_pct.is_none() {
            return Err(HarnessError::Usage(
                "bench-cells with a banded measure needs --band-pct".into(),
            ));
        }
        let spec = resolve_spec(&train, kind, &ov)?.spec;
        let pair = spec.eval_pair(train.get(0), train.get(1))?;
        rows.push(BenchRow {
            measure: spec.name().into(),
            visited: pair.visited,
            speedup_pct: round1(crate::eval::speedup(pair.visited, t)),
            params: spec.params_string(),
        });
    }
    if let Some(out) = &cfg.out {
        let mut text = String::from(BENCH_HEADER);
        text.push('\n');
        for r in &rows {
            text.push_str(&r.to_csv());
            text.push('\n');
        }
        fs::write(out, text).map_err(|e| HarnessError::Data(e.to_string()))?;
    }
    Ok(rows)
}

/// Heatmap data source.
pub enum HeatmapSource {
    Spm(SparsePathMatrix),
    Grid(CountGrid, OccupancyGrid),
}

/// Rendering mode for [`cmd_heatmap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatmapMode {
    Counts,
    Normalized,
    /// Normalized frequencies with cells at count ≤ θ blanked.
    Thresholded,
}

impl HeatmapMode {
    pub fn parse(s: &str) -> Result<Self, HarnessError> {
        match s {
            "counts" => Ok(HeatmapMode::Counts),
            "normalized" => Ok(HeatmapMode::Normalized),
            "thresholded" => Ok(HeatmapMode::Thresholded),
            other => Err(HarnessError::Usage(format!(
                "unknown heatmap mode {other:?}, expected counts|normalized|thresholded"
            ))),
        }
    }
}

/// Builds the T×T value matrix to render.
pub fn heatmap_values(source: &HeatmapSource, mode: HeatmapMode, theta: u64) -> (usize, Vec<f64>) {
    match source {
        HeatmapSource::Spm(m) => {
            let t = m.t();
            let mut vals = vec![0.0; t * t];
            for e in m.entries() {
                vals[(e.row as usize - 1) * t + (e.col as usize - 1)] = e.weight;
            }
            (t, vals)
        }
        HeatmapSource::Grid(counts, p) => {
            let t = counts.t();
            let mut vals = vec![0.0; t * t];
            for r in 0..t {
                for c in 0..t {
                    vals[r * t + c] = match mode {
                        HeatmapMode::Counts => counts.count_at(r, c) as f64,
                        HeatmapMode::Normalized => p.frequency_at(r, c),
                        HeatmapMode::Thresholded => {
                            if counts.count_at(r, c) > theta {
                                p.frequency_at(r, c)
                            } else {
                                0.0
                            }
                        }
                    };
                }
            }
            (t, vals)
        }
    }
}

/// Renders a text (P2) portable graymap: intensity = round(255·v/max).
pub fn render_pgm(t: usize, values: &[f64]) -> String {
    let max = values.iter().cloned().fold(0.0f64, f64::max);
    let mut out = format!("P2\n{t} {t}\n255\n");
    for r in 0..t {
        let mut line = String::with_capacity(t * 4);
        for c in 0..t {
            if c > 0 {
                line.push(' ');
            }
            let v = if max > 0.0 {
                (255.0 * values[r * t + c] / max).round() as u32
            } else {
                0
            };
            let _ = write!(line, "{v}");
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// CSV twin of the heatmap matrix.
pub fn render_matrix_csv(t: usize, values: &[f64]) -> String {
    let mut out = String::new();
    for r in 0..t {
        for c in 0..t {
            if c > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", values[r * t + c]);
        }
        out.push('\n');
    }
    out
}

/// Writes `<out>.pgm`-style image plus a `.csv` twin next to it.
pub fn cmd_heatmap(
    cfg: &RunConfig,
    spm_path: Option<&Path>,
    mode: HeatmapMode,
    theta: u64,
    cost: LocalCost,
) -> Result<(PathBuf, PathBuf), HarnessError> {
    let source = match spm_path {
        Some(p) => HeatmapSource::Spm(read_spm(p)?),
        None => {
            let train = load_dataset(&cfg.train_file()?, cfg.znorm)?;
            let counts = accumulate_paths(&train, cost)?;
            let p = normalize_grid(&counts)?;
            HeatmapSource::Grid(counts, p)
        }
    };
    let (t, vals) = heatmap_values(&source, mode, theta);
    let out = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.pgm", cfg.dataset_label())));
    let csv = out.with_extension("csv");
    fs::write(&out, render_pgm(t, &vals)).map_err(|e| HarnessError::Data(e.to_string()))?;
    fs::write(&csv, render_matrix_csv(t, &vals)).map_err(|e| HarnessError::Data(e.to_string()))?;
    Ok((out, csv))
}

/// Which hyperparameter `grid-curve` sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveParam {
    Theta,
    Gamma,
    Nu,
    BandPct,
    DacoLags,
}

impl CurveParam {
    pub fn parse(s: &str) -> Result<Self, HarnessError> {
        match s {
            "theta" => Ok(CurveParam::Theta),
            "gamma" => Ok(CurveParam::Gamma),
            "nu" => Ok(CurveParam::Nu),
            "band-pct" | "band_pct" => Ok(CurveParam::BandPct),
            "daco-k" | "daco_k" => Ok(CurveParam::DacoLags),
            other => Err(HarnessError::Usage(format!(
                "unknown parameter {other:?}, expected theta|gamma|nu|band-pct|daco-k"
            ))),
        }
    }
}

/// Range syntax: `lo:hi` (inclusive integers) or a comma-separated list.
pub fn parse_range(s: &str) -> Result<Vec<f64>, HarnessError> {
    if let Some((lo, hi)) = s.split_once(':') {
        let lo: i64 = lo
            .parse()
            .map_err(|_| HarnessError::Usage(format!("bad range start {lo:?}")))?;
        let hi: i64 = hi
            .parse()
            .map_err(|_| HarnessError::Usage(format!("bad range end {hi:?}")))?;
        if hi < lo {
            return Err(HarnessError::Usage(format!("empty range {s:?}")));
        }
        return Ok((lo..=hi).map(|v| v as f64).collect());
    }
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| HarnessError::Usage(format!("bad range value {tok:?}")))
        })
        .collect()
}

pub const CURVE_HEADER: &str = "param,loo_error,is_min";

/// Leave-one-out error curve over one hyperparameter; the minimum row is
/// marked. Returns the CSV text (also written to `cfg.out` when set).
pub fn cmd_grid_curve(
    cfg: &RunConfig,
    param: CurveParam,
    range: &[f64],
    overrides: &ParamOverrides,
    kind: MeasureKind,
) -> Result<String, HarnessError> {
    if range.is_empty() {
        return Err(HarnessError::Usage("empty parameter range".into()));
    }
    let train = load_dataset(&cfg.train_file()?, cfg.znorm)?;
    let cost = overrides.cost.unwrap_or_default();

    let outcome = match param {
        CurveParam::Theta => {
            let thetas: Vec<u64> = range.iter().map(|&v| v as u64).collect();
            let gammas = vec![overrides.gamma.unwrap_or(0.0)];
            let learned = LearnedGrid::learn(&train, cost)?;
            match kind {
                MeasureKind::SpKrdtw => {
                    let nus = vec![overrides.nu.unwrap_or(1.0)];
                    crate::eval::search::search_sp_krdtw(&train, &learned, &thetas, &nus)?
                }
                _ => crate::eval::search::search_sp_dtw(&train, cost, &learned, &thetas, &gammas)?,
            }
        }
        CurveParam::Gamma => {
            let thetas = vec![overrides.theta.unwrap_or(0)];
            let learned = LearnedGrid::learn(&train, cost)?;
            crate::eval::search::search_sp_dtw(&train, cost, &learned, &thetas, range)?
        }
        CurveParam::Nu => match kind {
            MeasureKind::SpKrdtw => {
                let learned = LearnedGrid::learn(&train, cost)?;
                let thetas = vec![overrides.theta.unwrap_or(0)];
                crate::eval::search::search_sp_krdtw(&train, &learned, &thetas, range)?
            }
            _ => crate::eval::search::search_nu(&train, range, None)?,
        },
        CurveParam::BandPct => {
            let pcts: Vec<u8> = range.iter().map(|&v| v as u8).collect();
            crate::eval::search::search_band(&train, cost, &pcts)?
        }
        CurveParam::DacoLags => {
            let lags: Vec<usize> = range.iter().map(|&v| v as usize).collect();
            crate::eval::search::search_daco(&train, &lags)?
        }
    };

    let mut text = String::from(CURVE_HEADER);
    text.push('\n');
    // emit in ascending parameter order; the marked minimum is the point
    // the search tie-break actually selects
    let mut sorted_rows: Vec<&SearchPoint> = outcome.curve.iter().collect();
    sorted_rows.sort_by(|a, b| {
        param_value(&a.label)
            .partial_cmp(&param_value(&b.label))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for p in sorted_rows {
        let _ = writeln!(
            text,
            "{},{:.6},{}",
            p.label.replace(',', ";"),
            p.error,
            u8::from(p.label == outcome.chosen_label)
        );
    }
    if let Some(out) = &cfg.out {
        fs::write(out, &text).map_err(|e| HarnessError::Data(e.to_string()))?;
    }
    Ok(text)
}

/// Leading numeric value of a `key=value …` label, for curve ordering.
fn param_value(label: &str) -> f64 {
    label
        .split_whitespace()
        .next()
        .and_then(|kv| kv.split('=').nth(1))
        .and_then(|v| v.parse().ok())
        .unwrap_or(f64::NAN)
}

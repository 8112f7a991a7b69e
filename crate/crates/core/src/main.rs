//! Benchmark CLI: learn sparse path matrices, evaluate classifiers,
//! count visited cells, export heatmaps, and emit grid-search curves.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use elastic_sparse::dense::LocalCost;
use elastic_sparse::eval::search::{MeasureKind, ParamOverrides};
use elastic_sparse::harness::{
    self, AutoOr, Classifier, CurveParam, HarnessError, HeatmapMode, RunConfig, SvmOptions,
    ZnormMode, BENCH_HEADER, REPORT_HEADER,
};

#[derive(Parser)]
#[command(
    name = "elastic-sparse",
    about = "Elastic time-series distances over a learned sparse alignment-path search space",
    version,
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Training file (UCR text format); overrides the dataset name lookup.
    #[arg(long)]
    train: Option<PathBuf>,
    /// Test file; overrides the dataset name lookup.
    #[arg(long)]
    test: Option<PathBuf>,
    /// Normalization handling: check, apply, or off.
    #[arg(long, default_value = "check")]
    znorm: String,
    /// Output file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Bound on parallel workers (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
    /// Random seed (the pipeline is deterministic; reserved).
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args, Clone)]
struct MeasureArgs {
    /// Local cost: sq (squared difference) or abs (absolute difference).
    #[arg(long, default_value = "sq")]
    cost: String,
    /// Count threshold for sparsification.
    #[arg(long)]
    theta: Option<u64>,
    /// Occupancy weight exponent.
    #[arg(long)]
    gamma: Option<f64>,
    /// Local kernel bandwidth.
    #[arg(long)]
    nu: Option<f64>,
    /// Sakoe-Chiba corridor radius, percent of T.
    #[arg(long)]
    band_pct: Option<u8>,
    /// Minkowski order (p >= 1; "inf" for the max-norm).
    #[arg(long)]
    p: Option<String>,
    /// DACO autocorrelation lag count.
    #[arg(long)]
    daco_k: Option<usize>,
    /// Precomputed sparse path matrix file.
    #[arg(long)]
    spm: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Learn a sparse path matrix from the training set.
    Learn {
        /// Dataset name resolved under $ELASTIC_SPARSE_DATA.
        dataset: Option<String>,
        #[arg(long, default_value = "sq")]
        cost: String,
        /// Count threshold, or `auto` for a leave-one-out search.
        #[arg(long, default_value = "auto")]
        theta: String,
        /// Weight exponent, or `auto`.
        #[arg(long, default_value = "auto")]
        gamma: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Classify a test set and emit one report row.
    Eval {
        /// Dataset name (also the report label when --train/--test are set).
        dataset: String,
        /// Measure: ed, minkowski, corr, daco, dtw, dtw_sc, krdtw,
        /// krdtw_sc, sp_dtw, sp_krdtw.
        measure: String,
        /// Classifier: 1nn or svm.
        classifier: String,
        /// SVM box constraint (default: 5-fold cross-validated).
        #[arg(long)]
        c: Option<f64>,
        #[command(flatten)]
        measure_args: MeasureArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Visited-cell counts for one pairwise comparison per measure.
    BenchCells {
        /// Dataset name (or a label when --train is set).
        dataset: String,
        /// Measures to benchmark.
        #[arg(required = true)]
        measures: Vec<String>,
        #[command(flatten)]
        measure_args: MeasureArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Export an occupancy heatmap as a text PGM plus a CSV twin.
    Heatmap {
        dataset: Option<String>,
        /// Mode: counts, normalized, or thresholded.
        #[arg(long, default_value = "counts")]
        mode: String,
        #[arg(long, default_value = "sq")]
        cost: String,
        /// Threshold used by the thresholded mode.
        #[arg(long, default_value_t = 0)]
        theta: u64,
        /// Render a stored SPM file instead of learning a grid.
        #[arg(long)]
        spm: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Leave-one-out error curve over one hyperparameter.
    GridCurve {
        /// Dataset name (or a label when --train is set).
        dataset: String,
        /// Parameter: theta, gamma, nu, band-pct, or daco-k.
        param: String,
        /// Range: `lo:hi` (integers, inclusive) or a comma list.
        range: String,
        /// Measure owning the parameter (default sp_dtw; theta/nu also
        /// accept sp_krdtw).
        #[arg(long, default_value = "sp_dtw")]
        measure: String,
        #[command(flatten)]
        measure_args: MeasureArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn run_config(dataset: Option<String>, common: &CommonArgs) -> Result<RunConfig, HarnessError> {
    Ok(RunConfig {
        dataset,
        train_path: common.train.clone(),
        test_path: common.test.clone(),
        znorm: ZnormMode::parse(&common.znorm)?,
        out: common.out.clone(),
        seed: common.seed,
    })
}

fn overrides(args: &MeasureArgs) -> Result<ParamOverrides, HarnessError> {
    let minkowski_p = match &args.p {
        None => None,
        Some(s) if s == "inf" => Some(f64::INFINITY),
        Some(s) => Some(s.parse::<f64>().map_err(|_| {
            HarnessError::Usage(format!(
                "bad Minkowski order {s:?}, expected a number or inf"
            ))
        })?),
    };
    let spm = match &args.spm {
        None => None,
        Some(p) => Some(Arc::new(
            elastic_sparse::grid::read_spm(p).map_err(|e| HarnessError::Data(e.to_string()))?,
        )),
    };
    Ok(ParamOverrides {
        cost: Some(LocalCost::parse(&args.cost).map_err(|e| HarnessError::Usage(e.to_string()))?),
        theta: args.theta,
        gamma: args.gamma,
        nu: args.nu,
        band_pct: args.band_pct,
        minkowski_p,
        daco_lags: args.daco_k,
        spm,
    })
}

fn init_workers(workers: Option<usize>) {
    if let Some(n) = workers {
        // ignore failure when a pool already exists (repeated init in tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

fn dispatch(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Cmd::Learn {
            dataset,
            cost,
            theta,
            gamma,
            common,
        } => {
            init_workers(common.workers);
            let cfg = run_config(dataset, &common)?;
            let cost = LocalCost::parse(&cost).map_err(|e| HarnessError::Usage(e.to_string()))?;
            let theta = AutoOr::<u64>::parse(&theta)?;
            let gamma = AutoOr::<f64>::parse(&gamma)?;
            let out = harness::cmd_learn(&cfg, cost, theta, gamma)?;
            println!(
                "wrote {} (T={} theta={} gamma={} entries={})",
                out.spm_path.display(),
                out.t,
                out.theta,
                out.gamma,
                out.entries
            );
            Ok(())
        }
        Cmd::Eval {
            dataset,
            measure,
            classifier,
            c,
            measure_args,
            common,
        } => {
            init_workers(common.workers);
            let cfg = run_config(Some(dataset), &common)?;
            let kind = MeasureKind::parse(&measure)
                .ok_or_else(|| HarnessError::Usage(format!("unknown measure {measure:?}")))?;
            let classifier = Classifier::parse(&classifier)?;
            let ov = overrides(&measure_args)?;
            let row = harness::cmd_eval(&cfg, kind, classifier, &ov, SvmOptions { c })?;
            println!("{REPORT_HEADER}");
            println!("{}", row.to_csv());
            Ok(())
        }
        Cmd::BenchCells {
            dataset,
            measures,
            measure_args,
            common,
        } => {
            init_workers(common.workers);
            let cfg = run_config(Some(dataset), &common)?;
            let kinds = measures
                .iter()
                .flat_map(|m| m.split(','))
                .map(|m| {
                    MeasureKind::parse(m)
                        .ok_or_else(|| HarnessError::Usage(format!("unknown measure {m:?}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let ov = overrides(&measure_args)?;
            let rows = harness::cmd_bench_cells(&cfg, &kinds, &ov)?;
            println!("{BENCH_HEADER}");
            for r in rows {
                println!("{}", r.to_csv());
            }
            Ok(())
        }
        Cmd::Heatmap {
            dataset,
            mode,
            cost,
            theta,
            spm,
            common,
        } => {
            init_workers(common.workers);
            let cfg = run_config(dataset, &common)?;
            let mode = HeatmapMode::parse(&mode)?;
            let cost = LocalCost::parse(&cost).map_err(|e| HarnessError::Usage(e.to_string()))?;
            let (img, csv) = harness::cmd_heatmap(&cfg, spm.as_deref(), mode, theta, cost)?;
            println!("wrote {} and {}", img.display(), csv.display());
            Ok(())
        }
        Cmd::GridCurve {
            dataset,
            param,
            range,
            measure,
            measure_args,
            common,
        } => {
            init_workers(common.workers);
            let cfg = run_config(Some(dataset), &common)?;
            let param = CurveParam::parse(&param)?;
            let range = harness::parse_range(&range)?;
            let kind = MeasureKind::parse(&measure)
                .ok_or_else(|| HarnessError::Usage(format!("unknown measure {measure:?}")))?;
            let ov = overrides(&measure_args)?;
            let text = harness::cmd_grid_curve(&cfg, param, &range, &ov, kind)?;
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests exit 0; anything else is a usage error
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::from(0);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_status() as u8)
        }
    }
}

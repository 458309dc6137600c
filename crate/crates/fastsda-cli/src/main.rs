//! Command-line front end: dataset preparation, clustering, fitting,
//! transforming, protocol evaluation, speed benchmarking and the Laplacian
//! oracle checks.
//!
//! Exit codes: 0 success, 1 failed oracle check, 2 invalid arguments,
//! 3 data errors, 4 numerical failures.

use clap::{Args, Parser, Subcommand};
use fastsda_core::cluster::SubclassAssignment;
use fastsda_core::dataset::{
    load_csv, load_model, load_multiview, prepare_monks, prepare_passthrough_csv, prepare_robot,
    save_model, LabelSource, SavedModel,
};
use fastsda_core::error::{ClusterError, EvalError, IoError, ModelError};
use fastsda_core::eval::{
    bench_rows_to_tsv, benchmark_speed, gaussian_mixture, run_experiment, EvalConfig, EvalData,
    Method, Preprocessing,
};
use fastsda_core::kernel::{ApproxCentering, KernelConfig, PrototypeStrategy};
use fastsda_core::laplacian::{build_lb_multiview, build_lb_single, LaplacianSpec};
use fastsda_core::layout::LabelLayout;
use fastsda_core::linalg::CONFIG;
use fastsda_core::matrix::Matrix;
use fastsda_core::pipeline::{
    cluster_subclasses, fit_fast_approx, fit_fast_kernel, fit_fast_linear, fit_multiview_kernel,
    fit_multiview_linear,
};
use fastsda_core::regress::{transform, KernelSolver, Normalization};
use fastsda_core::rng::{derive_seed, RngStream, SeedRng};
use fastsda_core::targets::{
    make_targets_multiview, make_targets_single, max_block_deviation, target_cap_multiview,
    target_cap_single,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "fastsda",
    about = "Fast subclass discriminant analysis: fit, evaluate, benchmark",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert raw downloaded dataset files into the canonical CSV layout.
    Prepare(PrepareArgs),
    /// Cluster each class into subclasses and write the label table.
    Cluster(ClusterArgs),
    /// Fit a projection model and save it.
    Fit(FitArgs),
    /// Project new samples with a saved model.
    Transform(TransformArgs),
    /// Run the stratified cross-validation protocol.
    Eval(EvalArgs),
    /// Time the fast fit against the eigendecomposition oracle.
    Bench(BenchArgs),
    /// Verify the structural invariants of the between-class Laplacian.
    OracleCheck(OracleCheckArgs),
}

#[derive(Args)]
struct PrepareArgs {
    /// Directory holding the raw downloaded files.
    #[arg(long)]
    raw_dir: PathBuf,
    /// Output directory for canonical CSVs.
    #[arg(long)]
    out_dir: PathBuf,
    /// Prepare only one dataset (ionosphere | pima | monks2 | robot).
    #[arg(long)]
    only: Option<String>,
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    z: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// Single-view CSV (label in the last column).
    #[arg(long, conflicts_with = "manifest")]
    dataset: Option<PathBuf>,
    /// Multi-view manifest file.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// sv-linear | sv-kernel | sv-approx | mv-linear | mv-kernel
    #[arg(long)]
    method: String,
    #[arg(long)]
    z: usize,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// RBF length-scale; defaults to the mean pairwise training distance.
    #[arg(long)]
    sigma: Option<f64>,
    /// Prototype count for sv-approx.
    #[arg(long)]
    prototypes: Option<usize>,
    /// random-train | kmeans-all
    #[arg(long, default_value = "kmeans-all")]
    strategy: String,
    /// input-space | feature-space (approximate path centering)
    #[arg(long, default_value = "input-space")]
    approx_centering: String,
    /// l2 | orthogonal
    #[arg(long, default_value = "l2")]
    normalization: String,
    /// direct | full-gram (kernel regression solver)
    #[arg(long, default_value = "direct")]
    solver: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TransformArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, conflicts_with = "manifest")]
    dataset: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, conflicts_with = "manifest")]
    dataset: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// fastsda-linear | fastsda-kernel | fastsda-approx | mvsda-linear |
    /// mvsda-kernel | oracle-sda | oracle-sorted
    #[arg(long)]
    method: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 5)]
    knn_k: usize,
    /// Comma-separated subclass counts to grid-search.
    #[arg(long, default_value = "1,2,3,4,5,6")]
    z_grid: String,
    /// Comma-separated regularization values to grid-search.
    #[arg(long, default_value = "1e-3,1e-2,1e-1,1,1e1,1e2,1e3")]
    alpha_grid: String,
    #[arg(long, default_value_t = 0.98)]
    pca_energy: f64,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    prototypes: usize,
    /// random-train | kmeans-all
    #[arg(long, default_value = "kmeans-all")]
    strategy: String,
    #[arg(long, default_value_t = 5)]
    timing_reps: usize,
    /// Worker threads for rotations.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// pca-standardize | standardize | raw; defaults to pca-standardize for
    /// --dataset and raw for --manifest (the multi-view protocol).
    #[arg(long)]
    preprocess: Option<String>,
    /// l2 | orthogonal projection normalization.
    #[arg(long, default_value = "l2")]
    normalization: String,
    /// Output path prefix; writes <out>.tsv and <out>.txt.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "300,600,1200,2400")]
    d_grid: String,
    #[arg(long, default_value = "600")]
    n_grid: String,
    #[arg(long, default_value_t = 7)]
    c: usize,
    #[arg(long, default_value_t = 2)]
    z: usize,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OracleCheckArgs {
    /// Check the Laplacian built from a real dataset (clustered at --z).
    #[arg(long, conflicts_with = "manifest")]
    dataset: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Synthetic layout when no dataset is given: number of classes.
    #[arg(long, default_value_t = 2)]
    classes: usize,
    #[arg(long, default_value_t = 2)]
    z: usize,
    #[arg(long, default_value_t = 60)]
    samples: usize,
    /// Views for the synthetic multi-view check (1 = single-view).
    #[arg(long, default_value_t = 1)]
    views: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Perturb one Laplacian entry first (negative control; checks must
    /// then fail).
    #[arg(long, default_value_t = false)]
    corrupt: bool,
}

enum CliFailure {
    CheckFailed,
    InvalidArgs(String),
    Data(String),
    Numerical(String),
}

impl CliFailure {
    fn exit(self) -> ExitCode {
        match self {
            CliFailure::CheckFailed => ExitCode::from(1),
            CliFailure::InvalidArgs(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
            CliFailure::Data(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(3)
            }
            CliFailure::Numerical(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(4)
            }
        }
    }
}

impl From<IoError> for CliFailure {
    fn from(e: IoError) -> Self {
        CliFailure::Data(e.to_string())
    }
}

impl From<ClusterError> for CliFailure {
    fn from(e: ClusterError) -> Self {
        CliFailure::Data(e.to_string())
    }
}

impl From<ModelError> for CliFailure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Cluster(c) => CliFailure::Data(c.to_string()),
            other => CliFailure::Numerical(other.to_string()),
        }
    }
}

impl From<EvalError> for CliFailure {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::ClassTooSmall { .. } => CliFailure::Data(e.to_string()),
            EvalError::Cluster(c) => CliFailure::Data(c.to_string()),
            other => CliFailure::Numerical(other.to_string()),
        }
    }
}

fn invocation_line() -> String {
    let args: Vec<String> = std::env::args().collect();
    args.join(" ")
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "dataset".into())
}

fn parse_usize_list(s: &str, what: &str) -> Result<Vec<usize>, CliFailure> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| CliFailure::InvalidArgs(format!("bad {what} entry '{t}'")))
        })
        .collect()
}

fn parse_f64_list(s: &str, what: &str) -> Result<Vec<f64>, CliFailure> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliFailure::InvalidArgs(format!("bad {what} entry '{t}'")))
        })
        .collect()
}

fn parse_strategy(s: &str) -> Result<PrototypeStrategy, CliFailure> {
    match s {
        "random-train" => Ok(PrototypeStrategy::RandomTrain),
        "kmeans-all" => Ok(PrototypeStrategy::KmeansAll),
        _ => Err(CliFailure::InvalidArgs(format!(
            "unknown prototype strategy '{s}'"
        ))),
    }
}

fn parse_centering(s: &str) -> Result<ApproxCentering, CliFailure> {
    match s {
        "input-space" => Ok(ApproxCentering::InputSpace),
        "feature-space" => Ok(ApproxCentering::FeatureSpace),
        _ => Err(CliFailure::InvalidArgs(format!(
            "unknown approx centering '{s}'"
        ))),
    }
}

fn parse_normalization(s: &str) -> Result<Normalization, CliFailure> {
    match s {
        "l2" => Ok(Normalization::L2),
        "orthogonal" => Ok(Normalization::Orthogonal),
        _ => Err(CliFailure::InvalidArgs(format!(
            "unknown normalization '{s}'"
        ))),
    }
}

fn parse_solver(s: &str) -> Result<KernelSolver, CliFailure> {
    match s {
        "direct" => Ok(KernelSolver::Direct),
        "full-gram" => Ok(KernelSolver::FullGram),
        _ => Err(CliFailure::InvalidArgs(format!("unknown solver '{s}'"))),
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), CliFailure> {
    std::fs::write(path, content).map_err(|e| CliFailure::Data(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Prepare(args) => cmd_prepare(args),
        Command::Cluster(args) => cmd_cluster(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Transform(args) => cmd_transform(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Bench(args) => cmd_bench(args),
        Command::OracleCheck(args) => cmd_oracle_check(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => failure.exit(),
    }
}

// ---------------------------------------------------------------------------
// prepare
// ---------------------------------------------------------------------------

fn cmd_prepare(args: PrepareArgs) -> Result<(), CliFailure> {
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliFailure::Data(format!("{}: {e}", args.out_dir.display())))?;
    let raw = &args.raw_dir;
    let wants = |name: &str| args.only.as_deref().map_or(true, |o| o == name);
    let mut prepared = 0usize;
    if wants("ionosphere") {
        let src = raw.join("ionosphere.csv");
        if src.exists() {
            let n = prepare_passthrough_csv(&src, &args.out_dir.join("ionosphere.csv"))?;
            println!("ionosphere: {n} samples");
            prepared += 1;
        } else if args.only.is_some() {
            return Err(CliFailure::Data(format!("missing {}", src.display())));
        }
    }
    if wants("pima") {
        let src = raw.join("pima-indians-diabetes.csv");
        if src.exists() {
            let n = prepare_passthrough_csv(&src, &args.out_dir.join("pima.csv"))?;
            println!("pima: {n} samples");
            prepared += 1;
        } else if args.only.is_some() {
            return Err(CliFailure::Data(format!("missing {}", src.display())));
        }
    }
    if wants("monks2") {
        let train = raw.join("monks-2.train");
        let test = raw.join("monks-2.test");
        if train.exists() && test.exists() {
            let n = prepare_monks(
                &[train.as_path(), test.as_path()],
                &args.out_dir.join("monks2.csv"),
            )?;
            println!("monks2: {n} samples");
            prepared += 1;
        } else if args.only.is_some() {
            return Err(CliFailure::Data(format!(
                "missing {} or {}",
                train.display(),
                test.display()
            )));
        }
    }
    if wants("robot") {
        let lp1 = raw.join("lp1.data");
        let lp4 = raw.join("lp4.data");
        if lp1.exists() && lp4.exists() {
            let n = prepare_robot(&[lp1.as_path(), lp4.as_path()], &args.out_dir, "robot")?;
            println!("robot: {n} instances across 6 views");
            prepared += 1;
        } else if args.only.is_some() {
            return Err(CliFailure::Data(format!(
                "missing {} or {}",
                lp1.display(),
                lp4.display()
            )));
        }
    }
    if prepared == 0 {
        return Err(CliFailure::Data(format!(
            "no raw dataset files found under {}",
            raw.display()
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// cluster
// ---------------------------------------------------------------------------

fn cmd_cluster(args: ClusterArgs) -> Result<(), CliFailure> {
    let view = load_csv(&args.dataset, LabelSource::LastColumn)?;
    let assignment: SubclassAssignment =
        cluster_subclasses(&view.x, &view.class_labels, args.z, args.seed, 0)?;
    let mut out = format!("# {}\n", invocation_line());
    out.push_str("sample\tclass\tsubclass\n");
    for (i, (&c, &s)) in view
        .class_labels
        .iter()
        .zip(assignment.labels.iter())
        .enumerate()
    {
        out.push_str(&format!("{i}\t{c}\t{s}\n"));
    }
    write_file(&args.out, &out)?;
    println!(
        "clustered {} samples into {} subclasses per class (seed {})",
        view.class_labels.len(),
        args.z,
        args.seed
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

fn cmd_fit(args: FitArgs) -> Result<(), CliFailure> {
    let normalization = parse_normalization(&args.normalization)?;
    let solver = parse_solver(&args.solver)?;
    let strategy = parse_strategy(&args.strategy)?;
    let approx_centering = parse_centering(&args.approx_centering)?;
    let started = Instant::now();
    let (model, n, dims_in): (SavedModel, usize, String) = match args.method.as_str() {
        "sv-linear" | "sv-kernel" | "sv-approx" => {
            let path = args.dataset.as_ref().ok_or_else(|| {
                CliFailure::InvalidArgs("single-view methods need --dataset".into())
            })?;
            let view = load_csv(path, LabelSource::LastColumn)?;
            let sub = cluster_subclasses(&view.x, &view.class_labels, args.z, args.seed, 0)?;
            let model = match args.method.as_str() {
                "sv-linear" => fit_fast_linear(
                    &view.x,
                    &view.class_labels,
                    &sub.labels,
                    args.z,
                    args.alpha,
                    normalization,
                    args.seed,
                )?,
                "sv-kernel" => fit_fast_kernel(
                    &view.x,
                    &view.class_labels,
                    &sub.labels,
                    args.z,
                    args.alpha,
                    args.sigma,
                    solver,
                    normalization,
                    args.seed,
                )?,
                _ => {
                    let r = args.prototypes.unwrap_or_else(|| view.x.cols().min(1000));
                    let mut cfg = KernelConfig::approximate(1.0, r, strategy);
                    cfg.approx_centering = approx_centering;
                    fit_fast_approx(
                        &view.x,
                        &view.class_labels,
                        &sub.labels,
                        args.z,
                        args.alpha,
                        args.sigma,
                        &cfg,
                        normalization,
                        args.seed,
                    )?
                }
            };
            let n = view.class_labels.len();
            let d_in = format!("{}", view.x.rows());
            (SavedModel::Single(model), n, d_in)
        }
        "mv-linear" | "mv-kernel" => {
            let path = args.manifest.as_ref().ok_or_else(|| {
                CliFailure::InvalidArgs("multi-view methods need --manifest".into())
            })?;
            let ds = load_multiview(path)?;
            let views: Vec<Matrix> = ds.views.iter().map(|v| v.x.clone()).collect();
            let labels = ds.labels().to_vec();
            let subs: Vec<Vec<usize>> = views
                .iter()
                .enumerate()
                .map(|(v, x)| {
                    cluster_subclasses(x, &labels, args.z, args.seed, v).map(|a| a.labels)
                })
                .collect::<Result<_, _>>()?;
            let model = if args.method == "mv-linear" {
                fit_multiview_linear(&views, &labels, &subs, args.z, args.alpha, args.seed)?
            } else {
                let sigmas: Option<Vec<f64>> = args.sigma.map(|s| vec![s; views.len()]);
                fit_multiview_kernel(
                    &views,
                    &labels,
                    &subs,
                    args.z,
                    args.alpha,
                    sigmas.as_deref(),
                    args.seed,
                )?
            };
            let n = labels.len();
            let dims: Vec<String> = views.iter().map(|v| v.rows().to_string()).collect();
            (SavedModel::Multi(model), n, dims.join("+"))
        }
        other => {
            return Err(CliFailure::InvalidArgs(format!(
                "unknown fit method '{other}' (sv-linear | sv-kernel | sv-approx | mv-linear | mv-kernel)"
            )))
        }
    };
    let fit_seconds = started.elapsed().as_secs_f64();
    save_model(&model, &args.out)?;
    let log = format!(
        "# {}\nmethod: {}\nsamples: {n}\nfeatures: {dims_in}\nz: {}\nalpha: {}\nd: {}\nseed: {}\nfit_seconds: {:.6}\nmodel: {}\n",
        invocation_line(),
        args.method,
        args.z,
        args.alpha,
        model.dims(),
        args.seed,
        fit_seconds,
        args.out.display()
    );
    let log_path = args.out.with_extension("log");
    write_file(&log_path, &log)?;
    println!(
        "fitted {} (d = {}) in {:.6}s; model -> {}, log -> {}",
        args.method,
        model.dims(),
        fit_seconds,
        args.out.display(),
        log_path.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// transform
// ---------------------------------------------------------------------------

fn cmd_transform(args: TransformArgs) -> Result<(), CliFailure> {
    let model = load_model(&args.model)?;
    let embeddings = match (&model, &args.dataset, &args.manifest) {
        (SavedModel::Single(m), Some(path), _) => {
            let view = load_csv(path, LabelSource::LastColumn)?;
            transform(m, &view.x)?
        }
        (SavedModel::Multi(m), _, Some(path)) => {
            let ds = load_multiview(path)?;
            let views: Vec<Matrix> = ds.views.iter().map(|v| v.x.clone()).collect();
            m.transform(&views)?
        }
        (SavedModel::Single(_), None, _) => {
            return Err(CliFailure::InvalidArgs(
                "single-view model needs --dataset".into(),
            ))
        }
        (SavedModel::Multi(_), _, None) => {
            return Err(CliFailure::InvalidArgs(
                "multi-view model needs --manifest".into(),
            ))
        }
    };
    // samples as rows on disk
    let mut out = format!("# {}\n", invocation_line());
    for c in 0..embeddings.cols() {
        let row: Vec<String> = (0..embeddings.rows())
            .map(|r| format!("{:.16e}", embeddings.get(r, c)))
            .collect();
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    write_file(&args.out, &out)?;
    println!(
        "projected {} samples into {} dimensions -> {}",
        embeddings.cols(),
        embeddings.rows(),
        args.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

fn cmd_eval(args: EvalArgs) -> Result<(), CliFailure> {
    let method = Method::parse(&args.method)
        .ok_or_else(|| CliFailure::InvalidArgs(format!("unknown method '{}'", args.method)))?;
    let data: EvalData = match (&args.dataset, &args.manifest) {
        (Some(path), _) => load_csv(path, LabelSource::LastColumn)?.to_eval_data(&file_stem(path)),
        (_, Some(path)) => load_multiview(path)?.to_eval_data(&file_stem(path)),
        (None, None) => {
            return Err(CliFailure::InvalidArgs(
                "need --dataset or --manifest".into(),
            ))
        }
    };
    if method.is_multiview() && !matches!(data, EvalData::Multi { .. }) {
        return Err(CliFailure::InvalidArgs(
            "multi-view methods need --manifest".into(),
        ));
    }
    let preprocessing = match args.preprocess.as_deref() {
        Some("pca-standardize") => Preprocessing::PcaStandardize,
        Some("standardize") => Preprocessing::Standardize,
        Some("raw") => Preprocessing::Raw,
        Some(other) => {
            return Err(CliFailure::InvalidArgs(format!(
                "unknown preprocessing '{other}'"
            )))
        }
        None => {
            if args.manifest.is_some() {
                Preprocessing::Standardize
            } else {
                Preprocessing::PcaStandardize
            }
        }
    };
    let cfg = EvalConfig {
        folds: args.folds,
        knn_k: args.knn_k,
        z_grid: parse_usize_list(&args.z_grid, "--z-grid")?,
        alpha_grid: parse_f64_list(&args.alpha_grid, "--alpha-grid")?,
        pca_energy: args.pca_energy,
        seed: args.seed,
        timing_reps: args.timing_reps,
        jobs: args.jobs.max(1),
        sigma_override: args.sigma,
        prototype_count: args.prototypes,
        prototype_strategy: parse_strategy(&args.strategy)?,
        approx_centering: ApproxCentering::InputSpace,
        preprocessing,
        normalization: parse_normalization(&args.normalization)?,
    };
    let report = run_experiment(&data, method, &cfg)?;
    let invocation = invocation_line();
    let tsv_path = args.out.with_extension("tsv");
    let txt_path = args.out.with_extension("txt");
    write_file(&tsv_path, &report.to_tsv(&invocation))?;
    write_file(&txt_path, &report.to_text(&invocation))?;
    println!(
        "{} on {}: mean test accuracy {:.4} -> {}, {}",
        report.method,
        report.dataset,
        report.mean_accuracy,
        tsv_path.display(),
        txt_path.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

fn cmd_bench(args: BenchArgs) -> Result<(), CliFailure> {
    let d_grid = parse_usize_list(&args.d_grid, "--d-grid")?;
    let n_grid = parse_usize_list(&args.n_grid, "--n-grid")?;
    let rows = benchmark_speed(&d_grid, &n_grid, args.c, args.z, args.seed, args.reps)?;
    let tsv = bench_rows_to_tsv(&rows, &invocation_line());
    write_file(&args.out, &tsv)?;
    for r in &rows {
        println!(
            "D={} N={}: oracle {:.4}s fast {:.4}s ratio {:.2}x",
            r.dims, r.samples, r.t_oracle, r.t_fast, r.ratio
        );
    }
    println!("-> {}", args.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// oracle-check
// ---------------------------------------------------------------------------

struct Check {
    name: &'static str,
    value: f64,
    threshold: f64,
    pass: bool,
}

fn run_laplacian_checks(
    spec: &LaplacianSpec,
    layout: &LabelLayout,
    seed: u64,
    corrupt: bool,
) -> Result<Vec<Check>, CliFailure> {
    let mut lb = spec.lb.clone();
    if corrupt {
        let bump = lb.max_abs().max(1e-3) * 10.0;
        lb.set(0, lb.cols() - 1, lb.get(0, lb.cols() - 1) + bump);
    }
    let mut checks = Vec::new();
    let asym = lb.max_asymmetry();
    checks.push(Check {
        name: "symmetry",
        value: asym,
        threshold: 1e-10,
        pass: asym <= 1e-10,
    });
    let row_sum = (0..lb.rows())
        .map(|r| lb.row(r).iter().sum::<f64>().abs())
        .fold(0.0f64, f64::max);
    checks.push(Check {
        name: "zero row sums",
        value: row_sum,
        threshold: 1e-10,
        pass: row_sum <= 1e-10,
    });
    // the eigensolver needs a symmetric input; symmetrize the corrupted
    // matrix so the remaining checks still run
    let sym = lb.add(&lb.transpose()).scale(0.5);
    let eig = fastsda_core::linalg::symmetric_eig(&sym)
        .map_err(|e| CliFailure::Numerical(e.to_string()))?;
    let expected_rank = layout.views() * layout.classes() * layout.subclasses() - 1;
    let rank = eig.nonzero_indices(CONFIG.rank_tol).len();
    checks.push(Check {
        name: "rank = V*C*Z - 1",
        value: rank as f64,
        threshold: expected_rank as f64,
        pass: rank == expected_rank,
    });
    let nz = eig.nonzero_indices(CONFIG.rank_tol);
    let mut block_dev = 0.0f64;
    if !nz.is_empty() {
        let vectors = eig.vectors.select_columns(&nz).transpose();
        block_dev = max_block_deviation(&vectors, layout);
    }
    checks.push(Check {
        name: "block-constant eigenvectors",
        value: block_dev,
        threshold: 1e-8,
        pass: block_dev <= 1e-8,
    });
    let trace_gap = (lb.trace() - eig.values.iter().sum::<f64>()).abs();
    let trace_tol = 1e-10 * lb.trace().abs().max(1e-300);
    checks.push(Check {
        name: "trace = sum of eigenvalues",
        value: trace_gap,
        threshold: trace_tol,
        pass: trace_gap <= trace_tol,
    });
    // span equality with generated targets
    let mut rng = SeedRng::from_parts(seed, &[11]);
    let d_cap = if layout.views() == 1 {
        target_cap_single(layout, usize::MAX / 2)
    } else {
        target_cap_multiview(layout, &vec![usize::MAX / 2; layout.views()])
    };
    let targets = if layout.views() == 1 {
        make_targets_single(layout, d_cap, &mut rng)
    } else {
        make_targets_multiview(layout, d_cap, &mut rng)
    }
    .map_err(|e| CliFailure::Numerical(e.to_string()))?;
    let t = targets.canonical();
    let total = layout.total_columns() as f64;
    let proj = t.transpose().matmul(t);
    let mut residual_op = Matrix::identity(layout.total_columns()).sub(&proj);
    for i in 0..layout.total_columns() {
        for j in 0..layout.total_columns() {
            residual_op.set(i, j, residual_op.get(i, j) - 1.0 / total);
        }
    }
    let span_resid = residual_op.matmul(&lb).frobenius_norm();
    let span_tol = 1e-8 * lb.frobenius_norm().max(1e-300);
    checks.push(Check {
        name: "targets span Laplacian column space",
        value: span_resid,
        threshold: span_tol,
        pass: span_resid <= span_tol,
    });
    Ok(checks)
}

fn cmd_oracle_check(args: OracleCheckArgs) -> Result<(), CliFailure> {
    println!("# {}", invocation_line());
    let (layout, description): (LabelLayout, String) = match (&args.dataset, &args.manifest) {
        (Some(path), _) => {
            let view = load_csv(path, LabelSource::LastColumn)?;
            let sub = cluster_subclasses(&view.x, &view.class_labels, args.z, args.seed, 0)?;
            let layout = LabelLayout::single_view(&view.class_labels, &sub.labels, args.z)
                .map_err(|e| CliFailure::Data(e.to_string()))?;
            (layout, format!("{} (z={})", file_stem(path), args.z))
        }
        (_, Some(path)) => {
            let ds = load_multiview(path)?;
            let labels = ds.labels().to_vec();
            let subs: Vec<Vec<usize>> = ds
                .views
                .iter()
                .enumerate()
                .map(|(v, view)| {
                    cluster_subclasses(&view.x, &labels, args.z, args.seed, v).map(|a| a.labels)
                })
                .collect::<Result<_, _>>()?;
            let layout = LabelLayout::multi_view(&labels, &subs, args.z)
                .map_err(|e| CliFailure::Data(e.to_string()))?;
            (
                layout,
                format!("{} (V={}, z={})", file_stem(path), ds.views.len(), args.z),
            )
        }
        (None, None) => {
            let data = gaussian_mixture(6, args.samples, args.classes, args.z, 3.0, args.seed);
            if args.views <= 1 {
                let layout =
                    LabelLayout::single_view(&data.class_labels, &data.subclass_labels, args.z)
                        .map_err(|e| CliFailure::Data(e.to_string()))?;
                (
                    layout,
                    format!(
                        "synthetic C={} Z={} N={}",
                        args.classes, args.z, args.samples
                    ),
                )
            } else {
                // independent per-view subclass structure from fresh draws
                let subs: Vec<Vec<usize>> = (0..args.views)
                    .map(|v| {
                        gaussian_mixture(
                            6,
                            args.samples,
                            args.classes,
                            args.z,
                            3.0,
                            derive_seed(args.seed, &[v as u64]),
                        )
                        .subclass_labels
                    })
                    .collect();
                let layout = LabelLayout::multi_view(&data.class_labels, &subs, args.z)
                    .map_err(|e| CliFailure::Data(e.to_string()))?;
                (
                    layout,
                    format!(
                        "synthetic V={} C={} Z={} N={}",
                        args.views, args.classes, args.z, args.samples
                    ),
                )
            }
        }
    };
    let spec = if layout.views() == 1 {
        build_lb_single(&layout)
    } else {
        build_lb_multiview(&layout)
    }
    .map_err(|e| CliFailure::Data(e.to_string()))?;
    println!("laplacian: {description}");
    let checks = run_laplacian_checks(&spec, &layout, args.seed, args.corrupt)?;
    let mut all_pass = true;
    for c in &checks {
        let status = if c.pass { "PASS" } else { "FAIL" };
        println!(
            "{status}  {:<38} value {:>12.4e}  threshold {:>12.4e}",
            c.name, c.value, c.threshold
        );
        all_pass &= c.pass;
    }
    if all_pass {
        let expected = layout.views() * layout.classes() * layout.subclasses() - 1;
        println!("all checks passed (rank {expected})");
        Ok(())
    } else {
        println!("oracle check FAILED");
        Err(CliFailure::CheckFailed)
    }
}

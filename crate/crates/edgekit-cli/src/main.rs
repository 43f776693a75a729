//! `edgekit` command line: single-image detection, Canny, kernel
//! inspection, and dataset benchmarking.
//!
//! Exit codes: 0 success, 1 usage error, 2 I/O error, 3 data/validation
//! error. Output files are written atomically (temp file + rename), so a
//! failed run never leaves partial artifacts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use edgekit::canny::{canny, CannyConfig, ThresholdSource};
use edgekit::eval::{
    compare_filters, load_dataset, render_csv, render_json, BenchConfig, BenchMode, Tolerance,
};
use edgekit::kernels::{kernel_dump, Axis, ComparisonFamily, KernelChoice};
use edgekit::pipeline::{detect_edges, PipelineConfig};
use edgekit::{EdgeMap, Error};

const EXIT_USAGE: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_DATA: u8 = 3;

#[derive(Parser)]
#[command(
    name = "edgekit",
    version,
    about = "Edge detection with extended Sobel kernels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Thresholded edge detection (grayscale, Gaussian, gradient, threshold)
    Detect(DetectArgs),
    /// Canny edge detection with a pluggable gradient kernel
    Canny(CannyArgs),
    /// Benchmark filters against a dataset with ground-truth masks
    Bench(BenchArgs),
    /// Print a kernel matrix
    Kernels(KernelsArgs),
}

#[derive(Args, Clone)]
struct KernelArgs {
    /// Kernel family: sobel/extended (zero-dilated), or a 5x5 comparison
    /// family (sobel5_gupta, prewitt5, mod_prewitt5, scharr5)
    #[arg(long, default_value = "sobel")]
    kernel: String,
    /// Kernel size for the extended family (odd, 3..=15)
    #[arg(long, default_value_t = 3)]
    size: usize,
}

impl KernelArgs {
    fn choice(&self) -> Result<KernelChoice, String> {
        match self.kernel.as_str() {
            "sobel" | "extended" => Ok(KernelChoice::Extended(self.size)),
            other => {
                let family = ComparisonFamily::parse(other)
                    .map_err(|_| format!("unknown kernel family {other:?}"))?;
                if self.size != 3 && self.size != 5 {
                    return Err(format!(
                        "family {other} is 5x5 only, got --size {}",
                        self.size
                    ));
                }
                Ok(KernelChoice::Comparison(family))
            }
        }
    }
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    kernel: KernelArgs,
    /// Gaussian sigma
    #[arg(long, default_value_t = 1.4)]
    sigma: f64,
    /// Gaussian kernel size (odd)
    #[arg(long, default_value_t = 5)]
    ksize: usize,
    /// Skip the Gaussian smoothing step
    #[arg(long)]
    no_smoothing: bool,
    /// Threshold on the normalized magnitude, 0..=255
    #[arg(long)]
    threshold: f64,
    input: PathBuf,
    output: PathBuf,
}

#[derive(Args)]
struct CannyArgs {
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long, default_value_t = 1.4)]
    sigma: f64,
    #[arg(long, default_value_t = 5)]
    ksize: usize,
    /// High threshold ratio: T_h = max(input) * high-ratio
    #[arg(long, default_value_t = 0.7)]
    high_ratio: f64,
    /// Low threshold ratio: T_l = T_h * low-ratio
    #[arg(long, default_value_t = 0.3)]
    low_ratio: f64,
    /// What max(input) means: the gradient plane or the source image
    #[arg(long, value_enum, default_value_t = ThresholdSourceArg::Gradient)]
    threshold_source: ThresholdSourceArg,
    input: PathBuf,
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ThresholdSourceArg {
    Gradient,
    Source,
}

impl From<ThresholdSourceArg> for ThresholdSource {
    fn from(v: ThresholdSourceArg) -> Self {
        match v {
            ThresholdSourceArg::Gradient => ThresholdSource::GradientPlane,
            ThresholdSourceArg::Source => ThresholdSource::SourceImage,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Threshold,
    Canny,
}

#[derive(Args)]
struct BenchArgs {
    /// Dataset root: images/ plus groundtruth/<stem>/ masks
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Threshold)]
    mode: ModeArg,
    /// Comma-separated filter list: sizes (3,5,...,15) and/or comparison
    /// family names
    #[arg(long, default_value = "3,5,7,9,11,13,15")]
    filters: String,
    #[arg(long, default_value_t = 1.4)]
    sigma: f64,
    #[arg(long, default_value_t = 5)]
    ksize: usize,
    /// Threshold mode: skip the Gaussian smoothing step
    #[arg(long)]
    no_smoothing: bool,
    #[arg(long, default_value_t = 0.7)]
    high_ratio: f64,
    #[arg(long, default_value_t = 0.3)]
    low_ratio: f64,
    #[arg(long, value_enum, default_value_t = ThresholdSourceArg::Gradient)]
    threshold_source: ThresholdSourceArg,
    /// Matching tolerance in pixels, or `auto` for 0.0075 x diagonal
    #[arg(long, default_value = "auto")]
    tolerance: String,
    /// Worker threads (default: EDGEKIT_JOBS or logical CPU count)
    #[arg(long)]
    jobs: Option<usize>,
    /// Output prefix; writes <prefix>.csv, <prefix>.json and
    /// <prefix>.manifest.json
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct KernelsArgs {
    /// extended, sobel, or a comparison family name
    #[arg(long, default_value = "extended")]
    family: String,
    #[arg(long, default_value_t = 3)]
    size: usize,
    /// x or y
    #[arg(long, default_value = "x")]
    axis: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Detect(args) => cmd_detect(args),
        Command::Canny(args) => cmd_canny(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Kernels(args) => cmd_kernels(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("edgekit: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: msg.into(),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io { .. } => EXIT_IO,
            Error::InvalidArgument(_) => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(serde::Serialize)]
struct RunManifest {
    command: String,
    parameters: serde_json::Value,
    tool_version: String,
    timestamp: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    skipped: Vec<String>,
}

impl RunManifest {
    fn new(command: &str, parameters: serde_json::Value) -> Self {
        RunManifest {
            command: command.to_string(),
            parameters,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            skipped: Vec::new(),
        }
    }
}

/// Write bytes atomically: temp file in the target directory, then rename.
fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp",
            path.file_name().and_then(|n| n.to_str()).unwrap_or("out")
        )),
        None => PathBuf::from(format!(
            ".{}.tmp",
            path.file_name().and_then(|n| n.to_str()).unwrap_or("out")
        )),
    };
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(format!("writing {}", tmp.display()), e))?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Failure::from(Error::io(format!("renaming to {}", path.display()), e))
    })?;
    Ok(())
}

fn write_edge_map(path: &Path, map: &EdgeMap) -> Result<(), Failure> {
    // render into a temp file with the same extension so the format is
    // chosen correctly, then rename into place
    let ext = path.extension().and_then(|e| e.to_str()).ok_or_else(|| {
        usage(format!(
            "output {} needs a .pgm or .png extension",
            path.display()
        ))
    })?;
    let tmp = path.with_extension(format!("tmp.{ext}"));
    edgekit::image::save_edge_map(&tmp, map)?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Failure::from(Error::io(format!("renaming to {}", path.display()), e))
    })?;
    Ok(())
}

fn write_manifest(out: &Path, manifest: &RunManifest) -> Result<(), Failure> {
    let path = manifest_path(out);
    let json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    atomic_write(&path, json.as_bytes())
}

fn manifest_path(out: &Path) -> PathBuf {
    let name = out.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    out.with_file_name(format!("{name}.manifest.json"))
}

fn cmd_detect(args: DetectArgs) -> Result<(), Failure> {
    let kernel = args.kernel.choice().map_err(usage)?;
    let config = PipelineConfig {
        kernel,
        sigma: args.sigma,
        gaussian_ksize: args.ksize,
        skip_smoothing: args.no_smoothing,
        threshold: args.threshold,
    };
    config.validate()?;
    let image = edgekit::image::load_image(&args.input)?;
    let map = detect_edges(&image, &config)?;
    write_edge_map(&args.output, &map)?;
    let manifest = RunManifest::new(
        "detect",
        serde_json::json!({
            "config": config,
            "input": args.input,
            "output": args.output,
        }),
    );
    write_manifest(&args.output, &manifest)
}

fn cmd_canny(args: CannyArgs) -> Result<(), Failure> {
    let kernel = args.kernel.choice().map_err(usage)?;
    let config = CannyConfig {
        kernel,
        sigma: args.sigma,
        gaussian_ksize: args.ksize,
        high_ratio: args.high_ratio,
        low_ratio: args.low_ratio,
        threshold_source: args.threshold_source.into(),
    };
    config.validate()?;
    let image = edgekit::image::load_image(&args.input)?;
    let map = canny(&image, &config)?;
    write_edge_map(&args.output, &map)?;
    let manifest = RunManifest::new(
        "canny",
        serde_json::json!({
            "config": config,
            "input": args.input,
            "output": args.output,
        }),
    );
    write_manifest(&args.output, &manifest)
}

fn parse_filters(spec: &str) -> Result<Vec<KernelChoice>, Failure> {
    spec.split(',')
        .map(|tok| {
            let tok = tok.trim();
            if let Ok(size) = tok.parse::<usize>() {
                Ok(KernelChoice::Extended(size))
            } else {
                ComparisonFamily::parse(tok)
                    .map(KernelChoice::Comparison)
                    .map_err(|_| usage(format!("unknown filter {tok:?}")))
            }
        })
        .collect()
}

fn cmd_bench(args: BenchArgs) -> Result<(), Failure> {
    let filters = parse_filters(&args.filters)?;
    if filters.is_empty() {
        return Err(usage("empty filter list"));
    }
    let tolerance = match args.tolerance.as_str() {
        "auto" => Tolerance::Auto,
        s => Tolerance::Fixed(
            s.parse()
                .map_err(|_| usage(format!("bad tolerance {s:?}, expected integer or `auto`")))?,
        ),
    };
    let jobs = args.jobs.or_else(|| {
        std::env::var("EDGEKIT_JOBS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = jobs {
        if n == 0 {
            return Err(usage("--jobs must be positive"));
        }
        // a failure here means a pool already exists; fall back to it
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }

    let (dataset, skipped) = load_dataset(&args.dataset)?;
    for s in &skipped {
        eprintln!("edgekit: skipping {s}");
    }
    let config = BenchConfig {
        mode: match args.mode {
            ModeArg::Threshold => BenchMode::Threshold,
            ModeArg::Canny => BenchMode::Canny,
        },
        sigma: args.sigma,
        gaussian_ksize: args.ksize,
        skip_smoothing: args.no_smoothing,
        high_ratio: args.high_ratio,
        low_ratio: args.low_ratio,
        threshold_source: args.threshold_source.into(),
        thresholds: edgekit::pipeline::default_thresholds(),
        tolerance,
    };
    let reports = compare_filters(&dataset, &filters, &config)?;

    let mut manifest = RunManifest::new(
        "bench",
        serde_json::json!({
            "dataset": args.dataset,
            "filters": filters,
            "config": config,
            "images": dataset.len(),
        }),
    );
    manifest.skipped = skipped;

    let csv_path = args.out.with_extension("csv");
    let json_path = args.out.with_extension("json");
    atomic_write(&csv_path, render_csv(&reports).as_bytes())?;
    let mut metadata = BTreeMap::new();
    metadata.insert(
        "manifest".to_string(),
        serde_json::to_value(&manifest).expect("manifest serializes"),
    );
    atomic_write(&json_path, render_json(&reports, &metadata).as_bytes())?;
    write_manifest(&args.out, &manifest)?;
    print!("{}", render_csv(&reports));
    Ok(())
}

fn cmd_kernels(args: KernelsArgs) -> Result<(), Failure> {
    let axis = match args.axis.as_str() {
        "x" => Axis::X,
        "y" => Axis::Y,
        other => return Err(usage(format!("bad axis {other:?}, expected x or y"))),
    };
    let kernel = match args.family.as_str() {
        "extended" | "sobel" => edgekit::kernels::extended_sobel(args.size, axis)?,
        other => {
            let family = ComparisonFamily::parse(other)?;
            edgekit::kernels::comparison_kernel(family, axis)?
        }
    };
    print!("{}", kernel_dump(&kernel));
    Ok(())
}

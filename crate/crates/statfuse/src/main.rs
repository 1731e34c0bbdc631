//! Command-line front end: fuse, evaluate, compare and synth.
//!
//! Log lines go to standard error; data goes to files (or standard output
//! for reports without `-o`). Exit codes: 0 success, 1 usage or I/O
//! failure, 2 numeric failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use statfuse::error::Error;
use statfuse::fusion::{self, FusedBand, FusionConfig, FusionMethod};
use statfuse::io::{self, ReportFormat};
use statfuse::metrics::{self, QualityReport, ReportRow};
use statfuse::raster::{check_alignment, Band, ImageStack, ResolutionRatio};
use statfuse::synth::{self, SynthConfig};
use statfuse::window_stats::WindowSpec;

/// Environment variable overriding the default degeneracy epsilon.
const EPSILON_ENV: &str = "STATFUSE_EPSILON";

#[derive(Parser)]
#[command(
    name = "statfuse",
    version,
    about = "Statistical pan-sharpening (LMM, LMVM, RVS, LCM) and fusion quality evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fuse a PAN image with an MS image using one method
    Fuse(FuseArgs),
    /// Score a fused image against a reference image
    Evaluate(EvaluateArgs),
    /// Run all methods and write a combined report plus fused images
    Compare(CompareArgs),
    /// Generate a synthetic PAN/MS pair from a reference image
    Synth(SynthArgs),
}

#[derive(Args)]
struct WindowFlags {
    /// Window size WxH for every method (odd dimensions)
    #[arg(long, value_name = "WxH")]
    window: Option<String>,
    /// LMM window override
    #[arg(long, value_name = "WxH")]
    window_lmm: Option<String>,
    /// LMVM window override
    #[arg(long, value_name = "WxH")]
    window_lmvm: Option<String>,
    /// RVS window override
    #[arg(long, value_name = "WxH")]
    window_rvs: Option<String>,
    /// LCM window override
    #[arg(long, value_name = "WxH")]
    window_lcm: Option<String>,
    /// Degeneracy threshold for near-zero denominators
    #[arg(long, value_name = "EPS")]
    epsilon: Option<f64>,
    /// Clamp fused values to LO:HI before writing
    #[arg(long, value_name = "LO:HI")]
    clamp: Option<String>,
}

#[derive(Args)]
struct FuseArgs {
    /// Panchromatic image (PGM)
    pan: PathBuf,
    /// Multispectral image (PGM or PPM)
    ms: PathBuf,
    /// Fusion method: lmm, lmvm, rvs or lcm
    #[arg(long)]
    method: String,
    /// Integer PAN/MS resolution ratio
    #[arg(long, default_value_t = 1)]
    ratio: u32,
    /// Output image path (default fused.pgm / fused.ppm by band count)
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    windows: WindowFlags,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Fused image
    fused: PathBuf,
    /// Reference image (same band count)
    reference: PathBuf,
    /// Report path (standard output when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Report format: csv or json
    #[arg(long, default_value = "csv")]
    format: String,
    /// Histogram levels for entropy
    #[arg(long, default_value_t = 256)]
    levels: u32,
    /// Method label used in report rows
    #[arg(long, default_value = "FUSED")]
    label: String,
}

#[derive(Args)]
struct CompareArgs {
    /// Panchromatic image (PGM)
    pan: PathBuf,
    /// Multispectral image (PGM or PPM)
    ms: PathBuf,
    /// Integer PAN/MS resolution ratio
    #[arg(long, default_value_t = 1)]
    ratio: u32,
    /// Output directory for report and fused images
    #[arg(long, default_value = ".")]
    outdir: PathBuf,
    /// Report format: csv or json
    #[arg(long, default_value = "csv")]
    format: String,
    /// Histogram levels for entropy
    #[arg(long, default_value_t = 256)]
    levels: u32,
    /// Comma-separated subset of methods to run (default all)
    #[arg(long, value_name = "LIST")]
    methods: Option<String>,
    #[command(flatten)]
    windows: WindowFlags,
}

#[derive(Args)]
struct SynthArgs {
    /// Full-resolution reference image (PPM)
    reference: PathBuf,
    /// Integer PAN/MS resolution ratio
    #[arg(long, default_value_t = 4)]
    ratio: u32,
    /// Random seed for the noise stream
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Standard deviation of zero-mean Gaussian PAN noise
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Comma-separated PAN band weights (default equal)
    #[arg(long, value_name = "LIST")]
    weights: Option<String>,
    /// Output directory for pan.pgm, ms.ppm and truth.ppm
    #[arg(long, default_value = ".")]
    outdir: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Fuse(args) => cmd_fuse(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Synth(args) => cmd_synth(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Degenerate(_) => 2,
        _ => 1,
    }
}

fn parse_window(text: &str, flag: &str) -> Result<WindowSpec, Error> {
    let (w, h) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| Error::Invalid(format!("{flag} expects WxH, got '{text}'")))?;
    let w: usize = w
        .trim()
        .parse()
        .map_err(|_| Error::Invalid(format!("{flag}: bad width '{w}'")))?;
    let h: usize = h
        .trim()
        .parse()
        .map_err(|_| Error::Invalid(format!("{flag}: bad height '{h}'")))?;
    WindowSpec::new(w, h)
}

fn parse_clamp(text: &str) -> Result<(f64, f64), Error> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| Error::Invalid(format!("--clamp expects LO:HI, got '{text}'")))?;
    let lo: f64 = lo
        .trim()
        .parse()
        .map_err(|_| Error::Invalid(format!("--clamp: bad low bound '{lo}'")))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .map_err(|_| Error::Invalid(format!("--clamp: bad high bound '{hi}'")))?;
    if !lo.is_finite() || !hi.is_finite() || lo > hi {
        return Err(Error::Invalid(format!(
            "--clamp bounds must be finite with LO <= HI, got {lo}:{hi}"
        )));
    }
    Ok((lo, hi))
}

fn epsilon_default() -> Result<f64, Error> {
    match std::env::var(EPSILON_ENV) {
        Ok(text) => {
            let eps: f64 = text.trim().parse().map_err(|_| {
                Error::Invalid(format!("{EPSILON_ENV} must be a number, got '{text}'"))
            })?;
            if !eps.is_finite() || eps < 0.0 {
                return Err(Error::Invalid(format!(
                    "{EPSILON_ENV} must be finite and non-negative, got {eps}"
                )));
            }
            Ok(eps)
        }
        Err(_) => Ok(WindowSpec::DEFAULT_EPSILON),
    }
}

fn build_config(
    method: FusionMethod,
    ratio: u32,
    flags: &WindowFlags,
) -> Result<FusionConfig, Error> {
    let mut cfg = FusionConfig::new(method, ResolutionRatio::new(ratio)?);
    if let Some(text) = &flags.window {
        let win = parse_window(text, "--window")?;
        cfg.window_lmm = win;
        cfg.window_lmvm = win;
        cfg.window_rvs = win;
        cfg.window_lcm = win;
    }
    if let Some(text) = &flags.window_lmm {
        cfg.window_lmm = parse_window(text, "--window-lmm")?;
    }
    if let Some(text) = &flags.window_lmvm {
        cfg.window_lmvm = parse_window(text, "--window-lmvm")?;
    }
    if let Some(text) = &flags.window_rvs {
        cfg.window_rvs = parse_window(text, "--window-rvs")?;
    }
    if let Some(text) = &flags.window_lcm {
        cfg.window_lcm = parse_window(text, "--window-lcm")?;
    }
    let epsilon = match flags.epsilon {
        Some(eps) => eps,
        None => epsilon_default()?,
    };
    cfg = cfg.with_epsilon(epsilon)?;
    if let Some(text) = &flags.clamp {
        cfg.clamp = Some(parse_clamp(text)?);
    }
    Ok(cfg)
}

/// PAN band of a single-band file.
fn read_pan(path: &Path) -> Result<Band, Error> {
    let stack = io::read_image(path)?;
    if stack.band_count() != 1 {
        return Err(Error::Shape(format!(
            "{}: pan image must have exactly 1 band, got {}",
            path.display(),
            stack.band_count()
        )));
    }
    Ok(stack.into_bands().remove(0))
}

fn output_maxval(ms: &ImageStack) -> u32 {
    let bits = ms.band(0).bit_depth().clamp(1, 16);
    (1u32 << bits) - 1
}

fn write_fused(fused: &[FusedBand], path: &Path, maxval: u32) -> Result<(), Error> {
    let stack = ImageStack::new(fused.iter().map(|f| f.band.clone()).collect())?;
    io::write_image(&stack, path, maxval)
}

fn check_aligned(pan: &Band, ms: &ImageStack, ratio: ResolutionRatio) -> Result<(), Error> {
    let verdict = check_alignment(pan, ms, ratio);
    if verdict.is_aligned() {
        Ok(())
    } else {
        Err(Error::Dimension(verdict.to_string()))
    }
}

fn cmd_fuse(args: FuseArgs) -> Result<(), Error> {
    let method: FusionMethod = args.method.parse()?;
    let cfg = build_config(method, args.ratio, &args.windows)?;
    let pan = read_pan(&args.pan)?;
    let ms = io::read_image(&args.ms)?;
    check_aligned(&pan, &ms, cfg.ratio)?;

    let mut fused = Vec::with_capacity(ms.band_count());
    for (k, out) in fuse_timed(&pan, &ms, &cfg)?.into_iter().enumerate() {
        let (band, elapsed) = out;
        eprintln!("band {} fused in {:.1} ms ({method})", k + 1, elapsed);
        fused.push(band);
    }

    let output = args.output.unwrap_or_else(|| {
        PathBuf::from(if ms.band_count() == 1 {
            "fused.pgm"
        } else {
            "fused.ppm"
        })
    });
    write_fused(&fused, &output, output_maxval(&ms))?;
    eprintln!("wrote {}", output.display());
    Ok(())
}

/// Fuses band by band, timing each.
fn fuse_timed(
    pan: &Band,
    ms: &ImageStack,
    cfg: &FusionConfig,
) -> Result<Vec<(FusedBand, f64)>, Error> {
    let mut out = Vec::with_capacity(ms.band_count());
    for k in 0..ms.band_count() {
        let single = ImageStack::new(vec![ms.band(k).clone()])?;
        let start = Instant::now();
        let mut fused = fusion::fuse_stack(pan, &single, cfg)?;
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        let mut f = fused.remove(0);
        f.source_band = k;
        out.push((f, elapsed));
    }
    Ok(out)
}

fn emit_report(report: &QualityReport, output: Option<&Path>, format: ReportFormat) -> Result<(), Error> {
    match output {
        Some(path) => {
            io::write_report(report, path, format)?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            let text = match format {
                ReportFormat::Csv => io::render_report_csv(report),
                ReportFormat::Json => io::render_report_json(report),
            };
            print!("{text}");
        }
    }
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), Error> {
    let format: ReportFormat = args.format.parse()?;
    let fused = io::read_image(&args.fused)?;
    let reference = io::read_image(&args.reference)?;
    let report = metrics::evaluate_labeled(&args.label, &fused, &reference, args.levels)?;
    for row in &report.rows {
        for (name, cell) in [
            ("SNR", &row.snr),
            ("NRMSE", &row.nrmse),
            ("DI", &row.di),
            ("CC", &row.cc),
        ] {
            if let metrics::MetricCell::Failed(reason) = cell {
                eprintln!("{} band {}: {name} skipped: {reason}", row.method, row.band);
            }
        }
    }
    emit_report(&report, args.output.as_deref(), format)
}

fn parse_methods(text: Option<&str>) -> Result<Vec<FusionMethod>, Error> {
    match text {
        None => Ok(FusionMethod::ALL.to_vec()),
        Some(list) => {
            let mut methods = Vec::new();
            for part in list.split(',') {
                let m: FusionMethod = part.trim().parse()?;
                if !methods.contains(&m) {
                    methods.push(m);
                }
            }
            if methods.is_empty() {
                return Err(Error::Invalid("--methods given an empty list".into()));
            }
            Ok(methods)
        }
    }
}

fn cmd_compare(args: CompareArgs) -> Result<(), Error> {
    let format: ReportFormat = args.format.parse()?;
    let methods = parse_methods(args.methods.as_deref())?;
    let pan = read_pan(&args.pan)?;
    let ms = io::read_image(&args.ms)?;
    let ratio = ResolutionRatio::new(args.ratio)?;
    check_aligned(&pan, &ms, ratio)?;
    std::fs::create_dir_all(&args.outdir).map_err(|e| Error::Io {
        path: args.outdir.clone(),
        source: e,
    })?;

    let maxval = output_maxval(&ms);
    let ext = if ms.band_count() == 1 { "pgm" } else { "ppm" };
    let mut fused_all: Vec<FusedBand> = Vec::new();
    let mut failures: Vec<ReportRow> = Vec::new();
    for method in &methods {
        let cfg = build_config(*method, args.ratio, &args.windows)?;
        let start = Instant::now();
        match fusion::fuse_stack(&pan, &ms, &cfg) {
            Ok(fused) => {
                let elapsed = start.elapsed().as_secs_f64() * 1e3;
                eprintln!("{method}: {} bands fused in {elapsed:.1} ms", fused.len());
                let path = args.outdir.join(format!("fused_{}.{ext}", method.label().to_lowercase()));
                write_fused(&fused, &path, maxval)?;
                eprintln!("wrote {}", path.display());
                fused_all.extend(fused);
            }
            Err(e) => {
                eprintln!("{method} failed: {e}");
                for band in 1..=ms.band_count() {
                    failures.push(ReportRow::failed(method.label(), band, &e.to_string()));
                }
            }
        }
    }

    let mut report = metrics::evaluate_stack(&fused_all, &ms, args.levels)?;
    report.rows.extend(failures);
    let report_path = args.outdir.join(match format {
        ReportFormat::Csv => "report.csv",
        ReportFormat::Json => "report.json",
    });
    emit_report(&report, Some(&report_path), format)
}

fn parse_weights(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| Error::Invalid(format!("--weights: bad value '{part}'")))
        })
        .collect()
}

fn cmd_synth(args: SynthArgs) -> Result<(), Error> {
    let reference = io::read_image(&args.reference)?;
    let mut cfg = SynthConfig::new(ResolutionRatio::new(args.ratio)?);
    cfg.seed = args.seed;
    cfg.noise_sigma = args.noise;
    if let Some(text) = &args.weights {
        cfg.weights = Some(parse_weights(text)?);
    }
    let pair = synth::generate(&reference, &cfg)?;
    std::fs::create_dir_all(&args.outdir).map_err(|e| Error::Io {
        path: args.outdir.clone(),
        source: e,
    })?;
    let maxval = output_maxval(&reference);
    let ext = if reference.band_count() == 1 { "pgm" } else { "ppm" };

    let pan_path = args.outdir.join("pan.pgm");
    io::write_image(&ImageStack::new(vec![pair.pan])?, &pan_path, maxval)?;
    let ms_path = args.outdir.join(format!("ms.{ext}"));
    io::write_image(&pair.ms, &ms_path, maxval)?;
    let truth_path = args.outdir.join(format!("truth.{ext}"));
    io::write_image(&pair.truth, &truth_path, maxval)?;
    eprintln!(
        "wrote {}, {}, {}",
        pan_path.display(),
        ms_path.display(),
        truth_path.display()
    );
    Ok(())
}

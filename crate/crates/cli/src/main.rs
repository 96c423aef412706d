use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use optspline::designer::{design, design_report, DesignConfig, DesignMode, DEFAULT_CUBIC_RHO_D};
use optspline::experiment::{run_corpus, ExperimentConfig, Method, Scenario};
use optspline::image::{read_image, write_image};
use optspline::kernels::{
    bspline_kernel, cardinal_spline, hat_transform, CompactKernel, DEFAULT_HALFWIDTH, DEFAULT_Q,
    DEFAULT_TOL,
};
use optspline::resample::{baseline_kernels, enlarge_image_ordered, interpolate_1d, PassOrder};
use optspline::sampled::SampledFunction;
use optspline::seqalg::DiscreteSequence;

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_EMPTY_CORPUS: u8 = 5;

#[derive(Parser)]
#[command(
    name = "optspline",
    version,
    about = "Optimized compact-support interpolation kernels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design an optimized kernel and write it with a design report.
    Design(DesignArgs),
    /// Interpolate a sequence onto a fine grid.
    Interp(InterpArgs),
    /// Enlarge a grayscale image.
    Enlarge(EnlargeArgs),
    /// Run the downsample/enlarge experiment over an image corpus.
    Compare(CompareArgs),
    /// Write kernel, hat or cardinal curves as CSV.
    KernelDump(DumpArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Sinc,
    Filter,
    Signal,
}

#[derive(Args)]
struct DesignArgs {
    /// JSON problem description; explicit flags override its fields.
    #[arg(long)]
    problem: Option<PathBuf>,
    #[arg(long)]
    degree: Option<usize>,
    /// Integer samples at 1..=m, as `a,b,c` or a sequence file.
    #[arg(long)]
    rho_d: Option<String>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// `t,value` CSV with the target filter or reference signal.
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    halfwidth: Option<usize>,
    /// Kernel JSON path; the report goes next to it as `<stem>.report.json`.
    #[arg(long, default_value = "kernel.json")]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct InterpArgs {
    /// Sequence file (`offset k` line then values, or JSON).
    input: PathBuf,
    /// Kernel name (bilinear, bicubic, bspline<m>, opt-sinc) or JSON path.
    #[arg(long, default_value = "bspline3")]
    kernel: String,
    #[arg(long, default_value_t = DEFAULT_Q)]
    q: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum OrderArg {
    Rows,
    Columns,
}

#[derive(Args)]
struct EnlargeArgs {
    input: PathBuf,
    output: PathBuf,
    #[arg(long, default_value_t = 2)]
    factor: usize,
    /// Kernel name (bilinear, bicubic, bspline<m>, opt-sinc) or JSON path.
    #[arg(long, default_value = "opt-sinc")]
    kernel: String,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, value_enum, default_value = "rows")]
    order: OrderArg,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long, env = "OPTSPLINE_CORPUS")]
    corpus: PathBuf,
    /// Scenario 1, 2 or 3; repeat for several. All by default.
    #[arg(long = "scenario")]
    scenarios: Vec<u8>,
    /// Comma-separated method labels. All by default.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<String>,
    #[arg(long, default_value_t = 2)]
    factor: usize,
    #[arg(long)]
    rho_d: Option<String>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// CSV output; a `_quantized` sibling holds the 8-bit figures.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Aligned text table output.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Curve {
    Kernel,
    Hat,
    Cardinal,
}

#[derive(Args)]
struct DumpArgs {
    #[arg(long, default_value_t = 3)]
    degree: usize,
    #[arg(long, value_enum, default_value = "cardinal")]
    which: Curve,
    /// Kernel for `kernel` and `hat`; B-spline of `--degree` by default.
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long, default_value_t = DEFAULT_Q)]
    q: usize,
    #[arg(long, default_value_t = DEFAULT_HALFWIDTH)]
    halfwidth: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A command-line problem the argument parser cannot catch.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Signals an empty corpus after the (empty) outputs were written.
#[derive(Debug)]
struct EmptyCorpus;

impl std::fmt::Display for EmptyCorpus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("no images found in the corpus")
    }
}

impl std::error::Error for EmptyCorpus {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return EXIT_USAGE;
    }
    if err.downcast_ref::<EmptyCorpus>().is_some() {
        return EXIT_EMPTY_CORPUS;
    }
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<optspline::Error>() {
            use optspline::Error::*;
            return match e {
                e if e.is_numerical() => EXIT_NUMERICAL,
                Io(_) | Json(_) | Parse(_) => EXIT_IO,
                _ => EXIT_USAGE,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_IO;
        }
    }
    1
}

fn print_config<T: Serialize>(command: &str, config: &T) -> Result<()> {
    eprintln!(
        "optspline {command} configuration: {}",
        serde_json::to_string(config)?
    );
    Ok(())
}

fn write_output(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, contents).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(contents.as_bytes())?;
            Ok(())
        }
    }
}

fn parse_sequence_file(path: &Path) -> Result<DiscreteSequence<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if text.trim_start().starts_with('{') {
        Ok(serde_json::from_str(&text).map_err(optspline::Error::from)?)
    } else {
        Ok(text.parse::<DiscreteSequence<f64>>()?)
    }
}

/// `a,b,c` (placed at 1, 2, 3) or a sequence file.
fn parse_rho_d(arg: &str) -> Result<DiscreteSequence<f64>> {
    let inline: std::result::Result<Vec<f64>, _> =
        arg.split(',').map(|s| s.trim().parse::<f64>()).collect();
    match inline {
        Ok(values) => Ok(DiscreteSequence::new(1, values)),
        Err(_) if Path::new(arg).exists() => parse_sequence_file(Path::new(arg)),
        Err(_) => Err(usage(format!(
            "--rho-d {arg:?} is neither a number list nor a file"
        ))),
    }
}

/// Integer samples used when `--rho-d` is absent: the tuned cubic values,
/// or the B-spline's own samples for other degrees.
fn default_rho_d(degree: usize) -> Result<DiscreteSequence<f64>> {
    if degree == 3 {
        Ok(DiscreteSequence::new(1, DEFAULT_CUBIC_RHO_D.to_vec()))
    } else {
        Ok(bspline_kernel(degree)?.integer_samples().clone())
    }
}

fn default_sinc_config() -> DesignConfig {
    DesignConfig {
        degree: 3,
        rho_d: DiscreteSequence::new(1, DEFAULT_CUBIC_RHO_D.to_vec()),
        mode: DesignMode::Sinc,
        target_path: None,
        q: DEFAULT_Q,
        tol: DEFAULT_TOL,
        halfwidth: DEFAULT_HALFWIDTH,
    }
}

fn resolve_kernel(spec: &str) -> Result<CompactKernel> {
    match spec {
        "bilinear" => Ok(baseline_kernels()?.bilinear),
        "bicubic" => Ok(baseline_kernels()?.bicubic),
        "opt-sinc" => Ok(optspline::designer::design_kernel(
            &default_sinc_config().to_problem()?,
        )?),
        s if s.starts_with("bspline") && s[7..].parse::<usize>().is_ok() => {
            Ok(bspline_kernel(s[7..].parse()?)?)
        }
        path => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading kernel {path}"))?;
            Ok(CompactKernel::from_json(&text)?)
        }
    }
}

fn cmd_design(args: DesignArgs) -> Result<()> {
    let mut cfg = match &args.problem {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str::<DesignConfig>(&text).map_err(optspline::Error::from)?
        }
        None => default_sinc_config(),
    };
    if let Some(m) = args.degree {
        cfg.degree = m;
        if args.rho_d.is_none() && args.problem.is_none() {
            cfg.rho_d = default_rho_d(m)?;
        }
    }
    if let Some(r) = &args.rho_d {
        cfg.rho_d = parse_rho_d(r)?;
    }
    if let Some(mode) = args.mode {
        cfg.mode = match mode {
            ModeArg::Sinc => DesignMode::Sinc,
            ModeArg::Filter => DesignMode::Filter,
            ModeArg::Signal => DesignMode::Signal,
        };
    }
    if let Some(t) = args.target {
        cfg.target_path = Some(t);
    }
    cfg.q = args.q.unwrap_or(cfg.q);
    cfg.tol = args.tol.unwrap_or(cfg.tol);
    cfg.halfwidth = args.halfwidth.unwrap_or(cfg.halfwidth);
    if cfg.mode != DesignMode::Sinc && cfg.target_path.is_none() {
        return Err(usage("--target is required in filter and signal mode"));
    }
    let report_path = args
        .report
        .unwrap_or_else(|| args.out.with_extension("report.json"));
    print_config(
        "design",
        &json!({ "problem": cfg, "out": args.out, "report": report_path }),
    )?;

    let problem = cfg.to_problem()?;
    let d = design(&problem)?;
    let report = design_report(&problem, &d)?;
    let meta = json!({ "generator": "optspline design", "problem": cfg });
    fs::write(&args.out, d.kernel.to_json(Some(meta))? + "\n")
        .with_context(|| format!("writing {}", args.out.display()))?;
    fs::write(&report_path, serde_json::to_string_pretty(&report)? + "\n")
        .with_context(|| format!("writing {}", report_path.display()))?;
    println!("kernel: {}", args.out.display());
    println!("report: {}", report_path.display());
    println!("min eigenvalue of V: {:.6e}", report.min_eigenvalue);
    println!("stationarity: {:.3e}", report.stationarity);
    if let Some(db) = report.hat_snr_db {
        println!("hat SNR vs sinc: {db:.2} dB");
    }
    Ok(())
}

fn cmd_interp(args: InterpArgs) -> Result<()> {
    print_config(
        "interp",
        &json!({ "input": args.input, "kernel": args.kernel, "Q": args.q, "tol": args.tol, "out": args.out }),
    )?;
    let x = parse_sequence_file(&args.input)?;
    let k = resolve_kernel(&args.kernel)?;
    let y = interpolate_1d(&x, &k, args.q, args.tol)?;
    let mut buf = Vec::new();
    y.write_csv(&mut buf)?;
    write_output(args.out.as_deref(), std::str::from_utf8(&buf)?)
}

fn cmd_enlarge(args: EnlargeArgs) -> Result<()> {
    print_config(
        "enlarge",
        &json!({ "input": args.input, "output": args.output, "factor": args.factor, "kernel": args.kernel, "tol": args.tol, "order": args.order }),
    )?;
    if args.factor < 2 {
        return Err(usage("--factor must be at least 2"));
    }
    let img =
        read_image(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let k = resolve_kernel(&args.kernel)?;
    let order = match args.order {
        OrderArg::Rows => PassOrder::RowsFirst,
        OrderArg::Columns => PassOrder::ColumnsFirst,
    };
    let big = enlarge_image_ordered(&img, &k, args.factor, args.tol, order)?;
    write_image(&args.output, &big)
        .with_context(|| format!("writing {}", args.output.display()))?;
    println!(
        "{}x{} -> {}x{}",
        img.width(),
        img.height(),
        big.width(),
        big.height()
    );
    Ok(())
}

fn quantized_sibling(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = path
        .extension()
        .map(|e| format!(".{}", e.to_string_lossy()))
        .unwrap_or_default();
    path.with_file_name(format!("{stem}_quantized{ext}"))
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let mut cfg = ExperimentConfig {
        factor: args.factor,
        tol: args.tol,
        ..Default::default()
    };
    if !args.scenarios.is_empty() {
        cfg.scenarios = args
            .scenarios
            .iter()
            .map(|&n| Scenario::from_number(n).map_err(|e| usage(e.to_string())))
            .collect::<Result<_>>()?;
    }
    if !args.methods.is_empty() {
        cfg.methods = args
            .methods
            .iter()
            .map(|m| Method::from_label(m).map_err(|e| usage(e.to_string())))
            .collect::<Result<_>>()?;
    }
    if let Some(r) = &args.rho_d {
        cfg.rho_d = parse_rho_d(r)?;
    }
    if args.factor < 2 {
        return Err(usage("--factor must be at least 2"));
    }
    print_config(
        "compare",
        &json!({ "corpus": args.corpus, "experiment": cfg, "cutoff": cfg.cutoff(), "out": args.out, "table": args.table }),
    )?;

    let report = run_corpus(&args.corpus, &cfg)
        .with_context(|| format!("reading corpus {}", args.corpus.display()))?;
    if let Some(out) = &args.out {
        fs::write(out, report.to_csv()).with_context(|| format!("writing {}", out.display()))?;
        let q = quantized_sibling(out);
        fs::write(&q, report.to_csv_quantized())
            .with_context(|| format!("writing {}", q.display()))?;
    }
    let table = report.to_text();
    if let Some(t) = &args.table {
        fs::write(t, &table).with_context(|| format!("writing {}", t.display()))?;
    }
    print!("{table}");
    if report.is_empty() {
        return Err(EmptyCorpus.into());
    }
    Ok(())
}

fn cmd_kernel_dump(args: DumpArgs) -> Result<()> {
    print_config(
        "kernel-dump",
        &json!({ "degree": args.degree, "which": args.which, "kernel": args.kernel, "Q": args.q, "halfwidth": args.halfwidth, "tol": args.tol, "out": args.out }),
    )?;
    let kernel = || -> Result<CompactKernel> {
        match &args.kernel {
            Some(s) => resolve_kernel(s),
            None => Ok(bspline_kernel(args.degree)?),
        }
    };
    let curve = match args.which {
        Curve::Cardinal => cardinal_spline(args.degree, args.tol, args.halfwidth, args.q)?,
        Curve::Hat => hat_transform(&kernel()?, args.tol, args.halfwidth, args.q)?,
        Curve::Kernel => {
            let k = kernel()?;
            SampledFunction::new(args.q, 0, k.sample_grid(args.q))?
        }
    };
    let mut buf = Vec::new();
    curve.write_csv(&mut buf)?;
    write_output(args.out.as_deref(), std::str::from_utf8(&buf)?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Design(a) => cmd_design(a),
        Command::Interp(a) => cmd_interp(a),
        Command::Enlarge(a) => cmd_enlarge(a),
        Command::Compare(a) => cmd_compare(a),
        Command::KernelDump(a) => cmd_kernel_dump(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

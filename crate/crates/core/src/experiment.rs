//! Downsample-then-enlarge experiments over an image corpus.
//!
//! Scenario 1 enlarges the anti-aliased, decimated image and compares it to
//! the original; scenario 2 compares it to the anti-aliased image; scenario 3
//! decimates without filtering and compares to the original.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::designer::{design_kernel, DesignProblem, DesignTarget, SignalReference};
use crate::error::{Error, Result};
use crate::image::{is_supported_image, read_image, ImageBuffer};
use crate::kernels::{bspline_kernel, CompactKernel, DEFAULT_HALFWIDTH};
use crate::metrics::{db_for_output, psnr, psnr_quantized, INFINITE_DB_SENTINEL};
use crate::resample::{antialias, baseline_kernels, decimate, enlarge_image};
use crate::sampled::SampledFunction;
use crate::seqalg::DiscreteSequence;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Scenario {
    AntialiasedVsOriginal = 1,
    AntialiasedVsAntialiased = 2,
    NoAntialiasing = 3,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [
        Scenario::AntialiasedVsOriginal,
        Scenario::AntialiasedVsAntialiased,
        Scenario::NoAntialiasing,
    ];

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Scenario::AntialiasedVsOriginal),
            2 => Ok(Scenario::AntialiasedVsAntialiased),
            3 => Ok(Scenario::NoAntialiasing),
            _ => Err(Error::InvalidArgument(format!(
                "scenario must be 1, 2 or 3, got {n}"
            ))),
        }
    }

    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn title(self) -> &'static str {
        match self {
            Scenario::AntialiasedVsOriginal => "anti-aliased before sampling, original reference",
            Scenario::AntialiasedVsAntialiased => {
                "anti-aliased before sampling, anti-aliased reference"
            }
            Scenario::NoAntialiasing => "no anti-aliasing, original reference",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    Bilinear,
    Bicubic,
    CubicBSpline,
    OptimizedSinc,
    OptimizedSignal,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Bilinear,
        Method::Bicubic,
        Method::CubicBSpline,
        Method::OptimizedSinc,
        Method::OptimizedSignal,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Method::Bilinear => "bilinear",
            Method::Bicubic => "bicubic",
            Method::CubicBSpline => "bspline3",
            Method::OptimizedSinc => "opt-sinc",
            Method::OptimizedSignal => "opt-signal",
        }
    }

    pub fn from_label(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.label() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method {s:?}")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub factor: usize,
    pub scenarios: Vec<Scenario>,
    pub methods: Vec<Method>,
    pub degree: usize,
    pub rho_d: DiscreteSequence<f64>,
    pub q: usize,
    pub tol: f64,
    pub halfwidth: usize,
    /// Anti-aliasing cutoff in cycles per pixel; `1 / (2 factor)` if unset.
    pub cutoff: Option<f64>,
}

impl ExperimentConfig {
    pub fn cutoff(&self) -> f64 {
        self.cutoff.unwrap_or(0.5 / self.factor as f64)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentRow {
    pub image: String,
    pub method: Method,
    pub scenario: Scenario,
    pub psnr_db: f64,
    /// Both images rounded to 8 bits first.
    pub psnr_quantized_db: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentFailure {
    pub image: String,
    pub method: Option<Method>,
    pub scenario: Option<Scenario>,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub images: Vec<String>,
    pub rows: Vec<ExperimentRow>,
    pub failures: Vec<ExperimentFailure>,
}

/// Supported image files directly inside `dir`, sorted by file name.
pub fn list_corpus(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_supported_image(p))
        .collect();
    paths.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(paths)
}

fn image_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Kernels that do not depend on the image.
struct FixedKernels {
    bilinear: CompactKernel,
    bicubic: CompactKernel,
    bspline3: CompactKernel,
    opt_sinc: Option<Result<CompactKernel>>,
}

impl FixedKernels {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let base = baseline_kernels()?;
        let opt_sinc = cfg.methods.contains(&Method::OptimizedSinc).then(|| {
            DesignProblem::new(
                cfg.degree,
                &cfg.rho_d,
                DesignTarget::Filter(crate::designer::FilterTarget::IdealLowpass),
                cfg.q,
                cfg.tol,
                cfg.halfwidth,
            )
            .and_then(|p| design_kernel(&p))
        });
        Ok(Self {
            bilinear: base.bilinear,
            bicubic: base.bicubic,
            bspline3: bspline_kernel(3)?,
            opt_sinc,
        })
    }
}

/// Kernel designed against the rows of the full-resolution image `fine`.
pub fn design_for_image(fine: &ImageBuffer, cfg: &ExperimentConfig) -> Result<CompactKernel> {
    let refs = (0..fine.height())
        .map(|y| {
            let row = SampledFunction::new(cfg.factor, 0, fine.row(y).to_vec())?;
            SignalReference::from_fine(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let p = DesignProblem::new(
        cfg.degree,
        &cfg.rho_d,
        DesignTarget::Signal(refs),
        cfg.factor,
        cfg.tol,
        cfg.halfwidth,
    )?;
    design_kernel(&p)
}

struct ImageOutcome {
    rows: Vec<ExperimentRow>,
    failures: Vec<ExperimentFailure>,
}

fn run_image(
    name: &str,
    original: &ImageBuffer,
    cfg: &ExperimentConfig,
    fixed: &FixedKernels,
) -> ImageOutcome {
    let mut out = ImageOutcome {
        rows: Vec::new(),
        failures: Vec::new(),
    };
    let fail = |method: Option<Method>, scenario: Option<Scenario>, e: &Error| ExperimentFailure {
        image: name.to_string(),
        method,
        scenario,
        message: e.to_string(),
    };
    let filtered = if cfg.scenarios.iter().any(|s| *s != Scenario::NoAntialiasing) {
        match antialias(original, cfg.cutoff()) {
            Ok(a) => Some(a),
            Err(e) => {
                out.failures.push(fail(None, None, &e));
                None
            }
        }
    } else {
        None
    };
    for &scenario in &cfg.scenarios {
        let (source, reference) = match (scenario, &filtered) {
            (Scenario::AntialiasedVsOriginal, Some(a)) => (a, original),
            (Scenario::AntialiasedVsAntialiased, Some(a)) => (a, a),
            (Scenario::NoAntialiasing, _) => (original, original),
            _ => continue,
        };
        let small = match decimate(source, cfg.factor) {
            Ok(d) => d,
            Err(e) => {
                out.failures.push(fail(None, Some(scenario), &e));
                continue;
            }
        };
        for &method in &cfg.methods {
            let kernel = match method {
                Method::Bilinear => Ok(fixed.bilinear.clone()),
                Method::Bicubic => Ok(fixed.bicubic.clone()),
                Method::CubicBSpline => Ok(fixed.bspline3.clone()),
                Method::OptimizedSinc => match &fixed.opt_sinc {
                    Some(Ok(k)) => Ok(k.clone()),
                    Some(Err(e)) => Err(Error::InvalidArgument(format!(
                        "optimized kernel unavailable: {e}"
                    ))),
                    None => continue,
                },
                Method::OptimizedSignal => design_for_image(source, cfg),
            };
            let result = kernel.and_then(|k| {
                let big = enlarge_image(&small, &k, cfg.factor, cfg.tol)?;
                Ok((
                    psnr(reference, &big, 1.0)?,
                    psnr_quantized(reference, &big)?,
                ))
            });
            match result {
                Ok((db, qdb)) => out.rows.push(ExperimentRow {
                    image: name.to_string(),
                    method,
                    scenario,
                    psnr_db: db,
                    psnr_quantized_db: qdb,
                }),
                Err(e) => out.failures.push(fail(Some(method), Some(scenario), &e)),
            }
        }
    }
    out
}

/// Runs every configured scenario and method on `images`, given as
/// `(name, image)` pairs. Rows follow the input order.
pub fn run_on_images(
    images: &[(String, ImageBuffer)],
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport> {
    let fixed = FixedKernels::new(cfg)?;
    let outcomes: Vec<ImageOutcome> = images
        .par_iter()
        .map(|(name, img)| run_image(name, img, cfg, &fixed))
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        rows.extend(o.rows);
        failures.extend(o.failures);
    }
    Ok(ExperimentReport {
        config: cfg.clone(),
        images: images.iter().map(|(n, _)| n.clone()).collect(),
        rows,
        failures,
    })
}

/// Loads the corpus in file-name order and runs the experiment. Images
/// that fail to load are reported as failures.
pub fn run_corpus(dir: &Path, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut images = Vec::new();
    let mut load_failures = Vec::new();
    for path in list_corpus(dir)? {
        let name = image_name(&path);
        match read_image(&path) {
            Ok(img) => images.push((name, img)),
            Err(e) => load_failures.push(ExperimentFailure {
                image: name,
                method: None,
                scenario: None,
                message: e.to_string(),
            }),
        }
    }
    let mut report = run_on_images(&images, cfg)?;
    load_failures.extend(report.failures);
    report.failures = load_failures;
    Ok(report)
}

fn fmt_db(db: f64) -> String {
    if db_for_output(db) >= INFINITE_DB_SENTINEL {
        "inf".into()
    } else {
        format!("{db:.2}")
    }
}

impl ExperimentReport {
    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn lookup(
        &self,
        image: &str,
        method: Method,
        scenario: Scenario,
    ) -> Option<&ExperimentRow> {
        self.rows
            .iter()
            .find(|r| r.image == image && r.method == method && r.scenario == scenario)
    }

    fn csv_with(&self, pick: impl Fn(&ExperimentRow) -> f64) -> String {
        let mut s = String::from("image,method,scenario,psnr_db\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{:.6}",
                r.image,
                r.method.label(),
                r.scenario.number(),
                db_for_output(pick(r))
            );
        }
        s
    }

    /// `image,method,scenario,psnr_db` on real-valued images.
    pub fn to_csv(&self) -> String {
        self.csv_with(|r| r.psnr_db)
    }

    /// Same schema, with 8-bit rounding applied before comparison.
    pub fn to_csv_quantized(&self) -> String {
        self.csv_with(|r| r.psnr_quantized_db)
    }

    /// Mean PSNR of a method over the images that produced a value.
    pub fn average(&self, method: Method, scenario: Scenario) -> Option<f64> {
        let vals: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.method == method && r.scenario == scenario)
            .map(|r| db_for_output(r.psnr_db))
            .collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }

    /// One aligned table per scenario: images down, methods across.
    pub fn to_text(&self) -> String {
        let methods = &self.config.methods;
        let name_w = self
            .images
            .iter()
            .map(String::len)
            .chain(["Overall Average".len()])
            .max()
            .unwrap_or(0);
        let col_w = methods
            .iter()
            .map(|m| m.label().len())
            .max()
            .unwrap_or(0)
            .max(8);
        let mut s = String::new();
        for &scenario in &self.config.scenarios {
            let _ = writeln!(
                s,
                "Scenario {}: {} (PSNR, dB)",
                scenario.number(),
                scenario.title()
            );
            let _ = write!(s, "{:<name_w$}", "Image");
            for m in methods {
                let _ = write!(s, "  {:>col_w$}", m.label());
            }
            s.push('\n');
            let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), fmt_db);
            for img in &self.images {
                let _ = write!(s, "{img:<name_w$}");
                for &m in methods {
                    let _ = write!(
                        s,
                        "  {:>col_w$}",
                        cell(self.lookup(img, m, scenario).map(|r| r.psnr_db))
                    );
                }
                s.push('\n');
            }
            let _ = write!(s, "{:<name_w$}", "Overall Average");
            for &m in methods {
                let _ = write!(s, "  {:>col_w$}", cell(self.average(m, scenario)));
            }
            s.push_str("\n\n");
        }
        if !self.failures.is_empty() {
            s.push_str("Failures\n");
            for f in &self.failures {
                let _ = writeln!(
                    s,
                    "{} {} {}: {}",
                    f.image,
                    f.method.map_or("-", Method::label),
                    f.scenario.map_or("-".into(), |sc| sc.number().to_string()),
                    f.message
                );
            }
        }
        s
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        use crate::designer::DEFAULT_CUBIC_RHO_D;
        use crate::kernels::{DEFAULT_Q, DEFAULT_TOL};
        Self {
            factor: 2,
            scenarios: Scenario::ALL.to_vec(),
            methods: Method::ALL.to_vec(),
            degree: 3,
            rho_d: DiscreteSequence::new(1, DEFAULT_CUBIC_RHO_D.to_vec()),
            q: DEFAULT_Q,
            tol: DEFAULT_TOL,
            halfwidth: DEFAULT_HALFWIDTH,
            cutoff: None,
        }
    }
}

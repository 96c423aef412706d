//! Least-squares design of an optimized basis spline.
//!
//! Given fixed integer samples `rho_d` (a proper sequence supported on
//! `1..=m`) the kernel `rho` on `(0, m + 1)` is chosen so that its
//! hat-transform best reconstructs a target in `L2`. The stationarity
//! condition `(v_p * rho)(t) = w(t)` on `(0, m + 1)` splits into `m + 1`
//! unit segments and becomes the Hermitian Toeplitz system
//! `sum_j v[i - j] R_j(s) = W_i(s)` at each fine-grid offset `s`.
//!
//! With `g = rho_d^-1` and `c = g * x_d`:
//!
//! * signal target: `v = acf(x_d) * acf(g)`, `W_n(s) = sum_k conj(c[k]) x(s + n + k)`;
//! * filter target (interpolating `h`): `x_d = delta`, so `v = acf(g)` and
//!   `W_n(s) = sum_j conj(g[j]) h(s + n + j)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{check_degree, hat_on_grid, hat_transform, CompactKernel};
use crate::metrics::snr_against_sinc;
use crate::sampled::SampledFunction;
use crate::seqalg::{
    autocorrelation, certify_proper, convolve, invert_fir, DiscreteSequence, ProperSequence,
    DEFAULT_MAX_HALFWIDTH, UNIT_CIRCLE_TOL,
};
use crate::special::{sinc_energy_outside, sinc_on_grid};
use crate::toeplitz::{solve_segments, ToeplitzSystem};

/// Integer samples used for cubic designs unless overridden.
pub const DEFAULT_CUBIC_RHO_D: [f64; 3] = [0.235, 0.484, 0.235];

/// Step of the central differences in [`check_stationarity`].
pub const STATIONARITY_STEP: f64 = 1e-5;

/// Largest allowed `|h(n) - delta[n]|` for a sampled filter target.
const INTERPOLATION_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub enum FilterTarget {
    /// `h(t) = sinc(t)`, evaluated analytically.
    IdealLowpass,
    /// A tabulated impulse response with `h(n) = delta[n]`.
    Sampled(SampledFunction),
}

impl FilterTarget {
    fn at_index(&self, i: i64, q: usize) -> f64 {
        match self {
            FilterTarget::IdealLowpass => sinc_on_grid(i, q),
            FilterTarget::Sampled(h) => h.at_index(i),
        }
    }

    fn sup_abs(&self) -> f64 {
        match self {
            FilterTarget::IdealLowpass => 1.0,
            FilterTarget::Sampled(h) => h.values().iter().fold(0.0, |a, v| a.max(v.abs())),
        }
    }

    /// Target energy outside grid indices `lo..=hi`.
    fn energy_outside(&self, lo: i64, hi: i64, q: usize) -> f64 {
        match self {
            FilterTarget::IdealLowpass => {
                // rectangle-rule cells are centred on grid points
                let half = 0.5 / q as f64;
                sinc_energy_outside(lo as f64 / q as f64 - half, hi as f64 / q as f64 + half)
            }
            FilterTarget::Sampled(h) => {
                h.values()
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| {
                        let i = h.start() + *k as i64;
                        i < lo || i > hi
                    })
                    .map(|(_, v)| v * v)
                    .sum::<f64>()
                    / q as f64
            }
        }
    }

    fn window(&self) -> Option<(i64, i64)> {
        match self {
            FilterTarget::IdealLowpass => None,
            FilterTarget::Sampled(h) => Some((h.start(), h.end() - 1)),
        }
    }
}

/// A fine-grid reference signal `x` with integer samples `x_d`.
#[derive(Clone, Debug)]
pub struct SignalReference {
    fine: SampledFunction,
    samples: DiscreteSequence<f64>,
}

impl SignalReference {
    pub fn new(fine: SampledFunction, samples: DiscreteSequence<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::DegenerateSignal);
        }
        let q = fine.q() as i64;
        if samples.offset() * q < fine.start() || (samples.end() - 1) * q >= fine.end() {
            return Err(Error::GridMisaligned(format!(
                "samples on {}..{} fall outside the reference window [{}, {}]",
                samples.offset(),
                samples.end() - 1,
                fine.origin(),
                fine.t(fine.len().saturating_sub(1)),
            )));
        }
        Ok(Self { fine, samples })
    }

    /// Uses `x(n)` at every integer inside the window as `x_d`.
    pub fn from_fine(fine: SampledFunction) -> Result<Self> {
        let samples = fine.integer_samples();
        Self::new(fine, samples)
    }

    pub fn fine(&self) -> &SampledFunction {
        &self.fine
    }

    pub fn samples(&self) -> &DiscreteSequence<f64> {
        &self.samples
    }
}

#[derive(Clone, Debug)]
pub enum DesignTarget {
    Filter(FilterTarget),
    /// One or more reference signals; their squared errors are summed.
    Signal(Vec<SignalReference>),
}

#[derive(Clone, Debug)]
pub struct DesignProblem {
    degree: usize,
    rho_d: ProperSequence<f64>,
    target: DesignTarget,
    q: usize,
    tol: f64,
    halfwidth: usize,
}

impl DesignProblem {
    pub fn new(
        degree: usize,
        rho_d: &DiscreteSequence<f64>,
        target: DesignTarget,
        q: usize,
        tol: f64,
        halfwidth: usize,
    ) -> Result<Self> {
        check_degree(degree)?;
        if q < 2 {
            return Err(Error::InvalidArgument(format!("Q must be >= 2, got {q}")));
        }
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        if halfwidth < degree + 1 {
            return Err(Error::InvalidArgument(format!(
                "halfwidth {halfwidth} must be at least {}",
                degree + 1
            )));
        }
        let trimmed = rho_d.trim(0.0);
        if trimmed.is_empty() || trimmed.offset() < 1 || trimmed.end() > degree as i64 + 1 {
            return Err(Error::InvalidArgument(format!(
                "rho_d must be nonzero and supported in 1..={degree}"
            )));
        }
        let rho_d = certify_proper(&trimmed, UNIT_CIRCLE_TOL)?;
        match &target {
            DesignTarget::Filter(FilterTarget::Sampled(h)) => {
                if h.q() != q {
                    return Err(Error::GridMismatch(format!(
                        "target has Q={}, problem Q={q}",
                        h.q()
                    )));
                }
                let (lo, hi) = h.integer_range().ok_or_else(|| {
                    Error::InvalidArgument("filter target has no integer samples".into())
                })?;
                for n in lo..=hi {
                    let expect = if n == 0 { 1.0 } else { 0.0 };
                    if (h.at_integer(n) - expect).abs() > INTERPOLATION_TOL {
                        return Err(Error::InvalidArgument(format!(
                            "filter target lacks the interpolation property: h({n}) = {}",
                            h.at_integer(n)
                        )));
                    }
                }
            }
            DesignTarget::Filter(FilterTarget::IdealLowpass) => {}
            DesignTarget::Signal(refs) => {
                if refs.is_empty() {
                    return Err(Error::InvalidArgument(
                        "signal target without references".into(),
                    ));
                }
                for r in refs {
                    if r.fine.q() != q {
                        return Err(Error::GridMismatch(format!(
                            "reference has Q={}, problem Q={q}",
                            r.fine.q()
                        )));
                    }
                }
            }
        }
        Ok(Self {
            degree,
            rho_d,
            target,
            q,
            tol,
            halfwidth,
        })
    }

    /// Ideal-lowpass design with the default grid, tolerance and window.
    pub fn sinc(degree: usize, rho_d: &DiscreteSequence<f64>) -> Result<Self> {
        use crate::kernels::{DEFAULT_HALFWIDTH, DEFAULT_Q, DEFAULT_TOL};
        Self::new(
            degree,
            rho_d,
            DesignTarget::Filter(FilterTarget::IdealLowpass),
            DEFAULT_Q,
            DEFAULT_TOL,
            DEFAULT_HALFWIDTH,
        )
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn rho_d(&self) -> &DiscreteSequence<f64> {
        self.rho_d.base()
    }

    pub fn target(&self) -> &DesignTarget {
        &self.target
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn halfwidth(&self) -> usize {
        self.halfwidth
    }

    /// `g = rho_d^-1`, truncated at the problem tolerance.
    pub fn prefilter_taps(&self) -> Result<DiscreteSequence<f64>> {
        invert_fir(&self.rho_d, self.tol, DEFAULT_MAX_HALFWIDTH)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignMode {
    Sinc,
    Filter,
    Signal,
}

/// Serializable description of a [`DesignProblem`]. Filter and signal
/// targets are read from `t,value` CSV files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignConfig {
    pub degree: usize,
    pub rho_d: DiscreteSequence<f64>,
    pub mode: DesignMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_path: Option<PathBuf>,
    #[serde(rename = "Q")]
    pub q: usize,
    pub tol: f64,
    pub halfwidth: usize,
}

impl DesignConfig {
    pub fn to_problem(&self) -> Result<DesignProblem> {
        let load = || -> Result<SampledFunction> {
            let path = self.target_path.as_ref().ok_or_else(|| {
                Error::InvalidArgument(format!("{:?} mode needs a target file", self.mode))
            })?;
            SampledFunction::read_csv(std::io::BufReader::new(std::fs::File::open(path)?))
        };
        let target = match self.mode {
            DesignMode::Sinc => DesignTarget::Filter(FilterTarget::IdealLowpass),
            DesignMode::Filter => DesignTarget::Filter(FilterTarget::Sampled(load()?)),
            DesignMode::Signal => DesignTarget::Signal(vec![SignalReference::from_fine(load()?)?]),
        };
        DesignProblem::new(
            self.degree,
            &self.rho_d,
            target,
            self.q,
            self.tol,
            self.halfwidth,
        )
    }
}

/// Lags `v[-m..=m]` of the impulse train `v_p`.
pub fn build_v(p: &DesignProblem) -> Result<DiscreteSequence<f64>> {
    let g = p.prefilter_taps()?;
    let acf_g = autocorrelation(&g);
    let v = match &p.target {
        DesignTarget::Filter(_) => acf_g,
        DesignTarget::Signal(refs) => {
            let mut acf_x = DiscreteSequence::empty();
            for r in refs {
                let a = autocorrelation(&r.samples);
                if a.get(0) == 0.0 {
                    return Err(Error::DegenerateSignal);
                }
                acf_x = acf_x.add(&a);
            }
            convolve(&acf_x, &acf_g)
        }
    };
    // the product of two Hermitian sequences is Hermitian only up to
    // summation order; mirror the non-negative lags
    let m = p.degree as i64;
    let values = (-m..=m).map(|n| v.get(n.abs())).collect();
    Ok(DiscreteSequence::new(-m, values))
}

/// Right-hand side segments `W_0..W_m`, each with `q` samples on `[0, 1)`.
pub fn build_w(p: &DesignProblem) -> Result<Vec<Vec<f64>>> {
    let g = p.prefilter_taps()?;
    let q = p.q as i64;
    let segments = p.degree + 1;
    let mut w = vec![vec![0.0; p.q]; segments];
    match &p.target {
        DesignTarget::Filter(h) => {
            let floor = p.tol / h.sup_abs().max(f64::MIN_POSITIVE);
            let taps: Vec<(i64, f64)> = g.iter().filter(|(_, v)| v.abs() >= floor).collect();
            for (n, seg) in w.iter_mut().enumerate() {
                for (k, out) in seg.iter_mut().enumerate() {
                    let i = n as i64 * q + k as i64;
                    *out = taps
                        .iter()
                        .map(|&(j, gj)| gj * h.at_index(i + j * q, p.q))
                        .sum();
                }
            }
        }
        DesignTarget::Signal(refs) => {
            for r in refs {
                let c = convolve(&g, &r.samples);
                for (n, seg) in w.iter_mut().enumerate() {
                    for (k, out) in seg.iter_mut().enumerate() {
                        let i = n as i64 * q + k as i64;
                        *out += c
                            .iter()
                            .map(|(l, cl)| cl * r.fine.at_index(i + l * q))
                            .sum::<f64>();
                    }
                }
            }
        }
    }
    Ok(w)
}

/// The assembled system for `p`.
pub fn build_system(p: &DesignProblem) -> Result<ToeplitzSystem<f64>> {
    ToeplitzSystem::new(&build_v(p)?, build_w(p)?)
}

/// Outcome of a design run with its diagnostics.
#[derive(Clone, Debug)]
pub struct Design {
    pub kernel: CompactKernel,
    pub system: ToeplitzSystem<f64>,
    /// Solver output before the integer-lattice values were overwritten.
    pub raw_segments: Vec<Vec<f64>>,
}

impl Design {
    /// `max_t |V R(t) - W(t)|` of the raw solution.
    pub fn solve_residual(&self) -> f64 {
        self.system.residual(&self.raw_segments)
    }

    /// `max_n |R_n(0) - rho_d[n]|` before overwriting.
    pub fn knot_mismatch(&self) -> f64 {
        let samples = self.kernel.integer_samples();
        self.raw_segments
            .iter()
            .enumerate()
            .map(|(n, seg)| (seg[0] - samples.get(n as i64)).abs())
            .fold(0.0, f64::max)
    }
}

/// Builds `v` and `W`, solves the Toeplitz system and reassembles
/// `rho(t) = sum_n R_n(t - n)` as a sampled kernel.
pub fn design(p: &DesignProblem) -> Result<Design> {
    let system = build_system(p)?;
    let raw_segments = solve_segments(&system)?;
    let rho_d = p.rho_d.base();
    let m = p.degree;
    let knot = |n: usize| {
        if n == 0 || n > m {
            0.0
        } else {
            rho_d.get(n as i64)
        }
    };
    let segments = raw_segments
        .iter()
        .enumerate()
        .map(|(n, r)| {
            let mut seg = Vec::with_capacity(p.q + 1);
            seg.push(knot(n));
            seg.extend_from_slice(&r[1..]);
            seg.push(knot(n + 1));
            seg
        })
        .collect();
    let kernel = CompactKernel::from_sampled(m, p.q, segments, rho_d.restrict(1, m as i64))?;
    Ok(Design {
        kernel,
        system,
        raw_segments,
    })
}

pub fn design_kernel(p: &DesignProblem) -> Result<CompactKernel> {
    Ok(design(p)?.kernel)
}

/// Squared `L2` error on the fine grid for kernel samples `grid` (at
/// `i / q`) whose integer samples invert to `g`.
fn error_for_grid(
    p: &DesignProblem,
    grid: &[f64],
    g: &DiscreteSequence<f64>,
    support: usize,
) -> f64 {
    let q = p.q;
    let qi = q as i64;
    let hw = (p.halfwidth * q) as i64;
    match &p.target {
        DesignTarget::Filter(h) => {
            let (mut lo, mut hi) = (g.offset() * qi, (g.end() - 1 + support as i64) * qi);
            lo = lo.min(-hw);
            hi = hi.max(hw);
            if let Some((a, b)) = h.window() {
                lo = lo.min(a);
                hi = hi.max(b);
            }
            let hat = hat_on_grid(grid, g, q, lo, hi);
            let inside: f64 = hat
                .iter()
                .enumerate()
                .map(|(k, v)| (h.at_index(lo + k as i64, q) - v).powi(2))
                .sum::<f64>()
                / q as f64;
            inside + h.energy_outside(lo, hi, q)
        }
        DesignTarget::Signal(refs) => refs
            .iter()
            .map(|r| {
                let c = convolve(g, &r.samples);
                let lo = (c.offset() * qi).min(r.fine.start());
                let hi = ((c.end() - 1 + support as i64) * qi).max(r.fine.end() - 1);
                let est = hat_on_grid(grid, &c, q, lo, hi);
                est.iter()
                    .enumerate()
                    .map(|(k, v)| (r.fine.at_index(lo + k as i64) - v).powi(2))
                    .sum::<f64>()
                    / q as f64
            })
            .sum(),
    }
}

/// `e(k) = ||k_hat * x_p - x||^2` (signal) or `||h - k_hat||^2` (filter),
/// by the rectangle rule at spacing `1 / q` over the whole support of the
/// estimate. The ideal lowpass adds its analytic out-of-window energy.
pub fn error_functional(k: &CompactKernel, p: &DesignProblem) -> Result<f64> {
    let g = k.prefilter_taps(p.tol)?;
    Ok(error_for_grid(p, &k.sample_grid(p.q), &g, k.support()))
}

/// A perturbation `gamma` of a kernel, sampled at `i / q` on `[0, m + 1]`.
/// Feasible perturbations vanish at every integer.
#[derive(Clone, Debug)]
pub struct Perturbation {
    q: usize,
    values: Vec<f64>,
}

impl Perturbation {
    pub fn from_fn(degree: usize, q: usize, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..=(degree + 1) * q)
            .map(|i| f(i as f64 / q as f64))
            .collect();
        Self { q, values }
    }

    /// `sin(pi s) (b0 + b1 s + b2 s^2)` on each unit segment, `b ~ U(-1, 1)`.
    pub fn random<R: Rng>(degree: usize, q: usize, rng: &mut R) -> Self {
        let coeffs: Vec<[f64; 3]> = (0..=degree)
            .map(|_| {
                [
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ]
            })
            .collect();
        let mut values: Vec<f64> = (0..=(degree + 1) * q)
            .map(|i| {
                let n = (i / q).min(degree);
                let s = i as f64 / q as f64 - n as f64;
                let [b0, b1, b2] = coeffs[n];
                (std::f64::consts::PI * s).sin() * (b0 + s * (b1 + s * b2))
            })
            .collect();
        for n in 0..=degree + 1 {
            values[n * q] = 0.0;
        }
        Self { q, values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() / self.q as f64).sqrt()
    }
}

/// Central-difference derivative of the error functional along `gamma`,
/// divided by `||gamma||_2`.
pub fn directional_derivative(
    k: &CompactKernel,
    p: &DesignProblem,
    gamma: &Perturbation,
) -> Result<f64> {
    let q = p.q;
    let expected = k.support() * q + 1;
    if gamma.q != q || gamma.values.len() != expected {
        return Err(Error::InfeasiblePerturbation(format!(
            "perturbation must hold {expected} samples at Q={q}"
        )));
    }
    for n in 0..=k.support() {
        let v = gamma.values[n * q];
        if v != 0.0 {
            return Err(Error::InfeasiblePerturbation(format!(
                "gamma({n}) = {v} is not zero"
            )));
        }
    }
    let norm = gamma.norm();
    if norm == 0.0 {
        return Err(Error::InfeasiblePerturbation(
            "gamma is identically zero".into(),
        ));
    }
    let g = k.prefilter_taps(p.tol)?;
    let base = k.sample_grid(q);
    let shifted = |sign: f64| -> Vec<f64> {
        base.iter()
            .zip(&gamma.values)
            .map(|(b, d)| b + sign * STATIONARITY_STEP * d)
            .collect()
    };
    let up = error_for_grid(p, &shifted(1.0), &g, k.support());
    let down = error_for_grid(p, &shifted(-1.0), &g, k.support());
    Ok((up - down) / (2.0 * STATIONARITY_STEP) / norm)
}

/// Largest normalized directional derivative over `trials` random feasible
/// perturbations. Near zero at the optimum.
pub fn check_stationarity(
    k: &CompactKernel,
    p: &DesignProblem,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let gamma = Perturbation::random(k.degree(), p.q, &mut rng);
        worst = worst.max(directional_derivative(k, p, &gamma)?.abs());
    }
    Ok(worst)
}

/// Diagnostics written next to a designed kernel.
#[derive(Clone, Debug, Serialize)]
pub struct DesignReport {
    pub degree: usize,
    pub q: usize,
    pub tol: f64,
    pub halfwidth: usize,
    pub mode: String,
    pub rho_d: DiscreteSequence<f64>,
    /// `v[0..=m]`; negative lags are the conjugates.
    pub v_d: Vec<f64>,
    pub min_eigenvalue: f64,
    pub solve_residual: f64,
    pub knot_mismatch: f64,
    pub error_functional: f64,
    pub stationarity: f64,
    /// SNR of the hat against `sinc`, whole-line energies.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hat_snr_db: Option<f64>,
}

/// Number of random perturbations probed for the report.
pub const REPORT_STATIONARITY_TRIALS: usize = 20;

pub fn design_report(p: &DesignProblem, d: &Design) -> Result<DesignReport> {
    let hat_snr_db = match &p.target {
        DesignTarget::Filter(FilterTarget::IdealLowpass) => {
            let hat = hat_transform(&d.kernel, p.tol, p.halfwidth, p.q)?;
            Some(snr_against_sinc(&hat))
        }
        _ => None,
    };
    let mode = match &p.target {
        DesignTarget::Filter(FilterTarget::IdealLowpass) => "sinc",
        DesignTarget::Filter(FilterTarget::Sampled(_)) => "filter",
        DesignTarget::Signal(_) => "signal",
    };
    Ok(DesignReport {
        degree: p.degree,
        q: p.q,
        tol: p.tol,
        halfwidth: p.halfwidth,
        mode: mode.into(),
        rho_d: p.rho_d.base().clone(),
        v_d: d.system.first_column(),
        min_eigenvalue: d.system.min_eigenvalue(),
        solve_residual: d.solve_residual(),
        knot_mismatch: d.knot_mismatch(),
        error_functional: error_functional(&d.kernel, p)?,
        stationarity: check_stationarity(&d.kernel, p, REPORT_STATIONARITY_TRIALS, 0)?,
        hat_snr_db,
    })
}

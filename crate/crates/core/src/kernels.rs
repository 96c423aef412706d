//! Compact-support kernels: B-splines, the hat-transform that turns a kernel
//! into its interpolating counterpart, and cardinal splines.
//!
//! Every kernel of degree `m` lives on `(0, m + 1)` and is stored as `m + 1`
//! unit-length segments `R_n(s) = k(n + s)`, `s` in `[0, 1)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampled::SampledFunction;
use crate::seqalg::{
    certify_proper, invert_fir, DiscreteSequence, DEFAULT_MAX_HALFWIDTH, UNIT_CIRCLE_TOL,
};

/// Largest supported spline degree.
pub const MAX_DEGREE: usize = 21;
/// Fine-grid samples per unit interval.
pub const DEFAULT_Q: usize = 64;
/// Half-width of hat and cardinal windows.
pub const DEFAULT_HALFWIDTH: usize = 16;
/// Truncation tolerance for two-sided inverses.
pub const DEFAULT_TOL: f64 = 1e-10;

pub(crate) fn check_degree(m: usize) -> Result<()> {
    if m == 0 || m.is_multiple_of(2) {
        return Err(Error::InvalidDegree(m));
    }
    if m > MAX_DEGREE {
        return Err(Error::DegreeTooLarge {
            degree: m,
            cap: MAX_DEGREE,
        });
    }
    Ok(())
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `beta^m(t) = sum_n (-1)^n C(m+1, n) u^(m+1)(t - n)` with the one-sided
/// power `u^(m+1)(t) = t^m / m!` for `t > 0`.
///
/// Uses the symmetry about `(m + 1) / 2` so at most half the terms are
/// summed.
pub fn bspline_eval(m: usize, t: f64) -> Result<f64> {
    check_degree(m)?;
    let width = (m + 1) as f64;
    if !(t > 0.0 && t < width) {
        return Ok(0.0);
    }
    let t = if t > 0.5 * width { width - t } else { t };
    let mut sum = 0.0;
    let mut n = 0usize;
    while (n as f64) < t {
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        sum += sign * binomial(m + 1, n) * (t - n as f64).powi(m as i32);
        n += 1;
    }
    let factorial: f64 = (1..=m).map(|i| i as f64).product();
    Ok(sum / factorial)
}

/// Exact power-basis coefficients of each B-spline segment.
fn bspline_segments_exact(m: usize) -> Vec<Vec<BigRational>> {
    let big = |x: i64| BigInt::from(x);
    let binom = |n: usize, k: usize| -> BigInt {
        let mut acc = BigInt::one();
        for i in 0..k {
            acc = acc * big((n - i) as i64) / big((i + 1) as i64);
        }
        acc
    };
    let factorial: BigInt = (1..=m as i64).map(big).product();
    (0..=m)
        .map(|n| {
            (0..=m)
                .map(|p| {
                    let mut acc = BigInt::zero();
                    for k in 0..=n {
                        let term =
                            binom(m + 1, k) * binom(m, p) * big((n - k) as i64).pow((m - p) as u32);
                        if k % 2 == 0 {
                            acc += term;
                        } else {
                            acc -= term;
                        }
                    }
                    BigRational::new(acc, factorial.clone())
                })
                .collect()
        })
        .collect()
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Representation {
    /// Power-basis coefficients (constant term first) per segment.
    Poly { segments: Vec<Vec<f64>> },
    /// `q + 1` samples per segment at `s = k / q`, both endpoints included.
    Sampled { q: usize, segments: Vec<Vec<f64>> },
}

/// A degree-`m` kernel supported on `(0, m + 1)` together with its integer
/// samples `k(n)`, `n = 1..=m`.
#[derive(Clone, Debug, PartialEq)]
pub struct CompactKernel {
    degree: usize,
    repr: Representation,
    integer_samples: DiscreteSequence<f64>,
}

impl CompactKernel {
    pub fn from_poly(
        degree: usize,
        segments: Vec<Vec<f64>>,
        integer_samples: DiscreteSequence<f64>,
    ) -> Result<Self> {
        Self::validated(degree, Representation::Poly { segments }, integer_samples)
    }

    pub fn from_sampled(
        degree: usize,
        q: usize,
        segments: Vec<Vec<f64>>,
        integer_samples: DiscreteSequence<f64>,
    ) -> Result<Self> {
        Self::validated(
            degree,
            Representation::Sampled { q, segments },
            integer_samples,
        )
    }

    fn validated(
        degree: usize,
        repr: Representation,
        integer_samples: DiscreteSequence<f64>,
    ) -> Result<Self> {
        check_degree(degree)?;
        let segments = match &repr {
            Representation::Poly { segments } => segments,
            Representation::Sampled { q, segments } => {
                if *q < 2 {
                    return Err(Error::InvalidArgument(format!(
                        "kernel Q must be >= 2, got {q}"
                    )));
                }
                if let Some(bad) = segments.iter().position(|s| s.len() != q + 1) {
                    return Err(Error::InvalidArgument(format!(
                        "segment {bad} holds {} samples, expected {}",
                        segments[bad].len(),
                        q + 1
                    )));
                }
                segments
            }
        };
        if segments.len() != degree + 1 {
            return Err(Error::InvalidArgument(format!(
                "degree {degree} needs {} segments, got {}",
                degree + 1,
                segments.len()
            )));
        }
        let samples = integer_samples.trim(0.0);
        if !samples.is_empty() && (samples.offset() < 1 || samples.end() > degree as i64 + 1) {
            return Err(Error::InvalidArgument(format!(
                "integer samples must lie in 1..={degree}"
            )));
        }
        let kernel = Self {
            degree,
            repr,
            integer_samples,
        };
        let scale = kernel.integer_samples.max_abs().max(1.0);
        for n in 1..=degree {
            let at_knot = kernel.segment_start(n);
            if (at_knot - kernel.integer_samples.get(n as i64)).abs() > 1e-12 * scale {
                return Err(Error::InvalidArgument(format!(
                    "kernel value {at_knot} at t={n} disagrees with integer sample {}",
                    kernel.integer_samples.get(n as i64)
                )));
            }
        }
        Ok(kernel)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Right end of the support `(0, m + 1)`.
    pub fn support(&self) -> usize {
        self.degree + 1
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn integer_samples(&self) -> &DiscreteSequence<f64> {
        &self.integer_samples
    }

    fn segment_start(&self, n: usize) -> f64 {
        match &self.repr {
            Representation::Poly { segments } => segments[n].first().copied().unwrap_or(0.0),
            Representation::Sampled { segments, .. } => segments[n][0],
        }
    }

    /// Kernel value; zero outside `(0, m + 1)`.
    pub fn eval(&self, t: f64) -> f64 {
        if !(t > 0.0 && t < self.support() as f64) {
            return 0.0;
        }
        let n = (t.floor() as usize).min(self.degree);
        let s = t - n as f64;
        match &self.repr {
            Representation::Poly { segments } => {
                segments[n].iter().rev().fold(0.0, |acc, &c| acc * s + c)
            }
            Representation::Sampled { q, segments } => {
                let seg = &segments[n];
                let pos = s * *q as f64;
                let i = (pos.floor() as usize).min(q - 1);
                let frac = pos - i as f64;
                if frac == 0.0 {
                    seg[i]
                } else {
                    seg[i] + frac * (seg[i + 1] - seg[i])
                }
            }
        }
    }

    /// Values at `t = i / q` for `i = 0..=(m + 1) q`. Exact for sampled
    /// kernels whose own resolution is a multiple of `q`.
    pub fn sample_grid(&self, q: usize) -> Vec<f64> {
        let total = self.support() * q;
        if let Representation::Sampled { q: own, segments } = &self.repr {
            if own % q == 0 {
                let stride = own / q;
                let mut out = Vec::with_capacity(total + 1);
                for seg in segments {
                    out.extend(seg[..*own].iter().step_by(stride));
                }
                out.push(0.0);
                return out;
            }
        }
        let mut out: Vec<f64> = (0..=total)
            .map(|i| self.eval(i as f64 / q as f64))
            .collect();
        out[0] = 0.0;
        out
    }

    /// Resamples onto `q` points per segment.
    pub fn to_sampled(&self, q: usize) -> Result<Self> {
        let grid = self.sample_grid(q);
        let segments = (0..self.support())
            .map(|n| {
                let mut seg = grid[n * q..=(n + 1) * q].to_vec();
                seg[0] = if n == 0 {
                    0.0
                } else {
                    self.integer_samples.get(n as i64)
                };
                seg
            })
            .collect();
        Self::from_sampled(self.degree, q, segments, self.integer_samples.clone())
    }

    pub fn scaled(&self, c: f64) -> Self {
        let scale = |segs: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            segs.iter()
                .map(|s| s.iter().map(|v| v * c).collect())
                .collect()
        };
        let repr = match &self.repr {
            Representation::Poly { segments } => Representation::Poly {
                segments: scale(segments),
            },
            Representation::Sampled { q, segments } => Representation::Sampled {
                q: *q,
                segments: scale(segments),
            },
        };
        Self {
            degree: self.degree,
            repr,
            integer_samples: self.integer_samples.scale(c),
        }
    }

    /// Two-sided inverse of the integer samples.
    pub fn prefilter_taps(&self, tol: f64) -> Result<DiscreteSequence<f64>> {
        let proper = certify_proper(&self.integer_samples, UNIT_CIRCLE_TOL)?;
        invert_fir(&proper, tol, DEFAULT_MAX_HALFWIDTH)
    }

    pub fn to_json(&self, metadata: Option<serde_json::Value>) -> Result<String> {
        Ok(serde_json::to_string_pretty(&KernelJson::from_kernel(
            self, metadata,
        ))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let json: KernelJson = serde_json::from_str(s)?;
        json.into_kernel()
    }
}

/// On-disk kernel format.
#[derive(Serialize, Deserialize)]
struct KernelJson {
    degree: usize,
    representation: String,
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    q: Option<usize>,
    segments: Vec<Vec<f64>>,
    integer_samples: DiscreteSequence<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metadata: Option<serde_json::Value>,
}

impl KernelJson {
    fn from_kernel(k: &CompactKernel, metadata: Option<serde_json::Value>) -> Self {
        let (representation, q, segments) = match &k.repr {
            Representation::Poly { segments } => ("poly", None, segments.clone()),
            Representation::Sampled { q, segments } => ("sampled", Some(*q), segments.clone()),
        };
        Self {
            degree: k.degree,
            representation: representation.into(),
            q,
            segments,
            integer_samples: k.integer_samples.clone(),
            metadata,
        }
    }

    fn into_kernel(self) -> Result<CompactKernel> {
        match self.representation.as_str() {
            "poly" => CompactKernel::from_poly(self.degree, self.segments, self.integer_samples),
            "sampled" => {
                let q = self
                    .q
                    .ok_or_else(|| Error::Parse("sampled kernel without Q".into()))?;
                CompactKernel::from_sampled(self.degree, q, self.segments, self.integer_samples)
            }
            other => Err(Error::Parse(format!("unknown representation `{other}`"))),
        }
    }
}

/// Exact-polynomial B-spline of odd degree `m` on `(0, m + 1)`.
pub fn bspline_kernel(m: usize) -> Result<CompactKernel> {
    check_degree(m)?;
    let exact = bspline_segments_exact(m);
    let samples = (1..=m).map(|n| rational_to_f64(&exact[n][0])).collect();
    let segments = exact
        .iter()
        .map(|seg| seg.iter().map(rational_to_f64).collect())
        .collect();
    CompactKernel::from_poly(m, segments, DiscreteSequence::new(1, samples))
}

/// Hat-transform on grid indices `lo..=hi`: `sum_j g[j] k(t - j)` using
/// kernel samples at `i / q` (see [`CompactKernel::sample_grid`]).
pub(crate) fn hat_on_grid(
    kernel_grid: &[f64],
    g: &DiscreteSequence<f64>,
    q: usize,
    lo: i64,
    hi: i64,
) -> Vec<f64> {
    let span = kernel_grid.len() as i64 - 1;
    let mut out = vec![0.0; (hi - lo + 1).max(0) as usize];
    for (j, gj) in g.iter() {
        let base = j * q as i64;
        let first = (base + 1).max(lo);
        let last = (base + span - 1).min(hi);
        for p in first..=last {
            out[(p - lo) as usize] += gj * kernel_grid[(p - base) as usize];
        }
    }
    out
}

/// `(k_p)^-1 * k`: the interpolating kernel generated by `k`, sampled on
/// `[-halfwidth, halfwidth]` at spacing `1 / q`.
pub fn hat_transform(
    k: &CompactKernel,
    tol: f64,
    halfwidth: usize,
    q: usize,
) -> Result<SampledFunction> {
    if halfwidth < k.support() {
        return Err(Error::InvalidArgument(format!(
            "halfwidth {halfwidth} must be at least {}",
            k.support()
        )));
    }
    let g = k.prefilter_taps(tol)?;
    let h = (halfwidth * q) as i64;
    let values = hat_on_grid(&k.sample_grid(q), &g, q, -h, h);
    SampledFunction::new(q, -h, values)
}

/// Cardinal spline of degree `m`, the hat-transform of `beta^m`.
pub fn cardinal_spline(m: usize, tol: f64, halfwidth: usize, q: usize) -> Result<SampledFunction> {
    hat_transform(&bspline_kernel(m)?, tol, halfwidth, q)
}

/// Free-function form of [`CompactKernel::eval`].
pub fn kernel_eval(k: &CompactKernel, t: f64) -> f64 {
    k.eval(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// beta^m by repeated convolution of the unit box on a fine grid.
    fn box_convolution_oracle(m: usize, t: f64) -> f64 {
        // closed-form recursion: beta^m(t) = (t beta^{m-1}(t) + (m+1-t) beta^{m-1}(t-1)) / m
        fn rec(m: usize, t: f64) -> f64 {
            if m == 0 {
                return if (0.0..1.0).contains(&t) { 1.0 } else { 0.0 };
            }
            (t * rec(m - 1, t) + (m as f64 + 1.0 - t) * rec(m - 1, t - 1.0)) / m as f64
        }
        rec(m, t)
    }

    #[test]
    fn bspline_values() {
        assert!((bspline_eval(3, 2.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(bspline_eval(1, 1.0).unwrap(), 1.0);
        assert_eq!(bspline_eval(3, -0.5).unwrap(), 0.0);
        assert_eq!(bspline_eval(3, 4.0).unwrap(), 0.0);
        for &t in &[0.3, 1.0, 1.7, 2.5, 3.9] {
            assert!((bspline_eval(3, t).unwrap() - box_convolution_oracle(3, t)).abs() < 1e-14);
            assert!((bspline_eval(5, t).unwrap() - box_convolution_oracle(5, t)).abs() < 1e-14);
        }
    }

    #[test]
    fn degree_checks() {
        assert!(matches!(bspline_eval(2, 1.0), Err(Error::InvalidDegree(2))));
        assert!(matches!(bspline_eval(0, 1.0), Err(Error::InvalidDegree(0))));
        assert!(matches!(
            bspline_eval(23, 1.0),
            Err(Error::DegreeTooLarge { .. })
        ));
        assert!(bspline_kernel(21).is_ok());
    }

    #[test]
    fn bspline_kernel_samples() {
        let k3 = bspline_kernel(3).unwrap();
        let s = k3.integer_samples();
        assert_eq!(s.offset(), 1);
        let expect = [1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0];
        for (v, e) in s.values().iter().zip(expect) {
            assert!((v - e).abs() < 1e-16);
        }
        let k1 = bspline_kernel(1).unwrap();
        assert_eq!(k1.integer_samples().values(), &[1.0]);
        assert_eq!(k3.eval(2.0), 2.0 / 3.0);
        assert_eq!(k3.eval(-1.0), 0.0);
    }

    #[test]
    fn poly_matches_direct_formula() {
        for m in [1, 3, 5, 7, 9] {
            let k = bspline_kernel(m).unwrap();
            if let Representation::Poly { segments } = k.representation() {
                assert!(segments.iter().all(|s| s.len() == m + 1));
                assert!(segments.iter().any(|s| s[m] != 0.0));
            }
            for i in 0..200 {
                let t = i as f64 * (m + 1) as f64 / 200.0 + 1e-3;
                assert!(
                    (k.eval(t) - bspline_eval(m, t).unwrap()).abs() < 1e-12,
                    "m={m} t={t}"
                );
            }
        }
    }

    #[test]
    fn sampled_kernel_hits_grid_points_exactly() {
        let k = bspline_kernel(3).unwrap().to_sampled(8).unwrap();
        let Representation::Sampled { segments, .. } = k.representation() else {
            panic!()
        };
        assert_eq!(k.eval(1.25), segments[1][2]);
        assert_eq!(k.eval(2.0), 2.0 / 3.0);
    }

    #[test]
    fn hat_of_linear_bspline_is_centered_hat() {
        let c1 = cardinal_spline(1, 1e-12, 4, 8).unwrap();
        for (k, v) in c1.values().iter().enumerate() {
            let t = c1.t(k);
            assert!((v - (1.0 - t.abs()).max(0.0)).abs() < 1e-15, "t={t}");
        }
    }

    #[test]
    fn cardinal_cubic_interpolates() {
        let tol = 1e-12;
        let c3 = cardinal_spline(3, tol, 16, 64).unwrap();
        for n in -16..=16 {
            let expect = if n == 0 { 1.0 } else { 0.0 };
            assert!((c3.at_integer(n) - expect).abs() <= 10.0 * tol, "n={n}");
        }
    }

    #[test]
    fn hat_rejects_narrow_window() {
        let k = bspline_kernel(3).unwrap();
        assert!(hat_transform(&k, 1e-10, 3, 8).is_err());
    }

    #[test]
    fn json_round_trip_both_representations() {
        let k = bspline_kernel(3).unwrap();
        assert_eq!(
            CompactKernel::from_json(&k.to_json(None).unwrap()).unwrap(),
            k
        );
        let s = k.to_sampled(4).unwrap();
        let text = s.to_json(Some(serde_json::json!({"note": "x"}))).unwrap();
        assert!(text.contains("\"Q\": 4"));
        assert_eq!(CompactKernel::from_json(&text).unwrap(), s);
    }

    #[test]
    fn constructor_checks_knot_values() {
        let segs = vec![vec![0.0, 1.0], vec![1.0, -1.0]];
        assert!(
            CompactKernel::from_poly(1, segs.clone(), DiscreteSequence::new(1, vec![1.0])).is_ok()
        );
        assert!(
            CompactKernel::from_poly(1, segs.clone(), DiscreteSequence::new(1, vec![0.5])).is_err()
        );
        assert!(CompactKernel::from_poly(1, segs, DiscreteSequence::new(0, vec![1.0])).is_err());
    }
}

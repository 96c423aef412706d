//! Spline interpolation of sequences and separable image resampling.
//!
//! Kernels live on `(0, m + 1)`, so the coefficient sequence of a signal is
//! shifted left of the data: for a B-spline of degree 3 the coefficient of
//! sample `n` sits at index `n - 2`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::ImageBuffer;
use crate::kernels::{bspline_kernel, hat_on_grid, CompactKernel};
use crate::sampled::SampledFunction;
use crate::seqalg::{convolve, DiscreteSequence};
use crate::special::sinc;

/// Taps per side of the anti-aliasing lowpass.
pub const ANTIALIAS_HALFWIDTH: usize = 32;

/// Coefficients `c = (k_d)^-1 * x_d` such that `sum_n c[n] k(t - n)`
/// interpolates `x_d`.
pub fn prefilter(
    x_d: &DiscreteSequence<f64>,
    k: &CompactKernel,
    tol: f64,
) -> Result<DiscreteSequence<f64>> {
    let g = k.prefilter_taps(tol)?;
    Ok(convolve(&g, x_d))
}

/// The spline through `x_d`, sampled at spacing `1 / q` over the full
/// support of the expansion.
pub fn interpolate_1d(
    x_d: &DiscreteSequence<f64>,
    k: &CompactKernel,
    q: usize,
    tol: f64,
) -> Result<SampledFunction> {
    if q < 2 {
        return Err(Error::InvalidArgument(format!("Q must be >= 2, got {q}")));
    }
    let c = prefilter(x_d, k, tol)?;
    if c.is_empty() {
        return SampledFunction::new(q, 0, Vec::new());
    }
    let qi = q as i64;
    let lo = c.offset() * qi;
    let hi = (c.end() - 1 + k.support() as i64) * qi;
    SampledFunction::new(q, lo, hat_on_grid(&k.sample_grid(q), &c, q, lo, hi))
}

/// Index into a line of length `n` under whole-sample symmetric extension
/// (period `2n - 2`, edge samples not repeated).
pub fn mirror_index(i: i64, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * n as i64 - 2;
    let r = i.rem_euclid(period);
    if r < n as i64 {
        r as usize
    } else {
        (period - r) as usize
    }
}

/// Polyphase upsampler for one kernel and zoom factor.
struct LineEnlarger {
    taps: DiscreteSequence<f64>,
    /// `phases[r][l] = k(l + r / factor)`, `l = 0..=m`.
    phases: Vec<Vec<f64>>,
    factor: usize,
    support: usize,
}

impl LineEnlarger {
    fn new(k: &CompactKernel, factor: usize, tol: f64) -> Result<Self> {
        let taps = k.prefilter_taps(tol)?;
        let phases = (0..factor)
            .map(|r| {
                (0..k.support())
                    .map(|l| k.eval(l as f64 + r as f64 / factor as f64))
                    .collect()
            })
            .collect();
        Ok(Self {
            taps,
            phases,
            factor,
            support: k.support(),
        })
    }

    /// Output sample `j` sits at source position `j / factor`.
    fn apply(&self, line: &[f64]) -> Vec<f64> {
        let n = line.len();
        let m1 = self.support as i64;
        // coefficients on -(m+1)..=n of the mirrored signal
        let coeffs: Vec<f64> = (-m1..=n as i64)
            .map(|p| {
                self.taps
                    .iter()
                    .map(|(j, gj)| gj * line[mirror_index(p - j, n)])
                    .sum()
            })
            .collect();
        let coeff = |p: i64| coeffs[(p + m1) as usize];
        let mut out = Vec::with_capacity(n * self.factor);
        for p in 0..n as i64 {
            for weights in &self.phases {
                out.push(
                    weights
                        .iter()
                        .enumerate()
                        .map(|(l, w)| w * coeff(p - l as i64))
                        .sum(),
                );
            }
        }
        out
    }
}

/// Which axis is resampled first.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PassOrder {
    #[default]
    RowsFirst,
    ColumnsFirst,
}

fn map_rows(img: &ImageBuffer, f: impl Fn(&[f64]) -> Vec<f64> + Sync) -> Result<ImageBuffer> {
    let rows: Vec<Vec<f64>> = (0..img.height())
        .into_par_iter()
        .map(|y| f(img.row(y)))
        .collect();
    ImageBuffer::from_rows(rows)
}

fn map_columns(img: &ImageBuffer, f: impl Fn(&[f64]) -> Vec<f64> + Sync) -> Result<ImageBuffer> {
    let cols: Vec<Vec<f64>> = (0..img.width())
        .into_par_iter()
        .map(|x| f(&img.column(x)))
        .collect();
    ImageBuffer::from_columns(cols)
}

/// Enlarges by `factor` along both axes with symmetric boundary extension.
pub fn enlarge_image(
    img: &ImageBuffer,
    k: &CompactKernel,
    factor: usize,
    tol: f64,
) -> Result<ImageBuffer> {
    enlarge_image_ordered(img, k, factor, tol, PassOrder::RowsFirst)
}

pub fn enlarge_image_ordered(
    img: &ImageBuffer,
    k: &CompactKernel,
    factor: usize,
    tol: f64,
    order: PassOrder,
) -> Result<ImageBuffer> {
    if factor < 2 {
        return Err(Error::InvalidArgument(format!(
            "zoom factor must be >= 2, got {factor}"
        )));
    }
    if img.width() < k.support() || img.height() < k.support() {
        return Err(Error::ImageTooSmall(format!(
            "{}x{} image, degree {} kernel needs at least {} pixels per side",
            img.width(),
            img.height(),
            k.degree(),
            k.support()
        )));
    }
    let up = LineEnlarger::new(k, factor, tol)?;
    let line = |l: &[f64]| up.apply(l);
    match order {
        PassOrder::RowsFirst => map_columns(&map_rows(img, line)?, line),
        PassOrder::ColumnsFirst => map_rows(&map_columns(img, line)?, line),
    }
}

/// Truncated ideal lowpass `2 fc sinc(2 fc n)`, `|n| <= halfwidth`,
/// scaled to unit DC gain.
pub fn lowpass_taps(cutoff: f64, halfwidth: usize) -> DiscreteSequence<f64> {
    let h = halfwidth as i64;
    let raw: Vec<f64> = (-h..=h)
        .map(|n| 2.0 * cutoff * sinc(2.0 * cutoff * n as f64))
        .collect();
    let dc: f64 = raw.iter().sum();
    DiscreteSequence::new(-h, raw.into_iter().map(|v| v / dc).collect())
}

fn filter_line(taps: &DiscreteSequence<f64>, line: &[f64]) -> Vec<f64> {
    let n = line.len();
    (0..n as i64)
        .map(|p| {
            taps.iter()
                .map(|(j, hj)| hj * line[mirror_index(p - j, n)])
                .sum()
        })
        .collect()
}

/// Separable lowpass at `cutoff` cycles per pixel, same size as the input.
pub fn antialias(img: &ImageBuffer, cutoff: f64) -> Result<ImageBuffer> {
    if !(cutoff > 0.0 && cutoff <= 0.5) {
        return Err(Error::InvalidArgument(format!(
            "cutoff {cutoff} outside (0, 0.5]"
        )));
    }
    let taps = lowpass_taps(cutoff, ANTIALIAS_HALFWIDTH);
    let line = |l: &[f64]| filter_line(&taps, l);
    map_columns(&map_rows(img, line)?, line)
}

/// Keeps every `factor`-th pixel starting at the top-left one.
pub fn decimate(img: &ImageBuffer, factor: usize) -> Result<ImageBuffer> {
    check_downsample(img, factor)?;
    let (w, h) = (img.width() / factor, img.height() / factor);
    Ok(ImageBuffer::from_fn(w, h, |x, y| {
        img.get(x * factor, y * factor)
    }))
}

fn check_downsample(img: &ImageBuffer, factor: usize) -> Result<()> {
    if factor < 1 {
        return Err(Error::InvalidArgument("factor must be positive".into()));
    }
    if img.width() < 2 * factor || img.height() < 2 * factor {
        return Err(Error::ImageTooSmall(format!(
            "{}x{} image cannot be reduced by {factor}",
            img.width(),
            img.height()
        )));
    }
    if !img.width().is_multiple_of(factor) || !img.height().is_multiple_of(factor) {
        return Err(Error::DimensionMismatch(format!(
            "factor {factor} does not divide {}x{}",
            img.width(),
            img.height()
        )));
    }
    Ok(())
}

/// Lowpass at `cutoff` (skipped when `bypass`) followed by decimation.
pub fn antialias_downsample(
    img: &ImageBuffer,
    factor: usize,
    cutoff: f64,
    bypass: bool,
) -> Result<ImageBuffer> {
    check_downsample(img, factor)?;
    if bypass {
        decimate(img, factor)
    } else {
        decimate(&antialias(img, cutoff)?, factor)
    }
}

/// Reference interpolators.
#[derive(Clone, Debug)]
pub struct BaselineKernels {
    pub bilinear: CompactKernel,
    pub bicubic: CompactKernel,
}

/// Ascending coefficients in `s` of `p(a + b s)` for ascending `p`.
fn compose_affine(p: &[f64], a: f64, b: f64) -> Vec<f64> {
    let mut out = vec![0.0; p.len()];
    // Horner with polynomial arithmetic
    for &c in p.iter().rev() {
        let mut next = vec![0.0; p.len()];
        for (i, &o) in out.iter().enumerate() {
            next[i] += a * o;
            if i + 1 < next.len() {
                next[i + 1] += b * o;
            }
        }
        next[0] += c;
        out = next;
    }
    out
}

/// Keys cubic convolution kernel with `a = -0.5`, shifted onto `(0, 4)`.
pub fn keys_bicubic() -> Result<CompactKernel> {
    let a = -0.5;
    let inner = [1.0, 0.0, -(a + 3.0), a + 2.0];
    let outer = [-4.0 * a, 8.0 * a, -5.0 * a, a];
    // |t - 2| on each unit segment, as an affine function of the local s
    let segments = vec![
        compose_affine(&outer, 2.0, -1.0),
        compose_affine(&inner, 1.0, -1.0),
        compose_affine(&inner, 0.0, 1.0),
        compose_affine(&outer, 1.0, 1.0),
    ];
    CompactKernel::from_poly(3, segments, DiscreteSequence::new(1, vec![0.0, 1.0, 0.0]))
}

pub fn baseline_kernels() -> Result<BaselineKernels> {
    Ok(BaselineKernels {
        bilinear: bspline_kernel(1)?,
        bicubic: keys_bicubic()?,
    })
}

/// `max_r sum_n |k_hat(r / factor + n)|`: the largest gain of the
/// interpolator on bounded data at the output phases of a `factor` zoom.
pub fn overshoot_bound(k: &CompactKernel, factor: usize, tol: f64) -> Result<f64> {
    let g = k.prefilter_taps(tol)?;
    let f = factor as i64;
    let lo = g.offset() * f;
    let hi = (g.end() - 1 + k.support() as i64) * f;
    let hat = hat_on_grid(&k.sample_grid(factor), &g, factor, lo, hi);
    let mut sums = vec![0.0; factor];
    for (i, v) in hat.iter().enumerate() {
        sums[(lo + i as i64).rem_euclid(f) as usize] += v.abs();
    }
    Ok(sums.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_prefilter_is_identity() {
        let x = DiscreteSequence::new(3, vec![1.0, -2.0, 0.5]);
        let c = prefilter(&x, &bspline_kernel(1).unwrap(), 1e-12).unwrap();
        // beta^1 on (0, 2) peaks at 1, so coefficients move one step left
        assert_eq!(c, x.shift(-1));
    }

    #[test]
    fn cubic_impulse_coefficient() {
        let c = prefilter(
            &DiscreteSequence::delta(),
            &bspline_kernel(3).unwrap(),
            1e-14,
        )
        .unwrap();
        assert!((c.get(-2) - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn mirror_indices() {
        let idx: Vec<usize> = (-3..8).map(|i| mirror_index(i, 4)).collect();
        assert_eq!(idx, vec![3, 2, 1, 0, 1, 2, 3, 2, 1, 0, 1]);
    }

    #[test]
    fn keys_kernel_values() {
        let k = keys_bicubic().unwrap();
        assert_eq!(k.eval(2.0), 1.0);
        for t in [1.0, 3.0] {
            assert!(k.eval(t).abs() < 1e-15);
        }
        // Keys(0.5) = 0.5625, Keys(1.5) = -0.0625
        assert!((k.eval(2.5) - 0.5625).abs() < 1e-15);
        assert!((k.eval(0.5) + 0.0625).abs() < 1e-15);
    }

    #[test]
    fn lowpass_kills_checkerboard() {
        let board = ImageBuffer::from_fn(64, 64, |x, y| ((x + y) % 2) as f64);
        let out = antialias(&board, 0.25).unwrap();
        let (lo, hi) = out
            .data()
            .iter()
            .fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
        assert!(hi - lo < 0.05, "ripple {}", hi - lo);
    }

    #[test]
    fn bypass_decimates() {
        let img = ImageBuffer::from_fn(8, 6, |x, y| (x + 10 * y) as f64 / 100.0);
        let d = antialias_downsample(&img, 2, 0.25, true).unwrap();
        assert_eq!((d.width(), d.height()), (4, 3));
        assert_eq!(d.get(1, 2), img.get(2, 4));
    }

    #[test]
    fn too_small_images_are_rejected() {
        let img = ImageBuffer::filled(3, 10, 0.5);
        assert!(matches!(
            enlarge_image(&img, &bspline_kernel(3).unwrap(), 2, 1e-10),
            Err(Error::ImageTooSmall(_))
        ));
        assert!(matches!(
            antialias_downsample(&ImageBuffer::filled(3, 3, 0.0), 2, 0.25, false),
            Err(Error::ImageTooSmall(_))
        ));
    }

    #[test]
    fn bilinear_overshoot_is_one() {
        let b = overshoot_bound(&bspline_kernel(1).unwrap(), 2, 1e-12).unwrap();
        assert!((b - 1.0).abs() < 1e-12);
        assert!(overshoot_bound(&bspline_kernel(3).unwrap(), 2, 1e-12).unwrap() > 1.0);
    }
}

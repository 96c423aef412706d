//! Signal-to-noise ratios.

use crate::error::{Error, Result};
use crate::image::ImageBuffer;
use crate::sampled::SampledFunction;
use crate::special::{sinc_energy_outside, sinc_on_grid};

/// Stand-in for `+inf` dB in text and JSON output.
pub const INFINITE_DB_SENTINEL: f64 = 1e9;

/// `10 log10(E_ref / E_err)` from energies; `+inf` for a zero error.
fn db_ratio(reference: f64, error: f64) -> f64 {
    if error == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (reference / error).log10()
    }
}

/// SNR of `estimate` against `reference` on an identical grid.
pub fn snr(reference: &SampledFunction, estimate: &SampledFunction) -> Result<f64> {
    if !reference.same_grid(estimate) {
        return Err(Error::GridMismatch(format!(
            "reference Q={} start={} len={}, estimate Q={} start={} len={}",
            reference.q(),
            reference.start(),
            reference.len(),
            estimate.q(),
            estimate.start(),
            estimate.len()
        )));
    }
    let err: f64 = reference
        .values()
        .iter()
        .zip(estimate.values())
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    let energy: f64 = reference.values().iter().map(|v| v * v).sum();
    Ok(db_ratio(energy, err))
}

/// SNR of `estimate` against `sinc` over the whole line. The estimate is
/// taken as zero outside its window, where `sinc` contributes its analytic
/// energy to both the reference and the error.
pub fn snr_against_sinc(estimate: &SampledFunction) -> f64 {
    let q = estimate.q();
    let dt = 1.0 / q as f64;
    let (lo, hi) = (estimate.start(), estimate.end() - 1);
    let mut err = 0.0;
    let mut energy = 0.0;
    for (k, v) in estimate.values().iter().enumerate() {
        let s = sinc_on_grid(lo + k as i64, q);
        err += (s - v).powi(2);
        energy += s * s;
    }
    let tail = sinc_energy_outside((lo as f64 - 0.5) * dt, (hi as f64 + 0.5) * dt);
    db_ratio(energy * dt + tail, err * dt + tail)
}

/// `10 log10(peak^2 / MSE)`. Intensities are in `[0, 1]`, so `peak` is
/// normally 1.
pub fn psnr(reference: &ImageBuffer, estimate: &ImageBuffer, peak: f64) -> Result<f64> {
    if reference.width() != estimate.width() || reference.height() != estimate.height() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            reference.width(),
            reference.height(),
            estimate.width(),
            estimate.height()
        )));
    }
    let n = reference.data().len();
    if n == 0 {
        return Err(Error::DimensionMismatch("empty image".into()));
    }
    let mse = reference
        .data()
        .iter()
        .zip(estimate.data())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / n as f64;
    Ok(db_ratio(peak * peak, mse))
}

/// PSNR with both images rounded to 8 bits, as they would be stored.
pub fn psnr_quantized(reference: &ImageBuffer, estimate: &ImageBuffer) -> Result<f64> {
    psnr(&reference.quantized(), &estimate.quantized(), 1.0)
}

/// Replaces `+inf` by [`INFINITE_DB_SENTINEL`].
pub fn db_for_output(db: f64) -> f64 {
    if db.is_infinite() && db > 0.0 {
        INFINITE_DB_SENTINEL
    } else {
        db
    }
}

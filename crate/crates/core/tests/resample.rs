use optspline::designer::{design_kernel, DesignProblem, DEFAULT_CUBIC_RHO_D};
use optspline::image::ImageBuffer;
use optspline::kernels::{bspline_kernel, hat_transform, CompactKernel};
use optspline::resample::*;
use optspline::seqalg::{convolve, DiscreteSequence};

const TOL: f64 = 1e-12;

fn opt_sinc() -> CompactKernel {
    design_kernel(
        &DesignProblem::sinc(3, &DiscreteSequence::new(1, DEFAULT_CUBIC_RHO_D.to_vec())).unwrap(),
    )
    .unwrap()
}

fn texture(w: usize, h: usize) -> ImageBuffer {
    ImageBuffer::from_fn(w, h, |x, y| {
        let (x, y) = (x as f64, y as f64);
        0.5 + 0.25 * (0.37 * x + 0.11 * y).sin() + 0.2 * (0.05 * x * y).cos() * (0.9 * y).sin()
    })
}

#[test]
fn prefilter_round_trip() {
    let x = DiscreteSequence::new(-3, vec![0.3, -1.0, 2.5, 0.0, 0.7, 1.1]);
    for k in [
        bspline_kernel(3).unwrap(),
        bspline_kernel(5).unwrap(),
        opt_sinc(),
    ] {
        let c = prefilter(&x, &k, TOL).unwrap();
        let back = convolve(k.integer_samples(), &c);
        assert!(back.max_abs_diff(&x) < 1e-9, "{}", back.max_abs_diff(&x));
    }
}

#[test]
fn impulse_response_is_the_hat() {
    let k = opt_sinc();
    let y = interpolate_1d(&DiscreteSequence::delta(), &k, 64, TOL).unwrap();
    let hat = hat_transform(&k, TOL, 16, 64).unwrap();
    for i in hat.start()..hat.end() {
        assert!((y.at_index(i) - hat.at_index(i)).abs() < 1e-12);
    }
}

#[test]
fn interpolation_hits_the_samples() {
    let x = DiscreteSequence::new(0, (0..30).map(|n| ((n * n) % 7) as f64 - 3.0).collect());
    for k in [
        bspline_kernel(3).unwrap(),
        opt_sinc(),
        keys_bicubic().unwrap(),
    ] {
        let y = interpolate_1d(&x, &k, 8, 1e-10).unwrap();
        for n in 0..30 {
            assert!((y.at_integer(n) - x.get(n)).abs() < 1e-9);
        }
    }
}

#[test]
fn cubic_spline_reproduces_constants() {
    let x = DiscreteSequence::new(0, vec![1.0; 400]);
    let y = interpolate_1d(&x, &bspline_kernel(3).unwrap(), 16, TOL).unwrap();
    let worst = (100 * 16..300 * 16)
        .map(|i| (y.at_index(i) - 1.0).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-9, "{worst}");
}

/// Interior SNR against the continuous sine for interpolation of its
/// integer samples.
fn sine_snr(k: &CompactKernel) -> f64 {
    let f = 0.1;
    let x = DiscreteSequence::new(
        0,
        (0..600)
            .map(|n| (2.0 * std::f64::consts::PI * f * n as f64).sin())
            .collect(),
    );
    let q = 16;
    let y = interpolate_1d(&x, k, q, TOL).unwrap();
    let (mut sig, mut err) = (0.0, 0.0);
    for i in 200 * q as i64..400 * q as i64 {
        let truth = (2.0 * std::f64::consts::PI * f * i as f64 / q as f64).sin();
        sig += truth * truth;
        err += (truth - y.at_index(i)).powi(2);
    }
    10.0 * (sig / err).log10()
}

#[test]
fn sine_interpolation_ranking() {
    let opt = sine_snr(&opt_sinc());
    let cubic = sine_snr(&bspline_kernel(3).unwrap());
    assert!(
        opt > cubic,
        "optimized {opt:.2} dB vs cubic B-spline {cubic:.2} dB"
    );
}

#[test]
fn constant_image_stays_constant() {
    let img = ImageBuffer::filled(12, 9, 0.37);
    for m in [1, 3, 5] {
        let out = enlarge_image(&img, &bspline_kernel(m).unwrap(), 3, TOL).unwrap();
        assert_eq!((out.width(), out.height()), (36, 27));
        assert!(out.data().iter().all(|v| (v - 0.37).abs() < 1e-9), "m={m}");
    }
    let out = antialias(&img, 0.25).unwrap();
    assert!(out.data().iter().all(|v| (v - 0.37).abs() < 1e-12));
}

#[test]
fn linear_images_are_reproduced_in_the_interior() {
    let ramp = ImageBuffer::from_fn(64, 64, |x, y| 0.01 * x as f64 + 0.004 * y as f64);
    let f = 2;
    for (k, margin) in [
        (bspline_kernel(1).unwrap(), 0),
        (bspline_kernel(3).unwrap(), 24),
        (bspline_kernel(5).unwrap(), 24),
    ] {
        let out = enlarge_image(&ramp, &k, f, TOL).unwrap();
        let mut worst = 0.0f64;
        for y in margin * f..(64 - margin - 1) * f {
            for x in margin * f..(64 - margin - 1) * f {
                let want = 0.01 * x as f64 / f as f64 + 0.004 * y as f64 / f as f64;
                worst = worst.max((out.get(x, y) - want).abs());
            }
        }
        assert!(worst < 1e-9, "degree {}: {worst}", k.degree());
    }
}

#[test]
fn bicubic_reproduces_quadratics() {
    let quad = |t: f64| 0.3 + 0.02 * t - 0.001 * t * t;
    let x = DiscreteSequence::new(0, (0..60).map(|n| quad(n as f64)).collect());
    let y = interpolate_1d(&x, &keys_bicubic().unwrap(), 8, TOL).unwrap();
    let worst = (10 * 8..50 * 8)
        .map(|i| (y.at_index(i) - quad(i as f64 / 8.0)).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-9, "{worst}");
}

#[test]
fn pass_order_does_not_matter() {
    let img = texture(40, 33);
    for k in [
        opt_sinc(),
        bspline_kernel(5).unwrap(),
        keys_bicubic().unwrap(),
    ] {
        let a = enlarge_image_ordered(&img, &k, 2, 1e-10, PassOrder::RowsFirst).unwrap();
        let b = enlarge_image_ordered(&img, &k, 2, 1e-10, PassOrder::ColumnsFirst).unwrap();
        let diff = a
            .data()
            .iter()
            .zip(b.data())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-10, "{diff}");
    }
}

/// Enlarges one line by mirroring it far out and interpolating the
/// finite sequence.
fn reference_line(line: &[f64], k: &CompactKernel, factor: usize) -> Vec<f64> {
    let n = line.len() as i64;
    let pad = 400;
    let ext: Vec<f64> = (-pad..n + pad)
        .map(|i| line[mirror_index(i, line.len())])
        .collect();
    let y = interpolate_1d(&DiscreteSequence::new(-pad, ext), k, factor, TOL).unwrap();
    // interpolate_1d puts the sample n at integer time n
    (0..n * factor as i64).map(|j| y.at_index(j)).collect()
}

#[test]
fn enlargement_matches_two_explicit_passes() {
    let img = texture(24, 17);
    let k = opt_sinc();
    let f = 2;
    let rows: Vec<Vec<f64>> = (0..img.height())
        .map(|y| reference_line(img.row(y), &k, f))
        .collect();
    let wide = ImageBuffer::from_rows(rows).unwrap();
    let cols: Vec<Vec<f64>> = (0..wide.width())
        .map(|x| reference_line(&wide.column(x), &k, f))
        .collect();
    let expect = ImageBuffer::from_columns(cols).unwrap();
    let got = enlarge_image(&img, &k, f, TOL).unwrap();
    let diff = got
        .data()
        .iter()
        .zip(expect.data())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(diff < 1e-9, "{diff}");
}

#[test]
fn enlarged_image_keeps_source_pixels() {
    let img = texture(20, 20);
    for k in [
        opt_sinc(),
        bspline_kernel(3).unwrap(),
        keys_bicubic().unwrap(),
        bspline_kernel(1).unwrap(),
    ] {
        let out = enlarge_image(&img, &k, 2, 1e-10).unwrap();
        for y in 0..20 {
            for x in 0..20 {
                assert!((out.get(2 * x, 2 * y) - img.get(x, y)).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn bilinear_ramp_is_exact() {
    let ramp = ImageBuffer::from_fn(16, 8, |x, _| x as f64 / 16.0);
    let out = enlarge_image(&ramp, &baseline_kernels().unwrap().bilinear, 2, TOL).unwrap();
    for y in 0..16 {
        for x in 0..30 {
            assert!((out.get(x, y) - x as f64 / 32.0).abs() < 1e-15);
        }
    }
}

#[test]
fn enlargement_respects_overshoot_bound() {
    let img = antialias(&texture(64, 64), 0.25).unwrap();
    let small = decimate(&img, 2).unwrap();
    let peak = small.data().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    for k in [
        opt_sinc(),
        bspline_kernel(3).unwrap(),
        keys_bicubic().unwrap(),
    ] {
        let bound = overshoot_bound(&k, 2, 1e-10).unwrap();
        let out = enlarge_image(&small, &k, 2, 1e-10).unwrap();
        let max = out.data().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(max <= bound * peak + 1e-9, "{max} > {bound} * {peak}");
    }
}

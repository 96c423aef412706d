//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use optspline::seqalg::DiscreteSequence;
use rustfft::FftPlanner;

/// Two-sided inverse of `a` from `n` samples of `1 / A(e^{jw})`.
/// Taps below `floor` are dropped.
pub fn fft_inverse(a: &DiscreteSequence<f64>, n: usize, floor: f64) -> DiscreteSequence<f64> {
    let mut spec: Vec<Complex64> = (0..n)
        .map(|k| {
            let w = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let z = Complex64::from_polar(1.0, w);
            1.0 / a.z_transform(z)
        })
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut spec);
    // spec[k] now holds n * g[k mod n]
    let half = (n / 2) as i64;
    let values: Vec<f64> = (-half..half)
        .map(|i| spec[i.rem_euclid(n as i64) as usize].re / n as f64)
        .collect();
    DiscreteSequence::new(-half, values).trim(floor)
}

/// Linear convolution via zero-padded FFT.
pub fn fft_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let len = a.len() + b.len() - 1;
    let n = len.next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let pad = |x: &[f64]| {
        let mut v: Vec<Complex64> = x.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        v.resize(n, Complex64::default());
        v
    };
    let (mut fa, mut fb) = (pad(a), pad(b));
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    let mut prod: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    planner.plan_fft_inverse(n).process(&mut prod);
    prod[..len].iter().map(|c| c.re / n as f64).collect()
}

/// Plain Cholesky solve of a symmetric positive definite system.
pub fn cholesky_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= a[j][k] * a[j][k];
        }
        assert!(d > 0.0, "oracle normal matrix is not positive definite");
        let d = d.sqrt();
        a[j][j] = d;
        for i in j + 1..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= a[i][k] * a[j][k];
            }
            a[i][j] = s / d;
        }
    }
    for i in 0..n {
        for k in 0..i {
            b[i] -= a[i][k] * b[k];
        }
        b[i] /= a[i][i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            b[i] -= a[k][i] * b[k];
        }
        b[i] /= a[i][i];
    }
    b
}

/// Kernel samples at `i / q`, `i = 0..=(m + 1) q`, minimizing
/// `sum_t (h(t) - sum_j g[j] k(t - j))^2` over every grid point where the
/// estimate can be nonzero. Values at integers are fixed to `rho_d`; all
/// other samples are unknowns of one joint dense least-squares problem.
pub fn dense_least_squares(
    degree: usize,
    rho_d: &DiscreteSequence<f64>,
    target: impl Fn(i64) -> f64,
    q: usize,
) -> Vec<f64> {
    let g = fft_inverse(rho_d, 1 << 14, 1e-15);
    let qi = q as i64;
    let span = (degree + 1) * q;
    let fixed: Vec<Option<f64>> = (0..=span)
        .map(|i| (i % q == 0).then(|| rho_d.get((i / q) as i64)))
        .collect();
    let unknowns: Vec<usize> = (0..=span).filter(|i| fixed[*i].is_none()).collect();
    let col_of: Vec<Option<usize>> = {
        let mut c = vec![None; span + 1];
        for (k, &i) in unknowns.iter().enumerate() {
            c[i] = Some(k);
        }
        c
    };
    let lo = g.offset() * qi;
    let hi = (g.end() - 1) * qi + span as i64;
    let nrows = (hi - lo + 1) as usize;
    let ncols = unknowns.len();
    let mut a = vec![vec![0.0; ncols]; nrows];
    let mut b = vec![0.0; nrows];
    for (row, t) in (lo..=hi).enumerate() {
        b[row] = target(t);
        for (j, gj) in g.iter() {
            let s = t - j * qi;
            if s < 0 || s > span as i64 {
                continue;
            }
            match (fixed[s as usize], col_of[s as usize]) {
                (Some(v), _) => b[row] -= gj * v,
                (None, Some(c)) => a[row][c] += gj,
                _ => unreachable!(),
            }
        }
    }
    let mut ata = vec![vec![0.0; ncols]; ncols];
    let mut atb = vec![0.0; ncols];
    for (row, rhs) in a.iter().zip(&b) {
        let nz: Vec<(usize, f64)> = row
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, v)| *v != 0.0)
            .collect();
        for &(i, vi) in &nz {
            atb[i] += vi * rhs;
            for &(j, vj) in &nz {
                ata[i][j] += vi * vj;
            }
        }
    }
    let u = cholesky_solve(ata, atb);
    (0..=span)
        .map(|i| fixed[i].unwrap_or_else(|| u[col_of[i].unwrap()]))
        .collect()
}

/// Integer samples of the B-spline of degree `m` on `(0, m + 1)`.
pub fn bspline_samples(m: usize) -> DiscreteSequence<f64> {
    optspline::kernels::bspline_kernel(m)
        .unwrap()
        .integer_samples()
        .clone()
}

pub fn rms_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
}

//! The normalized sinc and the sine integral.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

/// `sin(pi t) / (pi t)`.
pub fn sinc(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        (PI * t).sin() / (PI * t)
    }
}

/// `sinc(i / q)` with the argument of `sin` reduced modulo 2, so nonzero
/// integers give exact zeros.
pub fn sinc_on_grid(i: i64, q: usize) -> f64 {
    let q = q as i64;
    if i == 0 {
        return 1.0;
    }
    if i % q == 0 {
        return 0.0;
    }
    let reduced = i.rem_euclid(2 * q) as f64 / q as f64;
    (PI * reduced).sin() / (PI * i as f64 / q as f64)
}

/// Sine integral `Si(x) = int_0^x sin(u)/u du`.
///
/// Power series below 2, continued fraction for `E1(ix)` above.
pub fn sine_integral(x: f64) -> f64 {
    if x < 0.0 {
        return -sine_integral(-x);
    }
    if x == 0.0 {
        return 0.0;
    }
    if x < 2.0 {
        let mut sum = 0.0;
        let mut term = x; // x^(2k+1) / (2k+1)!
        let mut k = 0usize;
        loop {
            let contrib = term / (2 * k + 1) as f64;
            sum += contrib;
            if contrib.abs() < 1e-17 * sum.abs() {
                break;
            }
            k += 1;
            term *= -x * x / ((2 * k) as f64 * (2 * k + 1) as f64);
        }
        return sum;
    }
    // modified Lentz on the continued fraction of E1(ix)
    let tiny = 1e-300;
    let mut b = Complex64::new(1.0, x);
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 1..10_000 {
        let a = -((i * i) as f64);
        b += 2.0;
        d = (d * a + b).inv();
        c = b + c.inv() * a;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    h *= Complex64::new(x.cos(), -x.sin());
    FRAC_PI_2 + h.im
}

/// `int_h^inf sinc(t)^2 dt` for `h >= 0`.
pub fn sinc_energy_beyond(h: f64) -> f64 {
    if h <= 0.0 {
        return 0.5 + sinc_energy_between(h, 0.0);
    }
    let a = PI * h;
    (a.sin().powi(2) / a + FRAC_PI_2 - sine_integral(2.0 * a)) / PI
}

/// `int_lo^hi sinc(t)^2 dt`.
fn sinc_energy_between(lo: f64, hi: f64) -> f64 {
    if lo >= hi {
        return 0.0;
    }
    // symmetric integrand: split at zero and use the tail formula
    let part = |a: f64| 0.5 - sinc_energy_beyond(a);
    match (lo >= 0.0, hi <= 0.0) {
        (true, _) => part(hi) - part(lo),
        (_, true) => part(-lo) - part(-hi),
        _ => part(-lo) + part(hi),
    }
}

/// Energy of `sinc` outside `[lo, hi]`.
pub fn sinc_energy_outside(lo: f64, hi: f64) -> f64 {
    1.0 - sinc_energy_between(lo, hi)
}

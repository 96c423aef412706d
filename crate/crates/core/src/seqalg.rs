//! Two-sided discrete sequences and their algebra.
//!
//! A [`DiscreteSequence`] stores a finite window of samples starting at an
//! integer `offset`; everything outside the window is zero. The z-transform
//! convention is `A(z) = sum_n a[n] z^-n`, so index `n` maps to `z^-n`.
//!
//! Inversion of a proper sequence factors `A(z)` into first-order terms and
//! inverts each one as a one-sided geometric series: roots inside the unit
//! circle give causal tails, roots outside give anti-causal tails.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Roots closer than this to the unit circle make a sequence improper.
pub const UNIT_CIRCLE_TOL: f64 = 1e-6;

/// Default cap on the half-width of a truncated inverse.
pub const DEFAULT_MAX_HALFWIDTH: usize = 4096;

/// Number of unit-circle points probed when certifying properness.
const CIRCLE_PROBES: usize = 2048;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct DiscreteSequence<T = f64> {
    offset: i64,
    values: Vec<T>,
}

impl<T: Scalar> DiscreteSequence<T> {
    pub fn new(offset: i64, values: Vec<T>) -> Self {
        Self { offset, values }
    }

    pub fn empty() -> Self {
        Self {
            offset: 0,
            values: Vec::new(),
        }
    }

    /// Unit impulse at `n`.
    pub fn impulse(n: i64) -> Self {
        Self::new(n, vec![T::one()])
    }

    pub fn delta() -> Self {
        Self::impulse(0)
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// One past the last stored index.
    pub fn end(&self) -> i64 {
        self.offset + self.values.len() as i64
    }

    /// Value at index `n`, zero outside the stored window.
    pub fn get(&self, n: i64) -> T {
        let i = n - self.offset;
        if i < 0 || i >= self.values.len() as i64 {
            T::zero()
        } else {
            self.values[i as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, T)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.offset + i as i64, v))
    }

    /// Drops leading and trailing samples with modulus `<= tol`.
    /// `tol = 0` removes exact zeros only.
    pub fn trim(&self, tol: f64) -> Self {
        let keep = |v: &T| v.modulus() > tol;
        let Some(first) = self.values.iter().position(keep) else {
            return Self::empty();
        };
        let last = self.values.iter().rposition(keep).unwrap_or(first);
        Self::new(
            self.offset + first as i64,
            self.values[first..=last].to_vec(),
        )
    }

    pub fn shift(&self, by: i64) -> Self {
        Self::new(self.offset + by, self.values.clone())
    }

    pub fn scale(&self, c: T) -> Self {
        Self::new(self.offset, self.values.iter().map(|&v| v * c).collect())
    }

    /// Samples on `lo..=hi`, zero-filled where outside the stored window.
    pub fn restrict(&self, lo: i64, hi: i64) -> Self {
        if hi < lo {
            return Self::empty();
        }
        Self::new(lo, (lo..=hi).map(|n| self.get(n)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_empty() {
            return other.clone();
        }
        if other.is_empty() {
            return self.clone();
        }
        let lo = self.offset.min(other.offset);
        let hi = self.end().max(other.end());
        Self::new(lo, (lo..hi).map(|n| self.get(n) + other.get(n)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-T::one()))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.modulus()).fold(0.0, f64::max)
    }

    /// Sup-norm distance, treating both as zero outside their windows.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.modulus()).sum()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> DiscreteSequence<U> {
        DiscreteSequence::new(self.offset, self.values.iter().map(|&v| f(v)).collect())
    }

    /// `A(z)` evaluated at `z`, with index `n` weighted by `z^-n`.
    pub fn z_transform(&self, z: Complex64) -> Complex64 {
        let zinv = z.inv();
        let mut acc = Complex64::new(0.0, 0.0);
        // Horner in z^-1 over the window, then the offset power.
        for v in self.values.iter().rev() {
            acc = acc * zinv + v.to_complex();
        }
        acc * zinv.powi(self.offset as i32)
    }
}

impl DiscreteSequence<f64> {
    /// Sequence text format: a line `offset k` followed by whitespace
    /// separated values.
    pub fn to_text(&self) -> String {
        let body: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        format!("offset {}\n{}\n", self.offset, body.join(" "))
    }
}

impl FromStr for DiscreteSequence<f64> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut tokens = s.split_whitespace();
        match tokens.next() {
            Some("offset") => {}
            other => {
                return Err(Error::Parse(format!(
                    "expected `offset` header, found {other:?}"
                )))
            }
        }
        let offset = tokens
            .next()
            .ok_or_else(|| Error::Parse("missing offset value".into()))?
            .parse::<i64>()
            .map_err(|e| Error::Parse(format!("bad offset: {e}")))?;
        let values = tokens
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad value `{t}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(offset, values))
    }
}

impl fmt::Display for DiscreteSequence<f64> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Exact linear convolution; the result starts at `a.offset + b.offset`.
pub fn convolve<T: Scalar>(
    a: &DiscreteSequence<T>,
    b: &DiscreteSequence<T>,
) -> DiscreteSequence<T> {
    if a.is_empty() || b.is_empty() {
        return DiscreteSequence::empty();
    }
    let mut out = vec![T::zero(); a.len() + b.len() - 1];
    for (i, &x) in a.values.iter().enumerate() {
        for (j, &y) in b.values.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    DiscreteSequence::new(a.offset + b.offset, out)
}

/// `out[n] = conj(a[-n])`.
pub fn hermitian_reverse<T: Scalar>(a: &DiscreteSequence<T>) -> DiscreteSequence<T> {
    if a.is_empty() {
        return DiscreteSequence::empty();
    }
    let values = a.values.iter().rev().map(|v| v.conjugate()).collect();
    DiscreteSequence::new(-(a.end() - 1), values)
}

/// `hermitian_reverse(a) * a`, i.e. `out[l] = sum_k conj(a[k]) a[k + l]`.
///
/// Only non-negative lags are summed; negative lags are filled by
/// conjugation so the output is Hermitian bit for bit.
pub fn autocorrelation<T: Scalar>(a: &DiscreteSequence<T>) -> DiscreteSequence<T> {
    let n = a.len();
    if n == 0 {
        return DiscreteSequence::empty();
    }
    let positive: Vec<T> = (0..n)
        .map(|lag| {
            a.values[..n - lag]
                .iter()
                .zip(&a.values[lag..])
                .map(|(x, y)| x.conjugate() * *y)
                .sum()
        })
        .collect();
    let mut values: Vec<T> = positive[1..].iter().rev().map(|v| v.conjugate()).collect();
    // lag 0 is real by construction; make it so exactly
    values.push(T::from_real(positive[0].real()));
    values.extend_from_slice(&positive[1..]);
    DiscreteSequence::new(-(n as i64 - 1), values)
}

/// A finitely supported sequence whose z-transform has no zeros on the
/// unit circle, so it has a unique bounded two-sided inverse.
#[derive(Clone, Debug)]
pub struct ProperSequence<T = f64> {
    base: DiscreteSequence<T>,
    tolerance: f64,
    roots: Vec<Complex64>,
}

impl<T: Scalar> ProperSequence<T> {
    /// The certified sequence with exact zeros trimmed from both ends.
    pub fn base(&self) -> &DiscreteSequence<T> {
        &self.base
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Roots of `z^(L-1) * sum_k a[offset + k] z^-k`.
    pub fn roots(&self) -> &[Complex64] {
        &self.roots
    }

    /// Smallest distance between a root modulus and 1.
    pub fn unit_circle_margin(&self) -> f64 {
        self.roots
            .iter()
            .map(|r| (r.norm() - 1.0).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Certifies that `a` is proper: no root of its z-transform within `tol`
/// of the unit circle, cross-checked by probing `|A(z)|` on the circle.
pub fn certify_proper<T: Scalar>(a: &DiscreteSequence<T>, tol: f64) -> Result<ProperSequence<T>> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let base = a.trim(0.0);
    if base.is_empty() {
        return Err(Error::NotProper { distance: 0.0 });
    }
    let coeffs: Vec<Complex64> = base.values.iter().map(|v| v.to_complex()).collect();
    let roots = polynomial_roots(&coeffs)?;
    let distance = roots
        .iter()
        .map(|r| (r.norm() - 1.0).abs())
        .fold(f64::INFINITY, f64::min);
    if distance <= tol {
        return Err(Error::NotProper { distance });
    }

    let scale = base.l1_norm();
    let min_on_circle = (0..CIRCLE_PROBES)
        .map(|k| {
            let w = std::f64::consts::TAU * k as f64 / CIRCLE_PROBES as f64;
            base.z_transform(Complex64::from_polar(1.0, w)).norm()
        })
        .fold(f64::INFINITY, f64::min);
    if min_on_circle <= tol * scale {
        return Err(Error::NotProper {
            distance: distance.min(min_on_circle / scale),
        });
    }

    Ok(ProperSequence {
        base,
        tolerance: tol,
        roots,
    })
}

/// Two-sided inverse `g` of a proper sequence with `|a * g - delta| <= tol`.
///
/// Each first-order factor is inverted as a truncated geometric series,
/// cut where its terms drop below `tol / poles`. The cut is tightened until
/// the round trip meets `tol`.
pub fn invert_fir<T: Scalar>(
    a: &ProperSequence<T>,
    tol: f64,
    max_halfwidth: usize,
) -> Result<DiscreteSequence<T>> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let base = &a.base;
    let lead = base.values[0].to_complex();
    let budget = 2 * max_halfwidth + 1;
    let poles = a.roots.len().max(1) as f64;

    let mut cut = tol / poles;
    let mut last_residual = f64::INFINITY;
    for _ in 0..8 {
        let mut g = DiscreteSequence::<Complex64>::new(-base.offset, vec![lead.inv()]);
        for &r in &a.roots {
            let factor = geometric_inverse(r, cut)?;
            if g.len() + factor.len() - 1 > budget {
                return Err(Error::TruncationBudgetExceeded {
                    needed: g.len() + factor.len() - 1,
                    budget,
                });
            }
            g = convolve(&g, &factor);
        }
        let g: DiscreteSequence<T> = g.map(T::from_complex);
        let residual = convolve(base, &g).max_abs_diff(&DiscreteSequence::delta());
        if residual <= tol {
            return Ok(g);
        }
        last_residual = residual;
        cut /= 10.0;
    }
    Err(Error::NotInvertible(format!(
        "round-trip residual {last_residual:e} stays above {tol:e}"
    )))
}

/// Truncated inverse of `1 - r z^-1`.
fn geometric_inverse(r: Complex64, cut: f64) -> Result<DiscreteSequence<Complex64>> {
    let m = r.norm();
    if m < 1.0 {
        // sum_{n>=0} r^n z^-n
        let len = terms_until(m, cut);
        let mut values = Vec::with_capacity(len);
        let mut p = Complex64::new(1.0, 0.0);
        for _ in 0..len {
            values.push(p);
            p *= r;
        }
        Ok(DiscreteSequence::new(0, values))
    } else if m > 1.0 {
        // -sum_{n>=1} r^-n z^n
        let q = r.inv();
        let len = terms_until(q.norm(), cut).max(1);
        let mut values = vec![Complex64::new(0.0, 0.0); len];
        let mut p = q;
        for k in 1..=len {
            values[len - k] = -p;
            p *= q;
        }
        Ok(DiscreteSequence::new(-(len as i64), values))
    } else {
        Err(Error::NotInvertible(format!(
            "root {r} lies on the unit circle"
        )))
    }
}

/// Number of terms `n` of `m^k` kept before `m^n < cut`.
fn terms_until(m: f64, cut: f64) -> usize {
    if m == 0.0 {
        return 1;
    }
    ((cut.ln() / m.ln()).ceil().max(1.0)) as usize
}

/// Roots of `c[0] z^d + c[1] z^(d-1) + ... + c[d]`, from the eigenvalues of
/// the companion matrix followed by a few Newton steps.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let degree = coeffs.len().saturating_sub(1);
    if degree == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[0];
    if lead.norm() == 0.0 {
        return Err(Error::InvalidArgument("leading coefficient is zero".into()));
    }
    if degree == 1 {
        return Ok(vec![-coeffs[1] / lead]);
    }
    let companion = DMatrix::<Complex64>::from_fn(degree, degree, |i, j| {
        if i == 0 {
            -coeffs[j + 1] / lead
        } else if i == j + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let eig = Schur::new(companion)
        .eigenvalues()
        .ok_or_else(|| Error::NotInvertible("companion eigenvalue iteration failed".into()))?;
    Ok(eig.iter().map(|&r| polish_root(coeffs, r)).collect())
}

fn polish_root(coeffs: &[Complex64], mut r: Complex64) -> Complex64 {
    let eval = |z: Complex64| {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in coeffs {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    };
    let (mut p, _) = eval(r);
    for _ in 0..4 {
        let (_, dp) = eval(r);
        if dp.norm() == 0.0 {
            break;
        }
        let next = r - p / dp;
        let (pn, _) = eval(next);
        if pn.norm() < p.norm() {
            r = next;
            p = pn;
        } else {
            break;
        }
    }
    r
}

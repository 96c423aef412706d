//! Functions sampled on a uniform fine grid.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::seqalg::DiscreteSequence;

/// A real function sampled at `t = (start + k) / q` for `k = 0..len`.
///
/// The origin is stored as an integer grid index, so integer times always
/// fall on grid points.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    q: usize,
    start: i64,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(q: usize, start: i64, values: Vec<f64>) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidArgument(format!(
                "oversampling factor must be >= 2, got {q}"
            )));
        }
        Ok(Self { q, start, values })
    }

    /// Samples `f` on grid indices `lo..=hi`.
    pub fn from_fn(q: usize, lo: i64, hi: i64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (lo..=hi).map(|i| f(i as f64 / q as f64)).collect();
        Self::new(q, lo, values)
    }

    /// Samples `f` on `[-halfwidth, halfwidth]`.
    pub fn symmetric(q: usize, halfwidth: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = (halfwidth * q) as i64;
        Self::from_fn(q, -h, h, f)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Grid index of the first sample.
    pub fn start(&self) -> i64 {
        self.start
    }

    /// One past the last grid index.
    pub fn end(&self) -> i64 {
        self.start + self.values.len() as i64
    }

    pub fn origin(&self) -> f64 {
        self.start as f64 / self.q as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn t(&self, k: usize) -> f64 {
        (self.start + k as i64) as f64 / self.q as f64
    }

    /// Value at absolute grid index `i`, zero outside the window.
    pub fn at_index(&self, i: i64) -> f64 {
        let k = i - self.start;
        if k < 0 || k >= self.values.len() as i64 {
            0.0
        } else {
            self.values[k as usize]
        }
    }

    pub fn at_integer(&self, n: i64) -> f64 {
        self.at_index(n * self.q as i64)
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.q == other.q && self.start == other.start && self.values.len() == other.values.len()
    }

    /// Integer lattice points inside the window, as `(first, last)`.
    pub fn integer_range(&self) -> Option<(i64, i64)> {
        if self.values.is_empty() {
            return None;
        }
        let q = self.q as i64;
        let first = self.start.div_euclid(q) + i64::from(self.start.rem_euclid(q) != 0);
        let last = (self.end() - 1).div_euclid(q);
        (first <= last).then_some((first, last))
    }

    /// The samples at integer times, `x_d[n] = x(n)`.
    pub fn integer_samples(&self) -> DiscreteSequence<f64> {
        match self.integer_range() {
            Some((lo, hi)) => {
                DiscreteSequence::new(lo, (lo..=hi).map(|n| self.at_integer(n)).collect())
            }
            None => DiscreteSequence::empty(),
        }
    }

    /// Rectangle-rule integral of `|x|^2`.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / self.q as f64
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,value")?;
        for (k, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", self.t(k), v)?;
        }
        Ok(())
    }

    /// Reads the `t,value` CSV written by [`write_csv`](Self::write_csv).
    /// The grid spacing is inferred and must be uniform.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut ts = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with('t')) {
                continue;
            }
            let (t, v) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `t,value`", lineno + 1)))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            ts.push(parse(t)?);
            values.push(parse(v)?);
        }
        if ts.len() < 2 {
            return Err(Error::Parse("need at least two samples".into()));
        }
        let q = (1.0 / (ts[1] - ts[0])).round();
        if q.is_nan() || q < 2.0 {
            return Err(Error::GridMisaligned(format!(
                "spacing {} is not 1/Q",
                ts[1] - ts[0]
            )));
        }
        let q = q as usize;
        let start = (ts[0] * q as f64).round() as i64;
        for (k, &t) in ts.iter().enumerate() {
            let expect = (start + k as i64) as f64 / q as f64;
            if (t - expect).abs() > 1e-9 {
                return Err(Error::GridMisaligned(format!(
                    "sample {k} at t={t} is off the 1/{q} grid"
                )));
            }
        }
        Self::new(q, start, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_samples_follow_lattice() {
        let f = SampledFunction::from_fn(4, -5, 9, |t| t).unwrap();
        let xd = f.integer_samples();
        assert_eq!(xd.offset(), -1);
        assert_eq!(xd.values(), &[-1.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn csv_round_trip() {
        let f = SampledFunction::from_fn(8, -8, 8, |t| t * t).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"t,value\n"));
        let back = SampledFunction::read_csv(&buf[..]).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn rejects_coarse_grid() {
        assert!(SampledFunction::new(1, 0, vec![1.0]).is_err());
        let csv = "t,value\n0,1\n0.5,1\n0.8,1\n";
        assert!(matches!(
            SampledFunction::read_csv(csv.as_bytes()),
            Err(Error::GridMisaligned(_))
        ));
    }
}

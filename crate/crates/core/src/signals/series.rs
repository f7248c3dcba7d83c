use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A settled decay tail must fall below this fraction of the peak deviation.
pub const SETTLE_RATIO: f64 = 1e-3;

/// Uniformly sampled signal: sample `j` lives at `t0 + j*dt` and is a vector
/// of dimension `dim`. Values are stored flat, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries<T> {
    t0: T,
    dt: T,
    dim: usize,
    values: Vec<T>,
}

impl<T: Real> TimeSeries<T> {
    pub fn new(t0: T, dt: T, dim: usize, values: Vec<T>) -> Result<Self> {
        if !(dt > T::zero()) {
            return Err(Error::InvalidSeries("sample period must be positive".into()));
        }
        if dim == 0 {
            return Err(Error::InvalidSeries("dimension must be at least 1".into()));
        }
        if values.len() % dim != 0 {
            return Err(Error::InvalidSeries(format!(
                "{} values do not tile dimension {dim}",
                values.len()
            )));
        }
        let n = values.len() / dim;
        if n < 2 {
            return Err(Error::InvalidSeries("need at least 2 samples".into()));
        }
        Ok(TimeSeries { t0, dt, dim, values })
    }

    pub fn scalar(t0: T, dt: T, values: Vec<T>) -> Result<Self> {
        TimeSeries::new(t0, dt, 1, values)
    }

    /// Scalar series sampled from a closure over `n` points.
    pub fn from_fn(t0: T, dt: T, n: usize, f: impl Fn(T) -> T) -> Result<Self> {
        let values = (0..n).map(|j| f(t0 + dt * T::of_usize(j))).collect();
        TimeSeries::scalar(t0, dt, values)
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_scalar(&self) -> bool {
        self.dim == 1
    }

    pub fn t0(&self) -> T {
        self.t0
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn duration(&self) -> T {
        self.dt * T::of_usize(self.len() - 1)
    }

    pub fn time(&self, j: usize) -> T {
        self.t0 + self.dt * T::of_usize(j)
    }

    pub fn sample(&self, j: usize) -> &[T] {
        &self.values[j * self.dim..(j + 1) * self.dim]
    }

    pub fn samples(&self) -> impl Iterator<Item = &[T]> {
        self.values.chunks_exact(self.dim)
    }

    /// Value of sample `j` for a scalar series.
    pub fn value(&self, j: usize) -> T {
        debug_assert_eq!(self.dim, 1);
        self.values[j]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// One channel as a scalar series.
    pub fn channel(&self, c: usize) -> Result<TimeSeries<T>> {
        if c >= self.dim {
            return Err(Error::DimensionMismatch(format!(
                "channel {c} of a dim-{} series",
                self.dim
            )));
        }
        let values = self.values.iter().skip(c).step_by(self.dim).copied().collect();
        TimeSeries::scalar(self.t0, self.dt, values)
    }

    /// Same time axis, values mapped elementwise.
    pub fn map_values(&self, f: impl Fn(T) -> T) -> TimeSeries<T> {
        TimeSeries {
            t0: self.t0,
            dt: self.dt,
            dim: self.dim,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// CSV with header `t,<name_0>,...` and 17-significant-digit values,
    /// enough for an exact f64 round trip.
    pub fn write_csv<W: Write>(&self, names: &[&str], out: &mut W) -> Result<()> {
        if names.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "{} column names for dimension {}",
                names.len(),
                self.dim
            )));
        }
        write!(out, "t")?;
        for name in names {
            write!(out, ",{name}")?;
        }
        writeln!(out)?;
        for j in 0..self.len() {
            write!(out, "{:.16e}", self.time(j))?;
            for v in self.sample(j) {
                write!(out, ",{v:.16e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Parse the CSV format produced by [`TimeSeries::write_csv`]. Returns
    /// the series and the channel names. The time column must be uniform.
    pub fn read_csv<R: Read>(reader: R) -> Result<(TimeSeries<T>, Vec<String>)> {
        let mut lines = BufReader::new(reader).lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidSeries("empty csv".into()))??;
        let mut cols = header.split(',');
        if cols.next() != Some("t") {
            return Err(Error::InvalidSeries("csv must start with a `t` column".into()));
        }
        let names: Vec<String> = cols.map(str::to_owned).collect();
        if names.is_empty() {
            return Err(Error::InvalidSeries("csv has no value columns".into()));
        }
        let dim = names.len();
        let mut times = Vec::new();
        let mut values = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != dim + 1 {
                return Err(Error::InvalidSeries(format!(
                    "row has {} fields, expected {}",
                    fields.len(),
                    dim + 1
                )));
            }
            let parse = |s: &str| -> Result<T> {
                let v: f64 = s
                    .trim()
                    .parse()
                    .map_err(|e| Error::InvalidSeries(format!("bad number `{s}`: {e}")))?;
                Ok(T::lit(v))
            };
            times.push(parse(fields[0])?);
            for f in &fields[1..] {
                values.push(parse(f)?);
            }
        }
        if times.len() < 2 {
            return Err(Error::InvalidSeries("need at least 2 samples".into()));
        }
        let dt = times[1] - times[0];
        let series = TimeSeries::new(times[0], dt, dim, values)?;
        for (j, &t) in times.iter().enumerate() {
            let expected = series.time(j);
            let tol = T::lit(1e-9) * (T::one() + expected.abs());
            if (t - expected).abs() > tol {
                return Err(Error::InvalidSeries(format!("non-uniform time axis at row {j}")));
            }
        }
        Ok((series, names))
    }
}

/// Autonomous decay reference for the slowness metric: either a recorded,
/// settled decay observable (shifted so its limit is zero) or the decay
/// rate of a linear mode.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum DecayReference<T> {
    Series(TimeSeries<T>),
    Linear { lambda: T },
}

impl<T: Real> DecayReference<T> {
    /// A recorded decay observable. Must be scalar and settled: the final
    /// sample magnitude may not exceed [`SETTLE_RATIO`] of the peak.
    pub fn from_series(series: TimeSeries<T>) -> Result<Self> {
        if !series.is_scalar() {
            return Err(Error::DimensionMismatch("decay reference must be scalar".into()));
        }
        let peak = series
            .values()
            .iter()
            .map(|v| v.abs())
            .fold(T::zero(), T::max);
        if peak == T::zero() {
            return Err(Error::NotSettled("decay signal is identically zero".into()));
        }
        let tail = series.value(series.len() - 1).abs();
        if tail > T::lit(SETTLE_RATIO) * peak {
            return Err(Error::NotSettled(format!(
                "terminal magnitude {tail} exceeds {SETTLE_RATIO} of peak {peak}"
            )));
        }
        Ok(DecayReference::Series(series))
    }

    pub fn linear(lambda: T) -> Result<Self> {
        if !(lambda < T::zero()) {
            return Err(Error::InvalidParameter("decay rate must be negative".into()));
        }
        Ok(DecayReference::Linear { lambda })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_malformed_series() {
        assert!(TimeSeries::scalar(0.0, 0.0, vec![1.0, 2.0]).is_err());
        assert!(TimeSeries::scalar(0.0, 0.1, vec![1.0]).is_err());
        assert!(TimeSeries::new(0.0, 0.1, 2, vec![1.0, 2.0, 3.0]).is_err());
        assert!(TimeSeries::new(0.0, 0.1, 0, vec![]).is_err());
    }

    #[test]
    fn timestamps_are_exact_multiples() {
        let ts = TimeSeries::scalar(1.0, 0.25, vec![0.0; 5]).unwrap();
        assert_eq!(ts.time(4), 2.0);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let values = vec![
            1.0 / 3.0,
            -2.7182818284590452e-7,
            5.551115123125783e-17,
            1234.5678901234567,
            -0.1,
            9.999999999999999e15,
        ];
        let ts = TimeSeries::new(0.0, 1e-3, 2, values).unwrap();
        let mut buf = Vec::new();
        ts.write_csv(&["a", "b"], &mut buf).unwrap();
        let (back, names) = TimeSeries::<f64>::read_csv(buf.as_slice()).unwrap();
        assert_eq!(names, vec!["a", "b"]);
        assert_eq!(back, ts);
    }

    #[test]
    fn settled_decay_accepted_unsettled_rejected() {
        let settled = TimeSeries::from_fn(0.0, 0.01, 800, |t: f64| (-t).exp()).unwrap();
        assert!(DecayReference::from_series(settled).is_ok());
        let unsettled = TimeSeries::from_fn(0.0, 0.01, 100, |t: f64| (-t).exp()).unwrap();
        assert!(matches!(
            DecayReference::from_series(unsettled),
            Err(Error::NotSettled(_))
        ));
        assert!(DecayReference::linear(0.5).is_err());
    }
}

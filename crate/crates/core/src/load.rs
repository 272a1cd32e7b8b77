//! Load time series, their combination and the empirical density used for
//! model-order selection.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::numerics::stats::{quantile_sorted, sorted};
use crate::{Error, Result, RowFault};

/// Uniformly sampled power demand in kW. `start` is in seconds since the Unix epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadSeries {
    start: i64,
    step_minutes: u32,
    values_kw: Vec<f64>,
}

impl LoadSeries {
    pub fn new(start: i64, step_minutes: u32, values_kw: Vec<f64>) -> Result<Self> {
        if step_minutes == 0 {
            return Err(Error::InvalidStep { step_minutes });
        }
        for (i, &v) in values_kw.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidRow { row: i + 1, fault: RowFault::NotFinite });
            }
            if v < 0.0 {
                return Err(Error::InvalidRow { row: i + 1, fault: RowFault::Negative });
            }
        }
        Ok(Self { start, step_minutes, values_kw })
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn step_minutes(&self) -> u32 {
        self.step_minutes
    }

    pub fn step_hours(&self) -> f64 {
        f64::from(self.step_minutes) / 60.0
    }

    pub fn values_kw(&self) -> &[f64] {
        &self.values_kw
    }

    pub fn len(&self) -> usize {
        self.values_kw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values_kw.is_empty()
    }

    /// Timestamp (Unix seconds) of sample `i`.
    pub fn timestamp(&self, i: usize) -> i64 {
        self.start + i as i64 * i64::from(self.step_minutes) * 60
    }

    pub fn with_start(mut self, start: i64) -> Self {
        self.start = start;
        self
    }

    /// `Σ kW × step` in kWh.
    pub fn energy_kwh(&self) -> f64 {
        self.step_hours() * self.values_kw.iter().sum::<f64>()
    }

    pub fn peak_kw(&self) -> f64 {
        self.values_kw.iter().copied().fold(0.0, f64::max)
    }

    /// Concatenation of consecutive series sharing one step.
    pub fn concat(parts: &[LoadSeries]) -> Result<LoadSeries> {
        let first = parts.first().ok_or(Error::EmptySeries)?;
        let mut values = Vec::new();
        for p in parts {
            if p.step_minutes != first.step_minutes {
                return Err(Error::Alignment("concatenated series must share a step"));
            }
            values.extend_from_slice(&p.values_kw);
        }
        Ok(LoadSeries { start: first.start, step_minutes: first.step_minutes, values_kw: values })
    }

    pub fn truncated(mut self, len: usize) -> Self {
        self.values_kw.truncate(len);
        self
    }
}

/// Validated measured load with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadDataset {
    pub series: LoadSeries,
    pub source: String,
}

/// Builds a dataset from `(timestamp_s, kW)` rows, rejecting the first bad
/// row with its 1-based row number.
pub fn dataset_from_rows<I>(rows: I, source: impl Into<String>) -> Result<LoadDataset>
where
    I: IntoIterator<Item = (usize, i64, f64)>,
{
    let mut start = None;
    let mut prev = None;
    let mut step = None;
    let mut values = Vec::new();
    for (row, ts, kw) in rows {
        if !kw.is_finite() {
            return Err(Error::InvalidRow { row, fault: RowFault::NotFinite });
        }
        if kw < 0.0 {
            return Err(Error::InvalidRow { row, fault: RowFault::Negative });
        }
        if let Some(p) = prev {
            let delta: i64 = ts - p;
            if delta <= 0 {
                return Err(Error::InvalidRow { row, fault: RowFault::NotIncreasing });
            }
            match step {
                None => {
                    if delta % 60 != 0 {
                        return Err(Error::InvalidRow { row, fault: RowFault::NonUniformStep });
                    }
                    step = Some(delta);
                }
                Some(s) if s != delta => {
                    return Err(Error::InvalidRow { row, fault: RowFault::NonUniformStep });
                }
                _ => {}
            }
        } else {
            start = Some(ts);
        }
        prev = Some(ts);
        values.push(kw);
    }
    let start = start.ok_or(Error::EmptySeries)?;
    // a single row carries no step; treat it as hourly
    let step_minutes = step.map_or(60, |s| s / 60);
    let step_minutes = u32::try_from(step_minutes).map_err(|_| Error::InvalidStep { step_minutes: u32::MAX })?;
    Ok(LoadDataset { series: LoadSeries::new(start, step_minutes, values)?, source: source.into() })
}

/// Pointwise sum of two series on the same grid.
pub fn combine(base: &LoadSeries, ev: &LoadSeries) -> Result<LoadSeries> {
    if base.start != ev.start {
        return Err(Error::Alignment("start times differ"));
    }
    if base.step_minutes != ev.step_minutes {
        return Err(Error::Alignment("steps differ"));
    }
    if base.len() != ev.len() {
        return Err(Error::Alignment("lengths differ"));
    }
    let values = base.values_kw.iter().zip(&ev.values_kw).map(|(a, b)| a + b).collect();
    Ok(LoadSeries { start: base.start, step_minutes: base.step_minutes, values_kw: values })
}

/// Energy-preserving change of step: block means when coarsening, repetition
/// when refining.
pub fn resample(series: &LoadSeries, step_minutes: u32) -> Result<LoadSeries> {
    let from = series.step_minutes;
    let err = Error::IncompatibleStep { from, to: step_minutes };
    if step_minutes == 0 {
        return Err(err);
    }
    let values = if step_minutes == from {
        series.values_kw.clone()
    } else if step_minutes > from {
        if !step_minutes.is_multiple_of(from) {
            return Err(err);
        }
        let k = (step_minutes / from) as usize;
        if !series.len().is_multiple_of(k) {
            return Err(err);
        }
        series.values_kw.chunks(k).map(|c| c.iter().sum::<f64>() / k as f64).collect()
    } else {
        if !from.is_multiple_of(step_minutes) {
            return Err(err);
        }
        let k = (from / step_minutes) as usize;
        series.values_kw.iter().flat_map(|&v| core::iter::repeat_n(v, k)).collect()
    };
    Ok(LoadSeries { start: series.start, step_minutes, values_kw: values })
}

/// Equal-width histogram on `[min, max]` with a normalized density.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub densities: Vec<f64>,
}

impl Histogram {
    pub fn bin_width(&self) -> f64 {
        (self.edges[self.edges.len() - 1] - self.edges[0]) / self.counts.len() as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Per-bin sampling variance of the density estimate, `p_b (1 - p_b) / (n w²)`
    /// with `p_b` the bin's share of the `n` points.
    pub fn sampling_variances(&self) -> Vec<f64> {
        let n = self.total() as f64;
        let w = self.bin_width();
        self.counts.iter().map(|&c| c as f64 / n).map(|p| p * (1.0 - p) / (n * w * w)).collect()
    }
}

pub fn histogram(values: &[f64], bins: usize) -> Result<Histogram> {
    if values.is_empty() {
        return Err(Error::EmptySeries);
    }
    if bins == 0 {
        return Err(Error::InvalidModel("histogram needs at least one bin"));
    }
    let (min, max) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(max > min) {
        return Err(Error::DegenerateHistogram { value: min });
    }
    let width = (max - min) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| if i == bins { max } else { min + i as f64 * width }).collect();
    let mut counts = alloc::vec![0u64; bins];
    for &v in values {
        let i = (((v - min) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let n = values.len() as f64;
    let densities = counts.iter().map(|&c| c as f64 / (n * width)).collect();
    Ok(Histogram { edges, counts, densities })
}

/// Freedman–Diaconis bin count `(max - min) / (2 IQR n^{-1/3})`, falling back
/// to Sturges' rule when the IQR vanishes.
pub fn freedman_diaconis_bins(values: &[f64]) -> usize {
    let n = values.len();
    if n < 2 {
        return 1;
    }
    let s = sorted(values);
    let range = s[n - 1] - s[0];
    let iqr = quantile_sorted(&s, 0.75) - quantile_sorted(&s, 0.25);
    let sturges = ((n as f64).log2().ceil() as usize + 1).max(1);
    if !(iqr > 0.0) || !(range > 0.0) {
        return sturges;
    }
    let width = 2.0 * iqr / (n as f64).cbrt();
    ((range / width).ceil() as usize).clamp(1, 10_000)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn series(values: Vec<f64>, step: u32) -> LoadSeries {
        LoadSeries::new(1_600_000_000, step, values).unwrap()
    }

    #[test]
    fn rows_to_dataset() {
        let rows = (0..96).map(|i| (i + 1, 1_600_000_000 + i as i64 * 900, 50.0 + i as f64));
        let d = dataset_from_rows(rows, "test").unwrap();
        assert_eq!(d.series.len(), 96);
        assert_eq!(d.series.step_minutes(), 15);
        assert_eq!(d.series.timestamp(2), 1_600_000_000 + 1800);
    }

    #[test]
    fn rows_rejected_with_row_number() {
        let rows = vec![(1, 0, 1.0), (2, 900, -3.0), (3, 1800, 1.0)];
        assert_eq!(dataset_from_rows(rows, "t").unwrap_err(), Error::InvalidRow { row: 2, fault: RowFault::Negative });
        let mixed = vec![(1, 0, 1.0), (2, 900, 1.0), (3, 2700, 1.0)];
        assert_eq!(
            dataset_from_rows(mixed, "t").unwrap_err(),
            Error::InvalidRow { row: 3, fault: RowFault::NonUniformStep }
        );
        let nan = vec![(1, 0, f64::NAN)];
        assert!(matches!(dataset_from_rows(nan, "t"), Err(Error::InvalidRow { row: 1, .. })));
        assert_eq!(dataset_from_rows(Vec::new(), "t").unwrap_err(), Error::EmptySeries);
    }

    #[test]
    fn combine_identity_and_commutativity() {
        let a = series(vec![1.0, 2.0, 3.0], 15);
        let b = series(vec![0.5, 0.0, 4.0], 15);
        let zero = series(vec![0.0; 3], 15);
        assert_eq!(combine(&a, &zero).unwrap(), a);
        assert_eq!(combine(&a, &b).unwrap(), combine(&b, &a).unwrap());
        assert!(combine(&a, &series(vec![0.0; 3], 30)).is_err());
        assert!(combine(&a, &series(vec![0.0; 4], 15)).is_err());
        assert!(combine(&a, &zero.clone().with_start(0)).is_err());
    }

    #[test]
    fn resample_examples() {
        let c = series(vec![10.0; 8], 15);
        assert_eq!(resample(&c, 30).unwrap().values_kw(), &[10.0; 4]);
        assert_eq!(resample(&series(vec![0.0, 20.0], 15), 30).unwrap().values_kw(), &[10.0]);
        let x = series(vec![1.0, 5.0, 2.0], 30);
        let fine = resample(&x, 10).unwrap();
        assert_eq!(fine.len(), 9);
        assert!((fine.energy_kwh() - x.energy_kwh()).abs() < 1e-12);
        assert_eq!(resample(&fine, 30).unwrap(), x);
        assert!(resample(&x, 45).is_err());
        assert!(resample(&x, 7).is_err());
        assert!(resample(&series(vec![1.0; 3], 15), 30).is_err());
    }

    #[test]
    fn histogram_normalization() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.7).collect();
        for bins in [1, 7, 50] {
            let h = histogram(&xs, bins).unwrap();
            assert_eq!(h.total(), 1000);
            let mass: f64 = h.densities.iter().map(|d| d * h.bin_width()).sum();
            assert!((mass - 1.0).abs() < 1e-12);
        }
        let one = histogram(&xs, 1).unwrap();
        assert!((one.densities[0] - 1.0 / one.bin_width()).abs() < 1e-15);
        assert!(matches!(histogram(&[3.0; 5], 4), Err(Error::DegenerateHistogram { .. })));
    }

    #[test]
    fn fd_bins_reasonable() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        // IQR 499.5, width 2*499.5/10 = 99.9 -> 10 bins
        assert_eq!(freedman_diaconis_bins(&xs), 10);
        assert_eq!(freedman_diaconis_bins(&[1.0]), 1);
    }
}

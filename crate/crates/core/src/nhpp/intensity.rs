use alloc::{format, vec::Vec};
use core::f64::consts::{FRAC_PI_2, PI, TAU};

#[allow(unused_imports)]
use num_traits::Float;

use crate::numerics::{integrate, ln_gamma_unchecked};
use crate::{Error, Result};

const QUADRATURE_TOL: f64 = 1e-9;

/// Shape of a rate function. Read-only view; build through [`IntensityFunction`].
#[derive(Debug, Clone, PartialEq)]
pub enum IntensityKind {
    Constant {
        rate: f64,
        horizon: f64,
    },
    /// `offset + amplitude * sin(frequency * π * t)`
    Sinusoidal {
        offset: f64,
        amplitude: f64,
        frequency: f64,
        horizon: f64,
    },
    /// `rates[i]` on `[breakpoints[i], breakpoints[i + 1])`; the last segment also owns `T`.
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        rates: Vec<f64>,
    },
    /// Linear interpolation between `(times[i], values[i])` knots.
    Tabulated {
        times: Vec<f64>,
        values: Vec<f64>,
    },
}

/// Validated arrival-rate function `λ(t) >= 0` on a bounded horizon `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityFunction {
    kind: IntensityKind,
}

fn invalid(msg: impl Into<alloc::string::String>) -> Error {
    Error::InvalidIntensity(msg.into())
}

fn check_horizon(horizon: f64) -> Result<()> {
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(invalid(format!("horizon must be finite and >= 0, got {horizon}")));
    }
    Ok(())
}

impl IntensityFunction {
    pub fn constant(rate: f64, horizon: f64) -> Result<Self> {
        check_horizon(horizon)?;
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(invalid(format!("rate must be finite and >= 0, got {rate}")));
        }
        Ok(Self { kind: IntensityKind::Constant { rate, horizon } })
    }

    pub fn sinusoidal(offset: f64, amplitude: f64, frequency: f64, horizon: f64) -> Result<Self> {
        check_horizon(horizon)?;
        if ![offset, amplitude, frequency].iter().all(|v| v.is_finite()) {
            return Err(invalid("sinusoid parameters must be finite"));
        }
        let f = Self { kind: IntensityKind::Sinusoidal { offset, amplitude, frequency, horizon } };
        let (lo, _) = f.sinusoid_range();
        if lo < 0.0 {
            return Err(invalid(format!("sinusoid dips to {lo} < 0 on the horizon")));
        }
        Ok(f)
    }

    pub fn piecewise(breakpoints: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 || rates.len() + 1 != breakpoints.len() {
            return Err(invalid("need n + 1 breakpoints for n >= 1 rates"));
        }
        if breakpoints[0] != 0.0 {
            return Err(invalid("first breakpoint must be 0"));
        }
        if !breakpoints.iter().all(|b| b.is_finite()) || breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("breakpoints must be finite and strictly increasing"));
        }
        if let Some(r) = rates.iter().find(|r| !(**r >= 0.0) || !r.is_finite()) {
            return Err(invalid(format!("rate must be finite and >= 0, got {r}")));
        }
        Ok(Self { kind: IntensityKind::PiecewiseConstant { breakpoints, rates } })
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() < 2 || times.len() != values.len() {
            return Err(invalid("need at least two (time, value) knots of equal length"));
        }
        if times[0] != 0.0 {
            return Err(invalid("first knot must be at t = 0"));
        }
        if !times.iter().all(|t| t.is_finite()) || times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("knot times must be finite and strictly increasing"));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(invalid(format!("tabulated rate must be finite and >= 0, got {v}")));
        }
        Ok(Self { kind: IntensityKind::Tabulated { times, values } })
    }

    pub fn kind(&self) -> &IntensityKind {
        &self.kind
    }

    pub fn horizon(&self) -> f64 {
        match &self.kind {
            IntensityKind::Constant { horizon, .. } | IntensityKind::Sinusoidal { horizon, .. } => *horizon,
            IntensityKind::PiecewiseConstant { breakpoints, .. } => *breakpoints.last().unwrap(),
            IntensityKind::Tabulated { times, .. } => *times.last().unwrap(),
        }
    }

    fn check_time(&self, t: f64) -> Result<()> {
        let horizon = self.horizon();
        if !(t >= 0.0 && t <= horizon) {
            return Err(Error::OutsideHorizon { t, horizon });
        }
        Ok(())
    }

    /// `λ(t)`; errors outside `[0, T]`.
    pub fn rate(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.rate_unchecked(t))
    }

    pub(crate) fn rate_unchecked(&self, t: f64) -> f64 {
        match &self.kind {
            IntensityKind::Constant { rate, .. } => *rate,
            IntensityKind::Sinusoidal { offset, amplitude, frequency, .. } => {
                // clamp rounding below zero when the sinusoid touches zero
                (offset + amplitude * (frequency * PI * t).sin()).max(0.0)
            }
            IntensityKind::PiecewiseConstant { breakpoints, rates } => rates[segment_of(breakpoints, t)],
            IntensityKind::Tabulated { times, values } => {
                let i = segment_of(times, t);
                let w = (t - times[i]) / (times[i + 1] - times[i]);
                values[i] + w * (values[i + 1] - values[i])
            }
        }
    }

    /// Exact `sup λ(t)` over `[0, T]`.
    pub fn sup(&self) -> f64 {
        match &self.kind {
            IntensityKind::Constant { rate, .. } => *rate,
            IntensityKind::Sinusoidal { .. } => self.sinusoid_range().1,
            IntensityKind::PiecewiseConstant { rates, .. } => rates.iter().copied().fold(0.0, f64::max),
            IntensityKind::Tabulated { values, .. } => values.iter().copied().fold(0.0, f64::max),
        }
    }

    fn sinusoid_range(&self) -> (f64, f64) {
        let IntensityKind::Sinusoidal { offset, amplitude, frequency, horizon } = self.kind else {
            unreachable!("sinusoid_range on non-sinusoidal intensity")
        };
        let end = frequency * PI * horizon;
        let (p0, p1) = if end >= 0.0 { (0.0, end) } else { (end, 0.0) };
        let (smin, smax) = sin_range(p0, p1);
        let a = offset + amplitude * smin;
        let b = offset + amplitude * smax;
        (a.min(b), a.max(b))
    }

    /// Mean value function `Λ(t) = ∫₀ᵗ λ(y) dy`.
    ///
    /// Closed form for constant, sinusoidal and piecewise kinds; adaptive
    /// Simpson quadrature (absolute tolerance 1e-9) for tabulated rates.
    pub fn mean_value(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(match &self.kind {
            IntensityKind::Constant { rate, .. } => rate * t,
            IntensityKind::Sinusoidal { offset, amplitude, frequency, .. } => {
                if *frequency == 0.0 {
                    offset * t
                } else {
                    let w = frequency * PI;
                    offset * t + amplitude / w * (1.0 - (w * t).cos())
                }
            }
            IntensityKind::PiecewiseConstant { breakpoints, rates } => {
                let mut acc = 0.0;
                for (i, r) in rates.iter().enumerate() {
                    let (a, b) = (breakpoints[i], breakpoints[i + 1]);
                    if t <= a {
                        break;
                    }
                    acc += r * (t.min(b) - a);
                }
                acc
            }
            IntensityKind::Tabulated { times, .. } => {
                let mut acc = 0.0;
                for w in times.windows(2) {
                    if t <= w[0] {
                        break;
                    }
                    let hi = t.min(w[1]);
                    let n_pieces = (times.len() - 1) as f64;
                    acc += integrate(|y| self.rate_unchecked(y), w[0], hi, QUADRATURE_TOL / n_pieces);
                }
                acc
            }
        })
    }

    /// `P(N(t) = k) = Λ(t)^k e^{-Λ(t)} / k!`, evaluated in log space.
    pub fn count_probability(&self, t: f64, k: u64) -> Result<f64> {
        let big_lambda = self.mean_value(t)?;
        if big_lambda == 0.0 {
            return Ok(if k == 0 { 1.0 } else { 0.0 });
        }
        let kf = k as f64;
        Ok((kf * big_lambda.ln() - big_lambda - ln_gamma_unchecked(kf + 1.0)).exp())
    }

    /// `(t, λ(t))` on `points` evenly spaced times, plus every breakpoint or knot.
    pub fn sample_grid(&self, points: usize) -> Vec<(f64, f64)> {
        let horizon = self.horizon();
        let mut ts: Vec<f64> = (0..points.max(2)).map(|i| horizon * i as f64 / (points.max(2) - 1) as f64).collect();
        match &self.kind {
            IntensityKind::PiecewiseConstant { breakpoints, .. } => ts.extend_from_slice(breakpoints),
            IntensityKind::Tabulated { times, .. } => ts.extend_from_slice(times),
            _ => {}
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts.into_iter().map(|t| (t, self.rate_unchecked(t))).collect()
    }
}

// index i with edges[i] <= t < edges[i + 1], clamped to the last segment
fn segment_of(edges: &[f64], t: f64) -> usize {
    let i = edges.partition_point(|&e| e <= t);
    i.saturating_sub(1).min(edges.len() - 2)
}

// (min, max) of sin over the phase interval [p0, p1]
fn sin_range(p0: f64, p1: f64) -> (f64, f64) {
    let contains = |peak: f64| {
        let k = ((p0 - peak) / TAU).ceil();
        peak + k * TAU <= p1
    };
    let (s0, s1) = (p0.sin(), p1.sin());
    let smax = if contains(FRAC_PI_2) { 1.0 } else { s0.max(s1) };
    let smin = if contains(-FRAC_PI_2) { -1.0 } else { s0.min(s1) };
    (smin, smax)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn paper_sinusoid() -> IntensityFunction {
        IntensityFunction::sinusoidal(20.0, 10.0, 0.5, 10.0).unwrap()
    }

    #[test]
    fn mean_value_examples() {
        let c = IntensityFunction::constant(30.0, 10.0).unwrap();
        assert_eq!(c.mean_value(10.0).unwrap(), 300.0);
        let s = paper_sinusoid();
        assert!((s.mean_value(10.0).unwrap() - (200.0 + 40.0 / PI)).abs() < 1e-10);
        assert!((s.mean_value(10.0).unwrap() - 212.732).abs() < 1e-3);
        let p = IntensityFunction::piecewise(vec![0.0, 6.0, 8.0], vec![4.0, 10.0]).unwrap();
        assert_eq!(p.mean_value(8.0).unwrap(), 44.0);
        assert_eq!(p.mean_value(7.0).unwrap(), 34.0);
    }

    #[test]
    fn sup_is_exact() {
        assert_eq!(paper_sinusoid().sup(), 30.0);
        // phase only reaches π/4: peak not covered
        let s = IntensityFunction::sinusoidal(5.0, 2.0, 0.25, 1.0).unwrap();
        assert!((s.sup() - (5.0 + 2.0 * (PI / 4.0).sin())).abs() < 1e-15);
        // negative amplitude: max at the trough of sin
        let s = IntensityFunction::sinusoidal(5.0, -2.0, 1.0, 2.0).unwrap();
        assert_eq!(s.sup(), 7.0);
        let p = IntensityFunction::piecewise(vec![0.0, 1.0, 2.0], vec![3.0, 8.0]).unwrap();
        assert_eq!(p.sup(), 8.0);
    }

    #[test]
    fn breakpoint_takes_right_segment() {
        let p = IntensityFunction::piecewise(vec![0.0, 6.0, 8.0], vec![4.0, 10.0]).unwrap();
        assert_eq!(p.rate(6.0).unwrap(), 10.0);
        assert_eq!(p.rate(5.999).unwrap(), 4.0);
        assert_eq!(p.rate(8.0).unwrap(), 10.0);
        assert_eq!(p.rate(0.0).unwrap(), 4.0);
    }

    #[test]
    fn validation() {
        assert!(IntensityFunction::sinusoidal(5.0, 10.0, 0.5, 10.0).is_err());
        assert!(IntensityFunction::piecewise(vec![0.0, 1.0, 1.0], vec![1.0, 2.0]).is_err());
        assert!(IntensityFunction::piecewise(vec![0.5, 1.0], vec![1.0]).is_err());
        assert!(IntensityFunction::piecewise(vec![0.0, 1.0], vec![-1.0]).is_err());
        assert!(IntensityFunction::constant(f64::NAN, 1.0).is_err());
        assert!(IntensityFunction::constant(1.0, -1.0).is_err());
        assert!(IntensityFunction::tabulated(vec![0.0], vec![1.0]).is_err());
        let c = IntensityFunction::constant(1.0, 2.0).unwrap();
        assert!(matches!(c.rate(2.5), Err(Error::OutsideHorizon { .. })));
        assert!(c.mean_value(-0.1).is_err());
        assert!(c.count_probability(3.0, 0).is_err());
    }

    #[test]
    fn count_probability_examples() {
        let s = paper_sinusoid();
        assert_eq!(s.count_probability(0.0, 0).unwrap(), 1.0);
        assert_eq!(s.count_probability(0.0, 3).unwrap(), 0.0);
        let one = IntensityFunction::constant(1.0, 5.0).unwrap();
        assert!((one.count_probability(1.0, 1).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        let two = IntensityFunction::constant(2.0, 5.0).unwrap();
        let expected = 6.0f64.powi(4) * (-6.0f64).exp() / 24.0;
        assert!((two.count_probability(3.0, 4).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 0.133_853).abs() < 1e-6);
        // large counts stay finite
        let big = IntensityFunction::constant(1000.0, 10.0).unwrap();
        let p = big.count_probability(10.0, 10_000).unwrap();
        assert!(p > 0.0 && p < 0.01);
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let kinds = [
            IntensityFunction::constant(7.5, 3.0).unwrap(),
            paper_sinusoid(),
            IntensityFunction::sinusoidal(3.0, -1.5, 1.3, 4.0).unwrap(),
            IntensityFunction::piecewise(vec![0.0, 0.5, 2.0, 3.0], vec![1.0, 9.0, 0.0]).unwrap(),
            IntensityFunction::tabulated(vec![0.0, 1.0, 2.5, 3.0], vec![2.0, 5.0, 0.0, 1.0]).unwrap(),
        ];
        for f in &kinds {
            let t_end = f.horizon();
            for i in 0..=20 {
                let t = t_end * i as f64 / 20.0;
                // integrate segment by segment so kinks sit on panel edges
                let mut edges = vec![0.0];
                for (x, _) in f.sample_grid(2) {
                    if x > 0.0 && x < t {
                        edges.push(x);
                    }
                }
                edges.push(t);
                let mut quad = 0.0;
                for w in edges.windows(2) {
                    quad += integrate(|y| f.rate(y).unwrap(), w[0], w[1], 1e-11);
                }
                assert!((f.mean_value(t).unwrap() - quad).abs() < 1e-8, "{:?} t={t}", f.kind());
            }
        }
    }

    #[test]
    fn tabulated_interpolates() {
        let f = IntensityFunction::tabulated(vec![0.0, 2.0], vec![0.0, 4.0]).unwrap();
        assert_eq!(f.rate(1.0).unwrap(), 2.0);
        assert_eq!(f.sup(), 4.0);
        assert!((f.mean_value(2.0).unwrap() - 4.0).abs() < 1e-9);
    }
}

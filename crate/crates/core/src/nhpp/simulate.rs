use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{IntensityFunction, IntensityKind};
use crate::numerics::RngStream;
use crate::{Error, Result};

// relative slack on the dominance check for rates that equal λ⁺ up to rounding
const DOMINANCE_SLACK: f64 = 1e-12;

/// Arrival epochs of one simulated counting process on `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalRecord {
    epochs: Vec<f64>,
    intensity: IntensityFunction,
    seed: u64,
    stream_id: u64,
}

impl ArrivalRecord {
    /// Validates that epochs are strictly increasing and inside the intensity horizon.
    pub fn new(epochs: Vec<f64>, intensity: IntensityFunction, seed: u64, stream_id: u64) -> Result<Self> {
        let horizon = intensity.horizon();
        if let Some(&t) = epochs.iter().find(|&&t| !(t >= 0.0 && t <= horizon)) {
            return Err(Error::OutsideHorizon { t, horizon });
        }
        if epochs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidIntensity("arrival epochs must be strictly increasing".into()));
        }
        Ok(Self { epochs, intensity, seed, stream_id })
    }

    pub fn epochs(&self) -> &[f64] {
        &self.epochs
    }

    pub fn intensity(&self) -> &IntensityFunction {
        &self.intensity
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// `N(T)`.
    pub fn count(&self) -> usize {
        self.epochs.len()
    }

    /// `N(t) = #{k : S_k <= t}`.
    pub fn count_until(&self, t: f64) -> usize {
        self.epochs.partition_point(|&s| s <= t)
    }

    /// Number of epochs in the half-open window `[a, b)`.
    pub fn count_between(&self, a: f64, b: f64) -> usize {
        self.epochs.partition_point(|&s| s < b) - self.epochs.partition_point(|&s| s < a)
    }

    pub fn into_epochs(self) -> Vec<f64> {
        self.epochs
    }
}

/// Homogeneous Poisson process at `rate` on `[0, horizon)` from exponential gaps
/// `-ln(u) / rate`.
pub fn simulate_hpp(rate: f64, horizon: f64, stream: &mut RngStream) -> Result<ArrivalRecord> {
    let intensity = IntensityFunction::constant(rate, horizon)?;
    if !(rate > 0.0) {
        return Err(Error::InvalidIntensity("homogeneous rate must be positive".into()));
    }
    let (seed, stream_id) = (stream.seed(), stream.stream_id());
    let mut epochs = Vec::with_capacity((rate * horizon * 1.2) as usize + 8);
    let mut s = 0.0;
    loop {
        let next = s - stream.uniform().ln() / rate;
        if next >= horizon {
            break;
        }
        // a gap below one ulp of s cannot be represented; the epoch coincides with s
        if next > s || epochs.is_empty() {
            epochs.push(next);
        }
        s = next;
    }
    Ok(ArrivalRecord { epochs, intensity, seed, stream_id })
}

/// Keeps each epoch `S_j` of a constant-rate record with probability
/// `target(S_j) / λ⁺`, one fresh uniform per epoch.
pub fn thin(hpp: &ArrivalRecord, target: &IntensityFunction, stream: &mut RngStream) -> Result<ArrivalRecord> {
    let IntensityKind::Constant { rate: bound, horizon } = *hpp.intensity.kind() else {
        return Err(Error::InvalidIntensity("thinning needs a constant-rate parent process".into()));
    };
    if target.horizon() < horizon {
        return Err(Error::OutsideHorizon { t: horizon, horizon: target.horizon() });
    }
    let mut kept = Vec::with_capacity(hpp.epochs.len());
    for &s in &hpp.epochs {
        let rate = target.rate_unchecked(s);
        if rate > bound * (1.0 + DOMINANCE_SLACK) {
            return Err(Error::Dominance { time: s, rate, bound });
        }
        let w = stream.uniform();
        if w <= rate / bound {
            kept.push(s);
        }
    }
    Ok(ArrivalRecord { epochs: kept, intensity: target.clone(), seed: stream.seed(), stream_id: stream.stream_id() })
}

/// Nonhomogeneous Poisson process by thinning a homogeneous one at `λ⁺ = sup λ`.
///
/// The parent process and the acceptance draws use separate forks of `stream`,
/// and the record carries `stream`'s seed and id as provenance.
pub fn simulate_nhpp(target: &IntensityFunction, stream: &RngStream) -> Result<ArrivalRecord> {
    let bound = target.sup();
    let horizon = target.horizon();
    let mut epochs = Vec::new();
    if bound > 0.0 && horizon > 0.0 {
        let hpp = simulate_hpp(bound, horizon, &mut stream.fork(0))?;
        epochs = thin(&hpp, target, &mut stream.fork(1))?.epochs;
    }
    Ok(ArrivalRecord { epochs, intensity: target.clone(), seed: stream.seed(), stream_id: stream.stream_id() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn hpp_is_deterministic_and_sorted() {
        let a = simulate_hpp(30.0, 10.0, &mut RngStream::new(3, 0)).unwrap();
        let b = simulate_hpp(30.0, 10.0, &mut RngStream::new(3, 0)).unwrap();
        assert_eq!(a, b);
        assert!(a.epochs().windows(2).all(|w| w[0] < w[1]));
        assert!(a.epochs().iter().all(|&t| t > 0.0 && t < 10.0));
        assert_eq!(a.count(), a.epochs().len());
    }

    #[test]
    fn hpp_count_mean_and_variance() {
        let reps = 10_000;
        let counts: Vec<f64> =
            (0..reps).map(|r| simulate_hpp(30.0, 10.0, &mut RngStream::new(11, r)).unwrap().count() as f64).collect();
        let mean = counts.iter().sum::<f64>() / reps as f64;
        let var = counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (reps - 1) as f64;
        assert!((mean - 300.0).abs() < 3.0, "mean {mean}");
        assert!((var - 300.0).abs() < 15.0, "var {var}");
    }

    #[test]
    fn thinning_extremes() {
        let hpp = simulate_hpp(5.0, 4.0, &mut RngStream::new(1, 0)).unwrap();
        let same = IntensityFunction::constant(5.0, 4.0).unwrap();
        let out = thin(&hpp, &same, &mut RngStream::new(1, 1)).unwrap();
        assert_eq!(out.epochs(), hpp.epochs());
        let zero = IntensityFunction::constant(0.0, 4.0).unwrap();
        assert_eq!(thin(&hpp, &zero, &mut RngStream::new(1, 1)).unwrap().count(), 0);
    }

    #[test]
    fn thinning_output_is_subset_in_order() {
        let hpp = simulate_hpp(30.0, 10.0, &mut RngStream::new(2, 0)).unwrap();
        let target = IntensityFunction::sinusoidal(20.0, 10.0, 0.5, 10.0).unwrap();
        let out = thin(&hpp, &target, &mut RngStream::new(2, 1)).unwrap();
        let mut it = hpp.epochs().iter();
        for s in out.epochs() {
            assert!(it.any(|x| x == s));
        }
    }

    #[test]
    fn dominance_violation() {
        let hpp = simulate_hpp(5.0, 4.0, &mut RngStream::new(1, 0)).unwrap();
        let too_high = IntensityFunction::constant(6.0, 4.0).unwrap();
        assert!(matches!(thin(&hpp, &too_high, &mut RngStream::new(1, 1)), Err(Error::Dominance { .. })));
        let not_constant = IntensityFunction::piecewise(vec![0.0, 4.0], vec![5.0]).unwrap();
        let fake = ArrivalRecord::new(vec![1.0], not_constant.clone(), 0, 0).unwrap();
        assert!(thin(&fake, &not_constant, &mut RngStream::new(1, 1)).is_err());
    }

    #[test]
    fn empty_cases() {
        let zero_len = IntensityFunction::constant(10.0, 0.0).unwrap();
        assert_eq!(simulate_nhpp(&zero_len, &RngStream::new(1, 0)).unwrap().count(), 0);
        let zero_rate = IntensityFunction::piecewise(vec![0.0, 5.0], vec![0.0]).unwrap();
        assert_eq!(simulate_nhpp(&zero_rate, &RngStream::new(1, 0)).unwrap().count(), 0);
    }

    #[test]
    fn provenance_and_counting() {
        let target = IntensityFunction::sinusoidal(20.0, 10.0, 0.5, 10.0).unwrap();
        let rec = simulate_nhpp(&target, &RngStream::new(8, 4)).unwrap();
        assert_eq!((rec.seed(), rec.stream_id()), (8, 4));
        assert_eq!(rec.intensity(), &target);
        let mut prev = 0;
        for i in 0..=100 {
            let n = rec.count_until(i as f64 * 0.1);
            assert!(n >= prev);
            prev = n;
        }
        assert_eq!(rec.count_until(10.0), rec.count());
        assert_eq!(rec.count_between(0.0, 5.0) + rec.count_between(5.0, 10.1), rec.count());
    }

    #[test]
    fn record_validation() {
        let f = IntensityFunction::constant(1.0, 2.0).unwrap();
        assert!(ArrivalRecord::new(vec![0.5, 0.5], f.clone(), 0, 0).is_err());
        assert!(ArrivalRecord::new(vec![2.5], f.clone(), 0, 0).is_err());
        assert!(ArrivalRecord::new(vec![0.1, 1.9], f, 0, 0).is_ok());
    }
}

//! EV charging sessions and the aggregate EV demand they induce.
//!
//! Arrival state of charge follows from daily driven miles:
//! `SoC% = (1 - E_cons * d / (100 * C_b)) * 100` with `E_cons` in kWh/100 mi.
//! The energy to reach the target SoC is `(SoC_target - SoC) / (100 η) * C_b`
//! and every EV charges at constant power `P` from the moment it arrives, so
//! the charge duration is `E_req / P`. Charger capacity is unlimited.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::load::LoadSeries;
use crate::nhpp::{simulate_nhpp, ArrivalRecord, IntensityFunction};
use crate::numerics::RngStream;
use crate::{Error, Result};

pub const DAY_HOURS: f64 = 24.0;

/// Homogeneous fleet battery and charger parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatterySpec {
    capacity_kwh: f64,
    charge_rate_kw: f64,
    efficiency: f64,
    consumption_kwh_per_100mi: f64,
    target_soc_percent: f64,
}

impl BatterySpec {
    pub fn new(
        capacity_kwh: f64,
        charge_rate_kw: f64,
        efficiency: f64,
        consumption_kwh_per_100mi: f64,
        target_soc_percent: f64,
    ) -> Result<Self> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(capacity_kwh) {
            return Err(Error::InvalidBattery("capacity must be positive"));
        }
        if !positive(charge_rate_kw) {
            return Err(Error::InvalidBattery("charge rate must be positive"));
        }
        if !(positive(efficiency) && efficiency <= 1.0) {
            return Err(Error::InvalidBattery("efficiency must be in (0, 1]"));
        }
        if !positive(consumption_kwh_per_100mi) {
            return Err(Error::InvalidBattery("consumption must be positive"));
        }
        if !(positive(target_soc_percent) && target_soc_percent <= 100.0) {
            return Err(Error::InvalidBattery("target SoC must be in (0, 100]"));
        }
        Ok(Self { capacity_kwh, charge_rate_kw, efficiency, consumption_kwh_per_100mi, target_soc_percent })
    }

    pub fn capacity_kwh(&self) -> f64 {
        self.capacity_kwh
    }

    pub fn charge_rate_kw(&self) -> f64 {
        self.charge_rate_kw
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    pub fn consumption_kwh_per_100mi(&self) -> f64 {
        self.consumption_kwh_per_100mi
    }

    pub fn target_soc_percent(&self) -> f64 {
        self.target_soc_percent
    }

    /// Miles that drain a full battery to 0%.
    pub fn range_miles(&self) -> f64 {
        100.0 * self.capacity_kwh / self.consumption_kwh_per_100mi
    }
}

impl Default for BatterySpec {
    /// 75 kWh pack, 11.5 kW three-phase L-2 charging at 95% efficiency,
    /// 27 kWh/100 mi, charged to 100%.
    fn default() -> Self {
        Self {
            capacity_kwh: 75.0,
            charge_rate_kw: 11.5,
            efficiency: 0.95,
            consumption_kwh_per_100mi: 27.0,
            target_soc_percent: 100.0,
        }
    }
}

/// Log-normal daily mileage: `ln d ~ N(log_mean, log_sd²)`, clipped at `cap_miles`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MileageModel {
    log_mean: f64,
    log_sd: f64,
    cap_miles: f64,
}

impl MileageModel {
    /// `log_sd = 0` gives the degenerate distribution at `e^log_mean`.
    pub fn new(log_mean: f64, log_sd: f64, cap_miles: f64) -> Result<Self> {
        if !log_mean.is_finite() {
            return Err(Error::InvalidMileage("log mean must be finite"));
        }
        if !(log_sd >= 0.0) || !log_sd.is_finite() {
            return Err(Error::InvalidMileage("log sd must be finite and >= 0"));
        }
        if !(cap_miles > 0.0) {
            return Err(Error::InvalidMileage("cap must be positive"));
        }
        Ok(Self { log_mean, log_sd, cap_miles })
    }

    /// Cap at the battery's full range so that arrival SoC never goes negative.
    pub fn for_battery(log_mean: f64, log_sd: f64, battery: &BatterySpec) -> Result<Self> {
        Self::new(log_mean, log_sd, battery.range_miles())
    }

    pub fn log_mean(&self) -> f64 {
        self.log_mean
    }

    pub fn log_sd(&self) -> f64 {
        self.log_sd
    }

    pub fn cap_miles(&self) -> f64 {
        self.cap_miles
    }
}

impl Default for MileageModel {
    fn default() -> Self {
        Self::for_battery(3.37, 0.5, &BatterySpec::default()).expect("default mileage model is valid")
    }
}

pub fn sample_daily_miles(model: &MileageModel, stream: &mut RngStream) -> f64 {
    let z = stream.standard_normal();
    (model.log_mean + model.log_sd * z).exp().clamp(f64::MIN_POSITIVE, model.cap_miles)
}

/// Arrival state of charge in percent after driving `miles` on a full battery.
pub fn soc_at_arrival(miles: f64, battery: &BatterySpec) -> Result<f64> {
    if !(miles >= 0.0) || !miles.is_finite() {
        return Err(Error::Domain { function: "soc_at_arrival", value: miles });
    }
    let soc = (1.0 - battery.consumption_kwh_per_100mi * miles / (100.0 * battery.capacity_kwh)) * 100.0;
    if soc < -1e-9 {
        return Err(Error::BeyondRange { miles, range: battery.range_miles() });
    }
    Ok(soc.max(0.0))
}

/// Grid energy (kWh) to bring the pack from `soc_arrival` to the target SoC.
pub fn energy_required(soc_arrival: f64, battery: &BatterySpec) -> Result<f64> {
    if !(soc_arrival >= 0.0) {
        return Err(Error::Domain { function: "energy_required", value: soc_arrival });
    }
    if soc_arrival > battery.target_soc_percent {
        return Err(Error::SocAboveTarget { soc: soc_arrival, target: battery.target_soc_percent });
    }
    Ok((battery.target_soc_percent - soc_arrival) / (battery.efficiency * 100.0) * battery.capacity_kwh)
}

/// Hours of constant-power charging needed to deliver `energy_kwh`.
pub fn charge_duration(energy_kwh: f64, battery: &BatterySpec) -> f64 {
    energy_kwh / battery.charge_rate_kw
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvSession {
    pub arrival_time_h: f64,
    pub daily_miles: f64,
    pub soc_arrival_percent: f64,
    pub energy_required_kwh: f64,
    pub charge_duration_h: f64,
    pub power_kw: f64,
}

impl EvSession {
    pub fn from_miles(arrival_time_h: f64, miles: f64, battery: &BatterySpec) -> Result<Self> {
        let soc = soc_at_arrival(miles, battery)?;
        let energy = energy_required(soc, battery)?;
        Ok(Self {
            arrival_time_h,
            daily_miles: miles,
            soc_arrival_percent: soc,
            energy_required_kwh: energy,
            charge_duration_h: charge_duration(energy, battery),
            power_kw: battery.charge_rate_kw,
        })
    }

    pub fn charge_end_h(&self) -> f64 {
        self.arrival_time_h + self.charge_duration_h
    }
}

/// One session per arrival epoch (hours); session `i` draws its mileage from `stream.fork(i)`.
pub fn build_sessions(
    arrivals: &ArrivalRecord,
    battery: &BatterySpec,
    mileage: &MileageModel,
    stream: &RngStream,
) -> Result<Vec<EvSession>> {
    arrivals
        .epochs()
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            if !(0.0..=DAY_HOURS).contains(&t) {
                return Err(Error::OutsideHorizon { t, horizon: DAY_HOURS });
            }
            let miles = sample_daily_miles(mileage, &mut stream.fork(i as u64));
            EvSession::from_miles(t, miles, battery)
        })
        .collect()
}

/// EV demand over one day plus the energy bookkeeping of horizon truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandProfile {
    pub series: LoadSeries,
    /// Energy delivered inside the day, `step_h * Σ kW`.
    pub delivered_kwh: f64,
    /// Energy of charging windows that run past 24 h.
    pub truncated_kwh: f64,
}

/// Rectangular power pulses `[arrival, arrival + T_ch)` averaged into fixed steps
/// over `[0, 24)` h. Windows running past the horizon are cut at 24 h.
pub fn aggregate_demand(sessions: &[EvSession], step_minutes: u32) -> Result<DemandProfile> {
    if step_minutes == 0 || 1440 % step_minutes != 0 {
        return Err(Error::InvalidStep { step_minutes });
    }
    let step_h = f64::from(step_minutes) / 60.0;
    let bins = (1440 / step_minutes) as usize;
    let mut values = alloc::vec![0.0; bins];
    let mut truncated = 0.0;
    for s in sessions {
        let start = s.arrival_time_h.max(0.0);
        let end = s.charge_end_h();
        if end > DAY_HOURS {
            truncated += s.power_kw * (end - DAY_HOURS.max(start));
        }
        let end = end.min(DAY_HOURS);
        if end <= start {
            continue;
        }
        let first = ((start / step_h) as usize).min(bins - 1);
        for (k, v) in values.iter_mut().enumerate().skip(first) {
            let lo = k as f64 * step_h;
            if lo >= end {
                break;
            }
            let overlap = end.min(lo + step_h) - start.max(lo);
            if overlap > 0.0 {
                *v += s.power_kw * overlap / step_h;
            }
        }
    }
    let delivered = step_h * values.iter().sum::<f64>();
    Ok(DemandProfile {
        series: LoadSeries::new(0, step_minutes, values)?,
        delivered_kwh: delivered,
        truncated_kwh: truncated,
    })
}

/// Arrivals, sessions and demand for one simulated day.
#[derive(Debug, Clone, PartialEq)]
pub struct EvDay {
    pub arrivals: ArrivalRecord,
    pub sessions: Vec<EvSession>,
    pub demand: DemandProfile,
}

/// Simulates one day from an intensity in hours. Arrivals use `stream.fork(0)`,
/// mileage draws `stream.fork(1)`.
pub fn simulate_ev_day(
    intensity_hours: &IntensityFunction,
    battery: &BatterySpec,
    mileage: &MileageModel,
    step_minutes: u32,
    stream: &RngStream,
) -> Result<EvDay> {
    let arrivals = simulate_nhpp(intensity_hours, &stream.fork(0))?;
    let sessions = build_sessions(&arrivals, battery, mileage, &stream.fork(1))?;
    let demand = aggregate_demand(&sessions, step_minutes)?;
    Ok(EvDay { arrivals, sessions, demand })
}

/// Pointwise mean of equally gridded profiles.
pub fn mean_profile(profiles: &[LoadSeries]) -> Result<LoadSeries> {
    let first = profiles.first().ok_or(Error::EmptySeries)?;
    let mut acc = alloc::vec![0.0; first.len()];
    for p in profiles {
        if p.step_minutes() != first.step_minutes() || p.len() != first.len() || p.start() != first.start() {
            return Err(Error::Alignment("profiles must share start, step and length"));
        }
        for (a, v) in acc.iter_mut().zip(p.values_kw()) {
            *a += v;
        }
    }
    let n = profiles.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    LoadSeries::new(first.start(), first.step_minutes(), acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn worked_chain() {
        let b = BatterySpec::default();
        let soc = soc_at_arrival(100.0, &b).unwrap();
        assert!(close(soc, 64.0, 1e-12));
        let e = energy_required(soc, &b).unwrap();
        assert!(close(e, 36.0 / 95.0 * 75.0, 1e-12));
        assert!(close(e, 28.42, 5e-3));
        let t = charge_duration(e, &b);
        assert!(close(t, 36.0 / 95.0 * 75.0 / 11.5, 1e-12));
        let s = EvSession::from_miles(8.0, 100.0, &b).unwrap();
        assert_eq!((s.arrival_time_h, s.daily_miles, s.power_kw), (8.0, 100.0, 11.5));
        assert!(close(s.charge_duration_h, t, 0.0));
    }

    #[test]
    fn soc_limits() {
        let b = BatterySpec::default();
        assert_eq!(soc_at_arrival(0.0, &b).unwrap(), 100.0);
        assert!(close(soc_at_arrival(b.range_miles(), &b).unwrap(), 0.0, 1e-12));
        assert!(matches!(soc_at_arrival(300.0, &b), Err(Error::BeyondRange { .. })));
        assert!(soc_at_arrival(-1.0, &b).is_err());
    }

    #[test]
    fn energy_and_duration_edges() {
        let b = BatterySpec::default();
        assert_eq!(energy_required(100.0, &b).unwrap(), 0.0);
        let unit = BatterySpec::new(75.0, 11.5, 1.0, 27.0, 100.0).unwrap();
        assert!(close(energy_required(0.0, &unit).unwrap(), 75.0, 1e-12));
        assert!(matches!(energy_required(101.0, &b), Err(Error::SocAboveTarget { .. })));
        assert_eq!(charge_duration(0.0, &b), 0.0);
        assert_eq!(charge_duration(11.5, &b), 1.0);
        let s = EvSession::from_miles(1.0, 0.0, &b).unwrap();
        assert_eq!((s.energy_required_kwh, s.charge_duration_h), (0.0, 0.0));
    }

    #[test]
    fn battery_validation() {
        assert!(BatterySpec::new(0.0, 11.5, 0.95, 27.0, 100.0).is_err());
        assert!(BatterySpec::new(75.0, 11.5, 1.2, 27.0, 100.0).is_err());
        assert!(BatterySpec::new(75.0, 11.5, 0.95, 27.0, 120.0).is_err());
        assert!(MileageModel::new(3.0, -0.1, 10.0).is_err());
    }

    #[test]
    fn mileage_median_and_degenerate() {
        let m = MileageModel::default();
        assert!(close(m.cap_miles(), 7500.0 / 27.0, 1e-12));
        let mut s = RngStream::new(17, 0);
        let mut xs: Vec<f64> = (0..100_000).map(|_| sample_daily_miles(&m, &mut s)).collect();
        assert!(xs.iter().all(|&x| x > 0.0 && x <= m.cap_miles()));
        xs.sort_by(f64::total_cmp);
        let median = xs[50_000];
        assert!((median / 3.37f64.exp() - 1.0).abs() < 0.02, "median {median}");
        let d = MileageModel::new(3.37, 0.0, 1000.0).unwrap();
        assert_eq!(sample_daily_miles(&d, &mut s), 3.37f64.exp());
    }

    #[test]
    fn single_pulse_placement() {
        let s = EvSession {
            arrival_time_h: 8.0,
            daily_miles: 0.0,
            soc_arrival_percent: 0.0,
            energy_required_kwh: 23.0,
            charge_duration_h: 2.0,
            power_kw: 11.5,
        };
        let p = aggregate_demand(&[s], 30).unwrap();
        assert_eq!(p.series.len(), 48);
        for (k, v) in p.series.values_kw().iter().enumerate() {
            let expected = if (16..20).contains(&k) { 11.5 } else { 0.0 };
            assert!(close(*v, expected, 1e-12), "bin {k}: {v}");
        }
        let both = aggregate_demand(&[s, s], 30).unwrap();
        assert!(close(both.series.values_kw()[17], 23.0, 1e-12));
        assert!(aggregate_demand(&[], 30).unwrap().series.values_kw().iter().all(|&v| v == 0.0));
        assert!(aggregate_demand(&[], 7).is_err());
    }

    #[test]
    fn partial_overlap_and_truncation() {
        let s = EvSession {
            arrival_time_h: 23.25,
            daily_miles: 0.0,
            soc_arrival_percent: 0.0,
            energy_required_kwh: 11.5,
            charge_duration_h: 1.0,
            power_kw: 11.5,
        };
        let p = aggregate_demand(&[s], 30).unwrap();
        let v = p.series.values_kw();
        assert!(close(v[46], 11.5 * 0.5, 1e-12));
        assert!(close(v[47], 11.5, 1e-12));
        assert!(close(p.truncated_kwh, 11.5 * 0.25, 1e-12));
        assert!(close(p.delivered_kwh + p.truncated_kwh, 11.5, 1e-12));
    }

    #[test]
    fn sessions_from_arrivals() {
        let b = BatterySpec::default();
        let m = MileageModel::default();
        let f = IntensityFunction::constant(5.0, 24.0).unwrap();
        let empty = ArrivalRecord::new(vec![], f.clone(), 0, 0).unwrap();
        assert!(build_sessions(&empty, &b, &m, &RngStream::new(1, 0)).unwrap().is_empty());
        let day = simulate_ev_day(&f, &b, &m, 15, &RngStream::new(1, 0)).unwrap();
        let again = simulate_ev_day(&f, &b, &m, 15, &RngStream::new(1, 0)).unwrap();
        assert_eq!(day, again);
        assert_eq!(day.sessions.len(), day.arrivals.count());
        let outside = ArrivalRecord::new(vec![25.0], IntensityFunction::constant(1.0, 30.0).unwrap(), 0, 0).unwrap();
        assert!(build_sessions(&outside, &b, &m, &RngStream::new(1, 0)).is_err());
    }
}

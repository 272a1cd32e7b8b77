use alloc::vec::Vec;

use super::IntensityFunction;
use crate::numerics::RngStream;

/// One row of the daily EV-connection rate table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RateBand {
    pub start_minute: u32,
    pub end_minute: u32,
    /// Share of vehicles on the road; informational only.
    pub on_road_share: &'static str,
    pub min_per_hour: u32,
    pub max_per_hour: u32,
}

/// Daily EV arrival-rate bands (EVs/hour) by minute of day.
pub const TABLE2_BANDS: [RateBand; 6] = [
    RateBand { start_minute: 0, end_minute: 360, on_road_share: "<= 4%", min_per_hour: 1, max_per_hour: 4 },
    RateBand { start_minute: 360, end_minute: 480, on_road_share: "> 4% and <= 7%", min_per_hour: 5, max_per_hour: 11 },
    RateBand { start_minute: 480, end_minute: 780, on_road_share: "<= 4%", min_per_hour: 1, max_per_hour: 4 },
    RateBand { start_minute: 780, end_minute: 1080, on_road_share: ">= 7%", min_per_hour: 12, max_per_hour: 17 },
    RateBand {
        start_minute: 1080,
        end_minute: 1200,
        on_road_share: "> 4% and <= 7%",
        min_per_hour: 5,
        max_per_hour: 11,
    },
    RateBand { start_minute: 1200, end_minute: 1440, on_road_share: "<= 4%", min_per_hour: 1, max_per_hour: 4 },
];

pub const SEGMENT_MINUTES: u32 = 30;
const DAY_MINUTES: u32 = 1440;

/// Piecewise-constant daily schedule: one hourly rate per 30-minute segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrivalSchedule {
    hourly_rates: Vec<u32>,
}

impl ArrivalSchedule {
    pub fn hourly_rates(&self) -> &[u32] {
        &self.hourly_rates
    }

    pub fn segment_minutes(&self) -> u32 {
        SEGMENT_MINUTES
    }

    /// EVs/hour in force at `minute` (the day end belongs to the last segment).
    pub fn hourly_rate_at(&self, minute: f64) -> u32 {
        let i = (minute / SEGMENT_MINUTES as f64) as usize;
        self.hourly_rates[i.min(self.hourly_rates.len() - 1)]
    }

    fn intensity(&self, unit_per_segment: f64, rate_scale: f64) -> IntensityFunction {
        let n = self.hourly_rates.len();
        let breakpoints = (0..=n).map(|i| i as f64 * unit_per_segment).collect();
        let rates = self.hourly_rates.iter().map(|&r| f64::from(r) * rate_scale).collect();
        IntensityFunction::piecewise(breakpoints, rates).expect("schedule breakpoints are valid")
    }

    /// Time in minutes on `[0, 1440]`, rates in EVs per minute.
    pub fn intensity_minutes(&self) -> IntensityFunction {
        self.intensity(f64::from(SEGMENT_MINUTES), 1.0 / 60.0)
    }

    /// Time in hours on `[0, 24]`, rates in EVs per hour.
    pub fn intensity_hours(&self) -> IntensityFunction {
        self.intensity(f64::from(SEGMENT_MINUTES) / 60.0, 1.0)
    }
}

/// Draws each segment's rate uniformly from its band's integer range.
pub fn build_table2_schedule(stream: &mut RngStream) -> ArrivalSchedule {
    let hourly_rates = (0..DAY_MINUTES / SEGMENT_MINUTES)
        .map(|i| {
            let minute = i * SEGMENT_MINUTES;
            let band = TABLE2_BANDS
                .iter()
                .find(|b| minute >= b.start_minute && minute < b.end_minute)
                .expect("bands cover the day");
            stream.uniform_int(band.min_per_hour, band.max_per_hour)
        })
        .collect();
    ArrivalSchedule { hourly_rates }
}

/// [`build_table2_schedule`] as an intensity in minutes (EVs per minute).
pub fn build_table2_intensity(stream: &mut RngStream) -> IntensityFunction {
    build_table2_schedule(stream).intensity_minutes()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bands_bound_rates() {
        for seed in 0..50 {
            let sched = build_table2_schedule(&mut RngStream::new(seed, 0));
            assert_eq!(sched.hourly_rates().len(), 48);
            assert!((12..=17).contains(&sched.hourly_rate_at(900.0)));
            assert!((1..=4).contains(&sched.hourly_rate_at(100.0)));
            for (i, &r) in sched.hourly_rates().iter().enumerate() {
                let m = i as u32 * 30;
                let band = TABLE2_BANDS.iter().find(|b| m >= b.start_minute && m < b.end_minute).unwrap();
                assert!(r >= band.min_per_hour && r <= band.max_per_hour);
            }
            let f = build_table2_intensity(&mut RngStream::new(seed, 0));
            assert!((f.rate(900.0).unwrap() * 60.0 - f64::from(sched.hourly_rate_at(900.0))).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_schedule() {
        let a = build_table2_schedule(&mut RngStream::new(4, 2));
        let b = build_table2_schedule(&mut RngStream::new(4, 2));
        assert_eq!(a, b);
    }

    #[test]
    fn unit_views_agree() {
        let s = build_table2_schedule(&mut RngStream::new(9, 0));
        let minutes = s.intensity_minutes();
        let hours = s.intensity_hours();
        assert_eq!(minutes.horizon(), 1440.0);
        assert_eq!(hours.horizon(), 24.0);
        let a = minutes.mean_value(1440.0).unwrap();
        let b = hours.mean_value(24.0).unwrap();
        assert!((a - b).abs() < 1e-9);
        let direct: f64 = s.hourly_rates().iter().map(|&r| f64::from(r) * 0.5).sum();
        assert!((b - direct).abs() < 1e-9);
    }
}

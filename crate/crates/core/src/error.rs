use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{function}: argument {value} is outside the domain")]
    Domain { function: &'static str, value: f64 },
    #[error("invalid root bracket: {0}")]
    InvalidBracket(&'static str),
    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("root finder did not converge in {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("invalid intensity: {0}")]
    InvalidIntensity(String),
    #[error("time {t} is outside the horizon [0, {horizon}]")]
    OutsideHorizon { t: f64, horizon: f64 },
    #[error("intensity {rate} at t = {time} exceeds the dominating rate {bound}")]
    Dominance { time: f64, rate: f64, bound: f64 },

    #[error("invalid battery spec: {0}")]
    InvalidBattery(&'static str),
    #[error("invalid mileage model: {0}")]
    InvalidMileage(&'static str),
    #[error("{miles} miles exceeds the battery range of {range} miles")]
    BeyondRange { miles: f64, range: f64 },
    #[error("arrival SoC {soc}% is above the target {target}%")]
    SocAboveTarget { soc: f64, target: f64 },
    #[error("step of {step_minutes} min does not divide the horizon")]
    InvalidStep { step_minutes: u32 },

    #[error("row {row}: {fault}")]
    InvalidRow { row: usize, fault: RowFault },
    #[error("series is empty")]
    EmptySeries,
    #[error("series grids differ: {0}")]
    Alignment(&'static str),
    #[error("cannot resample from {from} min to {to} min")]
    IncompatibleStep { from: u32, to: u32 },
    #[error("histogram range is degenerate (min = max = {value})")]
    DegenerateHistogram { value: f64 },

    #[error("invalid mixture component: {0}")]
    InvalidComponent(&'static str),
    #[error("invalid mixture model: {0}")]
    InvalidModel(&'static str),
    #[error("need at least {components} observations, got {observations}")]
    InsufficientData { observations: usize, components: usize },
    #[error("data has zero spread")]
    ConstantData,
    #[error("component {component} has zero spread under its responsibilities")]
    DegenerateScale { component: usize },
    #[error("component collapse persisted after {restarts} restarts")]
    ComponentCollapse { restarts: usize },
    #[error("every model order failed to fit")]
    AllFitsFailed,
}

/// Why a load row was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowFault {
    NotFinite,
    Negative,
    NonUniformStep,
    NotIncreasing,
}

impl core::fmt::Display for RowFault {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            RowFault::NotFinite => "value is not a finite number",
            RowFault::Negative => "value is negative",
            RowFault::NonUniformStep => "timestamp step differs from the first step",
            RowFault::NotIncreasing => "timestamp does not increase",
        })
    }
}

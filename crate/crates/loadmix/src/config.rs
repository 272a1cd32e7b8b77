//! JSON run configuration shared by every subcommand.
//!
//! Defaults reproduce the reference setup: the banded daily arrival schedule,
//! a 75 kWh / 11.5 kW fleet battery, log-normal mileage `(3.37, 0.5)` and an
//! EM threshold of `1e-7`. Relative paths are resolved against the config file's directory.

use std::path::{Path, PathBuf};

use loadmix_core::ev::{BatterySpec, MileageModel};
use loadmix_core::ggmm::{FitOptions, ShapeBasis};
use loadmix_core::nhpp::{build_table2_schedule, ArrivalSchedule, IntensityFunction};
use loadmix_core::RngStream;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_SEED: u64 = 42;
pub const SEED_ENV: &str = "LOADMIX_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    /// `fit`: add simulated EV demand to the measured load before fitting.
    pub with_ev: bool,
    #[serde(deserialize_with = "intensity_from_json")]
    pub intensity: IntensitySpec,
    pub battery: BatteryConfig,
    pub mileage: MileageConfig,
    pub arrivals: ArrivalsConfig,
    pub ev: EvConfig,
    pub em: EmConfig,
    pub sample: SampleConfig,
    pub io: IoConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: None,
            with_ev: false,
            intensity: IntensitySpec::Table2,
            battery: BatteryConfig::default(),
            mileage: MileageConfig::default(),
            arrivals: ArrivalsConfig::default(),
            ev: EvConfig::default(),
            em: EmConfig::default(),
            sample: SampleConfig::default(),
            io: IoConfig::default(),
        }
    }
}

/// Arrival-rate function. `table2` draws a fresh schedule from the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum IntensitySpec {
    Table2,
    Constant { horizon: f64, params: ConstantParams },
    Sinusoidal { horizon: f64, params: SinusoidParams },
    Piecewise { horizon: f64, params: PiecewiseParams },
    Tabulated { horizon: f64, params: TabulatedParams },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantParams {
    pub rate: f64,
}

/// `offset + amplitude · sin(frequency · π · t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SinusoidParams {
    pub offset: f64,
    pub amplitude: f64,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseParams {
    pub breakpoints: Vec<f64>,
    pub rates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabulatedParams {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

// accepts the bare string "table2" as well as the tagged object
fn intensity_from_json<'de, D: Deserializer<'de>>(d: D) -> Result<IntensitySpec, D::Error> {
    let value = serde_json::Value::deserialize(d)?;
    match value {
        serde_json::Value::String(s) if s == "table2" => Ok(IntensitySpec::Table2),
        serde_json::Value::String(s) => {
            Err(serde::de::Error::custom(format!("unknown intensity `{s}`, expected \"table2\" or an object")))
        }
        other => serde_json::from_value(other).map_err(serde::de::Error::custom),
    }
}

// invalid parameters are a configuration problem, not a numerical one
fn invalid(e: loadmix_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

/// Time unit an intensity is evaluated in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeUnit {
    Minutes,
    Hours,
}

impl IntensitySpec {
    /// Builds the intensity. For `table2` the schedule is drawn from
    /// `stream` and returned alongside.
    pub fn build(
        &self,
        unit: TimeUnit,
        stream: &mut RngStream,
    ) -> CliResult<(IntensityFunction, Option<ArrivalSchedule>)> {
        let explicit = |horizon: f64, f: IntensityFunction| -> CliResult<IntensityFunction> {
            if (f.horizon() - horizon).abs() > 1e-9 * horizon.abs().max(1.0) {
                return Err(CliError::Config(format!(
                    "intensity horizon {horizon} disagrees with its parameters (which end at {})",
                    f.horizon()
                )));
            }
            Ok(f)
        };
        let built = match self {
            IntensitySpec::Table2 => {
                let schedule = build_table2_schedule(stream);
                let f = match unit {
                    TimeUnit::Minutes => schedule.intensity_minutes(),
                    TimeUnit::Hours => schedule.intensity_hours(),
                };
                return Ok((f, Some(schedule)));
            }
            IntensitySpec::Constant { horizon, params } => {
                explicit(*horizon, IntensityFunction::constant(params.rate, *horizon).map_err(invalid)?)?
            }
            IntensitySpec::Sinusoidal { horizon, params } => explicit(
                *horizon,
                IntensityFunction::sinusoidal(params.offset, params.amplitude, params.frequency, *horizon)
                    .map_err(invalid)?,
            )?,
            IntensitySpec::Piecewise { horizon, params } => explicit(
                *horizon,
                IntensityFunction::piecewise(params.breakpoints.clone(), params.rates.clone()).map_err(invalid)?,
            )?,
            IntensitySpec::Tabulated { horizon, params } => explicit(
                *horizon,
                IntensityFunction::tabulated(params.times.clone(), params.values.clone()).map_err(invalid)?,
            )?,
        };
        Ok((built, None))
    }
}

/// Fleet battery and charger parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatteryConfig {
    pub capacity_kwh: f64,
    pub charge_rate_kw: f64,
    pub efficiency: f64,
    pub consumption_kwh_per_100mi: f64,
    pub target_soc_percent: f64,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        let b = BatterySpec::default();
        Self {
            capacity_kwh: b.capacity_kwh(),
            charge_rate_kw: b.charge_rate_kw(),
            efficiency: b.efficiency(),
            consumption_kwh_per_100mi: b.consumption_kwh_per_100mi(),
            target_soc_percent: b.target_soc_percent(),
        }
    }
}

impl BatteryConfig {
    pub fn spec(&self) -> CliResult<BatterySpec> {
        BatterySpec::new(
            self.capacity_kwh,
            self.charge_rate_kw,
            self.efficiency,
            self.consumption_kwh_per_100mi,
            self.target_soc_percent,
        )
        .map_err(invalid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MileageConfig {
    pub log_mean: f64,
    pub log_sd: f64,
    /// Defaults to the battery's full range.
    pub cap_miles: Option<f64>,
}

impl Default for MileageConfig {
    fn default() -> Self {
        Self { log_mean: 3.37, log_sd: 0.5, cap_miles: None }
    }
}

impl MileageConfig {
    pub fn model(&self, battery: &BatterySpec) -> CliResult<MileageModel> {
        let cap = self.cap_miles.unwrap_or_else(|| battery.range_miles());
        MileageModel::new(self.log_mean, self.log_sd, cap).map_err(invalid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrivalsConfig {
    pub replications: u32,
    /// Evenly spaced points of the exported intensity curve.
    pub grid_points: usize,
}

impl Default for ArrivalsConfig {
    fn default() -> Self {
        Self { replications: 1, grid_points: 481 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvConfig {
    pub step_minutes: u32,
    pub replications: u32,
    /// ISO-8601 start of the simulated day when no load file sets the grid.
    pub start: String,
}

impl Default for EvConfig {
    fn default() -> Self {
        Self { step_minutes: 15, replications: 1, start: "2024-01-01T00:00:00Z".into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ShapeBasisConfig {
    Previous,
    #[default]
    Mixed,
    Current,
}

impl From<ShapeBasisConfig> for ShapeBasis {
    fn from(b: ShapeBasisConfig) -> Self {
        match b {
            ShapeBasisConfig::Previous => ShapeBasis::Previous,
            ShapeBasisConfig::Mixed => ShapeBasis::Mixed,
            ShapeBasisConfig::Current => ShapeBasis::Current,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmConfig {
    /// Single order; takes precedence over `m_range` for `fit`.
    pub m: Option<usize>,
    /// Inclusive order range for model selection.
    pub m_range: [usize; 2],
    pub epsilon: f64,
    pub max_iterations: usize,
    pub shape_basis: ShapeBasisConfig,
    pub histogram_bins: Option<usize>,
    pub max_restarts: usize,
}

impl Default for EmConfig {
    fn default() -> Self {
        let f = FitOptions::new(1);
        Self {
            m: None,
            m_range: [1, 6],
            epsilon: f.epsilon,
            max_iterations: f.max_iterations,
            shape_basis: ShapeBasisConfig::default(),
            histogram_bins: None,
            max_restarts: f.max_restarts,
        }
    }
}

impl EmConfig {
    pub fn options(&self, components: usize) -> FitOptions {
        FitOptions {
            components,
            epsilon: self.epsilon,
            max_iterations: self.max_iterations,
            shape_basis: self.shape_basis.into(),
            freeze_shapes: false,
            histogram_bins: self.histogram_bins,
            max_restarts: self.max_restarts,
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.epsilon.is_nan() || self.epsilon <= 0.0 || self.epsilon.is_infinite() {
            return Err(CliError::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        let [a, b] = self.m_range;
        if a == 0 || b < a {
            return Err(CliError::Config(format!("m_range {a}..{b} must satisfy 1 <= A <= B")));
        }
        if self.m == Some(0) {
            return Err(CliError::Config("m must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleConfig {
    pub n: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self { n: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IoConfig {
    pub load_csv: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub out_dir: PathBuf,
}

impl Default for IoConfig {
    fn default() -> Self {
        Self { load_csv: None, model: None, out_dir: PathBuf::from("out") }
    }
}

impl RunConfig {
    /// Reads a config file; relative `io` paths become relative to its directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut config: RunConfig = serde_json::from_str(&text).map_err(|e| CliError::parse(path, e))?;
        let dir = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        config.io.load_csv.as_mut().map(rebase);
        config.io.model.as_mut().map(rebase);
        rebase(&mut config.io.out_dir);
        Ok(config)
    }

    /// `--seed`, then the config's `seed`, then `LOADMIX_SEED`, then 42.
    pub fn resolve_seed(&mut self, flag: Option<u64>, env: Option<&str>) -> CliResult<u64> {
        let seed = match (flag, self.seed, env) {
            (Some(s), _, _) | (None, Some(s), _) => s,
            (None, None, Some(text)) => text
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{SEED_ENV}={text:?} is not an unsigned integer")))?,
            (None, None, None) => DEFAULT_SEED,
        };
        self.seed = Some(seed);
        Ok(seed)
    }
}

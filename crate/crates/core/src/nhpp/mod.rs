//! Homogeneous and nonhomogeneous Poisson arrival processes.
//!
//! A nonhomogeneous process with rate `λ(t)` on `[0, T]` is produced by
//! simulating a homogeneous process at the constant rate `λ⁺ = sup λ(t)` and
//! keeping each epoch `S` independently with probability `λ(S)/λ⁺`.

mod intensity;
mod simulate;
mod table2;

pub use intensity::{IntensityFunction, IntensityKind};
pub use simulate::{simulate_hpp, simulate_nhpp, thin, ArrivalRecord};
pub use table2::{build_table2_intensity, build_table2_schedule, ArrivalSchedule, RateBand, TABLE2_BANDS};

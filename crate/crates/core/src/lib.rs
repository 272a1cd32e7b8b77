//! Simulation and mixture-fitting core for modeling aggregate load with EV charging.
//!
//! EV arrivals are drawn from a nonhomogeneous Poisson process by thinning a
//! dominating homogeneous process ([`nhpp`]), turned into constant-power charging
//! sessions ([`ev`]), added to a base load ([`load`]) and the resulting load
//! distribution is fitted with a generalized Gaussian mixture by EM ([`ggmm`]).
//!
//! The crate is `no_std` and only needs `alloc`. Without `std` in the build,
//! float math resolves to the `libm` implementations behind `num_traits::Float`;
//! when `std` is linked its inherent methods take precedence, hence the
//! `allow(unused_imports)` on those imports.
#![no_std]
// `!(x > 0.0)` is deliberate: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
pub mod ev;
pub mod ggmm;
pub mod load;
pub mod nhpp;
pub mod numerics;

pub use error::{Error, Result, RowFault};
pub use numerics::RngStream;

//! Special functions, root finding, quadrature and the seeded random streams
//! shared by the simulation and fitting modules.

mod quadrature;
mod rng;
mod root;
mod special;
pub mod stats;

pub use quadrature::integrate;
pub use rng::RngStream;
pub use root::{find_root, find_root_from, RootBracket};
pub(crate) use root::{refine, refine_evaluated};
pub use special::{digamma, ln_gamma, regularized_gamma_p, regularized_gamma_q, trigamma};

pub(crate) use special::{digamma_unchecked, ln_gamma_unchecked, trigamma_unchecked};

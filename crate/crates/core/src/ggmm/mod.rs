//! Generalized Gaussian mixture models fitted by expectation–maximization.
//!
//! A component has density
//! `β / (2 s Γ(1/β)) · exp(-(|y - μ| / s)^β)`: `β = 1` is Laplace and `β = 2`
//! is Gaussian with `σ = s / √2`. The M-step updates the weights, then each
//! component's location, scale and shape in turn. Location and shape solve
//! their stationarity conditions with a safeguarded Newton iteration; every
//! update is kept only if it does not lower the expected complete-data
//! log-likelihood, so the observed log-likelihood never decreases.

mod component;
mod fit;
mod kmeans;
mod mixture;
mod mstep;
mod sample;
mod select;

pub use component::GgdComponent;
pub use fit::{em_iteration, fit, FitOptions, FitReport, IterationOutcome, ShapeBasis};
pub use kmeans::kmeans_init;
pub use mixture::{e_step, log_likelihood, GgmmModel, Responsibilities};
pub use mstep::{m_step_location, m_step_scale, m_step_shape, m_step_weights, ShapeUpdate, SHAPE_MAX, SHAPE_MIN};
pub use sample::sample;
pub use select::{
    adequate_mse, choose_order, fit_order, mixture_mse, select_order, selection_histogram, summarize_orders, OrderFit,
    OrderSelection, DEFAULT_PLATEAU_THRESHOLD,
};

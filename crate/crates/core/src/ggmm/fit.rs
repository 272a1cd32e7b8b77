use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::mixture::e_step_with_log_likelihood;
use super::mstep::{scale_from_spread, Column};
use super::select::mixture_mse;
use super::{kmeans_init, m_step_weights, GgdComponent, GgmmModel};
use crate::load::{freedman_diaconis_bins, histogram};
use crate::numerics::{ln_gamma_unchecked, RngStream};
use crate::{Error, Result};

const WEIGHT_FLOOR: f64 = 1e-8;
const SCALE_FLOOR: f64 = 1e-6;

/// Which location and scale the shape update conditions on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShapeBasis {
    /// Location and scale from before this iteration.
    Previous,
    /// Updated location, scale from before this iteration.
    #[default]
    Mixed,
    /// Updated location and scale.
    Current,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub components: usize,
    /// Relative log-likelihood change that ends the iteration.
    pub epsilon: f64,
    pub max_iterations: usize,
    pub shape_basis: ShapeBasis,
    /// Keep every shape at its initial value (`β = 2`).
    pub freeze_shapes: bool,
    /// Bins for the goodness-of-fit histogram; `None` uses Freedman–Diaconis.
    pub histogram_bins: Option<usize>,
    /// Fresh k-means initializations tried after a component collapses.
    pub max_restarts: usize,
}

impl FitOptions {
    pub fn new(components: usize) -> Self {
        Self {
            components,
            epsilon: 1e-7,
            max_iterations: 2000,
            shape_basis: ShapeBasis::default(),
            freeze_shapes: false,
            histogram_bins: None,
            max_restarts: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub model: GgmmModel,
    /// Log-likelihood of the initial model followed by one entry per iteration.
    pub log_likelihood_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub epsilon: f64,
    /// Mean squared error between the fitted density and the data histogram.
    pub mse_vs_histogram: f64,
    pub restarts: usize,
    pub shape_bracket_failures: usize,
    /// Shape proposals discarded because they lowered the objective.
    pub rejected_updates: usize,
}

impl FitReport {
    pub fn log_likelihood(&self) -> f64 {
        *self.log_likelihood_trace.last().expect("trace holds the initial likelihood")
    }
}

/// One EM step.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationOutcome {
    pub model: GgmmModel,
    /// Log-likelihood of the model the step started from.
    pub log_likelihood: f64,
    pub shape_bracket_failures: usize,
    pub rejected_updates: usize,
}

/// E-step followed by the M-step (weights, then per component location,
/// scale and shape).
///
/// Fails with [`Error::ComponentCollapse`] when a weight drops below 1e-8 or
/// a scale below 1e-6 of the data range.
pub fn em_iteration(data: &[f64], model: &GgmmModel, options: &FitOptions) -> Result<IterationOutcome> {
    let (resp, log_likelihood) = e_step_with_log_likelihood(data, model);
    let weights = m_step_weights(&resp);
    if weights.iter().any(|&w| !(w >= WEIGHT_FLOOR)) {
        return Err(Error::ComponentCollapse { restarts: 0 });
    }
    let (lo, hi) = data.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    let floor = SCALE_FLOOR * (hi - lo);

    let mut components = Vec::with_capacity(model.order());
    let mut shape_bracket_failures = 0;
    let mut rejected_updates = 0;
    for (j, old) in model.components().iter().enumerate() {
        let col = Column::new(data, &resp, j);
        let location = col.location(old)?;
        let logs = col.log_distances(location);
        let beta = old.shape();
        let spread = col.power_sum(&logs, beta, 0.0);
        let scale = match scale_from_spread(col.weight(), spread, beta, j) {
            Ok(s) if s >= floor => s,
            _ => return Err(Error::ComponentCollapse { restarts: 0 }),
        };
        let kept = GgdComponent::new(location, scale, beta)?;
        if options.freeze_shapes {
            components.push(kept);
            continue;
        }
        let update = match options.shape_basis {
            ShapeBasis::Previous => col.shape(&col.log_distances(old.location()), old.scale().ln(), beta),
            ShapeBasis::Mixed => col.shape(&logs, old.scale().ln(), beta),
            ShapeBasis::Current => col.shape(&logs, scale.ln(), beta),
        };
        if update.bracket_failed {
            shape_bracket_failures += 1;
            components.push(kept);
            continue;
        }
        // keep the proposal only if it does not lower Q at the final (μ, s);
        // at the kept shape Σ r (|y - μ|/s)^β = W/β because s was fitted to it
        let ln_s = scale.ln();
        let kept_objective = col.weight() * (beta.ln() - ln_gamma_unchecked(1.0 / beta) - 1.0 / beta);
        if col.shape_objective(&logs, ln_s, update.shape) >= kept_objective {
            components.push(GgdComponent::new(location, scale, update.shape)?);
        } else {
            rejected_updates += 1;
            components.push(kept);
        }
    }
    let total: f64 = weights.iter().sum();
    let weights = weights.into_iter().map(|w| w / total).collect();
    Ok(IterationOutcome {
        model: GgmmModel::new(weights, components)?,
        log_likelihood,
        shape_bracket_failures,
        rejected_updates,
    })
}

fn relative_change(current: f64, previous: f64) -> f64 {
    let diff = (current - previous).abs();
    if previous == 0.0 {
        diff
    } else {
        diff / previous.abs()
    }
}

/// Maximum-likelihood mixture fit by EM from a k-means start.
///
/// Stops once `|l_k - l_{k-1}| / |l_{k-1}| ≤ ε` or after `max_iterations`
/// M-steps. A collapsed component triggers a fresh initialization on a new
/// sub-stream of `stream`.
pub fn fit(data: &[f64], options: &FitOptions, stream: &RngStream) -> Result<FitReport> {
    let m = options.components;
    if m == 0 {
        return Err(Error::InvalidModel("need at least one component"));
    }
    if data.len() < m {
        return Err(Error::InsufficientData { observations: data.len(), components: m });
    }
    if let Some(&bad) = data.iter().find(|y| !y.is_finite()) {
        return Err(Error::Domain { function: "fit", value: bad });
    }
    if !(options.epsilon > 0.0) {
        return Err(Error::InvalidModel("epsilon must be positive"));
    }
    for restart in 0..=options.max_restarts {
        let mut init_stream = stream.fork(restart as u64 + 1);
        let initial = kmeans_init(data, m, &mut init_stream)?;
        match run_em(data, initial, options) {
            Ok(mut report) => {
                report.restarts = restart;
                let bins = options.histogram_bins.unwrap_or_else(|| freedman_diaconis_bins(data));
                report.mse_vs_histogram = mixture_mse(&report.model, &histogram(data, bins)?);
                return Ok(report);
            }
            Err(Error::ComponentCollapse { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::ComponentCollapse { restarts: options.max_restarts })
}

fn run_em(data: &[f64], mut model: GgmmModel, options: &FitOptions) -> Result<FitReport> {
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut shape_bracket_failures = 0;
    let mut rejected_updates = 0;
    loop {
        let step = em_iteration(data, &model, options)?;
        trace.push(step.log_likelihood);
        if let [.., previous, current] = trace[..] {
            if relative_change(current, previous) <= options.epsilon {
                converged = true;
                break;
            }
        }
        if iterations == options.max_iterations {
            break;
        }
        model = step.model;
        iterations += 1;
        shape_bracket_failures += step.shape_bracket_failures;
        rejected_updates += step.rejected_updates;
    }
    Ok(FitReport {
        model,
        log_likelihood_trace: trace,
        iterations,
        converged,
        epsilon: options.epsilon,
        mse_vs_histogram: f64::NAN,
        restarts: 0,
        shape_bracket_failures,
        rejected_updates,
    })
}

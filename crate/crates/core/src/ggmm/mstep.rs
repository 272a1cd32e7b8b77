use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{GgdComponent, Responsibilities};
use crate::numerics::stats::KahanSum;
use crate::numerics::{digamma_unchecked, ln_gamma_unchecked, refine, refine_evaluated, trigamma_unchecked};
use crate::{Error, Result};

/// Lower end of the shape search interval.
pub const SHAPE_MIN: f64 = 0.2;
/// Upper end of the shape search interval.
pub const SHAPE_MAX: f64 = 10.0;

const ROOT_ITERATIONS: usize = 200;
// neighbours of each anchor point tried by the sub-linear location search
const CANDIDATE_RADIUS: usize = 8;

/// `π_j = Σ_i r_ij / N`.
pub fn m_step_weights(resp: &Responsibilities) -> Vec<f64> {
    let n = resp.rows() as f64;
    (0..resp.cols()).map(|j| resp.column_sum(j) / n).collect()
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// One component's view of the data: the observations, their
/// responsibilities and the total responsibility `W`.
pub(crate) struct Column<'a> {
    data: &'a [f64],
    r: Vec<f64>,
    weight: f64,
    lo: f64,
    hi: f64,
}

impl<'a> Column<'a> {
    pub(crate) fn new(data: &'a [f64], resp: &Responsibilities, j: usize) -> Self {
        let r: Vec<f64> = resp.column(j).collect();
        let mut acc = KahanSum::default();
        r.iter().for_each(|&x| acc.add(x));
        let (lo, hi) = data.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
        Self { data, r, weight: acc.total(), lo, hi }
    }

    pub(crate) fn weight(&self) -> f64 {
        self.weight
    }

    fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.data.iter().copied().zip(self.r.iter().copied()).filter(|&(_, r)| r > 0.0)
    }

    /// `Σ r |y - μ|^β`.
    fn objective(&self, mu: f64, beta: f64) -> f64 {
        let mut acc = KahanSum::default();
        for (y, r) in self.pairs() {
            acc.add(r * (y - mu).abs().powf(beta));
        }
        acc.total()
    }

    /// `ln |y_i - μ|` per observation (`-∞` on the location itself).
    pub(crate) fn log_distances(&self, mu: f64) -> Vec<f64> {
        self.data.iter().map(|y| (y - mu).abs().ln()).collect()
    }

    /// `Σ r exp(β (ln|y - μ| - ln s))` from precomputed log distances.
    pub(crate) fn power_sum(&self, logs: &[f64], beta: f64, ln_scale: f64) -> f64 {
        let mut acc = KahanSum::default();
        for (&l, &r) in logs.iter().zip(&self.r) {
            if r > 0.0 {
                acc.add(r * (beta * (l - ln_scale)).exp());
            }
        }
        acc.total()
    }

    pub(crate) fn location(&self, current: &GgdComponent) -> Result<f64> {
        let beta = current.shape();
        let mu0 = current.location();
        if !(self.weight > 0.0) {
            return Ok(mu0);
        }
        if !(self.hi > self.lo) {
            return Ok(self.lo);
        }
        if beta > 1.0 {
            // convex objective: the stationary point is the minimizer, and the
            // stationarity function is ≥ 0 at min(y) and ≤ 0 at max(y)
            let stationarity = |mu: f64| {
                let (mut g, mut dg) = (0.0, 0.0);
                for (y, r) in self.pairs() {
                    let d = y - mu;
                    let a = d.abs();
                    if a == 0.0 {
                        if beta < 2.0 {
                            dg = f64::NEG_INFINITY;
                        }
                        continue;
                    }
                    let p = r * a.powf(beta - 1.0);
                    g += sign(d) * p;
                    dg -= (beta - 1.0) * p / a;
                }
                (-g, -dg)
            };
            let tol = 1e-12 * (self.hi - self.lo);
            refine(stationarity, self.lo, self.hi, mu0, ROOT_ITERATIONS, tol)
        } else {
            let candidate = self.best_data_point(mu0, beta);
            Ok(if self.objective(candidate, beta) <= self.objective(mu0, beta) { candidate } else { mu0 })
        }
    }

    fn best_data_point(&self, mu0: f64, beta: f64) -> f64 {
        let mut order: Vec<usize> = (0..self.data.len()).collect();
        order.sort_by(|&a, &b| self.data[a].total_cmp(&self.data[b]));
        let half = 0.5 * self.weight;
        let mut cumulative = 0.0;
        let mut median = order.len() - 1;
        for (k, &i) in order.iter().enumerate() {
            cumulative += self.r[i];
            if cumulative >= half {
                median = k;
                break;
            }
        }
        let nearest = order.partition_point(|&i| self.data[i] < mu0).min(order.len() - 1);
        let first = self.data[order[median]];
        let mut best = (first, self.objective(first, beta));
        for anchor in [median, nearest] {
            let from = anchor.saturating_sub(CANDIDATE_RADIUS);
            let to = (anchor + CANDIDATE_RADIUS).min(order.len() - 1);
            for &i in &order[from..=to] {
                let value = self.objective(self.data[i], beta);
                if value < best.1 {
                    best = (self.data[i], value);
                }
            }
        }
        best.0
    }

    /// Shape root from log distances to the basis location and the basis
    /// log-scale.
    pub(crate) fn shape(&self, logs: &[f64], ln_scale: f64, current_shape: f64) -> ShapeUpdate {
        let failed = ShapeUpdate { shape: current_shape, bracket_failed: true };
        if !(self.weight > 0.0) {
            return failed;
        }
        // (r_i, ln x_i) for points off the location
        let terms: Vec<(f64, f64)> = logs
            .iter()
            .zip(&self.r)
            .filter(|&(&l, &r)| r > 0.0 && l >= ZERO_DISTANCE_LN)
            .map(|(&l, &r)| (r, l - ln_scale))
            .collect();
        let weight = self.weight;
        let estimating = |beta: f64| {
            let a = 1.0 / beta;
            let psi = digamma_unchecked(a);
            let tri = trigamma_unchecked(a);
            let b2 = beta * beta;
            let mut h = weight * (a + psi / b2);
            let mut dh = weight * (-1.0 / b2 - 2.0 * psi / (b2 * beta) - tri / (b2 * b2));
            for &(r, lx) in &terms {
                let t = r * (beta * lx).exp() * lx;
                h -= t;
                dh -= t * lx;
            }
            (h, dh)
        };
        // the sign at the current shape says which end of the bracket to check
        let beta0 = current_shape.clamp(SHAPE_MIN, SHAPE_MAX);
        let (h0, dh0) = estimating(beta0);
        if h0 == 0.0 {
            return ShapeUpdate { shape: beta0, bracket_failed: false };
        }
        let (neg, pos) = if h0 > 0.0 {
            if !(estimating(SHAPE_MAX).0 < 0.0) {
                return failed;
            }
            (SHAPE_MAX, beta0)
        } else {
            if !(estimating(SHAPE_MIN).0 > 0.0) {
                return failed;
            }
            (beta0, SHAPE_MIN)
        };
        match refine_evaluated(estimating, neg, pos, (beta0, h0, dh0), ROOT_ITERATIONS, 1e-12) {
            Ok(shape) if shape.is_finite() => ShapeUpdate { shape, bracket_failed: false },
            _ => failed,
        }
    }

    /// Shape-dependent part of the expected log-likelihood at fixed location
    /// and scale, `W (ln β - ln Γ(1/β)) - Σ r (|y - μ|/s)^β`.
    pub(crate) fn shape_objective(&self, logs: &[f64], ln_scale: f64, beta: f64) -> f64 {
        self.weight * (beta.ln() - ln_gamma_unchecked(1.0 / beta)) - self.power_sum(logs, beta, ln_scale)
    }
}

// ln(1e-300): distances below this count as sitting on the location
const ZERO_DISTANCE_LN: f64 = -690.7755278982137;

/// Location update for component `j` with its scale and shape held fixed.
///
/// For `β > 1` this solves `Σ_i r_ij sign(y_i - μ) |y_i - μ|^(β-1) = 0`,
/// whose left side decreases monotonically in `μ`. For `β ≤ 1` the objective
/// `Σ_i r_ij |y_i - μ|^β` is concave between data points, so the minimum sits
/// on a data point: the weighted median (exact at `β = 1`) and its neighbours
/// are searched, and the current location is kept unless one does better.
pub fn m_step_location(data: &[f64], resp: &Responsibilities, j: usize, current: &GgdComponent) -> Result<f64> {
    if data.is_empty() {
        return Ok(current.location());
    }
    Column::new(data, resp, j).location(current)
}

/// Closed-form scale update `s = (β Σ r |y - μ|^β / Σ r)^(1/β)`.
pub fn m_step_scale(data: &[f64], resp: &Responsibilities, j: usize, location: f64, shape: f64) -> Result<f64> {
    let col = Column::new(data, resp, j);
    scale_from_spread(col.weight, col.objective(location, shape), shape, j)
}

pub(crate) fn scale_from_spread(weight: f64, spread: f64, shape: f64, j: usize) -> Result<f64> {
    if !(weight > 0.0) || !(spread > 0.0) {
        return Err(Error::DegenerateScale { component: j });
    }
    let s = (shape * spread / weight).powf(1.0 / shape);
    if s > 0.0 && s.is_finite() {
        Ok(s)
    } else {
        Err(Error::DegenerateScale { component: j })
    }
}

/// Result of a shape update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeUpdate {
    pub shape: f64,
    /// No root of the estimating equation in `[SHAPE_MIN, SHAPE_MAX]`; the
    /// previous shape was kept.
    pub bracket_failed: bool,
}

/// Shape update for component `j` at the given location and scale.
///
/// Solves `Σ_i r_ij [1/β + ψ(1/β)/β² - x_i^β ln x_i] = 0` with
/// `x_i = |y_i - μ| / s`. Points sitting exactly on `μ` contribute only the
/// first two terms.
pub fn m_step_shape(
    data: &[f64],
    resp: &Responsibilities,
    j: usize,
    location: f64,
    scale: f64,
    current_shape: f64,
) -> ShapeUpdate {
    let col = Column::new(data, resp, j);
    col.shape(&col.log_distances(location), scale.ln(), current_shape)
}

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::GgdComponent;
use crate::numerics::stats::KahanSum;
use crate::{Error, Result};

const WEIGHT_SUM_TOL: f64 = 1e-9;

/// Convex combination of generalized Gaussian components.
#[derive(Debug, Clone, PartialEq)]
pub struct GgmmModel {
    weights: Vec<f64>,
    components: Vec<GgdComponent>,
}

impl GgmmModel {
    /// Weights must be positive and sum to one within 1e-9; they are
    /// renormalized to an exact unit sum.
    pub fn new(weights: Vec<f64>, components: Vec<GgdComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidModel("need at least one component"));
        }
        if weights.len() != components.len() {
            return Err(Error::InvalidModel("one weight per component"));
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidModel("weights must be positive"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidModel("weights must sum to one"));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Self { weights, components })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[GgdComponent] {
        &self.components
    }

    /// Number of components `M`.
    pub fn order(&self) -> usize {
        self.components.len()
    }

    /// `ln π_j + ln(normalizer_j)` per component.
    pub(crate) fn ln_prefactors(&self) -> Vec<f64> {
        self.weights.iter().zip(&self.components).map(|(w, c)| w.ln() + c.ln_normalizer()).collect()
    }

    pub fn pdf(&self, y: f64) -> f64 {
        self.weights.iter().zip(&self.components).map(|(w, c)| w * c.pdf(y)).sum()
    }

    pub fn ln_pdf(&self, y: f64) -> f64 {
        let pre = self.ln_prefactors();
        let mut terms = alloc::vec![0.0; self.order()];
        ln_joint(&pre, &self.components, y, &mut terms);
        log_sum_exp(&terms)
    }

    pub fn cdf(&self, y: f64) -> f64 {
        let f: f64 = self.weights.iter().zip(&self.components).map(|(w, c)| w * c.cdf(y)).sum();
        f.clamp(0.0, 1.0)
    }

    pub fn min_scale(&self) -> f64 {
        self.components.iter().map(|c| c.scale()).fold(f64::INFINITY, f64::min)
    }
}

// ln(π_j p_j(y)) for every component
pub(crate) fn ln_joint(prefactors: &[f64], components: &[GgdComponent], y: f64, out: &mut [f64]) {
    for ((o, p), c) in out.iter_mut().zip(prefactors).zip(components) {
        *o = p - ((y - c.location()).abs() / c.scale()).powf(c.shape());
    }
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `Σ_i ln Σ_j π_j p_j(y_i)` with per-point log-sum-exp and compensated summation.
pub fn log_likelihood(data: &[f64], model: &GgmmModel) -> f64 {
    let pre = model.ln_prefactors();
    let mut terms = alloc::vec![0.0; model.order()];
    let mut acc = KahanSum::default();
    for &y in data {
        ln_joint(&pre, &model.components, y, &mut terms);
        acc.add(log_sum_exp(&terms));
    }
    acc.total()
}

/// Posterior membership probabilities, `N` rows by `M` columns, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Responsibilities {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Responsibilities {
    pub fn from_rows(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols || cols == 0 {
            return Err(Error::InvalidModel("responsibility matrix shape mismatch"));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().skip(j).step_by(self.cols).copied()
    }

    pub fn column_sum(&self, j: usize) -> f64 {
        let mut acc = KahanSum::default();
        self.column(j).for_each(|r| acc.add(r));
        acc.total()
    }
}

/// E-step: `r_ij = π_j p_j(y_i) / Σ_l π_l p_l(y_i)`, normalized in log space.
pub fn e_step(data: &[f64], model: &GgmmModel) -> Responsibilities {
    e_step_with_log_likelihood(data, model).0
}

pub(crate) fn e_step_with_log_likelihood(data: &[f64], model: &GgmmModel) -> (Responsibilities, f64) {
    let m = model.order();
    let pre = model.ln_prefactors();
    let mut values = alloc::vec![0.0; data.len() * m];
    let mut acc = KahanSum::default();
    for (row, &y) in values.chunks_exact_mut(m).zip(data) {
        ln_joint(&pre, &model.components, y, row);
        let lse = log_sum_exp(row);
        acc.add(lse);
        for v in row.iter_mut() {
            *v = (*v - lse).exp();
        }
    }
    (Responsibilities { rows: data.len(), cols: m, values }, acc.total())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn laplace() -> GgdComponent {
        GgdComponent::new(0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn single_component_and_convexity() {
        let c = GgdComponent::new(1.0, 2.0, 1.5).unwrap();
        let one = GgmmModel::new(vec![1.0], vec![c]).unwrap();
        let two = GgmmModel::new(vec![0.3, 0.7], vec![c, c]).unwrap();
        for i in -20..=20 {
            let y = i as f64 * 0.5;
            assert!((one.pdf(y) - c.pdf(y)).abs() < 1e-16);
            assert!((two.pdf(y) - c.pdf(y)).abs() < 1e-15);
            assert!((two.ln_pdf(y) - c.ln_pdf(y)).abs() < 1e-12);
            assert!(two.pdf(y) >= 0.0);
        }
    }

    #[test]
    fn log_likelihood_examples() {
        let m = GgmmModel::new(vec![1.0], vec![laplace()]).unwrap();
        assert!((log_likelihood(&[0.0], &m) - 0.5f64.ln()).abs() < 1e-15);
        let data = [0.3, -1.2, 4.0, 2.5];
        let doubled: Vec<f64> = data.iter().chain(data.iter()).copied().collect();
        assert!((log_likelihood(&doubled, &m) - 2.0 * log_likelihood(&data, &m)).abs() < 1e-12);
        // far outliers stay finite
        assert!(log_likelihood(&[1e6], &m).is_finite());
    }

    #[test]
    fn e_step_symmetry() {
        let c = GgdComponent::new(0.0, 1.0, 2.0).unwrap();
        let m = GgmmModel::new(vec![0.5, 0.5], vec![c, c]).unwrap();
        let r = e_step(&[-3.0, 0.0, 7.0], &m);
        assert!(r.row(0).iter().chain(r.row(2)).all(|&v| (v - 0.5).abs() < 1e-15));
        let a = GgdComponent::new(-2.0, 1.3, 1.7).unwrap();
        let b = GgdComponent::new(2.0, 1.3, 1.7).unwrap();
        let sym = GgmmModel::new(vec![0.5, 0.5], vec![a, b]).unwrap();
        let r = e_step(&[0.0], &sym);
        assert!((r.get(0, 0) - 0.5).abs() < 1e-15);
        let lopsided = GgmmModel::new(vec![1.0 - 1e-300, 1e-300], vec![a, b]).unwrap();
        assert!((e_step(&[-2.0], &lopsided).get(0, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn model_validation() {
        let c = laplace();
        assert!(GgmmModel::new(vec![], vec![]).is_err());
        assert!(GgmmModel::new(vec![0.5], vec![c, c]).is_err());
        assert!(GgmmModel::new(vec![0.0, 1.0], vec![c, c]).is_err());
        assert!(GgmmModel::new(vec![0.5, 0.6], vec![c, c]).is_err());
        let m = GgmmModel::new(vec![0.25, 0.75 + 1e-12], vec![c, c]).unwrap();
        assert!((m.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }
}

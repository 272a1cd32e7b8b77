use alloc::vec::Vec;

use super::{fit, FitOptions, FitReport, GgmmModel};
use crate::load::{freedman_diaconis_bins, histogram, Histogram};
use crate::numerics::RngStream;
use crate::{Error, Result};

/// Relative MSE gain below which extra components are not worth it.
pub const DEFAULT_PLATEAU_THRESHOLD: f64 = 0.05;

/// Mean squared difference between the histogram density and the mixture
/// density averaged over each bin, `(F(b_k+1) - F(b_k)) / w`.
///
/// Averaging over the bin rather than sampling the bin centre keeps the
/// discretization error out of the comparison; at a Laplace cusp the centre
/// value overshoots the bin mean by about `f w / 4`.
pub fn mixture_mse(model: &GgmmModel, hist: &Histogram) -> f64 {
    let cdf: Vec<f64> = hist.edges.iter().map(|&e| model.cdf(e)).collect();
    let total: f64 = cdf
        .windows(2)
        .zip(hist.edges.windows(2))
        .zip(&hist.densities)
        .map(|((f, e), &d)| ((f[1] - f[0]) / (e[1] - e[0]) - d).powi(2))
        .sum();
    total / hist.densities.len() as f64
}

/// Smallest order whose MSE is within `threshold` (relative) of every larger
/// order's MSE. Orders are taken in increasing `M`; `None` for an empty list.
pub fn choose_order(mse_by_order: &[(usize, f64)], threshold: f64) -> Option<usize> {
    let mut sorted = mse_by_order.to_vec();
    sorted.sort_by_key(|&(m, _)| m);
    sorted.iter().enumerate().find_map(|(k, &(m, mse))| {
        let plateau = sorted[k + 1..].iter().all(|&(_, later)| mse <= 0.0 || (mse - later) / mse < threshold);
        plateau.then_some(m)
    })
}

/// MSE within this many standard deviations of the histogram's sampling-noise
/// level counts as an adequate fit.
const NOISE_SIGMAS: f64 = 3.0;

/// Largest MSE explainable by histogram sampling noise alone.
///
/// With per-bin variances `v_b`, the noise part of the MSE has mean
/// `Σ v_b / B` and standard deviation `√(2 Σ v_b²) / B`; the bound is the mean
/// plus three standard deviations.
pub fn adequate_mse(hist: &Histogram) -> f64 {
    let v = hist.sampling_variances();
    let bins = v.len() as f64;
    let mean = v.iter().sum::<f64>() / bins;
    let sd = (2.0 * v.iter().map(|x| x * x).sum::<f64>()).sqrt() / bins;
    mean + NOISE_SIGMAS * sd
}

/// Fit for one candidate order.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderFit {
    pub components: usize,
    pub outcome: Result<FitReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderSelection {
    pub best: usize,
    pub fits: Vec<OrderFit>,
    /// Histogram shared by every order's MSE.
    pub histogram: Histogram,
    /// See [`adequate_mse`].
    pub adequate_mse: f64,
}

impl OrderSelection {
    pub fn best_fit(&self) -> &FitReport {
        self.fits
            .iter()
            .find(|f| f.components == self.best)
            .and_then(|f| f.outcome.as_ref().ok())
            .expect("best order has a successful fit")
    }
}

/// Histogram used to compare orders: the configured bin count or
/// Freedman–Diaconis.
pub fn selection_histogram(data: &[f64], options: &FitOptions) -> Result<Histogram> {
    histogram(data, options.histogram_bins.unwrap_or_else(|| freedman_diaconis_bins(data)))
}

/// Fits `M` components on the sub-stream `stream.fork(M)`, so each order's
/// result is independent of which other orders are tried and in what order.
pub fn fit_order(data: &[f64], components: usize, options: &FitOptions, bins: usize, stream: &RngStream) -> OrderFit {
    let options = FitOptions { components, histogram_bins: Some(bins), ..options.clone() };
    OrderFit { components, outcome: fit(data, &options, &stream.fork(components as u64)) }
}

/// Picks the order from finished fits; failed orders are skipped.
///
/// The choice is the smaller of the plateau order from [`choose_order`] and
/// the first order whose MSE is already at the histogram's noise level.
/// Without the second test, larger mixtures keep "improving" by tracking the
/// sampling noise of the histogram.
pub fn summarize_orders(fits: Vec<OrderFit>, histogram: Histogram, threshold: f64) -> Result<OrderSelection> {
    let mut mse: Vec<(usize, f64)> =
        fits.iter().filter_map(|f| f.outcome.as_ref().ok().map(|r| (f.components, r.mse_vs_histogram))).collect();
    mse.sort_by_key(|&(m, _)| m);
    let plateau = choose_order(&mse, threshold).ok_or(Error::AllFitsFailed)?;
    let adequate = adequate_mse(&histogram);
    let best = mse.iter().find(|&&(_, e)| e <= adequate).map_or(plateau, |&(m, _)| m.min(plateau));
    Ok(OrderSelection { best, fits, histogram, adequate_mse: adequate })
}

/// Fits every order in `orders` and selects one by the MSE plateau rule with
/// [`DEFAULT_PLATEAU_THRESHOLD`].
pub fn select_order(
    data: &[f64],
    orders: &[usize],
    options: &FitOptions,
    stream: &RngStream,
) -> Result<OrderSelection> {
    if orders.is_empty() {
        return Err(Error::InvalidModel("no model orders to compare"));
    }
    let hist = selection_histogram(data, options)?;
    let bins = hist.counts.len();
    let fits = orders.iter().map(|&m| fit_order(data, m, options, bins, stream)).collect();
    summarize_orders(fits, hist, DEFAULT_PLATEAU_THRESHOLD)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ggmm::GgdComponent;
    use alloc::vec;

    #[test]
    fn mse_is_zero_against_bin_averages() {
        let model = GgmmModel::new(vec![1.0], vec![GgdComponent::new(0.0, 1.0, 1.0).unwrap()]).unwrap();
        let edges: Vec<f64> = (0..=8).map(|k| -2.0 + 0.5 * k as f64).collect();
        let densities: Vec<f64> = edges.windows(2).map(|e| (model.cdf(e[1]) - model.cdf(e[0])) / 0.5).collect();
        let hist = Histogram { edges, counts: vec![1; 8], densities };
        assert!(mixture_mse(&model, &hist) < 1e-30);
    }

    #[test]
    fn plateau_rule() {
        let curve = [(1, 10.0), (2, 4.0), (3, 3.0), (4, 2.95), (5, 2.94)];
        assert_eq!(choose_order(&curve, 0.05), Some(3));
        assert_eq!(choose_order(&[(1, 1.0), (2, 0.99)], 0.05), Some(1));
        assert_eq!(choose_order(&[(3, 2.0)], 0.05), Some(3));
        assert_eq!(choose_order(&[], 0.05), None);
        // order of the input does not matter
        assert_eq!(choose_order(&[(2, 0.99), (1, 1.0)], 0.05), Some(1));
    }
}

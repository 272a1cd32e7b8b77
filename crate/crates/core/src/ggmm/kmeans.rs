use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{GgdComponent, GgmmModel};
use crate::numerics::RngStream;
use crate::{Error, Result};

const MAX_ITERATIONS: usize = 100;
const SCALE_FLOOR: f64 = 1e-6;

/// One-dimensional k-means (k-means++ seeding, Lloyd iterations) turned into
/// a starting mixture with Gaussian shapes.
///
/// Each cluster gives `μ` = its mean, `s` = √2 × its standard deviation
/// (floored at 1e-6 × the data range), `β = 2` and `π` = its share of points.
pub fn kmeans_init(data: &[f64], m: usize, stream: &mut RngStream) -> Result<GgmmModel> {
    if m == 0 {
        return Err(Error::InvalidModel("need at least one component"));
    }
    let n = data.len();
    if n < m {
        return Err(Error::InsufficientData { observations: n, components: m });
    }
    let (lo, hi) = data.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    if !(hi > lo) {
        return Err(Error::ConstantData);
    }
    let mut distinct = crate::numerics::stats::sorted(data);
    distinct.dedup();
    if distinct.len() < m {
        return Err(Error::InsufficientData { observations: distinct.len(), components: m });
    }

    let mut centers = seed_centers(data, m, stream);
    let mut labels = vec![0usize; n];
    for iteration in 0..MAX_ITERATIONS {
        let mut changed = false;
        for (label, &y) in labels.iter_mut().zip(data) {
            let best = nearest(&centers, y);
            changed |= best != *label;
            *label = best;
        }
        let mut sums = vec![0.0; m];
        let mut counts = vec![0usize; m];
        for (&label, &y) in labels.iter().zip(data) {
            sums[label] += y;
            counts[label] += 1;
        }
        for k in 0..m {
            if counts[k] == 0 {
                // re-seed an empty cluster at the point farthest from its centre
                let far = (0..n)
                    .max_by(|&a, &b| {
                        (data[a] - centers[labels[a]]).abs().total_cmp(&(data[b] - centers[labels[b]]).abs())
                    })
                    .expect("data is non-empty");
                centers[k] = data[far];
                labels[far] = k;
                changed = true;
            } else {
                centers[k] = sums[k] / counts[k] as f64;
            }
        }
        if !changed && iteration > 0 {
            break;
        }
    }

    // clusters can still be empty after a re-seed steals their only point
    let mut weights = Vec::with_capacity(m);
    let mut components = Vec::with_capacity(m);
    let floor = SCALE_FLOOR * (hi - lo);
    for (k, &center) in centers.iter().enumerate() {
        let members: Vec<f64> = labels.iter().zip(data).filter(|(l, _)| **l == k).map(|(_, &y)| y).collect();
        let count = members.len().max(1);
        let mean = if members.is_empty() { center } else { members.iter().sum::<f64>() / count as f64 };
        let var = members.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / count as f64;
        weights.push(count as f64);
        components.push(GgdComponent::new(mean, (2.0 * var).sqrt().max(floor), 2.0)?);
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    GgmmModel::new(weights, components)
}

fn nearest(centers: &[f64], y: f64) -> usize {
    let mut best = 0;
    for (k, c) in centers.iter().enumerate() {
        if (y - c).abs() < (y - centers[best]).abs() {
            best = k;
        }
    }
    best
}

// k-means++: each new centre drawn with probability proportional to squared
// distance from the nearest existing one
fn seed_centers(data: &[f64], m: usize, stream: &mut RngStream) -> Vec<f64> {
    let n = data.len();
    let mut centers = Vec::with_capacity(m);
    centers.push(data[(stream.uniform() * n as f64) as usize % n]);
    let mut d2: Vec<f64> = data.iter().map(|y| (y - centers[0]).powi(2)).collect();
    while centers.len() < m {
        let total: f64 = d2.iter().sum();
        let target = stream.uniform() * total;
        let mut cumulative = 0.0;
        let mut pick = n - 1;
        for (i, d) in d2.iter().enumerate() {
            cumulative += d;
            if cumulative > target && *d > 0.0 {
                pick = i;
                break;
            }
        }
        if d2[pick] == 0.0 {
            // rounding pushed past the last positive weight
            pick = d2.iter().rposition(|&d| d > 0.0).expect("more distinct values than centres");
        }
        let c = data[pick];
        centers.push(c);
        for (d, y) in d2.iter_mut().zip(data) {
            *d = d.min((y - c).powi(2));
        }
    }
    centers
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cluster_is_sample_moments() {
        let data = [1.0, 2.0, 4.0, 7.0];
        let model = kmeans_init(&data, 1, &mut RngStream::new(1, 0)).unwrap();
        assert_eq!(model.weights(), &[1.0]);
        let c = model.components()[0];
        assert!((c.location() - 3.5).abs() < 1e-15);
        assert!((c.scale() - (2.0f64 * 5.25).sqrt()).abs() < 1e-14);
        assert_eq!(c.shape(), 2.0);
    }

    #[test]
    fn errors() {
        let mut s = RngStream::new(1, 0);
        assert_eq!(kmeans_init(&[1.0], 2, &mut s), Err(Error::InsufficientData { observations: 1, components: 2 }));
        assert_eq!(kmeans_init(&[3.0, 3.0, 3.0], 2, &mut s), Err(Error::ConstantData));
        assert!(kmeans_init(&[1.0, 1.0, 2.0], 3, &mut s).is_err());
    }

    #[test]
    fn deterministic_for_seed() {
        let data: Vec<f64> = (0..200).map(|i| ((i * 37) % 101) as f64).collect();
        let a = kmeans_init(&data, 3, &mut RngStream::new(5, 2)).unwrap();
        let b = kmeans_init(&data, 3, &mut RngStream::new(5, 2)).unwrap();
        assert_eq!(a, b);
    }
}

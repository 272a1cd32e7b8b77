use loadmix_core::nhpp::{build_table2_intensity, build_table2_schedule, simulate_nhpp, IntensityFunction};
use loadmix_core::numerics::stats::{chi_square_two_sample, ks_statistic};
use loadmix_core::RngStream;
use proptest::prelude::*;
use rand_distr::{Distribution, Poisson};

const REPLICATIONS: u64 = 10_000;

fn paper_sinusoid() -> IntensityFunction {
    IntensityFunction::sinusoidal(20.0, 10.0, 0.5, 10.0).unwrap()
}

#[test]
fn sinusoid_mean_count() {
    let target = paper_sinusoid();
    let base = RngStream::new(42, 0);
    let total: usize = (0..REPLICATIONS).map(|r| simulate_nhpp(&target, &base.fork(r)).unwrap().count()).sum();
    let mean = total as f64 / REPLICATIONS as f64;
    let expected = 200.0 + 40.0 / std::f64::consts::PI;
    assert!((mean - expected).abs() < 0.01 * expected, "{mean}");
}

#[test]
fn piecewise_counts_match_direct_poisson() {
    let target = build_table2_intensity(&mut RngStream::new(5, 0));
    let base = RngStream::new(5, 1);
    let windows = [(0.0, 360.0), (780.0, 1080.0), (1380.0, 1440.0)];
    let mut thinned = vec![Vec::new(); windows.len()];
    for r in 0..REPLICATIONS {
        let record = simulate_nhpp(&target, &base.fork(r)).unwrap();
        for (k, &(a, b)) in windows.iter().enumerate() {
            thinned[k].push(record.count_between(a, b) as u64);
        }
    }
    let mut direct_stream = RngStream::new(5, 2);
    for (k, &(a, b)) in windows.iter().enumerate() {
        let mean = target.mean_value(b).unwrap() - target.mean_value(a).unwrap();
        let poisson = Poisson::new(mean).unwrap();
        let direct: Vec<u64> = (0..REPLICATIONS).map(|_| poisson.sample(&mut direct_stream) as u64).collect();
        let test = chi_square_two_sample(&thinned[k], &direct);
        assert!(test.p_value > 0.01, "window {a}..{b}: {test:?}");
    }
}

#[test]
fn disjoint_counts_are_uncorrelated() {
    let target = paper_sinusoid();
    let base = RngStream::new(8, 0);
    let pairs: Vec<(f64, f64)> = (0..REPLICATIONS)
        .map(|r| {
            let rec = simulate_nhpp(&target, &base.fork(r)).unwrap();
            (rec.count_between(0.0, 3.0) as f64, rec.count_between(3.0, 6.0) as f64)
        })
        .collect();
    let n = pairs.len() as f64;
    let (mx, my) = (pairs.iter().map(|p| p.0).sum::<f64>() / n, pairs.iter().map(|p| p.1).sum::<f64>() / n);
    let cov = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / n;
    let vx = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>() / n;
    let vy = pairs.iter().map(|p| (p.1 - my).powi(2)).sum::<f64>() / n;
    let rho = cov / (vx * vy).sqrt();
    assert!(rho.abs() < 0.05, "ρ = {rho}");
}

#[test]
fn first_arrival_time_distribution() {
    let target = paper_sinusoid();
    let base = RngStream::new(13, 0);
    let firsts: Vec<f64> = (0..REPLICATIONS)
        .filter_map(|r| simulate_nhpp(&target, &base.fork(r)).unwrap().epochs().first().copied())
        .collect();
    // with λ ≥ 10 on [0, 10] an empty path has probability e^-212
    assert_eq!(firsts.len(), REPLICATIONS as usize);
    let d = ks_statistic(&firsts, |x| 1.0 - (-target.mean_value(x).unwrap()).exp());
    assert!(d < 0.02, "D = {d}");
}

#[test]
fn table2_ensemble_mean() {
    let schedule = build_table2_schedule(&mut RngStream::new(21, 0));
    let target = schedule.intensity_minutes();
    let base = RngStream::new(21, 1);
    let total: usize = (0..REPLICATIONS).map(|r| simulate_nhpp(&target, &base.fork(r)).unwrap().count()).sum();
    let mean = total as f64 / REPLICATIONS as f64;
    let expected = target.mean_value(1440.0).unwrap();
    assert!((mean - expected).abs() < 0.02 * expected, "{mean} vs {expected}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counting_is_monotone(seed in any::<u64>(), offset in 0.0f64..30.0, amplitude in 0.0f64..1.0, t in 0.0f64..10.0, dt in 0.0f64..10.0) {
        let target = IntensityFunction::sinusoidal(offset + 1.0, amplitude * offset, 0.7, 10.0).unwrap();
        let record = simulate_nhpp(&target, &RngStream::new(seed, 0)).unwrap();
        prop_assert!(record.epochs().windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(record.count_until((t + dt).min(10.0)) >= record.count_until(t));
        prop_assert!(record.epochs().iter().all(|&e| (0.0..=10.0).contains(&e)));
    }
}

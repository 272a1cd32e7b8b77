use loadmix_core::numerics::{digamma, find_root, ln_gamma, RootBracket};
use loadmix_core::RngStream;
use proptest::prelude::*;

#[test]
fn ln_gamma_recurrence_on_random_points() {
    let mut s = RngStream::new(2024, 0);
    let worst = (0..10_000)
        .map(|_| 0.1 + 99.9 * s.uniform())
        .map(|x| (ln_gamma(x + 1.0).unwrap() - ln_gamma(x).unwrap() - x.ln()).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn digamma_matches_difference_of_ln_gamma() {
    let mut s = RngStream::new(2024, 1);
    let h = 1e-5;
    let worst = (0..10_000)
        .map(|_| 0.1 + 99.9 * s.uniform())
        .map(|x| {
            let fd = (ln_gamma(x + h).unwrap() - ln_gamma(x - h).unwrap()) / (2.0 * h);
            (digamma(x).unwrap() - fd).abs()
        })
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn streams_replay_bit_for_bit() {
    let draw = || {
        let mut s = RngStream::new(77, 12);
        (0..1000).map(|_| s.uniform().to_bits()).collect::<Vec<_>>()
    };
    assert_eq!(draw(), draw());
}

proptest! {
    #[test]
    fn root_is_independent_of_bracket_width(root in -50.0f64..50.0, left in 0.01f64..100.0, right in 0.01f64..100.0) {
        let f = |x: f64| ((x - root).powi(3) + (x - root), 3.0 * (x - root).powi(2) + 1.0);
        let narrow = find_root(f, &RootBracket::new(root - 0.01, root + 0.02, 200, 1e-12).unwrap()).unwrap();
        let wide = find_root(f, &RootBracket::new(root - left, root + right, 200, 1e-12).unwrap()).unwrap();
        prop_assert!((narrow - wide).abs() < 1e-9);
        prop_assert!((wide - root).abs() < 1e-9);
    }
}

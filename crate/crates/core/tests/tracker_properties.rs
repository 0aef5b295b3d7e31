//! Recursive residual statistics against two-pass batch formulas.

use evoprog_core::{Error, ErrorTracker};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn two_pass(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn matches_two_pass(xs in prop::collection::vec(-1e3..1e3f64, 2..500)) {
        let mut t = ErrorTracker::new();
        t.extend(xs.iter().copied());
        let (mean, var) = two_pass(&xs);
        prop_assert_eq!(t.count(), xs.len() as u64);
        prop_assert!((t.mean() - mean).abs() <= 1e-10 * (1.0 + mean.abs()));
        prop_assert!(close(t.variance().unwrap(), var, 1e-10) || var < 1e-20);
    }

    #[test]
    fn order_does_not_matter(xs in prop::collection::vec(-10.0..10.0f64, 2..200), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut shuffled = xs.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut a = ErrorTracker::new();
        a.extend(xs);
        let mut b = ErrorTracker::new();
        b.extend(shuffled);
        prop_assert!((a.mean() - b.mean()).abs() <= 1e-10 * (1.0 + a.mean().abs()));
        let (va, vb) = (a.variance().unwrap(), b.variance().unwrap());
        prop_assert!(close(va, vb, 1e-10) || va.max(vb) < 1e-20);
    }

    #[test]
    fn sum_of_squares_never_decreases(xs in prop::collection::vec(-10.0..10.0f64, 1..200)) {
        let mut t = ErrorTracker::new();
        let mut prev = 0.0;
        for x in xs {
            t.push(x);
            prop_assert!(t.sum_of_squares() >= prev);
            prev = t.sum_of_squares();
        }
    }
}

#[test]
fn empty_and_single_sample() {
    let t = ErrorTracker::new();
    assert_eq!((t.count(), t.mean(), t.sum_of_squares()), (0, 0.0, 0.0));
    assert_eq!(t.variance(), Err(Error::InsufficientData { needed: 2, got: 0 }));
}

#[test]
fn standard_normal_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let draws: Vec<f64> = (0..1000).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut t = ErrorTracker::new();
    t.extend(draws.iter().copied());
    let (mean, var) = two_pass(&draws);
    assert!(t.mean().abs() < 0.1 && (t.variance().unwrap() - 1.0).abs() < 0.15);
    assert!(close(t.mean(), mean, 1e-10) && close(t.variance().unwrap(), var, 1e-10));
}

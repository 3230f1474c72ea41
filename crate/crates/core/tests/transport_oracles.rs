#![allow(clippy::needless_range_loop)]

mod common;

use common::*;
use gtsa_core::linalg::Matrix;
use gtsa_core::transport::{
    sinkhorn, sliced_wasserstein, wasserstein_1d, wasserstein_exact, DiscreteMeasure,
    SinkhornOptions,
};
use rand::Rng;

fn random_measure(r: &mut rand_chacha::ChaCha8Rng, n: usize, d: usize) -> DiscreteMeasure {
    let pts = (0..n * d).map(|_| r.random_range(-2.0..2.0)).collect();
    let w = random_weights(n, r);
    DiscreteMeasure::new(Matrix::from_vec(n, d, pts).unwrap(), w).unwrap()
}

fn lp(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> f64 {
    wasserstein_lp(mu.support(), mu.weights(), nu.support(), nu.weights(), p)
}

#[test]
fn one_dimensional_matches_lp() {
    let mut r = rng(21);
    for _ in 0..200 {
        let (n, m) = (r.random_range(1..=7), r.random_range(1..=7));
        let mu = random_measure(&mut r, n, 1);
        let nu = random_measure(&mut r, m, 1);
        let p = [1.0, 2.0, 3.0][r.random_range(0..3)];
        let got = wasserstein_1d(&mu, &nu, p).unwrap();
        assert!(
            (got - lp(&mu, &nu, p)).abs() < 1e-9,
            "{got} vs {}",
            lp(&mu, &nu, p)
        );
    }
}

#[test]
fn exact_matches_lp_and_permutations() {
    let mut r = rng(22);
    for _ in 0..60 {
        let (n, m) = (r.random_range(1..=6), r.random_range(1..=6));
        let mu = random_measure(&mut r, n, 3);
        let nu = random_measure(&mut r, m, 3);
        let (w, plan) = wasserstein_exact(&mu, &nu, 2.0).unwrap();
        assert!((w - lp(&mu, &nu, 2.0)).abs() < 1e-9);
        for (s, a) in plan.row_sums().iter().zip(mu.weights()) {
            assert!((s - a).abs() < 1e-9);
        }
    }
    for _ in 0..20 {
        let n = r.random_range(1..=6);
        let xs = random_points(n, 2, r.random());
        let ys = random_points(n, 2, r.random());
        let mu = DiscreteMeasure::uniform(xs.clone()).unwrap();
        let nu = DiscreteMeasure::uniform(ys.clone()).unwrap();
        let (w, _) = wasserstein_exact(&mu, &nu, 1.0).unwrap();
        assert!((w - wasserstein_by_permutations(&xs, &ys, 1.0)).abs() < 1e-9);
    }
}

#[test]
fn sinkhorn_gap_shrinks_with_epsilon() {
    let mut r = rng(23);
    for _ in 0..10 {
        let mu = {
            let n = r.random_range(2..=8);
            random_measure(&mut r, n, 2)
        };
        let nu = {
            let n = r.random_range(2..=8);
            random_measure(&mut r, n, 2)
        };
        let exact = lp(&mu, &nu, 2.0);
        let gaps: Vec<f64> = [1.0, 0.3, 0.1, 0.03, 0.01]
            .iter()
            .map(|&eps| {
                let opts = SinkhornOptions {
                    epsilon: eps,
                    ..Default::default()
                };
                (sinkhorn(&mu, &nu, 2.0, &opts).unwrap().distance - exact).abs()
            })
            .collect();
        for w in gaps.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "{gaps:?}");
        }
        assert!(gaps[4] <= 0.05 * exact.max(1e-12), "{gaps:?} exact {exact}");
    }
}

#[test]
fn sliced_is_close_to_one_dimensional_projection_average() {
    // On collinear supports every projection is a rescaled copy of the
    // same 1-D problem, so the sliced value is W_1 times E|cos theta|.
    let mut r = rng(24);
    let a: Vec<f64> = (0..6).map(|_| r.random_range(-1.0..1.0)).collect();
    let b: Vec<f64> = (0..6).map(|_| r.random_range(-1.0..1.0)).collect();
    let embed =
        |v: &[f64]| Matrix::from_rows(&v.iter().map(|&t| [t, 0.0]).collect::<Vec<_>>()).unwrap();
    let mu = DiscreteMeasure::uniform(embed(&a)).unwrap();
    let nu = DiscreteMeasure::uniform(embed(&b)).unwrap();
    let w = lp(&mu, &nu, 1.0);
    let sliced = sliced_wasserstein(&mu, &nu, 1.0, 2000, 7).unwrap();
    let expected = w * 2.0 / std::f64::consts::PI;
    assert!(
        (sliced - expected).abs() <= 0.1 * expected,
        "{sliced} vs {expected}"
    );
}

#[test]
fn exact_is_a_metric() {
    let mut r = rng(25);
    for _ in 0..100 {
        let a = {
            let n = r.random_range(1..=5);
            random_measure(&mut r, n, 2)
        };
        let b = {
            let n = r.random_range(1..=5);
            random_measure(&mut r, n, 2)
        };
        let c = {
            let n = r.random_range(1..=5);
            random_measure(&mut r, n, 2)
        };
        let w = |x: &DiscreteMeasure, y: &DiscreteMeasure| wasserstein_exact(x, y, 2.0).unwrap().0;
        assert!((w(&a, &b) - w(&b, &a)).abs() < 1e-8);
        assert!(w(&a, &a) < 1e-8);
        assert!(w(&a, &c) <= w(&a, &b) + w(&b, &c) + 1e-8);
    }
}

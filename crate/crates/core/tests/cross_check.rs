//! Optimizers and decision procedures against the brute-force oracles on
//! small random instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shortcut_frechet::oracle::{
    oracle_decide_discrete, oracle_decide_semi, oracle_optimize_discrete, oracle_optimize_semi, OracleVariant,
};
use shortcut_frechet::geom::approx_eq;
use shortcut_frechet::semi::decide_semi;
use shortcut_frechet::two_sided::{decide_two_sided_at, witness};
use shortcut_frechet::{
    decide_one_sided, optimize_one_sided, optimize_semi, optimize_two_sided, Backend, OptimizeConfig, Point, PointSeq,
    PolyCurve,
};

/// Noisy samples around a random walk, with some far outliers.
fn noisy_walk(rng: &mut ChaCha8Rng, len: usize, sigma: f64, outliers: f64) -> Vec<Point> {
    let mut cur = (0.0, 0.0);
    (0..len)
        .map(|_| {
            cur.0 += rng.random_range(-1.0..1.0);
            cur.1 += rng.random_range(-1.0..1.0);
            if rng.random::<f64>() < outliers {
                Point::new(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0))
            } else {
                Point::new(cur.0 + sigma * rng.random_range(-1.0..1.0), cur.1 + sigma * rng.random_range(-1.0..1.0))
            }
        })
        .collect()
}

fn pair(seed: u64, max: usize) -> (PointSeq, PointSeq) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(1..=max);
    let n = rng.random_range(1..=max);
    let sigma = rng.random_range(0.0..0.5);
    let out = rng.random_range(0.0..0.3);
    (
        PointSeq::new(noisy_walk(&mut rng, m, sigma, out)).unwrap(),
        PointSeq::new(noisy_walk(&mut rng, n, sigma, out)).unwrap(),
    )
}

fn ladder(lo: f64, hi: f64) -> Vec<f64> {
    (0..5).map(|k| lo + (hi - lo) * k as f64 / 4.0).collect()
}

#[test]
fn one_sided_matches_oracle() {
    for seed in 0..300 {
        let (a, b) = pair(seed, 25);
        let want = oracle_optimize_discrete(&a, &b, OracleVariant::OneSided);
        let got = optimize_one_sided(&a, &b, &OptimizeConfig::with_seed(seed)).unwrap();
        assert_eq!(got.delta_star_sq, want, "seed {seed}");
        assert!(got.certificate.is_valid(&a, &b, want));
        for d in ladder(0.5 * want, 1.5 * want) {
            assert_eq!(decide_one_sided(&a, &b, d).is_yes(), oracle_decide_discrete(&a, &b, d, OracleVariant::OneSided));
        }
    }
}

#[test]
fn two_sided_matches_oracle() {
    for seed in 0..300 {
        let (a, b) = pair(seed, 25);
        let want = oracle_optimize_discrete(&a, &b, OracleVariant::TwoSided);
        let got = optimize_two_sided(&a, &b, &OptimizeConfig::with_seed(seed)).unwrap();
        assert_eq!(got.delta_star_sq, want, "seed {seed}");
        assert!(witness(&a, &b, want).unwrap().is_valid_two_sided(&a, &b, want));
        for d in ladder(0.5 * want, 1.5 * want) {
            assert_eq!(witness(&a, &b, d).is_some(), decide_two_sided_at(&a, &b, d, Backend::Hierarchical));
            let o = oracle_decide_discrete(&a, &b, d, OracleVariant::TwoSided);
            for backend in [Backend::NaiveCover, Backend::Hierarchical] {
                assert_eq!(decide_two_sided_at(&a, &b, d, backend), o, "seed {seed} δ² {d}");
            }
        }
    }
}

#[test]
fn semi_matches_oracle() {
    for seed in 0..300 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, _) = pair(seed, 20);
        let nv = rng.random_range(2..=21);
        let f = PolyCurve::new(noisy_walk(&mut rng, nv, 0.0, 0.0)).unwrap();
        let want = oracle_optimize_semi(&a, &f);
        let got = optimize_semi(&a, &f, &OptimizeConfig::with_seed(seed)).unwrap();
        assert_eq!(got.delta_star_sq, want, "seed {seed}");
        assert!(got.certificate.is_valid(&a, &f, want), "seed {seed}");
        for d in ladder(0.5 * want, 1.5 * want) {
            assert_eq!(decide_semi(&a, &f, d).is_yes(), oracle_decide_semi(&a, &f, d), "seed {seed} δ² {d}");
        }
    }
}

fn grid(rng: &mut ChaCha8Rng, len: usize, r: i32) -> Vec<Point> {
    (0..len)
        .map(|_| Point::new(rng.random_range(-r..=r) as f64, rng.random_range(-r..=r) as f64))
        .collect()
}

/// Small integer grids: many equal distances, collinear edges and bisectors
/// running along edges. Distinct generators of one geometric value may differ
/// in the last bits there, so the semi-continuous optimum is compared with the
/// crate tolerance.
#[test]
fn degenerate_grids() {
    for seed in 0..3000 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = rng.random_range(1..4);
        let (m, n) = (rng.random_range(1..15), rng.random_range(1..15));
        let a = PointSeq::new(grid(&mut rng, m, r)).unwrap();
        let b = PointSeq::new(grid(&mut rng, n, r)).unwrap();
        let cfg = OptimizeConfig::with_seed(seed);
        let one = optimize_one_sided(&a, &b, &cfg).unwrap().delta_star_sq;
        assert_eq!(one, oracle_optimize_discrete(&a, &b, OracleVariant::OneSided), "seed {seed}");
        let two = optimize_two_sided(&a, &b, &cfg).unwrap().delta_star_sq;
        assert_eq!(two, oracle_optimize_discrete(&a, &b, OracleVariant::TwoSided), "seed {seed}");
        let mut v = grid(&mut rng, n + 1, r);
        v.dedup();
        let Ok(f) = PolyCurve::new(v) else { continue };
        let got = optimize_semi(&a, &f, &cfg).unwrap();
        assert!(approx_eq(got.delta_star_sq, oracle_optimize_semi(&a, &f)), "seed {seed}");
        assert!(got.certificate.is_valid(&a, &f, got.delta_star_sq));
    }
}

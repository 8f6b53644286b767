//! Synthetic instances: noisy samples of a random polyline with a fraction of
//! the samples replaced by far-away outliers.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use shortcut_frechet::Point;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenParams {
    /// Samples in `A`.
    pub m: usize,
    /// Edges of the base polyline; `B` gets `n` samples.
    pub n: usize,
    pub sigma: f64,
    pub outlier_frac: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub a: Vec<Point>,
    pub b: Vec<Point>,
    /// `n + 1` vertices.
    pub curve: Vec<Point>,
    /// Sorted indices into `a`.
    pub outliers: Vec<usize>,
}

/// Random walk with unit-ish steps and a slowly turning heading.
fn base_polyline(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point> {
    let turn = Normal::new(0.0, 0.6).unwrap();
    let mut heading: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let mut cur = Point::new(0.0, 0.0);
    let mut out = vec![cur];
    for _ in 0..n {
        heading += turn.sample(rng);
        let len = rng.random_range(0.5..1.5);
        cur = Point::new(cur.x + len * heading.cos(), cur.y + len * heading.sin());
        out.push(cur);
    }
    out
}

/// `count` points at sorted uniform arc-length positions along `poly`.
fn sample_along(rng: &mut ChaCha8Rng, poly: &[Point], count: usize, sigma: f64) -> Vec<Point> {
    let cum: Vec<f64> = std::iter::once(0.0)
        .chain(poly.windows(2).scan(0.0, |acc, w| {
            *acc += (w[1].x - w[0].x).hypot(w[1].y - w[0].y);
            Some(*acc)
        }))
        .collect();
    let total = *cum.last().unwrap();
    let mut pos: Vec<f64> = (0..count).map(|_| rng.random_range(0.0..=total)).collect();
    pos.sort_by(f64::total_cmp);
    let noise = Normal::new(0.0, sigma.max(0.0)).unwrap();
    pos.into_iter()
        .map(|s| {
            let e = cum.partition_point(|&c| c <= s).clamp(1, poly.len() - 1) - 1;
            let t = ((s - cum[e]) / (cum[e + 1] - cum[e])).clamp(0.0, 1.0);
            let (p, q) = (poly[e], poly[e + 1]);
            let on = Point::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y));
            if sigma > 0.0 {
                Point::new(on.x + noise.sample(rng), on.y + noise.sample(rng))
            } else {
                on
            }
        })
        .collect()
}

pub fn generate(p: &GenParams) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let curve = base_polyline(&mut rng, p.n.max(1));
    let mut a = sample_along(&mut rng, &curve, p.m, p.sigma);
    let b = sample_along(&mut rng, &curve, p.n, p.sigma);

    let (lo, hi) = curve.iter().fold(((f64::MAX, f64::MAX), (f64::MIN, f64::MIN)), |(lo, hi), q| {
        ((lo.0.min(q.x), lo.1.min(q.y)), (hi.0.max(q.x), hi.1.max(q.y)))
    });
    let center = Point::new(0.5 * (lo.0 + hi.0), 0.5 * (lo.1 + hi.1));
    let radius = 0.5 * (hi.0 - lo.0).hypot(hi.1 - lo.1) + 1.0;
    let k = ((p.outlier_frac.clamp(0.0, 1.0) * p.m as f64).round() as usize).min(p.m);
    // endpoints stay on the curve when there is room: both frogs must start
    // and end there, so an outlier at an end would dominate every variant
    let mut outliers = if k + 2 <= p.m {
        index::sample(&mut rng, p.m - 2, k).into_iter().map(|i| i + 1).collect()
    } else {
        index::sample(&mut rng, p.m, k).into_vec()
    };
    outliers.sort_unstable();
    for &i in &outliers {
        let r = radius * rng.random_range(2.0..4.0);
        let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        a[i] = Point::new(center.x + r * phi.cos(), center.y + r * phi.sin());
    }
    Instance { a, b, curve, outliers }
}

/// `k` cluster centers spread over a square that grows with `sqrt(k)`.
pub fn cluster_centers(k: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = (k as f64).sqrt().ceil() * 10.0;
    (0..k.max(1)).map(|_| Point::new(rng.random_range(0.0..side), rng.random_range(0.0..side))).collect()
}

/// `len` points in tight groups around `centers`, visited in random order.
/// Threshold graphs between two such sequences over the same centers have
/// few, large bicliques.
pub fn clustered(len: usize, centers: &[Point], spread: f64, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, spread).unwrap();
    (0..len)
        .map(|_| {
            let c = centers[rng.random_range(0..centers.len())];
            Point::new(c.x + noise.sample(&mut rng), c.y + noise.sample(&mut rng))
        })
        .collect()
}

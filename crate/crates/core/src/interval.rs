//! Counting pair distances in an interval, threshold tests with an
//! approximate-median sample, interval narrowing and approximate rank
//! selection.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{ln_size, Backend, SamplingConstants};
use crate::error::{Error, Result};
use crate::geom::{squared_dist, HalfOpenInterval, PointSeq};
use crate::quadtree::{Class, Piece, QuadTree};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdOutcome {
    /// The interval holds at most about `L` distances; carries the (possibly
    /// estimated) count.
    AtMostL(usize),
    /// More than `L`; pairs whose distances lie in the interval.
    MoreThanL(Vec<(usize, usize)>),
}

/// Number of pairs with squared distance in `(lo, hi]`.
pub fn count_in_interval_exact(a: &PointSeq, b: &PointSeq, interval: HalfOpenInterval) -> usize {
    let mut count = 0;
    for &p in a.points() {
        for &q in b.points() {
            if interval.contains(squared_dist(p, q)) {
                count += 1;
            }
        }
    }
    count
}

/// Number of pairs with squared distance at most `delta_sq`, counted with a
/// quadtree so that whole cells inside or outside the disk cost one test.
pub fn count_within(a: &PointSeq, b: &PointSeq, delta_sq: f64) -> usize {
    let tree = QuadTree::new(b.points());
    let pa = a.points();
    let classify = |lo: f64, hi: f64| {
        if hi <= delta_sq {
            Class::Inside
        } else if lo > delta_sq {
            Class::Outside
        } else {
            Class::Crossing
        }
    };
    let mut count = 0;
    tree.decompose(pa, &classify, 0, &mut |piece| match piece {
        Piece::Block { a: ai, node } => count += ai.len() * tree.node_len(node),
        Piece::Leaf { a: ai, node } => {
            for &i in ai {
                let p = pa[i as usize];
                count += tree.node_points(node).iter().filter(|&&q| squared_dist(p, q) <= delta_sq).count();
            }
        }
    });
    count
}

/// Threshold test with the default sampling backend and constants.
pub fn threshold_count_and_sample(
    a: &PointSeq,
    b: &PointSeq,
    interval: HalfOpenInterval,
    l: usize,
    seed: u64,
) -> Result<ThresholdOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ThresholdCounter::default().run(a, b, interval, l, &mut rng)
}

/// Randomized threshold counter. No result is verified; callers that need
/// certainty check the consequences with a decision procedure.
#[derive(Clone, Copy, Debug, Default)]
pub struct ThresholdCounter {
    pub backend: Backend,
    pub constants: SamplingConstants,
}

impl ThresholdCounter {
    pub fn new(backend: Backend, constants: SamplingConstants) -> Self {
        ThresholdCounter { backend, constants }
    }

    pub fn run(
        &self,
        a: &PointSeq,
        b: &PointSeq,
        interval: HalfOpenInterval,
        l: usize,
        rng: &mut impl Rng,
    ) -> Result<ThresholdOutcome> {
        let mn = a.len() * b.len();
        if l == 0 || l > mn {
            return Err(Error::InvalidParameter(format!("L = {l} must lie in 1..={mn}")));
        }
        match self.backend {
            Backend::Hierarchical => Ok(self.hierarchical(a, b, interval, l, rng)),
            _ => Ok(self.sampling(a, b, interval, l, rng)),
        }
    }

    fn sampling(&self, a: &PointSeq, b: &PointSeq, iv: HalfOpenInterval, l: usize, rng: &mut impl Rng) -> ThresholdOutcome {
        let (pa, pb) = (a.points(), b.points());
        let (m, n) = (pa.len(), pb.len());
        let mn = m * n;
        let ln = ln_size(m, n);
        let draws = (self.constants.c2 * (mn as f64 / l as f64) * ln).ceil();
        let cap = self.constants.sample_cap(m, n);
        if draws >= mn as f64 {
            let hits: Vec<(usize, usize)> = (0..m)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter(|&(i, j)| iv.contains(squared_dist(pa[i], pb[j])))
                .collect();
            return exact_outcome(hits, l, cap, rng);
        }
        let draws = draws as usize;
        let limit = (self.constants.c3 * ln).floor() as usize;
        let mut sample = Vec::with_capacity(cap);
        let mut hits = 0usize;
        for _ in 0..draws {
            let i = rng.random_range(0..m);
            let j = rng.random_range(0..n);
            if iv.contains(squared_dist(pa[i], pb[j])) {
                hits += 1;
                if sample.len() < cap {
                    sample.push((i, j));
                }
                if hits > limit {
                    return ThresholdOutcome::MoreThanL(sample);
                }
            }
        }
        ThresholdOutcome::AtMostL((hits as f64 * mn as f64 / draws as f64).round() as usize)
    }

    /// Quadtree partition of `B` against the annuli `lo < |a - x|² <= hi`:
    /// cells inside an annulus are counted exactly, the remaining leaf pairs
    /// are estimated by sampling.
    fn hierarchical(&self, a: &PointSeq, b: &PointSeq, iv: HalfOpenInterval, l: usize, rng: &mut impl Rng) -> ThresholdOutcome {
        let (pa, pb) = (a.points(), b.points());
        let (m, n) = (pa.len(), pb.len());
        let ln = ln_size(m, n);
        let cap = self.constants.sample_cap(m, n);
        let tree = QuadTree::new(pb);
        let classify = |lo: f64, hi: f64| {
            if lo > iv.lo && hi <= iv.hi {
                Class::Inside
            } else if hi <= iv.lo || lo > iv.hi {
                Class::Outside
            } else {
                Class::Crossing
            }
        };
        let mut blocks: Vec<(Vec<u32>, usize)> = Vec::new();
        let mut leaves: Vec<(Vec<u32>, usize)> = Vec::new();
        tree.decompose(pa, &classify, l, &mut |piece| match piece {
            Piece::Block { a: ai, node } => blocks.push((ai.to_vec(), node)),
            Piece::Leaf { a: ai, node } => leaves.push((ai.to_vec(), node)),
        });
        let block_weights: Vec<usize> = blocks.iter().map(|(ai, nd)| ai.len() * tree.node_len(*nd)).collect();
        let leaf_weights: Vec<usize> = leaves.iter().map(|(ai, nd)| ai.len() * tree.node_len(*nd)).collect();
        let n1: usize = block_weights.iter().sum();
        let leaf_pairs: usize = leaf_weights.iter().sum();

        // estimate the in-interval leaf pairs
        let draws = (self.constants.c2 * (leaf_pairs as f64 / l as f64) * ln).ceil() as usize;
        let mut leaf_hits = Vec::new();
        let n2_hat = if draws >= leaf_pairs {
            for (ai, nd) in &leaves {
                for &i in ai {
                    let p = pa[i as usize];
                    for (&j, &q) in tree.node_ids(*nd).iter().zip(tree.node_points(*nd)) {
                        if iv.contains(squared_dist(p, q)) {
                            leaf_hits.push((i as usize, j));
                        }
                    }
                }
            }
            leaf_hits.len() as f64
        } else {
            let cum = cumulative(&leaf_weights);
            let mut hits = 0usize;
            for _ in 0..draws {
                let (i, j) = draw_pair(&leaves, &cum, &tree, rng);
                if iv.contains(squared_dist(pa[i], pb[j])) {
                    hits += 1;
                    if leaf_hits.len() < cap {
                        leaf_hits.push((i, j));
                    }
                }
            }
            hits as f64 * leaf_pairs as f64 / draws.max(1) as f64
        };
        let estimate = n1 as f64 + n2_hat;
        if estimate <= self.constants.c3 / self.constants.c2 * l as f64 || (n1 == 0 && leaf_hits.is_empty()) {
            return ThresholdOutcome::AtMostL(estimate.round() as usize);
        }
        let block_cum = cumulative(&block_weights);
        let mut sample = Vec::with_capacity(cap);
        for _ in 0..cap {
            let from_blocks = leaf_hits.is_empty() || (n1 > 0 && rng.random::<f64>() * estimate < n1 as f64);
            if from_blocks {
                sample.push(draw_pair(&blocks, &block_cum, &tree, rng));
            } else {
                sample.push(leaf_hits[rng.random_range(0..leaf_hits.len())]);
            }
        }
        ThresholdOutcome::MoreThanL(sample)
    }
}

fn cumulative(w: &[usize]) -> Vec<usize> {
    w.iter()
        .scan(0usize, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// Uniform pair from a weighted list of `(stones, cell)` pieces.
fn draw_pair(pieces: &[(Vec<u32>, usize)], cum: &[usize], tree: &QuadTree, rng: &mut impl Rng) -> (usize, usize) {
    let total = *cum.last().expect("drawing from an empty piece list");
    let r = rng.random_range(0..total);
    let k = cum.partition_point(|&c| c <= r);
    let (ai, nd) = &pieces[k];
    let ids = tree.node_ids(*nd);
    (ai[rng.random_range(0..ai.len())] as usize, ids[rng.random_range(0..ids.len())])
}

fn exact_outcome(hits: Vec<(usize, usize)>, l: usize, cap: usize, rng: &mut impl Rng) -> ThresholdOutcome {
    if hits.len() <= l {
        return ThresholdOutcome::AtMostL(hits.len());
    }
    let picked = index::sample(rng, hits.len(), cap.min(hits.len()));
    ThresholdOutcome::MoreThanL(picked.iter().map(|k| hits[k]).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Narrowed {
    pub interval: HalfOpenInterval,
    /// Pairs realizing the finite interval ends.
    pub lower_pair: Option<(usize, usize)>,
    pub upper_pair: Option<(usize, usize)>,
    pub rounds: u64,
}

/// Narrows `(-inf, inf]` around the optimum of a monotone decision over pair
/// distances until, with high probability, at most `l` distances remain.
pub fn narrow_interval(
    a: &PointSeq,
    b: &PointSeq,
    l: usize,
    decide: impl FnMut(f64) -> bool,
    seed: u64,
) -> Result<Narrowed> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = l.clamp(1, a.len() * b.len());
    narrow_from(a, b, HalfOpenInterval::unbounded(), l, &ThresholdCounter::default(), &mut rng, decide)
}

pub(crate) fn max_rounds(m: usize, n: usize) -> u64 {
    16 + 4 * (((m * n) as f64).log2().ceil() as u64)
}

/// Narrowing from a given start interval. Every interval end is validated by
/// `decide`, so `decide(lo)` is false and `decide(hi)` true whenever finite
/// (apart from the start values, which the caller vouches for).
pub(crate) fn narrow_from(
    a: &PointSeq,
    b: &PointSeq,
    start: HalfOpenInterval,
    l: usize,
    counter: &ThresholdCounter,
    rng: &mut impl Rng,
    mut decide: impl FnMut(f64) -> bool,
) -> Result<Narrowed> {
    let (pa, pb) = (a.points(), b.points());
    let mut out = Narrowed { interval: start, lower_pair: None, upper_pair: None, rounds: 0 };
    let mut exclude_top = false;
    let cap = max_rounds(pa.len(), pb.len());
    while out.rounds < cap {
        out.rounds += 1;
        let iv = out.interval;
        let query = if exclude_top {
            let top = iv.hi.next_down();
            if top <= iv.lo {
                return Ok(out);
            }
            HalfOpenInterval { lo: iv.lo, hi: top }
        } else {
            iv
        };
        let sample = match counter.run(a, b, query, l, rng)? {
            ThresholdOutcome::AtMostL(_) => return Ok(out),
            ThresholdOutcome::MoreThanL(s) => s,
        };
        let mut vals: Vec<(f64, (usize, usize))> =
            sample.into_iter().map(|(i, j)| (squared_dist(pa[i], pb[j]), (i, j))).collect();
        debug_assert!(vals.iter().all(|v| query.contains(v.0)));
        vals.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        vals.dedup_by(|x, y| x.0 == y.0);
        let (mut lo, mut hi) = (0, vals.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if decide(vals[mid].0) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let before = out.interval;
        if lo > 0 {
            out.interval.lo = vals[lo - 1].0;
            out.lower_pair = Some(vals[lo - 1].1);
        }
        if lo < vals.len() && vals[lo].0 < out.interval.hi {
            out.interval.hi = vals[lo].0;
            out.upper_pair = Some(vals[lo].1);
        }
        // Only values equal to the current top were sampled: look below it.
        exclude_top = out.interval == before;
    }
    Err(Error::AttemptFailed(format!("interval narrowing did not finish in {cap} rounds")))
}

/// A pair whose distance has, with high probability, rank in `(k - l, k + l)`
/// among all `mn` pair distances (1-based ranks).
pub fn approx_rank_select(a: &PointSeq, b: &PointSeq, k: usize, l: usize, seed: u64) -> Result<((usize, usize), f64)> {
    let mn = a.len() * b.len();
    if k == 0 || k >= mn {
        return Err(Error::InvalidParameter(format!("k = {k} must lie in 1..{mn}")));
    }
    if l == 0 || l >= k {
        return Err(Error::InvalidParameter(format!("L = {l} must lie in 1..{k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counter = ThresholdCounter::default();
    let narrowed = narrow_from(a, b, HalfOpenInterval::unbounded(), l, &counter, &mut rng, |d| count_within(a, b, d) >= k)
        .map_err(|e| match e {
            Error::AttemptFailed(msg) => Error::RetriesExhausted { retries: 0, last: msg },
            e => e,
        })?;
    let (pa, pb) = (a.points(), b.points());
    let pair = match narrowed.upper_pair {
        Some(p) => p,
        // nothing sampled was large enough; the top of the range is the largest pair
        None => {
            let mut best = (0, 0);
            for i in 0..pa.len() {
                for j in 0..pb.len() {
                    if squared_dist(pa[i], pb[j]) > squared_dist(pa[best.0], pb[best.1]) {
                        best = (i, j);
                    }
                }
            }
            best
        }
    };
    Ok((pair, squared_dist(pa[pair.0], pb[pair.1])))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> (PointSeq, PointSeq) {
        (
            PointSeq::from_xy(&[(0., 0.), (1., 0.)]).unwrap(),
            PointSeq::from_xy(&[(0., 1.), (1., 1.)]).unwrap(),
        )
    }

    fn iv(lo: f64, hi: f64) -> HalfOpenInterval {
        HalfOpenInterval::new(lo, hi).unwrap()
    }

    #[test]
    fn exact_counts() {
        let (a, b) = square();
        assert_eq!(count_in_interval_exact(&a, &b, iv(1.0, 2.25)), 2);
        assert_eq!(count_in_interval_exact(&a, &b, iv(0.0, 1.0)), 2);
        assert_eq!(count_in_interval_exact(&a, &b, iv(4.0, 9.0)), 0);
        assert_eq!(count_in_interval_exact(&a, &b, iv(0.0, f64::INFINITY)), 4);
        assert_eq!(count_within(&a, &b, 1.0), 2);
        assert_eq!(count_within(&a, &b, 2.0), 4);
    }

    #[test]
    fn threshold_small_instance() {
        let (a, b) = square();
        assert_eq!(threshold_count_and_sample(&a, &b, iv(0.0, 2.25), 4, 1).unwrap(), ThresholdOutcome::AtMostL(4));
        assert_eq!(threshold_count_and_sample(&a, &b, iv(2.0, 9.0), 4, 1).unwrap(), ThresholdOutcome::AtMostL(0));
        assert!(threshold_count_and_sample(&a, &b, iv(0.0, 9.0), 0, 1).is_err());
        assert!(threshold_count_and_sample(&a, &b, iv(0.0, 9.0), 5, 1).is_err());
    }

    #[test]
    fn narrowing_small_instance() {
        let a = PointSeq::from_xy(&[(0., 0.), (5., 5.), (0., 2.)]).unwrap();
        let b = PointSeq::from_xy(&[(0., 0.), (0., 2.)]).unwrap();
        let decide = |d: f64| crate::one_sided::decide_one_sided(&a, &b, d).is_yes();
        for seed in 0..20 {
            let nw = narrow_interval(&a, &b, 2, decide, seed).unwrap();
            assert!(nw.interval.contains(4.0));
            assert!(count_in_interval_exact(&a, &b, nw.interval) <= 2);
        }
        // everything already fits
        let nw = narrow_interval(&a, &b, 6, decide, 0).unwrap();
        assert_eq!(nw.interval, HalfOpenInterval::unbounded());
    }

    #[test]
    fn rank_selection_small() {
        let (a, b) = square();
        for seed in 0..10 {
            let (_, v) = approx_rank_select(&a, &b, 2, 1, seed).unwrap();
            assert_eq!(v, 1.0);
            let (_, v) = approx_rank_select(&a, &b, 3, 1, seed).unwrap();
            assert_eq!(v, 2.0);
        }
        assert!(approx_rank_select(&a, &b, 4, 1, 0).is_err());
        assert!(approx_rank_select(&a, &b, 2, 2, 0).is_err());
    }
}

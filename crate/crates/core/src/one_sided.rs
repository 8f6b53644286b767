//! One-sided discrete Fréchet distance with shortcuts: only the `A`-frog may
//! skip stones.
//!
//! Indices are 0-based: position `(i, j)` pairs `a_i` with `b_j`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{OptimizeConfig, Stats};
use crate::error::{Error, Result};
use crate::geom::{squared_dist, HalfOpenInterval, Point, PointSeq};
use crate::interval::{narrow_from, ThresholdCounter};
use crate::parametric::{self, Pending, SearchParams, Simulation};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision<C> {
    Yes(C),
    No,
}

impl<C> Decision<C> {
    pub fn is_yes(&self) -> bool {
        matches!(self, Decision::Yes(_))
    }

    pub fn certificate(&self) -> Option<&C> {
        match self {
            Decision::Yes(c) => Some(c),
            Decision::No => None,
        }
    }
}

/// A monotone path of matrix positions from `(0, 0)`: right moves advance
/// `j` by one, upward moves skip to any higher row.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Staircase {
    pub steps: Vec<(usize, usize)>,
}

impl Staircase {
    /// Replays the staircase under the one-sided move rules at `delta_sq` and
    /// checks that it ends at `(m - 1, n - 1)`.
    pub fn is_valid(&self, a: &PointSeq, b: &PointSeq, delta_sq: f64) -> bool {
        let (m, n) = (a.len(), b.len());
        let Some(&first) = self.steps.first() else { return false };
        if first != (0, 0) || self.steps.last() != Some(&(m - 1, n - 1)) {
            return false;
        }
        let within = |&(i, j): &(usize, usize)| i < m && j < n && squared_dist(a[i], b[j]) <= delta_sq;
        if !self.steps.iter().all(within) {
            return false;
        }
        self.steps.windows(2).all(|w| {
            let ((i, j), (k, l)) = (w[0], w[1]);
            (k == i && l == j + 1) || (l == j && k > i)
        })
    }

    /// Same check under the two-sided rules, where right moves may skip too.
    pub fn is_valid_two_sided(&self, a: &PointSeq, b: &PointSeq, delta_sq: f64) -> bool {
        let (m, n) = (a.len(), b.len());
        self.steps.first() == Some(&(0, 0))
            && self.steps.last() == Some(&(m - 1, n - 1))
            && self.steps.iter().all(|&(i, j)| i < m && j < n && squared_dist(a[i], b[j]) <= delta_sq)
            && self.steps.windows(2).all(|w| {
                let ((i, j), (k, l)) = (w[0], w[1]);
                (k == i && l > j) || (l == j && k > i)
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Cursor {
    CheckStart,
    CheckEnd,
    TryRight,
    /// Looking for the lowest 1-entry at or above this row in column `j`.
    Climb(usize),
    Done(bool),
}

/// The greedy decision procedure as an explicit state machine, so that the
/// same transitions drive both concrete decisions and the parametric
/// simulation.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Greedy {
    m: usize,
    n: usize,
    i: usize,
    j: usize,
    cursor: Cursor,
}

impl Greedy {
    pub fn new(m: usize, n: usize) -> Self {
        Greedy { m, n, i: 0, j: 0, cursor: Cursor::CheckStart }
    }

    /// The matrix entry the procedure needs next.
    pub fn probe(&self) -> Option<(usize, usize)> {
        match self.cursor {
            Cursor::CheckStart => Some((0, 0)),
            Cursor::CheckEnd => Some((self.m - 1, self.n - 1)),
            Cursor::TryRight => Some((self.i, self.j + 1)),
            Cursor::Climb(k) => Some((k, self.j)),
            Cursor::Done(_) => None,
        }
    }

    pub fn result(&self) -> Option<bool> {
        match self.cursor {
            Cursor::Done(r) => Some(r),
            _ => None,
        }
    }

    /// Feeds the value of the probed entry; returns the new staircase
    /// position if the frogs moved.
    pub fn apply(&mut self, one: bool) -> Option<(usize, usize)> {
        let mut moved = None;
        self.cursor = match (self.cursor, one) {
            (Cursor::CheckStart | Cursor::CheckEnd, false) => Cursor::Done(false),
            (Cursor::CheckStart, true) => Cursor::CheckEnd,
            (Cursor::CheckEnd, true) => Cursor::TryRight,
            (Cursor::TryRight, true) => {
                self.j += 1;
                moved = Some((self.i, self.j));
                Cursor::TryRight
            }
            (Cursor::TryRight, false) => Cursor::Climb(self.i + 1),
            (Cursor::Climb(k), true) => {
                self.i = k;
                moved = Some((self.i, self.j));
                Cursor::TryRight
            }
            (Cursor::Climb(k), false) => Cursor::Climb(k + 1),
            (Cursor::Done(r), _) => Cursor::Done(r),
        };
        self.settle();
        moved
    }

    fn settle(&mut self) {
        loop {
            self.cursor = match self.cursor {
                Cursor::TryRight if self.i + 1 == self.m && self.j + 1 == self.n => Cursor::Done(true),
                // no right move out of the last column
                Cursor::TryRight if self.j + 1 == self.n => Cursor::Climb(self.i + 1),
                Cursor::Climb(k) if k >= self.m => Cursor::Done(false),
                _ => return,
            };
        }
    }
}

/// Greedy decision with the number of matrix entries it inspected.
pub fn decide_one_sided_with_probes(a: &PointSeq, b: &PointSeq, delta_sq: f64) -> (Decision<Staircase>, u64) {
    let (pa, pb) = (a.points(), b.points());
    let mut g = Greedy::new(pa.len(), pb.len());
    let mut steps = vec![(0, 0)];
    let mut probes = 0u64;
    while let Some((i, j)) = g.probe() {
        probes += 1;
        if let Some(p) = g.apply(squared_dist(pa[i], pb[j]) <= delta_sq) {
            steps.push(p);
        }
    }
    match g.result() {
        Some(true) => (Decision::Yes(Staircase { steps }), probes),
        _ => (Decision::No, probes),
    }
}

/// Yes iff the one-sided distance is at most `sqrt(delta_sq)`. The
/// certificate is the lowest staircase: right moves are preferred and upward
/// moves land on the lowest 1-entry.
pub fn decide_one_sided(a: &PointSeq, b: &PointSeq, delta_sq: f64) -> Decision<Staircase> {
    decide_one_sided_with_probes(a, b, delta_sq).0
}

fn decide_bool(a: &[Point], b: &[Point], delta_sq: f64) -> bool {
    let mut g = Greedy::new(a.len(), b.len());
    while let Some((i, j)) = g.probe() {
        g.apply(squared_dist(a[i], b[j]) <= delta_sq);
    }
    g.result() == Some(true)
}

#[derive(Clone)]
struct GreedySim<'x> {
    a: &'x [Point],
    b: &'x [Point],
    g: Greedy,
}

impl Simulation for GreedySim<'_> {
    fn pending(&self) -> Pending {
        match self.g.probe() {
            Some((i, j)) => Pending::Test(Some(squared_dist(self.a[i], self.b[j]))),
            None => Pending::Done(self.g.result() == Some(true)),
        }
    }

    fn outcome(&self, lo: f64, _hi: f64) -> bool {
        let (i, j) = self.g.probe().expect("outcome queried on a finished run");
        squared_dist(self.a[i], self.b[j]) <= lo
    }

    fn apply(&mut self, outcome: bool) {
        self.g.apply(outcome);
    }
}

/// Default interval size target for the one-sided optimizer: `m + n`.
///
/// With the pair-sampling counter one narrowing round costs about
/// `mn log(m + n) / L` samples. The worst case of the search inside the
/// interval grows like `(m + n) sqrt(L)`, but the greedy run meets only a
/// handful of the interval's values in practice, so a large `L` is cheaper
/// overall.
pub fn default_l(m: usize, n: usize) -> usize {
    (m + n).clamp(1, (m * n).max(1))
}

/// Exact optimum inside `interval`, which must contain it. `l` only tunes the
/// phase lengths.
pub fn bifurcation_search(a: &PointSeq, b: &PointSeq, interval: HalfOpenInterval, l: usize) -> Result<f64> {
    let (pa, pb) = (a.points(), b.points());
    let params = SearchParams {
        bifurcation_budget: usize::MAX,
        ..SearchParams::new(pa.len() + pb.len(), l)
    };
    let sim = GreedySim { a: pa, b: pb, g: Greedy::new(pa.len(), pb.len()) };
    let out = parametric::bifurcation_search(sim, interval.lo, interval.hi, params, |d| decide_bool(pa, pb, d))?;
    Ok(out.value)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneSidedResult {
    pub delta_star_sq: f64,
    pub certificate: Staircase,
    pub stats: Stats,
}

/// Exact one-sided optimum: interval narrowing by sampled pair distances,
/// then the bifurcation search inside the narrowed interval. Failed random
/// attempts are restarted up to `cfg.max_retries` times.
pub fn optimize_one_sided(a: &PointSeq, b: &PointSeq, cfg: &OptimizeConfig) -> Result<OneSidedResult> {
    let (pa, pb) = (a.points(), b.points());
    let (m, n) = (pa.len(), pb.len());
    let l = cfg.l.unwrap_or_else(|| default_l(m, n)).clamp(1, m * n);
    let mut stats = Stats { interval_size_target: l as u64, ..Stats::default() };

    let lb = squared_dist(pa[0], pb[0]).max(squared_dist(pa[m - 1], pb[n - 1]));
    stats.decisions += 1;
    let value = if decide_bool(pa, pb, lb) {
        lb
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let counter = ThresholdCounter::new(cfg.backend, cfg.sampling);
        let mut last = String::new();
        let mut found = None;
        for attempt in 0..=cfg.max_retries {
            stats.retries = attempt;
            let start = HalfOpenInterval { lo: lb, hi: f64::INFINITY };
            let narrowed = narrow_from(a, b, start, l, &counter, &mut rng, |d| {
                stats.decisions += 1;
                decide_bool(pa, pb, d)
            });
            let narrowed = match narrowed {
                Ok(nw) => nw,
                Err(Error::AttemptFailed(msg)) => {
                    last = msg;
                    continue;
                }
                Err(e) => return Err(e),
            };
            stats.narrowing_rounds += narrowed.rounds;
            let sim = GreedySim { a: pa, b: pb, g: Greedy::new(m, n) };
            let iv = narrowed.interval;
            match parametric::bifurcation_search(sim, iv.lo, iv.hi, SearchParams::new(m + n, l), |d| {
                decide_bool(pa, pb, d)
            }) {
                Ok(out) => {
                    stats.bifurcations += out.bifurcations;
                    stats.phases += out.phases;
                    stats.decisions += out.decisions;
                    found = Some(out.value);
                    break;
                }
                Err(Error::AttemptFailed(msg)) => last = msg,
                Err(e) => return Err(e),
            }
        }
        match found {
            Some(v) => v,
            None => return Err(Error::RetriesExhausted { retries: cfg.max_retries, last }),
        }
    };
    let (decision, probes) = decide_one_sided_with_probes(a, b, value);
    stats.probes = probes;
    match decision {
        Decision::Yes(certificate) => Ok(OneSidedResult { delta_star_sq: value, certificate, stats }),
        Decision::No => Err(Error::AttemptFailed(format!("optimum {value} does not pass the decision"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(c: &[(f64, f64)]) -> PointSeq {
        PointSeq::from_xy(c).unwrap()
    }

    #[test]
    fn single_pair() {
        let a = seq(&[(0., 0.)]);
        let b = seq(&[(3., 4.)]);
        assert_eq!(decide_one_sided(&a, &b, 25.0), Decision::Yes(Staircase { steps: vec![(0, 0)] }));
        assert_eq!(decide_one_sided(&a, &b, 24.0), Decision::No);
        let r = optimize_one_sided(&a, &b, &OptimizeConfig::default()).unwrap();
        assert_eq!(r.delta_star_sq, 25.0);
        let iv = HalfOpenInterval::new(16.0, 36.0).unwrap();
        assert_eq!(bifurcation_search(&a, &b, iv, 1).unwrap(), 25.0);
    }

    #[test]
    fn outlier_is_skipped() {
        let a = seq(&[(0., 0.), (5., 5.), (0., 2.)]);
        let b = seq(&[(0., 0.), (0., 2.)]);
        let d = decide_one_sided(&a, &b, 4.0);
        assert_eq!(d, Decision::Yes(Staircase { steps: vec![(0, 0), (0, 1), (2, 1)] }));
        assert!(d.certificate().unwrap().is_valid(&a, &b, 4.0));
        let r = optimize_one_sided(&a, &b, &OptimizeConfig::default()).unwrap();
        assert_eq!(r.delta_star_sq, 4.0);
        let iv = HalfOpenInterval::new(1.0, 9.0).unwrap();
        assert_eq!(bifurcation_search(&a, &b, iv, 6).unwrap(), 4.0);
    }

    #[test]
    fn no_cheap_move_from_start() {
        let a = seq(&[(0., 0.), (0., 2.)]);
        let b = seq(&[(0., 0.), (0., 2.)]);
        let r = optimize_one_sided(&a, &b, &OptimizeConfig::default()).unwrap();
        assert_eq!(r.delta_star_sq, 4.0);
        assert!(r.certificate.is_valid(&a, &b, 4.0));
    }

    #[test]
    fn probes_are_linear() {
        let a = PointSeq::new((0..200).map(|k| Point::new(k as f64, (k % 7) as f64)).collect()).unwrap();
        let b = PointSeq::new((0..150).map(|k| Point::new(k as f64 * 1.3, 0.0)).collect()).unwrap();
        for d in [0.5, 4.0, 30.0, 1e9] {
            let (_, probes) = decide_one_sided_with_probes(&a, &b, d);
            assert!(probes <= 2 * (200 + 150) + 2, "{probes}");
        }
    }
}

//! Two-sided discrete Fréchet distance with shortcuts: both frogs may skip.
//!
//! The decision sweeps the rows of the threshold matrix over an edge-disjoint
//! biclique cover of the `<= δ` pairs, keeping for every biclique the
//! smallest column at which it holds a position reachable from below.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{Backend, OptimizeConfig, Stats};
use crate::error::{Error, Result};
use crate::geom::{squared_dist, HalfOpenInterval, PointSeq};
use crate::interval::{narrow_from, ThresholdCounter};
use crate::one_sided::Staircase;
use crate::quadtree::{Class, Piece, QuadTree};

pub const UNREACHED: usize = usize::MAX;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Biclique {
    pub a_side: Vec<usize>,
    pub b_side: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BicliqueCover {
    pub bicliques: Vec<Biclique>,
    /// Biclique ids touching each row.
    pub row_incidence: Vec<Vec<usize>>,
    /// `(biclique id, position of the column in its b_side)` per column.
    pub col_incidence: Vec<Vec<(usize, usize)>>,
}

impl BicliqueCover {
    /// Builds the incidence lists; sides are sorted here.
    pub fn from_bicliques(m: usize, n: usize, mut bicliques: Vec<Biclique>) -> Self {
        let mut row_incidence = vec![Vec::new(); m];
        let mut col_incidence = vec![Vec::new(); n];
        for (t, bc) in bicliques.iter_mut().enumerate() {
            bc.a_side.sort_unstable();
            bc.b_side.sort_unstable();
            for &i in &bc.a_side {
                row_incidence[i].push(t);
            }
            for (pos, &j) in bc.b_side.iter().enumerate() {
                col_incidence[j].push((t, pos));
            }
        }
        BicliqueCover { bicliques, row_incidence, col_incidence }
    }

    pub fn len(&self) -> usize {
        self.bicliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bicliques.is_empty()
    }

    /// Total size of all b-sides.
    pub fn b_volume(&self) -> usize {
        self.bicliques.iter().map(|bc| bc.b_side.len()).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bicliques
            .iter()
            .flat_map(|bc| bc.a_side.iter().flat_map(move |&i| bc.b_side.iter().map(move |&j| (i, j))))
    }

    /// Checks sortedness, edge-disjointness and that the edges are exactly
    /// the pairs within `delta_sq`.
    pub fn validate(&self, a: &PointSeq, b: &PointSeq, delta_sq: f64) -> Result<()> {
        let (m, n) = (a.len(), b.len());
        let mut seen = vec![false; m * n];
        for (t, bc) in self.bicliques.iter().enumerate() {
            let strictly_sorted = |v: &[usize]| v.windows(2).all(|w| w[0] < w[1]);
            if bc.a_side.is_empty() || bc.b_side.is_empty() || !strictly_sorted(&bc.a_side) || !strictly_sorted(&bc.b_side) {
                return Err(Error::MalformedCover(format!("biclique {t} has an empty or unsorted side")));
            }
            for &i in &bc.a_side {
                for &j in &bc.b_side {
                    if i >= m || j >= n {
                        return Err(Error::MalformedCover(format!("pair ({i}, {j}) out of range")));
                    }
                    if std::mem::replace(&mut seen[i * n + j], true) {
                        return Err(Error::MalformedCover(format!("pair ({i}, {j}) covered twice")));
                    }
                    if squared_dist(a[i], b[j]) > delta_sq {
                        return Err(Error::MalformedCover(format!("pair ({i}, {j}) is farther than δ")));
                    }
                }
            }
        }
        for i in 0..m {
            for j in 0..n {
                if !seen[i * n + j] && squared_dist(a[i], b[j]) <= delta_sq {
                    return Err(Error::MalformedCover(format!("pair ({i}, {j}) is missing")));
                }
            }
        }
        Ok(())
    }
}

/// One star `{a_i} × {b_j : |a_i - b_j|² <= δ²}` per stone with a neighbour.
pub fn build_cover_naive(a: &PointSeq, b: &PointSeq, delta_sq: f64) -> BicliqueCover {
    let bicliques = a
        .points()
        .iter()
        .enumerate()
        .filter_map(|(i, &p)| {
            let b_side: Vec<usize> = (0..b.len()).filter(|&j| squared_dist(p, b[j]) <= delta_sq).collect();
            (!b_side.is_empty()).then(|| Biclique { a_side: vec![i], b_side })
        })
        .collect();
    BicliqueCover::from_bicliques(a.len(), b.len(), bicliques)
}

/// Quadtree on `B`: a cell inside a stone's disk joins that stone to the
/// cell's block, a cell outside drops it, crossing cells recurse and end in
/// stars at the leaves.
pub fn build_cover_hierarchical(a: &PointSeq, b: &PointSeq, delta_sq: f64) -> BicliqueCover {
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
    let mut bicliques = Vec::new();
    tree.decompose(pa, &classify, 0, &mut |piece| match piece {
        Piece::Block { a: ai, node } => bicliques.push(Biclique {
            a_side: ai.iter().map(|&i| i as usize).collect(),
            b_side: tree.node_ids(node).to_vec(),
        }),
        Piece::Leaf { a: ai, node } => {
            for &i in ai {
                let p = pa[i as usize];
                let b_side: Vec<usize> = tree
                    .node_ids(node)
                    .iter()
                    .zip(tree.node_points(node))
                    .filter(|(_, &q)| squared_dist(p, q) <= delta_sq)
                    .map(|(&j, _)| j)
                    .collect();
                if !b_side.is_empty() {
                    bicliques.push(Biclique { a_side: vec![i as usize], b_side });
                }
            }
        }
    });
    BicliqueCover::from_bicliques(a.len(), b.len(), bicliques)
}

/// Row sweep over a cover. Exposed step by step so the reachability
/// variables can be inspected between rows.
#[derive(Clone, Debug)]
pub struct Sweep<'c> {
    cover: &'c BicliqueCover,
    v: Vec<usize>,
    /// Flattened alive flags, `offset[t] + pos`.
    alive: Vec<bool>,
    offset: Vec<usize>,
    /// One past the last possibly-alive position of each b-side.
    tail: Vec<usize>,
    steps: u64,
}

impl<'c> Sweep<'c> {
    pub fn new(cover: &'c BicliqueCover) -> Self {
        let mut offset = Vec::with_capacity(cover.len());
        let mut total = 0;
        for bc in &cover.bicliques {
            offset.push(total);
            total += bc.b_side.len();
        }
        Sweep {
            cover,
            v: vec![UNREACHED; cover.len()],
            alive: vec![true; total],
            offset,
            tail: cover.bicliques.iter().map(|bc| bc.b_side.len()).collect(),
            steps: 0,
        }
    }

    /// Reachability variable of biclique `t`.
    pub fn v(&self, t: usize) -> usize {
        self.v[t]
    }

    /// Leftmost column of row `i` reachable from below (row 0 starts at 0).
    pub fn row_min(&self, i: usize) -> usize {
        if i == 0 {
            return 0;
        }
        self.cover.row_incidence[i].iter().map(|&t| self.v[t]).min().unwrap_or(UNREACHED)
    }

    /// List-traversal steps so far, for the work bound.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Gathers the reachable entries of row `i` and pushes them to every
    /// biclique sharing their columns, deleting those columns as it goes.
    pub fn process_row(&mut self, i: usize) {
        let y = self.row_min(i);
        if y == UNREACHED {
            return;
        }
        for &t in &self.cover.row_incidence[i] {
            let b_side = &self.cover.bicliques[t].b_side;
            let mut pos = self.tail[t];
            while pos > 0 {
                self.steps += 1;
                let l = b_side[pos - 1];
                if l < y {
                    break;
                }
                if self.alive[self.offset[t] + pos - 1] {
                    for &(u, p) in &self.cover.col_incidence[l] {
                        self.v[u] = self.v[u].min(l);
                        self.alive[self.offset[u] + p] = false;
                    }
                }
                pos -= 1;
            }
            // everything from `pos` up is dead now
            self.tail[t] = pos;
        }
    }
}

/// Decision over a cover of the `<= δ` pairs. `start_ok` and `end_ok` are the
/// tests of the first and last position.
pub fn decide_two_sided(cover: &BicliqueCover, m: usize, n: usize, start_ok: bool, end_ok: bool) -> bool {
    decide_two_sided_with_steps(cover, m, n, start_ok, end_ok).0
}

pub fn decide_two_sided_with_steps(cover: &BicliqueCover, m: usize, n: usize, start_ok: bool, end_ok: bool) -> (bool, u64) {
    debug_assert_eq!(cover.row_incidence.len(), m);
    debug_assert_eq!(cover.col_incidence.len(), n);
    if !start_ok || !end_ok {
        return (false, 0);
    }
    let mut sweep = Sweep::new(cover);
    for i in 0..m {
        if i + 1 == m {
            return (sweep.row_min(i) != UNREACHED, sweep.steps());
        }
        sweep.process_row(i);
    }
    unreachable!("m >= 1")
}

/// Builds the cover for `backend` and runs the decision.
pub fn decide_two_sided_at(a: &PointSeq, b: &PointSeq, delta_sq: f64, backend: Backend) -> bool {
    let (m, n) = (a.len(), b.len());
    let start_ok = squared_dist(a[0], b[0]) <= delta_sq;
    let end_ok = squared_dist(a[m - 1], b[n - 1]) <= delta_sq;
    if !start_ok || !end_ok {
        return false;
    }
    let cover = build_cover(a, b, delta_sq, backend);
    decide_two_sided(&cover, m, n, true, true)
}

pub fn build_cover(a: &PointSeq, b: &PointSeq, delta_sq: f64, backend: Backend) -> BicliqueCover {
    match backend {
        Backend::NaiveCover => build_cover_naive(a, b, delta_sq),
        _ => build_cover_hierarchical(a, b, delta_sq),
    }
}

/// A two-sided staircase to `(m - 1, n - 1)` at `delta_sq`, if there is one.
///
/// Row by row, the reachable entries of row `i` are its 1-entries from the
/// leftmost 1-entry whose column was reached in an earlier row; the path is
/// read back from the first row each column was reached in.
pub fn witness(a: &PointSeq, b: &PointSeq, delta_sq: f64) -> Option<Staircase> {
    let (m, n) = (a.len(), b.len());
    let one = |i: usize, j: usize| squared_dist(a[i], b[j]) <= delta_sq;
    if !one(0, 0) || !one(m - 1, n - 1) {
        return None;
    }
    let mut first_row = vec![UNREACHED; n];
    let mut entry = vec![UNREACHED; m];
    entry[0] = 0;
    #[allow(clippy::needless_range_loop)]
    for i in 0..m {
        if i > 0 {
            entry[i] = (0..n).find(|&l| first_row[l] < i && one(i, l)).unwrap_or(UNREACHED);
        }
        if entry[i] == UNREACHED {
            continue;
        }
        for (l, row) in first_row.iter_mut().enumerate().skip(entry[i]) {
            if *row == UNREACHED && one(i, l) {
                *row = i;
            }
        }
    }
    if entry[m - 1] == UNREACHED {
        return None;
    }
    let mut steps = vec![(m - 1, n - 1)];
    let (mut i, mut j) = (m - 1, n - 1);
    while (i, j) != (0, 0) {
        if j != entry[i] {
            j = entry[i];
        } else {
            i = first_row[j];
        }
        steps.push((i, j));
    }
    steps.reverse();
    Some(Staircase { steps })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoSidedResult {
    pub delta_star_sq: f64,
    pub stats: Stats,
}

/// Candidate lists above this size are narrowed by sampling before sorting.
pub const FULL_SORT_LIMIT: usize = 10_000_000;

/// Exact two-sided optimum by binary search over the pair distances.
pub fn optimize_two_sided(a: &PointSeq, b: &PointSeq, cfg: &OptimizeConfig) -> Result<TwoSidedResult> {
    let (pa, pb) = (a.points(), b.points());
    let (m, n) = (pa.len(), pb.len());
    let mut stats = Stats::default();
    let decide = |d: f64, stats: &mut Stats| {
        stats.decisions += 1;
        decide_two_sided_at(a, b, d, cfg.backend)
    };
    let lb = squared_dist(pa[0], pb[0]).max(squared_dist(pa[m - 1], pb[n - 1]));
    let mut window = HalfOpenInterval { lo: lb, hi: f64::INFINITY };
    if decide(lb, &mut stats) {
        return finish(a, b, lb, cfg.backend, stats);
    }
    if m * n > FULL_SORT_LIMIT {
        let l = cfg.l.unwrap_or(FULL_SORT_LIMIT / 4).clamp(1, m * n);
        stats.interval_size_target = l as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let counter = ThresholdCounter::new(Backend::Sampling, cfg.sampling);
        let mut last = String::new();
        let mut done = false;
        for attempt in 0..=cfg.max_retries {
            stats.retries = attempt;
            let mut calls = 0;
            let res = narrow_from(a, b, window, l, &counter, &mut rng, |d| {
                calls += 1;
                decide_two_sided_at(a, b, d, cfg.backend)
            });
            stats.decisions += calls;
            match res {
                Ok(nw) => {
                    stats.narrowing_rounds += nw.rounds;
                    window = nw.interval;
                    done = true;
                    break;
                }
                Err(Error::AttemptFailed(msg)) => last = msg,
                Err(e) => return Err(e),
            }
        }
        if !done {
            return Err(Error::RetriesExhausted { retries: cfg.max_retries, last });
        }
    }
    let mut cands: Vec<f64> = pa
        .iter()
        .flat_map(|&p| pb.iter().map(move |&q| squared_dist(p, q)))
        .filter(|&d| window.contains(d))
        .collect();
    cands.sort_unstable_by(f64::total_cmp);
    cands.dedup();
    // the top of a bounded window is a validated yes
    let (mut lo, mut hi) = (0, cands.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        if decide(cands[mid], &mut stats) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let value = cands.get(lo).copied().unwrap_or(window.hi);
    if !value.is_finite() {
        return Err(Error::AttemptFailed("no candidate passes the decision".into()));
    }
    finish(a, b, value, cfg.backend, stats)
}

fn finish(a: &PointSeq, b: &PointSeq, value: f64, backend: Backend, mut stats: Stats) -> Result<TwoSidedResult> {
    let (m, n) = (a.len(), b.len());
    let cover = build_cover(a, b, value, backend);
    let (_, steps) = decide_two_sided_with_steps(&cover, m, n, true, true);
    stats.probes = steps;
    Ok(TwoSidedResult { delta_star_sq: value, stats })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(c: &[(f64, f64)]) -> PointSeq {
        PointSeq::from_xy(c).unwrap()
    }

    fn edge_set(c: &BicliqueCover) -> Vec<(usize, usize)> {
        let mut e: Vec<_> = c.edges().collect();
        e.sort_unstable();
        e
    }

    #[test]
    fn naive_cover_examples() {
        let a = seq(&[(0., 0.)]);
        let b = seq(&[(3., 4.)]);
        let c = build_cover_naive(&a, &b, 25.0);
        assert_eq!(c.bicliques, vec![Biclique { a_side: vec![0], b_side: vec![0] }]);
        assert!(build_cover_naive(&a, &b, 24.0).is_empty());

        let a = seq(&[(0., 0.), (0., 2.)]);
        let c = build_cover_naive(&a, &a.clone(), 4.0);
        assert_eq!(
            c.bicliques,
            vec![
                Biclique { a_side: vec![0], b_side: vec![0, 1] },
                Biclique { a_side: vec![1], b_side: vec![0, 1] },
            ]
        );
        c.validate(&a, &a, 4.0).unwrap();
    }

    #[test]
    fn decision_examples() {
        let a = seq(&[(0., 0.), (0., 2.)]);
        assert!(decide_two_sided_at(&a, &a, 4.0, Backend::NaiveCover));
        let a = seq(&[(0., 0.), (9., 9.), (0., 2.)]);
        let b = seq(&[(0., 0.), (7., -7.), (0., 2.)]);
        for backend in [Backend::NaiveCover, Backend::Hierarchical] {
            assert!(decide_two_sided_at(&a, &b, 4.0, backend));
            assert!(!decide_two_sided_at(&a, &b, 3.99, backend));
        }
        let r = optimize_two_sided(&a, &b, &OptimizeConfig::default()).unwrap();
        assert_eq!(r.delta_star_sq, 4.0);
        let r = optimize_two_sided(&seq(&[(0., 0.)]), &seq(&[(3., 4.)]), &OptimizeConfig::default()).unwrap();
        assert_eq!(r.delta_star_sq, 25.0);
    }

    #[test]
    fn witness_paths() {
        let a = seq(&[(0., 0.), (9., 9.), (0., 2.)]);
        let b = seq(&[(0., 0.), (7., -7.), (0., 2.)]);
        let w = witness(&a, &b, 4.0).unwrap();
        assert!(w.is_valid_two_sided(&a, &b, 4.0));
        assert!(witness(&a, &b, 3.99).is_none());
        let a = seq(&[(0., 0.)]);
        assert_eq!(witness(&a, &a, 0.0).unwrap().steps, vec![(0, 0)]);
    }

    #[test]
    fn figure_cover_is_edge_disjoint() {
        // 1-based labels from the figure, shifted to 0-based
        let raw: [(&[usize], &[usize]); 8] = [
            (&[1, 2], &[1, 2]),
            (&[1, 3, 5], &[4, 6]),
            (&[1, 3], &[7, 11]),
            (&[2, 3, 5], &[5, 8, 9]),
            (&[4, 7, 8], &[3, 4]),
            (&[4, 7], &[8, 10]),
            (&[6], &[9, 11]),
            (&[8], &[9, 12]),
        ];
        let bicliques = raw
            .iter()
            .map(|(a, b)| Biclique {
                a_side: a.iter().map(|x| x - 1).collect(),
                b_side: b.iter().map(|x| x - 1).collect(),
            })
            .collect();
        let cover = BicliqueCover::from_bicliques(8, 12, bicliques);
        let edges = edge_set(&cover);
        let mut dedup = edges.clone();
        dedup.dedup();
        assert_eq!(edges, dedup);
        assert_eq!(edges.len(), 4 + 6 + 4 + 9 + 6 + 4 + 2 + 2);
    }

    #[test]
    fn clustered_cover_merges_blocks() {
        let mut pts = Vec::new();
        for k in 0..30 {
            let off = if k % 2 == 0 { 0.0 } else { 1000.0 };
            pts.push((off + (k % 5) as f64 * 0.1, (k % 3) as f64 * 0.1));
        }
        let a = seq(&pts);
        let b = seq(&pts);
        let c = build_cover_hierarchical(&a, &b, 4.0);
        c.validate(&a, &b, 4.0).unwrap();
        assert!(c.len() < a.len(), "{} bicliques", c.len());
        assert_eq!(edge_set(&c), edge_set(&build_cover_naive(&a, &b, 4.0)));
    }
}

//! Semi-continuous Fréchet distance with shortcuts: a frog jumps forward
//! along the stones `A` while a person walks the whole polygonal curve `f`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{ln_size, OptimizeConfig, Stats};
use crate::error::{Error, GeomError, Result};
use crate::geom::{
    disk_line_roots, exit_unchecked, point_point_edge_value, squared_dist, within, CurvePoint, DiskExit, HalfOpenInterval,
    Point, PointSeq, PolyCurve,
};
use crate::one_sided::Decision;
use crate::parametric::{self, Pending, SearchParams, Simulation};

/// Positions `(stone index, person position)` visited by the decision.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SemiPath {
    pub steps: Vec<(usize, CurvePoint)>,
}

impl SemiPath {
    /// Replays the path at `delta_sq`: continuous moves keep the stone and
    /// advance the person inside its disk, jumps keep the person and move to a
    /// later stone whose disk contains it.
    pub fn is_valid(&self, a: &PointSeq, f: &PolyCurve, delta_sq: f64) -> bool {
        let n = f.edge_count();
        let (Some(first), Some(last)) = (self.steps.first(), self.steps.last()) else { return false };
        if first.0 != 0 || first.1 != f.start() || last.0 != a.len() - 1 || !f.is_end(last.1) {
            return false;
        }
        let inside = |i: usize, cp: CurvePoint| i < a.len() && cp.edge < n && within(squared_dist(a[i], f.point_at(cp)), delta_sq);
        self.steps.iter().all(|&(i, cp)| inside(i, cp))
            && self.steps.windows(2).all(|w| {
                let ((i, x), (k, y)) = (w[0], w[1]);
                if i == k {
                    // a disk is convex, so checking the vertices in between suffices
                    x.param() <= y.param() && (x.edge + 1..=y.edge).all(|v| within(squared_dist(a[i], f.vertex(v)), delta_sq))
                } else {
                    k > i && x.param() == y.param()
                }
            })
    }
}

/// Forward end of the component of `f ∩ D(a)` that contains `x`.
pub fn next_endpoint(f: &PolyCurve, x: CurvePoint, a: Point, delta_sq: f64) -> Result<CurvePoint, GeomError> {
    if !within(squared_dist(a, f.point_at(x)), delta_sq) {
        return Err(GeomError::OutsideDisk);
    }
    Ok(next_endpoint_counted(f, x, a, delta_sq, &mut 0))
}

fn next_endpoint_counted(f: &PolyCurve, x: CurvePoint, a: Point, delta_sq: f64, probes: &mut u64) -> CurvePoint {
    let n = f.edge_count();
    if f.is_end(x) {
        return x;
    }
    let mut e = x.edge;
    loop {
        *probes += 1;
        if within(squared_dist(a, f.vertex(e + 1)), delta_sq) {
            if e + 1 == n {
                return f.end();
            }
            e += 1;
            continue;
        }
        let start_t = if e == x.edge { x.t } else { 0.0 };
        return match exit_unchecked(a, delta_sq, &f.edge(e), start_t) {
            DiskExit::Exit(t) => CurvePoint::new(e, t).canonical(n),
            DiskExit::StaysInside => CurvePoint::vertex(e + 1, n),
        };
    }
}

/// Smallest `j > i` whose disk contains `x`.
pub fn next_disk(a: &PointSeq, f: &PolyCurve, x: CurvePoint, i: usize, delta_sq: f64) -> Option<usize> {
    next_disk_counted(a.points(), f.point_at(x), i, delta_sq, &mut 0)
}

fn next_disk_counted(a: &[Point], x: Point, i: usize, delta_sq: f64, probes: &mut u64) -> Option<usize> {
    (i + 1..a.len()).find(|&j| {
        *probes += 1;
        within(squared_dist(a[j], x), delta_sq)
    })
}

pub fn decide_semi(a: &PointSeq, f: &PolyCurve, delta_sq: f64) -> Decision<SemiPath> {
    decide_semi_with_probes(a, f, delta_sq).0
}

/// The greedy decision: walk as far as the current disk allows, then jump to
/// the first later stone whose disk holds the person.
pub fn decide_semi_with_probes(a: &PointSeq, f: &PolyCurve, delta_sq: f64) -> (Decision<SemiPath>, u64) {
    let pa = a.points();
    let m = pa.len();
    let mut probes = 1u64;
    let mut x = f.start();
    if !within(squared_dist(pa[0], f.point_at(x)), delta_sq) {
        return (Decision::No, probes);
    }
    let mut frog = 0;
    let mut steps = vec![(0, x)];
    loop {
        x = next_endpoint_counted(f, x, pa[frog], delta_sq, &mut probes);
        steps.push((frog, x));
        if frog == m - 1 && f.is_end(x) {
            return (Decision::Yes(SemiPath { steps }), probes);
        }
        match next_disk_counted(pa, f.point_at(x), frog, delta_sq, &mut probes) {
            Some(l) => {
                frog = l;
                steps.push((l, x));
            }
            None => return (Decision::No, probes),
        }
    }
}

fn decide_bool(a: &PointSeq, f: &PolyCurve, delta_sq: f64) -> bool {
    decide_semi(a, f, delta_sq).is_yes()
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Pos {
    Vertex(usize),
    /// Where the disk of `a_center` leaves `edge`; moves with δ.
    Exit { center: usize, edge: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Phase {
    Start,
    /// Testing whether the far vertex of `edge` is inside the frog's disk.
    Endpoint { edge: usize },
    /// Testing whether stone `next` can take over at the current position.
    Disk { next: usize },
    Done(bool),
}

/// The decision procedure run at a generic, unknown δ.
#[derive(Clone)]
struct SemiSim<'x> {
    a: &'x PointSeq,
    f: &'x PolyCurve,
    frog: usize,
    pos: Pos,
    phase: Phase,
}

impl<'x> SemiSim<'x> {
    fn new(a: &'x PointSeq, f: &'x PolyCurve) -> Self {
        SemiSim { a, f, frog: 0, pos: Pos::Vertex(0), phase: Phase::Start }
    }

    fn disk_from(&self, next: usize) -> Phase {
        if next >= self.a.len() {
            Phase::Done(false)
        } else {
            Phase::Disk { next }
        }
    }

    /// Phase after the person reached the end of the curve.
    fn at_end(&self) -> Phase {
        if self.frog + 1 == self.a.len() {
            Phase::Done(true)
        } else {
            self.disk_from(self.frog + 1)
        }
    }

    fn critical(&self) -> Option<f64> {
        let (a, f) = (self.a, self.f);
        match self.phase {
            Phase::Start => Some(squared_dist(a[0], f.vertex(0))),
            Phase::Endpoint { edge } => Some(squared_dist(a[self.frog], f.vertex(edge + 1))),
            Phase::Disk { next } => match self.pos {
                Pos::Vertex(k) => Some(squared_dist(a[next], f.vertex(k))),
                Pos::Exit { center, edge } => point_point_edge_value(a, f, center, next, edge),
            },
            Phase::Done(_) => None,
        }
    }
}

impl Simulation for SemiSim<'_> {
    fn pending(&self) -> Pending {
        match self.phase {
            Phase::Done(r) => Pending::Done(r),
            _ => Pending::Test(self.critical()),
        }
    }

    fn outcome(&self, lo: f64, hi: f64) -> bool {
        match (self.phase, self.pos) {
            (Phase::Disk { next }, Pos::Exit { center, edge }) => {
                // the exit point moves with δ; the answer is constant on the
                // interval, so evaluate it at one value inside
                let d = HalfOpenInterval { lo, hi }.representative();
                let seg = self.f.edge(edge);
                let t = disk_line_roots(self.a[center], d, &seg).map_or(0.0, |(_, t2)| t2.clamp(0.0, 1.0));
                within(squared_dist(self.a[next], seg.point_at(t)), d)
            }
            _ => self.critical().is_some_and(|c| c <= lo),
        }
    }

    fn apply(&mut self, o: bool) {
        let n = self.f.edge_count();
        self.phase = match self.phase {
            Phase::Start if o => Phase::Endpoint { edge: 0 },
            Phase::Start => Phase::Done(false),
            Phase::Endpoint { edge } if o => {
                if edge + 1 == n {
                    self.pos = Pos::Vertex(n);
                    self.at_end()
                } else {
                    Phase::Endpoint { edge: edge + 1 }
                }
            }
            Phase::Endpoint { edge } => {
                self.pos = Pos::Exit { center: self.frog, edge };
                self.disk_from(self.frog + 1)
            }
            Phase::Disk { next } if o => {
                self.frog = next;
                match self.pos {
                    Pos::Exit { edge, .. } => Phase::Endpoint { edge },
                    Pos::Vertex(_) => self.at_end(),
                }
            }
            Phase::Disk { next } => self.disk_from(next + 1),
            Phase::Done(r) => Phase::Done(r),
        };
    }
}

/// `max(1, ceil(m^(4/3) n^(2/3) / (m + n)^(2/3)))`.
pub fn default_l_semi(m: usize, n: usize) -> usize {
    let (mf, nf) = (m as f64, n as f64);
    ((mf.powf(4.0 / 3.0) * nf.powf(2.0 / 3.0) / (mf + nf).powf(2.0 / 3.0)).ceil() as usize).max(1)
}

/// Number of potential critical values: stone pairs against edges plus
/// stones against vertices.
fn candidate_slots(m: usize, n: usize) -> (usize, usize) {
    (m * m.saturating_sub(1) / 2 * n, m * (n + 1))
}

/// Interval around the optimum that, with high probability, holds at most `l`
/// critical values.
pub fn narrow_interval_semi(a: &PointSeq, f: &PolyCurve, l: usize, seed: u64) -> Result<HalfOpenInterval> {
    if l == 0 {
        return Err(Error::InvalidParameter("L must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(narrow_semi_from(a, f, HalfOpenInterval::unbounded(), l, 4.0, &mut rng, &mut 0))
}

fn narrow_semi_from(
    a: &PointSeq,
    f: &PolyCurve,
    start: HalfOpenInterval,
    l: usize,
    c: f64,
    rng: &mut impl Rng,
    decisions: &mut u64,
) -> HalfOpenInterval {
    let (m, n) = (a.len(), f.edge_count());
    let (triples, pairs) = candidate_slots(m, n);
    if triples + pairs <= l {
        return start;
    }
    let draws = (c * (triples + pairs) as f64 * ln_size(m, n) / l as f64).ceil();
    let mut vals = Vec::new();
    if draws >= triples as f64 {
        for i in 0..m {
            for j in i + 1..m {
                vals.extend((0..n).filter_map(|e| point_point_edge_value(a, f, i, j, e)));
            }
        }
    } else {
        for _ in 0..draws as usize {
            let i = rng.random_range(0..m);
            let mut j = rng.random_range(0..m - 1);
            if j >= i {
                j += 1;
            }
            let e = rng.random_range(0..n);
            vals.extend(point_point_edge_value(a, f, i, j, e));
        }
    }
    if draws >= pairs as f64 {
        vals.extend((0..m).flat_map(|i| (0..=n).map(move |k| (i, k))).map(|(i, k)| squared_dist(a[i], f.vertex(k))));
    } else {
        for _ in 0..draws as usize {
            let i = rng.random_range(0..m);
            let k = rng.random_range(0..=n);
            vals.push(squared_dist(a[i], f.vertex(k)));
        }
    }
    vals.retain(|&v| start.contains_open(v));
    vals.sort_unstable_by(f64::total_cmp);
    vals.dedup();
    let (mut lo, mut hi) = (0, vals.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        *decisions += 1;
        if decide_bool(a, f, vals[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    HalfOpenInterval {
        lo: if lo > 0 { vals[lo - 1] } else { start.lo },
        hi: vals.get(lo).copied().unwrap_or(start.hi),
    }
}

/// Exact optimum inside `interval`, which must contain it.
pub fn bifurcation_search_semi(a: &PointSeq, f: &PolyCurve, interval: HalfOpenInterval, l: usize) -> Result<f64> {
    let params = SearchParams {
        bifurcation_budget: usize::MAX,
        ..SearchParams::new(a.len() + f.edge_count(), l)
    };
    let out = parametric::bifurcation_search(SemiSim::new(a, f), interval.lo, interval.hi, params, |d| decide_bool(a, f, d))?;
    Ok(out.value)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemiResult {
    pub delta_star_sq: f64,
    pub certificate: SemiPath,
    pub stats: Stats,
}

/// Exact optimum: sampled critical values narrow the range, then the
/// bifurcation search finishes inside it.
pub fn optimize_semi(a: &PointSeq, f: &PolyCurve, cfg: &OptimizeConfig) -> Result<SemiResult> {
    let (m, n) = (a.len(), f.edge_count());
    let l = cfg.l.unwrap_or_else(|| default_l_semi(m, n)).max(1);
    let mut stats = Stats { interval_size_target: l as u64, ..Stats::default() };
    let lb = squared_dist(a[0], f.vertex(0)).max(squared_dist(a[m - 1], f.vertex(n)));
    stats.decisions += 1;
    let value = if decide_bool(a, f, lb) {
        lb
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut last = String::new();
        let mut found = None;
        for attempt in 0..=cfg.max_retries {
            stats.retries = attempt;
            let start = HalfOpenInterval { lo: lb, hi: f64::INFINITY };
            let iv = narrow_semi_from(a, f, start, l, cfg.semi_sample_c, &mut rng, &mut stats.decisions);
            stats.narrowing_rounds += 1;
            match parametric::bifurcation_search(SemiSim::new(a, f), iv.lo, iv.hi, SearchParams::new(m + n, l), |d| {
                decide_bool(a, f, d)
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
    let (decision, probes) = decide_semi_with_probes(a, f, value);
    stats.probes = probes;
    match decision {
        Decision::Yes(certificate) => Ok(SemiResult { delta_star_sq: value, certificate, stats }),
        Decision::No => Err(Error::AttemptFailed(format!("optimum {value} does not pass the decision"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(c: &[(f64, f64)]) -> PointSeq {
        PointSeq::from_xy(c).unwrap()
    }

    fn curve(c: &[(f64, f64)]) -> PolyCurve {
        PolyCurve::from_xy(c).unwrap()
    }

    #[test]
    fn next_endpoint_examples() {
        let f = curve(&[(-2., 0.), (2., 0.)]);
        let x = CurvePoint::new(0, 0.25);
        let y = next_endpoint(&f, x, Point::new(0., 0.), 1.0).unwrap();
        assert_eq!(f.point_at(y), Point::new(1., 0.));
        let y = next_endpoint(&f, x, Point::new(0., 0.), 9.0).unwrap();
        assert_eq!(y, f.end());
        assert!(next_endpoint(&f, CurvePoint::new(0, 0.0), Point::new(0., 0.), 1.0).is_err());

        let f = curve(&[(0., 0.), (0.5, 0.), (0.5, 2.)]);
        let y = next_endpoint(&f, f.start(), Point::new(0., 0.), 1.0).unwrap();
        assert_eq!(y.edge, 1);
        let p = f.point_at(y);
        assert_eq!(p.x, 0.5);
        assert!((p.y - 0.75f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn next_disk_examples() {
        let a = seq(&[(0., 0.), (2., 0.), (5., 0.)]);
        let f = curve(&[(0., 0.), (2., 0.)]);
        let x = CurvePoint::new(0, 0.5);
        assert_eq!(next_disk(&a, &f, x, 0, 1.44), Some(1));
        assert_eq!(next_disk(&a, &f, x, 0, 0.25), None);
        assert_eq!(next_disk(&a, &f, x, 2, 100.0), None);
    }

    #[test]
    fn decision_examples() {
        let a = seq(&[(0., 0.)]);
        let f = curve(&[(0., 1.), (0., -1.)]);
        assert!(decide_semi(&a, &f, 1.0).is_yes());
        assert!(!decide_semi(&a, &f, 0.99).is_yes());

        let a = seq(&[(0., 0.), (2., 0.)]);
        let f = curve(&[(0., 0.5), (2., 0.5)]);
        let d = decide_semi(&a, &f, 1.25);
        assert!(d.certificate().unwrap().is_valid(&a, &f, 1.25));
        assert!(!decide_semi(&a, &f, 1.24).is_yes());
    }

    #[test]
    fn optimize_examples() {
        let cfg = OptimizeConfig::default();
        let a = seq(&[(0., 0.)]);
        let f = curve(&[(0., 1.), (0., -1.)]);
        assert_eq!(optimize_semi(&a, &f, &cfg).unwrap().delta_star_sq, 1.0);
        let iv = HalfOpenInterval::new(0.5, 2.0).unwrap();
        assert_eq!(bifurcation_search_semi(&a, &f, iv, 2).unwrap(), 1.0);

        let a = seq(&[(0., 0.), (2., 0.)]);
        let f = curve(&[(0., 0.5), (2., 0.5)]);
        assert_eq!(optimize_semi(&a, &f, &cfg).unwrap().delta_star_sq, 1.25);
        let iv = HalfOpenInterval::new(0.25, 4.25).unwrap();
        assert_eq!(bifurcation_search_semi(&a, &f, iv, 4).unwrap(), 1.25);

        let f = curve(&[(1., -1.), (1., 1.)]);
        assert_eq!(optimize_semi(&a, &f, &cfg).unwrap().delta_star_sq, 2.0);
    }

    #[test]
    fn narrowing_example() {
        let a = seq(&[(0., 0.), (2., 0.)]);
        let f = curve(&[(0., 0.5), (2., 0.5)]);
        for seed in 0..10 {
            let iv = narrow_interval_semi(&a, &f, 2, seed).unwrap();
            assert!(iv.contains(1.25));
            let inside = crate::geom::enumerate_critical_values(&a, &f)
                .iter()
                .filter(|c| iv.contains(c.value_sq))
                .count();
            assert!(inside <= 2, "{iv}: {inside}");
        }
        // 1 + 4 candidates fit into L = 5
        assert_eq!(narrow_interval_semi(&a, &f, 5, 0).unwrap(), HalfOpenInterval::unbounded());
    }
}

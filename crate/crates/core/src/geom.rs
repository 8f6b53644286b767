//! Planar geometry kernel.
//!
//! Every comparison in this crate is made on squared Euclidean distances.
//! All critical values (pair distances, point-vertex distances and
//! point-point-edge distances) have squares that are rational in the input
//! coordinates, so square roots only show up in user-facing output.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GeomError;

/// Relative tolerance used when two squared values must be treated as equal.
pub const REL_EPS: f64 = 1e-9;

/// `|a - b| <= 1e-9 * max(1, |a|, |b|)`.
pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_EPS * 1f64.max(a.abs()).max(b.abs())
}

/// Closed-disk membership with the crate-wide tolerance.
///
/// Used wherever a point derived from a disk/segment intersection is tested
/// against another disk; pair distances compared with pair distances use exact
/// `<=` instead.
#[inline]
pub fn within(dist_sq: f64, delta_sq: f64) -> bool {
    dist_sq <= delta_sq + REL_EPS * delta_sq.abs().max(1.0)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn try_new(x: f64, y: f64) -> Result<Self, GeomError> {
        let p = Point { x, y };
        if p.is_finite() {
            Ok(p)
        } else {
            Err(GeomError::NonFinite)
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    fn sub(self, o: Point) -> (f64, f64) {
        (self.x - o.x, self.y - o.y)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point { x, y }
    }
}

/// `‖p − q‖²`, evaluated as `dx*dx + dy*dy`.
///
/// The evaluation order is part of the contract: bounding-box bounds in the
/// spatial structures rely on the same expression to stay consistent with
/// per-pair tests under floating-point rounding.
#[inline]
pub fn squared_dist(p: Point, q: Point) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    dx * dx + dy * dy
}

/// A non-empty sequence of stones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct PointSeq(Vec<Point>);

impl PointSeq {
    pub fn new(points: Vec<Point>) -> Result<Self, GeomError> {
        if points.is_empty() {
            return Err(GeomError::EmptySequence);
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(GeomError::NonFinite);
        }
        Ok(PointSeq(points))
    }

    pub fn from_xy(coords: &[(f64, f64)]) -> Result<Self, GeomError> {
        Self::new(coords.iter().map(|&c| c.into()).collect())
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn points(&self) -> &[Point] {
        &self.0
    }

    pub fn first(&self) -> Point {
        self.0[0]
    }

    pub fn last(&self) -> Point {
        self.0[self.0.len() - 1]
    }
}

impl std::ops::Index<usize> for PointSeq {
    type Output = Point;
    fn index(&self, i: usize) -> &Point {
        &self.0[i]
    }
}

impl TryFrom<Vec<Point>> for PointSeq {
    type Error = GeomError;
    fn try_from(v: Vec<Point>) -> Result<Self, GeomError> {
        PointSeq::new(v)
    }
}

impl From<PointSeq> for Vec<Point> {
    fn from(s: PointSeq) -> Self {
        s.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub start: Point,
    pub end: Point,
}

impl Segment {
    pub fn new(start: Point, end: Point) -> Self {
        Segment { start, end }
    }

    /// Linear interpolation that returns the endpoints bit-exactly at 0 and 1.
    pub fn point_at(&self, t: f64) -> Point {
        if t <= 0.0 {
            return self.start;
        }
        if t >= 1.0 {
            return self.end;
        }
        Point::new(
            self.start.x + t * (self.end.x - self.start.x),
            self.start.y + t * (self.end.y - self.start.y),
        )
    }

    pub fn length_sq(&self) -> f64 {
        squared_dist(self.start, self.end)
    }
}

/// A polygonal curve `p_0 .. p_n` with `n >= 1` edges of positive length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct PolyCurve {
    vertices: Vec<Point>,
}

impl PolyCurve {
    pub fn new(vertices: Vec<Point>) -> Result<Self, GeomError> {
        if vertices.len() < 2 {
            return Err(GeomError::TooFewVertices(vertices.len()));
        }
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(GeomError::NonFinite);
        }
        if let Some(edge) = vertices.windows(2).position(|w| w[0] == w[1]) {
            return Err(GeomError::ZeroLengthEdge { edge });
        }
        Ok(PolyCurve { vertices })
    }

    pub fn from_xy(coords: &[(f64, f64)]) -> Result<Self, GeomError> {
        Self::new(coords.iter().map(|&c| c.into()).collect())
    }

    /// Number of edges `n`.
    pub fn edge_count(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, k: usize) -> Point {
        self.vertices[k]
    }

    /// Edge `e` runs from `p_e` to `p_{e+1}` (0-based).
    pub fn edge(&self, e: usize) -> Segment {
        Segment::new(self.vertices[e], self.vertices[e + 1])
    }

    pub fn start(&self) -> CurvePoint {
        CurvePoint::vertex(0, self.edge_count())
    }

    pub fn end(&self) -> CurvePoint {
        CurvePoint::vertex(self.edge_count(), self.edge_count())
    }

    pub fn point_at(&self, cp: CurvePoint) -> Point {
        self.edge(cp.edge).point_at(cp.t)
    }

    pub fn is_end(&self, cp: CurvePoint) -> bool {
        cp.edge + 1 == self.edge_count() && cp.t >= 1.0
    }
}

impl TryFrom<Vec<Point>> for PolyCurve {
    type Error = GeomError;
    fn try_from(v: Vec<Point>) -> Result<Self, GeomError> {
        PolyCurve::new(v)
    }
}

impl From<PolyCurve> for Vec<Point> {
    fn from(c: PolyCurve) -> Self {
        c.vertices
    }
}

/// A point on a curve: edge index (0-based) and parameter along that edge.
///
/// Vertex `p_k` with `k < n` is stored as `(k, 0.0)`, the final vertex `p_n`
/// as `(n - 1, 1.0)`. Ordering is lexicographic on `(edge, t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub edge: usize,
    pub t: f64,
}

impl CurvePoint {
    pub fn new(edge: usize, t: f64) -> Self {
        CurvePoint { edge, t }
    }

    pub fn vertex(k: usize, edge_count: usize) -> Self {
        if k >= edge_count {
            CurvePoint { edge: edge_count - 1, t: 1.0 }
        } else {
            CurvePoint { edge: k, t: 0.0 }
        }
    }

    /// Moves a point sitting at the end of a non-final edge to the start of
    /// the next one.
    pub fn canonical(self, edge_count: usize) -> Self {
        if self.t >= 1.0 && self.edge + 1 < edge_count {
            CurvePoint { edge: self.edge + 1, t: 0.0 }
        } else {
            CurvePoint { edge: self.edge, t: self.t.clamp(0.0, 1.0) }
        }
    }

    /// Global curve parameter `edge + t` in `[0, n]`.
    pub fn param(&self) -> f64 {
        self.edge as f64 + self.t
    }

    /// The vertex this point coincides with, if any.
    pub fn as_vertex(&self) -> Option<usize> {
        if self.t == 0.0 {
            Some(self.edge)
        } else if self.t >= 1.0 {
            Some(self.edge + 1)
        } else {
            None
        }
    }
}

impl PartialOrd for CurvePoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.edge.cmp(&other.edge).then(self.t.total_cmp(&other.t)))
    }
}

/// `(lo, hi]` over squared distances. `lo` may be `-inf` (no lower bound
/// known yet) and `hi` may be `+inf`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfOpenInterval {
    pub lo: f64,
    pub hi: f64,
}

impl HalfOpenInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, GeomError> {
        if lo.is_nan() || hi.is_nan() || lo >= hi || lo == f64::INFINITY {
            return Err(GeomError::BadInterval { lo, hi });
        }
        Ok(HalfOpenInterval { lo, hi })
    }

    pub const fn unbounded() -> Self {
        HalfOpenInterval { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo < v && v <= self.hi
    }

    pub fn contains_open(&self, v: f64) -> bool {
        self.lo < v && v < self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// A finite value strictly inside `(lo, hi)`.
    pub fn representative(&self) -> f64 {
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => {
                let mid = self.lo + (self.hi - self.lo) * 0.5;
                if mid > self.lo && mid < self.hi {
                    mid
                } else {
                    self.hi
                }
            }
            (true, false) => self.lo.abs().max(1.0) * 2.0 + self.lo.max(0.0),
            (false, true) => self.hi - self.hi.abs().max(1.0),
            (false, false) => 1.0,
        }
    }
}

impl fmt::Display for HalfOpenInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}]", self.lo, self.hi)
    }
}

/// What generated a candidate value. Variant order is the tie-break rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CriticalKind {
    PairDistance { a: usize, b: usize },
    PointVertex { a: usize, vertex: usize },
    /// `a < a2`; the value is the squared distance from `a` to the point
    /// where the bisector of `a` and `a2` crosses `edge`.
    PointPointEdge { a: usize, a2: usize, edge: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalValue {
    pub value_sq: f64,
    pub kind: CriticalKind,
}

impl CriticalValue {
    pub fn cmp_total(&self, other: &Self) -> Ordering {
        self.value_sq
            .total_cmp(&other.value_sq)
            .then(self.kind.cmp(&other.kind))
    }
}

/// Parameter range `[t1, t2]` (unclamped) where the line through `seg` lies
/// in the closed disk, or `None` if the line misses the disk.
pub fn disk_line_roots(center: Point, delta_sq: f64, seg: &Segment) -> Option<(f64, f64)> {
    let (dx, dy) = seg.end.sub(seg.start);
    let (fx, fy) = seg.start.sub(center);
    let a = dx * dx + dy * dy;
    let b = 2.0 * (fx * dx + fy * dy);
    let c = fx * fx + fy * fy - delta_sq;
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // Numerically stable pair of roots.
    let q = if b >= 0.0 { -0.5 * (b + sq) } else { -0.5 * (b - sq) };
    let (r1, r2) = if q == 0.0 {
        (0.0, 0.0)
    } else {
        (q / a, c / q)
    };
    Some(if r1 <= r2 { (r1, r2) } else { (r2, r1) })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DiskExit {
    /// Parameter on the segment where the curve leaves the disk.
    Exit(f64),
    StaysInside,
}

/// Where a walk along `seg` starting at parameter `start_t` leaves the closed
/// disk of squared radius `delta_sq` around `center`.
pub fn disk_exit_on_edge(
    center: Point,
    delta_sq: f64,
    seg: &Segment,
    start_t: f64,
) -> Result<DiskExit, GeomError> {
    let start = seg.point_at(start_t);
    if !within(squared_dist(center, start), delta_sq) {
        return Err(GeomError::OutsideDisk);
    }
    Ok(exit_unchecked(center, delta_sq, seg, start_t))
}

pub(crate) fn exit_unchecked(center: Point, delta_sq: f64, seg: &Segment, start_t: f64) -> DiskExit {
    if within(squared_dist(center, seg.end), delta_sq) {
        return DiskExit::StaysInside;
    }
    match disk_line_roots(center, delta_sq, seg) {
        // the start point is inside up to tolerance, so the exit is at most
        // a rounding error away from it
        None => DiskExit::Exit(start_t.clamp(0.0, 1.0)),
        Some((_, t2)) => {
            if t2 >= 1.0 {
                DiskExit::Exit(1.0)
            } else {
                DiskExit::Exit(t2.max(start_t).clamp(0.0, 1.0))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BisectorHit {
    pub t: f64,
    pub point: Point,
    /// `‖p − point‖²`.
    pub value_sq: f64,
}

/// Intersection of the perpendicular bisector of `p`, `q` with the closed
/// segment. When the segment lies on the bisector, the start of the segment is
/// returned.
pub fn bisector_edge_intersection(
    p: Point,
    q: Point,
    seg: &Segment,
) -> Result<Option<BisectorHit>, GeomError> {
    if p == q {
        return Err(GeomError::CoincidentPoints);
    }
    let (wx, wy) = q.sub(p);
    let mx = 0.5 * (p.x + q.x);
    let my = 0.5 * (p.y + q.y);
    let (dx, dy) = seg.end.sub(seg.start);
    // g(t) = (start + t d - mid) . w ; zero on the bisector
    let g0 = (seg.start.x - mx) * wx + (seg.start.y - my) * wy;
    let g1 = dx * wx + dy * wy;
    let wlen = (wx * wx + wy * wy).sqrt();
    let dlen = (dx * dx + dy * dy).sqrt();
    let t = if g1.abs() <= 1e-12 * wlen * dlen {
        let scale = wlen * ((seg.start.x - mx).hypot(seg.start.y - my)).max(dlen);
        if g0.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            0.0
        } else {
            return Ok(None);
        }
    } else {
        -g0 / g1
    };
    const SLACK: f64 = 1e-12;
    if !(-SLACK..=1.0 + SLACK).contains(&t) {
        return Ok(None);
    }
    let t = t.clamp(0.0, 1.0);
    let point = seg.point_at(t);
    Ok(Some(BisectorHit { t, point, value_sq: squared_dist(p, point) }))
}

/// Canonical point-point-edge value for stones `i`, `j` (any order) and edge
/// `e`. Every producer of these values goes through here so that equal
/// candidates compare bit-identically.
pub fn point_point_edge_value(a: &PointSeq, f: &PolyCurve, i: usize, j: usize, e: usize) -> Option<f64> {
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    if a[lo] == a[hi] {
        return None;
    }
    bisector_edge_intersection(a[lo], a[hi], &f.edge(e))
        .ok()
        .flatten()
        .map(|h| h.value_sq)
}

/// All point-vertex values and all defined point-point-edge values, sorted by
/// `(value_sq, kind)`.
pub fn enumerate_critical_values(a: &PointSeq, f: &PolyCurve) -> Vec<CriticalValue> {
    let m = a.len();
    let n = f.edge_count();
    let mut out = Vec::with_capacity(m * (n + 1) + n * m * m.saturating_sub(1) / 2);
    for i in 0..m {
        for k in 0..=n {
            out.push(CriticalValue {
                value_sq: squared_dist(a[i], f.vertex(k)),
                kind: CriticalKind::PointVertex { a: i, vertex: k },
            });
        }
    }
    for i in 0..m {
        for j in i + 1..m {
            for e in 0..n {
                if let Some(v) = point_point_edge_value(a, f, i, j, e) {
                    out.push(CriticalValue {
                        value_sq: v,
                        kind: CriticalKind::PointPointEdge { a: i, a2: j, edge: e },
                    });
                }
            }
        }
    }
    out.sort_by(CriticalValue::cmp_total);
    out
}

/// All `m·n` squared pair distances with their generators, sorted.
pub fn enumerate_pair_distances(a: &PointSeq, b: &PointSeq) -> Vec<CriticalValue> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for (i, &p) in a.points().iter().enumerate() {
        for (j, &q) in b.points().iter().enumerate() {
            out.push(CriticalValue {
                value_sq: squared_dist(p, q),
                kind: CriticalKind::PairDistance { a: i, b: j },
            });
        }
    }
    out.sort_by(CriticalValue::cmp_total);
    out
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn coord() -> impl Strategy<Value = f64> {
        -10.0..10.0f64
    }

    fn pt() -> impl Strategy<Value = Point> {
        (coord(), coord()).prop_map(|(x, y)| Point::new(x, y))
    }

    proptest! {
        #[test]
        fn squared_dist_symmetric(p in pt(), q in pt()) {
            prop_assert_eq!(squared_dist(p, q), squared_dist(q, p));
            prop_assert_eq!(squared_dist(p, p), 0.0);
        }

        #[test]
        fn exit_is_on_circle_and_prefix_inside(c in pt(), s in pt(), e in pt(), frac in 0.0..1.0f64, extra in 0.0..4.0f64) {
            prop_assume!(squared_dist(s, e) > 1e-6);
            let seg = Segment::new(s, e);
            let start_t = frac;
            let start = seg.point_at(start_t);
            let delta_sq = squared_dist(c, start) + extra;
            match disk_exit_on_edge(c, delta_sq, &seg, start_t).unwrap() {
                DiskExit::StaysInside => {
                    prop_assert!(within(squared_dist(c, e), delta_sq));
                }
                DiskExit::Exit(t) => {
                    let x = seg.point_at(t);
                    prop_assert!((squared_dist(c, x) - delta_sq).abs() <= 1e-9 * delta_sq.max(1.0));
                    for k in 1..1000 {
                        let u = start_t + (t - start_t) * k as f64 / 1000.0;
                        prop_assert!(within(squared_dist(c, seg.point_at(u)), delta_sq));
                    }
                }
            }
        }

        #[test]
        fn bisector_point_is_equidistant(p in pt(), q in pt(), s in pt(), e in pt()) {
            prop_assume!(p != q && s != e);
            if let Some(hit) = bisector_edge_intersection(p, q, &Segment::new(s, e)).unwrap() {
                let dp = squared_dist(p, hit.point);
                let dq = squared_dist(q, hit.point);
                prop_assert!((dp - dq).abs() <= 1e-9 * hit.value_sq.max(1.0));
            }
        }

        #[test]
        fn critical_values_sorted_and_bounded(
            a in proptest::collection::vec(pt(), 1..6),
            f in proptest::collection::vec(pt(), 2..6),
        ) {
            let Ok(f) = PolyCurve::new(f) else { return Ok(()); };
            let a = PointSeq::new(a).unwrap();
            let (m, n) = (a.len(), f.edge_count());
            let cv = enumerate_critical_values(&a, &f);
            prop_assert!(cv.len() <= m * (n + 1) + n * m * (m - 1) / 2);
            prop_assert!(cv.windows(2).all(|w| w[0].cmp_total(&w[1]) != Ordering::Greater));
            prop_assert_eq!(cv, enumerate_critical_values(&a, &f));
        }
    }
}

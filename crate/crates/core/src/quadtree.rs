//! Point quadtree over `B` and the cell/disk classification shared by the
//! hierarchical counting backend and the hierarchical cover builder.
//!
//! Box distance bounds use the same floating-point expression as
//! [`squared_dist`], and rounding is monotone, so a point-to-box bound never
//! contradicts the per-pair value of any point in the box.

use crate::geom::{squared_dist, Point};

const LEAF_SIZE: usize = 8;
const MAX_DEPTH: usize = 48;

#[derive(Clone, Debug)]
struct Node {
    min: Point,
    max: Point,
    start: usize,
    end: usize,
    /// Index of the first child; children are stored contiguously.
    first_child: u32,
    child_count: u8,
}

#[derive(Clone, Debug)]
pub(crate) struct QuadTree {
    /// Original indices, permuted so that every node owns a contiguous range.
    ids: Vec<usize>,
    pts: Vec<Point>,
    nodes: Vec<Node>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Class {
    Inside,
    Outside,
    Crossing,
}

pub(crate) enum Piece<'x> {
    /// Every listed stone is related to every point of the node.
    Block { a: &'x [u32], node: usize },
    /// Pairs that still need individual tests.
    Leaf { a: &'x [u32], node: usize },
}

impl QuadTree {
    pub fn new(points: &[Point]) -> Self {
        let mut ids: Vec<usize> = (0..points.len()).collect();
        let mut nodes = vec![placeholder()];
        if !points.is_empty() {
            build(points, &mut ids, 0, 0, points.len(), 0, &mut nodes);
        }
        let pts = ids.iter().map(|&i| points[i]).collect();
        QuadTree { ids, pts, nodes }
    }

    pub fn node_len(&self, node: usize) -> usize {
        let n = &self.nodes[node];
        n.end - n.start
    }

    /// Original indices of the points under `node`.
    pub fn node_ids(&self, node: usize) -> &[usize] {
        let n = &self.nodes[node];
        &self.ids[n.start..n.end]
    }

    pub fn node_points(&self, node: usize) -> &[Point] {
        let n = &self.nodes[node];
        &self.pts[n.start..n.end]
    }

    fn bounds(&self, p: Point, node: usize) -> (f64, f64) {
        let n = &self.nodes[node];
        let near_x = p.x.clamp(n.min.x, n.max.x);
        let near_y = p.y.clamp(n.min.y, n.max.y);
        let far_x = if (p.x - n.min.x).abs() >= (n.max.x - p.x).abs() { n.min.x } else { n.max.x };
        let far_y = if (p.y - n.min.y).abs() >= (n.max.y - p.y).abs() { n.min.y } else { n.max.y };
        (
            squared_dist(p, Point::new(near_x, near_y)),
            squared_dist(p, Point::new(far_x, far_y)),
        )
    }

    /// Splits `A × B` into blocks and leaf pieces according to `classify`,
    /// which sees the min and max squared distance from a stone to a cell.
    /// A node becomes a leaf piece once it is a tree leaf or the remaining
    /// crossing pairs number at most `leaf_pairs`.
    pub fn decompose(
        &self,
        a: &[Point],
        classify: &impl Fn(f64, f64) -> Class,
        leaf_pairs: usize,
        visit: &mut impl FnMut(Piece<'_>),
    ) {
        if self.pts.is_empty() || a.is_empty() {
            return;
        }
        let all: Vec<u32> = (0..a.len() as u32).collect();
        self.walk(0, &all, a, classify, leaf_pairs, visit);
    }

    fn walk(
        &self,
        node: usize,
        cand: &[u32],
        a: &[Point],
        classify: &impl Fn(f64, f64) -> Class,
        leaf_pairs: usize,
        visit: &mut impl FnMut(Piece<'_>),
    ) {
        let mut inside = Vec::new();
        let mut crossing = Vec::new();
        for &i in cand {
            let (lo, hi) = self.bounds(a[i as usize], node);
            match classify(lo, hi) {
                Class::Inside => inside.push(i),
                Class::Outside => {}
                Class::Crossing => crossing.push(i),
            }
        }
        if !inside.is_empty() {
            visit(Piece::Block { a: &inside, node });
        }
        if crossing.is_empty() {
            return;
        }
        let n = &self.nodes[node];
        if n.child_count == 0 || crossing.len() * (n.end - n.start) <= leaf_pairs {
            visit(Piece::Leaf { a: &crossing, node });
            return;
        }
        for c in 0..n.child_count as usize {
            self.walk(n.first_child as usize + c, &crossing, a, classify, leaf_pairs, visit);
        }
    }
}

fn placeholder() -> Node {
    Node { min: Point::default(), max: Point::default(), start: 0, end: 0, first_child: 0, child_count: 0 }
}

fn build(points: &[Point], ids: &mut [usize], slot: usize, start: usize, end: usize, depth: usize, nodes: &mut Vec<Node>) {
    let mut min = Point::new(f64::INFINITY, f64::INFINITY);
    let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &i in &ids[start..end] {
        let p = points[i];
        min.x = min.x.min(p.x);
        min.y = min.y.min(p.y);
        max.x = max.x.max(p.x);
        max.y = max.y.max(p.y);
    }
    nodes[slot] = Node { min, max, start, end, first_child: 0, child_count: 0 };
    if end - start <= LEAF_SIZE || depth >= MAX_DEPTH || (min.x == max.x && min.y == max.y) {
        return;
    }
    let cx = min.x + (max.x - min.x) * 0.5;
    let cy = min.y + (max.y - min.y) * 0.5;
    let quadrant = |p: Point| usize::from(p.x > cx) | (usize::from(p.y > cy) << 1);
    ids[start..end].sort_by_key(|&i| quadrant(points[i]));
    let mut cut = [start; 5];
    for q in 0..4 {
        let count = ids[start..end].iter().filter(|&&i| quadrant(points[i]) == q).count();
        cut[q + 1] = cut[q] + count;
    }
    let ranges: Vec<(usize, usize)> = (0..4)
        .filter(|&q| cut[q + 1] > cut[q])
        .map(|q| (cut[q], cut[q + 1]))
        .collect();
    // children are stored contiguously
    let first = nodes.len();
    nodes.extend(ranges.iter().map(|_| placeholder()));
    nodes[slot].first_child = first as u32;
    nodes[slot].child_count = ranges.len() as u8;
    for (k, &(s, e)) in ranges.iter().enumerate() {
        build(points, ids, first + k, s, e, depth + 1, nodes);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn decomposition_partitions_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let a: Vec<Point> = (0..rng.random_range(1..40))
                .map(|_| Point::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)))
                .collect();
            let b: Vec<Point> = (0..rng.random_range(1..80))
                .map(|_| Point::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)))
                .collect();
            let d = rng.random_range(0.0..20.0);
            let tree = QuadTree::new(&b);
            let mut seen = vec![vec![0u8; b.len()]; a.len()];
            let classify = |lo: f64, hi: f64| {
                if hi <= d {
                    Class::Inside
                } else if lo > d {
                    Class::Outside
                } else {
                    Class::Crossing
                }
            };
            tree.decompose(&a, &classify, 16, &mut |piece| match piece {
                Piece::Block { a: ai, node } => {
                    for &i in ai {
                        for &j in tree.node_ids(node) {
                            assert!(squared_dist(a[i as usize], b[j]) <= d);
                            seen[i as usize][j] += 1;
                        }
                    }
                }
                Piece::Leaf { a: ai, node } => {
                    for &i in ai {
                        for &j in tree.node_ids(node) {
                            if squared_dist(a[i as usize], b[j]) <= d {
                                seen[i as usize][j] += 1;
                            }
                        }
                    }
                }
            });
            for i in 0..a.len() {
                for j in 0..b.len() {
                    let want = u8::from(squared_dist(a[i], b[j]) <= d);
                    assert_eq!(seen[i][j], want);
                }
            }
        }
    }
}

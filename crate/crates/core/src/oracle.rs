//! Brute-force reference implementations, written independently of the
//! optimizers and decision procedures they check.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

use crate::geom::{
    disk_line_roots, enumerate_critical_values, enumerate_pair_distances, squared_dist, within, PointSeq, PolyCurve,
    REL_EPS,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleVariant {
    OneSided,
    TwoSided,
    SemiContinuous,
}

/// BFS over the position grid. One-sided: right by one column, or up to any
/// higher row. Two-sided: up or right by any amount.
///
/// Every skipping expansion only scans cells below the lowest cell already
/// expanded in the same column (row), so the search stays `O(mn)`.
///
/// # Panics
/// On the semi-continuous variant.
pub fn oracle_decide_discrete(a: &PointSeq, b: &PointSeq, delta_sq: f64, variant: OracleVariant) -> bool {
    assert!(variant != OracleVariant::SemiContinuous, "discrete oracle called with the semi-continuous variant");
    let (m, n) = (a.len(), b.len());
    let ok = |i: usize, j: usize| squared_dist(a[i], b[j]) <= delta_sq;
    if !ok(0, 0) {
        return false;
    }
    let mut seen = vec![false; m * n];
    // lowest row expanded upward per column / lowest column expanded rightward per row
    let mut col_low = vec![m; n];
    let mut row_low = vec![n; m];
    let mut queue = VecDeque::from([(0, 0)]);
    seen[0] = true;
    while let Some((i, j)) = queue.pop_front() {
        if (i, j) == (m - 1, n - 1) {
            return true;
        }
        let mut visit = |k: usize, l: usize, queue: &mut VecDeque<(usize, usize)>| {
            if !seen[k * n + l] && ok(k, l) {
                seen[k * n + l] = true;
                queue.push_back((k, l));
            }
        };
        for k in i + 1..col_low[j] {
            visit(k, j, &mut queue);
        }
        col_low[j] = col_low[j].min(i);
        match variant {
            OracleVariant::OneSided if j + 1 < n => visit(i, j + 1, &mut queue),
            OracleVariant::TwoSided => {
                for l in j + 1..row_low[i] {
                    visit(i, l, &mut queue);
                }
                row_low[i] = row_low[i].min(j);
            }
            _ => {}
        }
    }
    false
}

/// Smallest pair distance at which the oracle decision holds.
pub fn oracle_optimize_discrete(a: &PointSeq, b: &PointSeq, variant: OracleVariant) -> f64 {
    let mut vals: Vec<f64> = enumerate_pair_distances(a, b).iter().map(|c| c.value_sq).collect();
    vals.dedup();
    flip(&vals, |d| oracle_decide_discrete(a, b, d, variant))
}

fn flip(vals: &[f64], mut decide: impl FnMut(f64) -> bool) -> f64 {
    let k = vals.partition_point(|&d| !decide(d));
    // the largest candidate always passes
    vals[k.min(vals.len() - 1)]
}

/// Closed interval of the global curve parameter `s = edge + t`.
#[derive(Clone, Copy, Debug)]
struct Span {
    lo: f64,
    hi: f64,
}

const GAP: f64 = 1e-12;
const TOUCH: f64 = 1e-7;

/// Components of `f ∩ D(c)`, slightly widened by the crate tolerance.
fn free_spans(f: &PolyCurve, c: crate::geom::Point, delta_sq: f64) -> Vec<Span> {
    let eff = delta_sq + REL_EPS * delta_sq.abs().max(1.0);
    let mut out: Vec<Span> = Vec::new();
    for e in 0..f.edge_count() {
        let Some((t1, t2)) = disk_line_roots(c, eff, &f.edge(e)) else { continue };
        if t1 > 1.0 || t2 < 0.0 {
            continue;
        }
        let s = Span { lo: e as f64 + t1.max(0.0), hi: e as f64 + t2.min(1.0) };
        match out.last_mut() {
            Some(last) if s.lo <= last.hi + GAP => last.hi = last.hi.max(s.hi),
            _ => out.push(s),
        }
    }
    out
}

fn curve_point(f: &PolyCurve, s: f64) -> crate::geom::Point {
    let n = f.edge_count();
    let e = (s.floor() as usize).min(n - 1);
    f.edge(e).point_at((s - e as f64).clamp(0.0, 1.0))
}

/// Per-stone reachable sets on the curve. `R_i` is the forward closure inside
/// the free components of stone `i` of everything reachable with an earlier
/// stone; `R_0` starts at `p_0`.
pub fn oracle_decide_semi(a: &PointSeq, f: &PolyCurve, delta_sq: f64) -> bool {
    let (m, n) = (a.len(), f.edge_count());
    if !within(squared_dist(a[0], f.vertex(0)), delta_sq) {
        return false;
    }
    let mut union: Vec<Span> = Vec::new();
    for i in 0..m {
        let comps = free_spans(f, a[i], delta_sq);
        let mut reach = Vec::new();
        for c in &comps {
            let entry = if i == 0 {
                (c.lo <= GAP).then_some(0.0)
            } else {
                union
                    .iter()
                    .filter_map(|u| {
                        if u.hi >= c.lo && u.lo <= c.hi {
                            Some(u.lo.max(c.lo))
                        } else if u.hi < c.lo
                            && u.hi >= c.lo - TOUCH
                            && within(squared_dist(a[i], curve_point(f, u.hi)), delta_sq)
                        {
                            Some(c.lo)
                        } else {
                            None
                        }
                    })
                    .reduce(f64::min)
            };
            if let Some(s) = entry {
                reach.push(Span { lo: s, hi: c.hi });
            }
        }
        if i == m - 1 {
            return reach.iter().any(|r| r.hi >= n as f64 - GAP);
        }
        union.extend(reach);
    }
    unreachable!("m >= 1")
}

/// Smallest critical value at which the semi-continuous oracle holds.
pub fn oracle_optimize_semi(a: &PointSeq, f: &PolyCurve) -> f64 {
    let mut vals: Vec<f64> = enumerate_critical_values(a, f).iter().map(|c| c.value_sq).collect();
    vals.dedup();
    flip(&vals, |d| oracle_decide_semi(a, f, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use OracleVariant::*;

    fn seq(c: &[(f64, f64)]) -> PointSeq {
        PointSeq::from_xy(c).unwrap()
    }

    #[test]
    fn discrete_examples() {
        let a = seq(&[(0., 0.)]);
        let b = seq(&[(3., 4.)]);
        assert!(oracle_decide_discrete(&a, &b, 25.0, OneSided));
        assert_eq!(oracle_optimize_discrete(&a, &b, OneSided), 25.0);
        assert_eq!(oracle_optimize_discrete(&a, &b, TwoSided), 25.0);

        let a = seq(&[(0., 0.), (5., 5.), (0., 2.)]);
        let b = seq(&[(0., 0.), (0., 2.)]);
        assert!(oracle_decide_discrete(&a, &b, 4.0, OneSided));

        let a = seq(&[(0., 0.), (0., 2.)]);
        assert_eq!(oracle_optimize_discrete(&a, &a, OneSided), 4.0);

        let a = seq(&[(0., 0.), (9., 9.), (0., 2.)]);
        let b = seq(&[(0., 0.), (7., -7.), (0., 2.)]);
        assert!(!oracle_decide_discrete(&a, &b, 3.99, TwoSided));
        assert_eq!(oracle_optimize_discrete(&a, &b, TwoSided), 4.0);
        // the B-frog cannot skip (7, -7) in the one-sided game
        assert!(oracle_optimize_discrete(&a, &b, OneSided) > 4.0);
    }

    #[test]
    fn semi_examples() {
        let a = seq(&[(0., 0.)]);
        let f = PolyCurve::from_xy(&[(0., 1.), (0., -1.)]).unwrap();
        assert!(oracle_decide_semi(&a, &f, 1.0));
        assert!(!oracle_decide_semi(&a, &f, 0.99));
        assert_eq!(oracle_optimize_semi(&a, &f), 1.0);

        let a = seq(&[(0., 0.), (2., 0.)]);
        let f = PolyCurve::from_xy(&[(0., 0.5), (2., 0.5)]).unwrap();
        assert!(oracle_decide_semi(&a, &f, 1.25));
        assert!(!oracle_decide_semi(&a, &f, 1.24));
        assert_eq!(oracle_optimize_semi(&a, &f), 1.25);

        let f = PolyCurve::from_xy(&[(1., -1.), (1., 1.)]).unwrap();
        assert_eq!(oracle_optimize_semi(&a, &f), 2.0);
    }
}

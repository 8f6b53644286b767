use proptest::prelude::*;
use shortcut_frechet::geom::{squared_dist, within};
use shortcut_frechet::oracle::{oracle_decide_discrete, oracle_decide_semi, OracleVariant};
use shortcut_frechet::semi::decide_semi;
use shortcut_frechet::two_sided::{build_cover_hierarchical, build_cover_naive, Sweep, UNREACHED};
use shortcut_frechet::{decide_one_sided, two_sided::decide_two_sided, Point, PointSeq, PolyCurve};

fn points(max: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 1..max)
        .prop_map(|v| v.into_iter().map(Point::from).collect())
}

fn curve(max: usize) -> impl Strategy<Value = PolyCurve> {
    prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 2..max)
        .prop_filter_map("zero-length edge", |v| PolyCurve::from_xy(&v).ok())
}

fn deltas() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..150.0f64, 10).prop_map(|mut v| {
        v.sort_by(f64::total_cmp);
        v
    })
}

/// Two-sided reachability table, row by row.
fn reachable(a: &PointSeq, b: &PointSeq, d: f64) -> Vec<Vec<bool>> {
    let (m, n) = (a.len(), b.len());
    let ok = |i: usize, j: usize| squared_dist(a[i], b[j]) <= d;
    let mut r = vec![vec![false; n]; m];
    for i in 0..m {
        for j in 0..n {
            let from_below = (0..i).any(|k| r[k][j]);
            let from_left = (0..j).any(|l| r[i][l]);
            r[i][j] = ok(i, j) && ((i, j) == (0, 0) || from_below || from_left);
        }
    }
    r
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn decisions_are_monotone(a in points(12), b in points(12), ds in deltas()) {
        let (a, b) = (PointSeq::new(a).unwrap(), PointSeq::new(b).unwrap());
        let runs = [
            ds.iter().map(|&d| decide_one_sided(&a, &b, d).is_yes()).collect::<Vec<_>>(),
            ds.iter().map(|&d| oracle_decide_discrete(&a, &b, d, OracleVariant::OneSided)).collect(),
            ds.iter().map(|&d| oracle_decide_discrete(&a, &b, d, OracleVariant::TwoSided)).collect(),
        ];
        for r in runs {
            prop_assert!(r.windows(2).all(|w| w[0] <= w[1]), "{r:?}");
        }
    }

    #[test]
    fn semi_decisions_are_monotone(a in points(10), f in curve(10), ds in deltas()) {
        let a = PointSeq::new(a).unwrap();
        let g: Vec<bool> = ds.iter().map(|&d| decide_semi(&a, &f, d).is_yes()).collect();
        let o: Vec<bool> = ds.iter().map(|&d| oracle_decide_semi(&a, &f, d)).collect();
        prop_assert!(g.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(o.windows(2).all(|w| w[0] <= w[1]));
        for (&d, yes) in ds.iter().zip(&g) {
            if let Some(path) = decide_semi(&a, &f, d).certificate() {
                prop_assert!(*yes && path.is_valid(&a, &f, d));
            }
        }
    }

    #[test]
    fn covers_decode_to_the_threshold_graph(a in points(40), b in points(40), d in 0.0..100.0f64) {
        let (a, b) = (PointSeq::new(a).unwrap(), PointSeq::new(b).unwrap());
        let (m, n) = (a.len(), b.len());
        let naive = build_cover_naive(&a, &b, d);
        let hier = build_cover_hierarchical(&a, &b, d);
        prop_assert!(naive.validate(&a, &b, d).is_ok());
        prop_assert!(hier.validate(&a, &b, d).is_ok());
        let (s, e) = (squared_dist(a[0], b[0]) <= d, squared_dist(a[m - 1], b[n - 1]) <= d);
        prop_assert_eq!(decide_two_sided(&naive, m, n, s, e), decide_two_sided(&hier, m, n, s, e));
    }

    /// After rows `0..i` are processed, each biclique's variable is its
    /// smallest column holding a position reachable in those rows.
    #[test]
    fn sweep_variables(a in points(15), b in points(15), d in 0.0..100.0f64) {
        let (a, b) = (PointSeq::new(a).unwrap(), PointSeq::new(b).unwrap());
        prop_assume!(squared_dist(a[0], b[0]) <= d);
        let r = reachable(&a, &b, d);
        let cover = build_cover_hierarchical(&a, &b, d);
        let mut sweep = Sweep::new(&cover);
        for i in 0..a.len() {
            for (t, bc) in cover.bicliques.iter().enumerate() {
                let want = bc.b_side.iter().copied().filter(|&l| (0..i).any(|k| r[k][l])).min().unwrap_or(UNREACHED);
                prop_assert_eq!(sweep.v(t), want);
            }
            let first = r[i].iter().position(|&x| x).unwrap_or(UNREACHED);
            if first != UNREACHED || i > 0 {
                // row_min may point at a column that is not a 1-entry of row i;
                // the first reachable entry is the first 1-entry at or after it
                let y = sweep.row_min(i);
                let derived = if y == UNREACHED {
                    UNREACHED
                } else {
                    (y..b.len()).find(|&l| squared_dist(a[i], b[l]) <= d).unwrap_or(UNREACHED)
                };
                prop_assert_eq!(derived, first);
            }
            sweep.process_row(i);
        }
    }

    /// On the boundary circle of `a`, lying in the disk of `b` is the same as
    /// lying on `b`'s side of their bisector.
    #[test]
    fn disk_membership_is_a_halfplane_test(
        a in (-5.0..5.0f64, -5.0..5.0f64), b in (-5.0..5.0f64, -5.0..5.0f64),
        r in 0.1..6.0f64, theta in 0.0..std::f64::consts::TAU,
    ) {
        let (a, b) = (Point::from(a), Point::from(b));
        let s = Point::new(a.x + r * theta.cos(), a.y + r * theta.sin());
        let d = squared_dist(a, s);
        let side = (s.x - 0.5 * (a.x + b.x)) * (b.x - a.x) + (s.y - 0.5 * (a.y + b.y)) * (b.y - a.y);
        prop_assume!(side.abs() > 1e-9 * (1.0 + d));
        prop_assert_eq!(within(squared_dist(b, s), d), side > 0.0);
    }
}

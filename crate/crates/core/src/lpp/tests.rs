use proptest::prelude::*;

use super::*;
use crate::randfield::{sample_field, SeedSpec, WeightField};

fn grid_2x2() -> WeightField {
    // rows indexed [i][j]
    WeightField::from_bulk(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap()
}

fn full(field: &WeightField, variant: Variant, params: BoundaryParam) -> LppGrid {
    lpp_full(field, variant, params).unwrap()
}

fn params_for(variant: Variant, w: f64, z: f64) -> BoundaryParam {
    match variant {
        Variant::Bulk => BoundaryParam::bulk(),
        Variant::Hor => hor_params(w).unwrap(),
        Variant::Ver => ver_params(z).unwrap(),
        Variant::TwoSided => BoundaryParam::new(w, z).unwrap(),
        Variant::Northeast => unreachable!(),
    }
}

const VARIANTS: [Variant; 4] = [Variant::Bulk, Variant::Hor, Variant::Ver, Variant::TwoSided];

#[test]
fn two_by_two_example() {
    let f = grid_2x2();
    let g = full(&f, Variant::Bulk, BoundaryParam::bulk());
    assert_eq!(g.value(2, 2), 8.0);
    assert_eq!(lpp_bruteforce(&f, Variant::Bulk, BoundaryParam::bulk(), (2, 2)).unwrap(), 8.0);
    let path = geodesic_backtrack(&g, (2, 2)).unwrap();
    assert_eq!(path.vertices, vec![(1, 1), (2, 1), (2, 2)]);
    assert_eq!(g.ties, 0);
}

#[test]
fn single_column_sums() {
    let f = WeightField::from_bulk(&[vec![0.5, 1.25, 2.0]]).unwrap();
    let g = full(&f, Variant::Bulk, BoundaryParam::bulk());
    assert_eq!(g.value(1, 3), 3.75);
    let one = WeightField::from_bulk(&[vec![0.7]]).unwrap();
    assert_eq!(lpp_bruteforce(&one, Variant::Bulk, BoundaryParam::bulk(), (1, 1)).unwrap(), 0.7);
}

#[test]
fn bruteforce_counts_paths() {
    let f = sample_field(&SeedSpec::new(1, "count", 0), 3, 3).unwrap();
    let (_, count) = lpp_bruteforce_counted(&f, Variant::Bulk, BoundaryParam::bulk(), (3, 3)).unwrap();
    assert_eq!(count, 6);
    let (_, count) = lpp_bruteforce_counted(&f, Variant::TwoSided, BoundaryParam::new(0.5, 0.5).unwrap(), (3, 3)).unwrap();
    assert_eq!(count, 20);
    let big = sample_field(&SeedSpec::new(1, "count", 0), 8, 8).unwrap();
    assert!(matches!(
        lpp_bruteforce(&big, Variant::Bulk, BoundaryParam::bulk(), (8, 7)),
        Err(Error::SizeCap(_))
    ));
}

#[test]
fn tie_rule_prefers_left_predecessor() {
    let f = WeightField::from_bulk(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
    let g = full(&f, Variant::Bulk, BoundaryParam::bulk());
    let path = geodesic_backtrack(&g, (2, 2)).unwrap();
    assert_eq!(path.vertices, vec![(1, 1), (1, 2), (2, 2)]);
    assert_eq!(g.ties, 1);
    let single = geodesic_backtrack(&g, (1, 1)).unwrap();
    assert_eq!(single.vertices, vec![(1, 1)]);
}

#[test]
fn geodesic_requires_backpointers() {
    let g = full(&grid_2x2(), Variant::Bulk, BoundaryParam::bulk()).without_backpointers();
    assert!(matches!(geodesic_backtrack(&g, (2, 2)), Err(Error::MissingBackpointers)));
}

fn boundary_example(hor1: f64, ver1: f64) -> (WeightField, BoundaryParam) {
    // Rates 1 on both axes turn U = e^{-x} into weight x.
    let f = WeightField::from_parts(1, 1, vec![1.0], vec![(-hor1).exp()], vec![(-ver1).exp()]).unwrap();
    (f, BoundaryParam::new(1.0, 0.0).unwrap())
}

#[test]
fn exit_point_examples() {
    let (f, p) = boundary_example(5.0, 0.1);
    let g = full(&f, Variant::TwoSided, p);
    let path = geodesic_backtrack(&g, (1, 1)).unwrap();
    assert_eq!(path.vertices, vec![(0, 0), (1, 0), (1, 1)]);
    assert_eq!(exit_points(&path).unwrap(), ExitPoints { z_hor: 1, z_ver: 0 });
    let (f, p) = boundary_example(0.1, 5.0);
    let g = full(&f, Variant::TwoSided, p);
    let e = exit_points(&geodesic_backtrack(&g, (1, 1)).unwrap()).unwrap();
    assert_eq!(e, ExitPoints { z_hor: 0, z_ver: 1 });
    let origin = geodesic_backtrack(&g, (0, 0)).unwrap();
    assert_eq!(exit_points(&origin).unwrap(), ExitPoints::default());
    let bulk = geodesic_backtrack(&full(&f, Variant::Bulk, BoundaryParam::bulk()), (1, 1)).unwrap();
    assert!(matches!(exit_points(&bulk), Err(Error::WrongVariant(_))));
}

#[test]
fn params_must_match_variant() {
    let f = grid_2x2();
    assert!(matches!(
        lpp_full(&f, Variant::Bulk, BoundaryParam::new(0.5, 0.5).unwrap()),
        Err(Error::InconsistentParams(_))
    ));
    assert!(lpp_full(&f, Variant::Hor, BoundaryParam::new(0.5, 0.5).unwrap()).is_err());
    assert!(lpp_full(&f, Variant::TwoSided, hor_params(0.5).unwrap()).is_err());
    assert!(lpp_full(&f, Variant::Northeast, BoundaryParam::bulk()).is_err());
}

#[test]
fn full_mode_budget() {
    let f = sample_field(&SeedSpec::new(0, "budget", 0), 20, 20).unwrap();
    let w = boundary_weights(&f, BoundaryParam::bulk()).unwrap();
    let err = lpp_full_with(&f, Variant::Bulk, BoundaryParam::bulk(), w, 100).unwrap_err();
    assert!(matches!(err, Error::BudgetExceeded { allowed: 100, .. }));
}

#[test]
fn increments_along_axis_are_boundary_weights() {
    let f = sample_field(&SeedSpec::new(3, "inc", 0), 12, 9).unwrap();
    let p = BoundaryParam::stationary(0.4).unwrap();
    let g = full(&f, Variant::TwoSided, p);
    let bw = boundary_weights(&f, p).unwrap();
    let inc = increment_profile(&g, (0, 0), Axis::Horizontal, 12).unwrap();
    for (k, d) in inc.iter().enumerate() {
        assert!((d - bw.hor[k + 1]).abs() < 1e-12);
    }
    let row = increment_profile(&g, (2, 5), Axis::Horizontal, 10).unwrap();
    let total: f64 = row.iter().sum();
    assert!((total - (g.value(12, 5) - g.value(2, 5))).abs() < 1e-12);
    let col = increment_profile(&g, (3, 0), Axis::Vertical, 9).unwrap();
    assert_eq!(col.len(), 9);
    assert!(matches!(increment_profile(&g, (3, 0), Axis::Vertical, 10), Err(Error::OutOfRange(_))));
    let b = full(&f, Variant::Bulk, BoundaryParam::bulk());
    assert!(increment_profile(&b, (0, 1), Axis::Horizontal, 3).is_err());
}

#[test]
fn rolling_probes_and_top_row() {
    let f = sample_field(&SeedSpec::new(4, "roll", 0), 15, 11).unwrap();
    let p = BoundaryParam::new(0.3, 0.6).unwrap();
    let g = full(&f, Variant::TwoSided, p);
    let probes = [(15, 11), (0, 0), (3, 7), (0, 4), (9, 0)];
    let r = lpp_rolling(&f, Variant::TwoSided, p, &probes, true).unwrap();
    for (k, pr) in r.probes.iter().enumerate() {
        assert_eq!(pr.vertex, probes[k]);
        assert_eq!(pr.value.to_bits(), g.value(pr.vertex.0, pr.vertex.1).to_bits());
    }
    for i in 0..=15 {
        assert_eq!(r.top_row[i].to_bits(), g.value(i, 11).to_bits());
    }
    assert!(lpp_rolling(&f, Variant::Bulk, BoundaryParam::bulk(), &[(16, 1)], false).is_err());
}

#[test]
fn northeast_basics() {
    let f = sample_field(&SeedSpec::new(8, "ne", 0), 4, 3).unwrap();
    let ne = northeast_values(&f, 0.4).unwrap();
    assert_eq!(ne.value(5, 4), 0.0);
    let w = crate::randfield::northeast_weights(&f, 0.4).unwrap();
    // Brute force over the reversed region.
    fn best(f: &WeightField, w: &crate::randfield::NortheastWeights, i: usize, j: usize) -> f64 {
        let (m, n) = (f.m, f.n);
        let here = match (i == m + 1, j == n + 1) {
            (true, true) => w.corner,
            (false, true) => w.top[i],
            (true, false) => w.right[j],
            (false, false) => f.bulk(i, j),
        };
        let mut next = f64::NEG_INFINITY;
        if i <= m {
            next = next.max(best(f, w, i + 1, j));
        }
        if j <= n {
            next = next.max(best(f, w, i, j + 1));
        }
        here + if next.is_finite() { next } else { 0.0 }
    }
    for i in 1..=5 {
        for j in 1..=4 {
            assert!((ne.value(i, j) - best(&f, &w, i, j)).abs() < 1e-12);
        }
    }
    assert!(northeast_values(&f, 0.0).is_err());
    assert!(ne.get(0, 1).is_err());
}

#[test]
fn point_to_point_matches_grid() {
    let f = sample_field(&SeedSpec::new(5, "p2p", 0), 7, 6).unwrap();
    let g = full(&f, Variant::Bulk, BoundaryParam::bulk());
    for i in 1..=7 {
        for j in 1..=6 {
            assert_eq!(point_to_point(&f, (1, 1), (i, j)), g.value(i, j));
        }
    }
    assert_eq!(point_to_point(&f, (3, 3), (2, 5)), f64::NEG_INFINITY);
    assert_eq!(point_to_point(&f, (3, 3), (3, 3)), f.bulk(3, 3));
}

fn arb_field(max_m: usize, max_n: usize) -> impl Strategy<Value = WeightField> {
    (1..=max_m, 1..=max_n, any::<u64>()).prop_map(|(m, n, seed)| sample_field(&SeedSpec::new(seed, "prop", 0), m, n).unwrap())
}

// Small integer weights make ties common.
fn arb_tied_field() -> impl Strategy<Value = WeightField> {
    (1..=5usize, 1..=5usize).prop_flat_map(|(m, n)| {
        (
            prop::collection::vec(0u8..3, m * n),
            prop::collection::vec(1u8..4, m),
            prop::collection::vec(1u8..4, n),
        )
            .prop_map(move |(b, h, v)| {
                let bulk = b.into_iter().map(f64::from).collect();
                let u = |k: u8| (-f64::from(k)).exp();
                WeightField::from_parts(m, n, bulk, h.into_iter().map(u).collect(), v.into_iter().map(u).collect())
                    .unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn dp_equals_bruteforce(f in arb_field(6, 6), w in 0.05f64..1.0, z in 0.0f64..0.95) {
        prop_assume!(f.m + f.n <= 12);
        for variant in VARIANTS {
            let p = params_for(variant, w, z);
            let g = full(&f, variant, p);
            let start = variant.start();
            for i in start.0..=f.m {
                for j in start.1..=f.n {
                    if i + j == 0 { continue; }
                    let b = lpp_bruteforce(&f, variant, p, (i, j)).unwrap();
                    prop_assert_eq!(g.value(i, j), b, "{:?} at ({}, {})", variant, i, j);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn geodesic_weight_and_labels(f in prop_oneof![arb_field(9, 9), arb_tied_field()], w in 0.05f64..1.0, z in 0.0f64..0.95) {
        for variant in VARIANTS {
            let p = params_for(variant, w, z);
            let g = full(&f, variant, p);
            let bw = boundary_weights(&f, p).unwrap();
            let roll = lpp_rolling(&f, variant, p, &[], true).unwrap();
            prop_assert_eq!(roll.ties, g.ties);
            for i in 1..=f.m {
                let path = geodesic_backtrack(&g, (i, f.n)).unwrap();
                prop_assert_eq!(path.vertices[0], variant.start());
                for s in path.vertices.windows(2) {
                    let d = (s[1].0 - s[0].0, s[1].1 - s[0].1);
                    prop_assert!(d == (1, 0) || d == (0, 1));
                }
                let total = path.weight(&f, &bw);
                prop_assert!((total - g.value(i, f.n)).abs() <= 1e-9 * (1.0 + total.abs()));
                prop_assert_eq!(roll.top_row[i].to_bits(), g.value(i, f.n).to_bits());
                if variant.is_boundary() {
                    let e = exit_points(&path).unwrap();
                    prop_assert!((e.z_hor > 0) != (e.z_ver > 0));
                    let label = roll.top_labels.as_ref().unwrap()[i];
                    prop_assert_eq!(ExitPoints::from(label), e);
                }
            }
        }
    }

    #[test]
    fn two_sided_is_max_of_one_sided(f in arb_field(12, 12), w in 0.05f64..1.0, z in 0.0f64..0.95) {
        let two = full(&f, Variant::TwoSided, BoundaryParam::new(w, z).unwrap());
        let hor = full(&f, Variant::Hor, hor_params(w).unwrap());
        let ver = full(&f, Variant::Ver, ver_params(z).unwrap());
        for i in 1..=f.m {
            for j in 1..=f.n {
                prop_assert_eq!(two.value(i, j), hor.value(i, j).max(ver.value(i, j)));
            }
        }
    }

    #[test]
    fn domination_and_monotone_coupling(f in arb_field(12, 12), w in 0.05f64..0.9, dw in 0.0f64..0.5, z in 0.0f64..0.95) {
        let bulk = full(&f, Variant::Bulk, BoundaryParam::bulk());
        let hor = full(&f, Variant::Hor, hor_params(w).unwrap());
        let hor2 = full(&f, Variant::Hor, hor_params(w + dw).unwrap());
        let two = full(&f, Variant::TwoSided, BoundaryParam::new(w, z).unwrap());
        for i in 1..=f.m {
            for j in 1..=f.n {
                prop_assert!(bulk.value(i, j) <= hor.value(i, j));
                prop_assert!(hor.value(i, j) <= two.value(i, j));
                prop_assert!(hor2.value(i, j) <= hor.value(i, j));
            }
        }
    }

    #[test]
    fn comparison_inequalities(f in arb_field(7, 7)) {
        // both sides can be the same path sum added in a different order
        const EPS: f64 = 1e-12;
        let g = |u: (usize, usize), v: (usize, usize)| point_to_point(&f, u, v);
        let (m, n) = (f.m, f.n);
        for u in (1..=m).flat_map(|a| (1..=n).map(move |b| (a, b))) {
            for v in (u.0..m).flat_map(|a| (u.1..n).map(move |b| (a, b))) {
                let e1 = |p: (usize, usize)| (p.0 + 1, p.1);
                let e2 = |p: (usize, usize)| (p.0, p.1 + 1);
                if u.0 < v.0 {
                    prop_assert!(g(u, v) - g(e1(u), v) <= g(u, e2(v)) - g(e1(u), e2(v)) + EPS);
                    prop_assert!(g(u, v) - g(e1(u), v) >= g(u, e1(v)) - g(e1(u), e1(v)) - EPS);
                }
                if u.1 < v.1 {
                    prop_assert!(g(u, v) - g(e2(u), v) <= g(u, e1(v)) - g(e2(u), e1(v)) + EPS);
                    prop_assert!(g(u, v) - g(e2(u), v) >= g(u, e2(v)) - g(e2(u), e2(v)) - EPS);
                }
            }
        }
    }

    #[test]
    fn superadditivity(f in arb_field(10, 10), pi in 1usize..10, pj in 1usize..10, right in any::<bool>()) {
        let p = (pi.min(f.m), pj.min(f.n));
        let next = if right { (p.0 + 1, p.1) } else { (p.0, p.1 + 1) };
        prop_assume!(next.0 <= f.m && next.1 <= f.n);
        let v = (f.m, f.n);
        let lhs = point_to_point(&f, (1, 1), v);
        let rhs = point_to_point(&f, (1, 1), p) + point_to_point(&f, next, v);
        prop_assert!(lhs >= rhs - 1e-12);
    }

    #[test]
    fn lazy_and_materialized_agree(seed in any::<u64>(), m in 1usize..20, n in 1usize..20) {
        let spec = SeedSpec::new(seed, "lazy", 1);
        let f = sample_field(&spec, m, n).unwrap();
        let lazy = crate::randfield::LazyField::new(&spec, m, n).unwrap();
        let p = BoundaryParam::new(0.4, 0.3).unwrap();
        let a = lpp_rolling(&f, Variant::TwoSided, p, &[], true).unwrap();
        let b = lpp_rolling(&lazy, Variant::TwoSided, p, &[], true).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn shared_sweep_matches_single_lanes() {
    let spec = SeedSpec::new(12, "fused", 0);
    let f = sample_field(&spec, 30, 30).unwrap();
    let lanes: Vec<(Variant, BoundaryParam)> = vec![
        (Variant::Bulk, BoundaryParam::bulk()),
        (Variant::Hor, hor_params(0.5).unwrap()),
        (Variant::Ver, ver_params(0.5).unwrap()),
        (Variant::TwoSided, BoundaryParam::stationary(0.5).unwrap()),
    ];
    let built = lanes
        .iter()
        .map(|&(v, p)| Lane::new(v, 30, boundary_weights(&f, p).unwrap(), true).unwrap())
        .collect();
    let fused = sweep(&f, built, &[(10, 20)]).unwrap();
    for (res, &(v, p)) in fused.iter().zip(&lanes) {
        let single = lpp_rolling(&f, v, p, &[(10, 20)], true).unwrap();
        assert_eq!(res, &single);
    }
}

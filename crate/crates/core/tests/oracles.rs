//! Library routines checked against independent reference implementations.

mod common;

use common::*;
use num_traits::Zero;
use proptest::prelude::*;
use tspline_core::field::{int, ratio};
use tspline_core::linalg::determinant;
use tspline_core::mesh::Symbol;
use tspline_core::nesting::certify_nested;
use tspline_core::spline::cubic_bspline;
use tspline_core::{
    extend, is_analysis_suitable, refinement_matrix, tjunction_extensions, Axis, GlobalKnots, Point, Rational,
    SparseMatrix, SplineSpace, TMesh,
};

fn dense_rank(mut m: Vec<Vec<Rational>>) -> usize {
    let ncols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..ncols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else { continue };
        m.swap(rank, p);
        for r in 0..m.len() {
            if r != rank && !m[r][c].is_zero() {
                let f = &m[r][c] / &m[rank][c];
                let pivot = m[rank].clone();
                for (x, y) in m[r].iter_mut().zip(&pivot) {
                    *x -= &f * y;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn small_rational() -> impl Strategy<Value = Rational> {
    prop_oneof![3 => Just(0i64), 2 => -4i64..=4].prop_flat_map(|p| (1i64..=3).prop_map(move |q| ratio(p, q)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sparse_rank_matches_dense_elimination(
        rows in prop::collection::vec(prop::collection::vec(small_rational(), 7), 1..9)
    ) {
        let m = SparseMatrix::from_dense(&rows);
        prop_assert_eq!(m.rank(), dense_rank(rows.clone()));
        prop_assert_eq!(m.nullity(), 7 - dense_rank(rows));
    }

    #[test]
    fn bspline_matches_divided_differences(
        gaps in prop::collection::vec(1i64..=8, 4),
        den in 1i64..=6,
        at in 0i64..=64,
    ) {
        let mut t: [Rational; 5] = std::array::from_fn(|_| int(0));
        for k in 0..4 {
            t[k + 1] = &t[k] + ratio(gaps[k], den);
        }
        let x = &t[0] + (&t[4] - &t[0]) * ratio(at, 64);
        let lib = cubic_bspline(&t, &x, 0, false);
        let x_in = x < t[4];
        let oracle = if x_in { bspline_divided_difference(&t, &x) } else { int(0) };
        prop_assert_eq!(lib, oracle);
    }

    #[test]
    fn four_by_four_determinant(rows in prop::collection::vec(prop::collection::vec(small_rational(), 4), 4)) {
        let d = determinant(&rows);
        prop_assert_eq!(d.is_zero(), dense_rank(rows) < 4);
    }
}

/// Trace on the line through `p` along `axis`, recomputed from unit edges.
fn trace_from_edges(t: &TMesh, p: Point, axis: Axis) -> Vec<i32> {
    let d = t.domain();
    let crosses = |q: Point| match axis {
        Axis::Horizontal => t.has_v_unit(q.i, q.j) || t.has_v_unit(q.i, q.j - 1),
        Axis::Vertical => t.has_h_unit(q.i, q.j) || t.has_h_unit(q.i - 1, q.j),
    };
    match axis {
        Axis::Horizontal => (d.m_lo..=d.m_hi).filter(|&i| crosses(Point::new(i, p.j))).collect(),
        Axis::Vertical => (d.n_lo..=d.n_hi).filter(|&j| crosses(Point::new(p.i, j))).collect(),
    }
}

/// Extension hull `[lo, hi]` of a T-junction from the two-bay / one-bay rule.
fn oracle_extension(t: &TMesh, p: Point, s: Symbol) -> (Axis, i32, i32, i32) {
    let (axis, line, k, towards_low) = match s {
        Symbol::MissingLeft => (Axis::Horizontal, p.j, p.i, true),
        Symbol::MissingRight => (Axis::Horizontal, p.j, p.i, false),
        Symbol::MissingDown => (Axis::Vertical, p.i, p.j, true),
        Symbol::MissingUp => (Axis::Vertical, p.i, p.j, false),
        _ => unreachable!(),
    };
    let tr = trace_from_edges(t, p, axis);
    let pos = tr.iter().position(|&x| x == k).unwrap();
    if towards_low {
        (axis, line, tr[pos - 2], tr[pos + 1])
    } else {
        (axis, line, tr[pos - 1], tr[pos + 2])
    }
}

fn oracle_suitable(t: &TMesh) -> bool {
    let ext: Vec<_> = t.t_junctions().into_iter().map(|(p, s)| oracle_extension(t, p, s)).collect();
    let mut hpts = std::collections::BTreeSet::new();
    let mut vpts = std::collections::BTreeSet::new();
    for (axis, line, lo, hi) in ext {
        for k in lo..=hi {
            match axis {
                Axis::Horizontal => hpts.insert((k, line)),
                Axis::Vertical => vpts.insert((line, k)),
            };
        }
    }
    hpts.is_disjoint(&vpts)
}

#[test]
fn extensions_and_suitability_match_brute_force() {
    let mut rng = rng(7);
    let mut seen_unsuitable = 0;
    for _ in 0..120 {
        let t = random_any_mesh(&mut rng);
        let lib = tjunction_extensions(&t).unwrap();
        for e in &lib {
            let (axis, line, lo, hi) = oracle_extension(&t, e.owner, e.symbol);
            assert_eq!((e.axis, e.full().line, e.full().lo, e.full().hi), (axis, line, lo, hi));
        }
        let ok = is_analysis_suitable(&t).unwrap().0;
        assert_eq!(ok, oracle_suitable(&t));
        seen_unsuitable += (!ok) as usize;
    }
    assert!(seen_unsuitable > 0, "generator never produced a mesh that fails the test");
}

/// Admissible mesh with random partial lines, suitable or not.
fn random_any_mesh(rng: &mut impl rand::Rng) -> TMesh {
    use tspline_core::{build_tmesh, IndexDomain, Span};
    loop {
        let (m, n) = (rng.gen_range(9..=12), rng.gen_range(9..=12));
        let d = IndexDomain::new(0, m, 0, n).unwrap();
        let keep = |k: i32, hi: i32| k <= 3 || k >= hi - 3;
        let mut h: Vec<Span> = (0..=n).filter(|&j| keep(j, n)).map(|j| Span::new(j, 0, m)).collect();
        let mut v: Vec<Span> = (0..=m).filter(|&i| keep(i, m)).map(|i| Span::new(i, 0, n)).collect();
        for _ in 0..rng.gen_range(2..=6) {
            let line = rng.gen_range(4..=7);
            if rng.gen_bool(0.5) {
                let a = rng.gen_range(2..=3);
                let b = [m - 3, m - 2][rng.gen_range(0..2)];
                h.push(Span::new(line, a, b));
            } else {
                let a = rng.gen_range(2..=3);
                let b = [n - 3, n - 2][rng.gen_range(0..2)];
                v.push(Span::new(line, a, b));
            }
        }
        if let Ok(t) = build_tmesh(d, &h, &v) {
            if t.is_admissible() {
                return t;
            }
        }
    }
}

#[test]
fn symbolic_form_round_trips() {
    let mut rng = rng(11);
    for _ in 0..40 {
        let t = random_as_mesh(&mut rng, 12);
        let sym = t.symbolic();
        assert_eq!(TMesh::from_symbolic(&sym).unwrap(), t);
        let text = sym.to_string();
        assert_eq!(text.lines().count(), t.domain().height() + 1);
        for p in t.t_junctions() {
            assert!(p.1.is_t_junction());
        }
    }
}

#[test]
fn extended_vertex_count_matches_direct_union() {
    let mut rng = rng(3);
    for _ in 0..30 {
        let t = random_as_mesh(&mut rng, 12);
        let e = extend(&t).unwrap();
        let vertices = e.ext_mesh.vertices();
        assert_eq!(e.n_ext(), vertices.len());
        assert!(t.is_submesh_of(&e.ext_mesh));
        let d = t.domain();
        let active = t.vertices().into_iter().filter(|&p| d.in_active_region(p)).count();
        assert_eq!(e.n_active(), active);
    }
}

#[test]
fn tensor_refinement_matches_knot_insertion() {
    let mut rng = rng(5);
    for _ in 0..6 {
        let (m, n) = (11, 10);
        let full_cols: Vec<i32> = (0..=m).collect();
        let full_rows: Vec<i32> = (0..=n).collect();
        let pick = |rng: &mut rand_chacha::ChaCha8Rng, hi: i32| -> Vec<i32> {
            use rand::Rng;
            (0..=hi).filter(|&k| k <= 3 || k >= hi - 3 || rng.gen_bool(0.4)).collect()
        };
        let cols = pick(&mut rng, m);
        let rows = pick(&mut rng, n);
        let coarse_t = tensor(m, n, &cols, &rows);
        let fine_t = tensor(m, n, &full_cols, &full_rows);
        let knots = random_knots(&mut rng, fine_t.domain());
        let cert = certify_nested(&coarse_t, &knots, &fine_t, &knots).unwrap();
        assert!(cert.is_nested());
        let coarse = SplineSpace::new(coarse_t, knots.clone()).unwrap();
        let fine = SplineSpace::new(fine_t, knots.clone()).unwrap();
        let r = refinement_matrix::<Rational>(&coarse, &fine, &cert).unwrap();

        let pick_knots = |all: &[Rational], idx: &[i32]| -> Vec<Rational> { idx.iter().map(|&k| all[k as usize].clone()).collect() };
        let rx = boehm_matrix(&pick_knots(knots.xi_all(), &cols), knots.xi_all());
        let ry = boehm_matrix(&pick_knots(knots.eta_all(), &rows), knots.eta_all());
        for (a, fa) in coarse.functions.iter().enumerate() {
            let ia = cols.iter().position(|&c| c == fa.anchor.i).unwrap() - 2;
            let ja = rows.iter().position(|&c| c == fa.anchor.j).unwrap() - 2;
            for (b, fb) in fine.functions.iter().enumerate() {
                let ib = (fb.anchor.i - 2) as usize;
                let jb = (fb.anchor.j - 2) as usize;
                let expected = &rx[ia][ib] * &ry[ja][jb];
                assert_eq!(r.get(a, b), expected, "A={:?} B={:?}", fa.anchor, fb.anchor);
            }
        }
    }
}

#[test]
fn boehm_oracle_reproduces_bsplines() {
    // Sanity check of the oracle itself on a clamped vector.
    let coarse: Vec<Rational> = [0, 0, 0, 0, 2, 4, 4, 4, 4].iter().map(|&k| int(k)).collect();
    let fine: Vec<Rational> = [0, 0, 0, 0, 1, 2, 3, 4, 4, 4, 4].iter().map(|&k| int(k)).collect();
    let r = boehm_matrix(&coarse, &fine);
    for i in 0..coarse.len() - 4 {
        let ck: [Rational; 5] = std::array::from_fn(|k| coarse[i + k].clone());
        for s in 0..16 {
            let x = ratio(s, 4);
            let lhs = cubic_bspline(&ck, &x, 0, false);
            let rhs = (0..fine.len() - 4).fold(int(0), |acc, j| {
                let fk: [Rational; 5] = std::array::from_fn(|k| fine[j + k].clone());
                acc + &r[i][j] * cubic_bspline(&fk, &x, 0, false)
            });
            assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn uniform_knots_are_indices() {
    let t = single_t();
    let k = GlobalKnots::uniform(t.domain());
    assert!((0..=10).all(|i| *k.xi(i) == int(i as i64)));
}

#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tspline_core::field::{int, ratio};
use tspline_core::extension::{ExtendedTMesh, VertexClass};
use tspline_core::{build_tmesh, is_analysis_suitable, Axis, GlobalKnots, IndexDomain, Point, Rational, Span, TMesh};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn grid(m: i32, n: i32) -> TMesh {
    let d = IndexDomain::new(0, m, 0, n).unwrap();
    let h: Vec<Span> = (0..=n).map(|j| Span::new(j, 0, m)).collect();
    let v: Vec<Span> = (0..=m).map(|i| Span::new(i, 0, n)).collect();
    build_tmesh(d, &h, &v).unwrap()
}

/// Grid on `[0, m] x [0, n]` keeping only the listed full columns and rows.
pub fn tensor(m: i32, n: i32, cols: &[i32], rows: &[i32]) -> TMesh {
    let d = IndexDomain::new(0, m, 0, n).unwrap();
    let h: Vec<Span> = rows.iter().map(|&j| Span::new(j, 0, m)).collect();
    let v: Vec<Span> = cols.iter().map(|&i| Span::new(i, 0, n)).collect();
    build_tmesh(d, &h, &v).unwrap()
}

pub fn single_t() -> TMesh {
    let d = IndexDomain::new(0, 10, 0, 9).unwrap();
    let h: Vec<Span> = (0..=9).map(|j| Span::new(j, 0, 10)).collect();
    let v: Vec<Span> = (0..=10).map(|i| if i == 5 { Span::new(5, 4, 9) } else { Span::new(i, 0, 9) }).collect();
    build_tmesh(d, &h, &v).unwrap()
}

fn required(lo: i32, hi: i32, k: i32) -> bool {
    k <= lo + 3 || k >= hi - 3
}

/// Random admissible analysis-suitable mesh: required lines, a random subset
/// of the other full lines, then a few partial lines between existing lines.
pub fn random_as_mesh(rng: &mut impl Rng, max_side: i32) -> TMesh {
    loop {
        let m = rng.gen_range(9..=max_side);
        let n = rng.gen_range(9..=max_side);
        let d = IndexDomain::new(0, m, 0, n).unwrap();
        let cols: Vec<i32> = (0..=m).filter(|&i| required(0, m, i) || rng.gen_bool(0.5)).collect();
        let rows: Vec<i32> = (0..=n).filter(|&j| required(0, n, j) || rng.gen_bool(0.5)).collect();
        let mut h: Vec<Span> = rows.iter().map(|&j| Span::new(j, 0, m)).collect();
        let mut v: Vec<Span> = cols.iter().map(|&i| Span::new(i, 0, n)).collect();
        let k = rng.gen_range(1..=6);
        for _ in 0..k {
            let horizontal = rng.gen_bool(0.5);
            let (len, across, lines) = if horizontal { (m, n, &cols) } else { (n, m, &rows) };
            let line = rng.gen_range(3..=across - 3);
            let ends: Vec<i32> = lines.iter().copied().filter(|&x| x >= 2 && x <= len - 2).collect();
            let a = rng.gen_range(0..ends.len() - 1);
            let b = rng.gen_range(a + 1..ends.len());
            let span = Span::new(line, ends[a], ends[b]);
            if horizontal {
                h.push(span);
            } else {
                v.push(span);
            }
        }
        let Ok(t) = build_tmesh(d, &h, &v) else { continue };
        if t.is_admissible() && is_analysis_suitable(&t).is_ok_and(|(ok, _)| ok) {
            return t;
        }
    }
}

/// Strictly increasing knots `k + r_k` with `r_k` a rational in `[0, 1/2]` of denominator at most 16.
pub fn random_knots(rng: &mut impl Rng, d: IndexDomain) -> GlobalKnots {
    let mut axis = |lo: i32, hi: i32| -> Vec<Rational> {
        (lo..=hi)
            .map(|k| {
                let q = rng.gen_range(1..=16i64);
                let p = rng.gen_range(0..=q / 2);
                int(k as i64) + ratio(p, q)
            })
            .collect()
    };
    let xi = axis(d.m_lo, d.m_hi);
    let eta = axis(d.n_lo, d.n_hi);
    GlobalKnots::new(d, xi, eta).unwrap()
}

/// Cubic B-spline on distinct knots from the divided-difference definition.
pub fn bspline_divided_difference(t: &[Rational; 5], x: &Rational) -> Rational {
    let f = |s: &Rational| {
        let d = s - x;
        if d > int(0) {
            &d * &d * &d
        } else {
            int(0)
        }
    };
    let mut dd: Vec<Rational> = t.iter().map(f).collect();
    for level in 1..5 {
        dd = (0..dd.len() - 1).map(|i| (&dd[i + 1] - &dd[i]) / (&t[i + level] - &t[i])).collect();
    }
    (&t[4] - &t[0]) * &dd[0]
}

/// Univariate refinement by repeated single-knot insertion:
/// `old[i] = sum_j r[i][j] new[j]` for cubic B-splines on the global vectors.
pub fn boehm_matrix(coarse: &[Rational], fine: &[Rational]) -> Vec<Vec<Rational>> {
    let mut knots = coarse.to_vec();
    let n0 = coarse.len() - 4;
    let mut r: Vec<Vec<Rational>> = (0..n0).map(|i| (0..n0).map(|j| int((i == j) as i64)).collect()).collect();
    for x in fine.iter() {
        let already = knots.iter().filter(|k| *k == x).count();
        let wanted = fine.iter().filter(|k| *k == x).count();
        if already >= wanted {
            continue;
        }
        let n = knots.len() - 4;
        // B_i = a_i B'_i + (1 - a_{i+1}) B'_{i+1}
        let alpha = |i: usize| -> Rational {
            if i > n {
                return int(0);
            }
            let (ti, tp) = (&knots[i], &knots[i + 3]);
            if x <= ti {
                int(0)
            } else if x >= tp {
                int(1)
            } else {
                (x - ti) / (tp - ti)
            }
        };
        let step: Vec<Vec<Rational>> = (0..n)
            .map(|i| {
                let mut row = vec![int(0); n + 1];
                row[i] = alpha(i);
                row[i + 1] = int(1) - alpha(i + 1);
                row
            })
            .collect();
        r = r
            .iter()
            .map(|row| {
                (0..n + 1)
                    .map(|j| row.iter().zip(&step).fold(int(0), |acc, (a, s)| acc + a * &s[j]))
                    .collect()
            })
            .collect();
        let pos = knots.iter().position(|k| k > x).unwrap_or(knots.len());
        knots.insert(pos, x.clone());
    }
    r
}

/// Extended vertices strictly between the owners of two parallel face
/// extensions that meet in a single point. The faces close the gap between
/// the two junctions, yet only the meeting point is an overlap vertex.
pub fn closed_gap_vertices(ext: &ExtendedTMesh) -> usize {
    let along = |axis: Axis, p: Point| if axis == Axis::Horizontal { p.i } else { p.j };
    let mut pts = std::collections::BTreeSet::new();
    for a in &ext.extensions {
        for b in &ext.extensions {
            if a.axis != b.axis || a.face.line != b.face.line || a.owner >= b.owner {
                continue;
            }
            if a.face.lo.max(b.face.lo) != a.face.hi.min(b.face.hi) {
                continue;
            }
            let (o1, o2) = (along(a.axis, a.owner), along(a.axis, b.owner));
            for (&p, &c) in &ext.classes {
                let k = along(a.axis, p);
                if c == VertexClass::Extended
                    && (a.face_contains(p) || b.face_contains(p))
                    && k > o1.min(o2)
                    && k < o1.max(o2)
                {
                    pts.insert(p);
                }
            }
        }
    }
    pts.len()
}

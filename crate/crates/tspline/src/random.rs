//! Seeded generators for random admissible analysis-suitable meshes.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tspline_core::field::{int, ratio};
use tspline_core::{
    build_tmesh, extend, is_analysis_suitable, try_certify_nested, Axis, GlobalKnots, IndexDomain, Rational, Span, TMesh,
};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Lines `lo..=lo+3` and `hi-3..=hi` are always full.
fn required(lo: i32, hi: i32, k: i32) -> bool {
    k <= lo + 3 || k >= hi - 3
}

/// Random admissible analysis-suitable mesh on `[0, m] x [0, n]` with
/// sides drawn from `sides`.
///
/// Starts from the required lines plus a random half of the others, then
/// inserts one to six partial lines whose ends sit on existing full lines.
/// Candidates that are not admissible or not suitable are rejected.
pub fn random_as_mesh(rng: &mut impl Rng, sides: std::ops::RangeInclusive<i32>) -> TMesh {
    loop {
        let m = rng.gen_range(sides.clone());
        let n = rng.gen_range(sides.clone());
        let d = IndexDomain::new(0, m, 0, n).expect("sides are at least 7");
        let cols: Vec<i32> = (0..=m).filter(|&i| required(0, m, i) || rng.gen_bool(0.5)).collect();
        let rows: Vec<i32> = (0..=n).filter(|&j| required(0, n, j) || rng.gen_bool(0.5)).collect();
        let mut h: Vec<Span> = rows.iter().map(|&j| Span::new(j, 0, m)).collect();
        let mut v: Vec<Span> = cols.iter().map(|&i| Span::new(i, 0, n)).collect();
        for _ in 0..rng.gen_range(1..=6) {
            let horizontal = rng.gen_bool(0.5);
            let (len, across, stops) = if horizontal { (m, n, &cols) } else { (n, m, &rows) };
            let line = rng.gen_range(3..=across - 3);
            let ends: Vec<i32> = stops.iter().copied().filter(|&x| x >= 2 && x <= len - 2).collect();
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

/// Strictly increasing knots `k + r` with `r` in `[0, 1/2]` of denominator at most 16.
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
    GlobalKnots::new(d, xi, eta).expect("strictly increasing")
}

/// Closes one interior knot span in each direction.
pub fn with_zero_spans(rng: &mut impl Rng, knots: &GlobalKnots) -> GlobalKnots {
    let d = knots.domain();
    let mut xi = knots.xi_all().to_vec();
    let mut eta = knots.eta_all().to_vec();
    let c = rng.gen_range(4..=d.width() - 4);
    xi[c] = xi[c - 1].clone();
    let r = rng.gen_range(4..=d.height() - 4);
    eta[r] = eta[r - 1].clone();
    GlobalKnots::new(d, xi, eta).expect("one double knot per axis")
}

/// A coarse mesh and a refinement of it over the same index domain and knots.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub coarse: TMesh,
    pub fine: TMesh,
    pub knots: GlobalKnots,
    /// The coarse mesh was first given an empty index line to insert into.
    pub embedded: bool,
}

/// `t2 = t1` plus one line, admissible and analysis-suitable, with
/// `ext(t1)` inside `ext(t2)`. When either extended mesh has overlap
/// vertices the unperturbed containment is not enough, so the perturbed
/// containment is required as well.
pub fn is_legal_insertion(t1: &TMesh, t2: &TMesh, knots: &GlobalKnots) -> bool {
    if t2 == t1 || !t1.is_submesh_of(t2) || !t2.is_admissible() {
        return false;
    }
    if !is_analysis_suitable(t2).is_ok_and(|(ok, _)| ok) {
        return false;
    }
    let (Ok(e1), Ok(e2)) = (extend(t1), extend(t2)) else { return false };
    if !e1.ext_mesh.is_submesh_of(&e2.ext_mesh) {
        return false;
    }
    e1.n_overlap() + e2.n_overlap() == 0 || try_certify_nested(t1, knots, t2, knots).is_nested()
}

fn with_span(t: &TMesh, axis: Axis, span: Span) -> Option<TMesh> {
    let mut h = t.lines(Axis::Horizontal);
    let mut v = t.lines(Axis::Vertical);
    match axis {
        Axis::Horizontal => h.push(span),
        Axis::Vertical => v.push(span),
    }
    build_tmesh(t.domain(), &h, &v).ok()
}

/// Spans `[a, b]` on interior lines `line` of one axis, in random order.
fn candidates(d: IndexDomain, axes: &[(Axis, Vec<i32>)], rng: &mut impl Rng) -> Vec<(Axis, Span)> {
    let mut out = Vec::new();
    for (axis, lines) in axes {
        let (lo, hi) = match axis {
            Axis::Horizontal => (d.m_lo, d.m_hi),
            Axis::Vertical => (d.n_lo, d.n_hi),
        };
        for &line in lines {
            for a in lo..hi {
                for b in a + 1..=hi {
                    out.push((*axis, Span::new(line, a, b)));
                }
            }
        }
    }
    out.shuffle(rng);
    out
}

fn interior(lo: i32, hi: i32) -> Vec<i32> {
    (lo + 4..=hi - 4).collect()
}

fn first_legal(t: &TMesh, knots: &GlobalKnots, cands: Vec<(Axis, Span)>) -> Option<TMesh> {
    cands.into_iter().find_map(|(axis, s)| with_span(t, axis, s).filter(|t2| is_legal_insertion(t, t2, knots)))
}

/// A random legal one-line refinement of `t`.
///
/// Lines of the index domain are tried first. When every interior line is
/// already full, an empty index line with the midpoint knot is added to the
/// domain and the insertion goes there.
pub fn legal_refinement(t: &TMesh, knots: &GlobalKnots, rng: &mut impl Rng) -> Option<Refinement> {
    let d = t.domain();
    let axes = [(Axis::Horizontal, interior(d.n_lo, d.n_hi)), (Axis::Vertical, interior(d.m_lo, d.m_hi))];
    if let Some(fine) = first_legal(t, knots, candidates(d, &axes, rng)) {
        return Some(Refinement { coarse: t.clone(), fine, knots: knots.clone(), embedded: false });
    }
    let mut slots: Vec<(Axis, i32)> = [(Axis::Vertical, d.m_lo, d.m_hi), (Axis::Horizontal, d.n_lo, d.n_hi)]
        .into_iter()
        .flat_map(|(axis, lo, hi)| (lo + 3..=hi - 4).map(move |k| (axis, k)))
        .collect();
    slots.shuffle(rng);
    slots.into_iter().find_map(|(axis, after)| {
        let (coarse, k2) = with_fresh_line(t, knots, axis, after);
        let cands = candidates(coarse.domain(), &[(axis, vec![after + 1])], rng);
        let fine = first_legal(&coarse, &k2, cands)?;
        Some(Refinement { coarse, fine, knots: k2, embedded: true })
    })
}

/// Adds an empty index line after index `after`: a column for
/// `Axis::Vertical`, a row for `Axis::Horizontal`. Its knot is the midpoint
/// of its neighbours, so the spline space is unchanged.
pub fn with_fresh_line(t: &TMesh, knots: &GlobalKnots, axis: Axis, after: i32) -> (TMesh, GlobalKnots) {
    let d = t.domain();
    let shift = |k: i32| if k > after { k + 1 } else { k };
    let mut h = t.lines(Axis::Horizontal);
    let mut v = t.lines(Axis::Vertical);
    let (along, across, domain) = match axis {
        Axis::Vertical => (&mut h, &mut v, IndexDomain::new(d.m_lo, d.m_hi + 1, d.n_lo, d.n_hi)),
        Axis::Horizontal => (&mut v, &mut h, IndexDomain::new(d.m_lo, d.m_hi, d.n_lo, d.n_hi + 1)),
    };
    for s in along.iter_mut() {
        *s = Span::new(s.line, shift(s.lo), shift(s.hi));
    }
    for s in across.iter_mut() {
        *s = Span::new(shift(s.line), s.lo, s.hi);
    }
    let domain = domain.expect("domain grows");
    let mut xi = knots.xi_all().to_vec();
    let mut eta = knots.eta_all().to_vec();
    let (vals, lo) = match axis {
        Axis::Vertical => (&mut xi, d.m_lo),
        Axis::Horizontal => (&mut eta, d.n_lo),
    };
    let k = (after - lo) as usize;
    let mid = (vals[k].clone() + vals[k + 1].clone()) / int(2);
    vals.insert(k + 1, mid);
    let mesh = build_tmesh(domain, &h, &v).expect("shifted lines stay inside");
    (mesh, GlobalKnots::new(domain, xi, eta).expect("midpoint keeps knots increasing"))
}

/// Lines of `t` that are not required full lines, for shrinking counterexamples.
pub fn optional_lines(t: &TMesh) -> Vec<(Axis, Span)> {
    let d = t.domain();
    let mut out = Vec::new();
    for axis in [Axis::Horizontal, Axis::Vertical] {
        let (lo, hi) = match axis {
            Axis::Horizontal => (d.n_lo, d.n_hi),
            Axis::Vertical => (d.m_lo, d.m_hi),
        };
        for s in t.lines(axis) {
            if !required(lo, hi, s.line) {
                out.push((axis, s));
            }
        }
    }
    out
}

/// `t` without one of its lines, if the result is still a valid mesh.
pub fn remove_line(t: &TMesh, axis: Axis, span: Span) -> Option<TMesh> {
    let mut h = t.lines(Axis::Horizontal);
    let mut v = t.lines(Axis::Vertical);
    match axis {
        Axis::Horizontal => h.retain(|s| *s != span),
        Axis::Vertical => v.retain(|s| *s != span),
    }
    build_tmesh(t.domain(), &h, &v).ok()
}

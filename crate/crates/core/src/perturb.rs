//! Perturbed knot vectors and perturbed T-meshes.
//!
//! Every line index is repeated once per segment on that line, and every
//! zero knot span is opened to `c_alpha * delta`. Vertices and edges of the
//! `g`-th segment on a line move to the `g`-th copy of that line.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::dimension::{assemble, dim_formula, report_from, DimensionError, DimensionReport};
use crate::extension::{extend, is_analysis_suitable, ExtendError};
use crate::field::{int, rational_to_f64, Rational};
use crate::mesh::{build_tmesh, Axis, IndexDomain, MeshError, Point, Span, TMesh};
use crate::spline::{index_vectors, GlobalKnots, SplineError, SplineSpace};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PerturbError {
    #[error("perturbation coefficient for {axis:?} slot {slot} is negative")]
    NegativeCoefficient { axis: Axis, slot: usize },
    #[error("delta must be positive")]
    NonPositiveDelta,
    #[error("a strictly positive perturbation is required")]
    NotStrict,
    #[error("first mesh is not a submesh of the second; edge at {0} is missing")]
    NotASubmesh(Point),
    #[error("deltas must be positive and decreasing")]
    BadDeltas,
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error(transparent)]
    Extend(#[from] ExtendError),
    #[error(transparent)]
    Dimension(#[from] DimensionError),
}

/// Perturbation coefficients `c_alpha`, one per zero-span slot and axis.
///
/// Slots are numbered in index order along each axis. Unlisted slots use `default`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coefficients {
    pub default: Rational,
    pub xi: BTreeMap<usize, Rational>,
    pub eta: BTreeMap<usize, Rational>,
}

impl Default for Coefficients {
    fn default() -> Self {
        Coefficients { default: int(1), xi: BTreeMap::new(), eta: BTreeMap::new() }
    }
}

impl Coefficients {
    fn get(&self, axis: Axis, slot: usize) -> &Rational {
        let map = match axis {
            Axis::Horizontal => &self.xi,
            Axis::Vertical => &self.eta,
        };
        map.get(&slot).unwrap_or(&self.default)
    }

    fn check(&self) -> Result<bool, PerturbError> {
        for (axis, map) in [(Axis::Horizontal, &self.xi), (Axis::Vertical, &self.eta)] {
            if let Some((&slot, _)) = map.iter().find(|(_, c)| c.is_negative()) {
                return Err(PerturbError::NegativeCoefficient { axis, slot });
            }
        }
        if self.default.is_negative() {
            return Err(PerturbError::NegativeCoefficient { axis: Axis::Horizontal, slot: usize::MAX });
        }
        let strict = !self.default.is_zero() && self.xi.values().chain(self.eta.values()).all(|c| !c.is_zero());
        Ok(strict)
    }
}

/// Copies of each original line: `copies[k]` lists the perturbed indices of line `lo + k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineMap {
    pub lo: i32,
    pub copies: Vec<Vec<i32>>,
    /// `pi[k]`: original index of perturbed index `lo + k`.
    pub pi: Vec<i32>,
}

impl LineMap {
    fn build(lo: i32, counts: &[usize]) -> Self {
        let mut next = lo;
        let mut copies = Vec::new();
        let mut pi = Vec::new();
        for (k, &c) in counts.iter().enumerate() {
            let c = c.max(1);
            copies.push((next..next + c as i32).collect());
            pi.extend(core::iter::repeat_n(lo + k as i32, c));
            next += c as i32;
        }
        LineMap { lo, copies, pi }
    }

    pub fn index(&self, line: i32, g: usize) -> i32 {
        self.copies[(line - self.lo) as usize][g]
    }

    pub fn pi(&self, k: i32) -> i32 {
        self.pi[(k - self.lo) as usize]
    }

    pub fn hi(&self) -> i32 {
        self.lo + self.pi.len() as i32 - 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerturbedKnots {
    pub knots: GlobalKnots,
    /// `h_pi`: perturbed column index to original column index.
    pub columns: LineMap,
    /// `v_pi`: perturbed row index to original row index.
    pub rows: LineMap,
    pub delta: Rational,
    pub strict: bool,
}

impl PerturbedKnots {
    pub fn h_pi(&self, i: i32) -> i32 {
        self.columns.pi(i)
    }

    pub fn v_pi(&self, j: i32) -> i32 {
        self.rows.pi(j)
    }

    pub fn pi(&self, p: Point) -> Point {
        Point::new(self.h_pi(p.i), self.v_pi(p.j))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerturbedMesh {
    pub mesh: TMesh,
    /// Perturbed vertex to the original vertex it came from.
    pub provenance: BTreeMap<Point, Point>,
}

/// Ordinal of the segment on `p`'s line that contains `p`.
fn segment_ordinal(segments: &BTreeMap<i32, Vec<Span>>, line: i32, k: i32) -> Option<usize> {
    segments.get(&line)?.iter().position(|s| s.contains(k))
}

struct Maps {
    h_segs: BTreeMap<i32, Vec<Span>>,
    v_segs: BTreeMap<i32, Vec<Span>>,
    columns: LineMap,
    rows: LineMap,
}

impl Maps {
    fn new(mesh: &TMesh) -> Self {
        let d = mesh.domain();
        let mut h_segs: BTreeMap<i32, Vec<Span>> = BTreeMap::new();
        for s in mesh.lines(Axis::Horizontal) {
            h_segs.entry(s.line).or_default().push(s);
        }
        let mut v_segs: BTreeMap<i32, Vec<Span>> = BTreeMap::new();
        for s in mesh.lines(Axis::Vertical) {
            v_segs.entry(s.line).or_default().push(s);
        }
        let col_counts: Vec<usize> = (d.m_lo..=d.m_hi).map(|i| v_segs.get(&i).map_or(0, Vec::len)).collect();
        let row_counts: Vec<usize> = (d.n_lo..=d.n_hi).map(|j| h_segs.get(&j).map_or(0, Vec::len)).collect();
        Maps { columns: LineMap::build(d.m_lo, &col_counts), rows: LineMap::build(d.n_lo, &row_counts), h_segs, v_segs }
    }

    fn domain(&self) -> Result<IndexDomain, MeshError> {
        IndexDomain::new(self.columns.lo, self.columns.hi(), self.rows.lo, self.rows.hi())
    }

    /// Image of a vertex lying on both a horizontal and a vertical segment.
    fn vertex(&self, p: Point) -> Point {
        let g = segment_ordinal(&self.v_segs, p.i, p.j).expect("vertex on a vertical segment");
        let h = segment_ordinal(&self.h_segs, p.j, p.i).expect("vertex on a horizontal segment");
        Point::new(self.columns.index(p.i, g), self.rows.index(p.j, h))
    }

    /// Image of a span lying inside some segment of the mesh these maps were built from.
    fn span(&self, axis: Axis, s: Span) -> Span {
        match axis {
            Axis::Horizontal => {
                let h = segment_ordinal(&self.h_segs, s.line, s.lo).expect("span inside a segment");
                let a = self.vertex(Point::new(s.lo, s.line));
                let b = self.vertex(Point::new(s.hi, s.line));
                Span::new(self.rows.index(s.line, h), a.i, b.i)
            }
            Axis::Vertical => {
                let g = segment_ordinal(&self.v_segs, s.line, s.lo).expect("span inside a segment");
                let a = self.vertex(Point::new(s.line, s.lo));
                let b = self.vertex(Point::new(s.line, s.hi));
                Span::new(self.columns.index(s.line, g), a.j, b.j)
            }
        }
    }
}

fn perturbed_axis(
    axis: Axis,
    map: &LineMap,
    orig: &GlobalKnots,
    delta: &Rational,
    coeffs: &Coefficients,
) -> Vec<Rational> {
    let knot = |k: i32| match axis {
        Axis::Horizontal => orig.xi(k),
        Axis::Vertical => orig.eta(k),
    };
    let mut out = Vec::with_capacity(map.pi.len());
    let mut slot = 0;
    out.push(knot(map.pi[0]).clone());
    for w in map.pi.windows(2) {
        let diff = knot(w[1]) - knot(w[0]);
        let step = if diff.is_zero() {
            let s = coeffs.get(axis, slot) * delta;
            slot += 1;
            s
        } else {
            diff
        };
        let next = out.last().expect("non-empty") + step;
        out.push(next);
    }
    out
}

/// Number of zero-span slots per axis, in the order `perturb` numbers them.
pub fn zero_span_slots(mesh: &TMesh, knots: &GlobalKnots) -> (usize, usize) {
    let maps = Maps::new(mesh);
    let count = |map: &LineMap, axis: Axis| {
        map.pi.windows(2).filter(|w| knots.knot(axis, w[0]) == knots.knot(axis, w[1])).count()
    };
    (count(&maps.columns, Axis::Horizontal), count(&maps.rows, Axis::Vertical))
}

pub fn perturb(
    mesh: &TMesh,
    knots: &GlobalKnots,
    delta: &Rational,
    coeffs: &Coefficients,
) -> Result<(PerturbedKnots, PerturbedMesh), PerturbError> {
    if !delta.is_positive() {
        return Err(PerturbError::NonPositiveDelta);
    }
    let strict = coeffs.check()?;
    let maps = Maps::new(mesh);
    let domain = maps.domain()?;
    let xi = perturbed_axis(Axis::Horizontal, &maps.columns, knots, delta, coeffs);
    let eta = perturbed_axis(Axis::Vertical, &maps.rows, knots, delta, coeffs);
    let pk = PerturbedKnots {
        knots: GlobalKnots::new_unchecked(domain, xi, eta),
        columns: maps.columns.clone(),
        rows: maps.rows.clone(),
        delta: delta.clone(),
        strict,
    };
    let pm = map_mesh(mesh, &maps, domain)?;
    Ok((pk, pm))
}

fn map_mesh(mesh: &TMesh, maps: &Maps, domain: IndexDomain) -> Result<PerturbedMesh, PerturbError> {
    let h: Vec<Span> = mesh.lines(Axis::Horizontal).into_iter().map(|s| maps.span(Axis::Horizontal, s)).collect();
    let v: Vec<Span> = mesh.lines(Axis::Vertical).into_iter().map(|s| maps.span(Axis::Vertical, s)).collect();
    let out = build_tmesh(domain, &h, &v)?;
    let provenance = mesh.vertices().into_iter().map(|p| (maps.vertex(p), p)).collect();
    Ok(PerturbedMesh { mesh: out, provenance })
}

/// `T1[delta, T2]`: the strictly perturbed `t2` with the images of `t2 \ t1` removed.
pub fn relative_perturb(
    t1: &TMesh,
    t2: &TMesh,
    knots2: &GlobalKnots,
    delta: &Rational,
    coeffs: &Coefficients,
) -> Result<(PerturbedKnots, PerturbedMesh), PerturbError> {
    if let Some((_, p)) = t1.first_edge_not_in(t2) {
        return Err(PerturbError::NotASubmesh(p));
    }
    let (pk, _) = perturb(t2, knots2, delta, coeffs)?;
    if !pk.strict {
        return Err(PerturbError::NotStrict);
    }
    let maps = Maps::new(t2);
    let domain = pk.knots.domain();
    let h: Vec<Span> = t1.lines(Axis::Horizontal).into_iter().map(|s| maps.span(Axis::Horizontal, s)).collect();
    let v: Vec<Span> = t1.lines(Axis::Vertical).into_iter().map(|s| maps.span(Axis::Vertical, s)).collect();
    let mesh = build_tmesh(domain, &h, &v)?;
    let provenance = t1.vertices().into_iter().map(|p| (maps.vertex(p), p)).collect();
    Ok((pk, PerturbedMesh { mesh, provenance }))
}

/// Checks `h_pi(hv(A)[delta]) = hv(pi(A))` and the vertical analogue for every
/// anchor of the perturbed mesh. Returns the first failing perturbed anchor.
pub fn check_index_commutation(original: &TMesh, pk: &PerturbedKnots, pm: &PerturbedMesh) -> Result<Option<Point>, PerturbError> {
    for a in pm.mesh.anchors() {
        let (hv, vv) = index_vectors(&pm.mesh, a)?;
        let image = pk.pi(a);
        let (hv0, vv0) = index_vectors(original, image)?;
        if hv.map(|i| pk.h_pi(i)) != hv0 || vv.map(|j| pk.v_pi(j)) != vv0 {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

/// Deviation table: `rows[k][d]` is `sup |N_A[delta_d] - N_pi(A)|` for perturbed anchor `anchors[k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviationTable {
    pub deltas: Vec<Rational>,
    pub anchors: Vec<Point>,
    pub rows: Vec<Vec<f64>>,
}

impl DeviationTable {
    /// Deviations never grow as delta shrinks, for every anchor.
    pub fn is_monotone(&self) -> bool {
        self.rows.iter().all(|r| r.windows(2).all(|w| w[1] <= w[0]))
    }

    pub fn final_max(&self) -> f64 {
        self.rows.iter().filter_map(|r| r.last().copied()).fold(0.0, f64::max)
    }

    /// Largest deviation over anchors for each delta.
    pub fn column_max(&self) -> Vec<f64> {
        (0..self.deltas.len()).map(|d| self.rows.iter().map(|r| r[d]).fold(0.0, f64::max)).collect()
    }
}

/// Samples perturbed blending functions against their unperturbed images on
/// an `n x n` grid of the original reduced domain.
pub fn convergence_experiment(
    mesh: &TMesh,
    knots: &GlobalKnots,
    deltas: &[Rational],
    coeffs: &Coefficients,
    n: usize,
) -> Result<DeviationTable, PerturbError> {
    if deltas.is_empty() || deltas.iter().any(|d| !d.is_positive()) || deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(PerturbError::BadDeltas);
    }
    let base = SplineSpace::new(mesh.clone(), knots.clone())?;
    let r = base.reduced_domain();
    let grid: Vec<(f64, f64)> = (0..n)
        .flat_map(|a| {
            (0..n).map(move |b| {
                let t = |k: usize| (k as f64 + 0.5) / n as f64;
                (r.x0 + (r.x1 - r.x0) * t(a), r.y0 + (r.y1 - r.y0) * t(b))
            })
        })
        .collect();
    let mut anchors = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (d, delta) in deltas.iter().enumerate() {
        let (pk, pm) = perturb(mesh, knots, delta, coeffs)?;
        let space = SplineSpace::new(pm.mesh.clone(), pk.knots.clone())?;
        if d == 0 {
            anchors = space.functions.iter().map(|f| f.anchor).collect();
            rows = alloc::vec![Vec::new(); anchors.len()];
        }
        for (k, f) in space.functions.iter().enumerate() {
            let target = base.index_of(pk.pi(f.anchor)).expect("anchor image is an anchor");
            let mut worst: f64 = 0.0;
            for &(x, y) in &grid {
                let a = space.eval_raw(k, x, y, 0, 0);
                let b = base.eval_raw(target, x, y, 0, 0);
                worst = worst.max(libm::fabs(a - b));
            }
            rows[k].push(worst);
        }
    }
    Ok(DeviationTable { deltas: deltas.to_vec(), anchors, rows })
}

/// Dimension report with the count taken on `mesh` and the nullity on its
/// strict perturbation, for knot vectors with repeated values.
pub fn dimension_report_perturbed(
    mesh: &TMesh,
    knots: &GlobalKnots,
    delta: &Rational,
    coeffs: &Coefficients,
) -> Result<DimensionReport, PerturbError> {
    let (pk, pm) = perturb(mesh, knots, delta, coeffs)?;
    if !pk.strict {
        return Err(PerturbError::NotStrict);
    }
    let ext = extend(&pm.mesh)?;
    let system = assemble(&ext, &pk.knots)?;
    let mut report = report_from(&ext, &system, is_analysis_suitable(mesh)?.0);
    report.formula = dim_formula(&extend(mesh)?);
    report.agree = report.formula == report.nullity;
    Ok(report)
}

/// The analysis-suitability verdicts of a mesh and its perturbation.
pub fn suitability_preserved(mesh: &TMesh, pm: &PerturbedMesh) -> Result<(bool, bool), PerturbError> {
    Ok((is_analysis_suitable(mesh)?.0, is_analysis_suitable(&pm.mesh)?.0))
}

/// Largest distance between a perturbed knot and the knot its index maps to.
pub fn knot_drift(original: &GlobalKnots, pk: &PerturbedKnots) -> f64 {
    let d = pk.knots.domain();
    let xs = (d.m_lo..=d.m_hi).map(|i| rational_to_f64(&(pk.knots.xi(i) - original.xi(pk.h_pi(i)))));
    let ys = (d.n_lo..=d.n_hi).map(|j| rational_to_f64(&(pk.knots.eta(j) - original.eta(pk.v_pi(j)))));
    xs.chain(ys).map(libm::fabs).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ratio;
    use crate::spline::tests::{grid, single_t};

    #[test]
    fn identity_perturbation() {
        let t = grid(8, 8);
        let k = GlobalKnots::uniform(t.domain());
        let (pk, pm) = perturb(&t, &k, &ratio(1, 10), &Coefficients::default()).unwrap();
        assert_eq!(pm.mesh, t);
        assert_eq!(pk.knots, k);
    }

    #[test]
    fn split_line_gets_two_copies() {
        let d = IndexDomain::new(0, 10, 0, 10).unwrap();
        let h: Vec<Span> = (0..=10).map(|j| Span::new(j, 0, 10)).collect();
        let mut v: Vec<Span> = (0..=10).filter(|&i| i != 5).map(|i| Span::new(i, 0, 10)).collect();
        v.push(Span::new(5, 0, 4));
        v.push(Span::new(5, 6, 10));
        let t = build_tmesh(d, &h, &v).unwrap();
        let k = GlobalKnots::uniform(d);
        let delta = ratio(1, 100);
        let (pk, pm) = perturb(&t, &k, &delta, &Coefficients::default()).unwrap();
        assert_eq!(pm.mesh.domain().m_hi, 11);
        assert_eq!(pk.columns.copies[5], alloc::vec![5, 6]);
        assert_eq!(pk.knots.xi(6), &(int(5) + &delta));
        assert_eq!(pk.knots.xi(7), &(int(6) + &delta));
        let col5 = pm.mesh.lines(Axis::Vertical).into_iter().filter(|s| s.line == 5 || s.line == 6).collect::<Vec<_>>();
        assert_eq!(col5, alloc::vec![Span::new(5, 0, 4), Span::new(6, 6, 10)]);
        assert_eq!(pm.mesh.anchors().len(), t.anchors().len());
        assert_eq!(check_index_commutation(&t, &pk, &pm).unwrap(), None);
        assert_eq!(suitability_preserved(&t, &pm).unwrap(), (true, true));
    }

    #[test]
    fn zero_spans_open() {
        let t = grid(7, 7);
        let k: Vec<Rational> = [0, 0, 0, 0, 1, 1, 1, 1].iter().map(|&v| int(v)).collect();
        let knots = GlobalKnots::new(t.domain(), k.clone(), k).unwrap();
        let mut c = Coefficients::default();
        c.xi.insert(1, int(2));
        let (pk, _) = perturb(&t, &knots, &ratio(1, 8), &c).unwrap();
        assert_eq!(pk.knots.xi_all()[..4], [int(0), ratio(1, 8), ratio(3, 8), ratio(1, 2)]);
        assert_eq!(pk.knots.xi(4), &ratio(3, 2));
        c.eta.insert(0, int(-1));
        assert!(matches!(perturb(&t, &knots, &ratio(1, 8), &c), Err(PerturbError::NegativeCoefficient { .. })));
        assert_eq!(zero_span_slots(&t, &knots), (6, 6));
    }

    #[test]
    fn clamped_grid_dimension_through_perturbation() {
        let t = grid(7, 7);
        let k: Vec<Rational> = [0, 0, 0, 0, 1, 1, 1, 1].iter().map(|&v| int(v)).collect();
        let knots = GlobalKnots::new(t.domain(), k.clone(), k).unwrap();
        let r = dimension_report_perturbed(&t, &knots, &ratio(1, 16), &Coefficients::default()).unwrap();
        assert_eq!((r.formula, r.nullity), (16, 16));
        assert!(r.agree);
    }

    #[test]
    fn relative_perturbation_of_submesh() {
        let t2 = single_t();
        let d = t2.domain();
        let h: Vec<Span> = (0..=9).map(|j| Span::new(j, 0, 10)).collect();
        let v: Vec<Span> = (0..=10).filter(|&i| i != 5).map(|i| Span::new(i, 0, 9)).collect();
        let t1 = build_tmesh(d, &h, &v).unwrap();
        let k = GlobalKnots::uniform(d);
        let (_, p1) = relative_perturb(&t1, &t2, &k, &ratio(1, 64), &Coefficients::default()).unwrap();
        let (_, p2) = perturb(&t2, &k, &ratio(1, 64), &Coefficients::default()).unwrap();
        assert!(p1.mesh.is_submesh_of(&p2.mesh));
        assert_eq!(p1.mesh, t1);
        let (_, same) = relative_perturb(&t2, &t2, &k, &ratio(1, 64), &Coefficients::default()).unwrap();
        assert_eq!(same.mesh, p2.mesh);
        assert!(matches!(
            relative_perturb(&t2, &t1, &k, &ratio(1, 64), &Coefficients::default()),
            Err(PerturbError::NotASubmesh(_))
        ));
    }
}

//! Smoothing-cofactor constraint systems and dimension counting.
//!
//! Each segment of the extended mesh contributes the four coefficient
//! equations of `sum_l d_l (t - t_l)^3 = 0` over the vertices on it. The
//! dimension of the extended spline space is the nullity of the assembled
//! matrix, which is compared against the count `n^a + n^+ + n^-`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::Zero;
use thiserror::Error;

use crate::extension::{extend, is_analysis_suitable, ExtendError, ExtendedTMesh};
use crate::field::{int, Rational};
use crate::linalg::{determinant, SparseMatrix};
use crate::mesh::{Axis, Point, Segment, TMesh};
use crate::spline::GlobalKnots;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimensionError {
    #[error("{axis:?} segment on line {line} has repeated knot values; use the perturbation path")]
    KnotMultiplicityPresent { axis: Axis, line: i32 },
    #[error(transparent)]
    Extend(#[from] ExtendError),
}

/// The matrix `M` with its row-block and column bookkeeping.
#[derive(Clone, Debug)]
pub struct ConstraintSystem {
    pub matrix: SparseMatrix,
    /// Segment of row block `k` (rows `4k..4k+4`).
    pub segments: Vec<Segment>,
    /// Vertex of each column.
    pub vertices: Vec<Point>,
}

impl ConstraintSystem {
    pub fn n_ext(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_segments(&self) -> usize {
        self.segments.len()
    }

    pub fn nullity(&self) -> usize {
        self.matrix.nullity()
    }
}

/// `[1, -3a, 3a^2, -a^3]`: coefficients of `(t - a)^3` from the cubic term down.
fn cubic_row(a: &Rational) -> [Rational; 4] {
    let a2 = a * a;
    [int(1), int(-3) * a, int(3) * &a2, -(&a2 * a)]
}

fn abscissa(knots: &GlobalKnots, axis: Axis, p: Point) -> &Rational {
    match axis {
        Axis::Horizontal => knots.xi(p.i),
        Axis::Vertical => knots.eta(p.j),
    }
}

pub fn assemble(ext: &ExtendedTMesh, knots: &GlobalKnots) -> Result<ConstraintSystem, DimensionError> {
    assemble_mesh(&ext.ext_mesh, knots)
}

pub(crate) fn assemble_mesh(mesh: &TMesh, knots: &GlobalKnots) -> Result<ConstraintSystem, DimensionError> {
    let vertices = mesh.vertices();
    let column: BTreeMap<Point, usize> = vertices.iter().enumerate().map(|(k, p)| (*p, k)).collect();
    let segments = mesh.segments();
    let mut matrix = SparseMatrix::new(vertices.len());
    for seg in &segments {
        let abscissae: Vec<&Rational> = seg.points().map(|p| abscissa(knots, seg.axis, p)).collect();
        if abscissae.windows(2).any(|w| w[0] == w[1]) {
            return Err(DimensionError::KnotMultiplicityPresent { axis: seg.axis, line: seg.span.line });
        }
        let coeffs: Vec<(usize, [Rational; 4])> =
            seg.points().zip(&abscissae).map(|(p, a)| (column[&p], cubic_row(a))).collect();
        for r in 0..4 {
            matrix.push_row(coeffs.iter().map(|(c, row)| (*c, row[r].clone())).collect());
        }
    }
    Ok(ConstraintSystem { matrix, segments, vertices })
}

/// `M` with the eight outer frame segments and the 16 vertices they share removed.
#[derive(Clone, Debug)]
pub struct ReducedSystem {
    pub matrix: SparseMatrix,
    pub segments: Vec<Segment>,
    pub vertices: Vec<Point>,
}

impl ReducedSystem {
    pub fn n_ext(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_segments(&self) -> usize {
        self.segments.len()
    }

    pub fn nullity(&self) -> usize {
        self.matrix.nullity()
    }
}

pub fn simplify(system: &ConstraintSystem) -> ReducedSystem {
    let Some(first) = system.vertices.first() else {
        return ReducedSystem { matrix: SparseMatrix::new(0), segments: Vec::new(), vertices: Vec::new() };
    };
    let last = system.vertices[system.vertices.len() - 1];
    let (m_lo, n_lo, m_hi, n_hi) = (first.i, first.j, last.i, last.j);
    let outer_col = |i: i32| i == m_lo || i == m_lo + 1 || i == m_hi - 1 || i == m_hi;
    let outer_row = |j: i32| j == n_lo || j == n_lo + 1 || j == n_hi - 1 || j == n_hi;
    let mut rows = Vec::new();
    let mut segments = Vec::new();
    for (k, s) in system.segments.iter().enumerate() {
        let removed = match s.axis {
            Axis::Horizontal => outer_row(s.span.line),
            Axis::Vertical => outer_col(s.span.line),
        };
        if !removed {
            rows.extend(4 * k..4 * k + 4);
            segments.push(s.clone());
        }
    }
    let mut cols = Vec::new();
    let mut vertices = Vec::new();
    for (k, p) in system.vertices.iter().enumerate() {
        if !(outer_col(p.i) && outer_row(p.j)) {
            cols.push(k);
            vertices.push(*p);
        }
    }
    ReducedSystem { matrix: system.matrix.select(&rows, &cols), segments, vertices }
}

/// Result of the greedy segment peel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Peel {
    /// `order[k]` is a segment index; `pivots[k]` the four columns it owns.
    /// Each segment has at least four vertices on no earlier segment.
    Ordered { order: Vec<usize>, pivots: Vec<[usize; 4]> },
    /// Segments of which none has four private vertices.
    Stuck { remaining: Vec<usize> },
}

impl Peel {
    pub fn is_ordered(&self) -> bool {
        matches!(self, Peel::Ordered { .. })
    }
}

fn peel_key(s: &Segment) -> (i32, i32, u8) {
    let p = s.start();
    (p.j, p.i, (s.axis == Axis::Vertical) as u8)
}

/// Repeatedly removes the bottommost-then-leftmost segment having four
/// vertices on no other remaining segment.
pub fn diagonalizable_order(reduced: &ReducedSystem) -> Peel {
    let column: BTreeMap<Point, usize> = reduced.vertices.iter().enumerate().map(|(k, p)| (*p, k)).collect();
    let members: Vec<Vec<usize>> = reduced
        .segments
        .iter()
        .map(|s| s.points().filter_map(|p| column.get(&p).copied()).collect())
        .collect();
    let mut uses = alloc::vec![0usize; reduced.vertices.len()];
    for m in &members {
        for &c in m {
            uses[c] += 1;
        }
    }
    let mut by_key: Vec<usize> = (0..reduced.segments.len()).collect();
    by_key.sort_by_key(|&k| peel_key(&reduced.segments[k]));
    let mut alive = alloc::vec![true; reduced.segments.len()];
    let mut peeled = Vec::new();
    let mut pivots = Vec::new();
    for _ in 0..reduced.segments.len() {
        let pick = by_key.iter().copied().find(|&k| alive[k] && members[k].iter().filter(|&&c| uses[c] == 1).count() >= 4);
        let Some(k) = pick else {
            return Peel::Stuck { remaining: by_key.into_iter().filter(|&k| alive[k]).collect() };
        };
        let own: Vec<usize> = members[k].iter().copied().filter(|&c| uses[c] == 1).take(4).collect();
        pivots.push([own[0], own[1], own[2], own[3]]);
        peeled.push(k);
        alive[k] = false;
        for &c in &members[k] {
            uses[c] -= 1;
        }
    }
    peeled.reverse();
    pivots.reverse();
    Peel::Ordered { order: peeled, pivots }
}

/// Checks a peel ordering against the entries of `M-bar`.
///
/// The pivot columns of each segment must vanish on the rows of every
/// earlier segment, and each diagonal 4x4 block must be nonsingular. Together
/// these give full row rank, `rank = 4 n^G`.
pub fn certify_order(reduced: &ReducedSystem, order: &[usize], pivots: &[[usize; 4]]) -> bool {
    if order.len() != reduced.segments.len() || pivots.len() != order.len() {
        return false;
    }
    for (pos, &seg) in order.iter().enumerate() {
        let block: Vec<Vec<Rational>> =
            (0..4).map(|r| pivots[pos].iter().map(|&c| reduced.matrix.get(4 * seg + r, c)).collect()).collect();
        if determinant(&block).is_zero() {
            return false;
        }
        // Pivot columns of a segment must vanish on every segment placed before it.
        for &earlier in &order[..pos] {
            for r in 0..4 {
                if pivots[pos].iter().any(|&c| !reduced.matrix.get(4 * earlier + r, c).is_zero()) {
                    return false;
                }
            }
        }
    }
    true
}

pub fn dim_formula(ext: &ExtendedTMesh) -> usize {
    ext.n_active() + ext.n_crossing() + ext.n_overlap()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionReport {
    pub formula: usize,
    pub nullity: usize,
    pub reduced_nullity: usize,
    pub n_active: usize,
    pub n_crossing: usize,
    pub n_overlap: usize,
    pub n_extended: usize,
    pub n_ext: usize,
    pub n_segments: usize,
    pub reduced_n_ext: usize,
    pub reduced_n_segments: usize,
    pub diagonalizable: bool,
    /// The peel ordering was checked against the matrix entries.
    pub certified: bool,
    pub analysis_suitable: bool,
    pub agree: bool,
}

impl DimensionReport {
    pub fn summary_line(&self) -> alloc::string::String {
        alloc::format!(
            "formula={} nullity={} as={} diag={} agree={}",
            self.formula, self.nullity, self.analysis_suitable, self.diagonalizable, self.agree
        )
    }
}

pub fn dimension_report(mesh: &TMesh, knots: &GlobalKnots) -> Result<DimensionReport, DimensionError> {
    let ext = extend(mesh)?;
    let system = assemble(&ext, knots)?;
    Ok(report_from(&ext, &system, is_analysis_suitable(mesh)?.0))
}

pub(crate) fn report_from(ext: &ExtendedTMesh, system: &ConstraintSystem, analysis_suitable: bool) -> DimensionReport {
    let reduced = simplify(system);
    let nullity = system.nullity();
    let reduced_nullity = reduced.nullity();
    let peel = diagonalizable_order(&reduced);
    let certified = match &peel {
        Peel::Ordered { order, pivots } => certify_order(&reduced, order, pivots),
        Peel::Stuck { .. } => false,
    };
    let formula = dim_formula(ext);
    DimensionReport {
        formula,
        nullity,
        reduced_nullity,
        n_active: ext.n_active(),
        n_crossing: ext.n_crossing(),
        n_overlap: ext.n_overlap(),
        n_extended: ext.n_extended(),
        n_ext: system.n_ext(),
        n_segments: system.n_segments(),
        reduced_n_ext: reduced.n_ext(),
        reduced_n_segments: reduced.n_segments(),
        diagonalizable: peel.is_ordered(),
        certified,
        analysis_suitable,
        agree: formula == nullity,
    }
}

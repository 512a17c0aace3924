//! Nestedness of T-spline spaces and refinement matrices.
//!
//! `S(T1) ⊆ S(T2)` is certified by perturbing both meshes with the same
//! knot perturbation and checking that the extended perturbed coarse mesh is
//! contained in the extended perturbed fine mesh.

use alloc::vec::Vec;

use thiserror::Error;

use crate::dual::{DualError, UnivariateDual};
use crate::extension::{extend, is_analysis_suitable, ExtendError};
use crate::field::{ratio, Field, Rational};
use crate::mesh::{Axis, Point, TMesh};
use crate::perturb::{perturb, relative_perturb, Coefficients, PerturbError};
use crate::spline::{GlobalKnots, SplineSpace};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NestingError {
    #[error("coarse mesh is not a submesh of the fine mesh; edge at {0} is missing")]
    NotASubmesh(Point),
    #[error("{which} mesh is not analysis-suitable")]
    NotAnalysisSuitable { which: &'static str },
    #[error("knot vectors differ on {axis:?} line {line}")]
    KnotMismatch { axis: Axis, line: i32 },
    #[error("meshes live on different index domains")]
    DomainMismatch,
    #[error("nestedness has not been certified")]
    NotCertified,
    #[error("expected {expected} control points, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Perturb(#[from] PerturbError),
    #[error(transparent)]
    Extend(#[from] ExtendError),
    #[error(transparent)]
    Dual(#[from] DualError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Nested,
    NotNested,
    Inapplicable,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NestingCertificate {
    pub verdict: Verdict,
    /// Perturbation sizes at which the containment was checked.
    pub deltas: Vec<Rational>,
    /// First edge of the extended perturbed coarse mesh missing from the fine one.
    pub witness: Option<(Axis, Point)>,
}

impl NestingCertificate {
    pub fn is_nested(&self) -> bool {
        self.verdict == Verdict::Nested
    }
}

fn check_knots(t1: &TMesh, knots1: &GlobalKnots, knots2: &GlobalKnots) -> Result<(), NestingError> {
    for axis in [Axis::Horizontal, Axis::Vertical] {
        // A horizontal line on row j uses eta_j; its vertices use xi at their columns.
        let perp = axis.other();
        for s in t1.lines(axis) {
            if knots1.knot(perp, s.line) != knots2.knot(perp, s.line) {
                return Err(NestingError::KnotMismatch { axis, line: s.line });
            }
        }
    }
    Ok(())
}

/// Certifies `S(t1) ⊆ S(t2)` for analysis-suitable `t1 ⊆ t2`.
pub fn certify_nested(
    t1: &TMesh,
    knots1: &GlobalKnots,
    t2: &TMesh,
    knots2: &GlobalKnots,
) -> Result<NestingCertificate, NestingError> {
    if t1.domain() != t2.domain() || knots1.domain() != t1.domain() || knots2.domain() != t2.domain() {
        return Err(NestingError::DomainMismatch);
    }
    if let Some((_, p)) = t1.first_edge_not_in(t2) {
        return Err(NestingError::NotASubmesh(p));
    }
    check_knots(t1, knots1, knots2)?;
    if !is_analysis_suitable(t1)?.0 {
        return Err(NestingError::NotAnalysisSuitable { which: "coarse" });
    }
    if !is_analysis_suitable(t2)?.0 {
        return Err(NestingError::NotAnalysisSuitable { which: "fine" });
    }
    let deltas = alloc::vec![ratio(1, 1024), ratio(1, 4096)];
    let coeffs = Coefficients::default();
    let mut witness = None;
    for delta in &deltas {
        let (_, coarse) = relative_perturb(t1, t2, knots2, delta, &coeffs)?;
        let (_, fine) = perturb(t2, knots2, delta, &coeffs)?;
        let coarse_ext = extend(&coarse.mesh)?;
        let fine_ext = extend(&fine.mesh)?;
        if let Some(w) = coarse_ext.ext_mesh.first_edge_not_in(&fine_ext.ext_mesh) {
            witness = Some(w);
            break;
        }
    }
    let verdict = if witness.is_some() { Verdict::NotNested } else { Verdict::Nested };
    Ok(NestingCertificate { verdict, deltas, witness })
}

/// Like [`certify_nested`], but any precondition failure yields `Verdict::Inapplicable`.
pub fn try_certify_nested(t1: &TMesh, knots1: &GlobalKnots, t2: &TMesh, knots2: &GlobalKnots) -> NestingCertificate {
    certify_nested(t1, knots1, t2, knots2).unwrap_or(NestingCertificate {
        verdict: Verdict::Inapplicable,
        deltas: Vec::new(),
        witness: None,
    })
}

/// Refinement coefficients `N_A = sum_B c[A][B] N_B`, stored sparsely by coarse anchor.
#[derive(Clone, Debug, PartialEq)]
pub struct RefinementMatrix<T> {
    pub coarse: Vec<Point>,
    pub fine: Vec<Point>,
    /// `rows[a]`: `(b, c_B^A)` with non-zero coefficients, ascending in `b`.
    pub rows: Vec<Vec<(usize, T)>>,
}

impl<T: Field> RefinementMatrix<T> {
    pub fn get(&self, a: usize, b: usize) -> T {
        self.rows[a].iter().find(|(k, _)| *k == b).map_or_else(T::zero, |(_, c)| c.clone())
    }

    /// `sum_A c_B^A` for every fine anchor `B`.
    pub fn fine_sums(&self) -> Vec<T> {
        let mut out = alloc::vec![T::zero(); self.fine.len()];
        for row in &self.rows {
            for (b, c) in row {
                out[*b] = out[*b].clone() + c.clone();
            }
        }
        out
    }

    /// Product `self * next`: coefficients from this coarse space into `next`'s fine space.
    pub fn compose(&self, next: &RefinementMatrix<T>) -> RefinementMatrix<T> {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut acc = alloc::vec![T::zero(); next.fine.len()];
                for (b, c) in row {
                    for (f, d) in &next.rows[*b] {
                        acc[*f] = acc[*f].clone() + c.clone() * d.clone();
                    }
                }
                acc.into_iter().enumerate().filter(|(_, v)| !v.is_zero()).collect()
            })
            .collect();
        RefinementMatrix { coarse: self.coarse.clone(), fine: next.fine.clone(), rows }
    }
}

fn lift<T: Field>(k: &[Rational; 5]) -> [T; 5] {
    k.clone().map(|v| T::from_rational(&v))
}

/// Coefficients `c_B^A = lambda_B(N_A)` of each coarse blending function in the fine space.
///
/// Requires a nesting certificate with verdict [`Verdict::Nested`].
pub fn refinement_matrix<T: Field>(
    coarse: &SplineSpace,
    fine: &SplineSpace,
    cert: &NestingCertificate,
) -> Result<RefinementMatrix<T>, NestingError> {
    if !cert.is_nested() {
        return Err(NestingError::NotCertified);
    }
    let duals: Vec<(UnivariateDual<T>, UnivariateDual<T>)> = fine
        .functions
        .iter()
        .map(|f| Ok((UnivariateDual::new(&lift::<T>(&f.xi))?, UnivariateDual::new(&lift::<T>(&f.eta))?)))
        .collect::<Result<_, DualError>>()?;
    let rows = coarse
        .functions
        .iter()
        .map(|a| {
            let (u, v) = (lift::<T>(&a.xi), lift::<T>(&a.eta));
            duals
                .iter()
                .enumerate()
                .filter_map(|(b, (lx, ly))| {
                    let cx = lx.apply_bspline(&u);
                    if cx.is_zero() {
                        return None;
                    }
                    let c = cx * ly.apply_bspline(&v);
                    (!c.is_zero()).then_some((b, c))
                })
                .collect()
        })
        .collect();
    Ok(RefinementMatrix {
        coarse: coarse.functions.iter().map(|f| f.anchor).collect(),
        fine: fine.functions.iter().map(|f| f.anchor).collect(),
        rows,
    })
}

/// Fine control points `P_B = sum_A c_B^A P_A`.
pub fn refine_geometry(matrix: &RefinementMatrix<f64>, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, NestingError> {
    if points.len() != matrix.coarse.len() {
        return Err(NestingError::DimensionMismatch { expected: matrix.coarse.len(), got: points.len() });
    }
    let dim = points.first().map_or(0, Vec::len);
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(NestingError::DimensionMismatch { expected: dim, got: p.len() });
    }
    let mut out = alloc::vec![alloc::vec![0.0; dim]; matrix.fine.len()];
    for (a, row) in matrix.rows.iter().enumerate() {
        for (b, c) in row {
            for (o, p) in out[*b].iter_mut().zip(&points[a]) {
                *o += c * p;
            }
        }
    }
    Ok(out)
}

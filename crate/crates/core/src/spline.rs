//! Global knots, anchor index vectors and blending functions.

use alloc::vec::Vec;

use thiserror::Error;

use crate::extension::{extend, ExtendError, ExtendedTMesh};
use crate::field::{rational_to_f64, Field, Rational};
use crate::mesh::{Axis, IndexDomain, Point, Rect, TMesh};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SplineError {
    #[error("{axis:?} knot vector has {got} entries, expected {expected}")]
    KnotLength { axis: Axis, expected: usize, got: usize },
    #[error("{axis:?} knots decrease at index {index}")]
    DecreasingKnots { axis: Axis, index: i32 },
    #[error("{axis:?} knot at index {index} has multiplicity {count}")]
    KnotMultiplicity { axis: Axis, index: i32, count: usize },
    #[error("{0} is not an anchor")]
    NotAnAnchor(Point),
    #[error("anchor {0} has fewer than five usable trace indices")]
    InsufficientTrace(Point),
    #[error("all five local knots coincide")]
    DegenerateKnotVector,
    #[error("point ({0}, {1}) lies outside the reduced parametric domain")]
    OutsideReducedDomain(f64, f64),
    #[error("derivative order {0} exceeds three")]
    DerivativeOrder(usize),
    #[error(transparent)]
    Extend(#[from] ExtendError),
}

/// Global knot vectors `xi[m_lo..=m_hi]` and `eta[n_lo..=n_hi]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GlobalKnots {
    domain: IndexDomain,
    xi: Vec<Rational>,
    eta: Vec<Rational>,
}

impl GlobalKnots {
    pub fn new(domain: IndexDomain, xi: Vec<Rational>, eta: Vec<Rational>) -> Result<Self, SplineError> {
        check_knots(Axis::Horizontal, domain.m_lo, domain.width() + 1, &xi)?;
        check_knots(Axis::Vertical, domain.n_lo, domain.height() + 1, &eta)?;
        Ok(GlobalKnots { domain, xi, eta })
    }

    /// Skips the multiplicity limits; lengths and monotonicity are the caller's contract.
    pub(crate) fn new_unchecked(domain: IndexDomain, xi: Vec<Rational>, eta: Vec<Rational>) -> Self {
        debug_assert_eq!(xi.len(), domain.width() + 1);
        debug_assert_eq!(eta.len(), domain.height() + 1);
        GlobalKnots { domain, xi, eta }
    }

    /// Knots equal to their indices.
    pub fn uniform(domain: IndexDomain) -> Self {
        let xi = (domain.m_lo..=domain.m_hi).map(|i| Rational::from_i64(i as i64)).collect();
        let eta = (domain.n_lo..=domain.n_hi).map(|j| Rational::from_i64(j as i64)).collect();
        GlobalKnots { domain, xi, eta }
    }

    pub fn domain(&self) -> IndexDomain {
        self.domain
    }

    pub fn xi(&self, i: i32) -> &Rational {
        &self.xi[(i - self.domain.m_lo) as usize]
    }

    pub fn eta(&self, j: i32) -> &Rational {
        &self.eta[(j - self.domain.n_lo) as usize]
    }

    pub fn knot(&self, axis: Axis, k: i32) -> &Rational {
        match axis {
            Axis::Horizontal => self.xi(k),
            Axis::Vertical => self.eta(k),
        }
    }

    pub fn xi_all(&self) -> &[Rational] {
        &self.xi
    }

    pub fn eta_all(&self) -> &[Rational] {
        &self.eta
    }

    /// True when some consecutive pair of knots coincides.
    pub fn has_zero_span(&self) -> bool {
        self.xi.windows(2).any(|w| w[0] == w[1]) || self.eta.windows(2).any(|w| w[0] == w[1])
    }

    /// Reduced parametric domain `[xi_{m_lo+3}, xi_{m_hi-3}] x [eta_{n_lo+3}, eta_{n_hi-3}]`.
    pub fn reduced_domain(&self) -> Rect<Rational> {
        let d = self.domain;
        Rect {
            x0: self.xi(d.m_lo + 3).clone(),
            x1: self.xi(d.m_hi - 3).clone(),
            y0: self.eta(d.n_lo + 3).clone(),
            y1: self.eta(d.n_hi - 3).clone(),
        }
    }

    pub fn reduced_domain_f64(&self) -> Rect<f64> {
        let r = self.reduced_domain();
        Rect { x0: rational_to_f64(&r.x0), x1: rational_to_f64(&r.x1), y0: rational_to_f64(&r.y0), y1: rational_to_f64(&r.y1) }
    }

    pub fn full_domain(&self) -> Rect<Rational> {
        Rect {
            x0: self.xi[0].clone(),
            x1: self.xi[self.xi.len() - 1].clone(),
            y0: self.eta[0].clone(),
            y1: self.eta[self.eta.len() - 1].clone(),
        }
    }

    pub fn index_rect_to_param(&self, r: &Rect<i32>) -> Rect<Rational> {
        Rect { x0: self.xi(r.x0).clone(), x1: self.xi(r.x1).clone(), y0: self.eta(r.y0).clone(), y1: self.eta(r.y1).clone() }
    }
}

fn check_knots(axis: Axis, lo: i32, expected: usize, k: &[Rational]) -> Result<(), SplineError> {
    if k.len() != expected {
        return Err(SplineError::KnotLength { axis, expected, got: k.len() });
    }
    if let Some(idx) = (1..k.len()).find(|&i| k[i] < k[i - 1]) {
        return Err(SplineError::DecreasingKnots { axis, index: lo + idx as i32 });
    }
    let mut start = 0;
    while start < k.len() {
        let mut end = start;
        while end + 1 < k.len() && k[end + 1] == k[start] {
            end += 1;
        }
        let count = end - start + 1;
        let limit = if start == 0 || end + 1 == k.len() { 4 } else { 3 };
        if count > limit {
            return Err(SplineError::KnotMultiplicity { axis, index: lo + start as i32, count });
        }
        start = end + 1;
    }
    Ok(())
}

/// Cubic B-spline on five knots, or one of its derivatives.
///
/// Evaluation is right-continuous; with `left_limit` the left limit is used
/// instead. Terms with a zero denominator vanish.
pub fn cubic_bspline<T: Field>(t: &[T; 5], x: &T, deriv: usize, left_limit: bool) -> T {
    if deriv > 3 {
        return T::zero();
    }
    let mut vals: Vec<T> = (0..4)
        .map(|k| {
            let inside = if left_limit { t[k] < *x && *x <= t[k + 1] } else { t[k] <= *x && *x < t[k + 1] };
            if inside {
                T::one()
            } else {
                T::zero()
            }
        })
        .collect();
    let q = 3 - deriv;
    for p in 1..=q {
        let next: Vec<T> = (0..vals.len() - 1)
            .map(|i| {
                let mut v = T::zero();
                let d0 = t[i + p].clone() - t[i].clone();
                if !d0.is_zero() && !vals[i].is_zero() {
                    v = v + (x.clone() - t[i].clone()) / d0 * vals[i].clone();
                }
                let d1 = t[i + p + 1].clone() - t[i + 1].clone();
                if !d1.is_zero() && !vals[i + 1].is_zero() {
                    v = v + (t[i + p + 1].clone() - x.clone()) / d1 * vals[i + 1].clone();
                }
                v
            })
            .collect();
        vals = next;
    }
    for p in q + 1..=3 {
        let scale = T::from_i64(p as i64);
        let next: Vec<T> = (0..vals.len() - 1)
            .map(|i| {
                let mut v = T::zero();
                let d0 = t[i + p].clone() - t[i].clone();
                if !d0.is_zero() {
                    v = v + vals[i].clone() / d0;
                }
                let d1 = t[i + p + 1].clone() - t[i + 1].clone();
                if !d1.is_zero() {
                    v = v - vals[i + 1].clone() / d1;
                }
                scale.clone() * v
            })
            .collect();
        vals = next;
    }
    vals.pop().unwrap_or_else(T::zero)
}

/// Evaluates a cubic B-spline given by five exact knots at `x` (right-continuous).
pub fn bspline_eval(knots5: &[Rational; 5], x: f64, deriv: usize) -> Result<f64, SplineError> {
    if knots5[0] == knots5[4] {
        return Err(SplineError::DegenerateKnotVector);
    }
    if deriv > 3 {
        return Err(SplineError::DerivativeOrder(deriv));
    }
    let t = knots5.clone().map(|k| rational_to_f64(&k));
    Ok(cubic_bspline(&t, &x, deriv, false))
}

/// Blending function data of one anchor.
#[derive(Clone, Debug, PartialEq)]
pub struct AnchorFunction {
    pub anchor: Point,
    pub hv: [i32; 5],
    pub vv: [i32; 5],
    pub xi: [Rational; 5],
    pub eta: [Rational; 5],
    pub xi_f: [f64; 5],
    pub eta_f: [f64; 5],
}

impl AnchorFunction {
    pub fn support(&self) -> Rect<f64> {
        Rect { x0: self.xi_f[0], x1: self.xi_f[4], y0: self.eta_f[0], y1: self.eta_f[4] }
    }

    pub fn support_exact(&self) -> Rect<Rational> {
        Rect { x0: self.xi[0].clone(), x1: self.xi[4].clone(), y0: self.eta[0].clone(), y1: self.eta[4].clone() }
    }

    pub fn local_knots(&self, axis: Axis) -> &[Rational; 5] {
        match axis {
            Axis::Horizontal => &self.xi,
            Axis::Vertical => &self.eta,
        }
    }
}

/// Five consecutive trace indices centred on the anchor, in each direction.
pub fn index_vectors(mesh: &TMesh, anchor: Point) -> Result<([i32; 5], [i32; 5]), SplineError> {
    if !(mesh.domain().in_active_region(anchor) && mesh.is_vertex(anchor)) {
        return Err(SplineError::NotAnAnchor(anchor));
    }
    let window = |axis: Axis, k: i32| -> Result<[i32; 5], SplineError> {
        let trace = mesh.trace_line(anchor, axis);
        let pos = trace.iter().position(|&t| t == k).ok_or(SplineError::NotAnAnchor(anchor))?;
        if pos < 2 || pos + 2 >= trace.len() {
            return Err(SplineError::InsufficientTrace(anchor));
        }
        Ok([trace[pos - 2], trace[pos - 1], trace[pos], trace[pos + 1], trace[pos + 2]])
    };
    Ok((window(Axis::Horizontal, anchor.i)?, window(Axis::Vertical, anchor.j)?))
}

/// Element of the extended mesh with a non-empty parametric image inside the reduced domain.
#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    pub index: Rect<i32>,
    pub param: Rect<Rational>,
    pub rect: Rect<f64>,
}

/// A T-spline space: mesh, knots and one blending function per anchor.
#[derive(Clone, Debug)]
pub struct SplineSpace {
    pub mesh: TMesh,
    pub knots: GlobalKnots,
    pub functions: Vec<AnchorFunction>,
    pub ext: ExtendedTMesh,
    reduced: Rect<f64>,
}

impl SplineSpace {
    pub fn new(mesh: TMesh, knots: GlobalKnots) -> Result<Self, SplineError> {
        assert_eq!(mesh.domain(), knots.domain(), "knots and mesh over different index domains");
        let mut functions = Vec::new();
        for a in mesh.anchors() {
            let (hv, vv) = index_vectors(&mesh, a)?;
            let xi = hv.map(|i| knots.xi(i).clone());
            let eta = vv.map(|j| knots.eta(j).clone());
            let xi_f = xi.clone().map(|k| rational_to_f64(&k));
            let eta_f = eta.clone().map(|k| rational_to_f64(&k));
            functions.push(AnchorFunction { anchor: a, hv, vv, xi, eta, xi_f, eta_f });
        }
        let ext = extend(&mesh)?;
        let reduced = knots.reduced_domain_f64();
        Ok(SplineSpace { mesh, knots, functions, ext, reduced })
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn reduced_domain(&self) -> Rect<f64> {
        self.reduced
    }

    pub fn index_of(&self, anchor: Point) -> Option<usize> {
        self.functions.binary_search_by(|f| f.anchor.cmp(&anchor)).ok()
    }

    /// Left limits are taken on the upper and right edges of the reduced domain.
    fn sides(&self, x: f64, y: f64) -> (bool, bool) {
        (x == self.reduced.x1, y == self.reduced.y1)
    }

    /// Value of `N_A` or a partial derivative at any point of the plane.
    pub fn eval_raw(&self, idx: usize, x: f64, y: f64, dx: usize, dy: usize) -> f64 {
        let f = &self.functions[idx];
        let (lx, ly) = self.sides(x, y);
        let bx = cubic_bspline(&f.xi_f, &x, dx, lx);
        if bx == 0.0 {
            return 0.0;
        }
        bx * cubic_bspline(&f.eta_f, &y, dy, ly)
    }

    pub fn blending_eval(&self, anchor: Point, x: f64, y: f64, dx: usize, dy: usize) -> Result<f64, SplineError> {
        let idx = self.index_of(anchor).ok_or(SplineError::NotAnAnchor(anchor))?;
        if dx > 3 || dy > 3 {
            return Err(SplineError::DerivativeOrder(dx.max(dy)));
        }
        let r = self.reduced;
        if !(r.x0 <= x && x <= r.x1 && r.y0 <= y && y <= r.y1) {
            return Err(SplineError::OutsideReducedDomain(x, y));
        }
        Ok(self.eval_raw(idx, x, y, dx, dy))
    }

    /// Indices and values of the functions that do not vanish at `(x, y)`.
    pub fn evaluate_nonzero(&self, x: f64, y: f64) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for (k, f) in self.functions.iter().enumerate() {
            let s = f.support();
            if x < s.x0 || x > s.x1 || y < s.y0 || y > s.y1 {
                continue;
            }
            let v = self.eval_raw(k, x, y, 0, 0);
            if v != 0.0 {
                out.push((k, v));
            }
        }
        out
    }

    /// Values of all functions at `(x, y)`.
    pub fn evaluate_all(&self, x: f64, y: f64) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.functions.len()];
        for (k, v) in self.evaluate_nonzero(x, y) {
            out[k] = v;
        }
        out
    }

    /// `sum_A c_A N_A(x, y)`.
    pub fn combine(&self, coeffs: &[f64], x: f64, y: f64) -> f64 {
        self.evaluate_nonzero(x, y).into_iter().map(|(k, v)| coeffs[k] * v).sum()
    }

    pub fn elements(&self) -> Vec<Element> {
        let d = self.mesh.domain();
        self.ext
            .ext_mesh
            .faces()
            .into_iter()
            .filter(|q| q.x0 >= d.m_lo + 3 && q.x1 <= d.m_hi - 3 && q.y0 >= d.n_lo + 3 && q.y1 <= d.n_hi - 3)
            .filter_map(|q| {
                let param = self.knots.index_rect_to_param(&q);
                if param.x0 == param.x1 || param.y0 == param.y1 {
                    return None;
                }
                let rect = Rect {
                    x0: rational_to_f64(&param.x0),
                    x1: rational_to_f64(&param.x1),
                    y0: rational_to_f64(&param.y0),
                    y1: rational_to_f64(&param.y1),
                };
                Some(Element { index: q, param, rect })
            })
            .collect()
    }
}

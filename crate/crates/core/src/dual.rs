//! de Boor–Fix dual functionals, the spline projector and approximation studies.

use alloc::vec::Vec;

use thiserror::Error;

use crate::field::Field;
use crate::mesh::{Point, Rect};
use crate::quadrature::integrate_rect;
use crate::spline::{cubic_bspline, Element, SplineSpace};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DualError {
    #[error("derivative ({dxi}, {deta}) unavailable at ({xi}, {eta})")]
    DerivativesUnavailable { xi: f64, eta: f64, dxi: usize, deta: usize },
    #[error("all five local knots coincide")]
    DegenerateKnotVector,
}

/// A function of two variables with partial derivatives up to order three in each.
pub trait Bivariate<T = f64> {
    fn derivative(&self, xi: &T, eta: &T, dxi: usize, deta: usize) -> Option<T>;

    fn value(&self, xi: &T, eta: &T) -> Option<T> {
        self.derivative(xi, eta, 0, 0)
    }
}

impl<T, F: Bivariate<T> + ?Sized> Bivariate<T> for &F {
    fn derivative(&self, xi: &T, eta: &T, dxi: usize, deta: usize) -> Option<T> {
        (**self).derivative(xi, eta, dxi, deta)
    }
}

/// `xi^a * eta^b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub a: u32,
    pub b: u32,
}

fn monomial_derivative<T: Field>(x: &T, p: u32, d: usize) -> T {
    if d as u32 > p {
        return T::zero();
    }
    let mut c = T::one();
    for k in 0..d as u32 {
        c = c * T::from_i64((p - k) as i64);
    }
    for _ in 0..(p - d as u32) {
        c = c * x.clone();
    }
    c
}

impl<T: Field> Bivariate<T> for Monomial {
    fn derivative(&self, xi: &T, eta: &T, dxi: usize, deta: usize) -> Option<T> {
        Some(monomial_derivative(xi, self.a, dxi) * monomial_derivative(eta, self.b, deta))
    }
}

/// `sin(xi) * cos(eta)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct SinCos;

impl Bivariate<f64> for SinCos {
    fn derivative(&self, xi: &f64, eta: &f64, dxi: usize, deta: usize) -> Option<f64> {
        let s = match dxi % 4 {
            0 => libm::sin(*xi),
            1 => libm::cos(*xi),
            2 => -libm::sin(*xi),
            _ => -libm::cos(*xi),
        };
        let c = match deta % 4 {
            0 => libm::cos(*eta),
            1 => -libm::sin(*eta),
            2 => -libm::cos(*eta),
            _ => libm::sin(*eta),
        };
        Some(s * c)
    }
}

/// Wraps a closure `(xi, eta, dxi, deta) -> Option<f64>`.
pub struct FnBivariate<F>(pub F);

impl<F: Fn(f64, f64, usize, usize) -> Option<f64>> Bivariate<f64> for FnBivariate<F> {
    fn derivative(&self, xi: &f64, eta: &f64, dxi: usize, deta: usize) -> Option<f64> {
        (self.0)(*xi, *eta, dxi, deta)
    }
}

/// Central finite differences of a black-box function.
///
/// The step grows with the total derivative order: 1e-6 for first, 1e-4
/// for second, 1e-3 for third and up to 1e-2 for mixed sixth derivatives.
/// Expect roughly 1e-9, 1e-8 and 1e-6 accuracy for orders one to three.
pub struct FiniteDifference<F>(pub F);

impl<F: Fn(f64, f64) -> f64> FiniteDifference<F> {
    fn diff(&self, x: f64, y: f64, dx: usize, dy: usize) -> f64 {
        let h = step(dx + dy);
        if dx > 0 {
            let g = |x: f64| self.diff_with(x, y, dy, h);
            return central(g, x, h, dx);
        }
        self.diff_with(x, y, dy, h)
    }

    fn diff_with(&self, x: f64, y: f64, dy: usize, h: f64) -> f64 {
        if dy > 0 {
            return central(|y: f64| (self.0)(x, y), y, h, dy);
        }
        (self.0)(x, y)
    }
}

fn step(order: usize) -> f64 {
    match order {
        1 => 1e-6,
        2 => 1e-4,
        3 => 1e-3,
        4 => 5e-3,
        _ => 1e-2,
    }
}

fn central(g: impl Fn(f64) -> f64, x: f64, h: f64, order: usize) -> f64 {
    match order {
        1 => (g(x + h) - g(x - h)) / (2.0 * h),
        2 => (g(x + h) - 2.0 * g(x) + g(x - h)) / (h * h),
        _ => (g(x + 2.0 * h) - 2.0 * g(x + h) + 2.0 * g(x - h) - g(x - 2.0 * h)) / (2.0 * h * h * h),
    }
}

impl<F: Fn(f64, f64) -> f64> Bivariate<f64> for FiniteDifference<F> {
    fn derivative(&self, xi: &f64, eta: &f64, dxi: usize, deta: usize) -> Option<f64> {
        if dxi > 3 || deta > 3 {
            return None;
        }
        Some(self.diff(*xi, *eta, dxi, deta))
    }
}

/// One blending function of a space, as a [`Bivariate`].
pub struct Blending<'a> {
    pub space: &'a SplineSpace,
    pub index: usize,
}

impl Bivariate<f64> for Blending<'_> {
    fn derivative(&self, xi: &f64, eta: &f64, dxi: usize, deta: usize) -> Option<f64> {
        Some(self.space.eval_raw(self.index, *xi, *eta, dxi, deta))
    }
}

/// `sum_A c_A N_A` for a coefficient vector over the anchors of a space.
pub struct SplineFunction<'a> {
    pub space: &'a SplineSpace,
    pub coeffs: &'a [f64],
}

impl Bivariate<f64> for SplineFunction<'_> {
    fn derivative(&self, xi: &f64, eta: &f64, dxi: usize, deta: usize) -> Option<f64> {
        let mut s = 0.0;
        for (k, f) in self.space.functions.iter().enumerate() {
            let r = f.support();
            if *xi < r.x0 || *xi > r.x1 || *eta < r.y0 || *eta > r.y1 || self.coeffs[k] == 0.0 {
                continue;
            }
            s += self.coeffs[k] * self.space.eval_raw(k, *xi, *eta, dxi, deta);
        }
        Some(s)
    }
}

/// Univariate de Boor–Fix functional: `sum_r w[r] g^(r)(tau)`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnivariateDual<T> {
    pub tau: T,
    pub weights: [T; 4],
}

impl<T: Field> UnivariateDual<T> {
    /// Functional dual to the cubic B-spline on `t`, anchored at the midpoint of its widest span.
    pub fn new(t: &[T; 5]) -> Result<Self, DualError> {
        let mut best: Option<(usize, T)> = None;
        for k in 0..4 {
            let w = t[k + 1].clone() - t[k].clone();
            if w > T::zero() && best.as_ref().is_none_or(|(_, b)| w > *b) {
                best = Some((k, w));
            }
        }
        let (k, _) = best.ok_or(DualError::DegenerateKnotVector)?;
        let two = T::from_i64(2);
        let tau = (t[k].clone() + t[k + 1].clone()) / two.clone();
        let (a, b, c) = (t[1].clone(), t[2].clone(), t[3].clone());
        let s1 = a.clone() + b.clone() + c.clone();
        let s2 = a.clone() * b.clone() + a.clone() * c.clone() + b.clone() * c.clone();
        let three = T::from_i64(3);
        let six = T::from_i64(6);
        let w1 = (s1.clone() - three.clone() * tau.clone()) / three.clone();
        let w2 = (three * tau.clone() * tau.clone() - two * s1 * tau.clone() + s2) / six.clone();
        let w3 = T::zero() - (tau.clone() - a) * (tau.clone() - b) * (tau.clone() - c) / six;
        Ok(UnivariateDual { tau, weights: [T::one(), w1, w2, w3] })
    }

    /// Applies the functional given the derivatives `g^(r)(tau)` for `r = 0..=3`.
    pub fn apply(&self, mut deriv: impl FnMut(usize, &T) -> T) -> T {
        let mut s = T::zero();
        for (r, w) in self.weights.iter().enumerate() {
            if !w.is_zero() {
                s = s + w.clone() * deriv(r, &self.tau);
            }
        }
        s
    }

    /// Value on the cubic B-spline with knots `u`.
    pub fn apply_bspline(&self, u: &[T; 5]) -> T {
        if self.tau < u[0] || self.tau >= u[4] {
            return T::zero();
        }
        self.apply(|r, x| cubic_bspline(u, x, r, false))
    }
}

/// Tensor-product dual functional of one anchor.
#[derive(Clone, Debug, PartialEq)]
pub struct DualFunctional {
    pub anchor: Point,
    pub xi: UnivariateDual<f64>,
    pub eta: UnivariateDual<f64>,
}

impl DualFunctional {
    pub fn for_anchor(space: &SplineSpace, index: usize) -> Result<Self, DualError> {
        let f = &space.functions[index];
        Ok(DualFunctional { anchor: f.anchor, xi: UnivariateDual::new(&f.xi_f)?, eta: UnivariateDual::new(&f.eta_f)? })
    }

    pub fn for_space(space: &SplineSpace) -> Result<Vec<Self>, DualError> {
        (0..space.len()).map(|k| Self::for_anchor(space, k)).collect()
    }

    pub fn tau(&self) -> (f64, f64) {
        (self.xi.tau, self.eta.tau)
    }
}

pub fn dual_apply<F: Bivariate<f64> + ?Sized>(lambda: &DualFunctional, f: &F) -> Result<f64, DualError> {
    let (x, y) = lambda.tau();
    let mut s = 0.0;
    for (r, wx) in lambda.xi.weights.iter().enumerate() {
        for (q, wy) in lambda.eta.weights.iter().enumerate() {
            if *wx == 0.0 || *wy == 0.0 {
                continue;
            }
            let d = f
                .derivative(&x, &y, r, q)
                .ok_or(DualError::DerivativesUnavailable { xi: x, eta: y, dxi: r, deta: q })?;
            s += wx * wy * d;
        }
    }
    Ok(s)
}

/// Coefficients `lambda_A(f)` of the projection `P f = sum_A lambda_A(f) N_A`.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub coeffs: Vec<f64>,
}

impl Projection {
    pub fn eval(&self, space: &SplineSpace, x: f64, y: f64) -> f64 {
        space.combine(&self.coeffs, x, y)
    }
}

pub fn project<F: Bivariate<f64> + ?Sized>(space: &SplineSpace, f: &F) -> Result<Projection, DualError> {
    let duals = DualFunctional::for_space(space)?;
    let coeffs = duals.iter().map(|l| dual_apply(l, f)).collect::<Result<Vec<_>, _>>()?;
    Ok(Projection { coeffs })
}

/// Matrix `lambda_A(N_B)`, sparse by support, as `(A, B, value)` triples.
pub fn dual_gram(space: &SplineSpace) -> Result<Vec<(usize, usize, f64)>, DualError> {
    let duals = DualFunctional::for_space(space)?;
    let mut out = Vec::new();
    for (a, l) in duals.iter().enumerate() {
        for (b, f) in space.functions.iter().enumerate() {
            let vx = l.xi.apply_bspline(&f.xi_f);
            if vx == 0.0 {
                continue;
            }
            let vy = l.eta.apply_bspline(&f.eta_f);
            if vy != 0.0 {
                out.push((a, b, vx * vy));
            }
        }
    }
    Ok(out)
}

/// `max_{A,B} |lambda_A(N_B) - delta_AB|`.
pub fn biorthogonality_defect(space: &SplineSpace) -> Result<f64, DualError> {
    let gram = dual_gram(space)?;
    let mut diag = alloc::vec![0.0; space.len()];
    let mut worst: f64 = 0.0;
    for (a, b, v) in gram {
        if a == b {
            diag[a] = v;
        } else {
            worst = worst.max(libm::fabs(v));
        }
    }
    for d in diag {
        worst = worst.max(libm::fabs(d - 1.0));
    }
    Ok(worst)
}

/// Anchors whose supports meet an element, with their union's bounding box.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedSupport {
    pub element: Element,
    pub anchors: Vec<usize>,
    /// Supports `Q_A` of the contributing anchors; their union is the extended support.
    pub supports: Vec<Rect<f64>>,
    pub bbox: Rect<f64>,
    pub diameter: f64,
}

fn open_overlap(a: &Rect<f64>, b: &Rect<f64>) -> bool {
    a.x0.max(b.x0) < a.x1.min(b.x1) && a.y0.max(b.y0) < a.y1.min(b.y1)
}

fn diameter(r: &Rect<f64>) -> f64 {
    libm::hypot(r.x1 - r.x0, r.y1 - r.y0)
}

pub fn extended_support(space: &SplineSpace, element: &Element) -> ExtendedSupport {
    let mut anchors = Vec::new();
    let mut supports = Vec::new();
    let mut bbox = element.rect;
    for (k, f) in space.functions.iter().enumerate() {
        let s = f.support();
        if open_overlap(&s, &element.rect) {
            anchors.push(k);
            supports.push(s);
            bbox = Rect { x0: bbox.x0.min(s.x0), x1: bbox.x1.max(s.x1), y0: bbox.y0.min(s.y0), y1: bbox.y1.max(s.y1) };
        }
    }
    ExtendedSupport { element: element.clone(), anchors, supports, diameter: diameter(&bbox), bbox }
}

/// Global `L^2` error of `f - P f` over the reduced domain.
pub fn l2_error<F: Bivariate<f64> + ?Sized>(space: &SplineSpace, proj: &Projection, f: &F) -> Result<f64, DualError> {
    let mut sum = 0.0;
    for e in space.elements() {
        let mut missing = None;
        sum += integrate_rect(&e.rect, |x, y| match f.value(&x, &y) {
            Some(v) => {
                let d = v - proj.eval(space, x, y);
                d * d
            }
            None => {
                missing = Some((x, y));
                0.0
            }
        });
        if let Some((x, y)) = missing {
            return Err(DualError::DerivativesUnavailable { xi: x, eta: y, dxi: 0, deta: 0 });
        }
    }
    Ok(libm::sqrt(sum))
}

/// Per-level `(h, L^2 error)` with the fitted log-log slope.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<(f64, f64)>,
    /// `None` when every error is at round-off level.
    pub slope: Option<f64>,
}

pub fn convergence_study<F: Bivariate<f64> + ?Sized>(spaces: &[SplineSpace], f: &F) -> Result<ConvergenceTable, DualError> {
    let mut rows = Vec::new();
    for s in spaces {
        let h = s.elements().iter().map(|e| diameter(&e.rect)).fold(0.0, f64::max);
        let p = project(s, f)?;
        rows.push((h, l2_error(s, &p, f)?));
    }
    Ok(ConvergenceTable { slope: fit_slope(&rows), rows })
}

fn fit_slope(rows: &[(f64, f64)]) -> Option<f64> {
    if rows.len() < 2 || rows.iter().all(|r| r.1 < 1e-12) {
        return None;
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|(h, e)| (libm::log(*h), libm::log(*e))).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

/// Largest ratio `||P f||_{L^2(Q)} / ||f||_{L^2(Omega_Q)}` over the elements.
///
/// The extended support is restricted to the reduced domain, so this is an
/// empirical local-stability constant, not a bound.
pub fn local_stability<F: Bivariate<f64> + ?Sized>(space: &SplineSpace, f: &F) -> Result<f64, DualError> {
    let p = project(space, f)?;
    let elements = space.elements();
    let norms: Vec<(f64, f64)> = elements
        .iter()
        .map(|e| {
            let pf = integrate_rect(&e.rect, |x, y| libm::pow(p.eval(space, x, y), 2.0));
            let ff = integrate_rect(&e.rect, |x, y| libm::pow(f.value(&x, &y).unwrap_or(0.0), 2.0));
            (pf, ff)
        })
        .collect();
    let mut worst: f64 = 0.0;
    for (k, e) in elements.iter().enumerate() {
        let sup = extended_support(space, e);
        let mut ff = 0.0;
        for (q, other) in elements.iter().enumerate() {
            let cx = 0.5 * (other.rect.x0 + other.rect.x1);
            let cy = 0.5 * (other.rect.y0 + other.rect.y1);
            if sup.supports.iter().any(|s| s.x0 < cx && cx < s.x1 && s.y0 < cy && cy < s.y1) {
                ff += norms[q].1;
            }
        }
        if ff > 0.0 {
            worst = worst.max(libm::sqrt(norms[k].0 / ff));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{int, ratio, Rational};
    use crate::spline::tests::{bezier, single_t};
    use crate::spline::GlobalKnots;

    #[test]
    fn univariate_identities_exact() {
        let t = [int(0), ratio(1, 2), int(2), ratio(7, 3), int(5)];
        let l = UnivariateDual::<Rational>::new(&t).unwrap();
        let one = l.apply(|r, _| if r == 0 { int(1) } else { int(0) });
        assert_eq!(one, int(1));
        let lin = l.apply(|r, x| monomial_derivative(x, 1, r));
        assert_eq!(lin, (&t[1] + &t[2] + &t[3]) / int(3));
        let cub = l.apply(|r, x| monomial_derivative(x, 3, r));
        assert_eq!(cub, &t[1] * &t[2] * &t[3]);
        // Exact biorthogonality on the B-spline itself.
        assert_eq!(l.apply_bspline(&t), int(1));
    }

    #[test]
    fn bezier_duals() {
        let b = bezier();
        let duals = DualFunctional::for_space(&b).unwrap();
        for l in &duals {
            assert!((dual_apply(l, &Monomial { a: 0, b: 0 }).unwrap() - 1.0).abs() < 1e-14);
        }
        assert!(biorthogonality_defect(&b).unwrap() < 1e-12);
        let ext = extended_support(&b, &b.elements()[0]);
        assert_eq!(ext.anchors.len(), 16);
        assert_eq!(ext.bbox, Rect { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 });
    }

    #[test]
    fn single_t_projection() {
        let s = single_t();
        let sp = SplineSpace::new(s.clone(), GlobalKnots::uniform(s.domain())).unwrap();
        assert!(biorthogonality_defect(&sp).unwrap() < 1e-10);
        let f = Monomial { a: 3, b: 2 };
        let p = project(&sp, &f).unwrap();
        let r = sp.reduced_domain();
        for a in 0..50 {
            for c in 0..50 {
                let x = r.x0 + (r.x1 - r.x0) * a as f64 / 49.0;
                let y = r.y0 + (r.y1 - r.y0) * c as f64 / 49.0;
                let exact: f64 = Bivariate::<f64>::value(&f, &x, &y).unwrap();
                assert!((p.eval(&sp, x, y) - exact).abs() < 1e-10);
            }
        }
        let k0 = 7;
        let pn = project(&sp, &Blending { space: &sp, index: k0 }).unwrap();
        for (k, c) in pn.coeffs.iter().enumerate() {
            assert!((c - if k == k0 { 1.0 } else { 0.0 }).abs() < 1e-10);
        }
    }

    #[test]
    fn finite_difference_adapter() {
        let fd = FiniteDifference(|x: f64, y: f64| libm::sin(x) * libm::cos(y));
        for (dx, dy, tol) in [(1, 0, 1e-8), (0, 2, 1e-6), (3, 0, 1e-4), (1, 1, 1e-6), (2, 1, 1e-5), (3, 3, 1e-3)] {
            let a = fd.derivative(&0.3, &0.7, dx, dy).unwrap();
            let b = SinCos.derivative(&0.3, &0.7, dx, dy).unwrap();
            assert!((a - b).abs() < tol, "({dx},{dy}): {a} vs {b}");
        }
        let missing = FnBivariate(|_, _, d: usize, _| if d == 0 { Some(1.0) } else { None });
        let b = bezier();
        let l = DualFunctional::for_anchor(&b, 0).unwrap();
        assert!(matches!(dual_apply(&l, &missing), Err(DualError::DerivativesUnavailable { .. })));
    }
}

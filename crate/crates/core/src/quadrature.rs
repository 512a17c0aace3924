//! Five-point Gauss–Legendre rules.

use crate::mesh::Rect;

pub const GAUSS5_NODES: [f64; 5] =
    [-0.906_179_845_938_664, -0.538_469_310_105_683_1, 0.0, 0.538_469_310_105_683_1, 0.906_179_845_938_664];

pub const GAUSS5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Integrates `f` over `[a, b]`.
pub fn integrate_1d(a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut s = 0.0;
    for (x, w) in GAUSS5_NODES.iter().zip(GAUSS5_WEIGHTS.iter()) {
        s += w * f(mid + half * x);
    }
    s * half
}

/// Tensor 5x5 rule over a rectangle.
pub fn integrate_rect(r: &Rect<f64>, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
    let hx = 0.5 * (r.x1 - r.x0);
    let hy = 0.5 * (r.y1 - r.y0);
    let mx = 0.5 * (r.x0 + r.x1);
    let my = 0.5 * (r.y0 + r.y1);
    let mut s = 0.0;
    for (y, wy) in GAUSS5_NODES.iter().zip(GAUSS5_WEIGHTS.iter()) {
        for (x, wx) in GAUSS5_NODES.iter().zip(GAUSS5_WEIGHTS.iter()) {
            s += wx * wy * f(mx + hx * x, my + hy * y);
        }
    }
    s * hx * hy
}

//! SVG drawings of T-meshes in the parametric domain.
//!
//! Vertex markers: crossing vertices are red stars, overlap vertices green
//! triangles, extended vertices black squares, inactive vertices grey
//! circles, active vertices hollow circles and T-junctions red circles.

use std::fmt::Write as _;

use tspline_core::field::rational_to_f64;
use tspline_core::{Axis, ExtendedTMesh, GlobalKnots, Point, Span, SplineSpace, TMesh, VertexClass};

const SIZE: f64 = 640.0;
const MARGIN: f64 = 24.0;
const R: f64 = 4.5;

/// Marker kinds, in drawing order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Marker {
    Inactive,
    Extended,
    Overlap,
    Crossing,
    Active,
    TJunction,
}

impl Marker {
    pub fn class(self) -> &'static str {
        match self {
            Marker::Inactive => "inactive",
            Marker::Extended => "extended",
            Marker::Overlap => "overlap",
            Marker::Crossing => "crossing",
            Marker::Active => "active",
            Marker::TJunction => "tjunction",
        }
    }
}

/// Marker of a vertex of the base mesh or, with `ext`, of the extended mesh.
pub fn marker_of(mesh: &TMesh, ext: Option<&ExtendedTMesh>, p: Point) -> Marker {
    let d = mesh.domain();
    let base_vertex = mesh.is_vertex(p);
    if base_vertex && d.in_active_region(p) {
        return if mesh.symbol(p).is_t_junction() { Marker::TJunction } else { Marker::Active };
    }
    match ext.and_then(|e| e.class_of(p)) {
        Some(VertexClass::Crossing) => Marker::Crossing,
        Some(VertexClass::Overlap) => Marker::Overlap,
        Some(VertexClass::Extended) if !base_vertex => Marker::Extended,
        _ => Marker::Inactive,
    }
}

struct Frame {
    x: Vec<f64>,
    y: Vec<f64>,
    m_lo: i32,
    n_lo: i32,
    scale: f64,
    x0: f64,
    y0: f64,
    height: f64,
}

impl Frame {
    fn new(knots: &GlobalKnots) -> Self {
        let d = knots.domain();
        let x: Vec<f64> = knots.xi_all().iter().map(rational_to_f64).collect();
        let y: Vec<f64> = knots.eta_all().iter().map(rational_to_f64).collect();
        let (x0, x1) = (x[0], x[x.len() - 1]);
        let (y0, y1) = (y[0], y[y.len() - 1]);
        let span = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
        let scale = (SIZE - 2.0 * MARGIN) / span;
        Frame { height: (y1 - y0) * scale + 2.0 * MARGIN, x, y, m_lo: d.m_lo, n_lo: d.n_lo, scale, x0, y0 }
    }

    fn width(&self) -> f64 {
        (self.x[self.x.len() - 1] - self.x0) * self.scale + 2.0 * MARGIN
    }

    fn px(&self, xv: f64) -> f64 {
        MARGIN + (xv - self.x0) * self.scale
    }

    fn py(&self, yv: f64) -> f64 {
        self.height - MARGIN - (yv - self.y0) * self.scale
    }

    fn point(&self, p: Point) -> (f64, f64) {
        (self.px(self.x[(p.i - self.m_lo) as usize]), self.py(self.y[(p.j - self.n_lo) as usize]))
    }

    fn span(&self, axis: Axis, s: Span) -> ((f64, f64), (f64, f64)) {
        match axis {
            Axis::Horizontal => (self.point(Point::new(s.lo, s.line)), self.point(Point::new(s.hi, s.line))),
            Axis::Vertical => (self.point(Point::new(s.line, s.lo)), self.point(Point::new(s.line, s.hi))),
        }
    }
}

fn line(out: &mut String, class: &str, a: (f64, f64), b: (f64, f64)) {
    let _ = writeln!(out, r#"<line class="{class}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#, a.0, a.1, b.0, b.1);
}

fn marker(out: &mut String, m: Marker, p: Point, (x, y): (f64, f64)) {
    let class = m.class();
    let data = format!(r#"data-i="{}" data-j="{}""#, p.i, p.j);
    match m {
        Marker::Crossing => {
            let pts: Vec<String> = (0..10)
                .map(|k| {
                    let r = if k % 2 == 0 { 1.6 * R } else { 0.7 * R };
                    let a = std::f64::consts::PI * (k as f64 / 5.0 - 0.5);
                    format!("{:.2},{:.2}", x + r * a.cos(), y + r * a.sin())
                })
                .collect();
            let _ = writeln!(out, r#"<polygon class="vertex {class}" {data} points="{}" fill="red"/>"#, pts.join(" "));
        }
        Marker::Overlap => {
            let _ = writeln!(
                out,
                r#"<polygon class="vertex {class}" {data} points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="green"/>"#,
                x,
                y - 1.3 * R,
                x - 1.2 * R,
                y + 0.8 * R,
                x + 1.2 * R,
                y + 0.8 * R
            );
        }
        Marker::Extended => {
            let _ = writeln!(
                out,
                r#"<rect class="vertex {class}" {data} x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="black"/>"#,
                x - R,
                y - R,
                2.0 * R,
                2.0 * R
            );
        }
        Marker::Inactive | Marker::Active | Marker::TJunction => {
            let (fill, stroke) = match m {
                Marker::Inactive => ("grey", "grey"),
                Marker::Active => ("white", "black"),
                _ => ("red", "red"),
            };
            let _ = writeln!(
                out,
                r#"<circle class="vertex {class}" {data} cx="{x:.2}" cy="{y:.2}" r="{R}" fill="{fill}" stroke="{stroke}"/>"#
            );
        }
    }
}

/// Options for [`render`].
#[derive(Clone, Copy, Debug, Default)]
pub struct PlotOptions {
    /// Draw extensions and classify the vertices of the extended mesh.
    pub extended: bool,
    /// Grayscale raster of one blending function, `n x n` cells.
    pub raster: Option<(usize, usize)>,
}

/// Renders the mesh. With `opts.extended` one marker is emitted per vertex
/// of the extended mesh, otherwise one per vertex of the mesh.
pub fn render(space: &SplineSpace, opts: PlotOptions) -> String {
    let frame = Frame::new(&space.knots);
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{:.0}" height="{:.0}" viewBox="0 0 {:.2} {:.2}">"#,
        frame.width(),
        frame.height,
        frame.width(),
        frame.height
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="100%" height="100%" fill="white"/>"#);
    if let Some((index, n)) = opts.raster {
        raster(&mut out, space, &frame, index, n);
    }
    let _ = writeln!(out, r#"<g stroke="black" stroke-width="1.2">"#);
    for axis in [Axis::Horizontal, Axis::Vertical] {
        for s in space.mesh.lines(axis) {
            let (a, b) = frame.span(axis, s);
            line(&mut out, "mesh", a, b);
        }
    }
    let _ = writeln!(out, "</g>");
    let ext = opts.extended.then_some(&space.ext);
    if let Some(e) = ext {
        let _ = writeln!(out, r#"<g stroke-width="2.4" opacity="0.8">"#);
        for x in &e.extensions {
            let (a, b) = frame.span(x.axis, x.face);
            let _ = writeln!(
                out,
                r#"<line class="face-extension" stroke="red" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
                a.0, a.1, b.0, b.1
            );
            let (a, b) = frame.span(x.axis, x.edge);
            let _ = writeln!(
                out,
                r#"<line class="edge-extension" stroke="gold" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
                a.0, a.1, b.0, b.1
            );
        }
        let _ = writeln!(out, "</g>");
    }
    let vertices = match ext {
        Some(e) => e.ext_mesh.vertices(),
        None => space.mesh.vertices(),
    };
    let mut marks: Vec<(Marker, Point)> = vertices.into_iter().map(|p| (marker_of(&space.mesh, ext, p), p)).collect();
    marks.sort();
    let _ = writeln!(out, r#"<g stroke-width="1">"#);
    for (m, p) in marks {
        marker(&mut out, m, p, frame.point(p));
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    out
}

fn raster(out: &mut String, space: &SplineSpace, frame: &Frame, index: usize, n: usize) {
    let r = space.reduced_domain();
    let (dx, dy) = ((r.x1 - r.x0) / n as f64, (r.y1 - r.y0) / n as f64);
    let _ = writeln!(out, r#"<g class="raster" shape-rendering="crispEdges">"#);
    for a in 0..n {
        for b in 0..n {
            let x = r.x0 + (a as f64 + 0.5) * dx;
            let y = r.y0 + (b as f64 + 0.5) * dy;
            let v = space.eval_raw(index, x, y, 0, 0).clamp(0.0, 1.0);
            let g = (255.0 * (1.0 - v)).round() as u8;
            let (px, py) = (frame.px(r.x0 + a as f64 * dx), frame.py(r.y0 + (b + 1) as f64 * dy));
            let _ = writeln!(
                out,
                r#"<rect x="{px:.2}" y="{py:.2}" width="{:.2}" height="{:.2}" fill="rgb({g},{g},{g})"/>"#,
                dx * frame.scale + 0.05,
                dy * frame.scale + 0.05
            );
        }
    }
    let _ = writeln!(out, "</g>");
}

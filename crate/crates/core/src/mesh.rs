//! Index-space T-meshes.
//!
//! A [`TMesh`] is a rectangular partition of an integer index domain. It is
//! stored as two unit-edge bitmaps over the lattice; maximal edges, vertices,
//! segments and faces are derived from those bitmaps, which makes
//! normalization (merging overlapping inputs, absorbing valence-2 points)
//! automatic.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use thiserror::Error;

/// Lattice point `(i, j)` of the index domain.
///
/// Points order bottom-to-top, then left-to-right.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Point {
    pub i: i32,
    pub j: i32,
}

impl Point {
    pub const fn new(i: i32, j: i32) -> Self {
        Point { i, j }
    }
}

impl Ord for Point {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.j, self.i).cmp(&(other.j, other.i))
    }
}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.i, self.j)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    Horizontal,
    Vertical,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::Horizontal => Axis::Vertical,
            Axis::Vertical => Axis::Horizontal,
        }
    }
}

/// A closed integer span `[lo, hi]` on row (horizontal) or column (vertical) `line`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub line: i32,
    pub lo: i32,
    pub hi: i32,
}

impl Span {
    pub const fn new(line: i32, lo: i32, hi: i32) -> Self {
        Span { line, lo, hi }
    }

    pub fn contains(&self, k: i32) -> bool {
        self.lo <= k && k <= self.hi
    }
}

/// Axis-aligned rectangle `[i0, i1] x [j0, j1]` in index or parameter space.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Rect<T> {
    pub x0: T,
    pub x1: T,
    pub y0: T,
    pub y1: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IndexDomain {
    pub m_lo: i32,
    pub m_hi: i32,
    pub n_lo: i32,
    pub n_hi: i32,
}

impl IndexDomain {
    pub fn new(m_lo: i32, m_hi: i32, n_lo: i32, n_hi: i32) -> Result<Self, MeshError> {
        if m_hi - m_lo < 7 || n_hi - n_lo < 7 {
            return Err(MeshError::DomainTooSmall { m_lo, m_hi, n_lo, n_hi });
        }
        Ok(IndexDomain { m_lo, m_hi, n_lo, n_hi })
    }

    pub fn width(&self) -> usize {
        (self.m_hi - self.m_lo) as usize
    }

    pub fn height(&self) -> usize {
        (self.n_hi - self.n_lo) as usize
    }

    pub fn contains(&self, p: Point) -> bool {
        self.m_lo <= p.i && p.i <= self.m_hi && self.n_lo <= p.j && p.j <= self.n_hi
    }

    /// Closed active region `[m_lo+2, m_hi-2] x [n_lo+2, n_hi-2]`.
    pub fn active_region(&self) -> Rect<i32> {
        Rect { x0: self.m_lo + 2, x1: self.m_hi - 2, y0: self.n_lo + 2, y1: self.n_hi - 2 }
    }

    pub fn in_active_region(&self, p: Point) -> bool {
        let r = self.active_region();
        r.x0 <= p.i && p.i <= r.x1 && r.y0 <= p.j && p.j <= r.y1
    }

    /// Closed frame region: the part of the domain within two indices of the boundary.
    pub fn in_frame_region(&self, p: Point) -> bool {
        self.contains(p)
            && (p.i <= self.m_lo + 2
                || p.i >= self.m_hi - 2
                || p.j <= self.n_lo + 2
                || p.j >= self.n_hi - 2)
    }

    pub fn is_corner(&self, p: Point) -> bool {
        (p.i == self.m_lo || p.i == self.m_hi) && (p.j == self.n_lo || p.j == self.n_hi)
    }

    pub fn on_boundary(&self, p: Point) -> bool {
        p.i == self.m_lo || p.i == self.m_hi || p.j == self.n_lo || p.j == self.n_hi
    }

    /// Lines of one axis that admissibility requires to be full.
    pub fn required_lines(&self, axis: Axis) -> [i32; 8] {
        let (lo, hi) = match axis {
            Axis::Vertical => (self.m_lo, self.m_hi),
            Axis::Horizontal => (self.n_lo, self.n_hi),
        };
        [lo, lo + 1, lo + 2, lo + 3, hi - 3, hi - 2, hi - 1, hi]
    }

    fn line_range(&self, axis: Axis) -> (i32, i32) {
        match axis {
            Axis::Horizontal => (self.n_lo, self.n_hi),
            Axis::Vertical => (self.m_lo, self.m_hi),
        }
    }

    fn along_range(&self, axis: Axis) -> (i32, i32) {
        self.line_range(axis.other())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeshError {
    #[error("index domain [{m_lo},{m_hi}]x[{n_lo},{n_hi}] is smaller than 7 in some direction")]
    DomainTooSmall { m_lo: i32, m_hi: i32, n_lo: i32, n_hi: i32 },
    #[error("{axis:?} span {span:?} leaves the index domain")]
    SpanOutOfDomain { axis: Axis, span: Span },
    #[error("{axis:?} span {span:?} is empty")]
    EmptySpan { axis: Axis, span: Span },
    #[error("edge ends at {0} with valence one")]
    DanglingEdge(Point),
    #[error("point {0} is an interior corner; the partition is not rectangular")]
    NotRectangular(Point),
    #[error("point {0} is not on the skeleton")]
    VertexNotOnSkeleton(Point),
    #[error("symbolic mesh does not match the domain size")]
    SymbolicShape,
}

/// The four arms of a lattice point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Arms {
    pub left: bool,
    pub right: bool,
    pub down: bool,
    pub up: bool,
}

impl Arms {
    pub fn count(&self) -> usize {
        self.left as usize + self.right as usize + self.down as usize + self.up as usize
    }

    pub fn horizontal(&self) -> bool {
        self.left || self.right
    }

    pub fn vertical(&self) -> bool {
        self.down || self.up
    }
}

/// Symbols of a symbolic T-mesh.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    /// Valence-4 vertex, corner, or valence-3 boundary vertex.
    Cross,
    /// T-junction missing its left edge.
    MissingLeft,
    /// T-junction missing its right edge.
    MissingRight,
    /// T-junction missing its lower edge.
    MissingDown,
    /// T-junction missing its upper edge.
    MissingUp,
    VerticalEdge,
    HorizontalEdge,
    Empty,
}

impl Symbol {
    pub fn as_char(self) -> char {
        match self {
            Symbol::Cross => '+',
            Symbol::MissingLeft => '⊢',
            Symbol::MissingRight => '⊣',
            Symbol::MissingDown => '⊥',
            Symbol::MissingUp => '⊤',
            Symbol::VerticalEdge => '|',
            Symbol::HorizontalEdge => '-',
            Symbol::Empty => '·',
        }
    }

    pub fn from_char(c: char) -> Option<Symbol> {
        Some(match c {
            '+' => Symbol::Cross,
            '⊢' => Symbol::MissingLeft,
            '⊣' => Symbol::MissingRight,
            '⊥' => Symbol::MissingDown,
            '⊤' => Symbol::MissingUp,
            '|' => Symbol::VerticalEdge,
            '-' | '−' => Symbol::HorizontalEdge,
            '·' | '.' => Symbol::Empty,
            _ => return None,
        })
    }

    pub fn is_t_junction(self) -> bool {
        matches!(
            self,
            Symbol::MissingLeft | Symbol::MissingRight | Symbol::MissingDown | Symbol::MissingUp
        )
    }

    /// Axis of the extensions of a T-junction symbol.
    pub fn extension_axis(self) -> Option<Axis> {
        match self {
            Symbol::MissingLeft | Symbol::MissingRight => Some(Axis::Horizontal),
            Symbol::MissingDown | Symbol::MissingUp => Some(Axis::Vertical),
            _ => None,
        }
    }

    /// Arms implied by the symbol; `Cross` claims all four.
    fn arms(self) -> Arms {
        let all = Arms { left: true, right: true, down: true, up: true };
        match self {
            Symbol::Cross => all,
            Symbol::MissingLeft => Arms { left: false, ..all },
            Symbol::MissingRight => Arms { right: false, ..all },
            Symbol::MissingDown => Arms { down: false, ..all },
            Symbol::MissingUp => Arms { up: false, ..all },
            Symbol::VerticalEdge => Arms { down: true, up: true, ..Arms::default() },
            Symbol::HorizontalEdge => Arms { left: true, right: true, ..Arms::default() },
            Symbol::Empty => Arms::default(),
        }
    }
}

/// One symbol per lattice point, rows bottom to top.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicMesh {
    pub domain: IndexDomain,
    /// `rows[j - n_lo][i - m_lo]`.
    pub rows: Vec<Vec<Symbol>>,
}

impl SymbolicMesh {
    pub fn at(&self, p: Point) -> Symbol {
        self.rows[(p.j - self.domain.n_lo) as usize][(p.i - self.domain.m_lo) as usize]
    }
}

impl fmt::Display for SymbolicMesh {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows.iter().rev() {
            for s in row {
                write!(f, "{}", s.as_char())?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// A maximal run of collinear edges, with the mesh vertices lying on it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Segment {
    pub axis: Axis,
    pub span: Span,
    /// Coordinates along the line of the vertices on the segment, ascending.
    pub vertices: Vec<i32>,
}

impl Segment {
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        let axis = self.axis;
        let line = self.span.line;
        self.vertices.iter().map(move |&k| match axis {
            Axis::Horizontal => Point::new(k, line),
            Axis::Vertical => Point::new(line, k),
        })
    }

    pub fn start(&self) -> Point {
        match self.axis {
            Axis::Horizontal => Point::new(self.span.lo, self.span.line),
            Axis::Vertical => Point::new(self.span.line, self.span.lo),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct AdmissibilityReport {
    /// Frame lines (axis, index) that are not full.
    pub missing_frame_lines: Vec<(Axis, i32)>,
    /// Active-region lines (axis, index) that are not full.
    pub missing_active_lines: Vec<(Axis, i32)>,
    /// Vertex pairs on a common element boundary whose connecting segment
    /// crosses the element interior.
    pub element_violations: Vec<(Point, Point)>,
}

impl AdmissibilityReport {
    pub fn frame_ok(&self) -> bool {
        self.missing_frame_lines.is_empty()
    }

    pub fn active_ok(&self) -> bool {
        self.missing_active_lines.is_empty()
    }

    pub fn elements_ok(&self) -> bool {
        self.element_violations.is_empty()
    }

    pub fn is_admissible(&self) -> bool {
        self.frame_ok() && self.active_ok() && self.elements_ok()
    }
}

/// Index-space T-mesh. Immutable once built.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TMesh {
    domain: IndexDomain,
    /// Horizontal unit edge `(i,j)-(i+1,j)` at `[(j - n_lo) * w + (i - m_lo)]`.
    h_unit: Vec<bool>,
    /// Vertical unit edge `(i,j)-(i,j+1)` at `[(j - n_lo) * (w + 1) + (i - m_lo)]`.
    v_unit: Vec<bool>,
}

impl fmt::Debug for TMesh {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TMesh")
            .field("domain", &self.domain)
            .field("h_lines", &self.lines(Axis::Horizontal))
            .field("v_lines", &self.lines(Axis::Vertical))
            .finish()
    }
}

/// Builds a normalized T-mesh from line spans. The domain boundary is always added.
pub fn build_tmesh(domain: IndexDomain, h_lines: &[Span], v_lines: &[Span]) -> Result<TMesh, MeshError> {
    let mut mesh = TMesh::empty(domain);
    mesh.add_boundary();
    for (axis, spans) in [(Axis::Horizontal, h_lines), (Axis::Vertical, v_lines)] {
        for &span in spans {
            mesh.check_span(axis, span)?;
            mesh.add_span(axis, span);
        }
    }
    mesh.validate()?;
    Ok(mesh)
}

impl TMesh {
    pub(crate) fn empty(domain: IndexDomain) -> Self {
        let w = domain.width();
        let h = domain.height();
        TMesh { domain, h_unit: vec![false; w * (h + 1)], v_unit: vec![false; (w + 1) * h] }
    }

    pub(crate) fn add_boundary(&mut self) {
        let d = self.domain;
        for line in [d.n_lo, d.n_hi] {
            self.add_span(Axis::Horizontal, Span::new(line, d.m_lo, d.m_hi));
        }
        for line in [d.m_lo, d.m_hi] {
            self.add_span(Axis::Vertical, Span::new(line, d.n_lo, d.n_hi));
        }
    }

    pub(crate) fn check_span(&self, axis: Axis, span: Span) -> Result<(), MeshError> {
        let (l0, l1) = self.domain.line_range(axis);
        let (a0, a1) = self.domain.along_range(axis);
        if span.line < l0 || span.line > l1 || span.lo < a0 || span.hi > a1 {
            return Err(MeshError::SpanOutOfDomain { axis, span });
        }
        if span.lo >= span.hi {
            return Err(MeshError::EmptySpan { axis, span });
        }
        Ok(())
    }

    /// Adds a span that is already known to lie in the domain.
    pub(crate) fn add_span(&mut self, axis: Axis, span: Span) {
        for k in span.lo..span.hi {
            let idx = match axis {
                Axis::Horizontal => self.h_index(k, span.line),
                Axis::Vertical => self.v_index(span.line, k),
            };
            match axis {
                Axis::Horizontal => self.h_unit[idx] = true,
                Axis::Vertical => self.v_unit[idx] = true,
            }
        }
    }

    /// Checks that every lattice point is a valid T-mesh point.
    pub(crate) fn validate(&self) -> Result<(), MeshError> {
        for p in self.lattice() {
            let a = self.arms(p);
            match a.count() {
                1 => return Err(MeshError::DanglingEdge(p)),
                2 if a.horizontal() && a.vertical() && !self.domain.is_corner(p) => {
                    return Err(MeshError::NotRectangular(p))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Union of two meshes over the same domain.
    pub fn union(&self, other: &TMesh) -> TMesh {
        assert_eq!(self.domain, other.domain, "union of meshes over different domains");
        TMesh {
            domain: self.domain,
            h_unit: self.h_unit.iter().zip(&other.h_unit).map(|(a, b)| *a || *b).collect(),
            v_unit: self.v_unit.iter().zip(&other.v_unit).map(|(a, b)| *a || *b).collect(),
        }
    }

    /// True when every edge of `self` is an edge of `other`.
    pub fn is_submesh_of(&self, other: &TMesh) -> bool {
        self.domain == other.domain && self.first_edge_not_in(other).is_none()
    }

    /// First unit edge `(axis, start point)` of `self` absent from `other`.
    pub fn first_edge_not_in(&self, other: &TMesh) -> Option<(Axis, Point)> {
        if self.domain != other.domain {
            return Some((Axis::Horizontal, Point::new(self.domain.m_lo, self.domain.n_lo)));
        }
        let w = self.domain.width();
        for (idx, (&a, &b)) in self.h_unit.iter().zip(&other.h_unit).enumerate() {
            if a && !b {
                let p = Point::new(self.domain.m_lo + (idx % w) as i32, self.domain.n_lo + (idx / w) as i32);
                return Some((Axis::Horizontal, p));
            }
        }
        for (idx, (&a, &b)) in self.v_unit.iter().zip(&other.v_unit).enumerate() {
            if a && !b {
                let p = Point::new(
                    self.domain.m_lo + (idx % (w + 1)) as i32,
                    self.domain.n_lo + (idx / (w + 1)) as i32,
                );
                return Some((Axis::Vertical, p));
            }
        }
        None
    }

    pub fn domain(&self) -> IndexDomain {
        self.domain
    }

    fn h_index(&self, i: i32, j: i32) -> usize {
        (j - self.domain.n_lo) as usize * self.domain.width() + (i - self.domain.m_lo) as usize
    }

    fn v_index(&self, i: i32, j: i32) -> usize {
        (j - self.domain.n_lo) as usize * (self.domain.width() + 1) + (i - self.domain.m_lo) as usize
    }

    /// Whether the horizontal unit edge from `(i, j)` to `(i+1, j)` is present.
    pub fn has_h_unit(&self, i: i32, j: i32) -> bool {
        let d = self.domain;
        i >= d.m_lo && i < d.m_hi && j >= d.n_lo && j <= d.n_hi && self.h_unit[self.h_index(i, j)]
    }

    /// Whether the vertical unit edge from `(i, j)` to `(i, j+1)` is present.
    pub fn has_v_unit(&self, i: i32, j: i32) -> bool {
        let d = self.domain;
        i >= d.m_lo && i <= d.m_hi && j >= d.n_lo && j < d.n_hi && self.v_unit[self.v_index(i, j)]
    }

    pub fn has_unit(&self, axis: Axis, p: Point) -> bool {
        match axis {
            Axis::Horizontal => self.has_h_unit(p.i, p.j),
            Axis::Vertical => self.has_v_unit(p.i, p.j),
        }
    }

    pub fn arms(&self, p: Point) -> Arms {
        Arms {
            left: self.has_h_unit(p.i - 1, p.j),
            right: self.has_h_unit(p.i, p.j),
            down: self.has_v_unit(p.i, p.j - 1),
            up: self.has_v_unit(p.i, p.j),
        }
    }

    pub fn lattice(&self) -> impl Iterator<Item = Point> {
        let d = self.domain;
        (d.n_lo..=d.n_hi).flat_map(move |j| (d.m_lo..=d.m_hi).map(move |i| Point::new(i, j)))
    }

    pub fn is_vertex(&self, p: Point) -> bool {
        self.domain.contains(p) && (self.arms(p).count() >= 3 || self.domain.is_corner(p))
    }

    pub fn on_skeleton(&self, p: Point) -> bool {
        self.domain.contains(p) && self.arms(p).count() > 0
    }

    /// Membership in the horizontal skeleton (horizontal edges and all vertices).
    pub fn on_h_skeleton(&self, p: Point) -> bool {
        self.is_vertex(p) || self.arms(p).horizontal()
    }

    /// Membership in the vertical skeleton (vertical edges and all vertices).
    pub fn on_v_skeleton(&self, p: Point) -> bool {
        self.is_vertex(p) || self.arms(p).vertical()
    }

    pub fn on_skeleton_of(&self, axis: Axis, p: Point) -> bool {
        match axis {
            Axis::Horizontal => self.on_h_skeleton(p),
            Axis::Vertical => self.on_v_skeleton(p),
        }
    }

    pub fn vertices(&self) -> Vec<Point> {
        self.lattice().filter(|&p| self.is_vertex(p)).collect()
    }

    pub fn vertex_count(&self) -> usize {
        self.lattice().filter(|&p| self.is_vertex(p)).count()
    }

    /// Maximal runs of unit edges on each line: the segments' spans.
    pub fn lines(&self, axis: Axis) -> Vec<Span> {
        let (l0, l1) = self.domain.line_range(axis);
        let (a0, a1) = self.domain.along_range(axis);
        let mut out = Vec::new();
        for line in l0..=l1 {
            let mut start = None;
            for k in a0..=a1 {
                let present = k < a1
                    && match axis {
                        Axis::Horizontal => self.has_h_unit(k, line),
                        Axis::Vertical => self.has_v_unit(line, k),
                    };
                match (present, start) {
                    (true, None) => start = Some(k),
                    (false, Some(s)) => {
                        out.push(Span::new(line, s, k));
                        start = None;
                    }
                    _ => {}
                }
            }
        }
        out
    }

    /// Maximal open edges: runs between consecutive vertices.
    pub fn edges(&self, axis: Axis) -> Vec<Span> {
        let mut out = Vec::new();
        for seg in self.segments_of(axis) {
            for w in seg.vertices.windows(2) {
                out.push(Span::new(seg.span.line, w[0], w[1]));
            }
        }
        out
    }

    /// Horizontal trace `hJ` (columns crossed by the vertical skeleton on
    /// row `p.j`) or vertical trace `vJ` (rows crossed by the horizontal
    /// skeleton on column `p.i`), ascending.
    pub fn trace_indices(&self, p: Point, axis: Axis) -> Result<Vec<i32>, MeshError> {
        if !self.on_skeleton(p) {
            return Err(MeshError::VertexNotOnSkeleton(p));
        }
        Ok(self.trace_line(p, axis))
    }

    /// Trace through `p` without requiring `p` to be on the skeleton.
    pub(crate) fn trace_line(&self, p: Point, axis: Axis) -> Vec<i32> {
        let d = self.domain;
        match axis {
            Axis::Horizontal => (d.m_lo..=d.m_hi).filter(|&k| self.on_v_skeleton(Point::new(k, p.j))).collect(),
            Axis::Vertical => (d.n_lo..=d.n_hi).filter(|&k| self.on_h_skeleton(Point::new(p.i, k))).collect(),
        }
    }

    pub fn segments_of(&self, axis: Axis) -> Vec<Segment> {
        self.lines(axis)
            .into_iter()
            .map(|span| {
                let vertices = (span.lo..=span.hi)
                    .filter(|&k| {
                        let p = match axis {
                            Axis::Horizontal => Point::new(k, span.line),
                            Axis::Vertical => Point::new(span.line, k),
                        };
                        self.is_vertex(p)
                    })
                    .collect();
                Segment { axis, span, vertices }
            })
            .collect()
    }

    /// All segments: horizontal ones first (by row, then start), then vertical.
    pub fn segments(&self) -> Vec<Segment> {
        let mut out = self.segments_of(Axis::Horizontal);
        out.extend(self.segments_of(Axis::Vertical));
        out
    }

    /// The segment of the given axis containing `p`, if any.
    pub fn segment_through(&self, axis: Axis, p: Point) -> Option<Span> {
        let (line, k) = match axis {
            Axis::Horizontal => (p.j, p.i),
            Axis::Vertical => (p.i, p.j),
        };
        let has = |k: i32| match axis {
            Axis::Horizontal => self.has_h_unit(k, line),
            Axis::Vertical => self.has_v_unit(line, k),
        };
        if !has(k) && !has(k - 1) {
            return None;
        }
        let mut lo = k;
        while has(lo - 1) {
            lo -= 1;
        }
        let mut hi = k;
        while has(hi) {
            hi += 1;
        }
        Some(Span::new(line, lo, hi))
    }

    pub fn symbol(&self, p: Point) -> Symbol {
        let a = self.arms(p);
        if self.is_vertex(p) {
            if a.count() == 3 && !self.domain.on_boundary(p) {
                if !a.left {
                    Symbol::MissingLeft
                } else if !a.right {
                    Symbol::MissingRight
                } else if !a.down {
                    Symbol::MissingDown
                } else {
                    Symbol::MissingUp
                }
            } else {
                Symbol::Cross
            }
        } else if a.vertical() {
            Symbol::VerticalEdge
        } else if a.horizontal() {
            Symbol::HorizontalEdge
        } else {
            Symbol::Empty
        }
    }

    pub fn symbolic(&self) -> SymbolicMesh {
        let d = self.domain;
        let rows = (d.n_lo..=d.n_hi)
            .map(|j| (d.m_lo..=d.m_hi).map(|i| self.symbol(Point::new(i, j))).collect())
            .collect();
        SymbolicMesh { domain: d, rows }
    }

    /// Rebuilds a mesh from its symbolic form: a unit edge is present when
    /// both of its end symbols have an arm pointing along it.
    pub fn from_symbolic(sym: &SymbolicMesh) -> Result<TMesh, MeshError> {
        let d = sym.domain;
        if sym.rows.len() != d.height() + 1 || sym.rows.iter().any(|r| r.len() != d.width() + 1) {
            return Err(MeshError::SymbolicShape);
        }
        let mut mesh = TMesh::empty(d);
        for j in d.n_lo..=d.n_hi {
            for i in d.m_lo..=d.m_hi {
                let here = sym.at(Point::new(i, j)).arms();
                if i < d.m_hi && here.right && sym.at(Point::new(i + 1, j)).arms().left {
                    let idx = mesh.h_index(i, j);
                    mesh.h_unit[idx] = true;
                }
                if j < d.n_hi && here.up && sym.at(Point::new(i, j + 1)).arms().down {
                    let idx = mesh.v_index(i, j);
                    mesh.v_unit[idx] = true;
                }
            }
        }
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn anchors(&self) -> Vec<Point> {
        self.lattice().filter(|&p| self.domain.in_active_region(p) && self.is_vertex(p)).collect()
    }

    /// Interior valence-3 anchors with their orientation symbol.
    pub fn t_junctions(&self) -> Vec<(Point, Symbol)> {
        self.anchors()
            .into_iter()
            .map(|p| (p, self.symbol(p)))
            .filter(|(_, s)| s.is_t_junction())
            .collect()
    }

    /// Elements (open faces) of the partition, as closed index rectangles.
    pub fn faces(&self) -> Vec<Rect<i32>> {
        let d = self.domain;
        let w = d.width();
        let h = d.height();
        let mut seen = vec![false; w * h];
        let mut out = Vec::new();
        for cj in 0..h {
            for ci in 0..w {
                if seen[cj * w + ci] {
                    continue;
                }
                // Faces are rectangles: grow right until a vertical edge, then up until a horizontal edge.
                let i0 = d.m_lo + ci as i32;
                let j0 = d.n_lo + cj as i32;
                let mut i1 = i0 + 1;
                while i1 < d.m_hi && !self.has_v_unit(i1, j0) {
                    i1 += 1;
                }
                let mut j1 = j0 + 1;
                while j1 < d.n_hi && !self.has_h_unit(i0, j1) {
                    j1 += 1;
                }
                for y in j0..j1 {
                    for x in i0..i1 {
                        seen[(y - d.n_lo) as usize * w + (x - d.m_lo) as usize] = true;
                    }
                }
                out.push(Rect { x0: i0, x1: i1, y0: j0, y1: j1 });
            }
        }
        out
    }

    fn line_is_full(&self, axis: Axis, line: i32) -> bool {
        let (a0, a1) = self.domain.along_range(axis);
        (a0..a1).all(|k| match axis {
            Axis::Horizontal => self.has_h_unit(k, line),
            Axis::Vertical => self.has_v_unit(line, k),
        })
    }

    pub fn validate_admissible(&self) -> AdmissibilityReport {
        let d = self.domain;
        let mut report = AdmissibilityReport::default();
        for axis in [Axis::Vertical, Axis::Horizontal] {
            let (lo, hi) = d.line_range(axis);
            for line in [lo, lo + 1, lo + 2, hi - 2, hi - 1, hi] {
                if !self.line_is_full(axis, line) {
                    report.missing_frame_lines.push((axis, line));
                }
            }
            for line in [lo + 2, lo + 3, hi - 3, hi - 2] {
                if !self.line_is_full(axis, line) {
                    report.missing_active_lines.push((axis, line));
                }
            }
        }
        for face in self.faces() {
            let mut boundary: BTreeSet<Point> = BTreeSet::new();
            for i in face.x0..=face.x1 {
                for j in [face.y0, face.y1] {
                    if self.is_vertex(Point::new(i, j)) {
                        boundary.insert(Point::new(i, j));
                    }
                }
            }
            for j in face.y0..=face.y1 {
                for i in [face.x0, face.x1] {
                    if self.is_vertex(Point::new(i, j)) {
                        boundary.insert(Point::new(i, j));
                    }
                }
            }
            let pts: Vec<Point> = boundary.into_iter().collect();
            for (a, &p) in pts.iter().enumerate() {
                for &q in &pts[a + 1..] {
                    let ok = if p.i == q.i {
                        let (lo, hi) = (p.j.min(q.j), p.j.max(q.j));
                        (lo..hi).all(|j| self.has_v_unit(p.i, j))
                    } else if p.j == q.j {
                        let (lo, hi) = (p.i.min(q.i), p.i.max(q.i));
                        (lo..hi).all(|i| self.has_h_unit(i, p.j))
                    } else {
                        true
                    };
                    if !ok {
                        report.element_violations.push((p, q));
                    }
                }
            }
        }
        report
    }

    pub fn is_admissible(&self) -> bool {
        self.validate_admissible().is_admissible()
    }
}

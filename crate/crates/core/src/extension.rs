//! T-junction extensions, the extended T-mesh and analysis suitability.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use thiserror::Error;

use crate::mesh::{Axis, MeshError, Point, Span, Symbol, TMesh};

/// Extensions of one T-junction.
///
/// `face` is closed. `edge` is stored as its closed hull but is open at the
/// owner's coordinate, so the two share only that point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Extension {
    pub owner: Point,
    pub symbol: Symbol,
    pub axis: Axis,
    pub face: Span,
    pub edge: Span,
}

impl Extension {
    /// Closed hull of face and edge extension.
    pub fn full(&self) -> Span {
        Span::new(self.face.line, self.face.lo.min(self.edge.lo), self.face.hi.max(self.edge.hi))
    }

    fn along(&self, p: Point) -> Option<i32> {
        match self.axis {
            Axis::Horizontal if p.j == self.face.line => Some(p.i),
            Axis::Vertical if p.i == self.face.line => Some(p.j),
            _ => None,
        }
    }

    pub fn face_contains(&self, p: Point) -> bool {
        self.along(p).is_some_and(|k| self.face.contains(k))
    }

    pub fn contains(&self, p: Point) -> bool {
        self.along(p).is_some_and(|k| self.full().contains(k))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtendError {
    #[error("T-junction at {0} has too few trace indices for its extensions")]
    InsufficientTrace(Point),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexClass {
    Active,
    Crossing,
    Overlap,
    Extended,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExtendOptions {
    /// Let edge extensions count towards overlap vertices.
    pub edge_extensions_overlap: bool,
}

/// A horizontal and a vertical extension that meet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AsWitness {
    pub horizontal: Point,
    pub vertical: Point,
    pub at: Point,
}

#[derive(Clone, Debug)]
pub struct ExtendedTMesh {
    pub base: TMesh,
    pub extensions: Vec<Extension>,
    pub ext_mesh: TMesh,
    pub classes: BTreeMap<Point, VertexClass>,
}

impl ExtendedTMesh {
    pub fn class_of(&self, p: Point) -> Option<VertexClass> {
        self.classes.get(&p).copied()
    }

    pub fn count(&self, class: VertexClass) -> usize {
        self.classes.values().filter(|&&c| c == class).count()
    }

    pub fn n_active(&self) -> usize {
        self.count(VertexClass::Active)
    }

    pub fn n_crossing(&self) -> usize {
        self.count(VertexClass::Crossing)
    }

    pub fn n_overlap(&self) -> usize {
        self.count(VertexClass::Overlap)
    }

    pub fn n_extended(&self) -> usize {
        self.count(VertexClass::Extended)
    }

    pub fn n_ext(&self) -> usize {
        self.classes.len()
    }
}

/// One extension per T-junction, in T-junction order.
pub fn tjunction_extensions(mesh: &TMesh) -> Result<Vec<Extension>, ExtendError> {
    mesh.t_junctions().into_iter().map(|(p, s)| extension_of(mesh, p, s)).collect()
}

fn extension_of(mesh: &TMesh, p: Point, symbol: Symbol) -> Result<Extension, ExtendError> {
    let axis = symbol.extension_axis().expect("T-junction symbol");
    let (line, k) = match axis {
        Axis::Horizontal => (p.j, p.i),
        Axis::Vertical => (p.i, p.j),
    };
    let trace = mesh.trace_indices(p, axis)?;
    let pos = trace.iter().position(|&t| t == k).expect("vertex lies on its own trace");
    let at = |d: isize| -> Result<i32, ExtendError> {
        let q = pos as isize + d;
        if q < 0 || q as usize >= trace.len() {
            return Err(ExtendError::InsufficientTrace(p));
        }
        Ok(trace[q as usize])
    };
    // The face extension goes two bays into the side with the missing edge.
    let (face, edge) = match symbol {
        Symbol::MissingLeft | Symbol::MissingDown => (Span::new(line, at(-2)?, k), Span::new(line, k, at(1)?)),
        _ => (Span::new(line, k, at(2)?), Span::new(line, at(-1)?, k)),
    };
    Ok(Extension { owner: p, symbol, axis, face, edge })
}

pub fn extend(mesh: &TMesh) -> Result<ExtendedTMesh, ExtendError> {
    extend_with(mesh, ExtendOptions::default())
}

pub fn extend_with(mesh: &TMesh, options: ExtendOptions) -> Result<ExtendedTMesh, ExtendError> {
    let extensions = tjunction_extensions(mesh)?;
    let mut ext_mesh = mesh.clone();
    for e in &extensions {
        ext_mesh.add_span(e.axis, e.full());
    }
    ext_mesh.validate()?;

    let domain = mesh.domain();
    let mut classes = BTreeMap::new();
    for p in ext_mesh.vertices() {
        let class = if domain.in_active_region(p) && mesh.is_vertex(p) {
            VertexClass::Active
        } else if face_hits(&extensions, Axis::Horizontal, p, false) > 0
            && face_hits(&extensions, Axis::Vertical, p, false) > 0
        {
            VertexClass::Crossing
        } else if (face_hits(&extensions, Axis::Horizontal, p, options.edge_extensions_overlap) >= 2
            && mesh.on_v_skeleton(p))
            || (face_hits(&extensions, Axis::Vertical, p, options.edge_extensions_overlap) >= 2
                && mesh.on_h_skeleton(p))
        {
            VertexClass::Overlap
        } else {
            VertexClass::Extended
        };
        classes.insert(p, class);
    }
    Ok(ExtendedTMesh { base: mesh.clone(), extensions, ext_mesh, classes })
}

fn face_hits(extensions: &[Extension], axis: Axis, p: Point, with_edges: bool) -> usize {
    extensions
        .iter()
        .filter(|e| e.axis == axis && if with_edges { e.contains(p) } else { e.face_contains(p) })
        .count()
}

/// Checks that no horizontal extension meets a vertical one.
///
/// Returns the first meeting pair as a witness when the test fails.
pub fn is_analysis_suitable(mesh: &TMesh) -> Result<(bool, Option<AsWitness>), ExtendError> {
    let ext = tjunction_extensions(mesh)?;
    Ok(match as_witness(&ext) {
        Some(w) => (false, Some(w)),
        None => (true, None),
    })
}

pub(crate) fn as_witness(extensions: &[Extension]) -> Option<AsWitness> {
    for h in extensions.iter().filter(|e| e.axis == Axis::Horizontal) {
        let hs = h.full();
        for v in extensions.iter().filter(|e| e.axis == Axis::Vertical) {
            let vs = v.full();
            if hs.contains(vs.line) && vs.contains(hs.line) {
                return Some(AsWitness { horizontal: h.owner, vertical: v.owner, at: Point::new(vs.line, hs.line) });
            }
        }
    }
    None
}

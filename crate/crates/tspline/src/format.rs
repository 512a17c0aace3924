//! The YAML mesh file format.
//!
//! ```yaml
//! index_domain: [0, 10, 0, 9]
//! h_lines: [[0, 0, 10], [1, 0, 10]]
//! v_lines: [[5, 4, 9]]
//! knots_xi: [0, 1, "3/2", 2]
//! knots_eta: [0, 1, 2]
//! ```
//!
//! Line entries are `[line, lo, hi]`. The domain boundary is always added.
//! Knots are integers or `"p/q"` strings and are parsed exactly; when both
//! knot lists are omitted the knots equal the indices.

use std::fmt::{self, Write as _};
use std::path::Path;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::Deserialize;
use thiserror::Error;
use tspline_core::field::{format_rational, parse_rational};
use tspline_core::{build_tmesh, Axis, GlobalKnots, IndexDomain, MeshError, Rational, SplineError, Span, TMesh};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed mesh file at line {line}, column {column}: {message}")]
    Malformed { line: usize, column: usize, message: String },
    #[error("malformed mesh file: {0}")]
    MalformedNoLocation(String),
    #[error("{field}[{index}]: {source}")]
    Entry { field: &'static str, index: usize, source: MeshError },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Knots(#[from] SplineError),
}

impl From<serde_yaml::Error> for FormatError {
    fn from(e: serde_yaml::Error) -> Self {
        match e.location() {
            Some(loc) => FormatError::Malformed { line: loc.line(), column: loc.column(), message: strip_location(&e) },
            None => FormatError::MalformedNoLocation(e.to_string()),
        }
    }
}

fn strip_location(e: &serde_yaml::Error) -> String {
    let text = e.to_string();
    match text.find(" at line ") {
        Some(k) => text[..k].to_string(),
        None => text,
    }
}

/// A knot value parsed without passing through floating point.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Knot(Rational);

impl<'de> Deserialize<'de> for Knot {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Knot;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer or a rational string \"p/q\"")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Knot, E> {
                Ok(Knot(tspline_core::field::int(v)))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Knot, E> {
                i64::try_from(v).map_err(|_| E::custom("integer knot out of range")).and_then(|v| self.visit_i64(v))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Knot, E> {
                Err(E::custom(format!("knot {v} is a decimal; write it as an exact \"p/q\" string")))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Knot, E> {
                parse_rational(v).map(Knot).ok_or_else(|| E::custom(format!("\"{v}\" is not a rational number")))
            }
        }
        d.deserialize_any(V)
    }
}

/// A `[line, lo, hi]` entry; checks its own shape.
#[derive(Clone, Copy, Debug)]
struct LineEntry(Span);

impl<'de> Deserialize<'de> for LineEntry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = LineEntry;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a line entry [line, lo, hi]")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<LineEntry, A::Error> {
                let mut next = |what: &str| -> Result<i32, A::Error> {
                    seq.next_element::<i32>()?.ok_or_else(|| de::Error::custom(format!("line entry is missing `{what}`")))
                };
                let (line, lo, hi) = (next("line")?, next("lo")?, next("hi")?);
                if seq.next_element::<de::IgnoredAny>()?.is_some() {
                    return Err(de::Error::custom("line entry has more than three numbers"));
                }
                if lo >= hi {
                    return Err(de::Error::custom(format!("line entry [{line}, {lo}, {hi}] needs lo < hi")));
                }
                Ok(LineEntry(Span::new(line, lo, hi)))
            }
        }
        d.deserialize_seq(V)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    index_domain: [i32; 4],
    #[serde(default)]
    h_lines: Vec<LineEntry>,
    #[serde(default)]
    v_lines: Vec<LineEntry>,
    knots_xi: Option<Vec<Knot>>,
    knots_eta: Option<Vec<Knot>>,
}

/// A mesh together with its global knot vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshFile {
    pub mesh: TMesh,
    pub knots: GlobalKnots,
}

pub fn parse_mesh(text: &str) -> Result<MeshFile, FormatError> {
    let raw: RawMesh = serde_yaml::from_str(text)?;
    let [m_lo, m_hi, n_lo, n_hi] = raw.index_domain;
    let domain = IndexDomain::new(m_lo, m_hi, n_lo, n_hi)?;
    let h: Vec<Span> = raw.h_lines.iter().map(|e| e.0).collect();
    let v: Vec<Span> = raw.v_lines.iter().map(|e| e.0).collect();
    for (field, axis, spans) in [("h_lines", Axis::Horizontal, &h), ("v_lines", Axis::Vertical, &v)] {
        for (index, s) in spans.iter().enumerate() {
            // Each entry alone must fit the domain.
            let mut probe_h = Vec::new();
            let mut probe_v = Vec::new();
            match axis {
                Axis::Horizontal => probe_h.push(*s),
                Axis::Vertical => probe_v.push(*s),
            }
            if let Err(source @ MeshError::SpanOutOfDomain { .. }) = build_tmesh(domain, &probe_h, &probe_v) {
                return Err(FormatError::Entry { field, index, source });
            }
        }
    }
    let mesh = build_tmesh(domain, &h, &v)?;
    let knots = match (raw.knots_xi, raw.knots_eta) {
        (None, None) => GlobalKnots::uniform(domain),
        (Some(xi), Some(eta)) => {
            GlobalKnots::new(domain, xi.into_iter().map(|k| k.0).collect(), eta.into_iter().map(|k| k.0).collect())?
        }
        _ => return Err(FormatError::MalformedNoLocation("give both knots_xi and knots_eta, or neither".into())),
    };
    Ok(MeshFile { mesh, knots })
}

pub fn read_mesh(path: &Path) -> Result<MeshFile, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.display().to_string(), source })?;
    parse_mesh(&text)
}

fn knot_list(k: &[Rational]) -> String {
    let items: Vec<String> = k
        .iter()
        .map(|q| {
            let s = format_rational(q);
            if s.contains('/') {
                format!("\"{s}\"")
            } else {
                s
            }
        })
        .collect();
    format!("[{}]", items.join(", "))
}

/// Writes a mesh file. Every maximal line is listed, boundary included.
/// `comments` are emitted as leading `#` lines.
pub fn write_mesh(mesh: &TMesh, knots: &GlobalKnots, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        for line in c.lines() {
            let _ = writeln!(out, "# {line}");
        }
    }
    let d = mesh.domain();
    let _ = writeln!(out, "index_domain: [{}, {}, {}, {}]", d.m_lo, d.m_hi, d.n_lo, d.n_hi);
    for (name, axis) in [("h_lines", Axis::Horizontal), ("v_lines", Axis::Vertical)] {
        let _ = writeln!(out, "{name}:");
        for s in mesh.lines(axis) {
            let _ = writeln!(out, "  - [{}, {}, {}]", s.line, s.lo, s.hi);
        }
    }
    let _ = writeln!(out, "knots_xi: {}", knot_list(knots.xi_all()));
    let _ = writeln!(out, "knots_eta: {}", knot_list(knots.eta_all()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use tspline_core::field::ratio;

    const SINGLE: &str = "index_domain: [0, 10, 0, 9]
h_lines: [[1, 0, 10], [2, 0, 10], [3, 0, 10], [4, 0, 10], [5, 0, 10], [6, 0, 10], [7, 0, 10], [8, 0, 10]]
v_lines: [[1, 0, 9], [2, 0, 9], [3, 0, 9], [4, 0, 9], [5, 4, 9], [6, 0, 9], [7, 0, 9], [8, 0, 9], [9, 0, 9]]
";

    #[test]
    fn parses_and_round_trips() {
        let f = parse_mesh(SINGLE).unwrap();
        assert_eq!(f.mesh.t_junctions().len(), 1);
        assert_eq!(f.knots, GlobalKnots::uniform(f.mesh.domain()));
        let text = write_mesh(&f.mesh, &f.knots, &["from a test".into()]);
        assert!(text.starts_with("# from a test\n"));
        assert_eq!(parse_mesh(&text).unwrap(), f);
    }

    #[test]
    fn rational_knots_are_exact() {
        let text = "index_domain: [0, 7, 0, 7]\nknots_xi: [0, \"1/3\", \"2/3\", 1, 2, 3, 4, 5]\nknots_eta: [0, 1, 2, 3, 4, 5, 6, 7]\n";
        let f = parse_mesh(text).unwrap();
        assert_eq!(f.knots.xi(1), &ratio(1, 3));
        let back = parse_mesh(&write_mesh(&f.mesh, &f.knots, &[])).unwrap();
        assert_eq!(back.knots, f.knots);
    }

    #[test]
    fn errors_carry_locations() {
        let bad = "index_domain: [0, 10, 0, 9]\nh_lines:\n  - [1, 0, 10]\n  - [2, 5, 3]\n";
        match parse_mesh(bad) {
            Err(FormatError::Malformed { line, message, .. }) => {
                assert_eq!(line, 4);
                assert!(message.contains("lo < hi"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let decimal = "index_domain: [0, 7, 0, 7]\nknots_xi: [0, 0.5, 1, 2, 3, 4, 5, 6]\nknots_eta: [0, 1, 2, 3, 4, 5, 6, 7]\n";
        assert!(matches!(parse_mesh(decimal), Err(FormatError::Malformed { line: 2, .. })));
        let unknown = "index_domain: [0, 7, 0, 7]\nlines: []\n";
        assert!(matches!(parse_mesh(unknown), Err(FormatError::Malformed { line: 2, .. })));
        let outside = "index_domain: [0, 7, 0, 7]\nv_lines: [[3, 0, 9]]\n";
        assert!(matches!(parse_mesh(outside), Err(FormatError::Entry { field: "v_lines", index: 0, .. })));
        let dangling = "index_domain: [0, 7, 0, 7]\nv_lines: [[3, 0, 4]]\n";
        assert!(matches!(parse_mesh(dangling), Err(FormatError::Mesh(MeshError::DanglingEdge(_)))));
    }
}

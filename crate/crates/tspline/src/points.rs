//! Control-point files: one row `A_i A_j x y z ...` per anchor, `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;
use tspline_core::Point;

use crate::text::fmt_f64;

#[derive(Debug, Error, PartialEq)]
pub enum PointsError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("anchor {0} appears twice")]
    Duplicate(Point),
    #[error("anchor {0} has no control point")]
    Missing(Point),
    #[error("anchor {0} is not an anchor of the mesh")]
    Unknown(Point),
}

pub fn parse_points(text: &str) -> Result<BTreeMap<Point, Vec<f64>>, PointsError> {
    let mut out = BTreeMap::new();
    let mut dim = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        let bad = |message: String| PointsError::Malformed { line, message };
        if fields.len() < 3 {
            return Err(bad(format!("expected `A_i A_j x ...`, found {} fields", fields.len())));
        }
        let i = fields[0].parse::<i32>().map_err(|e| bad(format!("anchor column: {e}")))?;
        let j = fields[1].parse::<i32>().map_err(|e| bad(format!("anchor row: {e}")))?;
        let coords = fields[2..]
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| bad(format!("coordinate `{f}`: {e}"))))
            .collect::<Result<Vec<f64>, _>>()?;
        match dim {
            None => dim = Some(coords.len()),
            Some(d) if d != coords.len() => return Err(bad(format!("expected {d} coordinates, found {}", coords.len()))),
            _ => {}
        }
        let p = Point::new(i, j);
        if out.insert(p, coords).is_some() {
            return Err(PointsError::Duplicate(p));
        }
    }
    Ok(out)
}

/// Control points ordered like `anchors`.
pub fn order_points(points: &BTreeMap<Point, Vec<f64>>, anchors: &[Point]) -> Result<Vec<Vec<f64>>, PointsError> {
    if let Some(p) = points.keys().find(|p| !anchors.contains(p)) {
        return Err(PointsError::Unknown(*p));
    }
    anchors.iter().map(|a| points.get(a).cloned().ok_or(PointsError::Missing(*a))).collect()
}

pub fn write_points(anchors: &[Point], points: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for (a, p) in anchors.iter().zip(points) {
        let _ = write!(out, "{} {}", a.i, a.j);
        for c in p {
            let _ = write!(out, " {}", fmt_f64(*c));
        }
        out.push('\n');
    }
    out
}

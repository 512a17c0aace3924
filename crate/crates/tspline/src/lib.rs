//! File formats, SVG output, random mesh generation and the command-line
//! front end for `tspline-core`.

pub mod cli;
pub mod format;
pub mod fuzz;
pub mod points;
pub mod random;
pub mod svg;
pub mod text;

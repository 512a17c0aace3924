//! The `tspline` command-line tool.
//!
//! Exit status is 0 on success, 1 when a validation fails (the report is
//! still printed) and 2 on I/O, format or usage errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use tspline_core::dual::{l2_error, Monomial, SinCos};
use tspline_core::field::{format_rational, int, parse_rational, rational_to_f64};
use tspline_core::{
    check_index_commutation, convergence_experiment, dimension_report, dimension_report_perturbed, extend,
    is_analysis_suitable, perturb, project, refine_geometry, refinement_matrix, Axis, Bivariate, Coefficients,
    DimensionError, DimensionReport, ExtendedTMesh, NestingCertificate, Point, Rational, SplineSpace, Verdict,
};

use crate::format::{read_mesh, write_mesh, MeshFile};
use crate::fuzz::{fuzz, FuzzConfig};
use crate::points::{order_points, parse_points, write_points};
use crate::svg::{render, PlotOptions};
use crate::text::fmt_f64;

#[derive(Debug, Parser)]
#[command(name = "tspline", version, about = "Bicubic T-spline meshes: suitability, dimension, projection and refinement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct MeshArg {
    /// Mesh file (YAML).
    mesh: PathBuf,
}

#[derive(Debug, Args)]
struct SvgArg {
    /// Also write an SVG drawing of the extended mesh.
    #[arg(long, value_name = "FILE")]
    svg: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a mesh file and check admissibility.
    Check(MeshArg),
    /// Test analysis suitability; prints a witness pair when it fails.
    AsCheck {
        #[command(flatten)]
        mesh: MeshArg,
        #[command(flatten)]
        svg: SvgArg,
    },
    /// Compute T-junction extensions and classify the extended vertices.
    Extend {
        #[command(flatten)]
        mesh: MeshArg,
        #[command(flatten)]
        svg: SvgArg,
    },
    /// Dimension report: vertex count against exact nullity.
    Dim {
        #[command(flatten)]
        mesh: MeshArg,
        /// Print only the summary line.
        #[arg(long)]
        summary: bool,
        /// Perturbation size used when knots repeat.
        #[arg(long, default_value = "1/1024")]
        delta: String,
    },
    /// Evaluate blending functions at the points of a file (`x y` per row).
    Eval {
        #[command(flatten)]
        mesh: MeshArg,
        /// Anchor `i,j`.
        #[arg(long, conflicts_with = "all", required_unless_present = "all")]
        anchor: Option<String>,
        /// Evaluate every blending function.
        #[arg(long)]
        all: bool,
        /// Point file.
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = 0)]
        dx: usize,
        #[arg(long, default_value_t = 0)]
        dy: usize,
    },
    /// Project a test function (`one`, `monomial A B`, `sin-cos`) with the dual functionals.
    Project {
        #[command(flatten)]
        mesh: MeshArg,
        #[arg(required = true, num_args = 1..=3)]
        function: Vec<String>,
    },
    /// Write the perturbed mesh, with provenance as comments.
    Perturb {
        #[command(flatten)]
        mesh: MeshArg,
        #[arg(long, default_value = "1/1024")]
        delta: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Deviation of perturbed blending functions from the original ones.
    Converge {
        #[command(flatten)]
        mesh: MeshArg,
        /// Comma-separated decreasing deltas.
        #[arg(long, default_value = "1/10,1/100,1/1000,1/10000,1/100000")]
        deltas: String,
        /// Sample grid size per direction.
        #[arg(long, default_value_t = 40)]
        samples: usize,
    },
    /// Certify that the spline space of COARSE is contained in that of FINE.
    Nest { coarse: PathBuf, fine: PathBuf },
    /// Refine a control net from COARSE to FINE.
    Refine {
        coarse: PathBuf,
        fine: PathBuf,
        /// Control points of COARSE (`A_i A_j x y z` per row).
        #[arg(long)]
        points: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Draw the mesh as SVG.
    Plot {
        #[command(flatten)]
        mesh: MeshArg,
        /// Draw extensions and classify extended vertices.
        #[arg(long)]
        extended: bool,
        /// Grayscale raster of the blending function of anchor `i,j`.
        #[arg(long)]
        raster: Option<String>,
        #[arg(long, default_value_t = 64)]
        cells: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Randomized property checks on generated analysis-suitable meshes.
    Fuzz {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
        count: u64,
        #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(i32).range(9..))]
        max_side: i32,
        /// Relabel one extended vertex per mesh, to check that failures are caught.
        #[arg(long)]
        inject_fault: bool,
    },
}

#[derive(Debug)]
enum CliError {
    /// Bad input: exit 2.
    Input(String),
    /// A computation refused the input: exit 1.
    Invalid(String),
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<std::fmt::Error> for CliError {
    fn from(e: std::fmt::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(e.to_string())
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

/// Whether every validation passed.
type Outcome = Result<bool, CliError>;

/// Runs the tool on `args` (program name first).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = write!(out, "{}", e.render());
            return 0;
        }
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return 2;
        }
    };
    match dispatch(cli.command, out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(CliError::Invalid(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
        Err(CliError::Input(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Outcome {
    match command {
        Command::Check(m) => check(&m.mesh, out),
        Command::AsCheck { mesh, svg } => as_check(&mesh.mesh, svg.svg.as_deref(), out),
        Command::Extend { mesh, svg } => extend_cmd(&mesh.mesh, svg.svg.as_deref(), out),
        Command::Dim { mesh, summary, delta } => dim(&mesh.mesh, summary, &delta, out),
        Command::Eval { mesh, anchor, all: _, points, dx, dy } => eval(&mesh.mesh, anchor.as_deref(), &points, dx, dy, out),
        Command::Project { mesh, function } => project_cmd(&mesh.mesh, &function, out),
        Command::Perturb { mesh, delta, output } => perturb_cmd(&mesh.mesh, &delta, output.as_deref(), out),
        Command::Converge { mesh, deltas, samples } => converge(&mesh.mesh, &deltas, samples, out),
        Command::Nest { coarse, fine } => nest(&coarse, &fine, out),
        Command::Refine { coarse, fine, points, output } => refine(&coarse, &fine, &points, output.as_deref(), out),
        Command::Plot { mesh, extended, raster, cells, output } => {
            plot(&mesh.mesh, extended, raster.as_deref(), cells, output.as_deref(), out)
        }
        Command::Fuzz { seed, count, max_side, inject_fault } => {
            fuzz_cmd(FuzzConfig { seed, count: count as usize, max_side, inject_fault }, out)
        }
    }
}

fn load(path: &Path) -> Result<MeshFile, CliError> {
    read_mesh(path).map_err(input)
}

fn space_of(f: &MeshFile) -> Result<SplineSpace, CliError> {
    if !f.mesh.is_admissible() {
        return Err(CliError::Invalid("mesh is not admissible".into()));
    }
    SplineSpace::new(f.mesh.clone(), f.knots.clone()).map_err(invalid)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match output {
        Some(p) => write_file(p, text),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

/// Exact rational from `p/q`, an integer, or a decimal such as `0.001` or `1e-5`.
pub fn parse_exact(text: &str) -> Option<Rational> {
    if let Some(q) = parse_rational(text) {
        return Some(q);
    }
    let t = text.trim();
    let (mantissa, exp) = match t.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (whole, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if frac.chars().any(|c| !c.is_ascii_digit()) {
        return None;
    }
    let digits = parse_rational(&format!("{whole}{frac}")).or_else(|| (whole == "-").then(|| int(0)))?;
    let negative = whole.starts_with('-');
    let scale = exp - frac.len() as i32;
    let ten = int(10);
    let mut q = digits;
    for _ in 0..scale.unsigned_abs() {
        q = if scale > 0 { q * ten.clone() } else { q / ten.clone() };
    }
    Some(if negative && q > int(0) { -q } else { q })
}

fn parse_anchor(text: &str) -> Result<Point, CliError> {
    let bad = || CliError::Input(format!("anchor `{text}`: expected `i,j`"));
    let (i, j) = text.split_once(',').ok_or_else(bad)?;
    Ok(Point::new(i.trim().parse().map_err(|_| bad())?, j.trim().parse().map_err(|_| bad())?))
}

fn parse_delta(text: &str) -> Result<Rational, CliError> {
    match parse_exact(text) {
        Some(d) if d > int(0) => Ok(d),
        _ => Err(CliError::Input(format!("delta `{text}` must be a positive number"))),
    }
}

fn row(out: &mut String, label: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{label:<24}{value}");
}

fn check(path: &Path, out: &mut dyn Write) -> Outcome {
    let f = load(path)?;
    let d = f.mesh.domain();
    let rep = f.mesh.validate_admissible();
    let mut s = String::new();
    row(&mut s, "index domain", format!("[{}, {}] x [{}, {}]", d.m_lo, d.m_hi, d.n_lo, d.n_hi));
    row(&mut s, "vertices", f.mesh.vertex_count());
    row(&mut s, "anchors", f.mesh.anchors().len());
    row(&mut s, "t-junctions", f.mesh.t_junctions().len());
    row(&mut s, "elements", f.mesh.faces().len());
    row(&mut s, "repeated knots", f.knots.has_zero_span());
    for (axis, k) in rep.missing_frame_lines.iter().chain(&rep.missing_active_lines) {
        row(&mut s, "missing full line", format!("{} {k}", axis_name(*axis)));
    }
    for (a, b) in &rep.element_violations {
        row(&mut s, "element violation", format!("{a} to {b}"));
    }
    row(&mut s, "admissible", rep.is_admissible());
    out.write_all(s.as_bytes())?;
    Ok(rep.is_admissible())
}

fn axis_name(axis: Axis) -> &'static str {
    match axis {
        Axis::Horizontal => "row",
        Axis::Vertical => "column",
    }
}

fn classification(ext: &ExtendedTMesh, s: &mut String) {
    row(s, "active (n^a)", ext.n_active());
    row(s, "crossing (n^+)", ext.n_crossing());
    row(s, "overlap (n^-)", ext.n_overlap());
    row(s, "extended (n^*)", ext.n_extended());
    row(s, "extended mesh (n^ext)", ext.n_ext());
}

fn write_svg(f: &MeshFile, path: Option<&Path>) -> Result<(), CliError> {
    if let Some(p) = path {
        let space = space_of(f)?;
        write_file(p, &render(&space, PlotOptions { extended: true, raster: None }))?;
    }
    Ok(())
}

fn as_check(path: &Path, svg: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let f = load(path)?;
    let ext = extend(&f.mesh).map_err(invalid)?;
    let (ok, witness) = is_analysis_suitable(&f.mesh).map_err(invalid)?;
    let mut s = String::new();
    classification(&ext, &mut s);
    row(&mut s, "analysis-suitable", ok);
    if let Some(w) = witness {
        row(&mut s, "witness", format!("horizontal {} vertical {} meet at {}", w.horizontal, w.vertical, w.at));
    }
    out.write_all(s.as_bytes())?;
    write_svg(&f, svg)?;
    Ok(ok)
}

fn extend_cmd(path: &Path, svg: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let f = load(path)?;
    let ext = extend(&f.mesh).map_err(invalid)?;
    let mut s = String::new();
    classification(&ext, &mut s);
    for x in &ext.extensions {
        let (face, edge) = (x.face, x.edge);
        let _ = writeln!(
            s,
            "extension {} at {}: face {} {} [{}, {}] edge [{}, {}]",
            x.symbol.as_char(),
            x.owner,
            axis_name(x.axis),
            face.line,
            face.lo,
            face.hi,
            edge.lo,
            edge.hi
        );
    }
    out.write_all(s.as_bytes())?;
    write_svg(&f, svg)?;
    Ok(true)
}

fn dimension(f: &MeshFile, delta: &str) -> Result<(DimensionReport, Option<Rational>), CliError> {
    match dimension_report(&f.mesh, &f.knots) {
        Ok(r) => Ok((r, None)),
        Err(DimensionError::KnotMultiplicityPresent { .. }) => {
            let d = parse_delta(delta)?;
            let r = dimension_report_perturbed(&f.mesh, &f.knots, &d, &Coefficients::default()).map_err(invalid)?;
            Ok((r, Some(d)))
        }
        Err(e) => Err(invalid(e)),
    }
}

fn dim(path: &Path, summary: bool, delta: &str, out: &mut dyn Write) -> Outcome {
    let f = load(path)?;
    if !f.mesh.is_admissible() {
        return Err(CliError::Invalid("mesh is not admissible".into()));
    }
    let (r, perturbed) = dimension(&f, delta)?;
    let mut s = String::new();
    if !summary {
        if let Some(d) = &perturbed {
            row(&mut s, "nullity taken at delta", format_rational(d));
        }
        row(&mut s, "active (n^a)", r.n_active);
        row(&mut s, "crossing (n^+)", r.n_crossing);
        row(&mut s, "overlap (n^-)", r.n_overlap);
        row(&mut s, "extended (n^*)", r.n_extended);
        row(&mut s, "columns (n^ext)", r.n_ext);
        row(&mut s, "segments", r.n_segments);
        row(&mut s, "reduced columns", r.reduced_n_ext);
        row(&mut s, "reduced segments", r.reduced_n_segments);
        row(&mut s, "formula", r.formula);
        row(&mut s, "nullity", r.nullity);
        row(&mut s, "reduced nullity", r.reduced_nullity);
        row(&mut s, "analysis-suitable", r.analysis_suitable);
        row(&mut s, "diagonalizable", r.diagonalizable);
        row(&mut s, "certified", r.certified);
    }
    let _ = writeln!(s, "{}", r.summary_line());
    out.write_all(s.as_bytes())?;
    Ok(r.agree && r.nullity == r.reduced_nullity)
}

fn read_xy(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut pts = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let bad = || CliError::Input(format!("{}: line {}: expected `x y`", path.display(), k + 1));
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(bad());
        }
        let num = |t: &str| parse_exact(t).map(|q| rational_to_f64(&q)).or_else(|| t.parse::<f64>().ok());
        pts.push((num(fields[0]).ok_or_else(bad)?, num(fields[1]).ok_or_else(bad)?));
    }
    Ok(pts)
}

fn eval(path: &Path, anchor: Option<&str>, points: &Path, dx: usize, dy: usize, out: &mut dyn Write) -> Outcome {
    let f = load(path)?;
    let space = space_of(&f)?;
    let indices: Vec<usize> = match anchor {
        Some(a) => {
            let p = parse_anchor(a)?;
            vec![space.index_of(p).ok_or_else(|| CliError::Invalid(format!("{p} is not an anchor")))?]
        }
        None => (0..space.len()).collect(),
    };
    let pts = read_xy(points)?;
    let mut s = String::from("x\ty");
    for &k in &indices {
        let a = space.functions[k].anchor;
        let _ = write!(s, "\tN[{},{}]", a.i, a.j);
    }
    s.push('\n');
    for (x, y) in pts {
        let _ = write!(s, "{}\t{}", fmt_f64(x), fmt_f64(y));
        for &k in &indices {
            let _ = write!(s, "\t{}", fmt_f64(space.eval_raw(k, x, y, dx, dy)));
        }
        s.push('\n');
    }
    out.write_all(s.as_bytes())?;
    Ok(true)
}

fn test_function(words: &[String]) -> Result<Box<dyn Bivariate<f64>>, CliError> {
    let names: Vec<&str> = words.iter().map(String::as_str).collect();
    match names.as_slice() {
        ["one"] => Ok(Box::new(Monomial { a: 0, b: 0 })),
        ["sin-cos"] => Ok(Box::new(SinCos)),
        ["monomial", a, b] => {
            let e = |t: &str| t.parse::<u32>().map_err(|_| CliError::Input(format!("exponent `{t}`")));
            Ok(Box::new(Monomial { a: e(a)?, b: e(b)? }))
        }
        _ => Err(CliError::Input(format!("unknown test function `{}`", words.join(" ")))),
    }
}

fn project_cmd(path: &Path, words: &[String], out: &mut dyn Write) -> Outcome {
    let f = load(path)?;
    let func = test_function(words)?;
    let space = space_of(&f)?;
    let p = project(&space, &*func).map_err(invalid)?;
    let mut s = String::from("i\tj\tcoefficient\n");
    for (fa, c) in space.functions.iter().zip(&p.coeffs) {
        let _ = writeln!(s, "{}\t{}\t{}", fa.anchor.i, fa.anchor.j, fmt_f64(*c));
    }
    let r = space.reduced_domain();
    let n = 50;
    let mut max_err: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            let x = r.x0 + (r.x1 - r.x0) * (a as f64 + 0.5) / n as f64;
            let y = r.y0 + (r.y1 - r.y0) * (b as f64 + 0.5) / n as f64;
            let v = func.value(&x, &y).ok_or_else(|| CliError::Invalid(format!("function undefined at ({x}, {y})")))?;
            max_err = max_err.max((v - p.eval(&space, x, y)).abs());
        }
    }
    let l2 = l2_error(&space, &p, &*func).map_err(invalid)?;
    let _ = writeln!(s, "max_error\t{}", fmt_f64(max_err));
    let _ = writeln!(s, "l2_error\t{}", fmt_f64(l2));
    out.write_all(s.as_bytes())?;
    Ok(true)
}

fn perturb_cmd(path: &Path, delta: &str, output: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let f = load(path)?;
    let d = parse_delta(delta)?;
    let (pk, pm) = perturb(&f.mesh, &f.knots, &d, &Coefficients::default()).map_err(invalid)?;
    let mut comments = vec![
        format!("perturbation of {} with delta = {}", path.display(), format_rational(&d)),
        "provenance: perturbed vertex <- original vertex".to_string(),
    ];
    for (p, q) in &pm.provenance {
        comments.push(format!("{p} <- {q}"));
    }
    emit(output, &write_mesh(&pm.mesh, &pk.knots, &comments), out)?;
    Ok(true)
}

fn converge(path: &Path, deltas: &str, samples: usize, out: &mut dyn Write) -> Outcome {
    let f = load(path)?;
    let ds = deltas.split(',').map(parse_delta).collect::<Result<Vec<_>, _>>()?;
    let coeffs = Coefficients::default();
    let table = convergence_experiment(&f.mesh, &f.knots, &ds, &coeffs, samples).map_err(invalid)?;
    let last = ds.last().expect("at least one delta");
    let (pk, pm) = perturb(&f.mesh, &f.knots, last, &coeffs).map_err(invalid)?;
    let broken = check_index_commutation(&f.mesh, &pk, &pm).map_err(invalid)?;
    let mut s = String::from("anchor");
    for d in &table.deltas {
        let _ = write!(s, "\tdelta={}", format_rational(d));
    }
    s.push('\n');
    for (a, r) in table.anchors.iter().zip(&table.rows) {
        let _ = write!(s, "{},{}", a.i, a.j);
        for v in r {
            let _ = write!(s, "\t{}", fmt_f64(*v));
        }
        s.push('\n');
    }
    s.push_str("max");
    for v in table.column_max() {
        let _ = write!(s, "\t{}", fmt_f64(v));
    }
    s.push('\n');
    let _ = writeln!(s, "monotone\t{}", table.is_monotone());
    let _ = writeln!(s, "final_max\t{}", fmt_f64(table.final_max()));
    match broken {
        None => s.push_str("index_commutation\texact\n"),
        Some(p) => {
            let _ = writeln!(s, "index_commutation\tfails at {p}");
        }
    }
    out.write_all(s.as_bytes())?;
    Ok(broken.is_none())
}

fn certificate(c: &NestingCertificate, s: &mut String) {
    let verdict = match c.verdict {
        Verdict::Nested => "nested",
        Verdict::NotNested => "not nested",
        Verdict::Inapplicable => "inapplicable",
    };
    row(s, "verdict", verdict);
    row(s, "checked at delta", c.deltas.iter().map(format_rational).collect::<Vec<_>>().join(" "));
    match c.witness {
        Some((axis, p)) => row(s, "missing edge", format!("{} edge at {p}", axis_name(axis))),
        None => row(s, "missing edge", "none"),
    }
}

fn certify(coarse: &MeshFile, fine: &MeshFile) -> Result<NestingCertificate, CliError> {
    tspline_core::certify_nested(&coarse.mesh, &coarse.knots, &fine.mesh, &fine.knots).map_err(invalid)
}

fn nest(coarse: &Path, fine: &Path, out: &mut dyn Write) -> Outcome {
    let (c, f) = (load(coarse)?, load(fine)?);
    let mut s = String::new();
    let cert = match certify(&c, &f) {
        Ok(cert) => cert,
        Err(CliError::Invalid(reason)) => {
            row(&mut s, "verdict", "inapplicable");
            row(&mut s, "reason", reason);
            out.write_all(s.as_bytes())?;
            return Ok(false);
        }
        Err(e) => return Err(e),
    };
    certificate(&cert, &mut s);
    out.write_all(s.as_bytes())?;
    Ok(cert.is_nested())
}

fn refine(coarse: &Path, fine: &Path, points: &Path, output: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let (c, f) = (load(coarse)?, load(fine)?);
    let text = std::fs::read_to_string(points).map_err(|e| CliError::Input(format!("{}: {e}", points.display())))?;
    let net = parse_points(&text).map_err(|e| CliError::Input(format!("{}: {e}", points.display())))?;
    let cert = certify(&c, &f)?;
    if !cert.is_nested() {
        let mut s = String::new();
        certificate(&cert, &mut s);
        out.write_all(s.as_bytes())?;
        return Ok(false);
    }
    let (cs, fs) = (space_of(&c)?, space_of(&f)?);
    let m = refinement_matrix::<f64>(&cs, &fs, &cert).map_err(invalid)?;
    let ordered = order_points(&net, &m.coarse).map_err(invalid)?;
    let refined = refine_geometry(&m, &ordered).map_err(invalid)?;
    emit(output, &write_points(&m.fine, &refined), out)?;
    Ok(true)
}

fn plot(
    path: &Path,
    extended: bool,
    raster: Option<&str>,
    cells: usize,
    output: Option<&Path>,
    out: &mut dyn Write,
) -> Outcome {
    let f = load(path)?;
    let space = space_of(&f)?;
    let raster = match raster {
        Some(a) => {
            let p = parse_anchor(a)?;
            Some((space.index_of(p).ok_or_else(|| CliError::Invalid(format!("{p} is not an anchor")))?, cells.max(1)))
        }
        None => None,
    };
    emit(output, &render(&space, PlotOptions { extended, raster }), out)?;
    Ok(true)
}

fn fuzz_cmd(cfg: FuzzConfig, out: &mut dyn Write) -> Outcome {
    let summary = fuzz(&cfg);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "seed {} count {} max-side {}{}",
        cfg.seed,
        cfg.count,
        cfg.max_side,
        if cfg.inject_fault { " with injected fault" } else { "" }
    );
    for o in &summary.outcomes {
        let _ = writeln!(
            s,
            "iteration {}\tvertices {}\tanchors {}\tnesting {}\t{}",
            o.iteration,
            o.vertices,
            o.anchors,
            if o.nesting_checked { "checked" } else { "skipped" },
            if o.failures.is_empty() { "ok" } else { "FAIL" }
        );
        for fl in &o.failures {
            let _ = writeln!(s, "  {} failed: {}", fl.property.name(), fl.detail);
            let _ = writeln!(s, "  minimized counterexample:");
            for line in write_mesh(&fl.minimized, &fl.knots, &[]).lines() {
                let _ = writeln!(s, "    {line}");
            }
        }
    }
    let _ = writeln!(s, "failures={} nesting_checked={}", summary.failure_count(), summary.nesting_checked());
    out.write_all(s.as_bytes())?;
    Ok(summary.failure_count() == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tspline_core::field::ratio;

    #[test]
    fn exact_numbers() {
        assert_eq!(parse_exact("1/1024"), Some(ratio(1, 1024)));
        assert_eq!(parse_exact("0.001"), Some(ratio(1, 1000)));
        assert_eq!(parse_exact("1e-5"), Some(ratio(1, 100000)));
        assert_eq!(parse_exact("-2.5"), Some(ratio(-5, 2)));
        assert_eq!(parse_exact("2.5e1"), Some(int(25)));
        assert_eq!(parse_exact("abc"), None);
        assert_eq!(parse_exact("1.x"), None);
    }

    #[test]
    fn anchors_parse() {
        assert_eq!(parse_anchor("3, 4").unwrap(), Point::new(3, 4));
        assert!(parse_anchor("3").is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["tspline", "frobnicate"], &mut out, &mut err), 2);
        assert!(String::from_utf8(err).unwrap().contains("frobnicate"));
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["tspline", "--help"], &mut out, &mut err), 0);
        assert!(String::from_utf8(out).unwrap().contains("as-check"));
    }
}

use std::path::PathBuf;
use std::process::Command;

use tspline::format::{parse_mesh, read_mesh};
use tspline::points::parse_points;
use tspline_core::{dimension_report, extend, SplineSpace};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

/// Runs the tool in-process; returns exit code, stdout and stderr.
fn run(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["tspline"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = tspline::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path(name: &str) -> String {
    data(name).display().to_string()
}

#[test]
fn dim_bezier_prints_summary() {
    let (code, out, _) = run(&["dim", &path("bezier.tmesh")]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().last().unwrap(), "formula=16 nullity=16 as=true diag=true agree=true");
    let (code, out, _) = run(&["dim", "--summary", &path("bezier.tmesh")]);
    assert_eq!(code, 0);
    assert_eq!(out, "formula=16 nullity=16 as=true diag=true agree=true\n");
}

#[test]
fn dim_known_meshes() {
    for (file, d) in [("clamped-tensor.tmesh", 36), ("single-tj.tmesh", 40), ("coarse.tmesh", 36)] {
        let (code, out, _) = run(&["dim", "--summary", &path(file)]);
        assert_eq!(code, 0, "{file}");
        assert_eq!(out.trim(), format!("formula={d} nullity={d} as=true diag=true agree=true"), "{file}");
    }
}

#[test]
fn as_check_crossing_fails_with_witness() {
    let (code, out, _) = run(&["as-check", &path("crossing.tmesh")]);
    assert_eq!(code, 1);
    assert!(out.contains("analysis-suitable       false"));
    let w = out.lines().find(|l| l.starts_with("witness")).expect("witness line");
    assert!(w.contains("horizontal (") && w.contains("vertical ("), "{w}");
    let (code, out, _) = run(&["as-check", &path("single-tj.tmesh")]);
    assert_eq!(code, 0);
    assert!(!out.contains("witness"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_tspline");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let o = status(&["as-check", &path("crossing.tmesh")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("witness"));
    assert_eq!(status(&["dim", &path("bezier.tmesh")]).status.code(), Some(0));
    assert_eq!(status(&["transmogrify"]).status.code(), Some(2));
    assert_eq!(status(&["dim", "/no/such/file.tmesh"]).status.code(), Some(2));
}

#[test]
fn malformed_files_report_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tmesh");
    std::fs::write(&bad, "index_domain: [0, 9, 0, 9]\nh_lines: [[3, 0, \"x\"]]\n").unwrap();
    let (code, _, err) = run(&["check", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("line 2, column"), "{err}");
    std::fs::write(&bad, "index_domain: [0, 9, 0, 9]\nv_lines: [[4, 0, 9], [12, 0, 9]]\n").unwrap();
    let (code, _, err) = run(&["check", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("v_lines[1]"), "{err}");
}

#[test]
fn check_reports_missing_lines() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("gap.tmesh");
    // Row 2 lies in the frame and must be full.
    std::fs::write(&f, "index_domain: [0, 9, 0, 9]\nh_lines: [[1, 0, 9], [3, 0, 9], [6, 0, 9], [7, 0, 9], [8, 0, 9]]\nv_lines: [[1, 0, 9], [2, 0, 9], [3, 0, 9], [6, 0, 9], [7, 0, 9], [8, 0, 9]]\n").unwrap();
    let (code, out, _) = run(&["check", f.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(out.contains("missing full line       row 2"), "{out}");
    assert!(out.contains("admissible              false"));
}

#[test]
fn plot_is_valid_svg_with_one_marker_per_vertex() {
    let dir = tempfile::tempdir().unwrap();
    for (file, extended) in [("single-tj.tmesh", true), ("single-tj.tmesh", false), ("crossing.tmesh", true)] {
        let out = dir.path().join("out.svg");
        let mut args = vec!["plot", &path(file)].into_iter().map(String::from).collect::<Vec<_>>();
        if extended {
            args.push("--extended".into());
        }
        args.extend(["-o".into(), out.display().to_string()]);
        let (code, _, err) = run(&args.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(code, 0, "{err}");
        let text = std::fs::read_to_string(&out).unwrap();
        let doc = roxmltree::Document::parse(&text).expect("well-formed XML");
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        let markers: Vec<_> = doc
            .descendants()
            .filter(|n| n.attribute("class").is_some_and(|c| c.starts_with("vertex ")))
            .collect();
        let mesh = read_mesh(&data(file)).unwrap().mesh;
        let ext = extend(&mesh).unwrap();
        let expected = if extended { ext.n_ext() } else { mesh.vertex_count() };
        assert_eq!(markers.len(), expected, "{file}");
        let mut seen = std::collections::BTreeSet::new();
        for m in &markers {
            assert!(seen.insert((m.attribute("data-i").unwrap(), m.attribute("data-j").unwrap())));
        }
        if file == "crossing.tmesh" {
            let stars = markers.iter().filter(|m| m.attribute("class") == Some("vertex crossing")).count();
            assert_eq!(stars, ext.n_crossing());
            assert!(markers.iter().any(|m| m.tag_name().name() == "polygon" && m.attribute("fill") == Some("red")));
        }
    }
}

#[test]
fn plot_raster() {
    let (code, svg, _) = run(&["plot", &path("single-tj.tmesh"), "--raster", "5,5", "--cells", "10"]);
    assert_eq!(code, 0);
    roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(svg.matches("fill=\"rgb(").count(), 100);
    let (code, _, err) = run(&["plot", &path("single-tj.tmesh"), "--raster", "0,0"]);
    assert_eq!(code, 1);
    assert!(err.contains("not an anchor"));
}

#[test]
fn outputs_are_deterministic() {
    for args in [
        vec!["fuzz", "--seed", "7", "--count", "6"],
        vec!["dim", "PATH"],
        vec!["project", "PATH", "sin-cos"],
        vec!["plot", "PATH", "--extended"],
    ] {
        let p = path("single-tj.tmesh");
        let args: Vec<&str> = args.iter().map(|a| if *a == "PATH" { p.as_str() } else { a }).collect();
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a, b, "{args:?}");
    }
}

#[test]
fn fuzz_acceptance_run_has_no_failures() {
    let (code, out, _) = run(&["fuzz", "--seed", "1", "--count", "50"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("failures=0"));
    assert_eq!(out.lines().filter(|l| l.starts_with("iteration ")).count(), 50);
    let numbers: Vec<usize> =
        out.lines().filter_map(|l| l.strip_prefix("iteration ")?.split('\t').next()?.parse().ok()).collect();
    assert_eq!(numbers, (0..50).collect::<Vec<_>>());
}

#[test]
fn fuzz_detects_injected_fault() {
    let (code, out, _) = run(&["fuzz", "--seed", "1", "--count", "3", "--inject-fault"]);
    assert_eq!(code, 1);
    assert!(out.contains("failures=3"), "{out}");
    assert_eq!(out.matches("dimension failed").count(), 3);
    assert!(out.contains("minimized counterexample"));
    let (code, _, _) = run(&["fuzz", "--count", "0"]);
    assert_eq!(code, 2);
}

#[test]
fn nest_and_refine() {
    let (code, out, _) = run(&["nest", &path("coarse.tmesh"), &path("single-tj.tmesh")]);
    assert_eq!(code, 0);
    assert!(out.starts_with("verdict                 nested"));
    let (code, out, _) = run(&["nest", &path("single-tj.tmesh"), &path("coarse.tmesh")]);
    assert_eq!(code, 1);
    assert!(out.contains("inapplicable"));

    let (code, out, err) =
        run(&["refine", &path("coarse.tmesh"), &path("single-tj.tmesh"), "--points", &path("coarse.points")]);
    assert_eq!(code, 0, "{err}");
    let fine = parse_points(&out).unwrap();
    let coarse = parse_points(&std::fs::read_to_string(data("coarse.points")).unwrap()).unwrap();
    assert_eq!(fine.len(), 40);
    // The surface is unchanged: compare both spline maps at sample points.
    let cf = read_mesh(&data("coarse.tmesh")).unwrap();
    let ff = read_mesh(&data("single-tj.tmesh")).unwrap();
    let cs = SplineSpace::new(cf.mesh, cf.knots).unwrap();
    let fs = SplineSpace::new(ff.mesh, ff.knots).unwrap();
    let surface = |s: &SplineSpace, net: &std::collections::BTreeMap<_, Vec<f64>>, x: f64, y: f64| -> Vec<f64> {
        let mut p = vec![0.0; 3];
        for (k, f) in s.functions.iter().enumerate() {
            let w = s.eval_raw(k, x, y, 0, 0);
            for (a, c) in p.iter_mut().zip(&net[&f.anchor]) {
                *a += w * c;
            }
        }
        p
    };
    for (x, y) in [(3.3, 3.7), (5.0, 4.5), (4.6, 2.2), (7.9, 6.9)] {
        let a = surface(&cs, &coarse, x, y);
        let b = surface(&fs, &fine, x, y);
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12, "{a:?} vs {b:?}");
        }
    }
}

#[test]
fn eval_and_project_tables() {
    let (code, out, _) = run(&["eval", &path("single-tj.tmesh"), "--anchor", "5,5", "--points", &path("samples.xy")]);
    assert_eq!(code, 0);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows[0], "x\ty\tN[5,5]");
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[3], "5\t5\t0.44444444444444442");
    let (code, out, _) = run(&["eval", &path("single-tj.tmesh"), "--all", "--points", &path("samples.xy")]);
    assert_eq!(code, 0);
    for line in out.lines().skip(1) {
        let sum: f64 = line.split('\t').skip(2).map(|v| v.parse::<f64>().unwrap()).sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    let (code, out, _) = run(&["project", &path("single-tj.tmesh"), "monomial", "3", "2"]);
    assert_eq!(code, 0);
    let err = |name: &str| -> f64 {
        out.lines().find_map(|l| l.strip_prefix(name)).unwrap().trim().parse().unwrap()
    };
    assert!(err("max_error\t") < 1e-10);
    assert!(err("l2_error\t") < 1e-10);
    assert_eq!(out.lines().filter(|l| l.chars().next().is_some_and(|c| c.is_ascii_digit())).count(), 40);
    let (code, _, _) = run(&["project", &path("single-tj.tmesh"), "cosh"]);
    assert_eq!(code, 2);
}

#[test]
fn perturb_writes_a_mesh_file() {
    let (code, out, _) = run(&["perturb", &path("bezier.tmesh"), "--delta", "1/64"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("# perturbation of"));
    assert!(out.contains("# provenance: perturbed vertex <- original vertex"));
    let f = parse_mesh(&out).unwrap();
    assert!(!f.knots.has_zero_span());
    let r = dimension_report(&f.mesh, &f.knots).unwrap();
    assert_eq!((r.formula, r.nullity), (16, 16));
    let (code, _, _) = run(&["perturb", &path("bezier.tmesh"), "--delta", "-1"]);
    assert_eq!(code, 2);
}

#[test]
fn converge_table() {
    let (code, out, _) = run(&["converge", &path("bezier.tmesh"), "--samples", "12", "--deltas", "0.1,0.01,0.001"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("anchor\tdelta=1/10\tdelta=1/100\tdelta=1/1000\n"));
    assert!(out.contains("monotone\ttrue"));
    assert!(out.contains("index_commutation\texact"));
}

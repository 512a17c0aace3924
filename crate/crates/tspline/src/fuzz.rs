//! Randomized property harness over generated analysis-suitable meshes.

use rayon::prelude::*;
use tspline_core::dimension::{assemble, dim_formula};
use tspline_core::dual::biorthogonality_defect;
use tspline_core::nesting::{certify_nested, refinement_matrix};
use tspline_core::{extend, is_analysis_suitable, GlobalKnots, SplineSpace, TMesh, VertexClass};

use crate::random::{legal_refinement, optional_lines, random_as_mesh, random_knots, remove_line, seeded, Refinement};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Property {
    Dimension,
    PartitionOfUnity,
    Biorthogonality,
    Nesting,
}

impl Property {
    pub const ALL: [Property; 4] =
        [Property::Dimension, Property::PartitionOfUnity, Property::Biorthogonality, Property::Nesting];

    pub fn name(self) -> &'static str {
        match self {
            Property::Dimension => "dimension",
            Property::PartitionOfUnity => "partition-of-unity",
            Property::Biorthogonality => "biorthogonality",
            Property::Nesting => "nesting",
        }
    }
}

#[derive(Clone, Debug)]
pub struct FuzzConfig {
    pub seed: u64,
    pub count: usize,
    pub max_side: i32,
    /// Relabel one extended vertex as an overlap vertex before counting.
    pub inject_fault: bool,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig { seed: 1, count: 50, max_side: 16, inject_fault: false }
    }
}

#[derive(Clone, Debug)]
pub struct Failure {
    pub iteration: usize,
    pub property: Property,
    pub detail: String,
    /// The failing mesh after greedy removal of optional lines.
    pub minimized: TMesh,
    pub knots: GlobalKnots,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub iteration: usize,
    pub vertices: usize,
    pub anchors: usize,
    pub nesting_checked: bool,
    pub failures: Vec<Failure>,
}

#[derive(Clone, Debug)]
pub struct FuzzSummary {
    pub config: FuzzConfig,
    pub outcomes: Vec<Outcome>,
}

impl FuzzSummary {
    pub fn failures(&self) -> impl Iterator<Item = &Failure> {
        self.outcomes.iter().flat_map(|o| &o.failures)
    }

    pub fn failure_count(&self) -> usize {
        self.failures().count()
    }

    pub fn nesting_checked(&self) -> usize {
        self.outcomes.iter().filter(|o| o.nesting_checked).count()
    }
}

/// Seed of one iteration, independent of scheduling.
fn iteration_seed(seed: u64, iteration: usize) -> u64 {
    seed ^ (iteration as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn check_dimension(t: &TMesh, k: &GlobalKnots, fault: bool) -> Result<(), String> {
    let mut ext = extend(t).map_err(|e| e.to_string())?;
    if fault {
        if let Some(c) = ext.classes.values_mut().find(|c| **c == VertexClass::Extended) {
            *c = VertexClass::Overlap;
        }
    }
    let formula = dim_formula(&ext);
    let nullity = assemble(&ext, k).map_err(|e| e.to_string())?.nullity();
    if formula == nullity {
        Ok(())
    } else {
        Err(format!("formula {formula} but nullity {nullity}"))
    }
}

fn check_partition(space: &SplineSpace) -> Result<(), String> {
    let r = space.reduced_domain();
    let n = 30;
    for a in 0..=n {
        for b in 0..=n {
            let x = r.x0 + (r.x1 - r.x0) * a as f64 / n as f64;
            let y = r.y0 + (r.y1 - r.y0) * b as f64 / n as f64;
            let s: f64 = space.evaluate_all(x, y).iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(format!("sum {s} at ({x}, {y})"));
            }
        }
    }
    Ok(())
}

fn check_biorthogonality(space: &SplineSpace) -> Result<(), String> {
    match biorthogonality_defect(space) {
        Ok(d) if d <= 1e-10 => Ok(()),
        Ok(d) => Err(format!("defect {d:e}")),
        Err(e) => Err(e.to_string()),
    }
}

fn check_nesting(r: &Refinement) -> Result<(), String> {
    let k = &r.knots;
    let cert = certify_nested(&r.coarse, k, &r.fine, k).map_err(|e| e.to_string())?;
    if !cert.is_nested() {
        return Err(format!("certificate {:?} with witness {:?}", cert.verdict, cert.witness));
    }
    let coarse = SplineSpace::new(r.coarse.clone(), k.clone()).map_err(|e| e.to_string())?;
    let fine = SplineSpace::new(r.fine.clone(), k.clone()).map_err(|e| e.to_string())?;
    let m = refinement_matrix::<f64>(&coarse, &fine, &cert).map_err(|e| e.to_string())?;
    let r = coarse.reduced_domain();
    let n = 15;
    for a in 0..n {
        for b in 0..n {
            let x = r.x0 + (r.x1 - r.x0) * (a as f64 + 0.5) / n as f64;
            let y = r.y0 + (r.y1 - r.y0) * (b as f64 + 0.5) / n as f64;
            let fv = fine.evaluate_all(x, y);
            for (i, row) in m.rows.iter().enumerate() {
                let rhs: f64 = row.iter().map(|(j, c)| c * fv[*j]).sum();
                let d = (coarse.eval_raw(i, x, y, 0, 0) - rhs).abs();
                if d > 1e-10 {
                    return Err(format!("coarse function {} off by {d:e}", coarse.functions[i].anchor));
                }
            }
        }
    }
    Ok(())
}

fn check(property: Property, t: &TMesh, k: &GlobalKnots, fault: bool, refined: Option<&Refinement>) -> Result<(), String> {
    match property {
        Property::Dimension => return check_dimension(t, k, fault),
        Property::Nesting => return refined.map_or(Ok(()), check_nesting),
        _ => {}
    }
    let space = SplineSpace::new(t.clone(), k.clone()).map_err(|e| e.to_string())?;
    match property {
        Property::PartitionOfUnity => check_partition(&space),
        Property::Biorthogonality => check_biorthogonality(&space),
        Property::Dimension | Property::Nesting => unreachable!(),
    }
}

/// Removes optional lines one at a time while the mesh stays suitable and the property still fails.
fn minimize(property: Property, t: &TMesh, k: &GlobalKnots, fault: bool) -> TMesh {
    let mut current = t.clone();
    loop {
        let next = optional_lines(&current).into_iter().find_map(|(axis, s)| {
            let smaller = remove_line(&current, axis, s)?;
            let ok = smaller.is_admissible() && is_analysis_suitable(&smaller).is_ok_and(|(a, _)| a);
            (ok && check(property, &smaller, k, fault, None).is_err()).then_some(smaller)
        });
        match next {
            Some(s) => current = s,
            None => return current,
        }
    }
}

fn run_one(cfg: &FuzzConfig, iteration: usize) -> Outcome {
    let mut rng = seeded(iteration_seed(cfg.seed, iteration));
    let t = random_as_mesh(&mut rng, 9..=cfg.max_side.max(9));
    let k = random_knots(&mut rng, t.domain());
    let refined = legal_refinement(&t, &k, &mut rng);
    let mut failures = Vec::new();
    for property in Property::ALL {
        if let Err(detail) = check(property, &t, &k, cfg.inject_fault, refined.as_ref()) {
            let minimized =
                if property == Property::Nesting { t.clone() } else { minimize(property, &t, &k, cfg.inject_fault) };
            failures.push(Failure { iteration, property, detail, minimized, knots: k.clone() });
        }
    }
    Outcome { iteration, vertices: t.vertex_count(), anchors: t.anchors().len(), nesting_checked: refined.is_some(), failures }
}

/// Runs `count` independent iterations in parallel; outcomes are in iteration order.
pub fn fuzz(cfg: &FuzzConfig) -> FuzzSummary {
    let outcomes = (0..cfg.count).into_par_iter().map(|i| run_one(cfg, i)).collect();
    FuzzSummary { config: cfg.clone(), outcomes }
}

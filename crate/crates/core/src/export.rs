//! CSV fields and JSON summaries.
//!
//! Every CSV row is `x,y,value...` at a cell center of an inside cell, in
//! grid order. Numbers use the shortest representation that round-trips, so
//! identical runs produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::analysis::RadialSolution;
use crate::error::Result;
use crate::fields::CurrentField;
use crate::geometry::{AppliedField, EffectiveFieldData};
use crate::grid::{Grid2D, ScalarField};
use crate::obstacle::{
    coincidence_sets, complementarity_residual, current, radial_extents, vorticity, EnergyBreakdown, ObstacleProblem,
    ObstacleSolution,
};

/// Version of the `summary.json` layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Rays used for the radii in a summary.
pub const SUMMARY_RAYS: usize = 256;

pub fn scalar_csv(grid: &Grid2D, field: &ScalarField, name: &str) -> String {
    let mut s = format!("x,y,{name}\n");
    for (i, j, k) in grid.cells() {
        let (x, y) = grid.center(i, j);
        let _ = writeln!(s, "{x},{y},{}", field.values[k]);
    }
    s
}

pub fn vector_csv(grid: &Grid2D, field: &CurrentField, names: (&str, &str)) -> String {
    let mut s = format!("x,y,{},{}\n", names.0, names.1);
    for (i, j, k) in grid.cells() {
        let (x, y) = grid.center(i, j);
        let _ = writeln!(s, "{x},{y},{},{}", field.jx.values[k], field.jy.values[k]);
    }
    s
}

/// Labels as `-1` (lower contact), `0`, `1` (upper contact).
pub fn labels_csv(grid: &Grid2D, solution: &ObstacleSolution) -> String {
    let mut s = String::from("x,y,label\n");
    for (i, j, k) in grid.cells() {
        let (x, y) = grid.center(i, j);
        let _ = writeln!(s, "{x},{y},{}", solution.labels[k].as_i8());
    }
    s
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value)?)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SummarySource {
    Solver,
    RadialOracle,
}

/// Radii of the coincidence sets about the footprint centroid.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SummaryRadii {
    pub upper_inner: Option<f64>,
    pub upper_outer: Option<f64>,
    pub lower_outer: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Complementarity {
    pub max_eq: f64,
    pub max_sign: f64,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionSummary {
    pub schema_version: u32,
    pub source: SummarySource,
    pub geometry: String,
    pub applied: AppliedField,
    pub resolution: Option<usize>,
    pub h: Option<f64>,
    pub energies: Option<EnergyBreakdown>,
    /// `Σ |J| h²`.
    pub total_variation: Option<f64>,
    pub upper_area: f64,
    pub lower_area: f64,
    pub upper_cells: Option<usize>,
    pub lower_cells: Option<usize>,
    pub radii: SummaryRadii,
    pub iterations: Option<usize>,
    pub residual: Option<f64>,
    pub relaxation: Option<f64>,
    pub complementarity: Option<Complementarity>,
}

impl SolutionSummary {
    pub fn from_solve(
        geometry: &str,
        applied: AppliedField,
        problem: &ObstacleProblem,
        solution: &ObstacleSolution,
        field: &EffectiveFieldData,
    ) -> Self {
        let grid = &problem.grid;
        let (lower, upper) = coincidence_sets(solution);
        let count = |m: &[bool]| m.iter().filter(|&&b| b).count();
        let (nu, nl) = (count(&upper), count(&lower));
        let center = grid.centroid();
        let up = radial_extents(grid, &upper, center, SUMMARY_RAYS);
        let lo = radial_extents(grid, &lower, center, SUMMARY_RAYS);
        let (max_eq, max_sign) = complementarity_residual(solution, problem);
        Self {
            schema_version: SCHEMA_VERSION,
            source: SummarySource::Solver,
            geometry: geometry.to_string(),
            applied,
            resolution: Some(grid.nx.max(grid.ny)),
            h: Some(grid.h),
            energies: Some(EnergyBreakdown::evaluate(solution, problem, field, applied)),
            total_variation: Some(vorticity(solution, problem).total_variation),
            upper_area: nu as f64 * grid.cell_area(),
            lower_area: nl as f64 * grid.cell_area(),
            upper_cells: Some(nu),
            lower_cells: Some(nl),
            radii: SummaryRadii {
                upper_inner: up.map(|r| r.inner),
                upper_outer: up.map(|r| r.outer),
                lower_outer: lo.map(|r| r.outer),
            },
            iterations: Some(solution.iterations),
            residual: Some(solution.residual_inf),
            relaxation: Some(solution.relaxation),
            complementarity: Some(Complementarity { max_eq, max_sign }),
        }
    }

    /// Summary of the radial reference solution of the saddle disk with the
    /// field along `-e2`.
    pub fn from_radial(solution: &RadialSolution) -> Self {
        use std::f64::consts::PI;
        let (rp, big_r, rm) = (solution.plus_inner, solution.outer, solution.minus_outer);
        let upper_area = match (rp, big_r) {
            (Some(a), Some(b)) => PI * (b * b - a * a),
            _ => 0.0,
        };
        Self {
            schema_version: SCHEMA_VERSION,
            source: SummarySource::RadialOracle,
            geometry: "example2".to_string(),
            applied: AppliedField::new(0.0, -solution.strength, 0.0),
            resolution: None,
            h: None,
            energies: None,
            total_variation: None,
            upper_area,
            lower_area: rm.map_or(0.0, |r| PI * r * r),
            upper_cells: None,
            lower_cells: None,
            radii: SummaryRadii {
                upper_inner: rp,
                upper_outer: big_r,
                lower_outer: rm,
            },
            iterations: None,
            residual: None,
            relaxation: None,
            complementarity: None,
        }
    }
}

/// Writes `u.csv`, `J.csv`, `j.csv`, `labels.csv` and `summary.json`.
pub fn write_solution(
    dir: &Path,
    problem: &ObstacleProblem,
    solution: &ObstacleSolution,
    field: &EffectiveFieldData,
    summary: &SolutionSummary,
) -> Result<()> {
    let grid = &problem.grid;
    fs::create_dir_all(dir)?;
    fs::write(dir.join("u.csv"), scalar_csv(grid, &solution.u, "u"))?;
    fs::write(
        dir.join("J.csv"),
        scalar_csv(grid, &vorticity(solution, problem).density, "J"),
    )?;
    fs::write(
        dir.join("j.csv"),
        vector_csv(grid, &current(&solution.u, problem, field), ("jx", "jy")),
    )?;
    fs::write(dir.join("labels.csv"), labels_csv(grid, solution))?;
    write_json(&dir.join("summary.json"), summary)
}

//! Quantities derived from a solved potential: coincidence sets, vorticity,
//! current and energies.

use serde::Serialize;

use super::{Label, ObstacleProblem, ObstacleSolution};
use crate::fields::{CurrentField, MeasureField};
use crate::geometry::{AppliedField, EffectiveFieldData};
use crate::grid::{Grid2D, ScalarField, DIRECTIONS};

/// `(max_eq, max_sign_violation)`: the largest `|L u + F|` over inactive
/// cells and the largest wrong-signed residual over active cells.
pub fn complementarity_residual(solution: &ObstacleSolution, problem: &ObstacleProblem) -> (f64, f64) {
    let r = problem.residual(&solution.u);
    let mut max_eq: f64 = 0.0;
    let mut max_sign: f64 = 0.0;
    for (_, _, k) in problem.grid.cells() {
        let v = r.values[k];
        match solution.labels[k] {
            Label::Inactive => max_eq = max_eq.max(v.abs()),
            Label::UpperActive => max_sign = max_sign.max(-v),
            Label::LowerActive => max_sign = max_sign.max(v),
        }
    }
    (max_eq, max_sign)
}

/// Masks `(S-, S+)` over the whole array.
pub fn coincidence_sets(solution: &ObstacleSolution) -> (Vec<bool>, Vec<bool>) {
    let lower = solution.labels.iter().map(|&l| l == Label::LowerActive).collect();
    let upper = solution.labels.iter().map(|&l| l == Label::UpperActive).collect();
    (lower, upper)
}

/// `J = (L u + F) / 2` on the coincidence sets, zero elsewhere.
pub fn vorticity(solution: &ObstacleSolution, problem: &ObstacleProblem) -> MeasureField {
    let mut r = problem.residual(&solution.u);
    for (_, _, k) in problem.grid.cells() {
        r.values[k] = match solution.labels[k] {
            Label::Inactive => 0.0,
            _ => 0.5 * r.values[k],
        };
    }
    MeasureField::from_density(&problem.grid, r)
}

/// One-sided or centered derivative along an axis. Missing neighbours are
/// boundary ghosts holding zero at distance `θ h`.
fn axis_derivative(grid: &Grid2D, u: &ScalarField, i: usize, j: usize, axis: usize) -> f64 {
    let k = grid.idx(i, j);
    let theta = grid.fractions(k);
    let (dm, dp) = (2 * axis, 2 * axis + 1);
    let side = |d: usize| {
        let (di, dj) = DIRECTIONS[d];
        match grid.neighbor(i, j, di, dj) {
            Some(n) => (grid.h, u.values[n]),
            None => (theta[d] * grid.h, 0.0),
        }
    };
    let (h1, u1) = side(dm);
    let (h2, u2) = side(dp);
    let u0 = u.values[k];
    (h1 * h1 * (u2 - u0) + h2 * h2 * (u0 - u1)) / (h1 * h2 * (h1 + h2))
}

/// `∇u` at a cell center with second-order differences, using the zero
/// boundary values at their sub-cell positions.
pub fn gradient_at(grid: &Grid2D, u: &ScalarField, i: usize, j: usize) -> (f64, f64) {
    (axis_derivative(grid, u, i, j, 0), axis_derivative(grid, u, i, j, 1))
}

/// Supercurrent `j = B + (1/a) ∇⊥u` with `∇⊥u = (-∂2 u, ∂1 u)`.
pub fn current(u: &ScalarField, problem: &ObstacleProblem, field: &EffectiveFieldData) -> CurrentField {
    let grid = &problem.grid;
    let mut j = CurrentField::zeros(grid);
    for (ci, cj, k) in grid.cells() {
        let (gx, gy) = gradient_at(grid, u, ci, cj);
        let inv_a = 1.0 / problem.a.values[k];
        j.jx.values[k] = field.bx.values[k] - inv_a * gy;
        j.jy.values[k] = field.by.values[k] + inv_a * gx;
    }
    j
}

/// `½ Σ (1/a)|∇u|² h² - Σ F u h²` with the face gradients of the solver's
/// stencil, so that the solver minimizes exactly this quantity.
pub fn dual_energy(u: &ScalarField, problem: &ObstacleProblem) -> f64 {
    let buf = problem.padded(u);
    let h2 = problem.grid.cell_area();
    let st = &problem.stencil;
    st.cells
        .iter()
        .enumerate()
        .map(|(r, &k)| 0.5 * buf[k] * st.apply_row(r, &buf) - problem.f.values[k] * buf[k] * h2)
        .sum()
}

/// Dirichlet part `½ Σ (1/a)|∇u|² h²` of the energies.
pub fn dirichlet_energy(u: &ScalarField, problem: &ObstacleProblem) -> f64 {
    let buf = problem.padded(u);
    let st = &problem.stencil;
    st.cells
        .iter()
        .enumerate()
        .map(|(r, &k)| 0.5 * buf[k] * st.apply_row(r, &buf))
        .sum()
}

/// `½ Σ a |L u + F| h² + ½ Σ (1/a)|∇u|² h²` for an arbitrary `u`.
pub fn primal_energy(u: &ScalarField, problem: &ObstacleProblem) -> f64 {
    let r = problem.residual(u);
    let measure: f64 = problem
        .grid
        .cells()
        .map(|(_, _, k)| problem.a.values[k] * r.values[k].abs())
        .sum::<f64>()
        * problem.grid.cell_area();
    0.5 * measure + dirichlet_energy(u, problem)
}

/// `Σ a |J| h² + ½ Σ a |j - B|² h² + ½ Σ (a³/12) |H'|² h²`.
pub fn mean_field_energy(
    grid: &Grid2D,
    j: &CurrentField,
    vorticity: &MeasureField,
    a: &ScalarField,
    field: &EffectiveFieldData,
    applied: AppliedField,
) -> f64 {
    let h2 = grid.cell_area();
    let hp = applied.parallel_sq();
    grid.cells()
        .map(|(_, _, k)| {
            let av = a.values[k];
            let dx = j.jx.values[k] - field.bx.values[k];
            let dy = j.jy.values[k] - field.by.values[k];
            av * vorticity.density.values[k].abs() + 0.5 * av * (dx * dx + dy * dy) + 0.5 * av.powi(3) / 12.0 * hp
        })
        .sum::<f64>()
        * h2
}

/// Energy report for a solved problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    pub dual: f64,
    pub primal: f64,
    /// `Σ a |J| h²`.
    pub vortex: f64,
    pub dirichlet: f64,
    /// `½ Σ (a³/12)|H'|² h²`.
    pub thickness: f64,
    pub mean_field: f64,
    /// `-primal / dual`; one at the minimizer.
    pub duality_ratio: f64,
}

impl EnergyBreakdown {
    pub fn evaluate(
        solution: &ObstacleSolution,
        problem: &ObstacleProblem,
        field: &EffectiveFieldData,
        applied: AppliedField,
    ) -> Self {
        let grid = &problem.grid;
        let j_meas = vorticity(solution, problem);
        let cur = current(&solution.u, problem, field);
        let dual = dual_energy(&solution.u, problem);
        let primal = primal_energy(&solution.u, problem);
        let thickness = 0.5
            * applied.parallel_sq()
            * grid
                .cells()
                .map(|(_, _, k)| problem.a.values[k].powi(3) / 12.0)
                .sum::<f64>()
            * grid.cell_area();
        Self {
            dual,
            primal,
            vortex: j_meas.weighted_variation(grid, &problem.a),
            dirichlet: dirichlet_energy(&solution.u, problem),
            thickness,
            mean_field: mean_field_energy(grid, &cur, &j_meas, &problem.a, field, applied),
            duality_ratio: if dual != 0.0 { -primal / dual } else { 1.0 },
        }
    }
}

//! Projected successive over-relaxation.

use serde::{Deserialize, Serialize};

use super::{Label, ObstacleProblem, ObstacleSolution};
use crate::error::{Error, Result};
use crate::grid::ScalarField;

/// Over-relaxation factor selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relaxation {
    /// Estimate of the optimal SOR factor for the grid.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Bound on the projected residual of the complementarity system.
    pub tol: f64,
    pub max_iter: usize,
    pub relax: Relaxation,
    /// Sweeps between residual evaluations.
    pub check_every: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 1_000_000,
            relax: Relaxation::Auto,
            check_every: 10,
        }
    }
}

/// `2 / (1 + sin(π h / D))`-type estimate from the extent of the inside
/// cells, using the lowest Dirichlet mode of their bounding box.
pub fn default_relaxation(problem: &ObstacleProblem) -> f64 {
    let g = &problem.grid;
    let (mut i0, mut i1, mut j0, mut j1) = (usize::MAX, 0, usize::MAX, 0);
    for (i, j, _) in g.cells() {
        i0 = i0.min(i);
        i1 = i1.max(i);
        j0 = j0.min(j);
        j1 = j1.max(j);
    }
    let (lx, ly) = ((i1 - i0 + 1) as f64, (j1 - j0 + 1) as f64);
    // Jacobi spectral radius of the five-point operator, grid units
    let rho = 0.5 * ((std::f64::consts::PI / (lx + 1.0)).cos() + (std::f64::consts::PI / (ly + 1.0)).cos());
    2.0 / (1.0 + (1.0 - rho * rho).max(0.0).sqrt())
}

pub fn solve(problem: &ObstacleProblem, opts: &SolverOptions) -> Result<ObstacleSolution> {
    solve_with(problem, opts, None, |_, _| {})
}

/// PSOR with an optional starting iterate (projected onto the constraint
/// set) and a callback invoked after every sweep with the sweep count and the
/// current iterate (indexed by grid cell, one trailing zero slot).
pub fn solve_with(
    problem: &ObstacleProblem,
    opts: &SolverOptions,
    start: Option<&ScalarField>,
    mut monitor: impl FnMut(usize, &[f64]),
) -> Result<ObstacleSolution> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {}",
            opts.tol
        )));
    }
    if opts.max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
    }
    let omega = match opts.relax {
        Relaxation::Auto => default_relaxation(problem),
        Relaxation::Fixed(w) => w,
    };
    if !(omega > 0.0 && omega < 2.0) {
        return Err(Error::InvalidParameter(format!(
            "relaxation must lie in (0, 2), got {omega}"
        )));
    }
    let st = &problem.stencil;
    let h2 = problem.grid.cell_area();
    let label_tol = 10.0 * opts.tol;
    let n = problem.grid.len();

    let mut u = vec![0.0; n + 1];
    if let Some(s) = start {
        s.check_grid(&problem.grid)?;
        for &k in &st.cells {
            u[k] = s.values[k].clamp(problem.lower.values[k], problem.upper.values[k]);
        }
    }
    let lo: Vec<f64> = st.cells.iter().map(|&k| problem.lower.values[k]).collect();
    let hi: Vec<f64> = st.cells.iter().map(|&k| problem.upper.values[k]).collect();
    let rhs: Vec<f64> = st.cells.iter().map(|&k| problem.f.values[k] * h2).collect();

    let check_every = opts.check_every.max(1);
    let mut residual = f64::INFINITY;
    let mut sweeps = 0;
    while sweeps < opts.max_iter {
        for r in 0..st.cells.len() {
            let k = st.cells[r];
            let nb = &st.nbr[r];
            let off = &st.off[r];
            let gs =
                (off[0] * u[nb[0]] + off[1] * u[nb[1]] + off[2] * u[nb[2]] + off[3] * u[nb[3]] + rhs[r]) / st.diag[r];
            let old = u[k];
            u[k] = (old + omega * (gs - old)).clamp(lo[r], hi[r]);
        }
        sweeps += 1;
        monitor(sweeps, &u);
        if sweeps % check_every == 0 || sweeps == opts.max_iter {
            residual = projected_residual(problem, &u, label_tol);
            if residual <= opts.tol {
                break;
            }
        }
    }
    if residual > opts.tol {
        return Err(Error::NotConverged {
            iterations: sweeps,
            residual,
        });
    }
    u.pop();
    let u = ScalarField {
        nx: problem.grid.nx,
        ny: problem.grid.ny,
        values: u,
    };
    let labels = label_cells(problem, &u, label_tol);
    Ok(ObstacleSolution {
        u,
        labels,
        iterations: sweeps,
        residual_inf: residual,
        relaxation: omega,
        label_tol,
    })
}

/// Worst violation of the complementarity system: `|L u + F|` off the
/// obstacles, wrong-signed residual on them.
fn projected_residual(problem: &ObstacleProblem, u: &[f64], label_tol: f64) -> f64 {
    let st = &problem.stencil;
    let h2 = problem.grid.cell_area();
    let mut worst: f64 = 0.0;
    for r in 0..st.cells.len() {
        let k = st.cells[r];
        let res = problem.f.values[k] - st.apply_row(r, u) / h2;
        let v = if u[k] >= problem.upper.values[k] - label_tol {
            (-res).max(0.0)
        } else if u[k] <= problem.lower.values[k] + label_tol {
            res.max(0.0)
        } else {
            res.abs()
        };
        worst = worst.max(v);
    }
    worst
}

pub(crate) fn label_cells(problem: &ObstacleProblem, u: &ScalarField, label_tol: f64) -> Vec<Label> {
    let mut labels = vec![Label::Inactive; problem.grid.len()];
    for &k in &problem.stencil.cells {
        labels[k] = if u.values[k] >= problem.upper.values[k] - label_tol {
            Label::UpperActive
        } else if u.values[k] <= problem.lower.values[k] + label_tol {
            Label::LowerActive
        } else {
            Label::Inactive
        };
    }
    labels
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{effective_field, thickness_field, AppliedField, FilmGeometry};
    use crate::grid::{build_grid, DomainSpec};
    use crate::obstacle::{assemble, dual_energy};

    fn example1(res: usize, h: f64) -> ObstacleProblem {
        let g = build_grid(&DomainSpec::unit_disk(), res).unwrap();
        let film = FilmGeometry::example1();
        let a = thickness_field(&film, &g).unwrap();
        let d = effective_field(&film, AppliedField::new(h, 0.0, 0.0), &g).unwrap();
        assemble(&g, &a, &d.f).unwrap()
    }

    #[test]
    fn zero_forcing_gives_zero() {
        let p = example1(24, 0.0);
        let s = solve(&p, &SolverOptions::default()).unwrap();
        assert!(s.u.values.iter().all(|&v| v == 0.0));
        assert!(s.labels.iter().all(|&l| l == Label::Inactive));
    }

    #[test]
    fn rejects_bad_parameters() {
        let p = example1(16, 1.0);
        let bad = |o: SolverOptions| matches!(solve(&p, &o), Err(Error::InvalidParameter(_)));
        assert!(bad(SolverOptions {
            tol: 0.0,
            ..Default::default()
        }));
        assert!(bad(SolverOptions {
            relax: Relaxation::Fixed(2.0),
            ..Default::default()
        }));
        assert!(bad(SolverOptions {
            relax: Relaxation::Fixed(0.0),
            ..Default::default()
        }));
    }

    #[test]
    fn non_convergence_reports_last_residual() {
        let p = example1(32, 8.0);
        let opts = SolverOptions {
            max_iter: 5,
            ..Default::default()
        };
        match solve(&p, &opts) {
            Err(Error::NotConverged { iterations, residual }) => {
                assert_eq!(iterations, 5);
                assert!(residual.is_finite() && residual > 1e-8);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn constraint_holds_after_every_sweep_and_energy_decreases() {
        let p = example1(20, 9.0);
        let opts = SolverOptions {
            relax: Relaxation::Fixed(1.5),
            ..Default::default()
        };
        let mut prev = f64::INFINITY;
        let mut worst_increase: f64 = 0.0;
        let mut violations = 0;
        solve_with(&p, &opts, None, |_, u| {
            let field = ScalarField {
                nx: p.grid.nx,
                ny: p.grid.ny,
                values: u[..u.len() - 1].to_vec(),
            };
            for (_, _, k) in p.grid.cells() {
                if u[k] > p.upper.values[k] || u[k] < p.lower.values[k] {
                    violations += 1;
                }
            }
            let e = dual_energy(&field, &p);
            worst_increase = worst_increase.max(e - prev);
            prev = e;
        })
        .unwrap();
        assert_eq!(violations, 0);
        assert!(worst_increase <= 1e-12, "energy rose by {worst_increase}");
    }

    #[test]
    fn relaxation_estimate_is_in_range() {
        let w = default_relaxation(&example1(256, 1.0));
        assert!(w > 1.9 && w < 2.0, "{w}");
    }
}

//! Weighted two-obstacle problem for the mean-field potential.
//!
//! The potential `u` minimizes
//!
//! ```text
//! Σ_faces (1 / 2a) |∇u|² h² - Σ_cells F u h²     subject to  -a/2 ≤ u ≤ a/2,
//! ```
//!
//! with `u = 0` on the footprint boundary. Its optimality system, with
//! `L u = ∇·((1/a) ∇u)`, is
//!
//! * `L u + F = 0` where `-a/2 < u < a/2`,
//! * `L u + F ≥ 0` where `u = a/2` (the set `S+`),
//! * `L u + F ≤ 0` where `u = -a/2` (the set `S-`),
//!
//! and the vorticity is `J = (L u + F) / 2`, supported on `S+ ∪ S-`.

mod critical;
mod derived;
mod psor;
mod radii;

pub use critical::{critical_field, ContactKind, CriticalFamily, CriticalReport, Probe};
pub use derived::{
    coincidence_sets, complementarity_residual, current, dirichlet_energy, dual_energy, gradient_at, mean_field_energy,
    primal_energy, vorticity, EnergyBreakdown,
};
pub use psor::{default_relaxation, solve, solve_with, Relaxation, SolverOptions};
pub use radii::{mean_radius, radial_extents, RadialExtents};

use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField, DIRECTIONS};
use crate::linsolve::{pcg, CsrMatrix};

/// Assembled obstacle problem: coefficients, forcing, obstacles and the
/// five-point stencil of `L`.
#[derive(Debug, Clone)]
pub struct ObstacleProblem {
    pub grid: Grid2D,
    pub a: ScalarField,
    pub f: ScalarField,
    pub lower: ScalarField,
    pub upper: ScalarField,
    pub(crate) stencil: Stencil,
}

/// Per inside cell: neighbour slots, off-diagonal weights and diagonal of
/// `-h² L`. Outside neighbours point to a trailing slot that is always zero.
#[derive(Debug, Clone)]
pub(crate) struct Stencil {
    pub cells: Vec<usize>,
    pub nbr: Vec<[usize; 4]>,
    pub off: Vec<[f64; 4]>,
    pub diag: Vec<f64>,
}

impl Stencil {
    fn build(grid: &Grid2D, a: &ScalarField) -> Self {
        let zero_slot = grid.len();
        let n = grid.inside_count();
        let mut s = Stencil {
            cells: Vec::with_capacity(n),
            nbr: Vec::with_capacity(n),
            off: Vec::with_capacity(n),
            diag: Vec::with_capacity(n),
        };
        for (i, j, k) in grid.cells() {
            let inv_a = 1.0 / a.values[k];
            let theta = grid.fractions(k);
            let mut nbr = [zero_slot; 4];
            let mut off = [0.0; 4];
            let mut diag = 0.0;
            for (d, &(di, dj)) in DIRECTIONS.iter().enumerate() {
                match grid.neighbor(i, j, di, dj) {
                    Some(nk) => {
                        let c = 0.5 * (inv_a + 1.0 / a.values[nk]);
                        nbr[d] = nk;
                        off[d] = c;
                        diag += c;
                    }
                    None => diag += inv_a / theta[d],
                }
            }
            s.cells.push(k);
            s.nbr.push(nbr);
            s.off.push(off);
            s.diag.push(diag);
        }
        s
    }

    /// `-h² (L u)` at stencil row `r`, reading `u` with its trailing zero slot.
    #[inline]
    pub fn apply_row(&self, r: usize, u: &[f64]) -> f64 {
        let nb = &self.nbr[r];
        let off = &self.off[r];
        self.diag[r] * u[self.cells[r]]
            - (off[0] * u[nb[0]] + off[1] * u[nb[1]] + off[2] * u[nb[2]] + off[3] * u[nb[3]])
    }
}

/// Builds the problem with obstacles `±a/2`.
pub fn assemble(grid: &Grid2D, a: &ScalarField, f: &ScalarField) -> Result<ObstacleProblem> {
    a.check_grid(grid)?;
    f.check_grid(grid)?;
    let half = ScalarField {
        nx: grid.nx,
        ny: grid.ny,
        values: grid
            .inside
            .iter()
            .zip(&a.values)
            .map(|(&ins, &v)| if ins { 0.5 * v } else { 0.0 })
            .collect(),
    };
    let lower = half.map(|v| -v);
    assemble_with_obstacles(grid, a, f, lower, half)
}

/// Builds the problem with explicit obstacles.
pub fn assemble_with_obstacles(
    grid: &Grid2D,
    a: &ScalarField,
    f: &ScalarField,
    lower: ScalarField,
    upper: ScalarField,
) -> Result<ObstacleProblem> {
    for field in [a, f, &lower, &upper] {
        field.check_grid(grid)?;
    }
    for (i, j, k) in grid.cells() {
        let v = a.values[k];
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::NonPositiveThickness { i, j, value: v });
        }
        if !(lower.values[k] < upper.values[k]) {
            return Err(Error::ObstacleOrder {
                i,
                j,
                lower: lower.values[k],
                upper: upper.values[k],
            });
        }
        if !f.values[k].is_finite() {
            return Err(Error::InvalidParameter(format!(
                "forcing is not finite at cell ({i}, {j})"
            )));
        }
    }
    let stencil = Stencil::build(grid, a);
    Ok(ObstacleProblem {
        grid: grid.clone(),
        a: a.clone(),
        f: f.clone(),
        lower,
        upper,
        stencil,
    })
}

impl ObstacleProblem {
    /// Same geometry and obstacles with a different forcing.
    pub fn with_forcing(&self, f: ScalarField) -> Result<Self> {
        f.check_grid(&self.grid)?;
        Ok(Self { f, ..self.clone() })
    }

    /// `L u` at every inside cell.
    pub fn apply_operator(&self, u: &ScalarField) -> ScalarField {
        let buf = self.padded(u);
        let h2 = self.grid.cell_area();
        let mut out = ScalarField::zeros(&self.grid);
        for (r, &k) in self.stencil.cells.iter().enumerate() {
            out.values[k] = -self.stencil.apply_row(r, &buf) / h2;
        }
        out
    }

    /// `L u + F` at every inside cell.
    pub fn residual(&self, u: &ScalarField) -> ScalarField {
        let mut r = self.apply_operator(u);
        for &k in &self.stencil.cells {
            r.values[k] += self.f.values[k];
        }
        r
    }

    /// Solves `-L ψ = rhs` with zero boundary data, ignoring the obstacles.
    pub fn solve_unconstrained(&self, rhs: &ScalarField, tol: f64) -> Result<ScalarField> {
        rhs.check_grid(&self.grid)?;
        let st = &self.stencil;
        let mut row_of = vec![usize::MAX; self.grid.len()];
        for (r, &k) in st.cells.iter().enumerate() {
            row_of[k] = r;
        }
        let rows = (0..st.cells.len())
            .map(|r| {
                let mut row = vec![(r, st.diag[r])];
                for d in 0..4 {
                    let nb = st.nbr[r][d];
                    if nb < self.grid.len() {
                        row.push((row_of[nb], -st.off[r][d]));
                    }
                }
                row
            })
            .collect();
        let m = CsrMatrix::from_rows(rows);
        let h2 = self.grid.cell_area();
        let b: Vec<f64> = st.cells.iter().map(|&k| rhs.values[k] * h2).collect();
        let mut x = vec![0.0; m.n];
        pcg(&m, &b, &mut x, tol, 50 * m.n + 1000)?;
        let mut out = ScalarField::zeros(&self.grid);
        for (r, &k) in st.cells.iter().enumerate() {
            out.values[k] = x[r];
        }
        Ok(out)
    }

    pub(crate) fn padded(&self, u: &ScalarField) -> Vec<f64> {
        let mut buf = Vec::with_capacity(u.values.len() + 1);
        buf.extend_from_slice(&u.values);
        buf.push(0.0);
        buf
    }

    /// Off-diagonal weights (`1/a` averaged onto faces, divided by the
    /// boundary fraction on boundary faces) and diagonal of `-h² L` for an
    /// inside cell, in west/east/south/north order.
    pub fn stencil_row(&self, k: usize) -> Option<([f64; 4], f64)> {
        let r = self.stencil.cells.binary_search(&k).ok()?;
        Some((self.stencil.off[r], self.stencil.diag[r]))
    }
}

/// Active-set label of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    LowerActive,
    Inactive,
    UpperActive,
}

impl Label {
    pub fn as_i8(self) -> i8 {
        match self {
            Label::LowerActive => -1,
            Label::Inactive => 0,
            Label::UpperActive => 1,
        }
    }
}

/// Solver output. `labels` covers the whole array; outside cells are
/// `Inactive`.
#[derive(Debug, Clone)]
pub struct ObstacleSolution {
    pub u: ScalarField,
    pub labels: Vec<Label>,
    pub iterations: usize,
    pub residual_inf: f64,
    pub relaxation: f64,
    pub label_tol: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, DomainSpec};

    #[test]
    fn unit_thickness_gives_five_point_laplacian() {
        let g = build_grid(&DomainSpec::rectangle(0.0, 1.0, 0.0, 1.0), 8).unwrap();
        let a = ScalarField::constant(&g, 1.0);
        let p = assemble(&g, &a, &ScalarField::zeros(&g)).unwrap();
        let (off, diag) = p.stencil_row(g.idx(3, 3)).unwrap();
        assert_eq!(off, [1.0; 4]);
        assert_eq!(diag, 4.0);
        // corner cell: two Dirichlet faces at half a step
        let (off, diag) = p.stencil_row(g.idx(0, 0)).unwrap();
        assert_eq!(off, [0.0, 1.0, 0.0, 1.0]);
        assert!((diag - 6.0).abs() < 1e-12);
        assert!(g
            .cells()
            .all(|(_, _, k)| p.upper.values[k] == 0.5 && p.lower.values[k] == -0.5));
    }

    #[test]
    fn doubled_thickness_halves_stencil() {
        let g = build_grid(&DomainSpec::unit_disk(), 16).unwrap();
        let p1 = assemble(&g, &ScalarField::constant(&g, 1.0), &ScalarField::zeros(&g)).unwrap();
        let p2 = assemble(&g, &ScalarField::constant(&g, 2.0), &ScalarField::zeros(&g)).unwrap();
        for (_, _, k) in g.cells() {
            let (o1, d1) = p1.stencil_row(k).unwrap();
            let (o2, d2) = p2.stencil_row(k).unwrap();
            assert!((d2 - 0.5 * d1).abs() < 1e-12);
            for d in 0..4 {
                assert!((o2[d] - 0.5 * o1[d]).abs() < 1e-12);
            }
            assert_eq!(p2.upper.values[k], 1.0);
            assert_eq!(p2.lower.values[k], -1.0);
        }
    }

    #[test]
    fn mismatched_grid_is_rejected() {
        let g = build_grid(&DomainSpec::unit_disk(), 16).unwrap();
        let other = build_grid(&DomainSpec::unit_disk(), 20).unwrap();
        let err = assemble(&g, &ScalarField::constant(&other, 1.0), &ScalarField::zeros(&g)).unwrap_err();
        assert!(matches!(err, Error::GridMismatch { .. }));
    }

    #[test]
    fn operator_is_exact_on_cubic_away_from_boundary() {
        let g = build_grid(&DomainSpec::unit_disk(), 32).unwrap();
        let a = ScalarField::constant(&g, 1.0);
        let p = assemble(&g, &a, &ScalarField::zeros(&g)).unwrap();
        let u = ScalarField::from_fn(&g, |x, y| x * x * x - 2.0 * x * y * y);
        let lu = p.apply_operator(&u);
        for (i, j, k) in g.cells() {
            if g.boundary_band[k] {
                continue;
            }
            let (x, _) = g.center(i, j);
            assert!((lu.values[k] - (6.0 * x - 4.0 * x)).abs() < 1e-9);
        }
    }
}

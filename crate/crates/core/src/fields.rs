//! Cell-centered measures and vector fields.

use crate::grid::{Grid2D, ScalarField};

/// Signed measure stored as a cell density; the mass of a cell is
/// `density * h²`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureField {
    pub density: ScalarField,
    pub total_variation: f64,
}

impl MeasureField {
    pub fn from_density(grid: &Grid2D, density: ScalarField) -> Self {
        let total_variation = grid.cells().map(|(_, _, k)| density.values[k].abs()).sum::<f64>() * grid.cell_area();
        Self {
            density,
            total_variation,
        }
    }

    pub fn zeros(grid: &Grid2D) -> Self {
        Self::from_density(grid, ScalarField::zeros(grid))
    }

    /// Signed total mass.
    pub fn total(&self, grid: &Grid2D) -> f64 {
        self.density.integral(grid)
    }

    /// `Σ w |density| h²`.
    pub fn weighted_variation(&self, grid: &Grid2D, w: &ScalarField) -> f64 {
        grid.cells()
            .map(|(_, _, k)| w.values[k] * self.density.values[k].abs())
            .sum::<f64>()
            * grid.cell_area()
    }
}

/// Cell-centered planar vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentField {
    pub jx: ScalarField,
    pub jy: ScalarField,
}

impl CurrentField {
    pub fn zeros(grid: &Grid2D) -> Self {
        Self {
            jx: ScalarField::zeros(grid),
            jy: ScalarField::zeros(grid),
        }
    }

    pub fn from_fn(grid: &Grid2D, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let mut out = Self::zeros(grid);
        for (i, j, k) in grid.cells() {
            let (x, y) = grid.center(i, j);
            let (vx, vy) = f(x, y);
            out.jx.values[k] = vx;
            out.jy.values[k] = vy;
        }
        out
    }

    /// `Σ a (u · v) h²` over inside cells.
    pub fn weighted_inner(&self, other: &CurrentField, a: &ScalarField, grid: &Grid2D) -> f64 {
        grid.cells()
            .map(|(_, _, k)| {
                a.values[k] * (self.jx.values[k] * other.jx.values[k] + self.jy.values[k] * other.jy.values[k])
            })
            .sum::<f64>()
            * grid.cell_area()
    }

    pub fn sub(&self, other: &CurrentField) -> CurrentField {
        let d = |p: &ScalarField, q: &ScalarField| ScalarField {
            nx: p.nx,
            ny: p.ny,
            values: p.values.iter().zip(&q.values).map(|(x, y)| x - y).collect(),
        };
        CurrentField {
            jx: d(&self.jx, &other.jx),
            jy: d(&self.jy, &other.jy),
        }
    }

    /// Centered-difference curl `∂1 jy - ∂2 jx` at cells whose four
    /// neighbours are inside; `None` elsewhere.
    pub fn curl_at(&self, grid: &Grid2D, i: usize, j: usize) -> Option<f64> {
        let nb = |di, dj| grid.neighbor(i, j, di, dj);
        let (w, e, s, n) = (nb(-1, 0)?, nb(1, 0)?, nb(0, -1)?, nb(0, 1)?);
        Some(
            (self.jy.values[e] - self.jy.values[w]) / (2.0 * grid.h)
                - (self.jx.values[n] - self.jx.values[s]) / (2.0 * grid.h),
        )
    }

    /// Centered-difference divergence of `w * self` at fully interior cells.
    pub fn weighted_div_at(&self, grid: &Grid2D, w: &ScalarField, i: usize, j: usize) -> Option<f64> {
        let nb = |di, dj| grid.neighbor(i, j, di, dj);
        let (we, e, s, n) = (nb(-1, 0)?, nb(1, 0)?, nb(0, -1)?, nb(0, 1)?);
        let wx = |k: usize| w.values[k] * self.jx.values[k];
        let wy = |k: usize| w.values[k] * self.jy.values[k];
        Some((wx(e) - wx(we)) / (2.0 * grid.h) + (wy(n) - wy(s)) / (2.0 * grid.h))
    }
}

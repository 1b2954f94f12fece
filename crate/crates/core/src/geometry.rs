//! Film surfaces, thickness and the effective perpendicular field.
//!
//! The film occupies `f(x) < x3 < g(x)` over the footprint. An applied field
//! `H = (H1, H2, H3)` acts on the limiting plane through
//!
//! ```text
//! F(x) = H3 - (H1, H2) · ∇((f + g) / 2)
//! ```
//!
//! with vector potential `B = (-H3 x2 / 2, H3 x1 / 2) + ((f + g) / 2) (H2, -H1)`,
//! so that `∂1 B2 - ∂2 B1 = F`. Throughout the crate `∇⊥φ = (-∂2 φ, ∂1 φ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField};

/// Polynomial in `(x1, x2)` stored as `(coefficient, power of x1, power of x2)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly2 {
    pub terms: Vec<(f64, u32, u32)>,
}

impl Poly2 {
    pub fn new(terms: Vec<(f64, u32, u32)>) -> Self {
        Self { terms }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![(c, 0, 0)])
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(c, px, py)| c * x.powi(px as i32) * y.powi(py as i32))
            .sum()
    }

    pub fn grad(&self, x: f64, y: f64) -> (f64, f64) {
        let mut g = (0.0, 0.0);
        for &(c, px, py) in &self.terms {
            if px > 0 {
                g.0 += c * px as f64 * x.powi(px as i32 - 1) * y.powi(py as i32);
            }
            if py > 0 {
                g.1 += c * py as f64 * x.powi(px as i32) * y.powi(py as i32 - 1);
            }
        }
        g
    }

    fn plus(&self, other: &Poly2) -> Poly2 {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Poly2 { terms }
    }

    fn scaled(&self, s: f64) -> Poly2 {
        Poly2 {
            terms: self.terms.iter().map(|&(c, px, py)| (c * s, px, py)).collect(),
        }
    }
}

/// A film surface, either analytic or sampled at cell centers over the whole
/// grid array.
#[derive(Debug, Clone, PartialEq)]
pub enum Surface {
    Poly(Poly2),
    Sampled(ScalarField),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilmGeometry {
    pub name: String,
    pub lower: Surface,
    pub upper: Surface,
}

/// Named geometry presets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeometryPreset {
    /// Uniform-thickness parabolic film `f = x1² + x2² - 1/2`, `g = f + 1`.
    Example1,
    /// Uniform-thickness film `f = -x2 (1 - 4 x1² - 4/3 x2²) - 1/2`, `g = f + 1`.
    Example2,
    /// Flat film between two constant heights.
    Flat { lower: f64, upper: f64 },
}

impl GeometryPreset {
    pub fn film(self) -> FilmGeometry {
        match self {
            GeometryPreset::Example1 => FilmGeometry::example1(),
            GeometryPreset::Example2 => FilmGeometry::example2(),
            GeometryPreset::Flat { lower, upper } => FilmGeometry::flat(lower, upper),
        }
    }
}

impl FilmGeometry {
    pub fn example1() -> Self {
        let f = Poly2::new(vec![(1.0, 2, 0), (1.0, 0, 2), (-0.5, 0, 0)]);
        let g = f.plus(&Poly2::constant(1.0));
        Self {
            name: "example1".into(),
            lower: Surface::Poly(f),
            upper: Surface::Poly(g),
        }
    }

    pub fn example2() -> Self {
        // -x2 (1 - 4 x1² - 4/3 x2²) - 1/2
        let f = Poly2::new(vec![(-1.0, 0, 1), (4.0, 2, 1), (4.0 / 3.0, 0, 3), (-0.5, 0, 0)]);
        let g = f.plus(&Poly2::constant(1.0));
        Self {
            name: "example2".into(),
            lower: Surface::Poly(f),
            upper: Surface::Poly(g),
        }
    }

    pub fn flat(lower: f64, upper: f64) -> Self {
        Self {
            name: format!("flat({lower}, {upper})"),
            lower: Surface::Poly(Poly2::constant(lower)),
            upper: Surface::Poly(Poly2::constant(upper)),
        }
    }

    fn midsurface_poly(&self) -> Option<Poly2> {
        match (&self.lower, &self.upper) {
            (Surface::Poly(f), Surface::Poly(g)) => Some(f.plus(g).scaled(0.5)),
            _ => None,
        }
    }

    /// `(f + g) / 2` at an arbitrary point, when both surfaces are analytic.
    pub fn midsurface_at(&self, x: f64, y: f64) -> Option<f64> {
        self.midsurface_poly().map(|p| p.eval(x, y))
    }

    /// `g - f` at an arbitrary point, when both surfaces are analytic.
    pub fn thickness_at(&self, x: f64, y: f64) -> Option<f64> {
        match (&self.lower, &self.upper) {
            (Surface::Poly(f), Surface::Poly(g)) => Some(g.eval(x, y) - f.eval(x, y)),
            _ => None,
        }
    }

    fn sample(&self, surface: &Surface, grid: &Grid2D) -> Result<ScalarField> {
        match surface {
            Surface::Poly(p) => {
                let mut out = ScalarField::zeros(grid);
                for j in 0..grid.ny {
                    for i in 0..grid.nx {
                        let (x, y) = grid.center(i, j);
                        out.values[grid.idx(i, j)] = p.eval(x, y);
                    }
                }
                Ok(out)
            }
            Surface::Sampled(s) => {
                s.check_grid(grid)?;
                Ok(s.clone())
            }
        }
    }

    /// `(f + g) / 2` at every cell center of the array.
    pub fn sample_midsurface(&self, grid: &Grid2D) -> Result<ScalarField> {
        let f = self.sample(&self.lower, grid)?;
        let g = self.sample(&self.upper, grid)?;
        Ok(ScalarField {
            nx: grid.nx,
            ny: grid.ny,
            values: f.values.iter().zip(&g.values).map(|(a, b)| 0.5 * (a + b)).collect(),
        })
    }

    /// Gradient of the midsurface at cell `(i, j)`: analytic for polynomial
    /// surfaces, centered differences (one-sided at the array edge) otherwise.
    fn midsurface_grad(&self, grid: &Grid2D, mid: &ScalarField, i: usize, j: usize) -> (f64, f64) {
        if let Some(p) = self.midsurface_poly() {
            let (x, y) = grid.center(i, j);
            return p.grad(x, y);
        }
        let d = |lo: (usize, usize), hi: (usize, usize), steps: f64| {
            (mid.get(hi.0, hi.1) - mid.get(lo.0, lo.1)) / (steps * grid.h)
        };
        let gx = match (i > 0, i + 1 < grid.nx) {
            (true, true) => d((i - 1, j), (i + 1, j), 2.0),
            (false, true) => d((i, j), (i + 1, j), 1.0),
            (true, false) => d((i - 1, j), (i, j), 1.0),
            (false, false) => 0.0,
        };
        let gy = match (j > 0, j + 1 < grid.ny) {
            (true, true) => d((i, j - 1), (i, j + 1), 2.0),
            (false, true) => d((i, j), (i, j + 1), 1.0),
            (true, false) => d((i, j - 1), (i, j), 1.0),
            (false, false) => 0.0,
        };
        (gx, gy)
    }
}

/// Normalized applied field `H` (the `log κ` factor divided out).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AppliedField {
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
}

impl AppliedField {
    pub fn new(h1: f64, h2: f64, h3: f64) -> Self {
        Self { h1, h2, h3 }
    }

    pub fn scaled(self, s: f64) -> Self {
        Self::new(self.h1 * s, self.h2 * s, self.h3 * s)
    }

    /// Squared magnitude of the in-plane part `H'`.
    pub fn parallel_sq(&self) -> f64 {
        self.h1 * self.h1 + self.h2 * self.h2
    }

    pub fn is_finite(&self) -> bool {
        self.h1.is_finite() && self.h2.is_finite() && self.h3.is_finite()
    }
}

/// Thickness `a = g - f` at the cell centers; errors on the first inside cell
/// where it is not strictly positive.
pub fn thickness_field(film: &FilmGeometry, grid: &Grid2D) -> Result<ScalarField> {
    let f = film.sample(&film.lower, grid)?;
    let g = film.sample(&film.upper, grid)?;
    let mut a = ScalarField::zeros(grid);
    for (i, j, k) in grid.cells() {
        let v = g.values[k] - f.values[k];
        if !(v > 0.0) {
            return Err(Error::NonPositiveThickness { i, j, value: v });
        }
        a.values[k] = v;
    }
    Ok(a)
}

/// Effective field `F` and vector potential `B` at the cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveFieldData {
    pub f: ScalarField,
    pub bx: ScalarField,
    pub by: ScalarField,
}

/// Vector potential at a point given the midsurface height there.
#[inline]
pub fn vector_potential(applied: AppliedField, x: f64, y: f64, mid: f64) -> (f64, f64) {
    (
        -0.5 * applied.h3 * y + mid * applied.h2,
        0.5 * applied.h3 * x - mid * applied.h1,
    )
}

pub fn effective_field(film: &FilmGeometry, applied: AppliedField, grid: &Grid2D) -> Result<EffectiveFieldData> {
    if !applied.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "applied field {applied:?} is not finite"
        )));
    }
    let mid = film.sample_midsurface(grid)?;
    let mut f = ScalarField::zeros(grid);
    let mut bx = ScalarField::zeros(grid);
    let mut by = ScalarField::zeros(grid);
    for (i, j, k) in grid.cells() {
        let (gx, gy) = film.midsurface_grad(grid, &mid, i, j);
        f.values[k] = applied.h3 - (applied.h1 * gx + applied.h2 * gy);
        let (x, y) = grid.center(i, j);
        let (b1, b2) = vector_potential(applied, x, y, mid.values[k]);
        bx.values[k] = b1;
        by.values[k] = b2;
    }
    Ok(EffectiveFieldData { f, bx, by })
}

/// Maximum over interior cells (all four neighbours inside) of
/// `|∂1 B2 - ∂2 B1 - F|` with centered differences.
pub fn vector_potential_check(data: &EffectiveFieldData, grid: &Grid2D) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, j, k) in grid.cells() {
        let nb = |di, dj| grid.neighbor(i, j, di, dj);
        let (Some(w), Some(e), Some(s), Some(n)) = (nb(-1, 0), nb(1, 0), nb(0, -1), nb(0, 1)) else {
            continue;
        };
        let curl = (data.by.values[e] - data.by.values[w]) / (2.0 * grid.h)
            - (data.bx.values[n] - data.bx.values[s]) / (2.0 * grid.h);
        worst = worst.max((curl - data.f.values[k]).abs());
    }
    worst
}

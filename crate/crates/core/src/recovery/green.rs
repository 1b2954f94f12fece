use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use super::VortexConfiguration;
use crate::error::{Error, Result};
use crate::fields::MeasureField;
use crate::grid::{Grid2D, ScalarField};
use crate::hodge::face_weights;
use crate::linsolve::{pcg, CsrMatrix};
use crate::staggered::{Complex, FaceField, NodeField};

/// Quadrature nodes per core circle.
pub const QUADRATURE_NODES: usize = 16;

const MAX_CG: usize = 200_000;

/// Dirichlet Green's function of `-∇·((1/a)∇·)` on the grid nodes, with
/// point masses spread bilinearly onto the four surrounding nodes. Columns
/// are solved on demand and cached.
#[derive(Debug)]
pub struct GreenOperator {
    pub cx: Complex,
    pub a: ScalarField,
    pub inv_af: FaceField,
    pub tol: f64,
    matrix: CsrMatrix,
    row_of: Vec<Option<usize>>,
    cache: Mutex<HashMap<usize, Arc<Vec<f64>>>>,
}

impl GreenOperator {
    pub fn new(grid: &Grid2D, a: &ScalarField, tol: f64) -> Result<Self> {
        let cx = Complex::new(grid);
        Self::from_complex(cx, a, tol)
    }

    pub fn from_complex(cx: Complex, a: &ScalarField, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
        }
        let (_, inv_af) = face_weights(&cx, a)?;
        if cx.interior_nodes.is_empty() {
            return Err(Error::EmptyMask { resolution: cx.grid.nx });
        }
        let (matrix, row_of) = cx.node_matrix(&inv_af);
        Ok(Self {
            a: a.clone(),
            inv_af,
            tol,
            matrix,
            row_of,
            cache: Mutex::new(HashMap::new()),
            cx,
        })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.cx.grid
    }

    /// Solves `A ψ = rhs` (a density on the nodes), zero on boundary nodes.
    pub fn solve(&self, rhs: &NodeField) -> Result<NodeField> {
        let b: Vec<f64> = self.cx.interior_nodes.iter().map(|&n| rhs.values[n]).collect();
        let mut x = vec![0.0; self.matrix.n];
        pcg(&self.matrix, &b, &mut x, self.tol, MAX_CG)?;
        let mut psi = self.cx.node_zeros();
        for (r, &n) in self.cx.interior_nodes.iter().enumerate() {
            psi.values[n] = x[r];
        }
        Ok(psi)
    }

    /// Potential of a unit mass at node `n`; zero for boundary nodes.
    pub fn column(&self, n: usize) -> Result<Arc<Vec<f64>>> {
        if let Some(c) = self.cache.lock().expect("cache lock").get(&n) {
            return Ok(c.clone());
        }
        let mut rhs = self.cx.node_zeros();
        let col = if self.row_of[n].is_some() {
            rhs.values[n] = 1.0 / self.cx.grid.cell_area();
            Arc::new(self.solve(&rhs)?.values)
        } else {
            Arc::new(rhs.values)
        };
        self.cache.lock().expect("cache lock").insert(n, col.clone());
        Ok(col)
    }

    /// Solves the missing columns for `nodes` in parallel.
    pub fn prefetch(&self, nodes: &[usize]) -> Result<()> {
        let missing: Vec<usize> = {
            let cache = self.cache.lock().expect("cache lock");
            let mut m: Vec<usize> = nodes.iter().copied().filter(|n| !cache.contains_key(n)).collect();
            m.sort_unstable();
            m.dedup();
            m
        };
        missing
            .par_iter()
            .map(|&n| self.column(n).map(|_| ()))
            .collect::<Result<Vec<()>>>()?;
        Ok(())
    }

    pub fn cached_columns(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }

    /// Bilinear weights of the four nodes around `(x, y)`.
    pub fn spread(&self, x: f64, y: f64) -> Result<[(usize, f64); 4]> {
        let g = &self.cx.grid;
        let fx = (x - g.origin.0) / g.h;
        let fy = (y - g.origin.1) / g.h;
        if !(fx >= 0.0 && fy >= 0.0 && fx <= g.nx as f64 && fy <= g.ny as f64) {
            return Err(Error::InvalidParameter(format!(
                "point ({x}, {y}) lies outside the grid"
            )));
        }
        let i = (fx.floor() as usize).min(g.nx - 1);
        let j = (fy.floor() as usize).min(g.ny - 1);
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        Ok([
            (self.cx.node(i, j), (1.0 - tx) * (1.0 - ty)),
            (self.cx.node(i + 1, j), tx * (1.0 - ty)),
            (self.cx.node(i, j + 1), (1.0 - tx) * ty),
            (self.cx.node(i + 1, j + 1), tx * ty),
        ])
    }

    /// Bilinear interpolation of a node field.
    pub fn interpolate(&self, values: &[f64], x: f64, y: f64) -> Result<f64> {
        Ok(self.spread(x, y)?.iter().map(|&(n, w)| w * values[n]).sum())
    }

    /// `G(x, y)`, symmetric in its arguments up to the solver tolerance.
    pub fn value(&self, x: (f64, f64), y: (f64, f64)) -> Result<f64> {
        let sx = self.spread(x.0, x.1)?;
        let mut s = 0.0;
        for (m, wy) in self.spread(y.0, y.1)? {
            if wy == 0.0 {
                continue;
            }
            let col = self.column(m)?;
            s += wy * sx.iter().map(|&(n, wx)| wx * col[n]).sum::<f64>();
        }
        Ok(s)
    }

    /// Thickness at the cell containing `(x, y)`.
    pub fn a_at(&self, x: f64, y: f64) -> Result<f64> {
        let g = &self.cx.grid;
        match g.locate(x, y) {
            Some((i, j)) if g.inside[g.idx(i, j)] => Ok(self.a.get(i, j)),
            _ => Err(Error::InvalidParameter(format!(
                "point ({x}, {y}) is outside the domain"
            ))),
        }
    }

    /// Regular part `γ(p, p)` of `G(x, p) = -(a(p)/2π) log|x - p| + γ(x, p)`,
    /// averaged over nodes between 3h and 6h from `p`.
    pub fn regular_part(&self, p: (f64, f64)) -> Result<f64> {
        let g = &self.cx.grid;
        let ap = self.a_at(p.0, p.1)?;
        let sp = self.spread(p.0, p.1)?;
        let cols = sp
            .iter()
            .map(|&(m, w)| self.column(m).map(|c| (c, w)))
            .collect::<Result<Vec<_>>>()?;
        let (ci, cj) = (((p.0 - g.origin.0) / g.h) as isize, ((p.1 - g.origin.1) / g.h) as isize);
        let (mut sum, mut count) = (0.0, 0usize);
        for dj in -7..=7 {
            for di in -7..=7 {
                let (ni, nj) = (ci + di, cj + dj);
                if ni < 0 || nj < 0 || ni > g.nx as isize || nj > g.ny as isize {
                    continue;
                }
                let n = self.cx.node(ni as usize, nj as usize);
                if self.row_of[n].is_none() {
                    continue;
                }
                let (x, y) = self.cx.node_position(n);
                let r = (x - p.0).hypot(y - p.1) / g.h;
                if !(3.0..=6.0).contains(&r) {
                    continue;
                }
                let gv: f64 = cols.iter().map(|(c, w)| w * c[n]).sum();
                sum += gv + ap / (2.0 * PI) * (r * g.h).ln();
                count += 1;
            }
        }
        if count == 0 {
            return Err(Error::CoreOnBoundary {
                x: p.0,
                y: p.1,
                radius: 6.0 * g.h,
            });
        }
        Ok(sum / count as f64)
    }

    /// Node masses of a cell measure, a quarter of each cell mass per corner.
    pub fn node_masses(&self, mu: &MeasureField) -> Result<NodeField> {
        let g = &self.cx.grid;
        mu.density.check_grid(g)?;
        let h2 = g.cell_area();
        let mut m = self.cx.node_zeros();
        for (i, j, k) in g.cells() {
            let q = 0.25 * mu.density.values[k] * h2;
            for (ni, nj) in [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)] {
                m.values[self.cx.node(ni, nj)] += q;
            }
        }
        Ok(m)
    }

    /// Potential `ψ = G * m` of node masses.
    pub fn potential(&self, masses: &NodeField) -> Result<NodeField> {
        let h2 = self.cx.grid.cell_area();
        let rhs = NodeField {
            values: masses.values.iter().map(|m| m / h2).collect(),
        };
        self.solve(&rhs)
    }

    /// `∬ G dμ dμ` for a cell measure.
    pub fn measure_energy(&self, mu: &MeasureField) -> Result<f64> {
        let m = self.node_masses(mu)?;
        let psi = self.potential(&m)?;
        Ok(m.values.iter().zip(&psi.values).map(|(a, b)| a * b).sum())
    }

    /// Averaged bilinear weights of the quadrature nodes on the core circle
    /// around `p`.
    fn circle_weights(&self, p: (f64, f64), radius: f64) -> Result<Vec<(usize, f64)>> {
        let mut acc: HashMap<usize, f64> = HashMap::new();
        for (x, y) in circle_nodes(p, radius, 0.0) {
            for (n, w) in self.spread(x, y)? {
                *acc.entry(n).or_insert(0.0) += w / QUADRATURE_NODES as f64;
            }
        }
        let mut v: Vec<(usize, f64)> = acc.into_iter().filter(|&(_, w)| w != 0.0).collect();
        v.sort_unstable_by_key(|&(n, _)| n);
        Ok(v)
    }

    /// `(1/N²) Σ_{i≠j} σ_i σ_j ∬ G dμ_i dμ_j` with `μ_i` uniform of mass `2π`
    /// on the core circle of vortex `i`, by 16-node circle quadrature.
    pub fn pair_energy(&self, config: &VortexConfiguration) -> Result<f64> {
        let n = config.len();
        if n < 2 {
            return Ok(0.0);
        }
        let weights = config
            .points
            .iter()
            .map(|&p| self.circle_weights(p, config.core_radius))
            .collect::<Result<Vec<_>>>()?;
        let nodes: Vec<usize> = weights.iter().flatten().map(|&(n, _)| n).collect();
        self.prefetch(&nodes)?;
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let mut s = 0.0;
                for &(m, wm) in &weights[j] {
                    let col = self.column(m)?;
                    s += wm * weights[i].iter().map(|&(k, wk)| wk * col[k]).sum::<f64>();
                }
                total += f64::from(config.signs[i]) * f64::from(config.signs[j]) * s;
            }
        }
        Ok(4.0 * PI * PI * total / (n * n) as f64)
    }
}

/// Equispaced quadrature nodes on a circle, rotated by `offset` node spacings.
pub(crate) fn circle_nodes(p: (f64, f64), radius: f64, offset: f64) -> impl Iterator<Item = (f64, f64)> {
    (0..QUADRATURE_NODES).map(move |k| {
        let t = 2.0 * PI * (k as f64 + offset) / QUADRATURE_NODES as f64;
        (p.0 + radius * t.cos(), p.1 + radius * t.sin())
    })
}

/// `(1/N²) Σ_i ∬ (a(x)/2π) log(1/|x - y|) dμ_i(x) dμ_i(y)` over each core
/// circle, `μ_i` of mass `2π`. The two node sets are offset by half a
/// spacing so the logarithm is never evaluated at zero.
pub fn self_energy(config: &VortexConfiguration, grid: &Grid2D, a: &ScalarField) -> Result<f64> {
    a.check_grid(grid)?;
    let n = config.len();
    if n == 0 {
        return Ok(0.0);
    }
    let a_at = |x: f64, y: f64| match grid.locate(x, y) {
        Some((i, j)) if grid.inside[grid.idx(i, j)] => Ok(a.get(i, j)),
        _ => Err(Error::CoreOnBoundary {
            x,
            y,
            radius: config.core_radius,
        }),
    };
    let q = QUADRATURE_NODES as f64;
    let mut total = 0.0;
    for &p in &config.points {
        let mut s = 0.0;
        for x in circle_nodes(p, config.core_radius, 0.0) {
            let ax = a_at(x.0, x.1)?;
            for y in circle_nodes(p, config.core_radius, 0.5) {
                s -= ax / (2.0 * PI) * (x.0 - y.0).hypot(x.1 - y.1).ln();
            }
        }
        total += 4.0 * PI * PI * s / (q * q);
    }
    Ok(total / (n * n) as f64)
}

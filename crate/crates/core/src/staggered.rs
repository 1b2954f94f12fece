//! Staggered discretization on the masked grid: scalars on cells and on cell
//! corners (nodes), vector fields by their normal components on the faces
//! shared by two inside cells.
//!
//! The face gradient of a cell scalar and the rotated gradient of a node
//! scalar, together with their negative adjoints `div` and `curl`, satisfy
//! `curl ∇ = 0` and `div ∇⊥ = 0` exactly, which makes the orthogonality of
//! the weighted Hodge split exact rather than approximate.

use crate::fields::CurrentField;
use crate::grid::{Grid2D, ScalarField};
use crate::linsolve::CsrMatrix;

/// Normal components on faces. `x[k]` lives on the face between cell `k` and
/// its east neighbour, `y[k]` between `k` and its north neighbour; entries
/// for missing faces are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceField {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Values on the `(nx + 1) × (ny + 1)` cell corners.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeField {
    pub values: Vec<f64>,
}

/// Role of a node: interior (all four adjacent cells inside) or on the
/// boundary of outside component `c` (`0` is the exterior, `1..=m` holes).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    Interior,
    Boundary(usize),
}

/// Face and node bookkeeping for a grid.
#[derive(Debug, Clone)]
pub struct Complex {
    pub grid: Grid2D,
    pub x_faces: Vec<usize>,
    pub y_faces: Vec<usize>,
    pub node_class: Vec<NodeClass>,
    pub interior_nodes: Vec<usize>,
    pub holes: usize,
}

impl FaceField {
    pub fn zeros(grid: &Grid2D) -> Self {
        Self {
            x: vec![0.0; grid.len()],
            y: vec![0.0; grid.len()],
        }
    }

    pub fn axpy(&self, s: f64, other: &FaceField) -> FaceField {
        let f = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u + s * v).collect();
        FaceField {
            x: f(&self.x, &other.x),
            y: f(&self.y, &other.y),
        }
    }

    pub fn scale(&self, s: f64) -> FaceField {
        FaceField {
            x: self.x.iter().map(|v| v * s).collect(),
            y: self.y.iter().map(|v| v * s).collect(),
        }
    }
}

impl Complex {
    pub fn new(grid: &Grid2D) -> Self {
        let (nx, ny) = (grid.nx, grid.ny);
        let mut x_faces = Vec::new();
        let mut y_faces = Vec::new();
        for (i, j, k) in grid.cells() {
            if grid.neighbor(i, j, 1, 0).is_some() {
                x_faces.push(k);
            }
            if grid.neighbor(i, j, 0, 1).is_some() {
                y_faces.push(k);
            }
        }
        let (labels, holes) = grid.outside_components();
        let mut node_class = Vec::with_capacity((nx + 1) * (ny + 1));
        let mut interior_nodes = Vec::new();
        for nj in 0..=ny {
            for ni in 0..=nx {
                let mut class = NodeClass::Interior;
                for (ci, cj) in [
                    (ni as isize - 1, nj as isize - 1),
                    (ni as isize, nj as isize - 1),
                    (ni as isize - 1, nj as isize),
                    (ni as isize, nj as isize),
                ] {
                    if grid.is_inside(ci, cj) {
                        continue;
                    }
                    let c = if ci < 0 || cj < 0 || ci as usize >= nx || cj as usize >= ny {
                        0
                    } else {
                        labels[cj as usize * nx + ci as usize].unwrap_or(0)
                    };
                    class = match class {
                        // a hole label wins over the exterior
                        NodeClass::Boundary(prev) => NodeClass::Boundary(prev.max(c)),
                        NodeClass::Interior => NodeClass::Boundary(c),
                    };
                }
                if class == NodeClass::Interior {
                    interior_nodes.push(node_class.len());
                }
                node_class.push(class);
            }
        }
        Self {
            grid: grid.clone(),
            x_faces,
            y_faces,
            node_class,
            interior_nodes,
            holes,
        }
    }

    #[inline]
    pub fn node(&self, ni: usize, nj: usize) -> usize {
        nj * (self.grid.nx + 1) + ni
    }

    pub fn node_count(&self) -> usize {
        (self.grid.nx + 1) * (self.grid.ny + 1)
    }

    pub fn node_position(&self, n: usize) -> (f64, f64) {
        let w = self.grid.nx + 1;
        let (ni, nj) = (n % w, n / w);
        (
            self.grid.origin.0 + ni as f64 * self.grid.h,
            self.grid.origin.1 + nj as f64 * self.grid.h,
        )
    }

    pub fn node_zeros(&self) -> NodeField {
        NodeField {
            values: vec![0.0; self.node_count()],
        }
    }

    /// Endpoints `(start, end)` of the x face east of cell `k`, bottom to top.
    #[inline]
    fn x_face_nodes(&self, k: usize) -> (usize, usize) {
        let (i, j) = (k % self.grid.nx, k / self.grid.nx);
        (self.node(i + 1, j), self.node(i + 1, j + 1))
    }

    /// Endpoints `(start, end)` of the y face north of cell `k`, left to right.
    #[inline]
    fn y_face_nodes(&self, k: usize) -> (usize, usize) {
        let (i, j) = (k % self.grid.nx, k / self.grid.nx);
        (self.node(i, j + 1), self.node(i + 1, j + 1))
    }

    /// Arithmetic mean of a cell field onto faces.
    pub fn face_average(&self, a: &ScalarField) -> FaceField {
        let nx = self.grid.nx;
        let mut f = FaceField::zeros(&self.grid);
        for &k in &self.x_faces {
            f.x[k] = 0.5 * (a.values[k] + a.values[k + 1]);
        }
        for &k in &self.y_faces {
            f.y[k] = 0.5 * (a.values[k] + a.values[k + nx]);
        }
        f
    }

    pub fn face_map(&self, f: &FaceField, op: impl Fn(f64) -> f64) -> FaceField {
        let mut out = FaceField::zeros(&self.grid);
        for &k in &self.x_faces {
            out.x[k] = op(f.x[k]);
        }
        for &k in &self.y_faces {
            out.y[k] = op(f.y[k]);
        }
        out
    }

    pub fn face_mul(&self, w: &FaceField, f: &FaceField) -> FaceField {
        let mut out = FaceField::zeros(&self.grid);
        for &k in &self.x_faces {
            out.x[k] = w.x[k] * f.x[k];
        }
        for &k in &self.y_faces {
            out.y[k] = w.y[k] * f.y[k];
        }
        out
    }

    /// Face gradient of a cell scalar.
    pub fn grad(&self, z: &ScalarField) -> FaceField {
        let (nx, h) = (self.grid.nx, self.grid.h);
        let mut f = FaceField::zeros(&self.grid);
        for &k in &self.x_faces {
            f.x[k] = (z.values[k + 1] - z.values[k]) / h;
        }
        for &k in &self.y_faces {
            f.y[k] = (z.values[k + nx] - z.values[k]) / h;
        }
        f
    }

    /// `∇⊥ψ = (-∂2 ψ, ∂1 ψ)` of a node scalar, as face normal components.
    pub fn perp_grad(&self, psi: &NodeField) -> FaceField {
        let h = self.grid.h;
        let mut f = FaceField::zeros(&self.grid);
        for &k in &self.x_faces {
            let (s, e) = self.x_face_nodes(k);
            f.x[k] = -(psi.values[e] - psi.values[s]) / h;
        }
        for &k in &self.y_faces {
            let (s, e) = self.y_face_nodes(k);
            f.y[k] = (psi.values[e] - psi.values[s]) / h;
        }
        f
    }

    /// Cellwise divergence, the negative adjoint of [`Complex::grad`] (no
    /// flux through missing faces).
    pub fn div(&self, f: &FaceField) -> ScalarField {
        let (nx, h) = (self.grid.nx, self.grid.h);
        let mut d = ScalarField::zeros(&self.grid);
        for &k in &self.x_faces {
            d.values[k] += f.x[k] / h;
            d.values[k + 1] -= f.x[k] / h;
        }
        for &k in &self.y_faces {
            d.values[k] += f.y[k] / h;
            d.values[k + nx] -= f.y[k] / h;
        }
        d
    }

    /// Curl at interior nodes, the negative adjoint of
    /// [`Complex::perp_grad`] on fields vanishing off the interior nodes.
    pub fn curl(&self, f: &FaceField) -> NodeField {
        let h = self.grid.h;
        let mut c = self.node_zeros();
        for &k in &self.x_faces {
            let (s, e) = self.x_face_nodes(k);
            c.values[s] -= f.x[k] / h;
            c.values[e] += f.x[k] / h;
        }
        for &k in &self.y_faces {
            let (s, e) = self.y_face_nodes(k);
            c.values[s] += f.y[k] / h;
            c.values[e] -= f.y[k] / h;
        }
        for (v, class) in c.values.iter_mut().zip(&self.node_class) {
            if *class != NodeClass::Interior {
                *v = 0.0;
            }
        }
        c
    }

    /// `Σ w u·v h²` over faces.
    pub fn inner(&self, u: &FaceField, v: &FaceField, w: &FaceField) -> f64 {
        let xs: f64 = self.x_faces.iter().map(|&k| w.x[k] * u.x[k] * v.x[k]).sum();
        let ys: f64 = self.y_faces.iter().map(|&k| w.y[k] * u.y[k] * v.y[k]).sum();
        (xs + ys) * self.grid.cell_area()
    }

    /// Face normal components from a cell field by averaging the two
    /// adjacent cells.
    pub fn from_cells(&self, c: &CurrentField) -> FaceField {
        let nx = self.grid.nx;
        let mut f = FaceField::zeros(&self.grid);
        for &k in &self.x_faces {
            f.x[k] = 0.5 * (c.jx.values[k] + c.jx.values[k + 1]);
        }
        for &k in &self.y_faces {
            f.y[k] = 0.5 * (c.jy.values[k] + c.jy.values[k + nx]);
        }
        f
    }

    /// Cell field from faces, averaging the faces present on each axis.
    pub fn to_cells(&self, f: &FaceField) -> CurrentField {
        let g = &self.grid;
        let nx = g.nx;
        let mut c = CurrentField::zeros(g);
        let mut sx = vec![(0.0, 0u8); g.len()];
        let mut sy = vec![(0.0, 0u8); g.len()];
        for &k in &self.x_faces {
            for t in [k, k + 1] {
                sx[t].0 += f.x[k];
                sx[t].1 += 1;
            }
        }
        for &k in &self.y_faces {
            for t in [k, k + nx] {
                sy[t].0 += f.y[k];
                sy[t].1 += 1;
            }
        }
        for (_, _, k) in g.cells() {
            if sx[k].1 > 0 {
                c.jx.values[k] = sx[k].0 / sx[k].1 as f64;
            }
            if sy[k].1 > 0 {
                c.jy.values[k] = sy[k].0 / sy[k].1 as f64;
            }
        }
        c
    }

    /// Node edges `(n, m, face weight)`, one per face.
    fn node_edges<'a>(&'a self, w: &'a FaceField) -> impl Iterator<Item = (usize, usize, f64)> + 'a {
        self.x_faces
            .iter()
            .map(move |&k| {
                let (s, e) = self.x_face_nodes(k);
                (s, e, w.x[k])
            })
            .chain(self.y_faces.iter().map(move |&k| {
                let (s, e) = self.y_face_nodes(k);
                (s, e, w.y[k])
            }))
    }

    /// `(A ψ)_n = h⁻² Σ_faces w_f (ψ_n - ψ_other)` at every node, where the
    /// faces run along the node edges. With `w = 1/a` this is the
    /// discretization of `-∇·((1/a)∇ψ)` and `A = -curl(w ∇⊥·)`.
    pub fn node_operator_apply(&self, w: &FaceField, psi: &NodeField) -> NodeField {
        let h2 = self.grid.cell_area();
        let mut out = self.node_zeros();
        for (s, e, wf) in self.node_edges(w) {
            let d = wf * (psi.values[s] - psi.values[e]) / h2;
            out.values[s] += d;
            out.values[e] -= d;
        }
        out
    }

    /// Matrix of the node operator restricted to interior nodes (zero
    /// Dirichlet data elsewhere), and the node → row map.
    pub fn node_matrix(&self, w: &FaceField) -> (CsrMatrix, Vec<Option<usize>>) {
        let h2 = self.grid.cell_area();
        let mut row_of = vec![None; self.node_count()];
        for (r, &n) in self.interior_nodes.iter().enumerate() {
            row_of[n] = Some(r);
        }
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::with_capacity(5); self.interior_nodes.len()];
        let mut diag = vec![0.0; self.interior_nodes.len()];
        for (s, e, wf) in self.node_edges(w) {
            let c = wf / h2;
            match (row_of[s], row_of[e]) {
                (Some(a), Some(b)) => {
                    rows[a].push((b, -c));
                    rows[b].push((a, -c));
                    diag[a] += c;
                    diag[b] += c;
                }
                (Some(a), None) => diag[a] += c,
                (None, Some(b)) => diag[b] += c,
                (None, None) => {}
            }
        }
        for (r, row) in rows.iter_mut().enumerate() {
            row.push((r, diag[r]));
            row.sort_by_key(|&(c, _)| c);
        }
        (CsrMatrix::from_rows(rows), row_of)
    }

    /// Weighted graph Laplacian on inside cells, `(K ζ)_c = Σ w_f (ζ_c -
    /// ζ_other)`, with cell `pin` removed to make it definite. Returns the
    /// matrix and the cell → row map.
    pub fn cell_matrix(&self, w: &FaceField, pin: usize) -> (CsrMatrix, Vec<Option<usize>>) {
        let g = &self.grid;
        let nx = g.nx;
        let mut row_of = vec![None; g.len()];
        let mut n = 0;
        for (_, _, k) in g.cells() {
            if k != pin {
                row_of[k] = Some(n);
                n += 1;
            }
        }
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::with_capacity(5); n];
        let mut diag = vec![0.0; n];
        let edges = self
            .x_faces
            .iter()
            .map(|&k| (k, k + 1, w.x[k]))
            .chain(self.y_faces.iter().map(|&k| (k, k + nx, w.y[k])));
        for (a, b, wf) in edges {
            match (row_of[a], row_of[b]) {
                (Some(p), Some(q)) => {
                    rows[p].push((q, -wf));
                    rows[q].push((p, -wf));
                    diag[p] += wf;
                    diag[q] += wf;
                }
                (Some(p), None) => diag[p] += wf,
                (None, Some(q)) => diag[q] += wf,
                (None, None) => {}
            }
        }
        for (r, row) in rows.iter_mut().enumerate() {
            row.push((r, diag[r]));
            row.sort_by_key(|&(c, _)| c);
        }
        (CsrMatrix::from_rows(rows), row_of)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, DomainSpec};

    fn wavy_nodes(c: &Complex) -> NodeField {
        let mut p = c.node_zeros();
        for &n in &c.interior_nodes {
            let (x, y) = c.node_position(n);
            p.values[n] = (3.0 * x).sin() * (2.0 * y + 0.3).cos();
        }
        p
    }

    #[test]
    fn curl_of_gradient_and_divergence_of_rotated_gradient_vanish() {
        let g = build_grid(&DomainSpec::annulus(0.3, 1.0), 24).unwrap();
        let c = Complex::new(&g);
        let z = ScalarField::from_fn(&g, |x, y| x * x * y + (x - y).exp());
        let curl = c.curl(&c.grad(&z));
        assert!(curl.values.iter().all(|v| v.abs() < 1e-9));
        let d = c.div(&c.perp_grad(&wavy_nodes(&c)));
        assert!(d.values.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn adjoint_pairings() {
        let g = build_grid(&DomainSpec::unit_disk(), 20).unwrap();
        let c = Complex::new(&g);
        let one = c.face_average(&ScalarField::constant(&g, 1.0));
        let z = ScalarField::from_fn(&g, |x, y| x - 2.0 * y * y);
        let mut f = FaceField::zeros(&g);
        for &k in &c.x_faces {
            f.x[k] = (k as f64 * 0.37).sin();
        }
        for &k in &c.y_faces {
            f.y[k] = (k as f64 * 0.11).cos();
        }
        let h2 = g.cell_area();
        let lhs = c.inner(&c.grad(&z), &f, &one);
        let rhs = -g
            .cells()
            .map(|(_, _, k)| z.values[k] * c.div(&f).values[k])
            .sum::<f64>()
            * h2;
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
        let psi = wavy_nodes(&c);
        let lhs = c.inner(&c.perp_grad(&psi), &f, &one);
        let cu = c.curl(&f);
        let rhs = -psi.values.iter().zip(&cu.values).map(|(p, q)| p * q).sum::<f64>() * h2;
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
    }

    #[test]
    fn node_operator_matches_curl_form() {
        let g = build_grid(&DomainSpec::unit_disk(), 20).unwrap();
        let c = Complex::new(&g);
        let a = ScalarField::from_fn(&g, |x, y| 1.0 + 0.3 * x * y);
        let w = c.face_map(&c.face_average(&a), |v| 1.0 / v);
        let psi = wavy_nodes(&c);
        let lhs = c.node_operator_apply(&w, &psi);
        let rhs = c.curl(&c.face_mul(&w, &c.perp_grad(&psi)));
        let (m, row_of) = c.node_matrix(&w);
        let x: Vec<f64> = c.interior_nodes.iter().map(|&n| psi.values[n]).collect();
        let mx = m.mul(&x);
        for &n in &c.interior_nodes {
            assert!((lhs.values[n] + rhs.values[n]).abs() < 1e-8);
            assert!((lhs.values[n] - mx[row_of[n].unwrap()]).abs() < 1e-8);
        }
    }

    #[test]
    fn annulus_nodes_are_classified() {
        let g = build_grid(&DomainSpec::annulus(0.4, 1.0), 32).unwrap();
        let c = Complex::new(&g);
        assert_eq!(c.holes, 1);
        let near_hole = c
            .node_class
            .iter()
            .enumerate()
            .filter(|(_, &cl)| cl == NodeClass::Boundary(1))
            .map(|(n, _)| {
                let (x, y) = c.node_position(n);
                x.hypot(y)
            });
        for r in near_hole {
            assert!(r < 0.4 + 2.0 * g.h);
        }
    }

    #[test]
    fn cell_face_round_trip_of_constant_field() {
        let g = build_grid(&DomainSpec::unit_disk(), 16).unwrap();
        let c = Complex::new(&g);
        let v = CurrentField::from_fn(&g, |_, _| (0.5, -2.0));
        let back = c.to_cells(&c.from_cells(&v));
        for (_, _, k) in g.cells() {
            assert!((back.jx.values[k] - 0.5).abs() < 1e-15);
            assert!((back.jy.values[k] + 2.0).abs() < 1e-15);
        }
    }
}

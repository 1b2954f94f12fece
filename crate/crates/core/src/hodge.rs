//! Weighted Hodge decomposition `Z = U + V + W` with respect to
//! `⟨v, w⟩ = Σ a v·w h²`:
//!
//! * `U = -(1/a) ∇⊥ψ`, `ψ = 0` on the boundary,
//! * `V = ∇ζ`,
//! * `W` with `curl W = 0` and `div(a W) = 0`, no flux through the boundary;
//!   nonzero only when the footprint has holes.
//!
//! Fields live on faces (see [`crate::staggered`]); cell-centered fields are
//! averaged onto faces first.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::CurrentField;
use crate::grid::{Grid2D, ScalarField};
use crate::linsolve::{pcg, CgReport};
use crate::staggered::{Complex, FaceField, NodeClass, NodeField};

/// Relative residual used for the potential solves.
pub const DEFAULT_TOL: f64 = 1e-12;
const MAX_CG: usize = 200_000;

#[derive(Debug, Clone)]
pub struct HodgeSplit {
    pub u: FaceField,
    pub v: FaceField,
    pub w: FaceField,
    pub psi: NodeField,
    pub zeta: ScalarField,
    /// `|Σ div(a Z)|` relative to `Σ |div(a Z)|` before projection.
    pub compatibility_defect: f64,
    pub psi_solve: CgReport,
    pub zeta_solve: CgReport,
}

/// Orthogonality and reconstruction measures of a split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HodgeReport {
    pub norm_sq: f64,
    /// `‖Z - U - V - W‖ / ‖Z‖`.
    pub reconstruction: f64,
    /// `|⟨U, V⟩| / ‖Z‖²` and likewise.
    pub uv: f64,
    pub uw: f64,
    pub vw: f64,
    /// `|‖Z‖² - ‖U‖² - ‖V‖² - ‖W‖²| / ‖Z‖²`.
    pub pythagoras: f64,
    pub compatibility_defect: f64,
}

impl HodgeReport {
    pub fn worst(&self) -> f64 {
        [self.reconstruction, self.uv, self.uw, self.vw, self.pythagoras]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Face weights `(a_f, 1/a_f)` with `a_f` the mean of the adjacent cells.
pub fn face_weights(cx: &Complex, a: &ScalarField) -> Result<(FaceField, FaceField)> {
    a.check_grid(&cx.grid)?;
    for (i, j, k) in cx.grid.cells() {
        if !(a.values[k] > 0.0) {
            return Err(Error::NonPositiveThickness {
                i,
                j,
                value: a.values[k],
            });
        }
    }
    let af = cx.face_average(a);
    let inv = cx.face_map(&af, |v| 1.0 / v);
    Ok((af, inv))
}

/// Solves `A ψ = rhs` on interior nodes with `ψ` fixed to `boundary` on the
/// other nodes.
fn solve_nodes(
    cx: &Complex,
    inv_af: &FaceField,
    rhs: &NodeField,
    boundary: Option<&NodeField>,
    tol: f64,
) -> Result<(NodeField, CgReport)> {
    let (m, row_of) = cx.node_matrix(inv_af);
    let mut b: Vec<f64> = cx.interior_nodes.iter().map(|&n| rhs.values[n]).collect();
    if let Some(bd) = boundary {
        let lifted = cx.node_operator_apply(inv_af, bd);
        for &n in &cx.interior_nodes {
            b[row_of[n].expect("interior row")] -= lifted.values[n];
        }
    }
    let mut x = vec![0.0; m.n];
    let rep = pcg(&m, &b, &mut x, tol, MAX_CG)?;
    let mut psi = boundary.cloned().unwrap_or_else(|| cx.node_zeros());
    for (r, &n) in cx.interior_nodes.iter().enumerate() {
        psi.values[n] = x[r];
    }
    Ok((psi, rep))
}

/// Splits a face field.
pub fn decompose(cx: &Complex, z: &FaceField, a: &ScalarField, tol: f64) -> Result<HodgeSplit> {
    let g = &cx.grid;
    for &k in cx.x_faces.iter().chain(&cx.y_faces) {
        if !(z.x[k].is_finite() && z.y[k].is_finite()) {
            return Err(Error::InvalidParameter("field to split is not finite".into()));
        }
    }
    let (af, inv_af) = face_weights(cx, a)?;

    // rotational part: A ψ = curl Z, U = -(1/a) ∇⊥ψ
    let (psi, psi_solve) = solve_nodes(cx, &inv_af, &cx.curl(z), None, tol)?;
    let u = cx.face_mul(&inv_af, &cx.perp_grad(&psi)).scale(-1.0);

    // gradient part: div(a ∇ζ) = div(a Z), Neumann, one cell pinned
    let h2 = g.cell_area();
    let div = cx.div(&cx.face_mul(&af, z));
    let (sum, abs) = g.cells().fold((0.0, 0.0), |(s, t), (_, _, k)| {
        (s + div.values[k], t + div.values[k].abs())
    });
    let compatibility_defect = if abs > 0.0 { sum.abs() / abs } else { 0.0 };
    let count = g.inside_count() as f64;
    let pin = g
        .cells()
        .next()
        .map(|(_, _, k)| k)
        .ok_or(Error::EmptyMask { resolution: 0 })?;
    let (kmat, row_of) = cx.cell_matrix(&af, pin);
    let mut b = vec![0.0; kmat.n];
    for (_, _, k) in g.cells() {
        if let Some(r) = row_of[k] {
            b[r] = -h2 * (div.values[k] - sum / count);
        }
    }
    let mut x = vec![0.0; kmat.n];
    let zeta_solve = pcg(&kmat, &b, &mut x, tol, MAX_CG)?;
    let mut zeta = ScalarField::zeros(g);
    for (_, _, k) in g.cells() {
        if let Some(r) = row_of[k] {
            zeta.values[k] = x[r];
        }
    }
    let mean = zeta.integral(g) / (count * h2);
    for (_, _, k) in g.cells() {
        zeta.values[k] -= mean;
    }
    let v = cx.grad(&zeta);
    let w = z.axpy(-1.0, &u).axpy(-1.0, &v);
    Ok(HodgeSplit {
        u,
        v,
        w,
        psi,
        zeta,
        compatibility_defect,
        psi_solve,
        zeta_solve,
    })
}

/// Splits a cell-centered field after averaging it onto faces.
pub fn decompose_cells(
    grid: &Grid2D,
    z: &CurrentField,
    a: &ScalarField,
    tol: f64,
) -> Result<(Complex, FaceField, HodgeSplit)> {
    let cx = Complex::new(grid);
    let zf = cx.from_cells(z);
    let split = decompose(&cx, &zf, a, tol)?;
    Ok((cx, zf, split))
}

impl HodgeSplit {
    pub fn report(&self, cx: &Complex, z: &FaceField, a: &ScalarField) -> Result<HodgeReport> {
        let (af, _) = face_weights(cx, a)?;
        let ip = |p: &FaceField, q: &FaceField| cx.inner(p, q, &af);
        let (nz, nu, nv, nw) = (
            ip(z, z),
            ip(&self.u, &self.u),
            ip(&self.v, &self.v),
            ip(&self.w, &self.w),
        );
        let resid = z.axpy(-1.0, &self.u).axpy(-1.0, &self.v).axpy(-1.0, &self.w);
        let scale = if nz > 0.0 { nz } else { 1.0 };
        let rel = |p: &FaceField, q: &FaceField| ip(p, q).abs() / scale;
        Ok(HodgeReport {
            norm_sq: nz,
            reconstruction: (ip(&resid, &resid) / scale).sqrt(),
            uv: rel(&self.u, &self.v),
            uw: rel(&self.u, &self.w),
            vw: rel(&self.v, &self.w),
            pythagoras: (nz - nu - nv - nw).abs() / scale,
            compatibility_defect: self.compatibility_defect,
        })
    }

    /// `(U, V, W)` averaged back to cell centers.
    pub fn to_cells(&self, cx: &Complex) -> (CurrentField, CurrentField, CurrentField) {
        (cx.to_cells(&self.u), cx.to_cells(&self.v), cx.to_cells(&self.w))
    }
}

/// `Σ a (u·v) h²` over inside cells.
pub fn weighted_inner(u: &CurrentField, v: &CurrentField, a: &ScalarField, grid: &Grid2D) -> f64 {
    u.weighted_inner(v, a, grid)
}

/// Smooth random cell field of a few low Fourier modes per component,
/// averaged onto faces. Deterministic for a given seed.
pub fn random_smooth_field(cx: &Complex, seed: u64) -> FaceField {
    const MODES: usize = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || -> Vec<(f64, f64, f64, f64)> {
        (0..MODES)
            .map(|_| {
                (
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-3.0..3.0),
                    rng.gen_range(-3.0..3.0),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect()
    };
    let (mx, my) = (draw(), draw());
    let eval = |m: &[(f64, f64, f64, f64)], x: f64, y: f64| {
        m.iter().map(|&(c, kx, ky, ph)| c * (kx * x + ky * y + ph).sin()).sum()
    };
    let c = CurrentField::from_fn(&cx.grid, |x, y| (eval(&mx, x, y), eval(&my, x, y)));
    cx.from_cells(&c)
}

/// Harmonic potentials `ξ_i` for a footprint with `m` holes: `A ξ_i = 0` at
/// interior nodes, `ξ_i` constant on each hole boundary, zero on the outer
/// boundary, normalized so that `(1/2π) ∮ (1/a) ∂ξ_i/∂ν = δ_ij` around hole
/// `j`, `ν` pointing into the hole.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    pub xi: Vec<NodeField>,
    /// Boundary values: `xi[i]` equals `constants[i][j]` on hole `j`.
    pub constants: Vec<Vec<f64>>,
    /// Normalized circulations of `(1/a) ∇⊥ξ_i` along loops around hole `j`.
    pub fluxes: Vec<Vec<f64>>,
}

/// Nodes in hole `hole`'s boundary together with interior nodes within
/// `depth` node steps of it.
fn loop_region(cx: &Complex, inv_af: &FaceField, hole: usize, depth: usize) -> Vec<bool> {
    let mut inr: Vec<bool> = cx.node_class.iter().map(|&c| c == NodeClass::Boundary(hole)).collect();
    let probe = |v: &Vec<bool>| {
        let f = NodeField {
            values: v.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        };
        cx.node_operator_apply(inv_af, &f)
    };
    for _ in 0..depth {
        // nodes adjacent to the region get a nonzero operator value
        let touched = probe(&inr);
        for (n, t) in touched.values.iter().enumerate() {
            if *t != 0.0 && cx.node_class[n] == NodeClass::Interior {
                inr[n] = true;
            }
        }
    }
    inr
}

/// Flux `(1/2π) Σ_{n ∈ region} (A ξ)_n h²`, i.e. the circulation of
/// `(1/a)∇⊥ξ` along the dual loop bounding the region.
fn region_flux(cx: &Complex, inv_af: &FaceField, xi: &NodeField, region: &[bool]) -> f64 {
    let axi = cx.node_operator_apply(inv_af, xi);
    let h2 = cx.grid.cell_area();
    axi.values
        .iter()
        .zip(region)
        .filter(|(_, &r)| r)
        .map(|(v, _)| v)
        .sum::<f64>()
        * h2
        / (2.0 * std::f64::consts::PI)
}

/// Loop depth used for the reported circulations.
pub const LOOP_DEPTH: usize = 3;

pub fn harmonic_basis(cx: &Complex, a: &ScalarField, tol: f64) -> Result<HarmonicBasis> {
    let m = cx.holes;
    let (_, inv_af) = face_weights(cx, a)?;
    if m == 0 {
        return Ok(HarmonicBasis {
            xi: Vec::new(),
            constants: Vec::new(),
            fluxes: Vec::new(),
        });
    }
    let zero = cx.node_zeros();
    let regions: Vec<Vec<bool>> = (1..=m).map(|j| loop_region(cx, &inv_af, j, 0)).collect();
    let mut hats = Vec::with_capacity(m);
    let mut p = vec![vec![0.0; m]; m];
    for k in 1..=m {
        let mut bd = cx.node_zeros();
        for (n, c) in cx.node_class.iter().enumerate() {
            if *c == NodeClass::Boundary(k) {
                bd.values[n] = 1.0;
            }
        }
        let (hat, _) = solve_nodes(cx, &inv_af, &zero, Some(&bd), tol)?;
        for j in 0..m {
            p[k - 1][j] = region_flux(cx, &inv_af, &hat, &regions[j]);
        }
        hats.push(hat);
    }
    // ξ_i = Σ_k C_ik ξ̂_k with C P = I
    let c = invert(&p)?;
    let mut xi = Vec::with_capacity(m);
    for row in &c {
        let mut f = cx.node_zeros();
        for (coef, hat) in row.iter().zip(&hats) {
            for (v, h) in f.values.iter_mut().zip(&hat.values) {
                *v += coef * h;
            }
        }
        xi.push(f);
    }
    let loops: Vec<Vec<bool>> = (1..=m).map(|j| loop_region(cx, &inv_af, j, LOOP_DEPTH)).collect();
    let fluxes = xi
        .iter()
        .map(|f| loops.iter().map(|r| region_flux(cx, &inv_af, f, r)).collect())
        .collect();
    Ok(HarmonicBasis {
        xi,
        constants: c,
        fluxes,
    })
}

impl HarmonicBasis {
    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    /// Harmonic fields `W_i = (1/a) ∇⊥ξ_i`.
    pub fn fields(&self, cx: &Complex, a: &ScalarField) -> Result<Vec<FaceField>> {
        let (_, inv_af) = face_weights(cx, a)?;
        Ok(self.xi.iter().map(|x| cx.face_mul(&inv_af, &cx.perp_grad(x))).collect())
    }

    /// Coefficients `Φ` with `W ≈ Σ Φ_i W_i`, by weighted least squares.
    pub fn coefficients(&self, cx: &Complex, a: &ScalarField, w: &FaceField) -> Result<Vec<f64>> {
        let (af, _) = face_weights(cx, a)?;
        let fields = self.fields(cx, a)?;
        let gram: Vec<Vec<f64>> = fields
            .iter()
            .map(|p| fields.iter().map(|q| cx.inner(p, q, &af)).collect())
            .collect();
        let rhs: Vec<f64> = fields.iter().map(|p| cx.inner(p, w, &af)).collect();
        let inv = invert(&gram)?;
        Ok(inv
            .iter()
            .map(|row| row.iter().zip(&rhs).map(|(g, r)| g * r).sum())
            .collect())
    }

    /// Largest entry of `fluxes - I`.
    pub fn flux_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, row) in self.fluxes.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }
}

/// Gauss-Jordan inverse of a small dense matrix.
fn invert(p: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let m = p.len();
    let mut a: Vec<Vec<f64>> = p
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..m).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..m {
        let piv = (col..m)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .expect("nonempty");
        if a[piv][col].abs() < 1e-14 {
            return Err(Error::InvalidParameter("singular hole flux matrix".into()));
        }
        a.swap(col, piv);
        let d = a[col][col];
        for v in a[col].iter_mut() {
            *v /= d;
        }
        for r in 0..m {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    let pivot_row = a[col].clone();
                    for (v, pv) in a[r].iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
    }
    Ok(a.into_iter().map(|r| r[m..].to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, DomainSpec};

    fn smooth_field(cx: &Complex, s: f64) -> FaceField {
        let g = &cx.grid;
        let c = CurrentField::from_fn(g, |x, y| ((2.0 * x + s).sin() + y * y, (x * y * 3.0 - s).cos() - x));
        cx.from_cells(&c)
    }

    #[test]
    fn pure_gradient_is_recovered() {
        let g = build_grid(&DomainSpec::unit_disk(), 32).unwrap();
        let cx = Complex::new(&g);
        let a = ScalarField::from_fn(&g, |x, _| 1.0 + 0.5 * x * x);
        let z0 = ScalarField::from_fn(&g, |x, y| x * x * y - 0.3 * y);
        let z = cx.grad(&z0);
        let s = decompose(&cx, &z, &a, DEFAULT_TOL).unwrap();
        let r = s.report(&cx, &z, &a).unwrap();
        let nz = r.norm_sq;
        let (af, _) = face_weights(&cx, &a).unwrap();
        assert!(cx.inner(&s.u, &s.u, &af) < 1e-18 * nz);
        assert!(cx.inner(&s.w, &s.w, &af) < 1e-16 * nz);
        assert!(r.compatibility_defect < 1e-10);
    }

    #[test]
    fn pure_rotation_is_recovered() {
        let g = build_grid(&DomainSpec::unit_disk(), 32).unwrap();
        let cx = Complex::new(&g);
        let a = ScalarField::from_fn(&g, |_, y| 1.5 + 0.5 * y);
        let (_, inv_af) = face_weights(&cx, &a).unwrap();
        let mut psi0 = cx.node_zeros();
        for &n in &cx.interior_nodes {
            let (x, y) = cx.node_position(n);
            psi0.values[n] = (1.0 - x * x - y * y).max(0.0).powi(2);
        }
        let z = cx.face_mul(&inv_af, &cx.perp_grad(&psi0)).scale(-1.0);
        let s = decompose(&cx, &z, &a, DEFAULT_TOL).unwrap();
        let (af, _) = face_weights(&cx, &a).unwrap();
        let nz = cx.inner(&z, &z, &af);
        assert!(cx.inner(&s.v, &s.v, &af) < 1e-18 * nz);
        assert!(cx.inner(&s.w, &s.w, &af) < 1e-16 * nz);
        for &n in &cx.interior_nodes {
            assert!((s.psi.values[n] - psi0.values[n]).abs() < 1e-8);
        }
    }

    #[test]
    fn random_field_split_is_orthogonal_and_idempotent() {
        let g = build_grid(&DomainSpec::unit_disk(), 40).unwrap();
        let cx = Complex::new(&g);
        let a = ScalarField::from_fn(&g, |x, y| 1.0 + 0.3 * (x + y).sin());
        let z = smooth_field(&cx, 0.4);
        let s = decompose(&cx, &z, &a, DEFAULT_TOL).unwrap();
        let r = s.report(&cx, &z, &a).unwrap();
        assert!(r.worst() < 1e-6, "{r:?}");
        // splitting U again gives U back
        let s2 = decompose(&cx, &s.u, &a, DEFAULT_TOL).unwrap();
        let (af, _) = face_weights(&cx, &a).unwrap();
        let du = s2.u.axpy(-1.0, &s.u);
        assert!(cx.inner(&du, &du, &af) < 1e-12 * cx.inner(&s.u, &s.u, &af));
    }

    #[test]
    fn random_fields_depend_on_the_seed_only() {
        let g = build_grid(&DomainSpec::unit_disk(), 16).unwrap();
        let cx = Complex::new(&g);
        assert_eq!(random_smooth_field(&cx, 3).x, random_smooth_field(&cx, 3).x);
        assert_ne!(random_smooth_field(&cx, 3).x, random_smooth_field(&cx, 4).x);
    }

    #[test]
    fn disk_has_no_harmonic_part() {
        let g = build_grid(&DomainSpec::unit_disk(), 24).unwrap();
        let cx = Complex::new(&g);
        let a = ScalarField::constant(&g, 1.0);
        assert!(harmonic_basis(&cx, &a, DEFAULT_TOL).unwrap().is_empty());
        let z = smooth_field(&cx, 1.0);
        let s = decompose(&cx, &z, &a, DEFAULT_TOL).unwrap();
        let (af, _) = face_weights(&cx, &a).unwrap();
        assert!(cx.inner(&s.w, &s.w, &af) < 1e-14 * cx.inner(&z, &z, &af));
    }

    #[test]
    fn annulus_basis_is_log() {
        let g = build_grid(&DomainSpec::annulus(0.5, 1.0), 128).unwrap();
        let cx = Complex::new(&g);
        let a = ScalarField::constant(&g, 1.0);
        let b = harmonic_basis(&cx, &a, DEFAULT_TOL).unwrap();
        assert_eq!(b.len(), 1);
        assert!(b.flux_defect() < 1e-6, "{:?}", b.fluxes);
        assert!(
            (b.constants[0][0] - 2f64.ln()).abs() < 0.03 * 2f64.ln(),
            "{:?}",
            b.constants
        );
        let mut worst: f64 = 0.0;
        for &n in &cx.interior_nodes {
            let (x, y) = cx.node_position(n);
            worst = worst.max((b.xi[0].values[n] + x.hypot(y).ln()).abs());
        }
        assert!(worst < 0.03, "{worst}");
        // the harmonic field survives a split untouched
        let w = &b.fields(&cx, &a).unwrap()[0];
        let s = decompose(&cx, w, &a, DEFAULT_TOL).unwrap();
        let r = s.report(&cx, w, &a).unwrap();
        let (af, _) = face_weights(&cx, &a).unwrap();
        let dw = s.w.axpy(-1.0, w);
        assert!(cx.inner(&dw, &dw, &af) < 1e-10 * r.norm_sq);
    }

    #[test]
    fn inverse_of_small_matrix() {
        let p = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let c = invert(&p).unwrap();
        assert!((c[0][0] - 0.6).abs() < 1e-15 && (c[0][1] + 0.2).abs() < 1e-15);
        assert!(invert(&[vec![0.0]]).is_err());
    }
}

use std::f64::consts::PI;

use super::{GreenOperator, VortexConfiguration};
use crate::error::{Error, Result};
use crate::fields::CurrentField;
use crate::geometry::{AppliedField, EffectiveFieldData};
use crate::grid::{Grid2D, ScalarField};
use crate::hodge::{HarmonicBasis, HodgeSplit};
use crate::staggered::{Complex, FaceField};

/// `∫ (½|∇ρ|² + (κ²/4)(ρ² - 1)²)` for one core profile with unit thickness:
/// `3π/2` from the ramp, `π/16` from the inner disk and `7π/80` from the
/// ramp's potential. Independent of `κ`.
pub const CORE_ENERGY: f64 = 1.65 * PI;

/// Amplitude of a single core at distance `s`: zero inside `1/(2κ)`, a
/// linear ramp up to `1/κ`, one beyond.
#[inline]
pub fn core_profile(s: f64, kappa: f64) -> f64 {
    (2.0 * kappa * s - 1.0).clamp(0.0, 1.0)
}

/// Amplitude and phase gradient of a recovery order parameter.
#[derive(Debug, Clone)]
pub struct OrderParameterField {
    /// `Π ρ_i` at the cell centers.
    pub rho: ScalarField,
    /// Phase gradient on the faces.
    pub phase_faces: FaceField,
    /// Phase gradient averaged to the cell centers.
    pub phase_grad: CurrentField,
    pub kappa: f64,
    pub cores: Vec<(f64, f64)>,
    /// Integer circulations `M_i` around the holes.
    pub windings: Vec<i64>,
}

impl OrderParameterField {
    /// `v ≡ 1` with the given phase gradient.
    pub fn uniform(cx: &Complex, phase_faces: FaceField, kappa: f64) -> Self {
        let g = &cx.grid;
        let mut rho = ScalarField::zeros(g);
        for (_, _, k) in g.cells() {
            rho.values[k] = 1.0;
        }
        Self {
            rho,
            phase_grad: cx.to_cells(&phase_faces),
            phase_faces,
            kappa,
            cores: Vec::new(),
            windings: Vec::new(),
        }
    }

    /// `ρ` and `∇ρ` at a point from the analytic core profiles.
    pub fn amplitude_at(&self, x: f64, y: f64) -> (f64, (f64, f64)) {
        amplitude(&self.cores, self.kappa, x, y)
    }
}

fn amplitude(cores: &[(f64, f64)], kappa: f64, x: f64, y: f64) -> (f64, (f64, f64)) {
    let reach = 1.0 / kappa;
    let mut rho = 1.0;
    let mut grad = (0.0, 0.0);
    for &(px, py) in cores {
        let (dx, dy) = (x - px, y - py);
        let s = dx.hypot(dy);
        if s >= reach {
            continue;
        }
        let r = core_profile(s, kappa);
        let (gx, gy) = if s > 0.5 / kappa {
            (2.0 * kappa * dx / s, 2.0 * kappa * dy / s)
        } else {
            (0.0, 0.0)
        };
        grad = (grad.0 * r + rho * gx, grad.1 * r + rho * gy);
        rho *= r;
    }
    (rho, grad)
}

/// Checks that every core disk lies inside the domain.
fn check_cores(grid: &Grid2D, config: &VortexConfiguration) -> Result<()> {
    for &(x, y) in &config.points {
        let r = config.core_radius;
        let probes = (0..8).map(|k| {
            let t = k as f64 * PI / 4.0;
            (x + r * t.cos(), y + r * t.sin())
        });
        if !grid.contains(x, y) || probes.into_iter().any(|(px, py)| !grid.contains(px, py)) {
            return Err(Error::CoreOnBoundary { x, y, radius: r });
        }
    }
    Ok(())
}

/// Builds the recovery order parameter. The phase gradient is
/// `U_n + log κ · V + Σ M_i W_i`, where `U_n = -(1/a)∇⊥ψ` with `ψ` the
/// potential of mass `2π σ_i` at each vortex, `V` the gradient part of the
/// target, and `M_i = ⌊Φ_i log κ⌋` for the harmonic coefficients `Φ_i` of the
/// target.
pub fn build_order_parameter(
    green: &GreenOperator,
    config: &VortexConfiguration,
    split: &HodgeSplit,
    harmonic: Option<&HarmonicBasis>,
) -> Result<OrderParameterField> {
    let cx = &green.cx;
    let g = &cx.grid;
    check_cores(g, config)?;
    let kappa = config.kappa;
    let lk = kappa.ln();
    let mut masses = cx.node_zeros();
    for (&(x, y), &s) in config.points.iter().zip(&config.signs) {
        for (n, w) in green.spread(x, y)? {
            masses.values[n] += 2.0 * PI * f64::from(s) * w;
        }
    }
    let psi = green.potential(&masses)?;
    let mut faces = cx
        .face_mul(&green.inv_af, &cx.perp_grad(&psi))
        .scale(-1.0)
        .axpy(lk, &split.v);
    let mut windings = Vec::new();
    if let Some(basis) = harmonic.filter(|b| !b.is_empty()) {
        let phi = basis.coefficients(cx, &green.a, &split.w)?;
        for (coef, field) in phi.iter().zip(basis.fields(cx, &green.a)?) {
            let m = (coef * lk).floor();
            faces = faces.axpy(m, &field);
            windings.push(m as i64);
        }
    }
    let mut rho = ScalarField::zeros(g);
    for (_, _, k) in g.cells() {
        let (x, y) = g.center_of(k);
        rho.values[k] = amplitude(&config.points, kappa, x, y).0;
    }
    Ok(OrderParameterField {
        rho,
        phase_grad: cx.to_cells(&faces),
        phase_faces: faces,
        kappa,
        cores: config.points.clone(),
        windings,
    })
}

/// Cell averages of `ρ²`, `|∇ρ|²` and `(ρ² - 1)²`, supersampled in cells
/// that touch a core.
fn amplitude_moments(v: &OrderParameterField, grid: &Grid2D, k: usize) -> (f64, f64, f64) {
    let (cx, cy) = grid.center_of(k);
    let reach = 1.0 / v.kappa + grid.h;
    let near: Vec<(f64, f64)> = v
        .cores
        .iter()
        .copied()
        .filter(|&(px, py)| (px - cx).abs() < reach && (py - cy).abs() < reach)
        .collect();
    if near.is_empty() {
        return (1.0, 0.0, 0.0);
    }
    let m = ((32.0 * grid.h * v.kappa).ceil() as usize).clamp(16, 512);
    let (mut r2, mut g2, mut pot) = (0.0, 0.0, 0.0);
    for sj in 0..m {
        for si in 0..m {
            let x = cx + grid.h * ((si as f64 + 0.5) / m as f64 - 0.5);
            let y = cy + grid.h * ((sj as f64 + 0.5) / m as f64 - 0.5);
            let (rho, (gx, gy)) = amplitude(&near, v.kappa, x, y);
            r2 += rho * rho;
            g2 += gx * gx + gy * gy;
            pot += (rho * rho - 1.0).powi(2);
        }
    }
    let s = (m * m) as f64;
    (r2 / s, g2 / s, pot / s)
}

/// `G_κ(v) = Σ a [½|∇ρ|² + ½ρ²|∇φ - B'|² + (κ²/4)(ρ² - 1)² + (a²/24)|H' log κ|² ρ²] h²`
/// with `B' = B log κ`. The amplitude terms are integrated from the analytic
/// core profiles.
pub fn evaluate_gkappa(
    v: &OrderParameterField,
    grid: &Grid2D,
    a: &ScalarField,
    field: &EffectiveFieldData,
    hprime: AppliedField,
) -> Result<f64> {
    a.check_grid(grid)?;
    field.bx.check_grid(grid)?;
    v.rho.check_grid(grid)?;
    let lk = v.kappa.ln();
    let hp = hprime.parallel_sq() * lk * lk;
    let k2 = v.kappa * v.kappa;
    let mut total = 0.0;
    for (_, _, k) in grid.cells() {
        let av = a.values[k];
        let (r2, g2, pot) = amplitude_moments(v, grid, k);
        let dx = v.phase_grad.jx.values[k] - lk * field.bx.values[k];
        let dy = v.phase_grad.jy.values[k] - lk * field.by.values[k];
        total += av * (0.5 * g2 + 0.5 * r2 * (dx * dx + dy * dy) + 0.25 * k2 * pot + av * av / 24.0 * hp * r2);
    }
    Ok(total * grid.cell_area())
}

/// `∫ a (½|∇ρ_p|² + (κ²/4)(ρ_p² - 1)²)` for the core at `p`, by polar
/// quadrature with `a` read from the containing cell.
pub fn core_energy(grid: &Grid2D, a: &ScalarField, p: (f64, f64), kappa: f64) -> Result<f64> {
    a.check_grid(grid)?;
    let a_at = |x: f64, y: f64| match grid.locate(x, y) {
        Some((i, j)) if grid.inside[grid.idx(i, j)] => Ok(a.get(i, j)),
        _ => Err(Error::CoreOnBoundary {
            x,
            y,
            radius: 1.0 / kappa,
        }),
    };
    let (nr, nt) = (200, 64);
    let outer = 1.0 / kappa;
    let mut total = 0.0;
    for ir in 0..nr {
        let s = outer * (ir as f64 + 0.5) / nr as f64;
        let rho = core_profile(s, kappa);
        let g2 = if s > 0.5 * outer { 4.0 * kappa * kappa } else { 0.0 };
        let density = 0.5 * g2 + 0.25 * kappa * kappa * (rho * rho - 1.0).powi(2);
        for it in 0..nt {
            let t = 2.0 * PI * (it as f64 + 0.5) / nt as f64;
            total += a_at(p.0 + s * t.cos(), p.1 + s * t.sin())? * density * s;
        }
    }
    Ok(total * (outer / nr as f64) * (2.0 * PI / nt as f64))
}

/// Boundary cells of the rectangle of cells `[i0, i1] × [j0, j1]`,
/// counterclockwise from the lower left.
pub fn rectangle_loop(grid: &Grid2D, (i0, j0): (usize, usize), (i1, j1): (usize, usize)) -> Vec<usize> {
    let mut cells = Vec::new();
    for i in i0..i1 {
        cells.push(grid.idx(i, j0));
    }
    for j in j0..j1 {
        cells.push(grid.idx(i1, j));
    }
    for i in (i0 + 1..=i1).rev() {
        cells.push(grid.idx(i, j1));
    }
    for j in (j0 + 1..=j1).rev() {
        cells.push(grid.idx(i0, j));
    }
    cells
}

/// Line integral of a face field along a closed path of adjacent inside
/// cells, stepping through the shared faces.
pub fn loop_circulation(cx: &Complex, f: &FaceField, cells: &[usize]) -> Result<f64> {
    let g = &cx.grid;
    let nx = g.nx;
    let mut s = 0.0;
    for (t, &k) in cells.iter().enumerate() {
        let next = cells[(t + 1) % cells.len()];
        if !g.inside[k] || !g.inside[next] {
            return Err(Error::InvalidParameter("loop leaves the domain".into()));
        }
        s += if next == k + 1 && !next.is_multiple_of(nx) {
            f.x[k]
        } else if k == next + 1 && !k.is_multiple_of(nx) {
            -f.x[next]
        } else if next == k + nx {
            f.y[k]
        } else if k == next + nx {
            -f.y[next]
        } else {
            return Err(Error::InvalidParameter("loop cells are not adjacent".into()));
        };
    }
    Ok(s * g.h)
}

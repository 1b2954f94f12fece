//! Radii of coincidence sets measured along rays.

use serde::Serialize;

use crate::grid::Grid2D;

/// Ray-averaged extents of a cell set around a center. `inner` is the first
/// radius where the set begins (zero if it covers the center), `outer` the
/// last radius where it ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialExtents {
    pub inner: f64,
    pub outer: f64,
    /// Number of rays that met the set.
    pub rays: usize,
}

/// Bilinear interpolation of the 0/1 indicator of `mask` at a point; cells
/// off the array count as zero.
fn indicator(grid: &Grid2D, mask: &[bool], x: f64, y: f64) -> f64 {
    let fx = (x - grid.origin.0) / grid.h - 0.5;
    let fy = (y - grid.origin.1) / grid.h - 0.5;
    let (i0, j0) = (fx.floor(), fy.floor());
    let (tx, ty) = (fx - i0, fy - j0);
    let at = |i: f64, j: f64| -> f64 {
        if i < 0.0 || j < 0.0 || i >= grid.nx as f64 || j >= grid.ny as f64 {
            return 0.0;
        }
        if mask[grid.idx(i as usize, j as usize)] {
            1.0
        } else {
            0.0
        }
    };
    (1.0 - tx) * (1.0 - ty) * at(i0, j0)
        + tx * (1.0 - ty) * at(i0 + 1.0, j0)
        + (1.0 - tx) * ty * at(i0, j0 + 1.0)
        + tx * ty * at(i0 + 1.0, j0 + 1.0)
}

/// Locates the half-level crossings of the interpolated indicator along
/// `rays` rays from `center`, with linear interpolation between samples a
/// quarter cell apart. Returns `None` if no ray meets the set.
pub fn radial_extents(grid: &Grid2D, mask: &[bool], center: (f64, f64), rays: usize) -> Option<RadialExtents> {
    let extent = grid.h * (grid.nx.max(grid.ny) as f64) * std::f64::consts::SQRT_2;
    let step = 0.25 * grid.h;
    let samples = (extent / step).ceil() as usize;
    let (mut inner_sum, mut outer_sum, mut hits) = (0.0, 0.0, 0usize);
    for n in 0..rays {
        let t = 2.0 * std::f64::consts::PI * n as f64 / rays as f64;
        let (c, s) = (t.cos(), t.sin());
        let value = |r: f64| indicator(grid, mask, center.0 + r * c, center.1 + r * s) - 0.5;
        let mut prev = value(0.0);
        let mut inner = (prev >= 0.0).then_some(0.0);
        let mut outer = None;
        for m in 1..=samples {
            let r = m as f64 * step;
            let cur = value(r);
            if (prev < 0.0) != (cur < 0.0) {
                let rc = r - step + step * prev / (prev - cur);
                if cur >= 0.0 {
                    inner.get_or_insert(rc);
                } else {
                    outer = Some(rc);
                }
            }
            prev = cur;
        }
        if let (Some(i), Some(o)) = (inner, outer) {
            inner_sum += i;
            outer_sum += o;
            hits += 1;
        }
    }
    (hits > 0).then(|| RadialExtents {
        inner: inner_sum / hits as f64,
        outer: outer_sum / hits as f64,
        rays: hits,
    })
}

/// Mean distance of the set's cell centers from `center`.
pub fn mean_radius(grid: &Grid2D, mask: &[bool], center: (f64, f64)) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for (i, j, k) in grid.cells() {
        if mask[k] {
            let (x, y) = grid.center(i, j);
            sum += (x - center.0).hypot(y - center.1);
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}

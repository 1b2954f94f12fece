use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::VortexConfiguration;
use crate::error::{Error, Result};
use crate::fields::MeasureField;
use crate::grid::Grid2D;

/// Redraws inside a point's own stratum before falling back to the whole
/// support.
const STRATUM_ATTEMPTS: usize = 50;
const MAX_ATTEMPTS: usize = 2_000;

/// Half the hexagonal packing distance for unit count on the support of `J`:
/// `c0 = ½ sqrt(2A/√3)`, so that `c0 N^{-1/2}` is half the spacing of `N`
/// densely packed points.
pub fn separation_constant(grid: &Grid2D, j: &MeasureField) -> f64 {
    let cells = grid.cells().filter(|&(_, _, k)| j.density.values[k] != 0.0).count();
    let area = cells as f64 * grid.cell_area();
    0.5 * (2.0 * area / 3f64.sqrt()).sqrt()
}

/// Draws `n` vortices from `|J|` with signs of `J`.
///
/// Support cells are ordered along a Hilbert curve, which cuts the mass into
/// `n` spatially compact strata. Point `i` goes to the cell holding the
/// median `(i + ½)/n` of the cumulative mass, uniformly inside that cell. A
/// point closer than `c0 n^{-1/2}` to an earlier one is redrawn, first
/// anywhere in its stratum and then from the whole support. Deterministic
/// for a given seed.
pub fn sample_vortices(
    grid: &Grid2D,
    j: &MeasureField,
    n: usize,
    kappa: f64,
    seed: u64,
) -> Result<VortexConfiguration> {
    j.density.check_grid(grid)?;
    if n == 0 {
        return Err(Error::InvalidParameter("vortex count must be at least 1".into()));
    }
    if !(kappa > 1.0) {
        return Err(Error::InvalidParameter(format!("kappa = {kappa} must exceed 1")));
    }
    let h2 = grid.cell_area();
    let mut support: Vec<usize> = grid
        .cells()
        .map(|(_, _, k)| k)
        .filter(|&k| j.density.values[k] != 0.0)
        .collect();
    // equal-mass strata along a Hilbert curve are spatially compact
    let order = grid.nx.max(grid.ny).next_power_of_two();
    support.sort_by_key(|&k| hilbert_index(order, k % grid.nx, k / grid.nx));
    let mut cdf = Vec::with_capacity(support.len());
    let mut acc = 0.0;
    for &k in &support {
        acc += j.density.values[k].abs() * h2;
        cdf.push(acc);
    }
    if support.is_empty() || !(acc > 0.0) {
        return Err(Error::ZeroMeasure);
    }
    let c0 = separation_constant(grid, j);
    let min_sep = c0 / (n as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(n);
    let mut signs = Vec::with_capacity(n);
    for i in 0..n {
        let mut placed = false;
        for attempt in 0..MAX_ATTEMPTS {
            let t = if attempt == 0 {
                (i as f64 + 0.5) / n as f64
            } else if attempt < STRATUM_ATTEMPTS {
                (i as f64 + rng.gen::<f64>()) / n as f64
            } else {
                rng.gen::<f64>()
            };
            let pos = cdf.partition_point(|&c| c < t * acc).min(support.len() - 1);
            let k = support[pos];
            let (cx, cy) = grid.center_of(k);
            let p = (
                cx + grid.h * (rng.gen::<f64>() - 0.5),
                cy + grid.h * (rng.gen::<f64>() - 0.5),
            );
            if points.iter().all(|q| (p.0 - q.0).hypot(p.1 - q.1) >= min_sep) {
                points.push(p);
                signs.push(if j.density.values[k] > 0.0 { 1 } else { -1 });
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::SeparationFailed {
                min_sep,
                attempts: MAX_ATTEMPTS,
            });
        }
    }
    Ok(VortexConfiguration::new(points, signs, kappa, c0))
}

/// Position of cell `(x, y)` along the Hilbert curve filling an `n × n`
/// square, `n` a power of two.
fn hilbert_index(n: usize, mut x: usize, mut y: usize) -> usize {
    let mut d = 0;
    let mut s = n / 2;
    while s > 0 {
        let rx = usize::from(x & s > 0);
        let ry = usize::from(y & s > 0);
        d += s * s * ((3 * rx) ^ ry);
        if ry == 0 {
            if rx == 1 {
                x = n - 1 - x;
                y = n - 1 - y;
            }
            std::mem::swap(&mut x, &mut y);
        }
        s /= 2;
    }
    d
}

/// `(1/N²) Σ_{i≠j, |p_i - p_j| < α} |log |p_i - p_j||`, logged for
/// inspection of how clustered a configuration is.
pub fn close_pair_sum(config: &VortexConfiguration, alpha: f64) -> f64 {
    let n = config.len();
    if n == 0 {
        return 0.0;
    }
    let mut s = 0.0;
    for (i, p) in config.points.iter().enumerate() {
        for (j, q) in config.points.iter().enumerate() {
            let d = (p.0 - q.0).hypot(p.1 - q.1);
            if i != j && d < alpha {
                s += d.ln().abs();
            }
        }
    }
    s / (n * n) as f64
}

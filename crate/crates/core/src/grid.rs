//! Masked uniform grids over the film footprint.
//!
//! Cells are squares of side `h`; cell `(i, j)` has its lower-left corner at
//! `origin + (i h, j h)` and is *inside* when its center lies in the
//! footprint. Inside cells next to the boundary carry the fraction `θ ∈ (0, 1]`
//! of a grid step at which the footprint boundary crosses the segment towards
//! each outside neighbour, which lets the elliptic stencils place the
//! homogeneous Dirichlet value on the true boundary rather than on the
//! staircase.
//!
//! Mask files are plain text: a header line `nx ny h x0 y0` (with `(x0, y0)`
//! the lower-left corner of cell `(0, 0)`) followed by `nx * ny` values `0`/`1`
//! in row-major order, row `j = 0` first and `i` varying fastest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest boundary fraction used in the stencils.
pub const MIN_BOUNDARY_FRACTION: f64 = 1e-3;

/// Direction offsets in the order west, east, south, north.
pub const DIRECTIONS: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

/// Shape of the planar footprint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainKind {
    UnitDisk,
    Rectangle {
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    },
    Annulus {
        r_inner: f64,
        r_outer: f64,
    },
    MaskFile {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub description: String,
}

impl DomainSpec {
    pub fn unit_disk() -> Self {
        Self {
            kind: DomainKind::UnitDisk,
            description: "unit disk".into(),
        }
    }

    pub fn rectangle(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self {
            kind: DomainKind::Rectangle {
                x_min,
                x_max,
                y_min,
                y_max,
            },
            description: format!("rectangle [{x_min}, {x_max}] x [{y_min}, {y_max}]"),
        }
    }

    pub fn annulus(r_inner: f64, r_outer: f64) -> Self {
        Self {
            kind: DomainKind::Annulus { r_inner, r_outer },
            description: format!("annulus {r_inner} < r < {r_outer}"),
        }
    }

    pub fn mask_file(path: impl Into<PathBuf>) -> Self {
        let path = path.into();
        Self {
            description: format!("mask {}", path.display()),
            kind: DomainKind::MaskFile { path },
        }
    }

    fn validate(&self) -> Result<()> {
        match self.kind {
            DomainKind::UnitDisk | DomainKind::MaskFile { .. } => Ok(()),
            DomainKind::Rectangle {
                x_min,
                x_max,
                y_min,
                y_max,
            } => {
                let ok = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite()) && x_min < x_max && y_min < y_max;
                if ok {
                    Ok(())
                } else {
                    Err(Error::InvalidDomain(format!(
                        "rectangle needs x_min < x_max and y_min < y_max, got {}",
                        self.description
                    )))
                }
            }
            DomainKind::Annulus { r_inner, r_outer } => {
                if r_inner.is_finite() && r_outer.is_finite() && 0.0 < r_inner && r_inner < r_outer {
                    Ok(())
                } else {
                    Err(Error::InvalidDomain(format!(
                        "annulus needs 0 < r_inner < r_outer, got r_inner = {r_inner}, r_outer = {r_outer}"
                    )))
                }
            }
        }
    }
}

/// Signed distance-like function, negative inside the footprint.
#[derive(Debug, Clone, Copy, PartialEq)]
enum LevelSet {
    Disk,
    Rectangle([f64; 4]),
    Annulus(f64, f64),
}

impl LevelSet {
    fn eval(&self, x: f64, y: f64) -> f64 {
        match *self {
            LevelSet::Disk => x.hypot(y) - 1.0,
            LevelSet::Rectangle([x0, x1, y0, y1]) => (x0 - x).max(x - x1).max(y0 - y).max(y - y1),
            LevelSet::Annulus(ri, ro) => {
                let r = x.hypot(y);
                (r - ro).max(ri - r)
            }
        }
    }
}

/// Masked uniform grid.
#[derive(Debug, Clone)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    /// Lower-left corner of cell `(0, 0)`.
    pub origin: (f64, f64),
    pub inside: Vec<bool>,
    pub boundary_band: Vec<bool>,
    /// Boundary fractions per inside cell in [`DIRECTIONS`] order; `1.0` where
    /// the neighbour is inside.
    fractions: Vec<[f64; 4]>,
    level_set: Option<LevelSet>,
}

/// Builds the grid for a footprint. The bounding box spans `resolution` cells
/// on its longer side; mask files carry their own resolution.
pub fn build_grid(spec: &DomainSpec, resolution: usize) -> Result<Grid2D> {
    spec.validate()?;
    let (bbox, level_set) = match spec.kind {
        DomainKind::UnitDisk => ([-1.0, 1.0, -1.0, 1.0], LevelSet::Disk),
        DomainKind::Rectangle {
            x_min,
            x_max,
            y_min,
            y_max,
        } => (
            [x_min, x_max, y_min, y_max],
            LevelSet::Rectangle([x_min, x_max, y_min, y_max]),
        ),
        DomainKind::Annulus { r_inner, r_outer } => (
            [-r_outer, r_outer, -r_outer, r_outer],
            LevelSet::Annulus(r_inner, r_outer),
        ),
        DomainKind::MaskFile { ref path } => return read_mask_file(path),
    };
    if resolution < 8 {
        return Err(Error::ResolutionTooSmall(resolution));
    }
    let [x0, x1, y0, y1] = bbox;
    let (w, ht) = (x1 - x0, y1 - y0);
    let h = w.max(ht) / resolution as f64;
    let nx = ((w / h) - 1e-9).ceil().max(1.0) as usize;
    let ny = ((ht / h) - 1e-9).ceil().max(1.0) as usize;
    let origin = (x0 - (nx as f64 * h - w) / 2.0, y0 - (ny as f64 * h - ht) / 2.0);
    let mut inside = vec![false; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let (x, y) = cell_center(origin, h, i, j);
            inside[j * nx + i] = level_set.eval(x, y) < 0.0;
        }
    }
    Grid2D::from_parts(nx, ny, h, origin, inside, Some(level_set), resolution)
}

fn cell_center(origin: (f64, f64), h: f64, i: usize, j: usize) -> (f64, f64) {
    (origin.0 + (i as f64 + 0.5) * h, origin.1 + (j as f64 + 0.5) * h)
}

impl Grid2D {
    fn from_parts(
        nx: usize,
        ny: usize,
        h: f64,
        origin: (f64, f64),
        inside: Vec<bool>,
        level_set: Option<LevelSet>,
        resolution: usize,
    ) -> Result<Self> {
        if !inside.iter().any(|&b| b) {
            return Err(Error::EmptyMask { resolution });
        }
        let mut grid = Grid2D {
            nx,
            ny,
            h,
            origin,
            boundary_band: vec![false; nx * ny],
            fractions: vec![[1.0; 4]; nx * ny],
            inside,
            level_set,
        };
        for j in 0..ny {
            for i in 0..nx {
                let k = grid.idx(i, j);
                if !grid.inside[k] {
                    continue;
                }
                for (d, &(di, dj)) in DIRECTIONS.iter().enumerate() {
                    if grid.neighbor(i, j, di, dj).is_none() {
                        grid.boundary_band[k] = true;
                        grid.fractions[k][d] = grid.crossing_fraction(i, j, di, dj);
                    }
                }
            }
        }
        Ok(grid)
    }

    /// Grid over an explicit mask. Boundary fractions are `1/2`, i.e. the
    /// boundary sits on the cell faces.
    pub fn from_mask(nx: usize, ny: usize, h: f64, origin: (f64, f64), inside: Vec<bool>) -> Result<Self> {
        if nx == 0 || ny == 0 || inside.len() != nx * ny {
            return Err(Error::InvalidDomain(format!(
                "mask of length {} does not match {nx}x{ny}",
                inside.len()
            )));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidDomain(format!("grid spacing must be positive, got {h}")));
        }
        Grid2D::from_parts(nx, ny, h, origin, inside, None, nx.max(ny))
    }

    fn crossing_fraction(&self, i: usize, j: usize, di: isize, dj: isize) -> f64 {
        let Some(ls) = self.level_set else {
            return 0.5;
        };
        let (cx, cy) = self.center(i, j);
        let (ex, ey) = (di as f64 * self.h, dj as f64 * self.h);
        let phi = |t: f64| ls.eval(cx + t * ex, cy + t * ey);
        if phi(1.0) < 0.0 {
            // neighbour center lies in the footprint but off the array
            return 1.0;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if phi(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (0.5 * (lo + hi)).max(MIN_BOUNDARY_FRACTION)
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        cell_center(self.origin, self.h, i, j)
    }

    pub fn center_of(&self, k: usize) -> (f64, f64) {
        self.center(k % self.nx, k / self.nx)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn is_inside(&self, i: isize, j: isize) -> bool {
        i >= 0
            && j >= 0
            && (i as usize) < self.nx
            && (j as usize) < self.ny
            && self.inside[j as usize * self.nx + i as usize]
    }

    /// Index of the inside neighbour in direction `(di, dj)`, if any.
    #[inline]
    pub fn neighbor(&self, i: usize, j: usize, di: isize, dj: isize) -> Option<usize> {
        let (ni, nj) = (i as isize + di, j as isize + dj);
        self.is_inside(ni, nj).then(|| nj as usize * self.nx + ni as usize)
    }

    /// Boundary fractions of cell `k` in [`DIRECTIONS`] order.
    #[inline]
    pub fn fractions(&self, k: usize) -> [f64; 4] {
        self.fractions[k]
    }

    pub fn inside_count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    /// Inside cells as `(i, j, k)`.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.ny).flat_map(move |j| {
            (0..self.nx).filter_map(move |i| {
                let k = j * self.nx + i;
                self.inside[k].then_some((i, j, k))
            })
        })
    }

    pub fn cell_area(&self) -> f64 {
        self.h * self.h
    }

    /// Cell containing the point, whether inside or not.
    pub fn locate(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let fi = ((x - self.origin.0) / self.h).floor();
        let fj = ((y - self.origin.1) / self.h).floor();
        (fi >= 0.0 && fj >= 0.0 && (fi as usize) < self.nx && (fj as usize) < self.ny)
            .then_some((fi as usize, fj as usize))
    }

    /// Whether a point lies in the footprint. Uses the analytic shape when
    /// one is known, otherwise the mask.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match self.level_set {
            Some(ls) => ls.eval(x, y) < 0.0,
            None => self
                .locate(x, y)
                .map(|(i, j)| self.inside[self.idx(i, j)])
                .unwrap_or(false),
        }
    }

    /// Area-weighted centroid of the inside cells.
    pub fn centroid(&self) -> (f64, f64) {
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
        for (i, j, _) in self.cells() {
            let (x, y) = self.center(i, j);
            sx += x;
            sy += y;
            n += 1.0;
        }
        (sx / n, sy / n)
    }

    /// Labels the connected components of outside cells (8-connectivity).
    /// Component `0` is the exterior, which touches the edge of the array;
    /// components `1..=m` are holes. Inside cells get `None`.
    pub fn outside_components(&self) -> (Vec<Option<usize>>, usize) {
        let mut label: Vec<Option<usize>> = vec![None; self.len()];
        let mut comp_touches_edge = Vec::new();
        let mut comp_of_seed = Vec::new();
        for start in 0..self.len() {
            if self.inside[start] || label[start].is_some() {
                continue;
            }
            let c = comp_touches_edge.len();
            let mut touches = false;
            let mut stack = vec![start];
            label[start] = Some(c);
            while let Some(k) = stack.pop() {
                let (i, j) = ((k % self.nx) as isize, (k / self.nx) as isize);
                if i == 0 || j == 0 || i as usize == self.nx - 1 || j as usize == self.ny - 1 {
                    touches = true;
                }
                for dj in -1..=1 {
                    for di in -1..=1 {
                        let (ni, nj) = (i + di, j + dj);
                        if ni < 0 || nj < 0 || ni as usize >= self.nx || nj as usize >= self.ny {
                            continue;
                        }
                        let nk = nj as usize * self.nx + ni as usize;
                        if !self.inside[nk] && label[nk].is_none() {
                            label[nk] = Some(c);
                            stack.push(nk);
                        }
                    }
                }
            }
            comp_touches_edge.push(touches);
            comp_of_seed.push(start);
        }
        // renumber: all edge-touching components merge into the exterior
        let mut map = vec![0usize; comp_touches_edge.len()];
        let mut holes = 0;
        for (c, &touches) in comp_touches_edge.iter().enumerate() {
            if !touches {
                holes += 1;
                map[c] = holes;
            }
        }
        for c in label.iter_mut().flatten() {
            *c = map[*c];
        }
        (label, holes)
    }

    pub fn hole_count(&self) -> usize {
        self.outside_components().1
    }

    /// Writes the inside mask in the mask-file format.
    pub fn to_mask_string(&self) -> String {
        let mut s = format!(
            "{} {} {} {} {}\n",
            self.nx, self.ny, self.h, self.origin.0, self.origin.1
        );
        for j in 0..self.ny {
            let row: Vec<&str> = (0..self.nx)
                .map(|i| if self.inside[self.idx(i, j)] { "1" } else { "0" })
                .collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }
}

/// Parses the mask-file format described in the module docs.
pub fn parse_mask(text: &str) -> std::result::Result<Grid2D, String> {
    let mut tokens = text.split_whitespace();
    let mut next = |what: &str| tokens.next().ok_or_else(|| format!("missing {what}"));
    let nx: usize = next("nx")?.parse().map_err(|e| format!("nx: {e}"))?;
    let ny: usize = next("ny")?.parse().map_err(|e| format!("ny: {e}"))?;
    let h: f64 = next("h")?.parse().map_err(|e| format!("h: {e}"))?;
    let x0: f64 = next("x0")?.parse().map_err(|e| format!("x0: {e}"))?;
    let y0: f64 = next("y0")?.parse().map_err(|e| format!("y0: {e}"))?;
    let mut inside = Vec::with_capacity(nx * ny);
    for n in 0..nx * ny {
        match next("mask value")? {
            "0" => inside.push(false),
            "1" => inside.push(true),
            other => return Err(format!("mask value {n} is {other:?}, expected 0 or 1")),
        }
    }
    if tokens.next().is_some() {
        return Err(format!("more than {} mask values", nx * ny));
    }
    Grid2D::from_mask(nx, ny, h, (x0, y0), inside).map_err(|e| e.to_string())
}

pub fn read_mask_file(path: &Path) -> Result<Grid2D> {
    let text = std::fs::read_to_string(path)?;
    parse_mask(&text).map_err(|reason| Error::MaskFile {
        path: path.to_path_buf(),
        reason,
    })
}

/// Cell-centered scalar values on a grid. Values on outside cells are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Grid2D) -> Self {
        Self {
            nx: grid.nx,
            ny: grid.ny,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: &Grid2D, c: f64) -> Self {
        Self::from_fn(grid, |_, _| c)
    }

    /// Samples `f` at the centers of inside cells.
    pub fn from_fn(grid: &Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut field = Self::zeros(grid);
        for (i, j, k) in grid.cells() {
            let (x, y) = grid.center(i, j);
            field.values[k] = f(x, y);
        }
        field
    }

    pub fn check_grid(&self, grid: &Grid2D) -> Result<()> {
        if self.nx == grid.nx && self.ny == grid.ny && self.values.len() == grid.len() {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                nx: grid.nx,
                ny: grid.ny,
                got_nx: self.nx,
                got_ny: self.ny,
            })
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            nx: self.nx,
            ny: self.ny,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Maximum absolute value over inside cells.
    pub fn max_abs(&self, grid: &Grid2D) -> f64 {
        grid.cells().map(|(_, _, k)| self.values[k].abs()).fold(0.0, f64::max)
    }

    /// `Σ value · h²` over inside cells.
    pub fn integral(&self, grid: &Grid2D) -> f64 {
        grid.cells().map(|(_, _, k)| self.values[k]).sum::<f64>() * grid.cell_area()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_disk_area() {
        let g = build_grid(&DomainSpec::unit_disk(), 64).unwrap();
        assert_eq!((g.nx, g.ny), (64, 64));
        let expected = PI * 32.0 * 32.0;
        let got = g.inside_count() as f64;
        assert!((got - expected).abs() / expected < 0.05, "{got} vs {expected}");
        assert_eq!(g.hole_count(), 0);
    }

    #[test]
    fn unit_square_is_all_inside() {
        let g = build_grid(&DomainSpec::rectangle(0.0, 1.0, 0.0, 1.0), 16).unwrap();
        assert_eq!((g.nx, g.ny), (16, 16));
        assert_eq!(g.inside_count(), 256);
        // boundary sits half a cell away from the outer centers
        let f = g.fractions(g.idx(0, 5));
        assert!((f[0] - 0.5).abs() < 1e-12);
        assert_eq!(f[1], 1.0);
        assert!(g.boundary_band[g.idx(15, 15)]);
        assert!(!g.boundary_band[g.idx(5, 5)]);
    }

    #[test]
    fn annulus_errors_and_holes() {
        assert!(matches!(
            build_grid(&DomainSpec::annulus(0.5, 0.4), 32),
            Err(Error::InvalidDomain(_))
        ));
        let g = build_grid(&DomainSpec::annulus(0.5, 1.0), 64).unwrap();
        assert_eq!(g.hole_count(), 1);
    }

    #[test]
    fn resolution_and_empty_mask_errors() {
        assert!(matches!(
            build_grid(&DomainSpec::unit_disk(), 4),
            Err(Error::ResolutionTooSmall(4))
        ));
        // a thin sliver that no cell center falls into
        let thin = DomainSpec::rectangle(0.0, 1.0, 0.0, 0.001);
        let g = build_grid(&thin, 8);
        assert!(g.is_ok() || matches!(g, Err(Error::EmptyMask { .. })));
        assert!(matches!(
            Grid2D::from_mask(2, 2, 0.1, (0.0, 0.0), vec![false; 4]),
            Err(Error::EmptyMask { .. })
        ));
    }

    #[test]
    fn disk_fractions_match_circle() {
        let g = build_grid(&DomainSpec::unit_disk(), 32).unwrap();
        for (i, j, k) in g.cells() {
            let (x, y) = g.center(i, j);
            for (d, &(di, dj)) in DIRECTIONS.iter().enumerate() {
                let t = g.fractions(k)[d];
                if t < 1.0 {
                    let (bx, by) = (x + t * di as f64 * g.h, y + t * dj as f64 * g.h);
                    if t > MIN_BOUNDARY_FRACTION {
                        assert!((bx.hypot(by) - 1.0).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn mask_round_trip() {
        let g = build_grid(&DomainSpec::annulus(0.3, 1.0), 20).unwrap();
        let parsed = parse_mask(&g.to_mask_string()).unwrap();
        assert_eq!(parsed.inside, g.inside);
        assert_eq!(parsed.hole_count(), 1);
        assert!(parse_mask("2 2 0.5 0 0\n1 1 1").is_err());
        assert!(parse_mask("2 2 0.5 0 0\n1 1 1 2").is_err());
    }
}

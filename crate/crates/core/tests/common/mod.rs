//! Problem builders and independent oracles shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use filmvortex::geometry::{effective_field, thickness_field, AppliedField, EffectiveFieldData, FilmGeometry};
use filmvortex::grid::{build_grid, DomainSpec, Grid2D, ScalarField, DIRECTIONS};
use filmvortex::obstacle::{assemble, ObstacleProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn disk_problem(film: &FilmGeometry, applied: AppliedField, res: usize) -> (ObstacleProblem, EffectiveFieldData) {
    let g = build_grid(&DomainSpec::unit_disk(), res).unwrap();
    let a = thickness_field(film, &g).unwrap();
    let d = effective_field(film, applied, &g).unwrap();
    (assemble(&g, &a, &d.f).unwrap(), d)
}

pub fn example1(strength: f64, res: usize) -> (ObstacleProblem, EffectiveFieldData) {
    disk_problem(&FilmGeometry::example1(), AppliedField::new(strength, 0.0, 0.0), res)
}

pub fn example2(strength: f64, res: usize) -> (ObstacleProblem, EffectiveFieldData) {
    disk_problem(&FilmGeometry::example2(), AppliedField::new(0.0, -strength, 0.0), res)
}

/// A 12 × 12 instance with a random mask, thickness in `[0.5, 2]` and forcing
/// large enough to touch both obstacles.
pub fn random_instance(seed: u64) -> ObstacleProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 12;
    let mut inside: Vec<bool> = (0..n * n).map(|_| rng.gen::<f64>() > 0.15).collect();
    inside[n * n / 2 + n / 2] = true;
    let g = Grid2D::from_mask(n, n, 1.0 / n as f64, (0.0, 0.0), inside).unwrap();
    let mut a = ScalarField::constant(&g, 1.0);
    let mut f = ScalarField::zeros(&g);
    for k in 0..n * n {
        a.values[k] = rng.gen_range(0.5..2.0);
        f.values[k] = rng.gen_range(-400.0..400.0);
    }
    assemble(&g, &a, &f).unwrap()
}

/// `-h² L` as a dense matrix over the inside cells, assembled from the
/// thickness and boundary fractions, with right-hand side `h² F`.
pub struct Dense {
    pub cells: Vec<usize>,
    pub k: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

pub fn dense(p: &ObstacleProblem) -> Dense {
    let g = &p.grid;
    let cells: Vec<usize> = g.cells().map(|(_, _, k)| k).collect();
    let row = |k: usize| cells.binary_search(&k).unwrap();
    let n = cells.len();
    let mut k = vec![vec![0.0; n]; n];
    for (i, j, c) in g.cells() {
        let r = row(c);
        let frac = g.fractions(c);
        for (d, &(di, dj)) in DIRECTIONS.iter().enumerate() {
            match g.neighbor(i, j, di, dj) {
                Some(nb) => {
                    let w = 0.5 * (1.0 / p.a.values[c] + 1.0 / p.a.values[nb]);
                    k[r][r] += w;
                    k[r][row(nb)] -= w;
                }
                None => k[r][r] += 1.0 / p.a.values[c] / frac[d],
            }
        }
    }
    let h2 = g.cell_area();
    Dense {
        b: cells.iter().map(|&c| p.f.values[c] * h2).collect(),
        lo: cells.iter().map(|&c| -0.5 * p.a.values[c]).collect(),
        hi: cells.iter().map(|&c| 0.5 * p.a.values[c]).collect(),
        cells,
        k,
    }
}

/// Gaussian elimination with partial pivoting.
pub fn lu_solve(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs())).unwrap();
        m.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            if f != 0.0 {
                for q in c..n {
                    m[r][q] -= f * m[c][q];
                }
                b[r] -= f * b[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|q| m[r][q] * x[q]).sum();
        x[r] = (b[r] - s) / m[r][r];
    }
    x
}

/// Primal-dual active set iteration with exact dense solves. Returns the
/// minimizer over the inside cells in grid order and the number of steps.
pub fn active_set_solve(d: &Dense) -> (Vec<f64>, usize) {
    let n = d.b.len();
    let mut u = vec![0.0; n];
    let mut r = d.b.clone();
    let mut state: Vec<i8> = vec![2; n];
    for step in 1..=500 {
        let next: Vec<i8> = (0..n)
            .map(|i| {
                let t = u[i] + r[i] / d.k[i][i];
                if t > d.hi[i] {
                    1
                } else if t < d.lo[i] {
                    -1
                } else {
                    0
                }
            })
            .collect();
        if next == state {
            return (u, step);
        }
        state = next;
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 0).collect();
        for i in 0..n {
            match state[i] {
                1 => u[i] = d.hi[i],
                -1 => u[i] = d.lo[i],
                _ => {}
            }
        }
        let m: Vec<Vec<f64>> = free
            .iter()
            .map(|&i| free.iter().map(|&j| d.k[i][j]).collect())
            .collect();
        let rhs: Vec<f64> = free
            .iter()
            .map(|&i| d.b[i] - (0..n).filter(|&j| state[j] != 0).map(|j| d.k[i][j] * u[j]).sum::<f64>())
            .collect();
        for (&i, v) in free.iter().zip(lu_solve(m, rhs)) {
            u[i] = v;
        }
        for i in 0..n {
            r[i] = d.b[i] - (0..n).map(|j| d.k[i][j] * u[j]).sum::<f64>();
        }
    }
    panic!("active set iteration did not settle");
}

/// `∫|∇ψ|²` for `-Δψ = exp(-r²/w²)` in the unit disk with `ψ = 0` on the
/// circle: `2π ∫ m(r)²/r dr` with `m(r) = ∫₀^r s ρ(s) ds`.
pub fn gaussian_disk_energy(w: f64) -> f64 {
    let m = |r: f64| 0.5 * w * w * (1.0 - (-(r * r) / (w * w)).exp());
    let n = 20_000;
    let dr = 1.0 / n as f64;
    let f = |r: f64| if r == 0.0 { 0.0 } else { m(r).powi(2) / r };
    let mut s = f(0.0) + f(1.0);
    for i in 1..n {
        s += f(i as f64 * dr) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    2.0 * std::f64::consts::PI * s * dr / 3.0
}

/// `u(-x, y) + u(x, y)` over mirrored cell pairs, for a grid symmetric in x.
pub fn oddness_defect(g: &Grid2D, u: &ScalarField) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, j, k) in g.cells() {
        let m = g.idx(g.nx - 1 - i, j);
        assert!(g.inside[m], "grid is not mirror symmetric");
        worst = worst.max((u.values[k] + u.values[m]).abs());
    }
    worst
}

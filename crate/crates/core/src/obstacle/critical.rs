//! Bisection for the field strength at which the coincidence sets appear.

use serde::{Deserialize, Serialize};

use super::{radii::mean_radius, solve_with, Label, ObstacleProblem, ObstacleSolution, SolverOptions};
use crate::error::{Error, Result};
use crate::geometry::{effective_field, thickness_field, AppliedField, FilmGeometry};
use crate::grid::{Grid2D, ScalarField};

/// Which contact the bisection looks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ContactKind {
    #[default]
    Any,
    Upper,
    Lower,
}

impl ContactKind {
    fn hit(self, labels: &[Label]) -> bool {
        labels.iter().any(|&l| match self {
            ContactKind::Any => l != Label::Inactive,
            ContactKind::Upper => l == Label::UpperActive,
            ContactKind::Lower => l == Label::LowerActive,
        })
    }
}

/// Problems `H ↦ (a, H F₁)` along a fixed field direction, where `F₁` is the
/// forcing of the unit-strength field.
#[derive(Debug, Clone)]
pub struct CriticalFamily {
    pub unit: ObstacleProblem,
}

impl CriticalFamily {
    pub fn from_geometry(film: &FilmGeometry, direction: AppliedField, grid: &Grid2D) -> Result<Self> {
        let a = thickness_field(film, grid)?;
        let data = effective_field(film, direction, grid)?;
        Ok(Self {
            unit: super::assemble(grid, &a, &data.f)?,
        })
    }

    pub fn problem_at(&self, strength: f64) -> Result<ObstacleProblem> {
        self.unit.with_forcing(self.unit.f.map(|v| v * strength))
    }
}

/// One solve made during the search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Probe {
    pub strength: f64,
    pub upper_cells: usize,
    pub lower_cells: usize,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalReport {
    pub critical: f64,
    pub lo: f64,
    pub hi: f64,
    pub kind: ContactKind,
    pub probes: Vec<Probe>,
    /// Centers of the contact cells at `hi`.
    pub upper_contact: Vec<(f64, f64)>,
    pub lower_contact: Vec<(f64, f64)>,
    /// Mean distance of the contact cells from the footprint centroid.
    pub upper_mean_radius: Option<f64>,
    pub lower_mean_radius: Option<f64>,
}

fn probe(strength: f64, sol: &ObstacleSolution) -> Probe {
    let count = |l: Label| sol.labels.iter().filter(|&&x| x == l).count();
    Probe {
        strength,
        upper_cells: count(Label::UpperActive),
        lower_cells: count(Label::LowerActive),
        iterations: sol.iterations,
    }
}

/// Bisects `[lo, hi]` until its width is at most `tol` and returns the
/// midpoint. Below the first contact the solution is linear in the strength,
/// so each probe is started from the last contact-free solution rescaled.
pub fn critical_field(
    family: &CriticalFamily,
    kind: ContactKind,
    bracket: (f64, f64),
    tol: f64,
    opts: &SolverOptions,
) -> Result<CriticalReport> {
    let (mut lo, mut hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
        return Err(Error::InvalidBracket {
            lo,
            hi,
            reason: "need 0 <= lo < hi".into(),
        });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bisection tolerance must be positive, got {tol}"
        )));
    }
    let mut probes = Vec::new();
    let mut run = |strength: f64, start: Option<&ScalarField>| -> Result<(ObstacleProblem, ObstacleSolution)> {
        let p = family.problem_at(strength)?;
        let s = solve_with(&p, opts, start, |_, _| {})?;
        probes.push(probe(strength, &s));
        Ok((p, s))
    };
    let (_, s_lo) = run(lo, None)?;
    if kind.hit(&s_lo.labels) {
        return Err(Error::InvalidBracket {
            lo,
            hi,
            reason: format!("contact already present at {lo}"),
        });
    }
    let (mut p_hi, mut s_hi) = run(hi, None)?;
    if !kind.hit(&s_hi.labels) {
        return Err(Error::InvalidBracket {
            lo,
            hi,
            reason: format!("no contact at {hi}"),
        });
    }
    let mut u_lo = s_lo.u;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let start = (lo > 0.0).then(|| u_lo.map(|v| v * mid / lo));
        let (p, s) = run(mid, start.as_ref())?;
        if kind.hit(&s.labels) {
            hi = mid;
            p_hi = p;
            s_hi = s;
        } else {
            lo = mid;
            u_lo = s.u;
        }
    }
    let grid = &p_hi.grid;
    let centroid = grid.centroid();
    let contact = |l: Label| -> Vec<(f64, f64)> {
        grid.cells()
            .filter(|&(_, _, k)| s_hi.labels[k] == l)
            .map(|(i, j, _)| grid.center(i, j))
            .collect()
    };
    let mask = |l: Label| -> Vec<bool> { s_hi.labels.iter().map(|&x| x == l).collect() };
    Ok(CriticalReport {
        critical: 0.5 * (lo + hi),
        lo,
        hi,
        kind,
        probes,
        upper_contact: contact(Label::UpperActive),
        lower_contact: contact(Label::LowerActive),
        upper_mean_radius: mean_radius(grid, &mask(Label::UpperActive), centroid),
        lower_mean_radius: mean_radius(grid, &mask(Label::LowerActive), centroid),
    })
}

//! The five commands. Each reads a validated [`RunConfig`] and writes its
//! artifacts under the output directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use filmvortex::export::{write_json, write_solution, SolutionSummary, SCHEMA_VERSION};
use filmvortex::geometry::{effective_field, thickness_field, AppliedField, EffectiveFieldData, FilmGeometry};
use filmvortex::grid::{build_grid, Grid2D, ScalarField};
use filmvortex::hodge::{decompose, decompose_cells, harmonic_basis, random_smooth_field, HodgeReport, DEFAULT_TOL};
use filmvortex::obstacle::{
    assemble, critical_field, current, solve, ContactKind, CriticalFamily, CriticalReport, ObstacleProblem,
    ObstacleSolution,
};
use filmvortex::recovery::{gamma_gap, GapInput, GapOptions, GapReport};
use filmvortex::staggered::Complex;
use filmvortex::Error;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ConfigError, HodgeSource, RunConfig};

/// Largest flux defect of the harmonic basis accepted by `hodge-check`.
pub const FLUX_THRESHOLD: f64 = 1e-4;

/// A failed run: exit code, stage and message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: u8,
    pub stage: &'static str,
    pub message: String,
}

impl Failure {
    pub fn config(e: ConfigError) -> Self {
        Self {
            code: 1,
            stage: "config",
            message: e.0,
        }
    }

    fn numerical(stage: &'static str, message: impl Into<String>) -> Self {
        Self {
            code: 2,
            stage,
            message: message.into(),
        }
    }

    /// Bad input maps to 1, everything the numerics run into maps to 2.
    fn from_error(stage: &'static str, e: Error) -> Self {
        let code = match e {
            Error::InvalidDomain(_)
            | Error::EmptyMask { .. }
            | Error::ResolutionTooSmall(_)
            | Error::NonPositiveThickness { .. }
            | Error::ObstacleOrder { .. }
            | Error::InvalidParameter(_)
            | Error::InvalidBracket { .. }
            | Error::KappaTooSmall { .. }
            | Error::MaskFile { .. }
            | Error::Io(_) => 1,
            _ => 2,
        };
        Self {
            code,
            stage,
            message: e.to_string(),
        }
    }
}

fn at(stage: &'static str) -> impl Fn(Error) -> Failure {
    move |e| Failure::from_error(stage, e)
}

pub struct Context {
    pub config: RunConfig,
    pub out: PathBuf,
    pub quiet: bool,
}

impl Context {
    fn log(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

/// Grid, film and thickness shared by every problem of a run.
struct Setup {
    grid: Grid2D,
    film: FilmGeometry,
    a: ScalarField,
}

fn setup(cfg: &RunConfig) -> Result<Setup, Failure> {
    let grid = build_grid(&cfg.domain_spec(), cfg.grid.resolution).map_err(at("grid"))?;
    let film = cfg.geometry.film();
    let a = thickness_field(&film, &grid).map_err(at("geometry"))?;
    Ok(Setup { grid, film, a })
}

struct Solved {
    problem: ObstacleProblem,
    solution: ObstacleSolution,
    field: EffectiveFieldData,
}

fn solve_at(cfg: &RunConfig, s: &Setup, applied: AppliedField) -> Result<Solved, Failure> {
    let field = effective_field(&s.film, applied, &s.grid).map_err(at("geometry"))?;
    let problem = assemble(&s.grid, &s.a, &field.f).map_err(at("assemble"))?;
    let solution = solve(&problem, &cfg.solver_options()).map_err(at("solve"))?;
    Ok(Solved {
        problem,
        solution,
        field,
    })
}

fn write_solved(dir: &Path, cfg: &RunConfig, applied: AppliedField, s: &Solved) -> Result<SolutionSummary, Failure> {
    let summary = SolutionSummary::from_solve(&cfg.geometry_name(), applied, &s.problem, &s.solution, &s.field);
    write_solution(dir, &s.problem, &s.solution, &s.field, &summary).map_err(at("write"))?;
    Ok(summary)
}

fn write_report<T: Serialize>(ctx: &Context, name: &str, value: &T) -> Result<PathBuf, Failure> {
    fs::create_dir_all(&ctx.out).map_err(|e| at("write")(e.into()))?;
    let path = ctx.out.join(name);
    write_json(&path, value).map_err(at("write"))?;
    Ok(path)
}

pub fn cmd_solve(ctx: &Context) -> Result<(), Failure> {
    let cfg = &ctx.config;
    let s = setup(cfg)?;
    let applied = cfg.applied();
    ctx.log(format!(
        "solving {} at H = {:?}, {} cells",
        cfg.geometry_name(),
        cfg.field.h,
        s.grid.inside_count()
    ));
    let solved = solve_at(cfg, &s, applied)?;
    let summary = write_solved(&ctx.out, cfg, applied, &solved)?;
    ctx.log(format!(
        "converged in {} sweeps; |S+| = {:.6}, |S-| = {:.6}; wrote {}",
        solved.solution.iterations,
        summary.upper_area,
        summary.lower_area,
        ctx.out.display()
    ));
    Ok(())
}

/// Directory of sweep point `i`.
pub fn sweep_dir(out: &Path, i: usize) -> PathBuf {
    out.join(format!("h_{i:03}"))
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn cmd_sweep(ctx: &Context) -> Result<(), Failure> {
    let cfg = &ctx.config;
    let strengths = cfg.sweep().map_err(Failure::config)?.strengths();
    let direction = cfg.direction().map_err(Failure::config)?;
    let s = setup(cfg)?;
    ctx.log(format!("sweeping {} strengths", strengths.len()));
    let results: Vec<Result<SolutionSummary, Failure>> = strengths
        .par_iter()
        .enumerate()
        .map(|(i, &h)| {
            let applied = direction.scaled(h);
            let solved = solve_at(cfg, &s, applied)?;
            write_solved(&sweep_dir(&ctx.out, i), cfg, applied, &solved)
        })
        .collect();

    let mut csv = String::from(
        "index,H,status,mean_field_energy,dual_energy,total_variation,upper_area,lower_area,upper_inner,upper_outer,lower_outer,iterations\n",
    );
    let mut failed = 0;
    for (i, (h, r)) in strengths.iter().zip(&results).enumerate() {
        match r {
            Ok(m) => {
                let e = m.energies.as_ref();
                let _ = writeln!(
                    csv,
                    "{i},{h},ok,{},{},{},{},{},{},{},{},{}",
                    cell(e.map(|e| e.mean_field)),
                    cell(e.map(|e| e.dual)),
                    cell(m.total_variation),
                    m.upper_area,
                    m.lower_area,
                    cell(m.radii.upper_inner),
                    cell(m.radii.upper_outer),
                    cell(m.radii.lower_outer),
                    m.iterations.map(|n| n.to_string()).unwrap_or_default(),
                );
            }
            Err(f) => {
                failed += 1;
                eprintln!("error [{}] at H = {h}: {}", f.stage, f.message);
                let _ = writeln!(csv, "{i},{h},failed,,,,,,,,,");
            }
        }
    }
    fs::create_dir_all(&ctx.out).map_err(|e| at("write")(e.into()))?;
    fs::write(ctx.out.join("sweep.csv"), csv).map_err(|e| at("write")(e.into()))?;
    ctx.log(format!(
        "{} of {} points solved; wrote {}",
        strengths.len() - failed,
        strengths.len(),
        ctx.out.display()
    ));
    if failed > 0 {
        return Err(Failure::numerical(
            "sweep",
            format!("{failed} of {} points failed", strengths.len()),
        ));
    }
    Ok(())
}

#[derive(Serialize)]
struct CriticalOutput<'a> {
    schema_version: u32,
    geometry: String,
    direction: AppliedField,
    resolution: usize,
    h: f64,
    contact: ContactKind,
    report: &'a CriticalReport,
}

pub fn cmd_critical(ctx: &Context) -> Result<(), Failure> {
    let cfg = &ctx.config;
    let c = cfg.critical().map_err(Failure::config)?;
    let direction = cfg.direction().map_err(Failure::config)?;
    let s = setup(cfg)?;
    let family = CriticalFamily::from_geometry(&s.film, direction, &s.grid).map_err(at("assemble"))?;
    ctx.log(format!(
        "bisecting on [{}, {}] to {}",
        c.bracket[0], c.bracket[1], c.tol
    ));
    let report = critical_field(
        &family,
        c.contact,
        (c.bracket[0], c.bracket[1]),
        c.tol,
        &cfg.solver_options(),
    )
    .map_err(at("critical"))?;
    let path = write_report(
        ctx,
        "critical.json",
        &CriticalOutput {
            schema_version: SCHEMA_VERSION,
            geometry: cfg.geometry_name(),
            direction,
            resolution: cfg.grid.resolution,
            h: s.grid.h,
            contact: c.contact,
            report: &report,
        },
    )?;
    ctx.log(format!(
        "critical field {:.6}; wrote {}",
        report.critical,
        path.display()
    ));
    Ok(())
}

#[derive(Serialize)]
struct HodgeCase {
    seed: Option<u64>,
    report: HodgeReport,
    worst: f64,
    pass: bool,
}

#[derive(Serialize)]
struct HarmonicSummary {
    count: usize,
    flux_defect: f64,
    pass: bool,
}

#[derive(Serialize)]
struct HodgeOutput {
    schema_version: u32,
    geometry: String,
    resolution: usize,
    threshold: f64,
    cases: Vec<HodgeCase>,
    harmonic: HarmonicSummary,
    all_pass: bool,
}

pub fn cmd_hodge_check(ctx: &Context) -> Result<(), Failure> {
    let cfg = &ctx.config;
    let hc = cfg.hodge().map_err(Failure::config)?;
    let s = setup(cfg)?;
    let case = |seed: Option<u64>, report: HodgeReport| {
        let worst = report.worst();
        HodgeCase {
            seed,
            report,
            worst,
            pass: worst <= hc.threshold,
        }
    };
    let cases = match hc.source {
        HodgeSource::Random => {
            let cx = Complex::new(&s.grid);
            let first = hc.seed.unwrap_or_default();
            (first..first + hc.fields as u64)
                .into_par_iter()
                .map(|seed| {
                    let z = random_smooth_field(&cx, seed);
                    let split = decompose(&cx, &z, &s.a, DEFAULT_TOL).map_err(at("decompose"))?;
                    Ok(case(Some(seed), split.report(&cx, &z, &s.a).map_err(at("decompose"))?))
                })
                .collect::<Result<Vec<_>, Failure>>()?
        }
        HodgeSource::Solution => {
            let solved = solve_at(cfg, &s, cfg.applied())?;
            let j = current(&solved.solution.u, &solved.problem, &solved.field);
            let (cx, z, split) = decompose_cells(&s.grid, &j, &s.a, DEFAULT_TOL).map_err(at("decompose"))?;
            vec![case(None, split.report(&cx, &z, &s.a).map_err(at("decompose"))?)]
        }
    };
    let cx = Complex::new(&s.grid);
    let basis = harmonic_basis(&cx, &s.a, DEFAULT_TOL).map_err(at("harmonic"))?;
    let flux_defect = basis.flux_defect();
    let harmonic = HarmonicSummary {
        count: basis.len(),
        flux_defect,
        pass: flux_defect <= FLUX_THRESHOLD,
    };
    let all_pass = harmonic.pass && cases.iter().all(|c| c.pass);
    let worst = cases.iter().map(|c| c.worst).fold(0.0, f64::max);
    let path = write_report(
        ctx,
        "hodge.json",
        &HodgeOutput {
            schema_version: SCHEMA_VERSION,
            geometry: cfg.geometry_name(),
            resolution: cfg.grid.resolution,
            threshold: hc.threshold,
            cases,
            harmonic,
            all_pass,
        },
    )?;
    ctx.log(format!(
        "worst relative defect {worst:.3e}, flux defect {flux_defect:.3e}; wrote {}",
        path.display()
    ));
    if !all_pass {
        return Err(Failure::numerical(
            "hodge-check",
            format!("defect {worst:e} or flux defect {flux_defect:e} above threshold"),
        ));
    }
    Ok(())
}

#[derive(Serialize)]
struct GammaOutput<'a> {
    schema_version: u32,
    geometry: String,
    applied: AppliedField,
    resolution: usize,
    vortex_free: bool,
    options: &'a GapOptions,
    report: &'a GapReport,
}

pub fn cmd_gamma_check(ctx: &Context) -> Result<(), Failure> {
    let cfg = &ctx.config;
    let gc = cfg.gamma().map_err(Failure::config)?;
    let opts = gc.options();
    let s = setup(cfg)?;
    let applied = cfg.applied();
    let input = if gc.vortex_free {
        let field = effective_field(&s.film, applied, &s.grid).map_err(at("geometry"))?;
        GapInput::vortex_free(&s.grid, &s.a, &field, applied)
    } else {
        let solved = solve_at(cfg, &s, applied)?;
        GapInput::from_solution(&solved.problem, &solved.solution, &solved.field, applied)
    };
    ctx.log(format!("evaluating the gap at {} values of kappa", opts.kappas.len()));
    let report = gamma_gap(&input, &opts).map_err(at("gamma"))?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let path = write_report(
        ctx,
        "gamma.json",
        &GammaOutput {
            schema_version: SCHEMA_VERSION,
            geometry: cfg.geometry_name(),
            applied,
            resolution: cfg.grid.resolution,
            vortex_free: gc.vortex_free,
            options: &opts,
            report: &report,
        },
    )?;
    for r in &report.rows {
        ctx.log(format!(
            "log kappa {:>6.2}: {:>5} vortices, gap {:+.6}",
            r.log_kappa, r.vortices, r.gap
        ));
    }
    ctx.log(format!("wrote {}", path.display()));
    Ok(())
}

//! Run configuration read from TOML.
//!
//! ```toml
//! [geometry]
//! name = "example2"
//!
//! [domain]
//! type = "unit_disk"
//!
//! [field]
//! h = [0.0, -12.0, 0.0]
//!
//! [grid]
//! resolution = 128
//!
//! [sweep]
//! from = 4.0
//! to = 32.0
//! points = 15
//! ```
//!
//! Every table rejects keys it does not know. Relative mask paths are
//! resolved against the directory of the config file.

use std::fmt;
use std::path::{Path, PathBuf};

use filmvortex::geometry::{AppliedField, GeometryPreset};
use filmvortex::grid::{DomainKind, DomainSpec};
use filmvortex::obstacle::{ContactKind, Relaxation, SolverOptions};
use filmvortex::recovery::GapOptions;
use serde::Deserialize;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryPreset,
    #[serde(default = "unit_disk")]
    pub domain: DomainKind,
    pub field: FieldConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    pub sweep: Option<SweepConfig>,
    pub critical: Option<CriticalConfig>,
    pub hodge: Option<HodgeConfig>,
    pub gamma: Option<GammaConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn unit_disk() -> DomainKind {
    DomainKind::UnitDisk
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    /// `(H1, H2, H3)`.
    pub h: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub resolution: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { resolution: 128 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub relax: Relaxation,
    pub check_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolverOptions::default();
        Self {
            tol: d.tol,
            max_iter: d.max_iter,
            relax: d.relax,
            check_every: d.check_every,
        }
    }
}

/// `points` strengths evenly spaced on `[from, to]` along the direction of
/// `field.h`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl SweepConfig {
    pub fn strengths(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.from];
        }
        let step = (self.to - self.from) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.to
                } else {
                    self.from + step * i as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalConfig {
    pub bracket: [f64; 2],
    #[serde(default = "critical_tol")]
    pub tol: f64,
    #[serde(default)]
    pub contact: ContactKind,
}

fn critical_tol() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HodgeSource {
    /// Smooth random fields, one per seed `seed, seed + 1, ...`.
    Random,
    /// The current of the solution at `field.h`.
    Solution,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HodgeConfig {
    pub source: HodgeSource,
    #[serde(default = "hodge_fields")]
    pub fields: usize,
    pub seed: Option<u64>,
    #[serde(default = "hodge_threshold")]
    pub threshold: f64,
}

fn hodge_fields() -> usize {
    20
}

fn hodge_threshold() -> f64 {
    1e-6
}

/// Either `kappas` or `log_kappas`, and a seed.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaConfig {
    pub kappas: Option<Vec<f64>>,
    pub log_kappas: Option<Vec<f64>>,
    pub seed: u64,
    #[serde(default = "gamma_tol")]
    pub tol: f64,
    /// Use the vortex-free target `j = B` instead of the solution.
    #[serde(default)]
    pub vortex_free: bool,
}

fn gamma_tol() -> f64 {
    GapOptions::default().tol
}

impl GammaConfig {
    pub fn options(&self) -> GapOptions {
        let kappas = match (&self.kappas, &self.log_kappas) {
            (Some(k), _) => k.clone(),
            (None, Some(l)) => l.iter().map(|v| v.exp()).collect(),
            (None, None) => Vec::new(),
        };
        GapOptions {
            kappas,
            seed: self.seed,
            tol: self.tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn fail<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

fn positive(name: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        fail(format!("{name} must be a positive number, got {v}"))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(e.to_string().trim_end().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let mut c = Self::parse(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        if let DomainKind::MaskFile { path: mask } = &mut c.domain {
            if mask.is_relative() {
                if let Some(dir) = path.parent() {
                    *mask = dir.join(&*mask);
                }
            }
        }
        Ok(c)
    }

    /// Checks that do not depend on the command.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.grid.resolution < 8 {
            return fail(format!(
                "grid.resolution = {} is below the minimum of 8",
                self.grid.resolution
            ));
        }
        if !self.field.h.iter().all(|v| v.is_finite()) {
            return fail("field.h must be finite");
        }
        positive("solver.tol", self.solver.tol)?;
        if self.solver.max_iter == 0 || self.solver.check_every == 0 {
            return fail("solver.max_iter and solver.check_every must be at least 1");
        }
        if let Relaxation::Fixed(w) = self.solver.relax {
            if !(w > 0.0 && w < 2.0) {
                return fail(format!("solver.relax = {w} must lie in (0, 2)"));
            }
        }
        Ok(())
    }

    pub fn applied(&self) -> AppliedField {
        let [h1, h2, h3] = self.field.h;
        AppliedField::new(h1, h2, h3)
    }

    /// `field.h / |field.h|`, the direction swept by `sweep` and `critical`.
    pub fn direction(&self) -> Result<AppliedField, ConfigError> {
        let [h1, h2, h3] = self.field.h;
        let n = (h1 * h1 + h2 * h2 + h3 * h3).sqrt();
        if n == 0.0 {
            return fail("field.h must be nonzero to define a field direction");
        }
        Ok(AppliedField::new(h1 / n, h2 / n, h3 / n))
    }

    pub fn domain_spec(&self) -> DomainSpec {
        match &self.domain {
            DomainKind::UnitDisk => DomainSpec::unit_disk(),
            DomainKind::Rectangle {
                x_min,
                x_max,
                y_min,
                y_max,
            } => DomainSpec::rectangle(*x_min, *x_max, *y_min, *y_max),
            DomainKind::Annulus { r_inner, r_outer } => DomainSpec::annulus(*r_inner, *r_outer),
            DomainKind::MaskFile { path } => DomainSpec::mask_file(path.clone()),
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            relax: self.solver.relax,
            check_every: self.solver.check_every,
        }
    }

    pub fn geometry_name(&self) -> String {
        self.geometry.film().name
    }

    pub fn sweep(&self) -> Result<&SweepConfig, ConfigError> {
        let s = self
            .sweep
            .as_ref()
            .ok_or_else(|| ConfigError("missing [sweep] table".into()))?;
        if !(s.from.is_finite() && s.to.is_finite()) {
            return fail("sweep.from and sweep.to must be finite");
        }
        if s.points == 0 || s.from > s.to {
            return fail(format!(
                "empty sweep range: {} points on [{}, {}]",
                s.points, s.from, s.to
            ));
        }
        if s.points == 1 && s.from != s.to {
            return fail("a single-point sweep needs sweep.from == sweep.to");
        }
        if s.points > 1 && s.from == s.to {
            return fail("sweep.from == sweep.to needs sweep.points = 1");
        }
        Ok(s)
    }

    pub fn critical(&self) -> Result<&CriticalConfig, ConfigError> {
        let c = self
            .critical
            .as_ref()
            .ok_or_else(|| ConfigError("missing [critical] table".into()))?;
        let [lo, hi] = c.bracket;
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
            return fail(format!("critical.bracket = [{lo}, {hi}] needs 0 <= lo < hi"));
        }
        positive("critical.tol", c.tol)?;
        Ok(c)
    }

    pub fn hodge(&self) -> Result<&HodgeConfig, ConfigError> {
        let c = self
            .hodge
            .as_ref()
            .ok_or_else(|| ConfigError("missing [hodge] table".into()))?;
        positive("hodge.threshold", c.threshold)?;
        if c.source == HodgeSource::Random {
            if c.seed.is_none() {
                return fail("hodge.seed is required for random fields");
            }
            if c.fields == 0 {
                return fail("hodge.fields must be at least 1");
            }
        }
        Ok(c)
    }

    pub fn gamma(&self) -> Result<&GammaConfig, ConfigError> {
        let c = self
            .gamma
            .as_ref()
            .ok_or_else(|| ConfigError("missing [gamma] table".into()))?;
        match (&c.kappas, &c.log_kappas) {
            (Some(_), Some(_)) => return fail("give either gamma.kappas or gamma.log_kappas, not both"),
            (None, None) => return fail("gamma.kappas or gamma.log_kappas is required"),
            _ => {}
        }
        let kappas = c.options().kappas;
        if kappas.is_empty() {
            return fail("the kappa list is empty");
        }
        if let Some(k) = kappas.iter().find(|k| !(k.is_finite() && k.ln() > 1.0)) {
            return fail(format!("kappa = {k} must exceed e"));
        }
        positive("gamma.tol", c.tol)?;
        Ok(c)
    }
}

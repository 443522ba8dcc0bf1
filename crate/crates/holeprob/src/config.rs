//! Run configuration: surface and hole, solver, Fekete, ensemble, sweep and
//! output blocks. Unknown keys are rejected everywhere.

use crate::equilibrium::{Init, SolverOptions};
use crate::error::{Error, Result};
use crate::fekete::FeketeOptions;
use crate::surface::{build_quadrature, HoleRegion, HoleSpec, SurfaceId, SurfaceModel};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub surface: SurfaceId,
    #[serde(default)]
    pub tau: Option<[f64; 2]>,
    pub resolution: usize,
    pub hole: HoleSpec,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub fekete: FeketeBlock,
    #[serde(default)]
    pub ensemble: EnsembleBlock,
    #[serde(default)]
    pub sweep: SweepBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    Uniform,
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverBlock {
    pub tol: f64,
    pub max_iter: usize,
    pub refresh_every: usize,
    pub dual_damping: f64,
    pub init: InitKind,
}

impl Default for SolverBlock {
    fn default() -> Self {
        let d = SolverOptions::default();
        SolverBlock { tol: d.tol, max_iter: d.max_iter, refresh_every: d.refresh_every, dual_damping: d.dual_damping, init: InitKind::Uniform }
    }
}

impl SolverBlock {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            init: match self.init {
                InitKind::Uniform => Init::UniformOnComplement,
                InitKind::Boundary => Init::BoundaryConcentrated,
            },
            refresh_every: self.refresh_every,
            dual_damping: self.dual_damping,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeketeBlock {
    pub m: usize,
    pub restarts: usize,
    pub gtol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for FeketeBlock {
    fn default() -> Self {
        let d = FeketeOptions::default();
        FeketeBlock { m: 32, restarts: d.restarts, gtol: d.gtol, max_iter: d.max_iter, seed: d.seed }
    }
}

impl FeketeBlock {
    pub fn options(&self) -> FeketeOptions {
        FeketeOptions { restarts: self.restarts, gtol: self.gtol, max_iter: self.max_iter, seed: self.seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleBlock {
    pub n: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
}

impl Default for EnsembleBlock {
    fn default() -> Self {
        EnsembleBlock { n: vec![1, 2, 4, 8], trials: 100_000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepBlock {
    pub radii: Vec<f64>,
    pub rel_tol: f64,
    pub witness: bool,
}

impl Default for SweepBlock {
    fn default() -> Self {
        SweepBlock { radii: vec![0.05, 0.1, 0.2, 0.4], rel_tol: 1e-2, witness: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub directory: String,
    pub formats: Vec<Format>,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock { directory: ".".into(), formats: vec![Format::Json, Format::Csv] }
    }
}

impl OutputBlock {
    pub fn csv(&self) -> bool {
        self.formats.contains(&Format::Csv)
    }
}

impl RunConfig {
    /// Parses JSON; errors name the offending key path.
    pub fn from_json(text: &str) -> Result<RunConfig> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config { path, message: e.into_inner().to_string() }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |path: &str, message: String| Err(Error::Config { path: path.into(), message });
        if self.surface == SurfaceId::Torus && self.tau.is_none() {
            return bad("tau", "torus requires tau".into());
        }
        if self.resolution < 8 {
            return bad("resolution", format!("{} < 8", self.resolution));
        }
        if !(self.solver.tol > 0.0) {
            return bad("solver.tol", "must be positive".into());
        }
        if self.ensemble.n.iter().any(|&n| n == 0) {
            return bad("ensemble.n", "degrees must be at least 1".into());
        }
        if self.sweep.radii.iter().any(|&r| !(r > 0.0)) {
            return bad("sweep.radii", "radii must be positive".into());
        }
        Ok(())
    }

    pub fn tau_complex(&self) -> Option<Complex64> {
        self.tau.map(|t| Complex64::new(t[0], t[1]))
    }

    pub fn model(&self) -> Result<SurfaceModel> {
        build_quadrature(self.surface, self.resolution, self.tau_complex())
    }

    pub fn hole(&self, model: &SurfaceModel) -> Result<HoleRegion> {
        HoleRegion::from_spec(model, &self.hole)
    }
}

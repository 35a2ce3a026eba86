//! TOML run configuration. Every field has an explicit default, unknown keys
//! are rejected, and [`RunConfig::resolved`] fills in the values derived at
//! run time so the emitted copy reproduces a run exactly.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{Dealias, NonlinearityForm, NonlinearitySpec, SolveConfig, SolveMode, Term};
use crate::error::{Result, RgError};
use crate::profiles::{make_profile, odd_extension, ProfileId, ProfileKind};
use crate::rg::{RgConfig, WORKING_THRESHOLD};
use crate::spectral::{bq_norm, BqParams, GridSpec, SpectralField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    /// Half width `X` of the domain `[-X, X)`.
    pub half_width: f64,
    pub num_points: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            half_width: 40.0,
            num_points: 2048,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BqSection {
    pub q: f64,
    pub tail_tolerance: f64,
}

impl Default for BqSection {
    fn default() -> Self {
        BqSection {
            q: 2.0,
            tail_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RgSection {
    pub l: f64,
    pub delta: f64,
    pub max_iters: usize,
    /// Absolute; when absent, `1e-10 ‖f_0‖_q`.
    pub stop_g_tol: Option<f64>,
    pub working_threshold: f64,
}

impl Default for RgSection {
    fn default() -> Self {
        RgSection {
            l: 2.0,
            delta: 0.5,
            max_iters: 12,
            stop_g_tol: None,
            working_threshold: WORKING_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormName {
    Linear,
    Burgers,
    H1Derivative,
    H2Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSection {
    #[serde(default)]
    pub m: u32,
    pub n: u32,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NonlinearitySection {
    pub form: FormName,
    pub lambda: f64,
    /// Ignored for `linear` and `burgers`.
    pub terms: Vec<TermSection>,
    /// Floor exponents of the odd class.
    pub a: u32,
    pub b: u32,
    pub r_u: f64,
    pub r_v: f64,
}

impl Default for NonlinearitySection {
    fn default() -> Self {
        NonlinearitySection {
            form: FormName::Burgers,
            lambda: 0.5,
            terms: Vec::new(),
            a: 1,
            b: 1,
            r_u: f64::INFINITY,
            r_v: f64::INFINITY,
        }
    }
}

impl NonlinearitySection {
    pub fn build(&self) -> Result<NonlinearitySpec> {
        let terms = self.terms.iter().map(|t| Term::new(t.m, t.n, t.c)).collect();
        let out = match self.form {
            FormName::Linear => Ok(NonlinearitySpec::linear()),
            FormName::Burgers => NonlinearitySpec::burgers(self.lambda),
            FormName::H1Derivative => NonlinearitySpec::new(
                NonlinearityForm::H1Derivative,
                terms,
                (0, 1),
                self.lambda,
                self.r_u,
                self.r_v,
            ),
            FormName::H2Odd => NonlinearitySpec::new(
                NonlinearityForm::H2Odd,
                terms,
                (self.a, self.b),
                self.lambda,
                self.r_u,
                self.r_v,
            ),
        };
        out.map_err(|e| RgError::Config(format!("nonlinearity: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DealiasName {
    TwoThirds,
    ZeroPad2x,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    Etd,
    Picard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    /// When absent, `64 ⌈L² - 1⌉`.
    pub num_steps: Option<usize>,
    pub dealias: DealiasName,
    pub mode: ModeName,
    pub picard_max_iters: usize,
    pub picard_tol: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            num_steps: None,
            dealias: DealiasName::TwoThirds,
            mode: ModeName::Etd,
            picard_max_iters: 50,
            picard_tol: 1e-13,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileName {
    FixedPoint,
    Gaussian,
    HermiteOdd,
    BumpDipole,
}

/// One summand `amplitude · profile(width)` of the initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSection {
    pub profile: ProfileName,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "one")]
    pub width: f64,
    /// Hermite degree for `hermite_odd`.
    #[serde(default)]
    pub degree: Option<u32>,
    /// Bump separation for `bump_dipole`.
    #[serde(default)]
    pub shift: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl ComponentSection {
    fn profile_id(&self) -> Result<ProfileId> {
        let kind = match self.profile {
            ProfileName::FixedPoint => ProfileKind::FixedPoint,
            ProfileName::Gaussian => ProfileKind::Gaussian,
            ProfileName::HermiteOdd => ProfileKind::HermiteOdd(self.degree.ok_or_else(|| {
                RgError::Config("hermite_odd component needs `degree`".into())
            })?),
            ProfileName::BumpDipole => ProfileKind::BumpDipole {
                shift: self.shift.ok_or_else(|| {
                    RgError::Config("bump_dipole component needs `shift`".into())
                })?,
            },
        };
        Ok(ProfileId::new(kind, self.amplitude, self.width))
    }
}

/// Exactly one of `components`, `samples_file` and `halfline_file` is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialDataSection {
    pub components: Vec<ComponentSection>,
    /// CSV with columns `x,f` on the full grid.
    pub samples_file: Option<PathBuf>,
    /// CSV with columns `x,f` at `x = kΔx`, `k = 0..N/2-1`.
    pub halfline_file: Option<PathBuf>,
    /// Rescale the data to this `B_q` norm.
    pub normalize_to: Option<f64>,
}

impl Default for InitialDataSection {
    fn default() -> Self {
        InitialDataSection {
            components: vec![ComponentSection {
                profile: ProfileName::FixedPoint,
                amplitude: 1.0,
                width: 1.0,
                degree: None,
                shift: None,
            }],
            samples_file: None,
            halfline_file: None,
            normalize_to: Some(0.02),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
    /// Dump `f_n` every this many steps; 0 disables field dumps.
    pub dump_every: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            directory: PathBuf::from("out"),
            dump_every: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub grid: GridSection,
    pub bq: BqSection,
    pub rg: RgSection,
    pub nonlinearity: NonlinearitySection,
    pub solver: SolverSection,
    pub initial_data: InitialDataSection,
    pub output: OutputSection,
}

/// Everything a run needs, built from a [`RunConfig`].
#[derive(Debug, Clone)]
pub struct Resolved {
    pub grid: GridSpec,
    pub rg: RgConfig,
    pub initial: SpectralField,
}

fn read_xf_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rd = csv::Reader::from_path(path)?;
    let headers = rd.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "f" {
        return Err(RgError::Config(format!(
            "{}: expected header `x,f`",
            path.display()
        )));
    }
    let (mut xs, mut fs) = (Vec::new(), Vec::new());
    for rec in rd.records() {
        let rec = rec?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| RgError::Config(format!("{}: bad number {s:?}: {e}", path.display())))
        };
        xs.push(parse(&rec[0])?);
        fs.push(parse(&rec[1])?);
    }
    Ok((xs, fs))
}

fn check_abscissae(xs: &[f64], expected: impl Iterator<Item = f64>, path: &Path) -> Result<()> {
    for (i, (x, e)) in xs.iter().zip(expected).enumerate() {
        if (x - e).abs() > 1e-9 * (1.0 + e.abs()) {
            return Err(RgError::Config(format!(
                "{}: row {i} has x = {x}, grid expects {e}",
                path.display()
            )));
        }
    }
    Ok(())
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| RgError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RgError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        // data files are relative to the config file
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.initial_data.samples_file, &mut cfg.initial_data.halfline_file]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| RgError::Config(e.to_string()))
    }

    /// Copy with every run-time default written out.
    pub fn resolved(&self) -> Self {
        let mut out = self.clone();
        out.solver
            .num_steps
            .get_or_insert(SolveConfig::default_steps(self.rg.l));
        out
    }

    fn solve_config(&self) -> Result<SolveConfig> {
        let mut s = SolveConfig::new(self.rg.l).map_err(|e| RgError::Config(e.to_string()))?;
        if let Some(n) = self.solver.num_steps {
            s.num_steps = n;
        }
        s.dealias = match self.solver.dealias {
            DealiasName::TwoThirds => Dealias::TwoThirds,
            DealiasName::ZeroPad2x => Dealias::ZeroPad2x,
        };
        s.mode = match self.solver.mode {
            ModeName::Etd => SolveMode::EtdMarch,
            ModeName::Picard => SolveMode::PicardDuhamel,
        };
        s.picard_max_iters = self.solver.picard_max_iters;
        s.picard_tol = self.solver.picard_tol;
        s.validate().map_err(|e| RgError::Config(e.to_string()))?;
        Ok(s)
    }

    pub fn bq_params(&self) -> Result<BqParams> {
        BqParams::new(self.bq.q, self.bq.tail_tolerance).map_err(|e| RgError::Config(e.to_string()))
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.grid.half_width, self.grid.num_points)
            .map_err(|e| RgError::Config(e.to_string()))
    }

    /// Validate everything that does not depend on the data files.
    pub fn rg_config(&self) -> Result<RgConfig> {
        let spec = self.nonlinearity.build()?;
        let mut rg = RgConfig::new(self.rg.l, spec).map_err(|e| RgError::Config(e.to_string()))?;
        rg.bq = self.bq_params()?;
        rg.delta = self.rg.delta;
        rg.max_iters = self.rg.max_iters;
        rg.stop_g_tol = self.rg.stop_g_tol;
        rg.working_threshold = self.rg.working_threshold;
        rg.solver = self.solve_config()?;
        rg.validate().map_err(|e| RgError::Config(e.to_string()))?;
        if let Some(v) = self.initial_data.normalize_to {
            if !(v.is_finite() && v > 0.0) {
                return Err(RgError::Config(format!("normalize_to must be positive, got {v}")));
            }
        }
        let sources = usize::from(!self.initial_data.components.is_empty())
            + usize::from(self.initial_data.samples_file.is_some())
            + usize::from(self.initial_data.halfline_file.is_some());
        if sources != 1 {
            return Err(RgError::Config(format!(
                "initial_data needs exactly one of components, samples_file, halfline_file (got {sources})"
            )));
        }
        Ok(rg)
    }

    /// Build the initial data. Half-line data go through the odd extension,
    /// which reports a nonzero value at the origin as a hypothesis violation.
    pub fn initial_data(&self, grid: GridSpec, bq: &BqParams) -> Result<SpectralField> {
        let data = &self.initial_data;
        let f = if let Some(path) = &data.halfline_file {
            let (xs, fs) = read_xf_csv(path)?;
            check_abscissae(&xs, (0..).map(|k| k as f64 * grid.dx()), path)?;
            odd_extension(&fs, grid)?
        } else if let Some(path) = &data.samples_file {
            let (xs, fs) = read_xf_csv(path)?;
            if xs.len() != grid.num_points() {
                return Err(RgError::Config(format!(
                    "{}: {} rows for a {}-point grid",
                    path.display(),
                    xs.len(),
                    grid.num_points()
                )));
            }
            check_abscissae(&xs, grid.xs().into_iter(), path)?;
            SpectralField::from_samples(grid, fs, 1.0)?
        } else {
            let mut acc: Option<SpectralField> = None;
            for c in &data.components {
                let f = make_profile(&c.profile_id()?, grid)?;
                acc = Some(match acc {
                    None => f,
                    Some(a) => a.add(&f)?,
                });
            }
            acc.ok_or_else(|| RgError::Config("initial_data has no components".into()))?
        };
        match data.normalize_to {
            Some(target) => {
                let n = bq_norm(&f, bq)?;
                if n == 0.0 {
                    return Err(RgError::InvalidInput("cannot normalize zero data".into()));
                }
                Ok(f.scaled(target / n))
            }
            None => Ok(f),
        }
    }

    pub fn build(&self) -> Result<Resolved> {
        let grid = self.grid_spec()?;
        let rg = self.rg_config()?;
        let initial = self.initial_data(grid, &rg.bq)?;
        Ok(Resolved { grid, rg, initial })
    }
}

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{Functional, TestFunction};
use crate::domain::{build_grid, Grid1D};
use crate::error::{PmeError, Result};
use crate::model::{regularize, NoiseFamily, NoiseModel, Nonlinearity};
use crate::solver::{Drift, Equation, InitialCondition, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Weight,
    Validate,
    Simulate,
    Contract,
    Comedown,
    Selfsim,
    Mix,
    Stability,
    Lemmas,
    Entropy,
    Semilinear,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Weight => "weight",
            ExperimentKind::Validate => "validate",
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Contract => "contract",
            ExperimentKind::Comedown => "comedown",
            ExperimentKind::Selfsim => "selfsim",
            ExperimentKind::Mix => "mix",
            ExperimentKind::Stability => "stability",
            ExperimentKind::Lemmas => "lemmas",
            ExperimentKind::Entropy => "entropy",
            ExperimentKind::Semilinear => "semilinear",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Emit {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub a: f64,
    pub b: f64,
    #[serde(rename = "N", alias = "n")]
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    PurePower,
    Viscosity,
    Regularized,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub m: f64,
    pub kind: ModelKind,
    /// Index `n` of the viscous and regularized kinds.
    pub n: u32,
    #[serde(rename = "K", alias = "k")]
    pub k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyId {
    Off,
    Additive,
    Linear,
    Holder,
    Branching,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub family: FamilyId,
    /// Exponent parameter of the Hölder and branching families.
    pub kappa: f64,
    pub modes: usize,
    pub amplitude: f64,
    pub decay: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_kappa_bar: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub xi: InitialCondition,
    pub xi_tilde: InitialCondition,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub members: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    /// Rate-fit window; defaults to `[t_end/16, t_end]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<[f64; 2]>,
    /// Level of the clipped functionals.
    pub clip: f64,
    pub functional: Functional,
    /// Allowed growth of `distance + dissipation` per record interval, as a
    /// fraction of the dissipation over that interval.
    pub contraction_slack: f64,
    pub comedown_scale: f64,
    pub stability_n: Vec<u32>,
    pub r_max: f64,
    pub samples: usize,
    pub lemma_pairs: usize,
    pub profile_tol: f64,
    pub check_times: Vec<f64>,
    pub delta: f64,
    pub level: f64,
    pub test_function: TestFunction,
    pub c_cal: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            fit_window: None,
            clip: 1.0,
            functional: Functional::ClippedMass,
            contraction_slack: 0.05,
            comedown_scale: 10.0,
            stability_n: vec![4, 8, 16, 32],
            r_max: 10.0,
            samples: 400,
            lemma_pairs: 1_000_000,
            profile_tol: 1e-10,
            check_times: vec![0.5, 1.0, 5.0, 10.0],
            delta: 0.1,
            level: 0.0,
            test_function: TestFunction::Central,
            c_cal: 0.15,
        }
    }
}

/// Everything that determines an experiment's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub emit: Vec<Emit>,
    pub domain: DomainSection,
    pub model: ModelSection,
    pub noise: NoiseSection,
    pub solver: SolverConfig,
    pub initial: InitialSection,
    pub ensemble: EnsembleSection,
    pub analysis: AnalysisSection,
    /// Where the output files go; `--out` takes precedence. Not part of the hash.
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
}

fn bump(amplitude: f64) -> InitialCondition {
    InitialCondition::Bump { amplitude, center: 0.5, radius: 0.25 }
}

impl ExperimentConfig {
    /// The desk-scale defaults of each experiment.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let mut c = Self {
            experiment: kind,
            emit: vec![Emit::Csv, Emit::Json],
            domain: DomainSection { a: 0.0, b: 1.0, n: 100 },
            model: ModelSection { m: 2.0, kind: ModelKind::PurePower, n: 10, k: 2.0 },
            noise: NoiseSection {
                family: FamilyId::Linear,
                kappa: 0.05,
                modes: 4,
                amplitude: 0.5,
                decay: 2.0,
                declared_k: None,
                declared_kappa: None,
                declared_kappa_bar: None,
            },
            solver: SolverConfig { dt: 1e-3, t_end: 1.0, record_every: 10, ..Default::default() },
            initial: InitialSection { xi: bump(2.0), xi_tilde: bump(-2.0) },
            ensemble: EnsembleSection { members: 16 },
            analysis: AnalysisSection::default(),
            output_dir: None,
        };
        match kind {
            ExperimentKind::Weight => c.domain.n = 99,
            ExperimentKind::Validate | ExperimentKind::Lemmas | ExperimentKind::Simulate => {}
            ExperimentKind::Contract => {
                c.domain.n = 200;
                c.solver = SolverConfig { dt: 2e-4, t_end: 4.0, record_every: 250, ..c.solver };
                c.ensemble.members = 64;
                c.analysis.fit_window = Some([0.5, 4.0]);
            }
            ExperimentKind::Comedown => {
                c.solver = SolverConfig { dt: 2e-4, t_end: 2.0, record_every: 50, ..c.solver };
                // xi~ is unused: the second run starts from comedown_scale * xi
                c.initial = InitialSection { xi: bump(10.0), xi_tilde: bump(100.0) };
                c.ensemble.members = 32;
            }
            ExperimentKind::Selfsim => {
                c.domain.n = 400;
                c.noise.family = FamilyId::Off;
                c.solver = SolverConfig { dt: 1e-4, t_end: 10.0, record_every: 500, ..c.solver };
                c.initial.xi = InitialCondition::Profile { amplitude: 1.0 };
                c.initial.xi_tilde = InitialCondition::Zero;
                c.ensemble.members = 1;
                c.analysis.fit_window = Some([0.5, 10.0]);
            }
            ExperimentKind::Mix => {
                c.solver = SolverConfig { dt: 5e-4, t_end: 8.0, record_every: 100, ..c.solver };
                c.initial = InitialSection {
                    xi: InitialCondition::WBump { amplitude: 5.0 },
                    xi_tilde: InitialCondition::WBump { amplitude: -5.0 },
                };
                c.ensemble.members = 64;
                c.analysis.fit_window = Some([0.5, 8.0]);
            }
            ExperimentKind::Stability => {
                c.noise.family = FamilyId::Off;
                c.noise.modes = 32;
                c.solver = SolverConfig { dt: 5e-4, t_end: 1.0, record_every: 20, ..c.solver };
                c.ensemble.members = 16;
            }
            ExperimentKind::Entropy => {
                c.noise.family = FamilyId::Off;
                c.solver = SolverConfig { dt: 1e-4, t_end: 0.5, record_every: 1, ..c.solver };
                c.ensemble.members = 1;
            }
            ExperimentKind::Semilinear => {
                c.solver = SolverConfig {
                    dt: 1e-3,
                    t_end: 2.0,
                    record_every: 10,
                    equation: Equation::Semilinear,
                    drift: Drift::CubicDissipative,
                    ..c.solver
                };
                c.initial =
                    InitialSection { xi: bump(2.0), xi_tilde: InitialCondition::Sine { amplitude: -1.0, mode: 1 } };
                c.ensemble.members = 32;
                c.analysis.fit_window = Some([0.25, 2.0]);
            }
        }
        c
    }

    /// Defaults of `kind` overridden by the TOML document `text`. Unknown keys
    /// fail with their name.
    pub fn from_toml(kind: ExperimentKind, text: &str) -> Result<Self> {
        let user: toml::Table = toml::from_str(text).map_err(|e| PmeError::Config(format!("config: {e}")))?;
        if let Some(v) = user.get("experiment") {
            if v.as_str() != Some(kind.name()) {
                return Err(PmeError::Config(format!(
                    "config names experiment {v} but the command is `{}`",
                    kind.name()
                )));
            }
        }
        let defaults = toml::Value::try_from(Self::defaults(kind))
            .map_err(|e| PmeError::Config(format!("cannot serialize defaults: {e}")))?;
        let merged = merge(defaults, toml::Value::Table(user));
        let config: Self = merged.try_into().map_err(|e| PmeError::Config(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        self.nonlinearity()?;
        self.noise_model()?;
        self.solver.validate()?;
        if self.ensemble.members == 0 {
            return Err(PmeError::Config("ensemble.members must be >= 1".into()));
        }
        if let Some([lo, hi]) = self.analysis.fit_window {
            if !(lo >= 0.0 && hi > lo) {
                return Err(PmeError::Config(format!("analysis.fit_window [{lo}, {hi}] is not an interval")));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid1D> {
        build_grid(self.domain.a, self.domain.b, self.domain.n)
    }

    pub fn nonlinearity(&self) -> Result<Nonlinearity> {
        let ModelSection { m, kind, n, k } = self.model;
        match kind {
            ModelKind::PurePower => Nonlinearity::pure_power(m, k),
            ModelKind::Viscosity => Nonlinearity::viscosity(m, n, k),
            ModelKind::Regularized => regularize(&Nonlinearity::pure_power(m, k)?, n),
            ModelKind::Linear => Nonlinearity::linear(m, k),
        }
    }

    pub fn noise_model(&self) -> Result<NoiseModel> {
        let s = &self.noise;
        let interval = (self.domain.a, self.domain.b);
        let family = match s.family {
            FamilyId::Off => return Ok(NoiseModel::off(interval, self.model.m)),
            FamilyId::Additive => NoiseFamily::Additive,
            FamilyId::Linear => NoiseFamily::Linear,
            FamilyId::Holder => NoiseFamily::Holder { kappa: s.kappa },
            FamilyId::Branching => NoiseFamily::Branching { kappa: s.kappa },
        };
        let nm = NoiseModel::new(family, s.modes, s.amplitude, s.decay, interval, self.model.m)?;
        if s.declared_k.is_none() && s.declared_kappa.is_none() && s.declared_kappa_bar.is_none() {
            return Ok(nm);
        }
        let (k, kappa, kappa_bar) = (
            s.declared_k.unwrap_or(nm.k()),
            s.declared_kappa.unwrap_or(nm.kappa()),
            s.declared_kappa_bar.unwrap_or(nm.kappa_bar()),
        );
        nm.with_declared(k, kappa, kappa_bar)
    }

    /// Lower-case hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config is serializable");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// `analysis.fit_window` or `[t_end/16, t_end]`.
    pub fn fit_window(&self) -> (f64, f64) {
        match self.analysis.fit_window {
            Some([lo, hi]) => (lo, hi),
            None => (self.solver.t_end / 16.0, self.solver.t_end),
        }
    }
}

/// Deep merge of `over` into `base`. A table carrying a `shape` tag replaces
/// its counterpart wholesale, since its other keys depend on the tag.
fn merge(base: toml::Value, over: toml::Value) -> toml::Value {
    match (base, over) {
        (toml::Value::Table(mut b), toml::Value::Table(o)) => {
            for (key, value) in o {
                let merged = match (b.remove(&key), value) {
                    (Some(old), toml::Value::Table(t)) if !t.contains_key("shape") => merge(old, toml::Value::Table(t)),
                    (_, v) => v,
                };
                b.insert(key, merged);
            }
            toml::Value::Table(b)
        }
        (_, over) => over,
    }
}

//! Run configuration: an optional TOML file overlaid by command-line flags.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::table::Format;
use super::HarnessError;
use crate::model::{Potential, ShiftPolicy};
use crate::semiclassical::LevelLimit;
use crate::spectral::SolverSettings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PotentialKind {
    Coulomb,
    Log,
    Yukawa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Oq,
    Schrodinger,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Shooting,
    Fd,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PolicyChoice {
    Integer,
    Ebk,
}

impl PolicyChoice {
    pub fn policy(self) -> ShiftPolicy {
        match self {
            PolicyChoice::Integer => ShiftPolicy::INTEGER,
            PolicyChoice::Ebk => ShiftPolicy::EBK_3D,
        }
    }
}

/// Solver overrides; unset fields keep the defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOverrides {
    pub shooting_steps: Option<usize>,
    pub fd_points: Option<usize>,
    pub max_step: Option<f64>,
    pub rho_min: Option<f64>,
    pub rho_max: Option<f64>,
    pub energy_tol: Option<f64>,
    pub cross_check_tol: Option<f64>,
    pub panels: Option<usize>,
    pub action_energy_tol: Option<f64>,
}

impl SolverOverrides {
    pub fn apply(&self, s: &mut SolverSettings) {
        if let Some(v) = self.shooting_steps {
            s.shooting_steps = v;
        }
        if let Some(v) = self.fd_points {
            s.fd_points = v;
        }
        if let Some(v) = self.max_step {
            s.max_step = v;
        }
        if self.rho_min.is_some() {
            s.rho_min = self.rho_min;
        }
        if self.rho_max.is_some() {
            s.rho_max = self.rho_max;
        }
        if let Some(v) = self.energy_tol {
            s.energy_tol = v;
        }
        if let Some(v) = self.cross_check_tol {
            s.cross_check_tol = v;
        }
        if let Some(v) = self.panels {
            s.action.panels = v;
        }
        if let Some(v) = self.action_energy_tol {
            s.action.energy_tol = v;
        }
    }
}

/// Every key a config file or the command line may set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub potential: Option<PotentialKind>,
    pub lambda: Option<f64>,
    pub method: Option<Method>,
    pub solver: Option<SolverChoice>,
    pub policy: Option<PolicyChoice>,
    pub nmax: Option<u32>,
    pub all_bound: Option<bool>,
    pub dim: Option<u32>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub settings: SolverOverrides,
}

impl ConfigFile {
    /// Fields set in `over` replace those in `self`.
    pub fn overlay(mut self, over: ConfigFile) -> ConfigFile {
        macro_rules! take {
            ($($f:ident),*) => { $( if over.$f.is_some() { self.$f = over.$f; } )* };
        }
        take!(potential, lambda, method, solver, policy, dim, format, output);
        if over.nmax.is_some() {
            self.nmax = over.nmax;
            self.all_bound = None;
        }
        if over.all_bound == Some(true) {
            self.all_bound = Some(true);
            self.nmax = None;
        }
        let s = over.settings;
        macro_rules! take_s {
            ($($f:ident),*) => { $( if s.$f.is_some() { self.settings.$f = s.$f; } )* };
        }
        take_s!(shooting_steps, fd_points, max_step, rho_min, rho_max, energy_tol, cross_check_tol, panels, action_energy_tol);
        self
    }
}

pub fn parse_config(text: &str) -> Result<ConfigFile, HarnessError> {
    toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
}

/// A validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub potential: Potential,
    pub method: Method,
    pub solver: SolverChoice,
    pub policy: PolicyChoice,
    pub limit: LevelLimit,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub settings: SolverSettings,
}

impl RunConfig {
    /// Check every field against the kernel preconditions.
    pub fn from_file(cfg: &ConfigFile) -> Result<Self, HarnessError> {
        let kind = cfg.potential.ok_or_else(|| HarnessError::Argument("--potential is required".into()))?;
        let potential = match kind {
            PotentialKind::Coulomb => Potential::Coulomb,
            PotentialKind::Log => Potential::Logarithmic,
            PotentialKind::Yukawa => {
                let lambda = cfg.lambda.ok_or_else(|| HarnessError::Argument("yukawa needs --lambda".into()))?;
                Potential::yukawa(lambda).map_err(|e| HarnessError::Argument(e.to_string()))?
            }
        };
        if kind != PotentialKind::Yukawa && cfg.lambda.is_some() {
            return Err(HarnessError::Argument(format!("--lambda only applies to yukawa, not {}", potential.name())));
        }
        let limit = match (cfg.nmax, cfg.all_bound.unwrap_or(false)) {
            (Some(_), true) => return Err(HarnessError::Argument("--nmax and --all-bound are exclusive".into())),
            (Some(0), _) => return Err(HarnessError::Argument("--nmax must be at least 1".into())),
            (Some(n), false) => LevelLimit::MaxLevel(n),
            (None, true) => LevelLimit::AllBound,
            (None, false) if kind == PotentialKind::Yukawa => LevelLimit::AllBound,
            (None, false) => LevelLimit::MaxLevel(6),
        };
        if limit == LevelLimit::AllBound && kind != PotentialKind::Yukawa {
            return Err(HarnessError::Argument(format!("{} has infinitely many bound states; use --nmax", potential.name())));
        }
        let mut settings = SolverSettings { dim: cfg.dim.unwrap_or(3), ..SolverSettings::default() };
        cfg.settings.apply(&mut settings);
        settings.validate().map_err(|e| HarnessError::Argument(e.to_string()))?;
        Ok(Self {
            potential,
            method: cfg.method.unwrap_or(Method::Oq),
            solver: cfg.solver.unwrap_or(SolverChoice::Shooting),
            policy: cfg.policy.unwrap_or(PolicyChoice::Ebk),
            limit,
            format: cfg.format.unwrap_or(Format::Csv),
            output: cfg.output.clone(),
            settings,
        })
    }

    /// Semiclassical quantities are only defined for planar orbits in 3D.
    pub fn require_three_dimensions(&self, what: &str) -> Result<(), HarnessError> {
        if self.settings.dim != 3 {
            return Err(HarnessError::Argument(format!("{what} is only available for --dim 3")));
        }
        Ok(())
    }
}

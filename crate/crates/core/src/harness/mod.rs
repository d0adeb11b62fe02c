//! Comparison layer: pairs shifted semiclassical levels with exact ones and
//! builds the tables, counts, critical values and plot series the CLI emits.

pub mod config;
pub mod table;

use std::collections::BTreeSet;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Potential, QuantumNumbers, ReportedEnergy, ShiftPolicy, SpectrumKey};
use crate::semiclassical::{self, LevelLimit, OqError, OqSolution};
use crate::spectral::{self, ExactSpectrum, SolverSettings, SpectralError};

pub use config::{ConfigFile, Method, PolicyChoice, PotentialKind, RunConfig, SolverChoice};
pub use table::{format_sig, Cell, Format, Report, Table};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Argument(String),
    #[error("config: {0}")]
    Config(String),
    #[error("parse: {0}")]
    Parse(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Semiclassical(#[from] OqError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

impl HarnessError {
    pub(crate) fn from_csv(e: csv::Error) -> Self {
        HarnessError::Parse(e.to_string())
    }

    /// Process exit status: 2 bad arguments, 3 numerical failure,
    /// 4 failed consistency check, 5 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Argument(_) | HarnessError::Config(_) | HarnessError::Parse(_) => 2,
            HarnessError::Io { .. } => 5,
            HarnessError::Semiclassical(OqError::Argument(_) | OqError::Model(_)) => 2,
            HarnessError::Spectral(SpectralError::CrossCheck { .. } | SpectralError::NodeMismatch { .. }) => 4,
            HarnessError::Spectral(
                SpectralError::Argument(_) | SpectralError::Model(_) | SpectralError::Grid(_),
            ) => 2,
            HarnessError::Semiclassical(_) | HarnessError::Spectral(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

/// Run description attached to every emitted table.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub potential: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub units: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub all_bound: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver_settings: Option<SolverSettings>,
    /// Largest |E_shooting − E_fd| over the computed states (natural units).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_cross_check_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bound_per_ell: Vec<usize>,
    /// Exact states whose shifted semiclassical partner is unbound.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unpaired_exact: Vec<SpectrumKey>,
    /// Bound shifted semiclassical cells with no exact state.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unpaired_oq: Vec<SpectrumKey>,
    /// Admissible semiclassical cells with no bound solution.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unbound_oq: Vec<SpectrumKey>,
}

impl Metadata {
    pub fn for_run(command: &str, cfg: &RunConfig) -> Self {
        let (n_max, all_bound) = match cfg.limit {
            LevelLimit::MaxLevel(n) => (Some(n), None),
            LevelLimit::AllBound => (None, Some(true)),
        };
        Metadata {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            potential: cfg.potential.name().to_string(),
            lambda: cfg.potential.lambda(),
            units: ReportedEnergy::unit_name(&cfg.potential).to_string(),
            n_max,
            all_bound,
            ..Default::default()
        }
    }
}

/// One row of a shifted-OQ versus exact comparison. The discrepancy is
/// always derived from the two energies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub n: u32,
    pub ell: u32,
    pub e_schr: ReportedEnergy,
    pub e_oq_shifted: ReportedEnergy,
}

impl ComparisonRow {
    pub fn discrepancy(&self) -> f64 {
        (self.e_oq_shifted.value() - self.e_schr.value()).abs()
    }
}

pub const COMPARISON_COLUMNS: [&str; 5] = ["n", "l", "E_schr", "E_oq_shifted", "discrepancy"];

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub metadata: Metadata,
}

impl Comparison {
    pub fn report(&self) -> Report {
        let mut table = Table::new(COMPARISON_COLUMNS);
        for r in &self.rows {
            table.push(vec![
                r.n.into(),
                r.ell.into(),
                r.e_schr.value().into(),
                r.e_oq_shifted.value().into(),
                r.discrepancy().into(),
            ]);
        }
        Report { metadata: self.metadata.clone(), table }
    }
}

/// Shifted quantum numbers paired with the exact state (n, ℓ):
/// n_θ = ℓ + ½, n_r = n − ℓ − ½.
pub fn shifted_partner(key: SpectrumKey) -> Result<QuantumNumbers> {
    if key.ell >= key.n {
        return Err(HarnessError::Argument(format!("no state with n={} l={}", key.n, key.ell)));
    }
    QuantumNumbers::new(2 * (key.n - key.ell) - 1, 2 * key.ell + 1).map_err(|e| HarnessError::Argument(e.to_string()))
}

fn exact_energy(state: &spectral::ExactState, solver: SolverChoice) -> f64 {
    match solver {
        SolverChoice::Shooting | SolverChoice::Both => state.shooting,
        SolverChoice::Fd => state.fd,
    }
}

pub fn exact_spectrum(cfg: &RunConfig) -> Result<ExactSpectrum> {
    Ok(spectral::exact_spectrum(&cfg.potential, cfg.limit, &cfg.settings)?)
}

/// Pair every exact state with its shifted semiclassical partner.
pub fn compare(cfg: &RunConfig) -> Result<Comparison> {
    cfg.require_three_dimensions("compare")?;
    if cfg.policy != PolicyChoice::Ebk {
        return Err(HarnessError::Argument("compare pairs states through the ebk policy only".into()));
    }
    let pot = cfg.potential;
    let exact = exact_spectrum(cfg)?;
    let partners = exact
        .states
        .par_iter()
        .map(|s| {
            let qn = shifted_partner(s.key)?;
            Ok(semiclassical::oq_energy_with(&pot, qn, ShiftPolicy::EBK_3D, &cfg.settings.action)?)
        })
        .collect::<Result<Vec<OqSolution>>>()?;

    let mut metadata = Metadata::for_run("compare", cfg);
    let mut rows = Vec::new();
    for (state, oq) in exact.states.iter().zip(partners) {
        match oq {
            OqSolution::Bound(e) => rows.push(ComparisonRow {
                n: state.key.n,
                ell: state.key.ell,
                e_schr: ReportedEnergy::from_natural(&pot, exact_energy(state, cfg.solver)),
                e_oq_shifted: ReportedEnergy::from_natural(&pot, e),
            }),
            OqSolution::Unbound => metadata.unpaired_exact.push(state.key),
        }
    }
    if matches!(pot, Potential::Yukawa { .. }) {
        let oq = semiclassical::oq_spectrum_with(&pot, ShiftPolicy::EBK_3D, cfg.limit, &cfg.settings.action)?;
        let have: BTreeSet<SpectrumKey> = exact.states.iter().map(|s| s.key).collect();
        metadata.unpaired_oq = oq.entries.iter().map(|e| e.key).filter(|k| !have.contains(k)).collect();
    }
    metadata.policy = Some(ShiftPolicy::EBK_3D.name());
    metadata.method = Some(Method::Schrodinger);
    metadata.solver = Some(cfg.solver);
    metadata.solver_settings = Some(cfg.settings);
    metadata.max_cross_check_residual = Some(exact.max_residual());
    metadata.bound_per_ell = exact.bound_per_ell;
    Ok(Comparison { rows, metadata })
}

/// Read back the rows of a comparison CSV; the discrepancy column is
/// recomputed, so it is only checked for presence.
pub fn parse_comparison_csv(text: &str) -> Result<Vec<ComparisonRow>> {
    let table = table::parse_table_csv(text)?;
    if table.columns != COMPARISON_COLUMNS {
        return Err(HarnessError::Parse(format!("expected columns {:?}, found {:?}", COMPARISON_COLUMNS, table.columns)));
    }
    table
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let bad = || HarnessError::Parse(format!("malformed row {}", i + 1));
            if row.len() != COMPARISON_COLUMNS.len() {
                return Err(bad());
            }
            let int = |c: &Cell| c.as_int().and_then(|v| u32::try_from(v).ok()).ok_or_else(bad);
            let num = |c: &Cell| c.as_f64().filter(|x| x.is_finite()).ok_or_else(bad);
            num(&row[4])?;
            Ok(ComparisonRow {
                n: int(&row[0])?,
                ell: int(&row[1])?,
                e_schr: ReportedEnergy(num(&row[2])?),
                e_oq_shifted: ReportedEnergy(num(&row[3])?),
            })
        })
        .collect()
}

/// Single-method spectrum table.
pub fn spectrum(cfg: &RunConfig) -> Result<Report> {
    let pot = cfg.potential;
    let mut metadata = Metadata::for_run("spectrum", cfg);
    metadata.method = Some(cfg.method);
    match cfg.method {
        Method::Oq => {
            cfg.require_three_dimensions("old quantization")?;
            let policy = cfg.policy.policy();
            let oq = semiclassical::oq_spectrum_with(&pot, policy, cfg.limit, &cfg.settings.action)?;
            let mut table = Table::new(["n", "l", "n_r", "n_theta", "E_oq"]);
            for e in &oq.entries {
                table.push(vec![
                    e.key.n.into(),
                    e.key.ell.into(),
                    e.qn.n_r().into(),
                    e.qn.n_theta().into(),
                    e.energy.value().into(),
                ]);
            }
            metadata.policy = Some(policy.name());
            metadata.unbound_oq = oq.unbound;
            Ok(Report { metadata, table })
        }
        Method::Schrodinger => {
            let exact = exact_spectrum(cfg)?;
            let scale = ReportedEnergy::scale(&pot);
            let table = match cfg.solver {
                SolverChoice::Both => {
                    let mut t = Table::new(["n", "l", "E_shooting", "E_fd", "residual"]);
                    for s in &exact.states {
                        t.push(vec![
                            s.key.n.into(),
                            s.key.ell.into(),
                            (s.shooting * scale).into(),
                            (s.fd * scale).into(),
                            (s.residual() * scale).into(),
                        ]);
                    }
                    t
                }
                solver => {
                    let mut t = Table::new(["n", "l", "E_schr"]);
                    for s in &exact.states {
                        t.push(vec![s.key.n.into(), s.key.ell.into(), (exact_energy(s, solver) * scale).into()]);
                    }
                    t
                }
            };
            metadata.solver = Some(cfg.solver);
            metadata.solver_settings = Some(cfg.settings);
            metadata.max_cross_check_residual = Some(exact.max_residual());
            metadata.bound_per_ell = exact.bound_per_ell;
            Ok(Report { metadata, table })
        }
    }
}

/// Number of states per level n.
pub fn count(cfg: &RunConfig) -> Result<Report> {
    let pot = cfg.potential;
    let mut metadata = Metadata::for_run("count", cfg);
    metadata.method = Some(cfg.method);
    let mut table = Table::new(["n", "states"]);
    match cfg.method {
        Method::Oq => {
            cfg.require_three_dimensions("old quantization")?;
            let policy = cfg.policy.policy();
            let oq = semiclassical::oq_spectrum_with(&pot, policy, cfg.limit, &cfg.settings.action)?;
            let top = match cfg.limit {
                LevelLimit::MaxLevel(n) => n,
                LevelLimit::AllBound => oq.entries.iter().map(|e| e.key).chain(oq.unbound.iter().copied()).map(|k| k.n).max().unwrap_or(1),
            };
            for n in 1..=top {
                table.push(vec![n.into(), oq.level(n).count().into()]);
            }
            metadata.policy = Some(policy.name());
            metadata.unbound_oq = oq.unbound;
        }
        Method::Schrodinger => {
            let per_level: Vec<usize> = match pot {
                Potential::Yukawa { .. } => {
                    let mut per_ell = Vec::new();
                    loop {
                        let c = spectral::bound_state_count(&pot, per_ell.len() as u32, &cfg.settings)?;
                        if c == 0 {
                            break;
                        }
                        per_ell.push(c);
                    }
                    let deepest = per_ell.iter().enumerate().map(|(l, &c)| l + c).max().unwrap_or(0);
                    let top = match cfg.limit {
                        LevelLimit::MaxLevel(n) => n as usize,
                        LevelLimit::AllBound => deepest + 1,
                    };
                    metadata.bound_per_ell = per_ell.clone();
                    (1..=top).map(|n| per_ell.iter().enumerate().filter(|&(l, &c)| l < n && c >= n - l).count()).collect()
                }
                _ => match cfg.limit {
                    LevelLimit::MaxLevel(n) => (1..=n as usize).collect(),
                    LevelLimit::AllBound => unreachable!("validated in RunConfig"),
                },
            };
            for (i, c) in per_level.iter().enumerate() {
                table.push(vec![(i + 1).into(), (*c).into()]);
            }
        }
    }
    Ok(Report { metadata, table })
}

/// Yukawa critical values as a one-row table.
pub fn critical(cfg: &RunConfig) -> Result<Report> {
    let lambda = cfg
        .potential
        .lambda()
        .ok_or_else(|| HarnessError::Argument("critical values are defined for yukawa only".into()))?;
    let c = semiclassical::yukawa_criticals(lambda)?;
    let mut table = Table::new(["lambda", "nu_star", "nu_star_star", "nr_star"]);
    table.push(vec![lambda.into(), c.nu_star.into(), c.nu_star_star.into(), c.nr_star.into()]);
    let mut metadata = Metadata::for_run("critical", cfg);
    metadata.n_max = None;
    metadata.all_bound = None;
    Ok(Report { metadata, table })
}

/// A named (x, y) series for plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub x: String,
    pub y: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn file_stem(&self) -> String {
        self.name
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
            .collect()
    }

    /// Comment line naming the series, a column header, then data.
    pub fn to_csv(&self) -> String {
        let mut s = format!("# {}\n{},{}\n", self.name, self.x, self.y);
        for (x, y) in &self.points {
            s.push_str(&format!("{},{}\n", format_sig(*x, 10), format_sig(*y, 10)));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    pub ptheta: Vec<f64>,
    pub rho_max: Option<f64>,
    pub points: usize,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self { ptheta: Vec::new(), rho_max: None, points: 400 }
    }
}

fn plot_label(x: f64) -> String {
    let s = format_sig(x, 6);
    if s.contains('.') || s.contains('e') {
        s
    } else {
        format!("{s}.0")
    }
}

/// Effective-potential curves and spectrum-versus-n series.
pub fn plot_series(cfg: &RunConfig, opts: &PlotOptions) -> Result<Vec<Series>> {
    cfg.require_three_dimensions("plot data")?;
    if opts.points < 2 {
        return Err(HarnessError::Argument("need at least 2 points per curve".into()));
    }
    let pot = cfg.potential;
    let scale = ReportedEnergy::scale(&pot);
    let lambda_tag = pot.lambda().map(|l| format!(" lambda={}", plot_label(l))).unwrap_or_default();
    let mut out = Vec::new();

    let kappas = if !opts.ptheta.is_empty() {
        opts.ptheta.clone()
    } else if let Some(l) = pot.lambda() {
        let c = semiclassical::yukawa_criticals(l)?;
        vec![0.8 * c.nu_star, c.nu_star, c.nu_star_star]
    } else {
        vec![1.0, 2.0, 3.0]
    };
    if let Some(k) = kappas.iter().find(|k| !(k.is_finite() && **k >= 0.0)) {
        return Err(HarnessError::Argument(format!("ptheta must be nonnegative (got {k})")));
    }
    let rho_max = opts.rho_max.unwrap_or_else(|| pot.lambda().map_or(20.0, |l| 3.0 * l));
    if !(rho_max > 0.0 && rho_max.is_finite()) {
        return Err(HarnessError::Argument(format!("rho_max must be positive (got {rho_max})")));
    }
    let rhos: Vec<f64> = (1..=opts.points).map(|i| rho_max * i as f64 / opts.points as f64).collect();
    for k in kappas {
        let points = semiclassical::ueff_curve(&pot, k, &rhos).into_iter().map(|(r, u)| (r, u * scale)).collect();
        out.push(Series {
            name: format!("ueff {}{} ptheta={}", pot.name(), lambda_tag, plot_label(k)),
            x: "rho".into(),
            y: "U_eff".into(),
            points,
        });
    }

    let settings = &cfg.settings.action;
    let level_series = |name: &str, pts: Vec<(f64, f64)>| Series {
        name: format!("{name} {}{}", pot.name(), lambda_tag),
        x: "n".into(),
        y: "E".into(),
        points: pts,
    };
    for (policy, name) in [(ShiftPolicy::INTEGER, "oq-integer"), (ShiftPolicy::EBK_3D, "oq-shifted")] {
        let oq = semiclassical::oq_spectrum_with(&pot, policy, cfg.limit, settings)?;
        out.push(level_series(name, oq.entries.iter().map(|e| (e.key.n as f64, e.energy.value())).collect()));
    }
    let top = match cfg.limit {
        LevelLimit::MaxLevel(n) => n,
        LevelLimit::AllBound => pot.lambda().map_or(1, |l| semiclassical::yukawa_criticals(l).map_or(1, |c| c.nr_star.ceil() as u32 + 1)),
    };
    let bound = |e: f64| !pot.vanishes_at_infinity() || e < 0.0;
    let mut circ = Vec::new();
    let mut radial = Vec::new();
    for n in 1..=top {
        let nf = n as f64;
        if let Ok(e) = semiclassical::circular_energy(&pot, nf) {
            if bound(e) {
                circ.push((nf, e * scale));
            }
        }
        if let Some(e) = semiclassical::radial_motion_energy_with(&pot, nf, settings)?.bound() {
            radial.push((nf, e * scale));
        }
    }
    out.push(level_series("circular", circ));
    out.push(level_series("radial", radial));
    if matches!(pot, Potential::Yukawa { .. }) {
        out.push(level_series("hydrogen", (1..=top).map(|n| (n as f64, -1.0 / (n * n) as f64)).collect()));
    }
    if cfg.method == Method::Schrodinger {
        let exact = exact_spectrum(cfg)?;
        let pts = exact.states.iter().map(|s| (s.key.n as f64, exact_energy(s, cfg.solver) * scale)).collect();
        out.push(level_series("schrodinger", pts));
    }
    Ok(out)
}

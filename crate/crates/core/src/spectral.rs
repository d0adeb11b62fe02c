//! Exact bound states of the radial Schrödinger equation
//!
//! ```text
//! −½ u″ + [c/(2ρ²) + V(ρ)] u = E u,    c = (ℓ + (D−3)/2)(ℓ + (D−1)/2)
//! ```
//!
//! by two independent routes: outward RK4 shooting with node counting and
//! energy bisection, and a second-order finite-difference Hamiltonian whose
//! lowest eigenvalues come from Sturm-sequence bisection. Every state in a
//! spectrum is computed both ways and the two must agree.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    CentrifugalSpec, EffectivePotential, ModelError, Potential, QuantumNumbers, ReportedEnergy,
    ShiftPolicy, SpectrumKey,
};
use crate::numerics::{self, NumericsError, TridiagonalMatrix};
use crate::semiclassical::{self, ActionSettings, LevelLimit, OqError, OqSolution};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("solution overflowed at rho = {rho} before reaching the classically allowed region; grid start is too deep")]
    GridMisconfigured { rho: f64 },
    #[error("window [{lo}, {hi}] does not contain the {k}-node state (node counts {nodes_lo}, {nodes_hi})")]
    NotFound { k: usize, lo: f64, hi: f64, nodes_lo: usize, nodes_hi: usize },
    #[error("state n={} l={} has {found} nodes, expected {expected}", key.n, key.ell)]
    NodeMismatch { key: SpectrumKey, expected: usize, found: usize },
    #[error("cross-check failed for n={} l={}: shooting {shooting}, finite difference {fd}", key.n, key.ell)]
    CrossCheck { key: SpectrumKey, shooting: f64, fd: f64 },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Oq(#[from] OqError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, SpectralError>;

/// Uniform radial mesh on [rho_min, rho_max].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub rho_min: f64,
    pub rho_max: f64,
    pub points: usize,
}

impl RadialGrid {
    pub fn new(rho_min: f64, rho_max: f64, points: usize) -> Result<Self> {
        if !(rho_min > 0.0 && rho_max > rho_min && rho_max.is_finite()) {
            return Err(SpectralError::Grid(format!("need 0 < rho_min < rho_max (got {rho_min}, {rho_max})")));
        }
        if points < 3 {
            return Err(SpectralError::Grid(format!("need at least 3 points (got {points})")));
        }
        Ok(Self { rho_min, rho_max, points })
    }

    pub fn step(&self) -> f64 {
        (self.rho_max - self.rho_min) / (self.points - 1) as f64
    }

    pub fn rho(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            self.rho_max
        } else {
            self.rho_min + self.step() * i as f64
        }
    }

    /// Same interval with the spacing halved.
    pub fn refined(&self) -> Self {
        Self { points: 2 * (self.points - 1) + 1, ..*self }
    }
}

/// Outcome of one outward integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shot {
    /// u(ρ_max)/max|u|, or ±1 when the integration diverged.
    pub terminal: f64,
    pub nodes: usize,
    pub diverged_at: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialSolution {
    pub energy: f64,
    pub nodes: usize,
    pub grid: RadialGrid,
    pub u: Vec<f64>,
}

fn start_values(cf: &CentrifugalSpec, rho_min: f64) -> [f64; 2] {
    let l = cf.effective_ell();
    [rho_min.powf(l + 1.0), (l + 1.0) * rho_min.powf(l)]
}

fn integrate<O: FnMut(f64, f64)>(
    pot: &Potential,
    cf: CentrifugalSpec,
    energy: f64,
    grid: &RadialGrid,
    mut sample: O,
) -> Result<Shot> {
    let ueff = EffectivePotential::new(*pot, cf);
    let deriv = |rho: f64, y: &[f64; 2]| [y[1], 2.0 * (ueff.value(rho) - energy) * y[0]];

    let mut nodes = 0;
    let mut last_sign = 0.0f64;
    let mut max_abs = 0.0f64;
    let mut entered_allowed = false;
    let observer = |rho: f64, y: &[f64; 2]| {
        let u = y[0];
        sample(rho, u);
        max_abs = max_abs.max(u.abs());
        if u != 0.0 {
            let s = u.signum();
            if last_sign != 0.0 && s != last_sign {
                nodes += 1;
            }
            last_sign = s;
        }
        if !entered_allowed && ueff.value(rho) < energy {
            entered_allowed = true;
        }
    };
    let y0 = start_values(&cf, grid.rho_min);
    match numerics::rk4_sweep(deriv, y0, grid.rho_min, grid.rho_max, grid.points - 1, observer) {
        Ok(y) => Ok(Shot { terminal: if max_abs > 0.0 { y[0] / max_abs } else { 0.0 }, nodes, diverged_at: None }),
        Err(NumericsError::Overflow { x, last }) => {
            if !entered_allowed {
                // an allowed region further out means the start itself was bad
                let h = grid.step();
                let mut rho = x;
                while rho < grid.rho_max {
                    if ueff.value(rho) < energy {
                        return Err(SpectralError::GridMisconfigured { rho: x });
                    }
                    rho += h;
                }
            }
            let sign = last[0].signum();
            Ok(Shot { terminal: sign, nodes, diverged_at: Some(x) })
        }
        Err(e) => Err(e.into()),
    }
}

/// Integrate outward from u ∝ ρ^{L+1} and count interior sign changes.
pub fn shoot(pot: &Potential, cf: CentrifugalSpec, energy: f64, grid: &RadialGrid) -> Result<Shot> {
    integrate(pot, cf, energy, grid, |_, _| {})
}

/// Sampled u(ρ) at `energy`, normalised to max|u| = 1.
pub fn radial_solution(pot: &Potential, cf: CentrifugalSpec, energy: f64, grid: &RadialGrid) -> Result<RadialSolution> {
    let mut u = Vec::with_capacity(grid.points);
    let shot = integrate(pot, cf, energy, grid, |_, v| u.push(v))?;
    let scale = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale > 0.0 {
        u.iter_mut().for_each(|v| *v /= scale);
    }
    Ok(RadialSolution { energy, nodes: shot.nodes, grid: *grid, u })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingEigen {
    pub energy: f64,
    pub nodes: usize,
    pub grid: RadialGrid,
}

/// Bisect the energy on the node-count transition k → k+1 inside `window`.
pub fn eigen_shooting(
    pot: &Potential,
    cf: CentrifugalSpec,
    k: usize,
    window: (f64, f64),
    grid: &RadialGrid,
    energy_tol: f64,
) -> Result<ShootingEigen> {
    let (mut lo, mut hi) = window;
    if !(lo < hi) {
        return Err(SpectralError::Argument(format!("empty window [{lo}, {hi}]")));
    }
    let nodes_lo = shoot(pot, cf, lo, grid)?.nodes;
    let nodes_hi = shoot(pot, cf, hi, grid)?.nodes;
    if nodes_lo > k || nodes_hi <= k {
        return Err(SpectralError::NotFound { k, lo, hi, nodes_lo, nodes_hi });
    }
    let mut at_lo = nodes_lo;
    while hi - lo > energy_tol {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let n = shoot(pot, cf, mid, grid)?.nodes;
        if n <= k {
            lo = mid;
            at_lo = n;
        } else {
            hi = mid;
        }
    }
    if at_lo != k {
        at_lo = shoot(pot, cf, lo, grid)?.nodes;
    }
    Ok(ShootingEigen { energy: lo + 0.5 * (hi - lo), nodes: at_lo, grid: *grid })
}

/// Finite-difference mesh ρ_i = i·h on [0, rho_max] with u = 0 at both ends.
/// The left wall sits at the origin, where u vanishes exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdMesh {
    pub rho_max: f64,
    pub points: usize,
}

impl FdMesh {
    pub fn new(rho_max: f64, points: usize) -> Result<Self> {
        if !(rho_max > 0.0 && rho_max.is_finite()) {
            return Err(SpectralError::Grid(format!("rho_max must be positive (got {rho_max})")));
        }
        if points < 3 {
            return Err(SpectralError::Grid(format!("need at least 3 points (got {points})")));
        }
        Ok(Self { rho_max, points })
    }

    pub fn step(&self) -> f64 {
        self.rho_max / (self.points - 1) as f64
    }

    pub fn interior(&self) -> usize {
        self.points - 2
    }

    pub fn refined(&self) -> Self {
        Self { points: 2 * (self.points - 1) + 1, ..*self }
    }
}

/// Dirichlet finite-difference matrix on the interior mesh points.
pub fn fd_matrix(pot: &Potential, cf: CentrifugalSpec, mesh: &FdMesh) -> TridiagonalMatrix {
    let ueff = EffectivePotential::new(*pot, cf);
    let h = mesh.step();
    let inv_h2 = 1.0 / (h * h);
    let diag = (1..=mesh.interior()).map(|i| inv_h2 + ueff.value(h * i as f64)).collect();
    let off = vec![-0.5 * inv_h2; mesh.interior() - 1];
    TridiagonalMatrix::new(diag, off).expect("mesh has at least one interior point")
}

/// Lowest `count` finite-difference eigenvalues (error O(h²)).
pub fn eigen_fd(pot: &Potential, cf: CentrifugalSpec, mesh: &FdMesh, count: usize) -> Result<Vec<f64>> {
    if count < 1 || count > mesh.interior() {
        return Err(SpectralError::Argument(format!(
            "cannot extract {count} eigenvalues from {} interior points",
            mesh.interior()
        )));
    }
    let m = fd_matrix(pot, cf, mesh);
    Ok(numerics::tridiag_eigenvalues_tol(&m, count, 1e-13)?)
}

/// One Richardson step from spacings h and h/2: (4E(h/2) − E(h))/3.
pub fn eigen_fd_richardson(pot: &Potential, cf: CentrifugalSpec, mesh: &FdMesh, count: usize) -> Result<Vec<f64>> {
    let coarse = eigen_fd(pot, cf, mesh, count)?;
    let fine = eigen_fd(pot, cf, &mesh.refined(), count)?;
    Ok(coarse.iter().zip(&fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect())
}

/// Solver knobs for the exact spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub shooting_steps: usize,
    pub fd_points: usize,
    /// Largest mesh spacing allowed; long domains get more points.
    pub max_step: f64,
    pub rho_min: Option<f64>,
    pub rho_max: Option<f64>,
    /// Shooting bisection stops once the energy window is this narrow.
    pub energy_tol: f64,
    /// Largest tolerated |E_shooting − E_fd| in natural units.
    pub cross_check_tol: f64,
    pub dim: u32,
    pub action: ActionSettings,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            shooting_steps: 40_000,
            fd_points: 20_001,
            max_step: 0.02,
            rho_min: None,
            rho_max: None,
            energy_tol: 1e-10,
            cross_check_tol: 1e-5,
            dim: 3,
            action: ActionSettings::default(),
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if self.shooting_steps < 2 {
            return Err(SpectralError::Argument("shooting needs at least 2 steps".into()));
        }
        if self.fd_points < 5 {
            return Err(SpectralError::Argument("finite differences need at least 5 points".into()));
        }
        if !(self.max_step > 0.0) {
            return Err(SpectralError::Argument("max_step must be positive".into()));
        }
        if let Some(r) = self.rho_min {
            if !(r > 0.0 && r.is_finite()) {
                return Err(SpectralError::Argument(format!("rho_min must be positive (got {r})")));
            }
        }
        if let Some(r) = self.rho_max {
            if !(r > self.rho_min.unwrap_or(0.0) && r.is_finite()) {
                return Err(SpectralError::Argument(format!("rho_max must exceed rho_min (got {r})")));
            }
        }
        if !(self.energy_tol > 0.0 && self.cross_check_tol > 0.0) {
            return Err(SpectralError::Argument("tolerances must be positive".into()));
        }
        if self.dim < 2 {
            return Err(ModelError::Dimension(self.dim).into());
        }
        self.action.validate()?;
        Ok(())
    }

    pub fn rho_min_for(&self, pot: &Potential) -> f64 {
        self.rho_min.unwrap_or(match pot {
            Potential::Logarithmic => 1e-4,
            _ => 1e-6,
        })
    }

    fn points_for(&self, base: usize, span: f64) -> usize {
        let needed = (span / self.max_step).ceil() as usize + 1;
        base.max(needed)
    }
}

/// One exact eigenstate computed by both methods (natural units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactState {
    pub key: SpectrumKey,
    pub nodes: usize,
    pub shooting: f64,
    pub fd: f64,
    /// Mesh the shooting solution was converged on.
    pub grid: RadialGrid,
    pub fd_mesh: FdMesh,
}

impl ExactState {
    pub fn residual(&self) -> f64 {
        (self.shooting - self.fd).abs()
    }

    pub fn entry(&self, pot: &Potential, method: ExactMethod) -> ExactEntry {
        let e = match method {
            ExactMethod::Shooting => self.shooting,
            ExactMethod::FiniteDifference => self.fd,
        };
        ExactEntry { key: self.key, energy: ReportedEnergy::from_natural(pot, e), method }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExactMethod {
    Shooting,
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactEntry {
    pub key: SpectrumKey,
    pub energy: ReportedEnergy,
    pub method: ExactMethod,
}

/// Semiclassical estimate of the (n, ℓ) energy: the EBK cell n_θ = ℓ + ½.
fn shifted_estimate(pot: &Potential, n: u32, ell: u32, settings: &SolverSettings) -> Option<f64> {
    let qn = QuantumNumbers::new(2 * (n - ell) - 1, 2 * ell + 1).ok()?;
    semiclassical::oq_energy_with(pot, qn, ShiftPolicy::EBK_3D, &settings.action).ok()?.bound()
}

/// Domain cutoff for the state (n, ℓ).
pub fn rho_max_for(pot: &Potential, n: u32, ell: u32, settings: &SolverSettings) -> f64 {
    if let Some(r) = settings.rho_max {
        return r;
    }
    match *pot {
        Potential::Logarithmic => {
            let e_rad = (n as f64 * std::f64::consts::TAU.sqrt()).ln();
            let outer = pot.level_crossing(e_rad).unwrap_or(1.0);
            (4.0 * outer).max(50.0)
        }
        Potential::Yukawa { lambda } => {
            let e = shifted_estimate(pot, n, ell, settings).unwrap_or(-1e-6).min(-1e-6);
            (6.0 / (-2.0 * e).sqrt()).max(3.0 * lambda)
        }
        Potential::Coulomb => (12.0 * (n * n) as f64).max(30.0),
    }
}

/// Energy window for the (n, ℓ) state from the circular and radial OQ limits.
fn seed_window(pot: &Potential, n: u32, ell: u32, settings: &SolverSettings) -> (f64, f64) {
    let kappa = n as f64;
    let cf = CentrifugalSpec::Quantum { ell, dim: settings.dim };
    let circ = semiclassical::circular_energy(pot, kappa)
        .ok()
        .or_else(|| EffectivePotential::new(*pot, cf).minimum().found().map(|(_, u)| u))
        .unwrap_or(-1.0);
    let radial = semiclassical::radial_motion_energy_with(pot, n as f64, &settings.action)
        .ok()
        .and_then(OqSolution::bound);
    let top = match (radial, pot.vanishes_at_infinity()) {
        (Some(r), _) => r,
        (None, true) => 0.0,
        (None, false) => circ + 1.0,
    };
    let margin = 0.05 * (top - circ).abs().max(1e-3 * circ.abs()).max(1e-8);
    let lo = circ - margin;
    let hi = if pot.vanishes_at_infinity() { (top + margin).min(-1e-14) } else { top + margin };
    (lo, hi)
}

fn threshold_energy(pot: &Potential) -> Option<f64> {
    pot.vanishes_at_infinity().then_some(-1e-14)
}

/// Solve one (ℓ, k) state by shooting and finite differences.
pub fn solve_state(pot: &Potential, ell: u32, k: usize, settings: &SolverSettings) -> Result<ExactState> {
    pot.validate()?;
    settings.validate()?;
    let cf = CentrifugalSpec::quantum(ell, settings.dim)?;
    let n = k as u32 + ell + 1;
    let key = SpectrumKey { n, ell };
    let rho_min = settings.rho_min_for(pot);
    let mut rho_max = rho_max_for(pot, n, ell, settings);

    // widen the domain when the state sits closer to threshold than estimated
    for _attempt in 0..4 {
        let span = rho_max - rho_min;
        let grid = RadialGrid::new(rho_min, rho_max, settings.points_for(settings.shooting_steps + 1, span))?;
        let (mut lo, mut hi) = seed_window(pot, n, ell, settings);

        let mut step = (hi - lo).max(1e-6);
        while shoot(pot, cf, lo, &grid)?.nodes > k {
            lo -= step;
            step *= 2.0;
        }
        let mut step = (hi - lo).max(1e-6);
        let mut too_shallow = false;
        while shoot(pot, cf, hi, &grid)?.nodes <= k {
            match threshold_energy(pot) {
                Some(t) if hi >= t => {
                    too_shallow = true;
                    break;
                }
                Some(t) => hi = (hi + step).min(t),
                None => hi += step,
            }
            step *= 2.0;
        }
        if too_shallow {
            if settings.rho_max.is_some() {
                return Err(SpectralError::NotFound { k, lo, hi, nodes_lo: 0, nodes_hi: k });
            }
            rho_max *= 4.0;
            continue;
        }

        let sh = eigen_shooting(pot, cf, k, (lo, hi), &grid, settings.energy_tol)?;
        if sh.nodes != k {
            return Err(SpectralError::NodeMismatch { key, expected: k, found: sh.nodes });
        }
        if let (Some(_), None) = (threshold_energy(pot), settings.rho_max) {
            // six decay lengths at the solved energy must fit in the domain
            let want = 6.0 / (-2.0 * sh.energy).sqrt();
            if want > 1.05 * rho_max {
                rho_max = want;
                continue;
            }
        }

        let mesh = FdMesh::new(rho_max, settings.points_for(settings.fd_points, rho_max))?;
        let fd = eigen_fd_richardson(pot, cf, &mesh, k + 1)?[k];
        let state = ExactState { key, nodes: sh.nodes, shooting: sh.energy, fd, grid, fd_mesh: mesh };
        if state.residual() > settings.cross_check_tol {
            return Err(SpectralError::CrossCheck { key, shooting: sh.energy, fd });
        }
        return Ok(state);
    }
    Err(SpectralError::NotFound { k, lo: f64::NAN, hi: 0.0, nodes_lo: 0, nodes_hi: k })
}

/// Number of bound states at fixed ℓ for a potential vanishing at infinity,
/// from the node count of the zero-energy solution continued analytically
/// past the point where the potential is negligible.
pub fn bound_state_count(pot: &Potential, ell: u32, settings: &SolverSettings) -> Result<usize> {
    let lambda = match *pot {
        Potential::Yukawa { lambda } => lambda,
        _ => {
            return Err(SpectralError::Argument(format!("{pot} has infinitely many bound states")));
        }
    };
    let cf = CentrifugalSpec::quantum(ell, settings.dim)?;
    let rho_min = settings.rho_min_for(pot);
    let far = 40.0 * lambda + 50.0;
    let steps = ((far / 0.01) as usize).max(400_000);
    let ueff = EffectivePotential::new(*pot, cf);
    let deriv = |rho: f64, y: &[f64; 2]| [y[1], 2.0 * ueff.value(rho) * y[0]];
    let mut nodes = 0;
    let mut last = 0.0f64;
    let observer = |_: f64, y: &[f64; 2]| {
        if y[0] != 0.0 {
            if last != 0.0 && y[0].signum() != last {
                nodes += 1;
            }
            last = y[0].signum();
        }
    };
    let y = numerics::rk4_sweep(deriv, start_values(&cf, rho_min), rho_min, far, steps, observer)?;
    // beyond `far`, u = Aρ^{L+1} + Bρ^{−L}; a sign flip remains iff A·u < 0
    let l = cf.effective_ell();
    let a = (l * y[0] + far * y[1]) / ((2.0 * l + 1.0) * far.powf(l + 1.0));
    if a * y[0] < 0.0 {
        nodes += 1;
    }
    Ok(nodes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactSpectrum {
    pub states: Vec<ExactState>,
    /// Bound states per ℓ (only recorded for potentials with finitely many).
    pub bound_per_ell: Vec<usize>,
}

impl ExactSpectrum {
    pub fn entries(&self, pot: &Potential, method: ExactMethod) -> Vec<ExactEntry> {
        self.states.iter().map(|s| s.entry(pot, method)).collect()
    }

    pub fn get(&self, n: u32, ell: u32) -> Option<&ExactState> {
        self.states.iter().find(|s| s.key == SpectrumKey { n, ell })
    }

    pub fn max_residual(&self) -> f64 {
        self.states.iter().map(ExactState::residual).fold(0.0, f64::max)
    }
}

/// All exact states up to level `n_max`, or every bound state (Yukawa only).
pub fn exact_spectrum(pot: &Potential, limit: LevelLimit, settings: &SolverSettings) -> Result<ExactSpectrum> {
    pot.validate()?;
    settings.validate()?;
    let mut cells: Vec<(u32, usize)> = Vec::new();
    let mut bound_per_ell = Vec::new();
    match (pot, limit) {
        (Potential::Yukawa { .. }, _) => {
            let mut ell = 0u32;
            loop {
                if let LevelLimit::MaxLevel(max) = limit {
                    if ell + 1 > max {
                        break;
                    }
                }
                let count = bound_state_count(pot, ell, settings)?;
                if count == 0 {
                    break;
                }
                bound_per_ell.push(count);
                for k in 0..count {
                    let n = k as u32 + ell + 1;
                    if matches!(limit, LevelLimit::MaxLevel(max) if n > max) {
                        break;
                    }
                    cells.push((ell, k));
                }
                ell += 1;
            }
        }
        (_, LevelLimit::MaxLevel(max)) => {
            for ell in 0..max {
                for k in 0..(max - ell) as usize {
                    cells.push((ell, k));
                }
            }
        }
        (_, LevelLimit::AllBound) => {
            return Err(SpectralError::Argument(format!("{pot} has infinitely many bound states; give a maximum level")));
        }
    }
    let mut states = cells
        .par_iter()
        .map(|&(ell, k)| solve_state(pot, ell, k, settings))
        .collect::<Result<Vec<_>>>()?;
    states.sort_by(|a, b| SpectrumKey::table_order(&a.key, &b.key));
    Ok(ExactSpectrum { states, bound_per_ell })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coulomb_grid() -> RadialGrid {
        RadialGrid::new(1e-6, 40.0, 40_001).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(RadialGrid::new(0.0, 1.0, 10).is_err());
        assert!(RadialGrid::new(1.0, 0.5, 10).is_err());
        assert!(RadialGrid::new(0.1, 1.0, 2).is_err());
        let g = RadialGrid::new(0.0 + 1.0, 3.0, 5).unwrap();
        assert_eq!(g.step(), 0.5);
        assert_eq!(g.refined().points, 9);
        assert_eq!(g.rho(4), 3.0);
    }

    #[test]
    fn hydrogen_ground_state_terminal_vanishes() {
        let cf = CentrifugalSpec::quantum(0, 3).unwrap();
        let coarse = shoot(&Potential::Coulomb, cf, -0.5, &RadialGrid::new(1e-6, 20.0, 2_001).unwrap()).unwrap();
        let fine = shoot(&Potential::Coulomb, cf, -0.5, &RadialGrid::new(1e-6, 20.0, 20_001).unwrap()).unwrap();
        assert_eq!(fine.nodes, 0);
        assert!(fine.terminal.abs() < coarse.terminal.abs());
        assert!(fine.terminal.abs() < 1e-3, "{fine:?}");
    }

    #[test]
    fn hydrogen_shot_sign_flips_across_ground_state() {
        let cf = CentrifugalSpec::quantum(0, 3).unwrap();
        let below = shoot(&Potential::Coulomb, cf, -0.6, &coulomb_grid()).unwrap();
        let above = shoot(&Potential::Coulomb, cf, -0.45, &coulomb_grid()).unwrap();
        assert_eq!(below.nodes, 0);
        assert!(below.terminal * above.terminal < 0.0, "{below:?} {above:?}");
    }

    #[test]
    fn deep_energy_has_no_nodes_and_grows() {
        let cf = CentrifugalSpec::quantum(2, 3).unwrap();
        let sol = radial_solution(&Potential::Logarithmic, cf, -20.0, &RadialGrid::new(1e-4, 50.0, 20_001).unwrap()).unwrap();
        assert_eq!(sol.nodes, 0);
        assert!(sol.u.windows(2).all(|w| w[1] >= w[0]));
        let shot = shoot(&Potential::Coulomb, CentrifugalSpec::quantum(0, 3).unwrap(), -10.0, &RadialGrid::new(1e-6, 400.0, 40_001).unwrap()).unwrap();
        assert!(shot.diverged_at.is_some());
        assert_eq!(shot.nodes, 0);
        assert_eq!(shot.terminal, 1.0);
    }

    #[test]
    fn shooting_hydrogen_levels() {
        let cf = CentrifugalSpec::quantum(0, 3).unwrap();
        for (k, want) in [(0usize, -0.5), (1, -0.125), (2, -1.0 / 18.0)] {
            let e = eigen_shooting(&Potential::Coulomb, cf, k, (-0.7, -0.01), &RadialGrid::new(1e-6, 120.0, 40_001).unwrap(), 1e-11).unwrap();
            assert_eq!(e.nodes, k);
            assert!((e.energy - want).abs() < 1e-7, "k={k}: {}", e.energy);
        }
    }

    #[test]
    fn shooting_window_errors() {
        let cf = CentrifugalSpec::quantum(0, 3).unwrap();
        let r = eigen_shooting(&Potential::Coulomb, cf, 0, (-0.4, -0.3), &coulomb_grid(), 1e-10);
        assert!(matches!(r, Err(SpectralError::NotFound { .. })));
        assert!(eigen_shooting(&Potential::Coulomb, cf, 0, (-0.3, -0.4), &coulomb_grid(), 1e-10).is_err());
    }

    #[test]
    fn fd_hydrogen_levels() {
        let cf = CentrifugalSpec::quantum(0, 3).unwrap();
        let grid = FdMesh::new(60.0, 20_001).unwrap();
        let ev = eigen_fd_richardson(&Potential::Coulomb, cf, &grid, 3).unwrap();
        for (e, n) in ev.iter().zip([1.0f64, 2.0, 3.0]) {
            assert!((2.0 * e + 1.0 / (n * n)).abs() < 1e-5, "n={n}: {e}");
        }
        assert!(eigen_fd(&Potential::Coulomb, cf, &FdMesh::new(1.0, 5).unwrap(), 4).is_err());
    }

    #[test]
    fn bound_counts_small_lambda() {
        let settings = SolverSettings::default();
        // binding needs λ ≳ 0.84
        assert_eq!(bound_state_count(&Potential::yukawa(0.5).unwrap(), 0, &settings).unwrap(), 0);
        assert_eq!(bound_state_count(&Potential::yukawa(2.0).unwrap(), 0, &settings).unwrap(), 1);
        assert!(bound_state_count(&Potential::Coulomb, 0, &settings).is_err());
    }

    #[test]
    fn solve_state_matches_reference_levels() {
        let settings = SolverSettings::default();
        let log = solve_state(&Potential::Logarithmic, 0, 0, &settings).unwrap();
        assert!((log.shooting - 0.697759).abs() < 5e-6, "{log:?}");
        let yuk = Potential::yukawa(100.0).unwrap();
        let g = solve_state(&yuk, 0, 0, &settings).unwrap();
        assert!((2.0 * g.shooting + 0.980149).abs() < 2e-6, "{g:?}");
        let c = solve_state(&Potential::Coulomb, 1, 1, &settings).unwrap();
        assert_eq!(c.key, SpectrumKey { n: 3, ell: 1 });
        assert!((c.shooting + 1.0 / 18.0).abs() < 1e-8, "{c:?}");
    }

    #[test]
    fn fd_reference_levels() {
        let settings = SolverSettings::default();
        let cf = CentrifugalSpec::quantum(1, 3).unwrap();
        let grid = FdMesh::new(50.0, 20_001).unwrap();
        let e = eigen_fd_richardson(&Potential::Logarithmic, cf, &grid, 1).unwrap()[0];
        assert!((e - 1.29457).abs() < 5e-6, "{e}");
        let yuk = Potential::yukawa(100.0).unwrap();
        let cf = CentrifugalSpec::quantum(5, 3).unwrap();
        let rho_max = rho_max_for(&yuk, 6, 5, &settings);
        let grid = FdMesh::new(rho_max, 20_001).unwrap();
        let e = eigen_fd_richardson(&yuk, cf, &grid, 1).unwrap()[0];
        assert!((2.0 * e + 0.0112818).abs() < 1e-6, "{e}");
    }

    #[test]
    fn fd_error_is_second_order() {
        let cf = CentrifugalSpec::quantum(0, 3).unwrap();
        let grid = FdMesh::new(30.0, 3_001).unwrap();
        let e2 = eigen_fd(&Potential::Coulomb, cf, &grid.refined(), 1).unwrap()[0];
        let e3 = eigen_fd(&Potential::Coulomb, cf, &grid.refined().refined(), 1).unwrap()[0];
        let extrapolated = (4.0 * e3 - e2) / 3.0;
        let ratio = (e2 - extrapolated) / (e3 - extrapolated);
        assert!((ratio - 4.0).abs() < 0.5, "ratio {ratio}");
    }

    #[test]
    fn small_log_spectrum_structure() {
        let spec = exact_spectrum(&Potential::Logarithmic, LevelLimit::MaxLevel(3), &SolverSettings::default()).unwrap();
        assert_eq!(spec.states.len(), 6);
        for s in &spec.states {
            assert_eq!(s.nodes as u32, s.key.n - s.key.ell - 1);
        }
        for ell in 0..3 {
            let e: Vec<f64> = spec.states.iter().filter(|s| s.key.ell == ell).map(|s| s.shooting).collect::<Vec<_>>();
            let mut sorted = e.clone();
            sorted.sort_by(f64::total_cmp);
            assert!(sorted.windows(2).all(|w| w[0] < w[1]));
        }
        let level3: Vec<_> = spec.states.iter().filter(|s| s.key.n == 3).collect();
        assert!(level3.windows(2).all(|w| w[0].key.ell > w[1].key.ell && w[0].shooting < w[1].shooting));
        assert!(exact_spectrum(&Potential::Logarithmic, LevelLimit::AllBound, &SolverSettings::default()).is_err());
    }
}

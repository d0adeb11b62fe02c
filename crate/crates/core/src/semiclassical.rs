//! Old-quantization and EBK spectra.
//!
//! The radial action ∮p_r dρ is evaluated after mapping the classically
//! allowed interval onto φ ∈ [0, π] with ρ = ρ̄ − Δ cos φ, which cancels the
//! square-root zeros of p_r at both turning points. A second, sine-graded
//! map φ = π(s − sin(2πs)/2π) flattens the endpoints further so that the
//! κ = 0 orbits through the origin (including the logarithmic one, whose
//! momentum has a √(−ln ρ) singularity there) converge at the same rate.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    CentrifugalSpec, EffectivePotential, Minimum, ModelError, Potential, QuantumNumbers,
    ReportedEnergy, ShiftPolicy, SpectrumKey, GOLDEN,
};
use crate::numerics::{self, Bracket, NumericsError, QuadratureRule, Tolerance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OqError {
    #[error("effective potential has no minimum for kappa = {kappa}")]
    NoMinimum { kappa: f64 },
    #[error("energy {energy} lies below the effective-potential minimum {u_min}")]
    NoClassicalRegion { energy: f64, u_min: f64 },
    #[error("no outer turning point at energy {energy}")]
    NoOuterTurningPoint { energy: f64 },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, OqError>;

/// Quadrature and root-finding settings for the action integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionSettings {
    /// Panels on the graded φ grid.
    pub panels: usize,
    /// Absolute bisection tolerance on the energy (natural units).
    pub energy_tol: f64,
    #[serde(skip)]
    pub rule: QuadratureRule,
}

impl Default for ActionSettings {
    fn default() -> Self {
        Self { panels: 2048, energy_tol: 1e-12, rule: QuadratureRule::Simpson }
    }
}

impl ActionSettings {
    pub fn validate(&self) -> Result<()> {
        if self.panels < 2 || self.panels % 2 != 0 {
            return Err(OqError::Argument(format!("panels must be even and >= 2 (got {})", self.panels)));
        }
        if !(self.energy_tol > 0.0 && self.energy_tol.is_finite()) {
            return Err(OqError::Argument(format!("energy tolerance must be positive (got {})", self.energy_tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurningPoints {
    pub rho_minus: f64,
    pub rho_plus: f64,
    pub degenerate: bool,
}

impl TurningPoints {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.rho_minus + self.rho_plus)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.rho_plus - self.rho_minus)
    }
}

/// Inner and outer roots of E = U_eff(ρ; κ).
pub fn turning_points(pot: &Potential, kappa: f64, energy: f64) -> Result<TurningPoints> {
    pot.validate()?;
    if !(kappa >= 0.0 && kappa.is_finite() && energy.is_finite()) {
        return Err(OqError::Argument(format!("need finite kappa >= 0 and energy (got {kappa}, {energy})")));
    }
    let ueff = EffectivePotential::with_kappa(*pot, kappa);
    if kappa == 0.0 {
        return match pot.level_crossing(energy) {
            Some(rho_plus) => Ok(TurningPoints { rho_minus: 0.0, rho_plus, degenerate: false }),
            None => Err(OqError::NoOuterTurningPoint { energy }),
        };
    }
    let (rho_c, u_min) = ueff.minimum().found().ok_or(OqError::NoMinimum { kappa })?;
    let gap = energy - u_min;
    let deg_tol = 1e-14 * u_min.abs().max(1.0);
    if gap < -deg_tol {
        return Err(OqError::NoClassicalRegion { energy, u_min });
    }
    if gap <= deg_tol {
        return Ok(TurningPoints { rho_minus: rho_c, rho_plus: rho_c, degenerate: true });
    }
    let f = |r: f64| ueff.value(r) - energy;

    let mut lo = rho_c;
    loop {
        lo *= 0.5;
        if f(lo) > 0.0 {
            break;
        }
        if lo < f64::MIN_POSITIVE {
            return Err(OqError::NoClassicalRegion { energy, u_min });
        }
    }
    let inner = root_in(f, lo, rho_c)?;

    let mut hi = rho_c;
    loop {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(OqError::NoOuterTurningPoint { energy });
        }
        let v = f(hi);
        if v > 0.0 {
            break;
        }
        // past the barrier top of a vanishing potential the curve never rises again
        if pot.vanishes_at_infinity() && energy >= 0.0 && ueff.scaled_slope(hi) > 0.0 {
            return Err(OqError::NoOuterTurningPoint { energy });
        }
    }
    let outer = root_in(f, rho_c, hi)?;
    Ok(TurningPoints { rho_minus: inner, rho_plus: outer, degenerate: false })
}

fn root_in<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Result<f64> {
    let b = Bracket::new(&f, lo, hi)?;
    Ok(numerics::bisect(&f, b, Tolerance::abs(f64::EPSILON * lo.max(f64::MIN_POSITIVE)))?)
}

/// p_r(ρ) = √(2(E − U_eff(ρ))) on the classically allowed interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionIntegrand {
    pub ueff: EffectivePotential,
    pub energy: f64,
}

impl ActionIntegrand {
    pub fn new(pot: Potential, kappa: f64, energy: f64) -> Self {
        Self { ueff: EffectivePotential::with_kappa(pot, kappa), energy }
    }

    /// Radial momentum, clamped to zero where rounding pushes E − U below zero.
    #[inline]
    pub fn momentum(&self, rho: f64) -> f64 {
        let k = self.energy - self.ueff.value(rho);
        if k > 0.0 {
            (2.0 * k).sqrt()
        } else {
            0.0
        }
    }
}

/// ∮ p_r dρ = 2∫ p_r dρ between the turning points, in natural units.
pub fn radial_action(pot: &Potential, kappa: f64, energy: f64) -> Result<f64> {
    radial_action_with(pot, kappa, energy, &ActionSettings::default())
}

pub fn radial_action_with(pot: &Potential, kappa: f64, energy: f64, settings: &ActionSettings) -> Result<f64> {
    let tp = turning_points(pot, kappa, energy)?;
    action_over(&ActionIntegrand::new(*pot, kappa, energy), &tp, settings)
}

fn action_over(integrand: &ActionIntegrand, tp: &TurningPoints, settings: &ActionSettings) -> Result<f64> {
    if tp.degenerate {
        return Ok(0.0);
    }
    let (rm, rp, half) = (tp.rho_minus, tp.rho_plus, tp.half_width());
    let g = |s: f64| {
        if s <= 0.0 || s >= 1.0 {
            return 0.0;
        }
        let phi = PI * (s - (TAU * s).sin() / TAU);
        let sin_ps = (PI * s).sin();
        let dphi = TAU * sin_ps * sin_ps;
        // ρ measured from the nearer turning point to avoid cancellation
        let rho = if phi < 0.5 * PI {
            let t = (0.5 * phi).sin();
            rm + 2.0 * half * t * t
        } else {
            let t = (0.5 * phi).cos();
            rp - 2.0 * half * t * t
        };
        if rho <= 0.0 {
            return 0.0;
        }
        integrand.momentum(rho) * half * phi.sin() * dphi
    };
    let value = settings.rule.integrate(g, 0.0, 1.0, settings.panels)?;
    Ok(2.0 * value)
}

/// Outcome of a quantization solve; loss of binding is a result, not an error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OqSolution {
    Bound(f64),
    Unbound,
}

impl OqSolution {
    pub fn bound(self) -> Option<f64> {
        match self {
            OqSolution::Bound(e) => Some(e),
            OqSolution::Unbound => None,
        }
    }
}

/// Energy of the OQ state `qn` (its n_r, n_θ already carry any shift;
/// `policy` only checks that `qn` is on the policy lattice).
pub fn oq_energy(pot: &Potential, qn: QuantumNumbers, policy: ShiftPolicy) -> Result<OqSolution> {
    oq_energy_with(pot, qn, policy, &ActionSettings::default())
}

pub fn oq_energy_with(
    pot: &Potential,
    qn: QuantumNumbers,
    policy: ShiftPolicy,
    settings: &ActionSettings,
) -> Result<OqSolution> {
    policy.lattice_indices(&qn)?;
    solve_action(pot, qn.n_theta(), qn.n_r(), settings)
}

/// Solve J(E; κ) = 2π n_r for E.
pub fn solve_action(pot: &Potential, kappa: f64, n_r: f64, settings: &ActionSettings) -> Result<OqSolution> {
    pot.validate()?;
    settings.validate()?;
    if !(kappa >= 0.0 && n_r >= 0.0) || (kappa == 0.0 && n_r == 0.0) {
        return Err(OqError::Argument(format!("need kappa, n_r >= 0 not both zero (got {kappa}, {n_r})")));
    }
    if n_r == 0.0 {
        return match circular_energy(pot, kappa) {
            Ok(e) if pot.vanishes_at_infinity() && e >= 0.0 => Ok(OqSolution::Unbound),
            Ok(e) => Ok(OqSolution::Bound(e)),
            Err(OqError::NoMinimum { .. }) => Ok(OqSolution::Unbound),
            Err(e) => Err(e),
        };
    }
    let target = TAU * n_r;
    let g = |e: f64| -> Result<f64> { Ok(radial_action_with(pot, kappa, e, settings)? - target) };

    // lower end: J = 0 at the minimum, or J → 0 as E → −∞ when κ = 0
    let lo = if kappa > 0.0 {
        match EffectivePotential::with_kappa(*pot, kappa).minimum() {
            Minimum::At { u_min, .. } => u_min,
            Minimum::None => return Ok(OqSolution::Unbound),
        }
    } else {
        let mut e = if pot.vanishes_at_infinity() { -1.0 } else { 0.0 };
        let mut step = 1.0;
        while g(e)? >= 0.0 {
            e = if pot.vanishes_at_infinity() { 2.0 * e } else { e - step };
            step *= 2.0;
            if !e.is_finite() {
                return Err(OqError::Argument("no lower energy bracket".into()));
            }
        }
        e
    };
    if pot.vanishes_at_infinity() && lo >= 0.0 {
        return Ok(OqSolution::Unbound);
    }

    let hi = if pot.vanishes_at_infinity() {
        let mut e = 0.5 * lo;
        loop {
            if g(e)? > 0.0 {
                break e;
            }
            if e.abs() < 1e-14 * lo.abs() {
                return Ok(OqSolution::Unbound);
            }
            e *= 0.5;
        }
    } else {
        let mut step = 1.0;
        loop {
            let e = lo + step;
            if g(e)? > 0.0 {
                break e;
            }
            step *= 2.0;
            if step > 1e6 {
                return Err(OqError::Argument("no upper energy bracket".into()));
            }
        }
    };

    // propagate action failures out of the closure through a side channel
    let mut failure = None;
    let h = |e: f64| match g(e) {
        Ok(v) => v,
        Err(err) => {
            failure.get_or_insert(err);
            f64::NAN
        }
    };
    let bracket = Bracket { lo, hi, f_lo: -target, f_hi: 1.0 };
    let root = numerics::bisect(h, bracket, Tolerance::abs(settings.energy_tol));
    if let Some(err) = failure {
        return Err(err);
    }
    Ok(OqSolution::Bound(root?))
}

/// Circular-orbit energy: the minimum of U_eff at κ.
pub fn circular_energy(pot: &Potential, kappa: f64) -> Result<f64> {
    pot.validate()?;
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(OqError::Argument(format!("circular orbits need kappa > 0 (got {kappa})")));
    }
    match EffectivePotential::with_kappa(*pot, kappa).minimum() {
        Minimum::At { u_min, .. } => Ok(u_min),
        Minimum::None => Err(OqError::NoMinimum { kappa }),
    }
}

/// Zero-angular-momentum energy with action 2π·n_r.
pub fn radial_motion_energy(pot: &Potential, n_r: f64) -> Result<OqSolution> {
    radial_motion_energy_with(pot, n_r, &ActionSettings::default())
}

pub fn radial_motion_energy_with(pot: &Potential, n_r: f64, settings: &ActionSettings) -> Result<OqSolution> {
    if !(n_r > 0.0 && n_r.is_finite()) {
        return Err(OqError::Argument(format!("radial motion needs n_r > 0 (got {n_r})")));
    }
    solve_action(pot, 0.0, n_r, settings)
}

/// Closed-form OQ energy (natural units) where one is known.
pub fn analytic_energy(pot: &Potential, qn: QuantumNumbers, policy: ShiftPolicy) -> Option<f64> {
    policy.lattice_indices(&qn).ok()?;
    let (nr, kappa) = (qn.n_r(), qn.n_theta());
    match pot {
        Potential::Coulomb => Some(-0.5 / (nr + kappa).powi(2)),
        Potential::Logarithmic if nr == 0.0 => Some(0.5 + kappa.ln()),
        Potential::Logarithmic if kappa == 0.0 => Some((nr * TAU.sqrt()).ln()),
        _ => None,
    }
}

/// Constant gap between the logarithmic radial-motion and circular spectra, in β.
pub fn log_spread() -> f64 {
    0.5 * (TAU.ln() - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YukawaCriticals {
    /// κ above which the effective-potential minimum is positive.
    pub nu_star: f64,
    /// κ above which the effective potential has no minimum.
    pub nu_star_star: f64,
    /// Radial quantum number beyond which κ = 0 states are unbound.
    pub nr_star: f64,
}

pub fn yukawa_criticals(lambda: f64) -> Result<YukawaCriticals> {
    Potential::yukawa(lambda)?;
    Ok(YukawaCriticals {
        nu_star: (2.0 * lambda).sqrt() * (-0.5f64).exp(),
        nu_star_star: (lambda * GOLDEN.powi(3) * (-GOLDEN).exp()).sqrt(),
        nr_star: 2.0 * (lambda / PI).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumMethod {
    OqInteger,
    OqShifted,
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub key: SpectrumKey,
    pub qn: QuantumNumbers,
    pub energy: ReportedEnergy,
    pub method: SpectrumMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LevelLimit {
    MaxLevel(u32),
    AllBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OqSpectrum {
    pub entries: Vec<SpectrumEntry>,
    /// Admissible cells with no negative-energy solution.
    pub unbound: Vec<SpectrumKey>,
}

impl OqSpectrum {
    pub fn level(&self, n: u32) -> impl Iterator<Item = &SpectrumEntry> {
        self.entries.iter().filter(move |e| e.key.n == n)
    }
}

/// The (i, j) lattice cells of level `n`, ℓ = j ascending.
pub fn level_cells(policy: ShiftPolicy, n: u32) -> Vec<(SpectrumKey, QuantumNumbers)> {
    let (sr, sa) = (policy.twice_radial_shift(), policy.twice_angular_shift());
    let twice_n = 2 * n;
    if twice_n < sr + sa || (twice_n - sr - sa) % 2 != 0 {
        return Vec::new();
    }
    let top = (twice_n - sr - sa) / 2;
    (0..=top)
        .filter_map(|j| {
            let qn = QuantumNumbers::new(twice_n - 2 * j - sa, 2 * j + sa).ok()?;
            Some((SpectrumKey { n, ell: j }, qn))
        })
        .collect()
}

pub fn oq_spectrum(pot: &Potential, policy: ShiftPolicy, limit: LevelLimit) -> Result<OqSpectrum> {
    oq_spectrum_with(pot, policy, limit, &ActionSettings::default())
}

pub fn oq_spectrum_with(
    pot: &Potential,
    policy: ShiftPolicy,
    limit: LevelLimit,
    settings: &ActionSettings,
) -> Result<OqSpectrum> {
    pot.validate()?;
    if !policy.has_integer_levels() {
        return Err(OqError::Argument(format!("policy {} does not give integer levels", policy.name())));
    }
    if limit == LevelLimit::AllBound && !matches!(pot, Potential::Yukawa { .. }) {
        return Err(OqError::Argument(format!("{pot} has infinitely many bound states; give a maximum level")));
    }
    let method = if policy == ShiftPolicy::INTEGER { SpectrumMethod::OqInteger } else { SpectrumMethod::OqShifted };
    let mut out = OqSpectrum { entries: Vec::new(), unbound: Vec::new() };
    let mut n = 1;
    loop {
        if let LevelLimit::MaxLevel(max) = limit {
            if n > max {
                break;
            }
        }
        let cells = level_cells(policy, n);
        let solved: Vec<_> = cells
            .par_iter()
            .map(|&(key, qn)| oq_energy_with(pot, qn, policy, settings).map(|s| (key, qn, s)))
            .collect::<Result<_>>()?;
        let mut bound_here = 0;
        for (key, qn, sol) in solved {
            match sol {
                OqSolution::Bound(e) => {
                    bound_here += 1;
                    out.entries.push(SpectrumEntry { key, qn, energy: ReportedEnergy::from_natural(pot, e), method });
                }
                OqSolution::Unbound => out.unbound.push(key),
            }
        }
        // every cell of level n+1 lies above some cell of level n
        if limit == LevelLimit::AllBound && bound_here == 0 {
            break;
        }
        n += 1;
    }
    out.entries.sort_by(|a, b| SpectrumKey::table_order(&a.key, &b.key));
    Ok(out)
}

/// Closed-form circular (n_r = 0) and radial-motion (n_θ = 0) energies for
/// levels 1..=n_max where the potential admits them.
pub fn analytic_entries(pot: &Potential, n_max: u32) -> Vec<SpectrumEntry> {
    let mut out = Vec::new();
    for n in 1..=n_max {
        for qn in [QuantumNumbers::integer(0, n), QuantumNumbers::integer(n, 0)].into_iter().flatten() {
            if let Some(e) = analytic_energy(pot, qn, ShiftPolicy::INTEGER) {
                out.push(SpectrumEntry {
                    key: SpectrumKey { n, ell: qn.twice_ntheta / 2 },
                    qn,
                    energy: ReportedEnergy::from_natural(pot, e),
                    method: SpectrumMethod::Analytic,
                });
            }
        }
    }
    out
}

/// Effective potential on a centrifugal spec; re-exported for plot data.
pub fn ueff_curve(pot: &Potential, kappa: f64, rhos: &[f64]) -> Vec<(f64, f64)> {
    let u = EffectivePotential::new(*pot, CentrifugalSpec::classical(kappa));
    rhos.iter().map(|&r| (r, u.value(r))).collect()
}

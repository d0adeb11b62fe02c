//! Potentials, effective potentials and quantum-number bookkeeping.
//!
//! Everything here works in natural units: ħ = m = 1, the Coulomb and Yukawa
//! coupling is 1 (so the Bohr radius is 1 and the Rydberg energy is 1/2) and
//! the logarithmic potential uses β = 1 with r₀ = 1. Conversion to reporting
//! units happens only through [`ReportedEnergy`].

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{self, Bracket, Tolerance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("radius must be positive and finite (got {0})")]
    Radius(f64),
    #[error("Yukawa screening ratio must be positive and finite (got {0})")]
    Lambda(f64),
    #[error("dimension must be at least 2 (got {0})")]
    Dimension(u32),
    #[error("invalid quantum numbers: {0}")]
    QuantumNumbers(String),
    #[error("invalid shift policy: {0}")]
    Shift(String),
    #[error(transparent)]
    Numerics(#[from] numerics::NumericsError),
}

/// Golden ratio, the positive root of x² = x + 1.
pub const GOLDEN: f64 = 1.618_033_988_749_895;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Potential {
    Coulomb,
    #[serde(rename = "log")]
    Logarithmic,
    Yukawa { lambda: f64 },
}

impl Potential {
    pub fn yukawa(lambda: f64) -> Result<Self, ModelError> {
        if lambda > 0.0 && lambda.is_finite() {
            Ok(Potential::Yukawa { lambda })
        } else {
            Err(ModelError::Lambda(lambda))
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match *self {
            Potential::Yukawa { lambda } => Potential::yukawa(lambda).map(|_| ()),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Potential::Coulomb => "coulomb",
            Potential::Logarithmic => "log",
            Potential::Yukawa { .. } => "yukawa",
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match *self {
            Potential::Yukawa { lambda } => Some(lambda),
            _ => None,
        }
    }

    /// Whether V(ρ) → 0 at infinity, so bound states need E < 0.
    pub fn vanishes_at_infinity(&self) -> bool {
        !matches!(self, Potential::Logarithmic)
    }

    /// V(ρ) without argument checks; callers guarantee ρ > 0.
    #[inline]
    pub(crate) fn value_unchecked(&self, rho: f64) -> f64 {
        match *self {
            Potential::Coulomb => -1.0 / rho,
            Potential::Logarithmic => rho.ln(),
            Potential::Yukawa { lambda } => -(-rho / lambda).exp() / rho,
        }
    }

    /// ρ³·V′(ρ), which is finite and smooth down to ρ = 0.
    #[inline]
    pub(crate) fn cubed_slope(&self, rho: f64) -> f64 {
        match *self {
            Potential::Coulomb => rho,
            Potential::Logarithmic => rho * rho,
            Potential::Yukawa { lambda } => {
                let x = rho / lambda;
                rho * (-x).exp() * (1.0 + x)
            }
        }
    }

    /// Inverse of V on its range, for κ = 0 outer turning points.
    pub(crate) fn level_crossing(&self, energy: f64) -> Option<f64> {
        match *self {
            Potential::Coulomb => (energy < 0.0).then(|| -1.0 / energy),
            Potential::Logarithmic => Some(energy.exp()),
            Potential::Yukawa { .. } => {
                if energy >= 0.0 {
                    return None;
                }
                // V is increasing and the Coulomb crossing lies outside the Yukawa one
                let f = |r: f64| self.value_unchecked(r) - energy;
                let hi = -1.0 / energy;
                let mut lo = 0.5 * hi;
                while f(lo) >= 0.0 {
                    lo *= 0.5;
                    if lo < f64::MIN_POSITIVE {
                        return None;
                    }
                }
                let b = Bracket::new(f, lo, hi).ok()?;
                numerics::bisect(f, b, Tolerance::abs(1e-15 * hi)).ok()
            }
        }
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Yukawa { lambda } => write!(f, "yukawa(lambda={lambda})"),
            other => f.write_str(other.name()),
        }
    }
}

/// V(ρ) in natural units.
pub fn potential_value(pot: &Potential, rho: f64) -> Result<f64, ModelError> {
    check_radius(rho)?;
    Ok(pot.value_unchecked(rho))
}

fn check_radius(rho: f64) -> Result<(), ModelError> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(ModelError::Radius(rho))
    }
}

/// An energy in the units the tables are quoted in: Rydbergs for Coulomb and
/// Yukawa (natural × 2), β for the logarithmic potential (natural × 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReportedEnergy(pub f64);

impl ReportedEnergy {
    pub fn scale(pot: &Potential) -> f64 {
        match pot {
            Potential::Logarithmic => 1.0,
            Potential::Coulomb | Potential::Yukawa { .. } => 2.0,
        }
    }

    pub fn from_natural(pot: &Potential, natural: f64) -> Self {
        ReportedEnergy(natural * Self::scale(pot))
    }

    pub fn to_natural(self, pot: &Potential) -> f64 {
        self.0 / Self::scale(pot)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn unit_name(pot: &Potential) -> &'static str {
        match pot {
            Potential::Logarithmic => "beta",
            _ => "E_R",
        }
    }
}

/// Centrifugal term of the effective potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CentrifugalSpec {
    /// Classical angular momentum κ = p_θ/ħ.
    Classical { kappa: f64 },
    /// Orbital quantum number in `dim` spatial dimensions.
    Quantum { ell: u32, dim: u32 },
}

impl CentrifugalSpec {
    pub fn classical(kappa: f64) -> Self {
        CentrifugalSpec::Classical { kappa }
    }

    pub fn quantum(ell: u32, dim: u32) -> Result<Self, ModelError> {
        if dim < 2 {
            return Err(ModelError::Dimension(dim));
        }
        Ok(CentrifugalSpec::Quantum { ell, dim })
    }

    /// Numerator c of c/(2ρ²).
    pub fn coefficient(&self) -> f64 {
        match *self {
            CentrifugalSpec::Classical { kappa } => kappa * kappa,
            CentrifugalSpec::Quantum { ell, dim } => {
                // (ℓ + (D−3)/2)(ℓ + (D−1)/2) = L(L+1) with 2L = 2ℓ + D − 3
                let twice_l = 2 * ell as i64 + dim as i64 - 3;
                (twice_l * (twice_l + 2)) as f64 / 4.0
            }
        }
    }

    /// Effective orbital index L with coefficient L(L+1).
    pub fn effective_ell(&self) -> f64 {
        match *self {
            CentrifugalSpec::Classical { kappa } => (0.25 + kappa * kappa).sqrt() - 0.5,
            CentrifugalSpec::Quantum { ell, dim } => ell as f64 + (dim as f64 - 3.0) / 2.0,
        }
    }
}

/// Radial Hamiltonian pieces for one potential and centrifugal coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectivePotential {
    pub potential: Potential,
    pub coefficient: f64,
}

impl EffectivePotential {
    pub fn new(potential: Potential, cf: CentrifugalSpec) -> Self {
        Self { potential, coefficient: cf.coefficient() }
    }

    pub fn with_kappa(potential: Potential, kappa: f64) -> Self {
        Self { potential, coefficient: kappa * kappa }
    }

    #[inline]
    pub fn value(&self, rho: f64) -> f64 {
        self.coefficient / (2.0 * rho * rho) + self.potential.value_unchecked(rho)
    }

    /// ρ³·U′(ρ); has the sign of U′.
    #[inline]
    pub fn scaled_slope(&self, rho: f64) -> f64 {
        self.potential.cubed_slope(rho) - self.coefficient
    }

    /// Stationary minimum of U_eff, if one exists.
    pub fn minimum(&self) -> Minimum {
        let c = self.coefficient;
        if !(c > 0.0) {
            return Minimum::None;
        }
        let rho = match self.potential {
            Potential::Coulomb => c,
            Potential::Logarithmic => c.sqrt(),
            Potential::Yukawa { lambda } => {
                let peak = GOLDEN * lambda;
                if self.scaled_slope(peak) <= 0.0 {
                    return Minimum::None;
                }
                let f = |r: f64| self.scaled_slope(r);
                // ρ³V′ ≤ ρ for Yukawa, so U′ < 0 on (0, c)
                let lo = c.min(0.5 * peak);
                let b = match Bracket::new(f, lo, peak) {
                    Ok(b) => b,
                    Err(_) => return Minimum::None,
                };
                match numerics::bisect(f, b, Tolerance::abs(4.0 * f64::EPSILON * peak)) {
                    Ok(r) => r,
                    Err(_) => return Minimum::None,
                }
            }
        };
        Minimum::At { rho, u_min: self.value(rho) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Minimum {
    At { rho: f64, u_min: f64 },
    None,
}

impl Minimum {
    pub fn found(self) -> Option<(f64, f64)> {
        match self {
            Minimum::At { rho, u_min } => Some((rho, u_min)),
            Minimum::None => None,
        }
    }
}

/// U_eff(ρ) = c/(2ρ²) + V(ρ).
pub fn effective_potential(pot: &Potential, cf: CentrifugalSpec, rho: f64) -> Result<f64, ModelError> {
    check_radius(rho)?;
    Ok(EffectivePotential::new(*pot, cf).value(rho))
}

/// Location and value of the effective-potential minimum.
pub fn effective_potential_minimum(pot: &Potential, cf: CentrifugalSpec) -> Minimum {
    EffectivePotential::new(*pot, cf).minimum()
}

/// Action quantum numbers, stored doubled so half-integers stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuantumNumbers {
    pub twice_nr: u32,
    pub twice_ntheta: u32,
}

impl QuantumNumbers {
    pub fn new(twice_nr: u32, twice_ntheta: u32) -> Result<Self, ModelError> {
        if twice_nr == 0 && twice_ntheta == 0 {
            return Err(ModelError::QuantumNumbers("n_r + n_theta must be positive".into()));
        }
        Ok(Self { twice_nr, twice_ntheta })
    }

    pub fn integer(nr: u32, ntheta: u32) -> Result<Self, ModelError> {
        Self::new(2 * nr, 2 * ntheta)
    }

    pub fn n_r(&self) -> f64 {
        self.twice_nr as f64 / 2.0
    }

    pub fn n_theta(&self) -> f64 {
        self.twice_ntheta as f64 / 2.0
    }

    pub fn twice_n(&self) -> u32 {
        self.twice_nr + self.twice_ntheta
    }

    pub fn n(&self) -> f64 {
        self.twice_n() as f64 / 2.0
    }
}

impl fmt::Display for QuantumNumbers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let half = |t: u32| if t % 2 == 0 { format!("{}", t / 2) } else { format!("{t}/2") };
        write!(f, "(n_r={}, n_theta={})", half(self.twice_nr), half(self.twice_ntheta))
    }
}

/// Maslov-type shifts: radial μ/4 + b/2 and angular (D−2)/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftPolicy {
    pub mu: u32,
    pub b: u32,
    pub dim: u32,
}

impl ShiftPolicy {
    pub const INTEGER: ShiftPolicy = ShiftPolicy { mu: 0, b: 0, dim: 2 };
    pub const EBK_3D: ShiftPolicy = ShiftPolicy { mu: 2, b: 0, dim: 3 };

    pub fn new(mu: u32, b: u32, dim: u32) -> Result<Self, ModelError> {
        if dim < 2 {
            return Err(ModelError::Dimension(dim));
        }
        if mu % 2 != 0 {
            return Err(ModelError::Shift(format!(
                "mu = {mu} gives a quarter-integer radial shift"
            )));
        }
        Ok(Self { mu, b, dim })
    }

    pub fn twice_radial_shift(&self) -> u32 {
        self.mu / 2 + self.b
    }

    pub fn twice_angular_shift(&self) -> u32 {
        self.dim - 2
    }

    pub fn radial_shift(&self) -> f64 {
        self.twice_radial_shift() as f64 / 2.0
    }

    pub fn angular_shift(&self) -> f64 {
        self.twice_angular_shift() as f64 / 2.0
    }

    pub fn name(&self) -> String {
        if *self == Self::INTEGER {
            "integer".into()
        } else if *self == Self::EBK_3D {
            "ebk".into()
        } else {
            format!("mu={},b={},dim={}", self.mu, self.b, self.dim)
        }
    }

    /// Quantum numbers n_r = i + radial_shift, n_θ = j + angular_shift.
    pub fn quantum_numbers(&self, i: u32, j: u32) -> Result<QuantumNumbers, ModelError> {
        QuantumNumbers::new(2 * i + self.twice_radial_shift(), 2 * j + self.twice_angular_shift())
    }

    /// Check that `qn` lies on this policy's lattice and return its (i, j).
    pub fn lattice_indices(&self, qn: &QuantumNumbers) -> Result<(u32, u32), ModelError> {
        let (sr, sa) = (self.twice_radial_shift(), self.twice_angular_shift());
        let ok = qn.twice_nr >= sr
            && qn.twice_ntheta >= sa
            && (qn.twice_nr - sr) % 2 == 0
            && (qn.twice_ntheta - sa) % 2 == 0;
        if ok {
            Ok(((qn.twice_nr - sr) / 2, (qn.twice_ntheta - sa) / 2))
        } else {
            Err(ModelError::Shift(format!("{qn} is not admissible under policy {}", self.name())))
        }
    }

    /// Principal level n = n_r + n_θ is an integer on this lattice.
    pub fn has_integer_levels(&self) -> bool {
        (self.twice_radial_shift() + self.twice_angular_shift()) % 2 == 0
    }
}

/// (n, ℓ) label shared by semiclassical and exact spectra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpectrumKey {
    pub n: u32,
    pub ell: u32,
}

impl SpectrumKey {
    /// Table ordering: ascending n, then descending ℓ.
    pub fn table_order(a: &SpectrumKey, b: &SpectrumKey) -> std::cmp::Ordering {
        a.n.cmp(&b.n).then(b.ell.cmp(&a.ell))
    }
}

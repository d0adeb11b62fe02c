//! Bound-state spectra of central potentials from old (Bohr–Sommerfeld)
//! quantization, its EBK refinement, and exact radial Schrödinger solvers.
//!
//! Coulomb, logarithmic and Yukawa potentials are supported. All kernels
//! work in natural units (ħ = m = 1, unit coupling); energies are converted
//! to Rydbergs (Coulomb, Yukawa) or β (logarithmic) only for reporting.

pub mod model;
pub mod numerics;
pub mod semiclassical;
pub mod spectral;
pub mod harness;
pub mod cli;

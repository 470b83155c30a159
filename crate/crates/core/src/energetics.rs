//! Energy densities at a critical point and triality classification.
//!
//! All quantities are per unit reference volume. With `F = τ·T⁻¹` and
//! `E(F) = ∇U*(T)` the total potential density `W(F) − F:τ` equals the pure
//! complementary density `−[½tr(τT⁻¹τᵀ + T) + U*(T)]`, which is what
//! [`EnergyReport::complementarity_residual`] measures.

use serde::{Deserialize, Serialize};

use crate::dual_solver::DualSolution;
use crate::error::Result;
use crate::material::{
    complementary_energy, green_strain, hessian_stored_energy_unchecked, stored_energy_unchecked,
    strain_of_stress, MaterialParams,
};
use crate::tensors::{definiteness, invert_sym3, Definiteness, SymTensor3, Tensor3};

/// Sub-label for a critical point with negative-definite `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LocalLabel {
    /// The Hessian of `W` at `F` is positive definite.
    LocalMin,
    /// The Hessian is not positive definite; recorded as a local-maximum
    /// candidate, not proven.
    LocalMaxCandidate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Triality {
    GlobalMinimizer,
    LocalExtremumCandidate(LocalLabel),
    Saddle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub dual_density: f64,
    pub potential_density: f64,
    pub gap_density: f64,
    pub complementarity_residual: f64,
    pub hessian_min_eig: f64,
    /// `‖E(τ·T⁻¹) − ∇U*(T)‖∞`.
    pub constitutive_residual: f64,
    /// `max(1, |dual_density|, ‖τ‖∞²/μ)`.
    pub scale: f64,
    pub triality: Triality,
}

/// `−[½ tr(τ·T⁻¹·τᵀ + T) + U*(T)]`.
pub fn dual_energy_density(t: &SymTensor3, tau: &Tensor3, m: &MaterialParams) -> Result<f64> {
    let t_inv = invert_sym3(t)?.as_tensor();
    let inner = (*tau * t_inv * tau.transpose()).trace() + t.trace();
    Ok(-(0.5 * inner + complementary_energy(t, m)))
}

/// `W(F) − F:τ`. The sign of `det F` is not enforced.
pub fn potential_density(f: &Tensor3, tau: &Tensor3, m: &MaterialParams) -> f64 {
    stored_energy_unchecked(f, m) - f.ddot(tau)
}

/// `½ (FᵀF + I) : T`.
pub fn gap_density(f: &Tensor3, t: &SymTensor3) -> f64 {
    0.5 * f.gram().plus_identity(1.0, 1.0).ddot(t)
}

pub fn energy_scale(dual_density: f64, tau: &Tensor3, m: &MaterialParams) -> f64 {
    let n = tau.norm_inf();
    1.0_f64.max(dual_density.abs()).max(n * n / m.mu())
}

/// Energies, Hessian and triality label of one dual solution.
pub fn classify_triality(
    sol: &DualSolution,
    tau: &Tensor3,
    m: &MaterialParams,
) -> Result<EnergyReport> {
    let t = &sol.t;
    let f = *tau * invert_sym3(t)?.as_tensor();
    let dual = dual_energy_density(t, tau, m)?;
    let potential = potential_density(&f, tau, m);
    let scale = energy_scale(dual, tau, m);
    let hessian_min_eig = hessian_stored_energy_unchecked(&f, m).min_eigenvalue();
    let triality = match definiteness(t) {
        Definiteness::PositiveDefinite => Triality::GlobalMinimizer,
        Definiteness::NegativeDefinite => {
            if hessian_min_eig > 1e-8 * scale {
                Triality::LocalExtremumCandidate(LocalLabel::LocalMin)
            } else {
                Triality::LocalExtremumCandidate(LocalLabel::LocalMaxCandidate)
            }
        }
        Definiteness::Indefinite | Definiteness::Singular => Triality::Saddle,
    };
    Ok(EnergyReport {
        dual_density: dual,
        potential_density: potential,
        gap_density: gap_density(&f, t),
        complementarity_residual: (potential - dual).abs(),
        hessian_min_eig,
        constitutive_residual: green_strain(&f).sub(&strain_of_stress(t, m)).norm_inf(),
        scale,
        triality,
    })
}

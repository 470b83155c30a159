//! St Venant-Kirchhoff constitutive package.
//!
//! The canonical energy is quadratic in the Green-St Venant strain
//! `E = ½(FᵀF − I)`:
//!
//! ```text
//! U(E)  = μ tr(E²) + ½λ (tr E)²
//! S     = ∇U(E) = 2μE + λ (tr E) I            (Hooke's law, S = H:E)
//! U*(S) = tr(S²)/(4μ) − λ (tr S)² / (4μ(3λ+2μ))
//! E     = ∇U*(S) = S/(2μ) − λ (tr S) I / (2μ(3λ+2μ))
//! ```
//!
//! The stored energy of a deformation gradient is `W(F) = U(E(F))`, with
//! first Piola-Kirchhoff stress `F·S(E(F))` and the 9×9 Hessian
//! `δ_ij S_αβ + F_iθ H_θαβν F_jν` in row-major `(i, α)` flattening.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensors::{jacobi_eigen, SymTensor3, Tensor3};

/// Lamé constants. Both must be strictly positive so that `0 < k < 1/3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMaterial")]
pub struct MaterialParams {
    lambda: f64,
    mu: f64,
}

#[derive(Deserialize)]
struct RawMaterial {
    lambda: f64,
    mu: f64,
}

impl TryFrom<RawMaterial> for MaterialParams {
    type Error = Error;
    fn try_from(raw: RawMaterial) -> Result<Self> {
        MaterialParams::new(raw.lambda, raw.mu)
    }
}

impl MaterialParams {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !(lambda.is_finite() && mu.is_finite() && lambda > 0.0 && mu > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Lamé constants must be positive and finite (lambda = {lambda}, mu = {mu})"
            )));
        }
        Ok(MaterialParams { lambda, mu })
    }

    /// Material with the given coupling ratio `k` and shear modulus `mu`.
    pub fn from_k(k: f64, mu: f64) -> Result<Self> {
        if !(k > 0.0 && k < 1.0 / 3.0) {
            return Err(Error::InvalidParameter(format!(
                "k must lie in (0, 1/3), got {k}"
            )));
        }
        MaterialParams::new(2.0 * k * mu / (1.0 - 3.0 * k), mu)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `λ / (3λ + 2μ)`.
    pub fn k(&self) -> f64 {
        self.lambda / (3.0 * self.lambda + 2.0 * self.mu)
    }

    pub fn hooke(&self) -> HookeTensor {
        HookeTensor {
            lambda: self.lambda,
            mu: self.mu,
        }
    }
}

/// Isotropic elasticity tensor `H_abcd = λ δ_ab δ_cd + μ (δ_ac δ_bd + δ_ad δ_bc)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HookeTensor {
    pub lambda: f64,
    pub mu: f64,
}

impl HookeTensor {
    pub fn component(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
        self.lambda * delta(a, b) * delta(c, d)
            + self.mu * (delta(a, c) * delta(b, d) + delta(a, d) * delta(b, c))
    }

    /// `H:E = 2μE + λ(tr E)I`.
    pub fn apply(&self, e: &SymTensor3) -> SymTensor3 {
        e.plus_identity(2.0 * self.mu, self.lambda * e.trace())
    }
}

/// Green-St Venant strain `½(FᵀF − I)`.
pub fn green_strain(f: &Tensor3) -> SymTensor3 {
    f.gram().plus_identity(0.5, -0.5)
}

pub fn strain_energy(e: &SymTensor3, m: &MaterialParams) -> f64 {
    let tr = e.trace();
    m.mu * e.ddot(e) + 0.5 * m.lambda * tr * tr
}

pub fn stress_of_strain(e: &SymTensor3, m: &MaterialParams) -> SymTensor3 {
    m.hooke().apply(e)
}

pub fn complementary_energy(t: &SymTensor3, m: &MaterialParams) -> f64 {
    let tr = t.trace();
    t.ddot(t) / (4.0 * m.mu) - m.lambda / (4.0 * m.mu * (3.0 * m.lambda + 2.0 * m.mu)) * tr * tr
}

/// `∇U*(T) = H⁻¹:T`.
pub fn strain_of_stress(t: &SymTensor3, m: &MaterialParams) -> SymTensor3 {
    let c = m.lambda / (2.0 * m.mu * (3.0 * m.lambda + 2.0 * m.mu));
    t.plus_identity(1.0 / (2.0 * m.mu), -c * t.trace())
}

fn check_orientation(f: &Tensor3) -> Result<()> {
    let det = f.det();
    if det > 0.0 {
        Ok(())
    } else {
        Err(Error::OrientationViolation { det })
    }
}

/// `W(F) = U(½(FᵀF − I))`; requires `det F > 0`.
pub fn stored_energy(f: &Tensor3, m: &MaterialParams) -> Result<f64> {
    check_orientation(f)?;
    Ok(stored_energy_unchecked(f, m))
}

/// `W(F)` evaluated without the orientation check.
pub fn stored_energy_unchecked(f: &Tensor3, m: &MaterialParams) -> f64 {
    strain_energy(&green_strain(f), m)
}

/// First Piola-Kirchhoff stress `F·S(E(F))`; requires `det F > 0`.
pub fn first_pk_stress(f: &Tensor3, m: &MaterialParams) -> Result<Tensor3> {
    check_orientation(f)?;
    Ok(first_pk_stress_unchecked(f, m))
}

pub fn first_pk_stress_unchecked(f: &Tensor3, m: &MaterialParams) -> Tensor3 {
    *f * stress_of_strain(&green_strain(f), m).as_tensor()
}

/// Dense symmetric 9×9 matrix indexed by the flattened pair `3·i + α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hessian9(pub [[f64; 9]; 9]);

impl Hessian9 {
    #[inline]
    pub fn index(i: usize, alpha: usize) -> usize {
        3 * i + alpha
    }

    pub fn eigenvalues(&self) -> [f64; 9] {
        let (mut vals, _) = jacobi_eigen(self.0);
        vals.sort_by(f64::total_cmp);
        vals
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..9 {
            for c in 0..9 {
                worst = worst.max((self.0[r][c] - self.0[c][r]).abs());
            }
        }
        worst
    }
}

/// `∂²W/∂F_iα∂F_jβ`; requires `det F > 0`.
pub fn hessian_stored_energy(f: &Tensor3, m: &MaterialParams) -> Result<Hessian9> {
    check_orientation(f)?;
    Ok(hessian_stored_energy_unchecked(f, m))
}

pub fn hessian_stored_energy_unchecked(f: &Tensor3, m: &MaterialParams) -> Hessian9 {
    let s = stress_of_strain(&green_strain(f), m);
    let h = m.hooke();
    let mut out = [[0.0; 9]; 9];
    for i in 0..3 {
        for alpha in 0..3 {
            for j in 0..3 {
                for beta in 0..3 {
                    let mut v = if i == j { s.get(alpha, beta) } else { 0.0 };
                    for theta in 0..3 {
                        for nu in 0..3 {
                            v += f.get(i, theta)
                                * h.component(theta, alpha, beta, nu)
                                * f.get(j, nu);
                        }
                    }
                    out[Hessian9::index(i, alpha)][Hessian9::index(j, beta)] = v;
                }
            }
        }
    }
    Hessian9(out)
}

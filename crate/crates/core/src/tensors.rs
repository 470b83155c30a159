//! 3×3 tensor arithmetic, symmetric eigendecomposition, inversion and
//! definiteness classification.
//!
//! Every other module works in terms of [`Tensor3`] (deformation gradients,
//! first Piola-Kirchhoff stress) and [`SymTensor3`] (strains, second
//! Piola-Kirchhoff stress, `τᵀτ`). Eigendecompositions use cyclic Jacobi
//! rotations, shared with the 9×9 Hessian eigenvalue routine through
//! [`jacobi_eigen`].

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

/// General (not necessarily symmetric) second-order tensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tensor3(pub [[f64; 3]; 3]);

/// Symmetric second-order tensor. Symmetry is exact by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SymTensor3([[f64; 3]; 3]);

/// Sign structure of a symmetric tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Definiteness {
    PositiveDefinite,
    NegativeDefinite,
    Indefinite,
    Singular,
}

/// Orthonormal eigenbasis (columns of `q`) and eigenvalues sorted descending.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSystem3 {
    pub q: Tensor3,
    pub lambda: Vec3,
}

impl Tensor3 {
    pub const ZERO: Tensor3 = Tensor3([[0.0; 3]; 3]);

    pub fn identity() -> Self {
        Self::from_diag([1.0, 1.0, 1.0])
    }

    pub fn from_diag(d: Vec3) -> Self {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            m[i][i] = d[i];
        }
        Tensor3(m)
    }

    /// Rotation by `angle` radians about `axis` (Rodrigues' formula).
    pub fn rotation(axis: Vec3, angle: f64) -> Self {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        let [x, y, z] = [axis[0] / n, axis[1] / n, axis[2] / n];
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        Tensor3([
            [c + x * x * t, x * y * t - z * s, x * z * t + y * s],
            [y * x * t + z * s, c + y * y * t, y * z * t - x * s],
            [z * x * t - y * s, z * y * t + x * s, c + z * z * t],
        ])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Tensor3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Double contraction `A : B = Σ A_ij B_ij`.
    pub fn ddot(&self, other: &Tensor3) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += self.0[i][j] * other.0[i][j];
            }
        }
        s
    }

    /// Largest absolute entry.
    pub fn norm_inf(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut m = self.0;
        m.iter_mut().flatten().for_each(|v| *v *= s);
        Tensor3(m)
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    /// `AᵀA`, symmetric by construction.
    pub fn gram(&self) -> SymTensor3 {
        let m = &self.0;
        let mut out = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in a..3 {
                let v = m[0][a] * m[0][b] + m[1][a] * m[1][b] + m[2][a] * m[2][b];
                out[a][b] = v;
                out[b][a] = v;
            }
        }
        SymTensor3(out)
    }

    pub fn max_abs_diff(&self, other: &Tensor3) -> f64 {
        (*self - *other).norm_inf()
    }
}

impl Add for Tensor3 {
    type Output = Tensor3;
    fn add(self, rhs: Tensor3) -> Tensor3 {
        let mut m = self.0;
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += rhs.0[i][j];
            }
        }
        Tensor3(m)
    }
}

impl Sub for Tensor3 {
    type Output = Tensor3;
    fn sub(self, rhs: Tensor3) -> Tensor3 {
        let mut m = self.0;
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] -= rhs.0[i][j];
            }
        }
        Tensor3(m)
    }
}

impl Neg for Tensor3 {
    type Output = Tensor3;
    fn neg(self) -> Tensor3 {
        self.scale(-1.0)
    }
}

impl Mul for Tensor3 {
    type Output = Tensor3;
    fn mul(self, rhs: Tensor3) -> Tensor3 {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        Tensor3(m)
    }
}

impl SymTensor3 {
    pub const ZERO: SymTensor3 = SymTensor3([[0.0; 3]; 3]);

    pub fn identity() -> Self {
        Self::from_diag([1.0, 1.0, 1.0])
    }

    pub fn from_diag(d: Vec3) -> Self {
        SymTensor3(Tensor3::from_diag(d).0)
    }

    /// Symmetric part `½(A + Aᵀ)`.
    pub fn symmetrize(a: &Tensor3) -> Self {
        let m = &a.0;
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            out[i][i] = m[i][i];
            for j in (i + 1)..3 {
                let v = 0.5 * (m[i][j] + m[j][i]);
                out[i][j] = v;
                out[j][i] = v;
            }
        }
        SymTensor3(out)
    }

    /// Accepts a matrix only if it is exactly symmetric.
    pub fn try_from_matrix(m: [[f64; 3]; 3]) -> Result<Self> {
        for i in 0..3 {
            for j in (i + 1)..3 {
                if m[i][j] != m[j][i] {
                    return Err(Error::InvalidParameter(format!(
                        "matrix is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(SymTensor3(m))
    }

    /// `Q·diag(d)·Qᵀ` with the result symmetrized exactly.
    pub fn from_spectral(q: &Tensor3, d: Vec3) -> Self {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                let v: f64 = (0..3).map(|k| q.0[i][k] * d[k] * q.0[j][k]).sum();
                out[i][j] = v;
                out[j][i] = v;
            }
        }
        SymTensor3(out)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn entries(&self) -> &[[f64; 3]; 3] {
        &self.0
    }

    pub fn as_tensor(&self) -> Tensor3 {
        Tensor3(self.0)
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn ddot(&self, other: &SymTensor3) -> f64 {
        self.as_tensor().ddot(&other.as_tensor())
    }

    pub fn norm_inf(&self) -> f64 {
        self.as_tensor().norm_inf()
    }

    pub fn scale(&self, s: f64) -> Self {
        SymTensor3(self.as_tensor().scale(s).0)
    }

    /// Linear combination `a·self + b·I`.
    pub fn plus_identity(&self, a: f64, b: f64) -> Self {
        let mut m = self.as_tensor().scale(a).0;
        for i in 0..3 {
            m[i][i] += b;
        }
        SymTensor3(m)
    }

    pub fn add(&self, other: &SymTensor3) -> Self {
        SymTensor3((self.as_tensor() + other.as_tensor()).0)
    }

    pub fn sub(&self, other: &SymTensor3) -> Self {
        SymTensor3((self.as_tensor() - other.as_tensor()).0)
    }
}

impl From<SymTensor3> for Tensor3 {
    fn from(s: SymTensor3) -> Tensor3 {
        s.as_tensor()
    }
}

impl<'de> Deserialize<'de> for SymTensor3 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = <[[f64; 3]; 3]>::deserialize(d)?;
        SymTensor3::try_from_matrix(m).map_err(serde::de::Error::custom)
    }
}

/// Cyclic Jacobi eigenvalue iteration for a symmetric `N×N` matrix.
///
/// Returns eigenvalues (unsorted, in diagonal order) and the matrix whose
/// columns are the corresponding orthonormal eigenvectors. Only the upper
/// triangle of `a` is read.
pub fn jacobi_eigen<const N: usize>(mut a: [[f64; N]; N]) -> ([f64; N], [[f64; N]; N]) {
    for i in 0..N {
        for j in (i + 1)..N {
            a[j][i] = a[i][j];
        }
    }
    let mut v = [[0.0; N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale = a.iter().flatten().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    if scale == 0.0 {
        return ([0.0; N], v);
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..N {
            for j in (i + 1)..N {
                off += a[i][j] * a[i][j];
            }
        }
        if off.sqrt() <= f64::EPSILON * 1e-3 * scale {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p][p];
                let aqq = a[q][q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..N {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut lambda = [0.0; N];
    for i in 0..N {
        lambda[i] = a[i][i];
    }
    (lambda, v)
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Eigenvalues are sorted descending; each eigenvector is oriented so that
/// its first non-negligible component is positive.
pub fn eig_sym3(a: &SymTensor3) -> EigenSystem3 {
    let (vals, vecs) = jacobi_eigen(a.0);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]).then(i.cmp(&j)));
    let mut q = [[0.0; 3]; 3];
    let mut lambda = [0.0; 3];
    for (col, &src) in order.iter().enumerate() {
        lambda[col] = vals[src];
        let mut v = [vecs[0][src], vecs[1][src], vecs[2][src]];
        if let Some(first) = v.iter().copied().find(|c| c.abs() > 1e-12) {
            if first < 0.0 {
                v.iter_mut().for_each(|c| *c = -*c);
            }
        }
        for row in 0..3 {
            q[row][col] = v[row];
        }
    }
    EigenSystem3 {
        q: Tensor3(q),
        lambda,
    }
}

/// Classifies the sign structure of `a` with tolerance `1e-12·max(1, ‖a‖∞)`.
pub fn definiteness(a: &SymTensor3) -> Definiteness {
    let tol = 1e-12 * a.norm_inf().max(1.0);
    classify_eigenvalues(&eig_sym3(a).lambda, tol)
}

pub(crate) fn classify_eigenvalues(lambda: &[f64], tol: f64) -> Definiteness {
    if lambda.iter().any(|l| l.abs() <= tol) {
        Definiteness::Singular
    } else if lambda.iter().all(|&l| l > tol) {
        Definiteness::PositiveDefinite
    } else if lambda.iter().all(|&l| l < -tol) {
        Definiteness::NegativeDefinite
    } else {
        Definiteness::Indefinite
    }
}

/// Inverse via the adjugate. Fails when `|det a| ≤ 1e-14·‖a‖∞³`.
pub fn invert3(a: &Tensor3) -> Result<Tensor3> {
    let det = a.det();
    let n = a.norm_inf();
    if !(det.abs() > 1e-14 * n * n * n) {
        return Err(Error::SingularTensor { det });
    }
    let m = &a.0;
    let adj = [
        [
            m[1][1] * m[2][2] - m[1][2] * m[2][1],
            m[0][2] * m[2][1] - m[0][1] * m[2][2],
            m[0][1] * m[1][2] - m[0][2] * m[1][1],
        ],
        [
            m[1][2] * m[2][0] - m[1][0] * m[2][2],
            m[0][0] * m[2][2] - m[0][2] * m[2][0],
            m[0][2] * m[1][0] - m[0][0] * m[1][2],
        ],
        [
            m[1][0] * m[2][1] - m[1][1] * m[2][0],
            m[0][1] * m[2][0] - m[0][0] * m[2][1],
            m[0][0] * m[1][1] - m[0][1] * m[1][0],
        ],
    ];
    Ok(Tensor3(adj).scale(1.0 / det))
}

/// Inverse of a symmetric tensor, symmetrized to remove rounding asymmetry.
pub fn invert_sym3(a: &SymTensor3) -> Result<SymTensor3> {
    invert3(&a.as_tensor()).map(|inv| SymTensor3::symmetrize(&inv))
}

/// `(trace, det)`.
pub fn invariants3(a: &Tensor3) -> (f64, f64) {
    (a.trace(), a.det())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sym_from(v: [f64; 6]) -> SymTensor3 {
        SymTensor3::try_from_matrix([[v[0], v[3], v[4]], [v[3], v[1], v[5]], [v[4], v[5], v[2]]])
            .unwrap()
    }

    fn orthogonality_error(q: &Tensor3) -> f64 {
        (q.transpose() * *q - Tensor3::identity()).norm_inf()
    }

    #[test]
    fn identity_eigensystem() {
        let es = eig_sym3(&SymTensor3::identity());
        assert_eq!(es.lambda, [1.0, 1.0, 1.0]);
        assert!(orthogonality_error(&es.q) <= 1e-12);
    }

    #[test]
    fn diagonal_is_already_diagonal() {
        let es = eig_sym3(&SymTensor3::from_diag([1.0, 3.0, 2.0]));
        assert_eq!(es.lambda, [3.0, 2.0, 1.0]);
        let expected = Tensor3([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        assert_eq!(es.q, expected);
    }

    #[test]
    fn repeated_eigenvalues_reconstruct() {
        let r = Tensor3::rotation([1.0, 2.0, -0.5], 0.7);
        let a = SymTensor3::from_spectral(&r, [2.0, 2.0, -1.0]);
        let es = eig_sym3(&a);
        let back = SymTensor3::from_spectral(&es.q, es.lambda);
        assert!(back.sub(&a).norm_inf() <= 1e-12);
        assert!((es.lambda[0] - 2.0).abs() < 1e-12 && (es.lambda[2] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn definiteness_examples() {
        assert_eq!(
            definiteness(&SymTensor3::identity()),
            Definiteness::PositiveDefinite
        );
        assert_eq!(
            definiteness(&SymTensor3::from_diag([1.0, -1.0, 2.0])),
            Definiteness::Indefinite
        );
        let mu = 3.5;
        assert_eq!(
            definiteness(&SymTensor3::from_diag([
                -mu / 3.0,
                -2.0 * mu / 3.0,
                -2.0 * mu / 3.0
            ])),
            Definiteness::NegativeDefinite
        );
        assert_eq!(
            definiteness(&SymTensor3::from_diag([1.0, 0.0, 2.0])),
            Definiteness::Singular
        );
    }

    #[test]
    fn invert_examples() {
        assert_eq!(invert3(&Tensor3::identity()).unwrap(), Tensor3::identity());
        let inv = invert3(&Tensor3::from_diag([2.0, 4.0, 5.0])).unwrap();
        assert!(inv.max_abs_diff(&Tensor3::from_diag([0.5, 0.25, 0.2])) < 1e-16);
        let singular = Tensor3([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 1.0, 1.0]]);
        assert!(matches!(
            invert3(&singular),
            Err(Error::SingularTensor { .. })
        ));
    }

    #[test]
    fn invariants_examples() {
        assert_eq!(invariants3(&Tensor3::identity()), (3.0, 1.0));
        assert_eq!(
            invariants3(&Tensor3::from_diag([1.0, 2.0, 3.0])),
            (6.0, 6.0)
        );
        let rz = Tensor3([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        assert_eq!(invariants3(&rz), (1.0, 1.0));
    }

    #[test]
    fn try_from_matrix_rejects_asymmetry() {
        assert!(
            SymTensor3::try_from_matrix([[1.0, 2.0, 0.0], [2.1, 1.0, 0.0], [0.0, 0.0, 1.0]])
                .is_err()
        );
    }

    #[test]
    fn jacobi_nine_by_nine() {
        let mut a = [[0.0; 9]; 9];
        for i in 0..9 {
            for j in 0..9 {
                a[i][j] = 1.0 / (1.0 + i as f64 + j as f64);
            }
            a[i][i] += i as f64;
        }
        let (vals, vecs) = jacobi_eigen(a);
        for c in 0..9 {
            for i in 0..9 {
                let av: f64 = (0..9).map(|k| a[i][k] * vecs[k][c]).sum();
                assert!((av - vals[c] * vecs[i][c]).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn eig_reconstructs(v in proptest::array::uniform6(-10.0f64..10.0)) {
            let a = sym_from(v);
            let es = eig_sym3(&a);
            prop_assert!(orthogonality_error(&es.q) <= 1e-12);
            let back = SymTensor3::from_spectral(&es.q, es.lambda);
            prop_assert!(back.sub(&a).norm_inf() <= 1e-10 * a.norm_inf().max(1.0));
            prop_assert!(es.lambda[0] >= es.lambda[1] && es.lambda[1] >= es.lambda[2]);
        }

        #[test]
        fn definiteness_matches_eigen_signs(v in proptest::array::uniform6(-5.0f64..5.0)) {
            let a = sym_from(v);
            let l = eig_sym3(&a).lambda;
            let expected = if l.iter().all(|&x| x > 1e-9) {
                Some(Definiteness::PositiveDefinite)
            } else if l.iter().all(|&x| x < -1e-9) {
                Some(Definiteness::NegativeDefinite)
            } else if l.iter().all(|x| x.abs() > 1e-9) {
                Some(Definiteness::Indefinite)
            } else {
                None
            };
            if let Some(e) = expected {
                prop_assert_eq!(definiteness(&a), e);
            }
        }

        #[test]
        fn double_inverse(v in proptest::array::uniform9(-1.0f64..1.0)) {
            let a = Tensor3([[v[0] + 3.0, v[1], v[2]], [v[3], v[4] - 3.0, v[5]], [v[6], v[7], v[8] + 2.5]]);
            let inv = invert3(&a).unwrap();
            prop_assert!((a * inv - Tensor3::identity()).norm_inf() <= 1e-10);
            let back = invert3(&inv).unwrap();
            prop_assert!(back.max_abs_diff(&a) <= 1e-9 * a.norm_inf());
        }
    }
}

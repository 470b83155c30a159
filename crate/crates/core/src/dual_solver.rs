//! Enumeration of every real solution of the coupled eigenvalue system
//!
//! ```text
//! ςᵢ³ + ςᵢ² − k(ς₁ + ς₂ + ς₃)ςᵢ² = σᵢ,   i = 1, 2, 3
//! ```
//!
//! obtained by diagonalising the dual tensor equation
//! `T(I + 2∇U*(T))T = τᵀτ` in the eigenbasis of `τᵀτ` with `Sᵢ = μςᵢ` and
//! `τᵢ² = μ²σᵢ`.
//!
//! Each solution is a zero in `q` of a branch-combination sum (see
//! [`crate::branches::combo_sum`]). The solver scans all 27 combinations
//! over a sample grid on the combination's `q` domain, brackets sign
//! changes, refines each bracket with safeguarded Newton, and assembles
//! the second Piola-Kirchhoff tensor in the shared eigenbasis.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::branches::{
    all_combos, branch_value, combo_domain_sup, combo_eval, combo_sum, domain_slack, BranchId,
    Combo,
};
use crate::error::{Error, Result};
use crate::material::{strain_of_stress, MaterialParams};
use crate::tensors::{eig_sym3, SymTensor3, Tensor3, Vec3};

/// Largest `σ` at `q = 0` for which the negative branches exist.
pub const CRITICAL_SIGMA: f64 = 4.0 / 27.0;

const SAMPLES_PER_GRID: usize = 512;
const REFINE_FACTOR: usize = 4;
const REFINE_DEPTH: usize = 4;
const Q_CAP: f64 = 1e6;

/// Eigen-decomposition of `τᵀτ` in scaled form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralLoad {
    /// Orthonormal eigenbasis of `τᵀτ` (columns).
    pub basis: Tensor3,
    /// Eigenvalues `τᵢ²` of `τᵀτ`, descending.
    pub tau_sq_eigs: Vec3,
    /// `σᵢ = τᵢ²/μ²`.
    pub sigmas: Vec3,
    /// The first Piola-Kirchhoff stress the load was built from.
    pub tau: Tensor3,
}

impl SpectralLoad {
    /// Load given directly in scaled form. The eigenbasis is the identity
    /// and `τ` is taken as `μ·diag(√σᵢ)`.
    pub fn from_sigmas(sigmas: Vec3, m: &MaterialParams) -> Result<Self> {
        if sigmas.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::DegenerateStress {
                min_eig: sigmas.iter().copied().fold(f64::INFINITY, f64::min),
            });
        }
        let mu = m.mu();
        Ok(SpectralLoad {
            basis: Tensor3::identity(),
            tau_sq_eigs: sigmas.map(|s| mu * mu * s),
            sigmas,
            tau: Tensor3::from_diag(sigmas.map(|s| mu * s.sqrt())),
        })
    }
}

/// Diagonalises `τᵀτ` and scales its eigenvalues by `μ²`.
pub fn spectral_decompose_load(tau: &Tensor3, m: &MaterialParams) -> Result<SpectralLoad> {
    if !tau.is_finite() {
        return Err(Error::InvalidParameter("tau has non-finite entries".into()));
    }
    let es = eig_sym3(&tau.gram());
    let norm = tau.norm_inf();
    let min_eig = es.lambda[2];
    if !(min_eig > 1e-14 * norm * norm) {
        return Err(Error::DegenerateStress { min_eig });
    }
    let mu2 = m.mu() * m.mu();
    Ok(SpectralLoad {
        basis: es.q,
        tau_sq_eigs: es.lambda,
        sigmas: es.lambda.map(|l| l / mu2),
        tau: *tau,
    })
}

/// Sign pattern of the stress eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Classification {
    Positive,
    Negative,
    Mixed,
}

impl Classification {
    pub fn of(varsigmas: &Vec3) -> Self {
        if varsigmas.iter().all(|&v| v > 0.0) {
            Classification::Positive
        } else if varsigmas.iter().all(|&v| v < 0.0) {
            Classification::Negative
        } else {
            Classification::Mixed
        }
    }
}

/// One critical point of the pure complementary energy.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub combo: Combo,
    pub q: f64,
    pub varsigmas: Vec3,
    /// Eigenvalues of `T`, `μςᵢ`.
    pub s_eigs: Vec3,
    pub t: SymTensor3,
    pub classification: Classification,
    /// `maxᵢ |ςᵢ³ + ςᵢ² − kqςᵢ² − σᵢ|` with `q = Σςᵢ`.
    pub residual: f64,
    /// `det F = det τ / det T` for `F = τ·T⁻¹`.
    pub det_f: f64,
    /// The combination is not among those whose existence is proven for
    /// sub-critical loads.
    pub beyond_theorem: bool,
}

impl DualSolution {
    /// `det F > 0`.
    pub fn orientation_admissible(&self) -> bool {
        self.det_f > 0.0
    }
}

/// Which hypotheses of the counting results hold for an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeFlags {
    /// Every `σᵢ` is positive (always true for an accepted load).
    pub nondegenerate: bool,
    /// Every `σᵢ < 4/27`: one positive, eight negative and at least fifteen
    /// mixed solutions are guaranteed.
    pub all_subcritical: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionCensus {
    pub n_positive: usize,
    pub n_negative: usize,
    pub n_mixed: usize,
    pub solutions: Vec<DualSolution>,
    pub regime: RegimeFlags,
    pub sigmas: Vec3,
    pub k: f64,
}

impl SolutionCensus {
    pub fn positive(&self) -> Option<&DualSolution> {
        self.solutions
            .iter()
            .find(|s| s.classification == Classification::Positive)
    }

    pub fn max_residual(&self) -> f64 {
        self.solutions.iter().fold(0.0, |a, s| a.max(s.residual))
    }

    pub fn min_residual(&self) -> f64 {
        self.solutions
            .iter()
            .map(|s| s.residual)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Whether a combination's solution is guaranteed for sub-critical loads.
pub fn is_proven_combo(combo: &Combo) -> bool {
    use BranchId::*;
    let ones = combo.iter().filter(|b| **b == One).count();
    match ones {
        0 | 3 => true,
        1 => !matches!(combo, [Two, Two, One]),
        _ => !matches!(combo, [One, Two, One] | [Two, One, One]),
    }
}

/// Residual of the scaled system at `ς`.
pub fn system_residual(varsigmas: &Vec3, sigmas: &Vec3, k: f64) -> f64 {
    let q: f64 = varsigmas.iter().sum();
    varsigmas
        .iter()
        .zip(sigmas)
        .map(|(&s, &sig)| (s * s * s + s * s - k * q * s * s - sig).abs())
        .fold(0.0, f64::max)
}

/// Sample points on `[lo, hi]`: a uniform grid merged with a grid that is
/// quadratic in distance from `hi`, which resolves the square-root behaviour
/// of the negative branches at their junction.
fn initial_grid(lo: f64, hi: f64) -> Vec<f64> {
    let n = SAMPLES_PER_GRID;
    let w = hi - lo;
    let mut pts = Vec::with_capacity(2 * n);
    for i in 0..n {
        let t = i as f64 / (n - 1) as f64;
        pts.push(lo + w * t);
        pts.push(hi - w * t * t);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn sign_change(a: f64, b: f64) -> bool {
    (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0)
}

/// Samples `f` on `pts` and refines around spots where `|f|` dips without a
/// sign change, since a pair of close zeros may hide between samples.
fn sample_adaptive(f: &dyn Fn(f64) -> Option<f64>, pts: Vec<f64>, depth: usize) -> Vec<(f64, f64)> {
    let mut samples: Vec<(f64, f64)> = pts
        .into_iter()
        .filter_map(|q| f(q).map(|v| (q, v)))
        .collect();
    if depth == 0 || samples.len() < 3 {
        return samples;
    }
    let mut extra = Vec::new();
    for i in 1..samples.len() - 1 {
        let (a, b, c) = (samples[i - 1].1, samples[i].1, samples[i + 1].1);
        let dip = b.abs() < a.abs() && b.abs() < c.abs();
        let changes = sign_change(a, b) || sign_change(b, c);
        let cluster = sign_change(a, b) && sign_change(b, c);
        if (dip && !changes) || cluster {
            let (lo, hi) = (samples[i - 1].0, samples[i + 1].0);
            let m = 2 * REFINE_FACTOR;
            let sub: Vec<f64> = (1..m)
                .map(|j| lo + (hi - lo) * j as f64 / m as f64)
                .filter(|&q| q != samples[i].0)
                .collect();
            extra.extend(sample_adaptive(f, sub, depth - 1));
        }
    }
    if !extra.is_empty() {
        samples.extend(extra);
        samples.sort_by(|x, y| x.0.total_cmp(&y.0));
        samples.dedup_by(|x, y| x.0 == y.0);
    }
    samples
}

/// Zero of `F` inside a sign-changing bracket, by Newton steps kept inside
/// the bracket (bisection fallback).
fn refine_root(combo: &Combo, sigmas: &Vec3, k: f64, mut a: f64, mut fa: f64, mut b: f64) -> f64 {
    let mut q = 0.5 * (a + b);
    for _ in 0..200 {
        let (_, fq, dq) = match combo_eval(combo, q, sigmas, k) {
            Ok(v) => v,
            Err(_) => return q,
        };
        if fq == 0.0 {
            return q;
        }
        if sign_change(fa, fq) {
            b = q;
        } else {
            a = q;
            fa = fq;
        }
        let newton = q - fq / dq;
        let next = if newton.is_finite() && newton > a.min(b) && newton < a.max(b) {
            newton
        } else {
            0.5 * (a + b)
        };
        let tol = 2.0 * f64::EPSILON * (1.0 + next.abs());
        if (next - q).abs() <= tol || (b - a).abs() <= tol {
            return next;
        }
        q = next;
    }
    q
}

/// All `q` at which the combination sum vanishes, for scaled loads `σ`.
pub fn combo_zeros(combo: &Combo, sigmas: &Vec3, k: f64) -> Vec<f64> {
    let f = |q: f64| combo_sum(combo, q, sigmas, k).ok();
    let sup = combo_domain_sup(combo, sigmas, k);
    let (lo, hi) = if sup.is_finite() {
        let hi = sup - 2.0 * domain_slack(sup);
        let anchor = sup.min(0.0);
        // Every combination sum tends to +∞ as q → −∞.
        let mut d = 10.0;
        while d < Q_CAP && f(anchor - d).is_some_and(|v| v <= 0.0) {
            d *= 2.0;
        }
        (anchor - d, hi)
    } else {
        // Only (1,1,1): positive at q → −∞, negative at q → +∞.
        let mut hi = 1.0;
        while hi < Q_CAP && f(hi).is_some_and(|v| v >= 0.0) {
            hi *= 2.0;
        }
        let mut lo = -1.0;
        while lo > -Q_CAP && f(lo).is_some_and(|v| v <= 0.0) {
            lo *= 2.0;
        }
        (lo, hi)
    };
    if !(lo < hi) {
        return Vec::new();
    }
    let samples = sample_adaptive(&f, initial_grid(lo, hi), REFINE_DEPTH);
    let mut zeros: Vec<f64> = Vec::new();
    for w in samples.windows(2) {
        let ((qa, fa), (qb, fb)) = (w[0], w[1]);
        let q = if fa == 0.0 {
            qa
        } else if sign_change(fa, fb) {
            refine_root(combo, sigmas, k, qa, fa, qb)
        } else {
            continue;
        };
        if !zeros
            .iter()
            .any(|&z| (z - q).abs() < 1e-8 * (1.0 + q.abs()))
        {
            zeros.push(q);
        }
    }
    zeros
}

/// Eigenvalue triple of the solution of `combo` at `q`.
fn varsigmas_at(combo: &Combo, q: f64, sigmas: &Vec3, k: f64) -> Result<Vec3> {
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = branch_value(combo[i], q, sigmas[i], k)?.varsigma;
    }
    Ok(out)
}

/// `T = Q·diag(μςᵢ)·Qᵀ`, checked against the dual tensor equation.
pub fn assemble_t(load: &SpectralLoad, varsigmas: &Vec3, m: &MaterialParams) -> Result<SymTensor3> {
    let t = SymTensor3::from_spectral(&load.basis, varsigmas.map(|v| m.mu() * v));
    let residual = dual_equation_residual(&t, &load.tau, m);
    let limit = 1e-8 * load.tau.gram().norm_inf();
    if residual > limit {
        return Err(Error::ResidualTooLarge { residual, limit });
    }
    Ok(t)
}

/// `‖T(I + 2∇U*(T))T − τᵀτ‖∞`.
pub fn dual_equation_residual(t: &SymTensor3, tau: &Tensor3, m: &MaterialParams) -> f64 {
    let middle = strain_of_stress(t, m).plus_identity(2.0, 1.0).as_tensor();
    let tt = t.as_tensor();
    (tt * middle * tt - tau.gram().as_tensor()).norm_inf()
}

/// Every solution belonging to one branch combination.
pub fn solve_combo(combo: &Combo, load: &SpectralLoad, m: &MaterialParams) -> Vec<DualSolution> {
    let k = m.k();
    let det_tau = load.tau.det();
    combo_zeros(combo, &load.sigmas, k)
        .into_iter()
        .filter_map(|q| {
            let varsigmas = varsigmas_at(combo, q, &load.sigmas, k).ok()?;
            let t = assemble_t(load, &varsigmas, m).ok()?;
            let s_eigs = varsigmas.map(|v| m.mu() * v);
            Some(DualSolution {
                combo: *combo,
                q,
                varsigmas,
                s_eigs,
                t,
                classification: Classification::of(&varsigmas),
                residual: system_residual(&varsigmas, &load.sigmas, k),
                det_f: det_tau / (s_eigs[0] * s_eigs[1] * s_eigs[2]),
                beyond_theorem: !is_proven_combo(combo),
            })
        })
        .collect()
}

fn compare_solutions(a: &DualSolution, b: &DualSolution) -> Ordering {
    a.classification
        .cmp(&b.classification)
        .then(a.q.total_cmp(&b.q))
        .then(a.combo.cmp(&b.combo))
}

/// Census over all 27 branch combinations for a prepared load.
pub fn solve_load(load: &SpectralLoad, m: &MaterialParams) -> SolutionCensus {
    let mut solutions: Vec<DualSolution> = all_combos()
        .par_iter()
        .flat_map_iter(|c| solve_combo(c, load, m))
        .collect();
    solutions.sort_by(compare_solutions);
    let count = |c: Classification| solutions.iter().filter(|s| s.classification == c).count();
    SolutionCensus {
        n_positive: count(Classification::Positive),
        n_negative: count(Classification::Negative),
        n_mixed: count(Classification::Mixed),
        regime: RegimeFlags {
            nondegenerate: load.sigmas.iter().all(|&s| s > 0.0),
            all_subcritical: load.sigmas.iter().all(|&s| s < CRITICAL_SIGMA),
        },
        sigmas: load.sigmas,
        k: m.k(),
        solutions,
    }
}

/// Census for a first Piola-Kirchhoff stress `τ`.
pub fn solve_all(tau: &Tensor3, m: &MaterialParams) -> Result<SolutionCensus> {
    let load = spectral_decompose_load(tau, m)?;
    Ok(solve_load(&load, m))
}

/// Census for a load given directly as scaled eigenvalues `σᵢ`.
pub fn solve_all_scaled(sigmas: Vec3, m: &MaterialParams) -> Result<SolutionCensus> {
    let load = SpectralLoad::from_sigmas(sigmas, m)?;
    Ok(solve_load(&load, m))
}

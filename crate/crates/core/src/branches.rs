//! The auxiliary cubic `G(ς, q, σ) = ς³ + (1 − kq)ς² − σ` and its three
//! real solution branches.
//!
//! For fixed `σ > 0` the real roots of `G(·, q, σ)` trace three curves in `q`:
//!
//! * branch 1: the unique positive root, defined for every `q`, increasing;
//! * branch 2: the negative root in `(−∛(2σ), 0)`, decreasing in `q`;
//! * branch 3: the negative root below `−∛(2σ)`, increasing in `q`.
//!
//! Branches 2 and 3 exist for `q ≤ (1/k)(1 − 3∛(σ/4))` and merge into a
//! double root at that bound. A solution of the coupled system picks one
//! branch per eigenvalue and a shared `q` with `ς₁ + ς₂ + ς₃ = q`, which is a
//! zero of [`combo_sum`].

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Label of a solution branch of the auxiliary cubic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum BranchId {
    One,
    Two,
    Three,
}

impl BranchId {
    pub const ALL: [BranchId; 3] = [BranchId::One, BranchId::Two, BranchId::Three];

    pub fn value(self) -> u8 {
        match self {
            BranchId::One => 1,
            BranchId::Two => 2,
            BranchId::Three => 3,
        }
    }

    pub fn is_negative(self) -> bool {
        self != BranchId::One
    }
}

impl TryFrom<u8> for BranchId {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(BranchId::One),
            2 => Ok(BranchId::Two),
            3 => Ok(BranchId::Three),
            _ => Err(format!("branch id must be 1, 2 or 3, got {v}")),
        }
    }
}

impl From<BranchId> for u8 {
    fn from(b: BranchId) -> u8 {
        b.value()
    }
}

impl fmt::Display for BranchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Branch triple, one entry per principal direction.
pub type Combo = [BranchId; 3];

/// All 27 branch combinations in lexicographic order.
pub fn all_combos() -> Vec<Combo> {
    let mut out = Vec::with_capacity(27);
    for a in BranchId::ALL {
        for b in BranchId::ALL {
            for c in BranchId::ALL {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// A root of the auxiliary cubic together with its branch and parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPoint {
    pub branch: BranchId,
    pub q: f64,
    pub sigma: f64,
    pub varsigma: f64,
}

/// One real root reported by [`cubic_real_roots`]. A double root at the
/// junction of branches 2 and 3 is reported once, as branch 2 with
/// multiplicity 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicRoot {
    pub value: f64,
    pub branch: BranchId,
    pub multiplicity: u8,
}

/// `G(ς, q, σ)`.
#[inline]
pub fn auxiliary_cubic(varsigma: f64, q: f64, sigma: f64, k: f64) -> f64 {
    varsigma * varsigma * (varsigma + 1.0 - k * q) - sigma
}

fn check_params(sigma: f64, k: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    if !(k > 0.0 && k < 1.0 / 3.0) {
        return Err(Error::InvalidParameter(format!(
            "k must lie in (0, 1/3), got {k}"
        )));
    }
    Ok(())
}

/// Safeguarded Newton iteration for `ς² (ς + b) = σ` on a bracket where the
/// cubic is monotone. `lo`/`hi` need not have exact signs at their ends;
/// the iterate is kept inside them.
fn polish(mut x: f64, mut lo: f64, mut hi: f64, b: f64, sigma: f64) -> f64 {
    let g = |s: f64| s * s * (s + b) - sigma;
    let increasing = {
        let mid = 0.5 * (lo + hi);
        3.0 * mid * mid + 2.0 * b * mid >= 0.0
    };
    for _ in 0..100 {
        let gx = g(x);
        if gx == 0.0 {
            return x;
        }
        if (gx > 0.0) == increasing {
            hi = hi.min(x);
        } else {
            lo = lo.max(x);
        }
        let d = 3.0 * x * x + 2.0 * b * x;
        let mut next = x - gx / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs() {
            // One more step rarely moves; pick whichever has the smaller residual.
            return if g(next).abs() < gx.abs() { next } else { x };
        }
        x = next;
    }
    x
}

/// All real roots of `G(·, q, σ)`, each labelled with its branch.
///
/// The roots are located with the trigonometric (three real roots) or
/// hyperbolic (one real root) form of the depressed cubic, then polished
/// by safeguarded Newton on the interval where that root is isolated.
pub fn cubic_real_roots(q: f64, sigma: f64, k: f64) -> Result<Vec<CubicRoot>> {
    check_params(sigma, k)?;
    if !q.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "q must be finite, got {q}"
        )));
    }
    let b = 1.0 - k * q;
    // ς = x − b/3 turns ς³ + bς² − σ into x³ + px + r.
    let p = -b * b / 3.0;
    let r = 2.0 * b * b * b / 27.0 - sigma;
    // Height of the local maximum of G at ς₀ = −2b/3.
    let bump = 4.0 * b * b * b / 27.0 - sigma;
    let cauchy = 1.0 + b.abs().max(sigma);

    let positive_guess;
    let mut negatives = None;
    if b > 0.0 && bump >= -4.0 * f64::EPSILON * sigma {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * r / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let shift = b / 3.0;
        let roots = [
            m * theta.cos() - shift,
            m * (theta - 2.0 * PI / 3.0).cos() - shift,
            m * (theta - 4.0 * PI / 3.0).cos() - shift,
        ];
        let mut sorted = roots;
        sorted.sort_by(f64::total_cmp);
        positive_guess = sorted[2];
        negatives = Some((sorted[1], sorted[0]));
    } else {
        // Single real root (the positive one).
        positive_guess = if p == 0.0 {
            (-r).cbrt() - b / 3.0
        } else if p < 0.0 {
            // |3r/(pm)| > 1 here: cosh form.
            let m = 2.0 * (-p / 3.0).sqrt();
            let arg = (-3.0 * r / (p * m)).abs();
            let x = m * (arg.acosh() / 3.0).cosh();
            x * (-r).signum() - b / 3.0
        } else {
            let m = 2.0 * (p / 3.0).sqrt();
            let arg = 3.0 * r / (p * m);
            -m * (arg.asinh() / 3.0).sinh() - b / 3.0
        };
    }

    let stationary = -2.0 * b / 3.0;
    let pos_lo = if b < 0.0 { stationary.max(0.0) } else { 0.0 };
    let pos = polish(
        positive_guess.clamp(pos_lo, cauchy),
        pos_lo,
        cauchy,
        b,
        sigma,
    );
    let mut out = vec![CubicRoot {
        value: pos,
        branch: BranchId::One,
        multiplicity: 1,
    }];
    if let Some((upper, lower)) = negatives {
        if bump.abs() <= 4.0 * f64::EPSILON * sigma {
            out.push(CubicRoot {
                value: stationary,
                branch: BranchId::Two,
                multiplicity: 2,
            });
        } else {
            let two = polish(upper.clamp(stationary, 0.0), stationary, 0.0, b, sigma);
            let three = polish(
                lower.clamp(-cauchy, stationary),
                -cauchy,
                stationary,
                b,
                sigma,
            );
            out.push(CubicRoot {
                value: two,
                branch: BranchId::Two,
                multiplicity: 1,
            });
            out.push(CubicRoot {
                value: three,
                branch: BranchId::Three,
                multiplicity: 1,
            });
        }
    }
    Ok(out)
}

/// Upper end of the domain of the negative branches, `(1/k)(1 − 3∛(σ/4))`.
pub fn branch_domain_sup(sigma: f64, k: f64) -> f64 {
    (1.0 - 3.0 * (sigma / 4.0).cbrt()) / k
}

/// Slack kept between a negative-branch evaluation and the domain bound.
pub(crate) fn domain_slack(sup: f64) -> f64 {
    1e-12 * sup.abs().max(1.0)
}

/// Value of branch `b` at `(q, σ)`.
pub fn branch_value(b: BranchId, q: f64, sigma: f64, k: f64) -> Result<BranchPoint> {
    check_params(sigma, k)?;
    if b.is_negative() {
        let sup = branch_domain_sup(sigma, k);
        if !(q < sup - domain_slack(sup)) {
            return Err(Error::OutOfDomain { q, sup });
        }
    }
    let roots = cubic_real_roots(q, sigma, k)?;
    let hit = roots
        .iter()
        .find(|r| r.branch == b)
        .ok_or(Error::OutOfDomain {
            q,
            sup: branch_domain_sup(sigma, k),
        })?;
    Ok(BranchPoint {
        branch: b,
        q,
        sigma,
        varsigma: hit.value,
    })
}

/// `dς/dq = kς³ / (ς³ + 2σ)` along a branch.
pub fn branch_derivative(p: &BranchPoint, k: f64) -> Result<f64> {
    let s3 = p.varsigma.powi(3);
    let den = s3 + 2.0 * p.sigma;
    if den.abs() < 1e-12 {
        return Err(Error::AtBranchJunction);
    }
    Ok(k * s3 / den)
}

/// Shifted branch `ς̄ = ς − q/3`.
pub fn shifted_branch(b: BranchId, q: f64, sigma: f64, k: f64) -> Result<f64> {
    Ok(branch_value(b, q, sigma, k)?.varsigma - q / 3.0)
}

/// Shifted branch written purely in terms of the root:
/// `ς̄ = −((1 − 3k)ς³ + ς² − σ) / (3kς²)`.
pub fn shifted_branch_closed_form(p: &BranchPoint, k: f64) -> f64 {
    let s = p.varsigma;
    -((1.0 - 3.0 * k) * s * s * s + s * s - p.sigma) / (3.0 * k * s * s)
}

/// Supremum of the joint domain of a branch combination: the smallest
/// negative-branch bound, or `+∞` for `(1, 1, 1)`.
pub fn combo_domain_sup(combo: &Combo, sigmas: &[f64; 3], k: f64) -> f64 {
    combo
        .iter()
        .zip(sigmas)
        .filter(|(b, _)| b.is_negative())
        .map(|(_, &s)| branch_domain_sup(s, k))
        .fold(f64::INFINITY, f64::min)
}

/// `F^{a,b,c}(q) = ς̄ᵃ(q,σ₁) + ς̄ᵇ(q,σ₂) + ς̄ᶜ(q,σ₃)`.
pub fn combo_sum(combo: &Combo, q: f64, sigmas: &[f64; 3], k: f64) -> Result<f64> {
    let mut total = 0.0;
    for (b, &s) in combo.iter().zip(sigmas) {
        total += shifted_branch(*b, q, s, k)?;
    }
    Ok(total)
}

/// Branch values and `dF/dq` of a combination at `q`.
pub(crate) fn combo_eval(
    combo: &Combo,
    q: f64,
    sigmas: &[f64; 3],
    k: f64,
) -> Result<([f64; 3], f64, f64)> {
    let mut vals = [0.0; 3];
    let mut sum = 0.0;
    let mut deriv = 0.0;
    for i in 0..3 {
        let p = branch_value(combo[i], q, sigmas[i], k)?;
        vals[i] = p.varsigma;
        sum += p.varsigma - q / 3.0;
        deriv += branch_derivative(&p, k).unwrap_or(f64::INFINITY) - 1.0 / 3.0;
    }
    Ok((vals, sum, deriv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent root oracle: plain bisection on a sign-changing bracket.
    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        let flo = f(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) > 0.0) == (flo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn roots_at(q: f64, sigma: f64, k: f64) -> Vec<(f64, BranchId)> {
        cubic_real_roots(q, sigma, k)
            .unwrap()
            .into_iter()
            .map(|r| (r.value, r.branch))
            .collect()
    }

    #[test]
    fn critical_sigma_at_zero_q() {
        for k in [0.01, 0.2, 0.33] {
            let roots = cubic_real_roots(0.0, 4.0 / 27.0, k).unwrap();
            assert_eq!(roots.len(), 2);
            assert!((roots[0].value - 1.0 / 3.0).abs() < 1e-12);
            assert_eq!(roots[0].branch, BranchId::One);
            assert!((roots[1].value + 2.0 / 3.0).abs() < 1e-12);
            assert_eq!(roots[1].multiplicity, 2);
        }
    }

    #[test]
    fn sigma_point_one_matches_bisection() {
        let f = |s: f64| s * s * s + s * s - 0.1;
        let b1 = bisect(f, 0.0, 1.0);
        let b2 = bisect(f, -2.0 / 3.0, 0.0);
        let b3 = bisect(f, -2.0, -2.0 / 3.0);
        // Frozen from the bisection oracle above.
        assert!((b1 - 0.279_556_89).abs() < 1e-8);
        assert!((b2 + 0.412_605_57).abs() < 1e-8);
        assert!((b3 + 0.866_951_32).abs() < 1e-8);
        let roots = roots_at(0.0, 0.1, 0.2);
        assert_eq!(roots.len(), 3);
        assert!((roots[0].0 - b1).abs() < 1e-14);
        assert!((roots[1].0 - b2).abs() < 1e-14);
        assert!((roots[2].0 - b3).abs() < 1e-14);
        let sum: f64 = roots.iter().map(|r| r.0).sum();
        assert!((sum + 1.0).abs() < 1e-12);
    }

    #[test]
    fn above_critical_sigma_single_root() {
        let roots = roots_at(0.0, 0.2, 0.2);
        assert_eq!(roots.len(), 1);
        assert!(roots[0].0 > 0.0);
        assert!(cubic_real_roots(0.0, -0.1, 0.2).is_err());
        assert!(cubic_real_roots(0.0, 0.1, 0.4).is_err());
    }

    #[test]
    fn domain_sup_examples() {
        for k in [0.05, 0.2, 0.3] {
            assert!(branch_domain_sup(4.0 / 27.0, k).abs() < 1e-14);
        }
        let s = branch_domain_sup(0.1, 0.2);
        assert!((s - 0.614).abs() < 1e-3);
        assert_eq!(roots_at(s - 1e-6, 0.1, 0.2).len(), 3);
        assert_eq!(roots_at(s + 1e-6, 0.1, 0.2).len(), 1);
        // (σ/4)^(1/3) = 1/2 here, so the bound is 4·(1 − 3/2) = −2.
        let s = branch_domain_sup(0.5, 0.25);
        assert!((s + 2.0).abs() < 1e-14);
        assert_eq!(roots_at(s - 1e-6, 0.5, 0.25).len(), 3);
        assert_eq!(roots_at(s + 1e-6, 0.5, 0.25).len(), 1);
    }

    #[test]
    fn branch_value_examples() {
        let p = branch_value(BranchId::One, 0.0, 4.0 / 27.0, 0.25).unwrap();
        assert!((p.varsigma - 1.0 / 3.0).abs() < 1e-14);
        let sup = branch_domain_sup(0.1, 0.2);
        assert!(matches!(
            branch_value(BranchId::Two, sup, 0.1, 0.2),
            Err(Error::OutOfDomain { .. })
        ));
        let junction = -(0.2f64).cbrt();
        let near2 = branch_value(BranchId::Two, sup - 1e-9, 0.1, 0.2)
            .unwrap()
            .varsigma;
        let near3 = branch_value(BranchId::Three, sup - 1e-9, 0.1, 0.2)
            .unwrap()
            .varsigma;
        assert!(near2 > junction && near3 < junction);
        assert!((near2 - junction).abs() < 1e-3 && (near3 - junction).abs() < 1e-3);
        let mut prev = 0.0;
        for i in 0..200 {
            let q = -50.0 + i as f64;
            let v = branch_value(BranchId::One, q, 0.3, 0.2).unwrap().varsigma;
            assert!(v > prev);
            prev = v;
        }
        assert!(prev > 25.0);
    }

    #[test]
    fn derivative_examples() {
        let p = branch_value(BranchId::One, 0.0, 4.0 / 27.0, 0.25).unwrap();
        let d = branch_derivative(&p, 0.25).unwrap();
        assert!((d - 0.25 / 9.0).abs() < 1e-14);
        let p2 = branch_value(BranchId::Two, -1.0, 0.1, 0.2).unwrap();
        assert!(branch_derivative(&p2, 0.2).unwrap() < 0.0);
        let junction = BranchPoint {
            branch: BranchId::Two,
            q: 0.0,
            sigma: 0.1,
            varsigma: -(0.2f64).cbrt(),
        };
        assert_eq!(
            branch_derivative(&junction, 0.2),
            Err(Error::AtBranchJunction)
        );
    }

    #[test]
    fn shifted_examples() {
        for b in BranchId::ALL {
            let v = branch_value(b, 0.0, 0.1, 0.2).unwrap().varsigma;
            assert_eq!(shifted_branch(b, 0.0, 0.1, 0.2).unwrap(), v);
        }
        assert!(
            (shifted_branch(BranchId::One, 0.0, 4.0 / 27.0, 0.1).unwrap() - 1.0 / 3.0).abs()
                < 1e-14
        );
    }

    #[test]
    fn combo_sum_signs_at_zero() {
        let sig = [0.05, 0.1, 0.13];
        let k = 0.2;
        assert!(combo_sum(&[BranchId::One; 3], 0.0, &sig, k).unwrap() > 0.0);
        for c in all_combos() {
            if c.iter().all(|b| b.is_negative()) {
                assert!(combo_sum(&c, 0.0, &sig, k).unwrap() < 0.0);
            }
        }
        let mut prev = f64::INFINITY;
        for i in 0..100 {
            let q = -20.0 + 0.5 * i as f64;
            let f = combo_sum(&[BranchId::One; 3], q, &sig, k).unwrap();
            assert!(f < prev);
            prev = f;
        }
    }

    #[test]
    fn branch_ordering_at_zero_q() {
        // 0 < σ₁ < σ₂ ≤ 4/27, sampled on a deterministic grid of 100 pairs.
        let k = 0.2;
        let crit = 4.0 / 27.0;
        for i in 0..10 {
            for j in 0..10 {
                let s2 = crit * (j as f64 + 1.0) / 10.0;
                let s1 = s2 * (i as f64 + 0.5) / 10.5;
                let r1 = roots_at(0.0, s1, k);
                let r2 = roots_at(0.0, s2, k);
                let (a1, a2) = (r1[0].0, r2[0].0);
                assert!(0.0 < a1 && a1 < a2 && a2 <= 1.0 / 3.0 + 1e-15);
                let (t1, t2) = (r1[2].0, r1[1].0);
                let (u3, u2) = if r2.len() == 3 {
                    (r2[2].0, r2[1].0)
                } else {
                    (r2[1].0, r2[1].0)
                };
                assert!(-1.0 < t1 && t1 < u3 && u3 <= -2.0 / 3.0 + 1e-12);
                assert!(-2.0 / 3.0 - 1e-12 <= u2 && u2 < t2 && t2 < 0.0);
                assert!(r1[0].0 + r1[1].0 < 0.0);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn roots_solve_cubic_and_respect_ranges(q in -50.0f64..10.0, sigma in 1e-3f64..5.0, k in 0.01f64..0.33) {
            let roots = cubic_real_roots(q, sigma, k).unwrap();
            prop_assert!(roots.len() == 1 || roots.len() == 3);
            let junction = -(2.0 * sigma).cbrt();
            for r in &roots {
                prop_assert!(auxiliary_cubic(r.value, q, sigma, k).abs() <= 1e-12 * sigma.max(1.0) * r.value.abs().max(1.0).powi(3));
                match r.branch {
                    BranchId::One => prop_assert!(r.value > 0.0),
                    BranchId::Two => prop_assert!(r.value > junction && r.value < 0.0),
                    BranchId::Three => prop_assert!(r.value < junction),
                }
            }
            let sup = branch_domain_sup(sigma, k);
            if q < sup - 1e-9 * sup.abs().max(1.0) {
                prop_assert_eq!(roots.len(), 3);
                let sum: f64 = roots.iter().map(|r| r.value).sum();
                let prod: f64 = roots.iter().map(|r| r.value).product();
                let scale = roots.iter().fold(1.0_f64, |a, r| a.max(r.value.abs()));
                prop_assert!((sum + 1.0 - k * q).abs() <= 1e-10 * scale);
                prop_assert!((prod - sigma).abs() <= 1e-10 * scale.powi(3));
            } else if q > sup + 1e-9 * sup.abs().max(1.0) {
                prop_assert_eq!(roots.len(), 1);
            }
        }

        #[test]
        fn closed_form_shift_agrees(q in -30.0f64..0.5, sigma in 1e-3f64..0.5, k in 0.02f64..0.32, b in 0usize..3) {
            let id = BranchId::ALL[b];
            if let Ok(p) = branch_value(id, q, sigma, k) {
                let direct = p.varsigma - q / 3.0;
                let closed = shifted_branch_closed_form(&p, k);
                prop_assert!((direct - closed).abs() <= 1e-10 * direct.abs().max(1.0));
            }
        }
    }
}

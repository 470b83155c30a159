//! Brute-force cross-check for the branch solver: multi-start damped Newton
//! directly on the coupled cubic system, with no knowledge of branches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dual_solver::system_residual;
use crate::tensors::{invert3, Tensor3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    pub n_starts: usize,
    /// Half-width of the start box before scaling by `max(1, max σᵢ^⅓)`.
    /// Every other start is drawn from the box widened by `1/(1 − 3k)`,
    /// which is the size of the largest roots when `k` approaches 1/3.
    pub box_half_width: f64,
    pub newton_tol: f64,
    pub max_iters: usize,
    pub dedupe_tol: f64,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            n_starts: 20_000,
            box_half_width: 3.0,
            newton_tol: 1e-12,
            max_iters: 100,
            dedupe_tol: 1e-7,
            seed: 0x5eed,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.n_starts < 1000 {
            return Err(format!(
                "n_starts must be at least 1000, got {}",
                self.n_starts
            ));
        }
        if !(self.box_half_width > 0.0
            && self.newton_tol > 0.0
            && self.dedupe_tol > 0.0
            && self.max_iters > 0)
        {
            return Err("oracle tolerances must be positive".into());
        }
        Ok(())
    }
}

fn residual_vec(x: &Vec3, sigmas: &Vec3, k: f64) -> Vec3 {
    let q: f64 = x.iter().sum();
    let mut r = [0.0; 3];
    for i in 0..3 {
        let s = x[i];
        r[i] = s * s * s + s * s - k * q * s * s - sigmas[i];
    }
    r
}

fn jacobian(x: &Vec3, k: f64) -> Tensor3 {
    let q: f64 = x.iter().sum();
    let mut j = [[0.0; 3]; 3];
    for i in 0..3 {
        let s = x[i];
        for c in 0..3 {
            j[i][c] = -k * s * s;
        }
        j[i][i] += 3.0 * s * s + 2.0 * s - 2.0 * k * q * s;
    }
    Tensor3(j)
}

fn norm(r: &Vec3) -> f64 {
    r.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
}

/// Damped Newton from `x`; returns the converged point if the residual
/// drops below the tolerance.
fn newton(mut x: Vec3, sigmas: &Vec3, k: f64, cfg: &OracleConfig) -> Option<Vec3> {
    let mut r = residual_vec(&x, sigmas, k);
    let mut rn = norm(&r);
    for _ in 0..cfg.max_iters {
        if rn <= cfg.newton_tol {
            break;
        }
        let inv = invert3(&jacobian(&x, k)).ok()?;
        let d = inv.apply(r);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..=40 {
            let trial = [
                x[0] - alpha * d[0],
                x[1] - alpha * d[1],
                x[2] - alpha * d[2],
            ];
            let tr = residual_vec(&trial, sigmas, k);
            let tn = norm(&tr);
            if tn < rn {
                x = trial;
                r = tr;
                rn = tn;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    // Full-precision polish: a couple of undamped steps once converged.
    for _ in 0..2 {
        let Ok(inv) = invert3(&jacobian(&x, k)) else {
            break;
        };
        let d = inv.apply(r);
        let trial = [x[0] - d[0], x[1] - d[1], x[2] - d[2]];
        let tr = residual_vec(&trial, sigmas, k);
        if norm(&tr) <= rn {
            x = trial;
            r = tr;
            rn = norm(&r);
        }
    }
    (system_residual(&x, sigmas, k) <= 1e-10 && x.iter().all(|v| v.is_finite())).then_some(x)
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    out
}

/// Shifted Halton points in `[0, 1)³`; the shift is drawn from `seed`.
pub fn halton_points(n: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec3 = [rng.random(), rng.random(), rng.random()];
    (0..n as u64)
        .map(|i| {
            let h = [
                radical_inverse(i + 1, 2),
                radical_inverse(i + 1, 3),
                radical_inverse(i + 1, 5),
            ];
            [
                (h[0] + shift[0]).fract(),
                (h[1] + shift[1]).fract(),
                (h[2] + shift[2]).fract(),
            ]
        })
        .collect()
}

fn lex_cmp(a: &Vec3, b: &Vec3) -> std::cmp::Ordering {
    a[0].total_cmp(&b[0])
        .then(a[1].total_cmp(&b[1]))
        .then(a[2].total_cmp(&b[2]))
}

fn close(a: &Vec3, b: &Vec3, tol: f64) -> bool {
    let scale = 1.0 + norm(a).max(norm(b));
    (0..3).all(|i| (a[i] - b[i]).abs() < tol * scale)
}

/// Deduplicated solutions of the scaled system found from quasi-random starts.
pub fn oracle_solve_all(sigmas: &Vec3, k: f64, cfg: &OracleConfig) -> Vec<Vec3> {
    let smax = sigmas.iter().copied().fold(0.0_f64, f64::max);
    let half = cfg.box_half_width * smax.cbrt().max(1.0);
    let wide = half / (1.0 - 3.0 * k).max(1e-6);
    let starts = halton_points(cfg.n_starts, cfg.seed);
    let mut found: Vec<Vec3> = starts
        .par_iter()
        .enumerate()
        .filter_map(|(i, u)| {
            let h = if i % 2 == 0 { half } else { wide };
            let x0 = u.map(|t| h * (2.0 * t - 1.0));
            newton(x0, sigmas, k, cfg)
        })
        .collect();
    found.sort_by(lex_cmp);
    let mut unique: Vec<Vec3> = Vec::new();
    for x in found {
        if !unique.iter().any(|u| close(u, &x, cfg.dedupe_tol)) {
            unique.push(x);
        }
    }
    unique
}

/// Outcome of comparing two solution sets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SetComparison {
    Match,
    /// Items of `b` with no partner in `a`.
    MissingInA(Vec<Vec3>),
    /// Items of `a` with no partner in `b`.
    MissingInB(Vec<Vec3>),
    /// Both sides have unmatched items.
    Disjoint {
        missing_in_a: Vec<Vec3>,
        missing_in_b: Vec<Vec3>,
    },
}

impl SetComparison {
    pub fn is_match(&self) -> bool {
        matches!(self, SetComparison::Match)
    }
}

/// Order-insensitive comparison: greedy one-to-one nearest-neighbour
/// matching in the max norm with absolute tolerance `tol`.
pub fn set_compare(a: &[Vec3], b: &[Vec3], tol: f64) -> SetComparison {
    let dist = |x: &Vec3, y: &Vec3| (0..3).fold(0.0_f64, |m, i| m.max((x[i] - y[i]).abs()));
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            let d = dist(x, y);
            if d <= tol {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    for (_, i, j) in pairs {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
        }
    }
    let missing_in_a: Vec<Vec3> = b
        .iter()
        .zip(&used_b)
        .filter(|(_, u)| !**u)
        .map(|(x, _)| *x)
        .collect();
    let missing_in_b: Vec<Vec3> = a
        .iter()
        .zip(&used_a)
        .filter(|(_, u)| !**u)
        .map(|(x, _)| *x)
        .collect();
    match (missing_in_a.is_empty(), missing_in_b.is_empty()) {
        (true, true) => SetComparison::Match,
        (false, true) => SetComparison::MissingInA(missing_in_a),
        (true, false) => SetComparison::MissingInB(missing_in_b),
        (false, false) => SetComparison::Disjoint {
            missing_in_a,
            missing_in_b,
        },
    }
}

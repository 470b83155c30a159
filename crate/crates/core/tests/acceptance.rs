//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one `PASS`/`FAIL` line per criterion; exits non-zero if any fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use svk_dual::branches::{
    branch_derivative, branch_domain_sup, branch_value, cubic_real_roots, BranchId,
};
use svk_dual::dual_solver::{
    dual_equation_residual, solve_all, Classification, SolutionCensus, CRITICAL_SIGMA,
};
use svk_dual::energetics::{classify_triality, EnergyReport};
use svk_dual::field::{curl_residual, reconstruct_affine, sample_tensor_field, BoxDomain};
use svk_dual::material::{first_pk_stress_unchecked, MaterialParams};
use svk_dual::oracle::{oracle_solve_all, set_compare, OracleConfig};
use svk_dual::tensors::{Tensor3, Vec3};

struct Instance {
    k: f64,
    m: MaterialParams,
    sigmas: Vec3,
    tau: Tensor3,
}

struct Solved {
    inst: Instance,
    census: SolutionCensus,
    reports: Vec<EnergyReport>,
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Tensor3 {
    let axis = [(); 3].map(|_| rng.random_range(-1.0..1.0));
    Tensor3::rotation(axis, rng.random_range(-3.0..3.0))
}

/// Random sub-critical instances. The load is a general non-symmetric `τ`
/// with `τᵀτ` having eigenvalues `μ²σᵢ`, so spectral decomposition is
/// exercised as well.
fn instances(n: usize, seed: u64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let k = rng.random_range(0.05..0.32);
            let mu = rng.random_range(0.5..2.0);
            let sigmas = [(); 3].map(|_| rng.random_range(0.01..CRITICAL_SIGMA - 0.01));
            let m = MaterialParams::from_k(k, mu).unwrap();
            let r = random_rotation(&mut rng);
            let q = random_rotation(&mut rng);
            let tau = r * Tensor3::from_diag(sigmas.map(|s| mu * s.sqrt())) * q.transpose();
            Instance { k, m, sigmas, tau }
        })
        .collect()
}

fn report(n: u32, name: &str, ok: bool, detail: String) -> bool {
    println!(
        "criterion {n:>2} {} {name}: {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    ok
}

fn criterion_1(solved: &[Solved], elapsed: Duration) -> bool {
    let mut bad = Vec::new();
    let mut worst = 0.0_f64;
    for (i, s) in solved.iter().enumerate() {
        let c = &s.census;
        worst = worst.max(c.max_residual());
        let mut seeded = s.inst.sigmas;
        seeded.sort_by(|a, b| b.total_cmp(a));
        let sig_ok = (0..3).all(|j| (c.sigmas[j] - seeded[j]).abs() <= 1e-10 * seeded[j]);
        let ok = c.n_positive == 1
            && c.n_negative == 8
            && (15..=18).contains(&c.n_mixed)
            && c.max_residual() <= 1e-10
            && sig_ok;
        if !ok {
            bad.push(format!(
                "#{i} ({}, {}, {})",
                c.n_positive, c.n_negative, c.n_mixed
            ));
        }
    }
    let ok = bad.is_empty() && elapsed < Duration::from_secs(30);
    report(
        1,
        "solution census",
        ok,
        format!(
            "{} instances, {} bad {:?}, max residual {worst:.2e}, {:.2?}",
            solved.len(),
            bad.len(),
            bad,
            elapsed
        ),
    )
}

fn criterion_2() -> bool {
    let roots = cubic_real_roots(0.0, 4.0 / 27.0, 0.2).unwrap();
    let pos = roots.iter().find(|r| r.branch == BranchId::One);
    let neg: Vec<_> = roots.iter().filter(|r| r.branch.is_negative()).collect();
    let ok = pos.is_some_and(|r| (r.value - 1.0 / 3.0).abs() <= 1e-12)
        && neg.len() == 1
        && neg[0].multiplicity == 2
        && (neg[0].value + 2.0 / 3.0).abs() <= 1e-12;
    let vals: Vec<_> = roots.iter().map(|r| (r.value, r.multiplicity)).collect();
    report(2, "critical cubic roots", ok, format!("{vals:?}"))
}

fn criterion_3() -> bool {
    let k = 0.2;
    let count = |s: f64| {
        cubic_real_roots(0.0, s, k)
            .unwrap()
            .iter()
            .filter(|r| r.value < 0.0)
            .count()
    };
    let below = count(CRITICAL_SIGMA - 1e-6);
    let above = count(CRITICAL_SIGMA + 1e-6);
    report(
        3,
        "negative-root boundary at q = 0",
        below >= 1 && above == 0,
        format!("negative roots below: {below}, above: {above}"),
    )
}

fn criterion_4() -> bool {
    let start = Instant::now();
    let cfg = OracleConfig::default();
    let mut bad = 0;
    let insts = instances(20, 0xacce_0004);
    for inst in &insts {
        let census = solve_all(&inst.tau, &inst.m).unwrap();
        let ours: Vec<Vec3> = census.solutions.iter().map(|s| s.varsigmas).collect();
        let oracle = oracle_solve_all(&census.sigmas, inst.k, &cfg);
        if !set_compare(&ours, &oracle, 1e-7).is_match() {
            bad += 1;
        }
    }
    let elapsed = start.elapsed();
    report(
        4,
        "oracle equivalence",
        bad == 0 && elapsed < Duration::from_secs(120),
        format!("{} instances, {bad} mismatches, {elapsed:.2?}", insts.len()),
    )
}

fn criterion_5() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0005);
    let mut worst = 0.0_f64;
    let mut per_branch = [0usize; 3];
    let mut checked = 0;
    while checked < 500 {
        let b = [BranchId::One, BranchId::Two, BranchId::Three][checked % 3];
        let k = rng.random_range(0.05..0.32);
        let sigma = rng.random_range(0.01..0.5);
        let q = if b == BranchId::One {
            rng.random_range(-20.0..20.0)
        } else {
            // Keep away from the junction where the derivative blows up.
            branch_domain_sup(sigma, k) - rng.random_range(0.05..20.0)
        };
        let h = 1e-5 * q.abs().max(1.0);
        let (Ok(p), Ok(pp), Ok(pm)) = (
            branch_value(b, q, sigma, k),
            branch_value(b, q + h, sigma, k),
            branch_value(b, q - h, sigma, k),
        ) else {
            continue;
        };
        let exact = branch_derivative(&p, k).unwrap();
        let fd = (pp.varsigma - pm.varsigma) / (2.0 * h);
        worst = worst.max((exact - fd).abs() / exact.abs().max(1e-300));
        per_branch[b.value() as usize - 1] += 1;
        checked += 1;
    }
    report(
        5,
        "branch derivative law",
        worst <= 1e-6,
        format!("{checked} points {per_branch:?}, max relative error {worst:.2e}"),
    )
}

fn criterion_6(solved: &[Solved]) -> bool {
    let worst = solved
        .iter()
        .flat_map(|s| s.reports.iter())
        .map(|r| r.complementarity_residual / r.scale)
        .fold(0.0, f64::max);
    report(
        6,
        "complementarity identity",
        worst <= 1e-10,
        format!("max scaled gap {worst:.2e}"),
    )
}

fn criterion_7(solved: &[Solved]) -> bool {
    let mut bad = 0;
    let mut worst_hess = f64::INFINITY;
    let mut min_margin = f64::INFINITY;
    for s in solved {
        let p = s
            .census
            .solutions
            .iter()
            .position(|x| x.classification == Classification::Positive)
            .unwrap();
        let rp = &s.reports[p];
        let next = s
            .reports
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != p)
            .map(|(_, r)| r.potential_density)
            .fold(f64::INFINITY, f64::min);
        min_margin = min_margin.min(next - rp.potential_density);
        worst_hess = worst_hess.min(rp.hessian_min_eig / rp.scale);
        if !(next - rp.potential_density >= 1e-9 * rp.scale
            && rp.hessian_min_eig >= -1e-8 * rp.scale)
        {
            bad += 1;
        }
    }
    report(
        7,
        "global minimizer ordering",
        bad == 0,
        format!("{bad} violations, min potential margin {min_margin:.3e}, min scaled Hessian eig {worst_hess:.3e}"),
    )
}

fn criterion_8(solved: &[Solved]) -> bool {
    let mut worst_const = 0.0_f64;
    let mut worst_tensor = 0.0_f64;
    for s in solved {
        let tau_sq = (s.inst.tau.transpose() * s.inst.tau).norm_inf();
        for (sol, r) in s.census.solutions.iter().zip(&s.reports) {
            worst_const = worst_const.max(r.constitutive_residual);
            worst_tensor =
                worst_tensor.max(dual_equation_residual(&sol.t, &s.inst.tau, &s.inst.m) / tau_sq);
        }
    }
    report(
        8,
        "constitutive and tensor residuals",
        worst_const <= 1e-9 && worst_tensor <= 1e-8,
        format!("constitutive {worst_const:.2e}, tensor equation {worst_tensor:.2e}"),
    )
}

fn criterion_9(solved: &[Solved]) -> bool {
    let mut worst = 0.0_f64;
    let mut n = 0;
    for s in solved {
        for sol in &s.census.solutions {
            let map = reconstruct_affine(&s.inst.tau, sol, [0.0; 3], [0.0; 3]).unwrap();
            let f = map.gradient().unwrap();
            let p = first_pk_stress_unchecked(&f, &s.inst.m);
            worst = worst.max(p.max_abs_diff(&s.inst.tau) / s.inst.tau.norm_inf());
            n += 1;
        }
    }
    report(
        9,
        "stress round trip",
        worst <= 1e-8,
        format!("{n} solutions, max relative {worst:.2e}"),
    )
}

/// Gradient of `χ = (x + 0.1 sin(yz), y + 0.2x² + 0.1 cos z, z + 0.1 e^{xy})`.
fn manufactured_gradient(x: Vec3) -> Tensor3 {
    let e = (x[0] * x[1]).exp();
    let c = (x[1] * x[2]).cos();
    Tensor3([
        [1.0, 0.1 * x[2] * c, 0.1 * x[1] * c],
        [0.4 * x[0], 1.0, -0.1 * x[2].sin()],
        [0.1 * x[1] * e, 0.1 * x[0] * e, 1.0],
    ])
}

fn criterion_10(solved: &[Solved]) -> bool {
    let dom = BoxDomain::new([-0.5, 0.0, 0.25], [1.0, 1.0, 1.5], 6, vec![]).unwrap();
    let mut worst_affine = 0.0_f64;
    for s in solved.iter().take(10) {
        for sol in &s.census.solutions {
            let f = reconstruct_affine(&s.inst.tau, sol, [0.1, 0.2, 0.3], [1.0, 0.0, -1.0])
                .unwrap()
                .gradient()
                .unwrap();
            worst_affine = worst_affine.max(curl_residual(&sample_tensor_field(&dom, |_| f), &dom));
        }
    }
    let ns = [8usize, 16, 32];
    let errs: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let d = BoxDomain::unit_cube(n).unwrap();
            curl_residual(&sample_tensor_field(&d, manufactured_gradient), &d)
        })
        .collect();
    let rates: Vec<f64> = (0..2)
        .map(|i| {
            let h0 = 1.0 / (ns[i] - 1) as f64;
            let h1 = 1.0 / (ns[i + 1] - 1) as f64;
            (errs[i] / errs[i + 1]).ln() / (h0 / h1).ln()
        })
        .collect();
    let ok = worst_affine == 0.0 && rates.iter().all(|&r| r >= 1.9);
    report(
        10,
        "compatibility",
        ok,
        format!(
            "affine curl {worst_affine:e}, errors {:?}, observed orders {rates:.3?}",
            errs.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>()
        ),
    )
}

fn main() {
    let start = Instant::now();
    let solved: Vec<Solved> = instances(100, 0xacce_0001)
        .into_iter()
        .map(|inst| {
            let census = solve_all(&inst.tau, &inst.m).unwrap();
            let reports = census
                .solutions
                .iter()
                .map(|s| classify_triality(s, &inst.tau, &inst.m).unwrap())
                .collect();
            Solved {
                inst,
                census,
                reports,
            }
        })
        .collect();
    let census_time = start.elapsed();

    let results = [
        criterion_1(&solved, census_time),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(&solved),
        criterion_7(&solved),
        criterion_8(&solved),
        criterion_9(&solved),
        criterion_10(&solved),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!(
        "acceptance: {} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

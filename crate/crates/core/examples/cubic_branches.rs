//! Walk the three branches of the auxiliary cubic `ς³ + (1 − kq)ς² = σ`
//! across the trace variable `q`, printing roots, slopes and the point where
//! the two negative branches merge.
//!
//! ```text
//! cargo run --example cubic_branches -- [sigma] [k]
//! ```

use svk_dual::branches::{
    branch_derivative, branch_domain_sup, branch_value, cubic_real_roots, BranchId,
};

fn main() {
    let mut args = std::env::args().skip(1);
    let sigma: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(0.1);
    let k: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(0.25);
    let sup = branch_domain_sup(sigma, k);
    println!("sigma = {sigma}, k = {k}");
    println!("negative branches exist for q <= {sup:.10}\n");

    println!(
        "{:>10} {:>16} {:>16} {:>16}",
        "q", "branch 1", "branch 2", "branch 3"
    );
    let lo = sup.min(0.0) - 8.0;
    let hi = sup.max(0.0) + 4.0;
    for i in 0..=24 {
        let q = lo + (hi - lo) * i as f64 / 24.0;
        let cell = |b| match branch_value(b, q, sigma, k) {
            Ok(p) => format!("{:>16.10}", p.varsigma),
            Err(_) => format!("{:>16}", "-"),
        };
        println!(
            "{q:>10.4} {} {} {}",
            cell(BranchId::One),
            cell(BranchId::Two),
            cell(BranchId::Three)
        );
    }

    println!("\nslopes dς/dq = kς³/(ς³ + 2σ) at q = sup − 1:");
    for b in [BranchId::One, BranchId::Two, BranchId::Three] {
        let p = branch_value(b, sup - 1.0, sigma, k).expect("inside the domain");
        let d = branch_derivative(&p, k).expect("away from the junction");
        println!("  branch {b}: ς = {:.10}, slope = {d:.10}", p.varsigma);
    }

    println!("\nroots at the junction q = sup:");
    for r in cubic_real_roots(sup, sigma, k).expect("valid input") {
        println!(
            "  {:.12} (branch {}, multiplicity {})",
            r.value, r.branch, r.multiplicity
        );
    }
    println!(
        "  expected double root -cbrt(2 sigma) = {:.12}",
        -(2.0 * sigma).cbrt()
    );
}

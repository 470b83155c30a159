//! Energetics of every critical point: potential and dual densities agree,
//! the positive-definite stress gives the lowest potential and a positive
//! semi-definite Hessian, and the gap function certifies it.
//!
//! ```text
//! cargo run --example triality -- [k] [sigma1 sigma2 sigma3]
//! ```

use svk_dual::dual_solver::{solve_all_scaled, SpectralLoad};
use svk_dual::energetics::classify_triality;
use svk_dual::material::MaterialParams;

fn main() {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let k = args.first().copied().unwrap_or(0.25);
    let sigmas = if args.len() >= 4 {
        [args[1], args[2], args[3]]
    } else {
        [0.05, 0.09, 0.12]
    };
    let m = MaterialParams::from_k(k, 1.0).expect("k in (0, 1/3)");
    let census = solve_all_scaled(sigmas, &m).expect("positive sigmas");
    let load_tau = SpectralLoad::from_sigmas(sigmas, &m)
        .expect("positive sigmas")
        .tau;

    let mut rows: Vec<_> = census
        .solutions
        .iter()
        .map(|s| {
            (
                s,
                classify_triality(s, &load_tau, &m).expect("invertible T"),
            )
        })
        .collect();
    rows.sort_by(|a, b| a.1.potential_density.total_cmp(&b.1.potential_density));

    println!("k = {k}, sigma = {sigmas:?}; solutions ordered by potential density\n");
    println!(
        "{:>12} {:>12} {:>10} {:>12} {:>10} {:>28}",
        "potential", "dual", "|gap|", "gap fn", "H min eig", "triality"
    );
    for (_, r) in &rows {
        println!(
            "{:>12.6} {:>12.6} {:>10.1e} {:>12.6} {:>10.4} {:>28}",
            r.potential_density,
            r.dual_density,
            r.complementarity_residual,
            r.gap_density,
            r.hessian_min_eig,
            format!("{:?}", r.triality),
        );
    }
    let (best, report) = &rows[0];
    println!(
        "\nlowest potential: combo {:?}, classification {:?}, triality {:?}",
        best.combo, best.classification, report.triality
    );
}

//! Enumerate every critical point of the dual problem for one load and
//! print the census table.
//!
//! ```text
//! cargo run --example census -- [lambda] [mu]
//! ```

use svk_dual::cli::combo_label;
use svk_dual::dual_solver::solve_all;
use svk_dual::energetics::classify_triality;
use svk_dual::material::MaterialParams;
use svk_dual::tensors::Tensor3;

fn main() {
    let mut args = std::env::args().skip(1);
    let lambda: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(1.2);
    let mu: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(0.9);
    let m = MaterialParams::new(lambda, mu).expect("positive Lamé constants");
    let tau = Tensor3([[0.25, 0.02, 0.0], [-0.03, 0.18, 0.01], [0.0, 0.04, -0.12]]);

    let census = solve_all(&tau, &m).expect("non-degenerate load");
    println!("k = {:.6}, sigma = {:?}", census.k, census.sigmas);
    println!(
        "census: {} positive, {} negative, {} mixed (sub-critical: {})\n",
        census.n_positive, census.n_negative, census.n_mixed, census.regime.all_subcritical
    );
    println!(
        "{:>3} {:>9} {:>10} {:>36} {:>10} {:>20} {:>12} {:>9}",
        "#", "combo", "q", "varsigma", "class", "triality", "potential", "det F"
    );
    for (i, s) in census.solutions.iter().enumerate() {
        let r = classify_triality(s, &tau, &m).expect("invertible T");
        println!(
            "{i:>3} {:>9} {:>10.5} {:>36} {:>10} {:>20} {:>12.6} {:>9.4}",
            combo_label(&s.combo),
            s.q,
            format!(
                "[{:.5}, {:.5}, {:.5}]",
                s.varsigmas[0], s.varsigmas[1], s.varsigmas[2]
            ),
            format!("{:?}", s.classification),
            format!("{:?}", r.triality).replace("LocalExtremumCandidate", "Local"),
            r.potential_density,
            s.det_f,
        );
    }
    println!("\nmax residual {:.2e}", census.max_residual());
}

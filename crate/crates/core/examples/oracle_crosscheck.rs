//! Cross-check the branch solver against the multi-start Newton oracle on
//! seeded random loads inside the sub-critical regime.
//!
//! ```text
//! cargo run --release --example oracle_crosscheck -- [instances] [seed]
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use svk_dual::dual_solver::solve_all_scaled;
use svk_dual::material::MaterialParams;
use svk_dual::oracle::{oracle_solve_all, set_compare, OracleConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(5);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(7);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = OracleConfig::default();
    let mut failures = 0;
    for i in 0..n {
        let k = rng.random_range(0.05..0.32);
        let sigmas = [(); 3].map(|_| rng.random_range(0.01..4.0 / 27.0 - 0.01));
        let m = MaterialParams::from_k(k, 1.0).expect("k in range");
        let census = solve_all_scaled(sigmas, &m).expect("positive sigmas");
        let branch: Vec<_> = census.solutions.iter().map(|s| s.varsigmas).collect();
        let oracle = oracle_solve_all(&sigmas, k, &cfg);
        let cmp = set_compare(&branch, &oracle, 1e-7);
        if !cmp.is_match() {
            failures += 1;
        }
        println!(
            "#{i:<3} k={k:.4} sigma=[{:.4}, {:.4}, {:.4}]  census=({}, {}, {})  oracle={}  {}",
            sigmas[0],
            sigmas[1],
            sigmas[2],
            census.n_positive,
            census.n_negative,
            census.n_mixed,
            oracle.len(),
            if cmp.is_match() {
                "match".to_string()
            } else {
                format!("{cmp:?}")
            }
        );
    }
    println!("{} of {n} instances disagree", failures);
}

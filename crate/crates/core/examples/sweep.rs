//! Census counts over a grid of scaled loads, crossing the critical value
//! `σ = 4/27` where the negative branches stop existing at `q = 0`.
//!
//! ```text
//! cargo run --release --example sweep -- [k] [n] [a] [b]
//! ```

use std::collections::BTreeMap;

use svk_dual::cli::{sweep, SWEEP_HEADER};
use svk_dual::dual_solver::CRITICAL_SIGMA;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, d: f64| args.get(i).and_then(|a| a.parse().ok()).unwrap_or(d);
    let k = arg(0, 0.25);
    let n = arg(1, 6.0) as usize;
    let (a, b) = (arg(2, 0.02), arg(3, 0.3));
    let rows = sweep(k, 1.0, n, a, b).expect("valid sweep parameters");

    let mut sub: BTreeMap<(usize, usize, usize), usize> = BTreeMap::new();
    let mut sup: BTreeMap<(usize, usize, usize), usize> = BTreeMap::new();
    for r in &rows {
        let key = (r.n_pos, r.n_neg, r.n_mixed);
        let subcritical = [r.sigma1, r.sigma2, r.sigma3]
            .iter()
            .all(|&s| s < CRITICAL_SIGMA);
        *if subcritical { &mut sub } else { &mut sup }
            .entry(key)
            .or_default() += 1;
    }
    println!("k = {k}, {n}^3 grid on [{a}, {b}]");
    println!("sub-critical loads (positive, negative, mixed) -> count: {sub:?}");
    println!("other loads (positive, negative, mixed) -> count: {sup:?}");
    let worst = rows.iter().map(|r| r.max_residual).fold(0.0, f64::max);
    println!("max residual {worst:.2e}\n");
    println!("{SWEEP_HEADER}");
    for r in rows.iter().take(5) {
        println!("{}", r.csv());
    }
    println!("... ({} rows)", rows.len());
}

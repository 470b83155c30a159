//! Deformation reconstruction on a box.
//!
//! Part one takes a homogeneous stress, reconstructs the affine map of each
//! orientation-preserving solution, and compares the assembled potential and
//! dual functionals. Part two loads the box with an affine, self-equilibrated
//! stress, solves pointwise, and reports how far the positive-solution
//! gradient field is from being compatible.
//!
//! ```text
//! cargo run --release --example reconstruct_field -- [out_dir]
//! ```

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use svk_dual::dual_solver::solve_all;
use svk_dual::field::{
    admissibility_residual, curl_residual, dual_functional, make_affine_field,
    path_independence_gap, positive_gradient_field, potential_functional, reconstruct_affine,
    staircase_integrate, write_position_grid_csv, write_tensor_grid_csv, BoxDomain, Face,
};
use svk_dual::material::{first_pk_stress, MaterialParams};
use svk_dual::tensors::Tensor3;

fn main() {
    let out_dir = std::env::args().nth(1).map(PathBuf::from);
    let m = MaterialParams::new(1.2, 0.9).expect("valid material");
    let dom = BoxDomain::new([0.0; 3], [2.0, 1.0, 1.0], 9, vec![Face::XMinus]).expect("valid box");

    let tau = Tensor3([[0.25, 0.02, 0.0], [-0.03, 0.18, 0.01], [0.0, 0.04, 0.12]]);
    let census = solve_all(&tau, &m).expect("non-degenerate load");
    println!("homogeneous load, {} solutions\n", census.solutions.len());
    println!(
        "{:>3} {:>9} {:>9} {:>13} {:>13} {:>10}",
        "#", "class", "det F", "potential", "dual", "P(F) - tau"
    );
    for (i, s) in census.solutions.iter().enumerate() {
        if !s.orientation_admissible() {
            continue;
        }
        let map = reconstruct_affine(&tau, s, [0.0; 3], [0.0; 3]).expect("invertible T");
        let f = map.gradient().expect("affine");
        let pot = potential_functional(&dom, &map, &tau, &m).expect("affine map");
        let dual = dual_functional(&dom, &map, &tau, &s.t, &m).expect("affine map");
        let err = first_pk_stress(&f, &m)
            .expect("det F > 0")
            .max_abs_diff(&tau);
        println!(
            "{i:>3} {:>9} {:>9.4} {:>13.8} {:>13.8} {:>10.1e}",
            format!("{:?}", s.classification),
            f.det(),
            pot,
            dual,
            err
        );
    }

    let mut gradient = [[[0.0; 3]; 3]; 3];
    gradient[0][0][0] = 0.04;
    gradient[1][1][0] = -0.03;
    gradient[2][2][1] = 0.02;
    let field = make_affine_field(tau, gradient);
    println!("\naffine stress field, body force {:?}", field.body_force);
    println!(
        "equilibrium residual {:.2e}",
        admissibility_residual(&field, &dom)
    );
    let f_field = positive_gradient_field(&field, &dom, &m).expect("non-degenerate everywhere");
    println!(
        "curl of pointwise F = tau T^-1: {:.3e}",
        curl_residual(&f_field, &dom)
    );
    println!(
        "staircase path-independence gap: {:.3e}",
        path_independence_gap(&f_field, &dom)
    );

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(&dir).expect("create output directory");
        let chi = staircase_integrate(&f_field, &dom, [0.0; 3], [0, 1, 2]);
        let f_path = dir.join("gradient.csv");
        let chi_path = dir.join("positions.csv");
        write_tensor_grid_csv(
            &dom,
            &f_field,
            BufWriter::new(File::create(&f_path).expect("create")),
        )
        .expect("write gradient grid");
        write_position_grid_csv(
            &dom,
            &chi,
            BufWriter::new(File::create(&chi_path).expect("create")),
        )
        .expect("write position grid");
        println!("wrote {} and {}", f_path.display(), chi_path.display());
    }
}

//! The diagonal CAMOO game `max_w min_j (Aᵀw)_j` solved with the PU method,
//! with the certified duality gap after increasing iteration budgets.

use amoo::analysis::grid_game_value;
use amoo::linalg::Matrix;
use amoo::weighting::{solve_bilinear_pu, CamooConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = Matrix::from_rows(&[
        vec![1.8, 0.2, 1.0, 0.4, 2.5],
        vec![0.2, 1.8, 0.9, 2.2, 0.3],
    ])?;
    println!("grid value: {:.6}", grid_game_value(&a, 1e-5)?);
    for iters in [10, 100, 1_000, 10_000] {
        let cfg = CamooConfig { pu_iterations: iters, pu_tau: 0.0, ..CamooConfig::diagonal() };
        let sol = solve_bilinear_pu(&a, &cfg, None)?;
        println!("{iters:>6} iterations: value {:.6}, gap {:.2e}, w = {:.4?}", sol.value, sol.gap, sol.w);
    }
    Ok(())
}

//! CAMOO on the selection example: the weight optimizer finds the single
//! well-conditioned objective and puts all of its mass there.

use amoo::analysis::grid_max_lambda_min;
use amoo::driver::{run, InnerConfig, RunConfig};
use amoo::problems::{build, ProblemSpec};
use amoo::weighting::{lambda_min_weighted, CamooConfig, WeightingConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ProblemSpec::Selection { delta: 0.1, m: 3, n: 2 };
    let problem = build(&spec)?;
    let hs = problem.objectives.hessians(&problem.x0)?.ok_or("quadratics have Hessians")?;

    let (ew, _) = lambda_min_weighted(&hs, &[1.0 / 3.0; 3])?;
    let (grid, grid_w) = grid_max_lambda_min(&hs, 1e-3, 0.0)?;
    println!("lambda_min with equal weights: {ew:.4}");
    println!("grid optimum: {grid:.4} at w = {grid_w:.3?}");

    let cfg = RunConfig::new(spec, WeightingConfig::Camoo(CamooConfig::default()), InnerConfig::Gd { step: 0.05 }, 200);
    let trace = run(&cfg)?;
    let last = trace.last().ok_or("empty trace")?;
    println!(
        "CAMOO after {} steps: w = {:.4?}, lambda_min = {:.4}, residual = {:.3e}",
        last.step,
        last.w,
        last.lambda_min_est.unwrap_or(f64::NAN),
        last.residual.unwrap_or(f64::NAN)
    );
    Ok(())
}

//! With a single objective PAMOO is gradient descent with the Polyak step
//! `(f(x) − f⋆)/‖∇f(x)‖²`. On `f(x) = h·x²` that step halves `x` every
//! iteration, whatever `h` is.

use amoo::driver::{run, InnerConfig, RunConfig};
use amoo::problems::ProblemSpec;
use amoo::weighting::{PamooConfig, WeightingConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for h in [0.5, 3.0, 40.0] {
        let spec = ProblemSpec::QuadFamily { hessians: vec![vec![vec![h]]], alphas: vec![1.0] };
        let cfg = RunConfig::new(spec, WeightingConfig::Pamoo(PamooConfig::theory()), InnerConfig::Gd { step: 1.0 }, 6)
            .with_x0(vec![1.0])
            .recording_iterates();
        let xs: Vec<f64> = run(&cfg)?.records.iter().filter_map(|r| r.x.as_ref().map(|x| x[0])).collect();
        println!("h = {h:>4}: x = {xs:.4?}");
    }
    Ok(())
}

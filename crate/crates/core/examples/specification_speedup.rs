//! Equal weights against a single objective on the specification example.
//!
//! Each objective alone is ill conditioned along one axis; their average is
//! perfectly conditioned, so equal weighting converges in a few dozen steps
//! while gradient descent on `f₁` crawls along its flat direction.

use amoo::driver::{run, InnerConfig, RunConfig};
use amoo::problems::ProblemSpec;
use amoo::weighting::WeightingConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ProblemSpec::Specification { delta: 0.01 };
    let gd = InnerConfig::Gd { step: 0.25 };
    let ew = run(&RunConfig::new(spec.clone(), WeightingConfig::Equal, gd.clone(), 100))?;
    let f1 = run(&RunConfig::new(spec, WeightingConfig::Fixed { weights: vec![1.0, 0.0] }, gd, 100))?;
    println!("{:>5} {:>12} {:>12}", "step", "EW", "f1 only");
    for (a, b) in ew.records.iter().zip(&f1.records).step_by(10) {
        println!("{:>5} {:>12.3e} {:>12.3e}", a.step, a.residual.unwrap_or(f64::NAN), b.residual.unwrap_or(f64::NAN));
    }
    Ok(())
}

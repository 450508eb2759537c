//! The local-curvature example: `e^x − x` is curved for `x > 0`, `e^{−x} + x`
//! for `x < 0`. CAMOO moves its weight to whichever objective currently has
//! curvature, so the weights flip as the iterate crosses zero.

use amoo::driver::{run, InnerConfig, RunConfig};
use amoo::problems::ProblemSpec;
use amoo::weighting::{CamooConfig, WeightingConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = RunConfig::new(
        ProblemSpec::LocalCurvature { n: 1 },
        WeightingConfig::Camoo(CamooConfig::default()),
        InnerConfig::Gd { step: 0.25 },
        12,
    )
    .with_x0(vec![2.0])
    .recording_iterates();
    for r in &run(&cfg)?.records {
        let x = r.x.as_ref().map_or(f64::NAN, |x| x[0]);
        println!("step {:>2}: x = {x:>9.5}, w = {:.3?}", r.step, r.w);
    }
    Ok(())
}

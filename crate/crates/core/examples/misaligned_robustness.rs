//! Approximately aligned objectives: the specification example with one
//! objective shifted so that the approximate solution set has size ε. The
//! residual stalls on a plateau that shrinks with ε.

use amoo::analysis::plateau;
use amoo::driver::{run, InnerConfig, RunConfig};
use amoo::problems::{specification_shifts_for_eps, ProblemSpec};
use amoo::weighting::{CamooConfig, PamooConfig, WeightingConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (w, inner) in [
        (WeightingConfig::Camoo(CamooConfig::default()), InnerConfig::Gd { step: 0.25 }),
        (WeightingConfig::Pamoo(PamooConfig::default()), InnerConfig::Gd { step: 1.0 }),
        (WeightingConfig::Equal, InnerConfig::Gd { step: 0.25 }),
    ] {
        for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
            let spec = ProblemSpec::Misaligned {
                base: Box::new(ProblemSpec::Specification { delta: 0.1 }),
                shifts: specification_shifts_for_eps(0.1, eps)?,
            };
            let mut cfg = RunConfig::new(spec, w.clone(), inner.clone(), 2000);
            cfg.record_every = 10;
            println!("{:>5} eps = {eps:.0e}: plateau {:.3e}", w.name(), plateau(&run(&cfg)?, 0.2)?);
        }
    }
    Ok(())
}

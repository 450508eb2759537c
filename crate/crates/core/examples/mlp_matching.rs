//! Student network matching a teacher under seven differently weighted
//! losses (desk scale). Compares EW, diagonal CAMOO and PAMOO by final
//! mean squared error. Takes a few seconds per CAMOO run in release mode.

use amoo::driver::{run, InnerConfig, RunConfig};
use amoo::problems::{MlpSpec, MlpVariant, ProblemSpec};
use amoo::weighting::{CamooConfig, PamooConfig, WeightingConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    for variant in [MlpVariant::Selection, MlpVariant::LocalCurvature] {
        for w in [
            WeightingConfig::Equal,
            WeightingConfig::Camoo(CamooConfig::diagonal()),
            WeightingConfig::Pamoo(PamooConfig::default()),
        ] {
            let mut cfg = RunConfig::new(
                ProblemSpec::MlpMatching(MlpSpec::desk(variant, seed)),
                w.clone(),
                InnerConfig::adam(0.005),
                2000,
            )
            .with_seed(seed);
            cfg.record_every = 500;
            let trace = run(&cfg)?;
            let msq: Vec<String> = trace.records.iter().map(|r| format!("{:.3e}", r.msq.unwrap_or(f64::NAN))).collect();
            println!("{variant:?} {:>5}: msq every 500 steps {}", w.name(), msq.join(" "));
        }
    }
    Ok(())
}

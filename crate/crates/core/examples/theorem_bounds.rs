//! Theory-preset runs checked against the CAMOO and PAMOO rate bounds.

use amoo::analysis::{theorem_bound_check, TheoremKind, TheoremParams};
use amoo::driver::{run, RunConfig};
use amoo::problems::{build, ProblemSpec};
use amoo::weighting::{CamooConfig, PamooConfig, WeightingConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for spec in [
        ProblemSpec::Specification { delta: 0.1 },
        ProblemSpec::Selection { delta: 0.1, m: 3, n: 4 },
    ] {
        let p = build(&spec)?;
        let beta = p.meta.beta.ok_or("unknown beta")?;
        for (w, which, mu) in [
            (WeightingConfig::Camoo(CamooConfig::default()), TheoremKind::Camoo, p.meta.mu_g),
            (WeightingConfig::Pamoo(PamooConfig::default()), TheoremKind::Pamoo, p.meta.mu_l),
        ] {
            let trace = run(&RunConfig::theory(spec.clone(), w, 200))?;
            let tp = TheoremParams { beta, mu: mu.ok_or("unknown mu")?, m_f: p.meta.m_f, m: p.m(), which };
            let check = theorem_bound_check(&trace, &tp)?;
            let last = trace.last().ok_or("empty trace")?;
            println!(
                "{:<28} {which:?}: holds = {}, factor {:.4}, final residual {:.3e}, bound {:.3e}",
                p.name,
                check.holds,
                tp.factor(),
                last.residual.unwrap_or(f64::NAN),
                check.bound.last().copied().unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}

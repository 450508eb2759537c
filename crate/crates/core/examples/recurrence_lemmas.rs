//! The scalar recurrences behind the convergence proofs, iterated with
//! equality and compared with their closed-form bounds.

use amoo::analysis::{recurrence_simulate_and_bound, RecurrenceParams, RecurrenceVariant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (a1, a2, r0) in [(0.5, 1.0, 100.0), (1.5, 10.0, 1.0), (0.1, 0.0, 0.1)] {
        let exact = recurrence_simulate_and_bound(&RecurrenceParams::exact(a1, a2, r0, 1000), RecurrenceVariant::Exact)?;
        let eps = recurrence_simulate_and_bound(&RecurrenceParams::eps_maximal(a1, a2, r0, 1000), RecurrenceVariant::Eps)?;
        println!("alpha1 = {a1}, alpha2 = {a2}, r0 = {r0}");
        for k in [0, 10, 100, 1000] {
            println!(
                "  k = {k:>4}: exact r {:.3e} <= {:.3e}   eps r {:.3e} <= {:.3e}",
                exact.r[k], exact.bound[k], eps.r[k], eps.bound[k]
            );
        }
        println!("  k0 = {} / {}, eps plateau {:.3e}, holds: {} / {}", exact.k0, eps.k0, eps.plateau, exact.holds, eps.holds);
    }
    Ok(())
}

//! Hutchinson estimates of a Hessian diagonal from Hessian-vector products
//! alone, with the error shrinking as the probe count grows.

use amoo::hessians::{hutchinson_diag, HutchinsonConfig};
use amoo::linalg::SymMatrix;
use amoo::objective::GradientOnly;
use amoo::problems::Quadratic;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let h = SymMatrix::from_fn(n, |i, j| if i == j { 3.0 + 3.0 * (i as f64 / n as f64) } else { 0.0 });
    let h = h.add(&SymMatrix::symmetrize(n, &(0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<_>>())?.off_diagonal())?;
    let diag = h.diagonal();
    // Gradient-only access: products come from finite differences.
    let f = GradientOnly(Quadratic::centered(h));
    let x = vec![0.5; n];
    for samples in [1, 10, 100, 1000, 10_000] {
        let cfg = HutchinsonConfig { num_samples: samples, rng_seed: 7, ..Default::default() };
        let est = hutchinson_diag(&f, &x, &cfg)?;
        let worst = est.values.iter().zip(&diag).map(|(e, d)| ((e - d) / d).abs()).fold(0.0, f64::max);
        println!("N = {samples:>6}: worst relative error {:.2}%", 100.0 * worst);
    }
    Ok(())
}

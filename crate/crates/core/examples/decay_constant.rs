//! Empirical decay constants on F₂ for `κ = (1 + L)²`, compared with the
//! Haagerup-inequality bound `π/√6`.

use twisted_fourier::algebra::WeightFunction;
use twisted_fourier::cocycles::{Cocycle, DEFAULT_SEED};
use twisted_fourier::groups::GroupDescriptor;
use twisted_fourier::operators::{decay_constant_lower, ElementSampler, SolverOptions};

fn main() -> twisted_fourier::Result<()> {
    let f2 = GroupDescriptor::free(2)?;
    let kappa = WeightFunction::poly(&f2, 2.0)?;
    let samples = ElementSampler::new(&f2, 5, 8, DEFAULT_SEED)?.take(200);
    let est = decay_constant_lower(&kappa, &Cocycle::trivial(&f2), &samples, 8.0, &SolverOptions::default())?;
    println!(
        "max ratio over {} samples: {:.6} (sample {}), bound π/√6 = {:.6}",
        samples.len(),
        est.lower,
        est.argmax,
        std::f64::consts::PI / 6f64.sqrt()
    );
    Ok(())
}

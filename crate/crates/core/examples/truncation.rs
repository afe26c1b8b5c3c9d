//! Truncating `r^L` on F₂ to a ball so that the discarded part has
//! multiplier norm at most `C/n`, using the weight `κ = r^{-L/2}`.

use twisted_fourier::algebra::WeightFunction;
use twisted_fourier::groups::GroupDescriptor;
use twisted_fourier::multipliers::{truncate_with_bound, Multiplier, DEFAULT_SCAN_CAP};

fn main() -> twisted_fourier::Result<()> {
    let f2 = GroupDescriptor::free(2)?;
    let r = 0.81;
    let phi = Multiplier::abel_poisson(&f2, r)?;
    let kappa = WeightFunction::exp(&f2, 1.0 / r.sqrt())?;
    for n in [10, 100, 1000] {
        let cert = truncate_with_bound(&phi, &kappa, 1.0, n, DEFAULT_SCAN_CAP)?;
        println!(
            "n = {n:4}: A = Ball({}), sup outside = {:.6} ≤ 1/n, error ≤ {:.6}",
            cert.radius, cert.sup_outside, cert.certified_error
        );
    }
    Ok(())
}

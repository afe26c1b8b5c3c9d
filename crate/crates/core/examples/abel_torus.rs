//! Abel–Poisson summation on the noncommutative 2-torus. The multiplier is
//! constant `r` on the support of the sample element, so the error is
//! `(1 - r)` times its norm.

use twisted_fourier::codec::read_element;
use twisted_fourier::operators::SolverOptions;
use twisted_fourier::summation::{run_summation, summing_net, NetKind};

fn main() -> twisted_fourier::Result<()> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/torus_sample.json");
    let (x, sigma) = read_element(&path)?;
    let kind = NetKind::Abel { schedule: vec![0.5, 0.9, 0.99], length: None };
    let net = summing_net(&x.group(), &kind)?;
    for rec in run_summation(&x.into(), &sigma, &net, 40.0, &SolverOptions::default())? {
        let mid = rec.bracket.midpoint() / (1.0 - rec.index);
        println!("r = {:4}: error in [{:.8}, {:.8}], midpoint / (1 - r) = {mid:.8}", rec.index, rec.error_lower(), rec.error_upper());
    }
    Ok(())
}

//! Certified brackets for operator norms. The sum of the free generators
//! and their inverses has norm `2√3`; the torus element
//! `U + U* + V + V*` with `θ = π` has norm `2√2`.

use twisted_fourier::codec::read_element;
use twisted_fourier::operators::{bracket_norm, SolverOptions};

fn main() -> twisted_fourier::Result<()> {
    let data = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data");
    let opts = SolverOptions::default();
    for (file, exact) in [("free_sphere.json", 2.0 * 3f64.sqrt()), ("torus_sample.json", 2.0 * 2f64.sqrt())] {
        let (f, sigma) = read_element(&data.join(file))?;
        let b = bracket_norm(&f, &sigma, &[2.0, 4.0, 8.0], &opts)?;
        println!(
            "{file}: [{:.10}, {:.10}] at R = {}, exact {exact:.10}",
            b.lower, b.upper, b.lower_method.radius
        );
    }
    Ok(())
}

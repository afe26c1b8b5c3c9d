//! Haagerup content: intervals in ℤ reach `|E|^{1/2}`, while the unit
//! sphere of F₂ stays near `√3` instead of `2`.

use twisted_fourier::groups::{enumerate, GroupDescriptor, GroupElement, LengthKind, Region};
use twisted_fourier::operators::{content_lower, ContentOptions};

fn main() -> twisted_fourier::Result<()> {
    let z = GroupDescriptor::lattice(1, LengthKind::L1)?;
    let opts = ContentOptions::default();
    for n in [4, 9, 16] {
        let set: Vec<_> = (0..n).map(|k| GroupElement::lattice(&[k])).collect();
        let est = content_lower(&z, &set, 80.0, &opts)?;
        println!("ℤ, |E| = {n:2}: {:.6} ≤ c(E) ≤ {:.6}", est.lower, est.upper);
    }
    let f2 = GroupDescriptor::free(2)?;
    let s1 = enumerate(&f2, Region::Sphere(1))?;
    let est = content_lower(&f2, s1.elements(), 8.0, &opts)?;
    println!("F₂, S₁: {:.6} ≤ c(E) ≤ {:.6} at R = 8 (limit √3 = {:.6})", est.lower, est.upper, 3f64.sqrt());
    Ok(())
}

//! Twisted convolution on the noncommutative 2-torus: the unitaries
//! `U = δ_{(1,0)}` and `V = δ_{(0,1)}` satisfy `VU = e^{iθ} UV`.

use num_complex::Complex64;
use twisted_fourier::algebra::{involution, twisted_convolve, AlgebraElement};
use twisted_fourier::cocycles::Cocycle;
use twisted_fourier::groups::{GroupDescriptor, GroupElement, LengthKind};

fn main() -> twisted_fourier::Result<()> {
    let z2 = GroupDescriptor::lattice(2, LengthKind::L1)?;
    let theta = 0.9;
    let sigma = Cocycle::sigma_theta(&z2, &[0.0, theta, 0.0, 0.0])?;
    let u = AlgebraElement::delta(&z2, GroupElement::lattice(&[1, 0]))?;
    let v = AlgebraElement::delta(&z2, GroupElement::lattice(&[0, 1]))?;
    let uv = twisted_convolve(&u, &v, &sigma)?;
    let vu = twisted_convolve(&v, &u, &sigma)?;
    let g = GroupElement::lattice(&[1, 1]);
    let ratio = vu.coefficient(&g) / uv.coefficient(&g);
    println!("VU / UV = {ratio:.12} (e^{{iθ}} = {:.12})", Complex64::from_polar(1.0, -theta));

    let ustar = involution(&u, &sigma)?;
    let one = twisted_convolve(&ustar, &u, &sigma)?;
    println!("U*U = {:?}, τ(U*U) = {}", one.terms().map(|(g, c)| (z2.format(g), *c)).collect::<Vec<_>>(), one.tau());
    Ok(())
}

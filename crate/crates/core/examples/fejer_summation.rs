//! Fejér summation on ℤ and on the Heisenberg group. On ℤ the error for
//! `δ₁ + δ₋₁` is exactly `2/n`.

use twisted_fourier::algebra::AlgebraElement;
use twisted_fourier::cocycles::Cocycle;
use twisted_fourier::groups::{GroupDescriptor, LengthKind};
use twisted_fourier::multipliers::Multiplier;
use twisted_fourier::operators::SolverOptions;
use twisted_fourier::summation::{folner_defect, run_summation, summing_net, FolnerNet, NetKind};

fn main() -> twisted_fourier::Result<()> {
    let z = GroupDescriptor::lattice(1, LengthKind::L1)?;
    let boxes = FolnerNet::for_group(&z)?;
    let fejer = Multiplier::fejer(&z, &boxes.set(&z, 5)?)?;
    let coeffs: Vec<_> = (-5..=5).map(|k| format!("{}", fejer.exact(&z.parse(&k.to_string()).unwrap()).unwrap())).collect();
    println!("Fejér multiplier n = 5: {}", coeffs.join(" "));

    let x = AlgebraElement::indicator(&z, &[z.parse("1")?, z.parse("-1")?])?;
    let net = summing_net(&z, &NetKind::Fejer { folner: None, schedule: vec![2, 4, 8, 16, 32] })?;
    for rec in run_summation(&x.into(), &Cocycle::trivial(&z), &net, 50.0, &SolverOptions::default())? {
        println!("n = {:2}: error in [{:.8}, {:.8}], 2/n = {:.8}", rec.index, rec.error_lower(), rec.error_upper(), 2.0 / rec.index);
    }

    let h = GroupDescriptor::heisenberg();
    let net = FolnerNet::for_group(&h)?;
    let gen = h.generators()[0].clone();
    for n in [2, 4, 8] {
        println!("Heisenberg box {n}: defect {:.5}", folner_defect(&h, &net.set(&h, n)?, &gen)?);
    }
    Ok(())
}

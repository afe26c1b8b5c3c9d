//! Cocycle validation and the coboundary invariance of operator norms:
//! twisting by `∂β` is undone by multiplying coefficients with `β`.

use num_complex::Complex64;
use twisted_fourier::algebra::AlgebraElement;
use twisted_fourier::cocycles::{validate_cocycle, Cocycle, PhaseFamily};
use twisted_fourier::groups::{GroupDescriptor, LengthKind};
use twisted_fourier::operators::{norm_lower, SolverOptions};

fn main() -> twisted_fourier::Result<()> {
    let z2 = GroupDescriptor::lattice(2, LengthKind::L1)?;
    let theta = Cocycle::sigma_theta(&z2, &[0.0, 1.3, -0.4, 0.0])?;
    let rep = validate_cocycle(&theta, 3)?;
    println!(
        "theta cocycle: identity defect {:.2e}, normalization {:.2e}, modulus {:.2e}",
        rep.max_identity_defect, rep.max_normalization_defect, rep.max_modulus_defect
    );

    let f2 = GroupDescriptor::free(2)?;
    let beta = PhaseFamily::HashedPhase { seed: 7 };
    let sigma = Cocycle::coboundary(&f2, beta.clone())?;
    let f = AlgebraElement::from_terms(
        &f2,
        ["a", "bA", "ab", "B"]
            .iter()
            .zip([1.0, -0.5, 2.0, 0.25])
            .map(|(w, c)| Ok((f2.parse(w)?, Complex64::new(c, 0.3 * c))))
            .collect::<twisted_fourier::Result<Vec<_>>>()?,
    )?;
    let phase = twisted_fourier::cocycles::PhaseFunction::new(&f2, &beta)?;
    let bf = f.map(|g, c| c * phase.evaluate(g));
    let opts = SolverOptions::default();
    let twisted = norm_lower(&f, &sigma, 6.0, &opts)?.value;
    let untwisted = norm_lower(&bf, &Cocycle::trivial(&f2), 6.0, &opts)?.value;
    println!("‖π_∂β(f)‖ ≥ {twisted:.12}, ‖λ(βf)‖ ≥ {untwisted:.12}, difference {:.1e}", (twisted - untwisted).abs());
    Ok(())
}

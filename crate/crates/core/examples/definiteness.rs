//! Positive and negative definiteness checks and Schoenberg's
//! correspondence between them.

use twisted_fourier::groups::{GroupDescriptor, LengthKind};
use twisted_fourier::multipliers::{nd_check, pd_check, schoenberg_crosscheck, DefinitenessOptions, Multiplier};

fn main() -> twisted_fourier::Result<()> {
    let opts = DefinitenessOptions::default();
    let z = GroupDescriptor::lattice(1, LengthKind::L1)?;
    let f2 = GroupDescriptor::free(2)?;

    let r = pd_check(&Multiplier::abel_poisson(&f2, 0.6)?, 5.0, &opts)?;
    println!("0.6^L on F₂: p.d. {} (λ_min = {:.3e}, n = {})", r.pass, r.extreme_eigenvalue, r.matrix_dim);

    for (name, group, power, radius) in [("|k|", z, 1.0, 10.0), ("|k|³", z, 3.0, 4.0), ("L", f2, 1.0, 4.0)] {
        let psi = Multiplier::length_power(&group, power)?;
        let nd = nd_check(&psi, radius, &opts)?;
        let s = schoenberg_crosscheck(&psi, radius, &[0.1, 1.0, 5.0], &opts)?;
        let pd: Vec<_> = s.pd.iter().map(|p| format!("t={}: {}", p.t, p.report.pass)).collect();
        println!("{name} on {group}: n.d. {} (λ_max = {:.3e}); e^{{-tψ}} p.d. {}; consistent {}", nd.pass, nd.extreme_eigenvalue, pd.join(", "), s.consistent);
    }
    Ok(())
}

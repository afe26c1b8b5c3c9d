//! Ball sizes of the built-in groups: polynomial growth for the lattices,
//! the Heisenberg group and the dihedral group, exponential for F₂.

use twisted_fourier::groups::{enumerate, GroupDescriptor, LengthKind, Region};

fn main() -> twisted_fourier::Result<()> {
    let groups = [
        GroupDescriptor::lattice(1, LengthKind::L1)?,
        GroupDescriptor::lattice(2, LengthKind::L1)?,
        GroupDescriptor::lattice(2, LengthKind::L2)?,
        GroupDescriptor::heisenberg(),
        GroupDescriptor::dihedral(),
        GroupDescriptor::free(2)?,
    ];
    for group in &groups {
        let sizes = (0..=6)
            .map(|r| Ok(enumerate(group, Region::Ball(r as f64))?.len().to_string()))
            .collect::<twisted_fourier::Result<Vec<_>>>()?;
        println!("{group:>16}: |Ball(0..=6)| = {}", sizes.join(" "));
    }
    Ok(())
}

//! Reading and re-encoding the shipped sample elements reproduces their
//! bytes.

use twisted_fourier::codec::{decode_element, encode_element};

fn main() -> twisted_fourier::Result<()> {
    let data = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data");
    for file in ["torus_sample.json", "free_sphere.json"] {
        let text = std::fs::read_to_string(data.join(file))?;
        let (f, sigma) = decode_element(&text)?;
        let same = encode_element(&f, &sigma)? == text;
        println!("{file}: {} terms in {}, byte-identical re-encoding: {same}", f.len(), f.group());
    }
    Ok(())
}

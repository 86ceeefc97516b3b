//! Compatibility of the built-in harmonic structures, and what happens when
//! the renormalization factors are wrong.

use bgd_harmonics::pcf::{validate_structure, COMPAT_TOLERANCE};
use bgd_harmonics::registry;

fn main() {
    for (name, hs) in [
        ("gasket", registry::sierpinski_gasket()),
        ("hexagasket", registry::hexagasket()),
        ("vicsek", registry::vicsek()),
    ] {
        println!(
            "{name}: N = {}, Q = {}, r = {:?}, deviation {:.2e}",
            hs.alphabet_size(),
            hs.boundary_size(),
            hs.renorms(),
            hs.compatibility_deviation().unwrap()
        );
    }
    let wrong = registry::sierpinski_gasket().with_renorm(vec![0.5; 3]).unwrap();
    println!("\ngasket with r = 1/2:\n{}", validate_structure(&wrong, COMPAT_TOLERANCE));
}

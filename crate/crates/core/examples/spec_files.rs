//! Writing a spec to JSON, reading it back and checking it.

use bgd_harmonics::bgd::{validate_bgd, BgdSpec, SpecFile};
use bgd_harmonics::registry;

fn main() {
    let file = SpecFile::from(&registry::vicsek_corner());
    let text = serde_json::to_string_pretty(&file).unwrap();
    println!("{text}");
    let back: SpecFile = serde_json::from_str(&text).unwrap();
    let spec = BgdSpec::try_from(back).unwrap();
    println!("round trip equal: {}", spec == registry::vicsek_corner());
    println!("{}", validate_bgd(&spec));
}

//! Words of the domain graph: how many cylinders each depth has.

use bgd_harmonics::bgd::{count_words, enumerate_words};
use bgd_harmonics::registry;

fn main() {
    for ex in registry::EXAMPLES {
        let spec = ex.spec();
        println!("{} ({} domains, {} edges)", ex.name, spec.domain_count(), spec.edges.len());
        for i in 0..spec.domain_count() {
            let counts: Vec<u128> = (0..=8).map(|m| count_words(&spec, i, m)).collect();
            println!("  domain {}: counts for m = 0..8 {counts:?}", i + 1);
        }
        let words: Vec<String> = enumerate_words(&spec, 0, 2).unwrap().iter().map(|w| w.key()).collect();
        println!("  depth 2 from domain 1: {}", words.join(" "));
    }
}

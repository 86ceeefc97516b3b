//! Reusing solved traces from an on-disk cache.

use std::time::Instant;

use bgd_harmonics::bgd::FixedPointConfig;
use bgd_harmonics::cache::{cached_fixed_point, TraceCache};
use bgd_harmonics::registry;

fn main() {
    let dir = std::env::temp_dir().join("bgd-harmonics-cache-example");
    let cache = TraceCache::new(&dir);
    let spec = registry::sg_cut();
    let cfg = FixedPointConfig {
        tol: 1e-12,
        max_iter: 10_000,
        record_history: false,
    };
    for _ in 0..2 {
        let t = Instant::now();
        let (set, hit) = cached_fixed_point(Some(&cache), &spec, cfg).unwrap();
        println!(
            "hit {hit:5}: R = {:.15} in {:?} ({})",
            set.trace(0).boundary_resistance(0),
            t.elapsed(),
            cache.path(&spec, cfg.tol).display()
        );
    }
    let _ = std::fs::remove_dir_all(dir);
}
